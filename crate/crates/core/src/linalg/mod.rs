//! Dense complex linear algebra for small operators (dimension at most 64).
//!
//! Validated newtypes wrap a [`ComplexMatrix`]: [`HermitianOperator`],
//! [`UnitaryOperator`], [`Projector`], [`StateVector`] and [`DensityOperator`].
//! Exponentials of Hermitian generators go through the eigendecomposition, so
//! every propagator built here is unitary to working precision.

mod eigen;
mod matrix;
mod operators;
pub mod pauli;
pub mod tolerance;

use thiserror::Error;

pub use eigen::{expi_hermitian, hermitian_eig, schatten_inf_norm, tensor_product, HermitianEigen};
pub(crate) use eigen::{spectral_sum, unitary_eig};
pub use matrix::ComplexMatrix;
pub use operators::{DensityOperator, HermitianOperator, Projector, StateVector, UnitaryOperator};

#[cfg(test)]
pub(crate) use matrix::c;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension must be positive")]
    EmptyDimension,
    #[error("expected {} entries for dimension {dim}, found {found}", dim * dim)]
    EntryCount { dim: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NotFinite,
    #[error("dimension {dim} exceeds the capacity limit {max}")]
    Capacity { dim: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not unitary (max |U^dagger U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("matrix is not idempotent (max |P^2 - P| = {deviation:e})")]
    NotIdempotent { deviation: f64 },
    #[error("projector trace {trace} is not an integer rank")]
    FractionalTrace { trace: f64 },
    #[error("state norm {norm} differs from 1")]
    NotNormalized { norm: f64 },
    #[error("density operator trace {trace} differs from 1")]
    DensityTrace { trace: f64 },
    #[error("density operator has negative eigenvalue {eigenvalue:e}")]
    NegativeEigenvalue { eigenvalue: f64 },
    #[error("eigen solver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
}

pub(crate) fn check_same_dim(expected: usize, found: usize) -> Result<(), LinalgError> {
    if expected != found {
        return Err(LinalgError::DimensionMismatch { expected, found });
    }
    Ok(())
}
