use num_complex::Complex64;

use super::eigen::hermitian_eig;
use super::matrix::ComplexMatrix;
use super::tolerance as tol;
use super::LinalgError;

fn check_dim(m: &ComplexMatrix) -> Result<(), LinalgError> {
    if m.dim() > tol::MAX_DIM {
        return Err(LinalgError::Capacity {
            dim: m.dim(),
            max: tol::MAX_DIM,
        });
    }
    Ok(())
}

/// Hermitian operator; the stored matrix is the exact symmetrization `(A + A^dagger) / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, LinalgError> {
        check_dim(&matrix)?;
        let adj = matrix.adjoint();
        let deviation = matrix.max_abs_diff(&adj);
        if deviation > tol::HERMITIAN {
            return Err(LinalgError::NotHermitian { deviation });
        }
        Ok(Self::symmetrize(&matrix))
    }

    /// Hermitian part of an arbitrary matrix, without a deviation check.
    pub fn symmetrize(matrix: &ComplexMatrix) -> Self {
        let sym = (matrix + &matrix.adjoint()).scale_real(0.5);
        Self { matrix: sym }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            matrix: self.matrix.scale_real(c),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::symmetrize(&(&self.matrix + &other.matrix))
    }

    /// `self (x) I_dim`.
    pub fn embed_left(&self, bath_dim: usize) -> Result<Self, LinalgError> {
        Ok(Self {
            matrix: self.matrix.kron(&ComplexMatrix::identity(bath_dim))?,
        })
    }

    /// `I_dim (x) self`.
    pub fn embed_right(&self, sys_dim: usize) -> Result<Self, LinalgError> {
        Ok(Self {
            matrix: ComplexMatrix::identity(sys_dim).kron(&self.matrix)?,
        })
    }

    /// Largest absolute eigenvalue.
    pub fn norm(&self) -> Result<f64, LinalgError> {
        let eig = hermitian_eig(self)?;
        Ok(eig
            .eigenvalues
            .iter()
            .fold(0.0_f64, |acc, &l| acc.max(l.abs())))
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.max_abs() == 0.0
    }
}

/// Unitary operator, `|U^dagger U - I| <= 1e-10`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOperator {
    matrix: ComplexMatrix,
}

impl UnitaryOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, LinalgError> {
        check_dim(&matrix)?;
        let gram = &matrix.adjoint() * &matrix;
        let deviation = gram.max_abs_diff(&ComplexMatrix::identity(matrix.dim()));
        if deviation > tol::UNITARY {
            return Err(LinalgError::NotUnitary { deviation });
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn pow(&self, exponent: u64) -> Self {
        Self {
            matrix: self.matrix.pow(exponent),
        }
    }

    /// `U X U^dagger`.
    pub fn conjugate(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.matrix.conjugate(x)
    }

    pub fn embed_left(&self, bath_dim: usize) -> Result<Self, LinalgError> {
        Ok(Self {
            matrix: self.matrix.kron(&ComplexMatrix::identity(bath_dim))?,
        })
    }

    /// Max-entry deviation from unitarity.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = &self.matrix.adjoint() * &self.matrix;
        gram.max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }
}

/// Orthogonal projector with its rank.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
    rank: usize,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, LinalgError> {
        check_dim(&matrix)?;
        let herm = HermitianOperator::new(matrix)?;
        let m = herm.matrix;
        let square = &m * &m;
        let deviation = square.max_abs_diff(&m);
        if deviation > tol::IDEMPOTENT {
            return Err(LinalgError::NotIdempotent { deviation });
        }
        let trace = m.trace().re;
        let rank = trace.round();
        if (trace - rank).abs() > tol::PROJECTOR_TRACE || rank < 0.0 {
            return Err(LinalgError::FractionalTrace { trace });
        }
        Ok(Self {
            matrix: m,
            rank: rank as usize,
        })
    }

    /// Rank-one projector onto a normalized vector.
    pub fn from_ket(ket: &StateVector) -> Self {
        Self {
            matrix: ComplexMatrix::outer(ket.amplitudes(), ket.amplitudes()),
            rank: 1,
        }
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix, rank: usize) -> Self {
        Self { matrix, rank }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
            rank: dim,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `I - P`.
    pub fn complement(&self) -> Self {
        Self {
            matrix: &ComplexMatrix::identity(self.dim()) - &self.matrix,
            rank: self.dim() - self.rank,
        }
    }

    /// `P (x) I_dim`.
    pub fn embed_left(&self, bath_dim: usize) -> Result<Self, LinalgError> {
        Ok(Self {
            matrix: self.matrix.kron(&ComplexMatrix::identity(bath_dim))?,
            rank: self.rank * bath_dim,
        })
    }

    pub fn tensor(&self, other: &Self) -> Result<Self, LinalgError> {
        Ok(Self {
            matrix: self.matrix.kron(&other.matrix)?,
            rank: self.rank * other.rank,
        })
    }
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, LinalgError> {
        if amplitudes.is_empty() {
            return Err(LinalgError::EmptyDimension);
        }
        if amplitudes.len() > tol::MAX_DIM {
            return Err(LinalgError::Capacity {
                dim: amplitudes.len(),
                max: tol::MAX_DIM,
            });
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NotFinite);
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > tol::STATE_NORM {
            return Err(LinalgError::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub(crate) fn new_unchecked(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Self { amplitudes }
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }

    /// `<psi| A |psi>` real part, for Hermitian `A`.
    pub fn expectation(&self, a: &ComplexMatrix) -> f64 {
        a.expectation(&self.amplitudes).re
    }
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Positive semidefinite unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, LinalgError> {
        let herm = HermitianOperator::new(matrix)?;
        let trace = herm.matrix.trace().re;
        if (trace - 1.0).abs() > tol::DENSITY_TRACE {
            return Err(LinalgError::DensityTrace { trace });
        }
        let eig = hermitian_eig(&herm)?;
        let min = eig.eigenvalues[0];
        if min < tol::DENSITY_MIN_EIGENVALUE {
            return Err(LinalgError::NegativeEigenvalue { eigenvalue: min });
        }
        Ok(Self {
            matrix: herm.matrix,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Spectral ensemble `{(p_k, |v_k>)}` with `p_k > 0`, largest weight first.
    pub fn ensemble(&self) -> Result<Vec<(f64, StateVector)>, LinalgError> {
        let herm = HermitianOperator::symmetrize(&self.matrix);
        let eig = hermitian_eig(&herm)?;
        let n = self.dim();
        let mut out = Vec::new();
        for k in (0..n).rev() {
            let p = eig.eigenvalues[k];
            if p <= 0.0 {
                continue;
            }
            let col: Vec<Complex64> = (0..n).map(|i| eig.eigenvectors.matrix().get(i, k)).collect();
            out.push((p, StateVector::new_unchecked(col)));
        }
        Ok(out)
    }
}
