use nalgebra::{DMatrix, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::operators::{HermitianOperator, UnitaryOperator};
use super::tolerance as tol;
use super::LinalgError;

/// Eigendecomposition `H = V diag(lambda) V^dagger` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: UnitaryOperator,
}

impl HermitianEigen {
    /// `exp(i s H)` from the stored decomposition.
    pub fn expi(&self, s: f64) -> UnitaryOperator {
        let n = self.eigenvalues.len();
        if s == 0.0 {
            return UnitaryOperator::identity(n);
        }
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&l| Complex64::from_polar(1.0, s * l))
            .collect();
        UnitaryOperator::new_unchecked(spectral_sum(self.eigenvectors.matrix(), &phases))
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let diag: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&l| Complex64::new(l, 0.0))
            .collect();
        spectral_sum(self.eigenvectors.matrix(), &diag)
    }
}

/// `V diag(d) V^dagger`.
pub(crate) fn spectral_sum(v: &ComplexMatrix, d: &[Complex64]) -> ComplexMatrix {
    let vm = v.as_nalgebra();
    let mut scaled = vm.clone();
    for (j, &dj) in d.iter().enumerate() {
        for i in 0..vm.nrows() {
            scaled[(i, j)] *= dj;
        }
    }
    ComplexMatrix::from_nalgebra_unchecked(scaled * vm.adjoint())
}

/// Rotates each column so its largest-magnitude entry is real and positive.
fn fix_phases(v: &mut DMatrix<Complex64>) {
    for j in 0..v.ncols() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for i in 0..v.nrows() {
            let a = v[(i, j)].norm();
            // ties resolve to the lowest index
            if a > best_abs + 1e-12 {
                best = i;
                best_abs = a;
            }
        }
        if best_abs > 0.0 {
            let pivot = v[(best, j)];
            let rot = pivot.conj() / pivot.norm();
            for i in 0..v.nrows() {
                v[(i, j)] *= rot;
            }
        }
    }
}

pub fn hermitian_eig(h: &HermitianOperator) -> Result<HermitianEigen, LinalgError> {
    let n = h.dim();
    if n > tol::MAX_DIM {
        return Err(LinalgError::Capacity {
            dim: n,
            max: tol::MAX_DIM,
        });
    }
    let eig = SymmetricEigen::try_new(
        h.matrix().as_nalgebra().clone(),
        f64::EPSILON,
        tol::EIGEN_MAX_ITERATIONS,
    )
    .ok_or(LinalgError::NoConvergence {
        iterations: tol::EIGEN_MAX_ITERATIONS,
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    fix_phases(&mut vectors);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors: UnitaryOperator::new_unchecked(ComplexMatrix::from_nalgebra_unchecked(
            vectors,
        )),
    })
}

/// `exp(i s A)` for Hermitian `A`, computed as `V exp(i s lambda) V^dagger`.
pub fn expi_hermitian(a: &HermitianOperator, s: f64) -> Result<UnitaryOperator, LinalgError> {
    if !s.is_finite() {
        return Err(LinalgError::NotFinite);
    }
    if s == 0.0 {
        return Ok(UnitaryOperator::identity(a.dim()));
    }
    Ok(hermitian_eig(a)?.expi(s))
}

/// Largest singular value.
pub fn schatten_inf_norm(a: &ComplexMatrix) -> f64 {
    if a.max_abs() == 0.0 {
        return 0.0;
    }
    let svd = SVD::new(a.as_nalgebra().clone(), false, false);
    svd.singular_values.iter().fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Kronecker product, capped at dimension 64.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    a.kron(b)
}

/// Eigenpairs of a unitary, via a complex Schur factorization (diagonal for normal input).
/// Columns of the returned matrix are orthonormal eigenvectors.
pub(crate) fn unitary_eig(
    u: &UnitaryOperator,
) -> Result<(Vec<Complex64>, ComplexMatrix), LinalgError> {
    let schur = Schur::try_new(
        u.matrix().as_nalgebra().clone(),
        f64::EPSILON,
        tol::EIGEN_MAX_ITERATIONS,
    )
    .ok_or(LinalgError::NoConvergence {
        iterations: tol::EIGEN_MAX_ITERATIONS,
    })?;
    let (q, t) = schur.unpack();
    let values = t.diagonal().iter().copied().collect();
    Ok((values, ComplexMatrix::from_nalgebra_unchecked(q)))
}
