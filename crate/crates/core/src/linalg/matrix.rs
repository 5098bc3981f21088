use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::tolerance::MAX_DIM;
use super::LinalgError;

/// Square dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    /// Builds a `dim x dim` matrix from row-major entries.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self, LinalgError> {
        if dim == 0 {
            return Err(LinalgError::EmptyDimension);
        }
        if entries.len() != dim * dim {
            return Err(LinalgError::EntryCount {
                dim,
                found: entries.len(),
            });
        }
        Self::from_nalgebra(DMatrix::from_row_slice(dim, dim, &entries))
    }

    pub fn from_nalgebra(inner: DMatrix<Complex64>) -> Result<Self, LinalgError> {
        if inner.nrows() != inner.ncols() {
            return Err(LinalgError::NotSquare {
                rows: inner.nrows(),
                cols: inner.ncols(),
            });
        }
        if inner.nrows() == 0 {
            return Err(LinalgError::EmptyDimension);
        }
        if inner.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NotFinite);
        }
        Ok(Self { inner })
    }

    pub(crate) fn from_nalgebra_unchecked(inner: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(inner.nrows(), inner.ncols());
        Self { inner }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self {
            inner: DMatrix::from_fn(dim, dim, f),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn from_diagonal(diagonal: &[Complex64]) -> Self {
        Self {
            inner: DMatrix::from_diagonal(&DVector::from_column_slice(diagonal)),
        }
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        assert_eq!(a.len(), b.len(), "outer product of unequal lengths");
        Self::from_fn(a.len(), |i, j| a[i] * b[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.inner[(row, col)]
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn into_nalgebra(self) -> DMatrix<Complex64> {
        self.inner
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            inner: &self.inner * c,
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.inner.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.inner
            .iter()
            .zip(other.inner.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    /// `A B - B A`.
    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }

    /// `A X A^dagger`.
    pub fn conjugate(&self, x: &Self) -> Self {
        Self {
            inner: &self.inner * &x.inner * self.inner.adjoint(),
        }
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, mut exponent: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.dim());
        while exponent > 0 {
            if exponent & 1 == 1 {
                acc = &acc * &base;
            }
            exponent >>= 1;
            if exponent > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim(), v.len(), "dimension mismatch");
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.inner[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `<v| A |v>`.
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let av = self.apply(v);
        v.iter().zip(av.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Self) -> Result<Self, LinalgError> {
        let dim = self.dim() * other.dim();
        if dim > MAX_DIM {
            return Err(LinalgError::Capacity { dim, max: MAX_DIM });
        }
        Ok(Self {
            inner: self.inner.kronecker(&other.inner),
        })
    }

    /// Row-major nested `[re, im]` pairs.
    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let z = self.inner[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect()
    }

    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<Self, LinalgError> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(LinalgError::NotSquare {
                    rows: dim,
                    cols: row.len(),
                });
            }
            entries.extend(row.iter().map(|&[re, im]| Complex64::new(re, im)));
        }
        Self::new(dim, entries)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| {
                    let z = self.inner[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self + &rhs
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self - &rhs
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix {
            inner: -&self.inner,
        }
    }
}

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
