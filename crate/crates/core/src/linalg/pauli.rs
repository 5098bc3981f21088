//! Single-qubit Pauli matrices.

use super::matrix::{c, ComplexMatrix};

pub fn i2() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

pub fn x() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

pub fn y() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 1) => c(0.0, -1.0),
        (1, 0) => c(0.0, 1.0),
        _ => c(0.0, 0.0),
    })
}

pub fn z() -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)])
}

/// Matrix for a single Pauli letter, `None` for anything outside `{I, X, Y, Z}`.
pub fn letter(ch: char) -> Option<ComplexMatrix> {
    match ch {
        'I' => Some(i2()),
        'X' => Some(x()),
        'Y' => Some(y()),
        'Z' => Some(z()),
        _ => None,
    }
}
