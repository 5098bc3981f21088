//! Spectral decomposition of unitaries into distinct-phase projectors.
//!
//! Eigenvalues of a unitary are grouped by circular phase distance: two eigenvalues
//! belong to the same projector iff the gap between neighbouring phases is at most
//! the grouping tolerance. A group whose total angular spread exceeds the tolerance
//! (a chain of small gaps) is rejected instead of silently merged.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{
    check_same_dim, expi_hermitian, tolerance as tol, unitary_eig, ComplexMatrix,
    HermitianOperator, LinalgError, Projector, UnitaryOperator,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("grouping tolerance {0:e} outside [1e-10, 1e-2]")]
    ToleranceOutOfRange(f64),
    #[error(
        "ambiguous eigenphase clustering: gaps chain across the tolerance {tol:e} \
         (cluster spread {spread:e}, largest internal gap {gap:e} after phase {after:.12})"
    )]
    AmbiguousClustering {
        gap: f64,
        spread: f64,
        after: f64,
        tol: f64,
    },
    #[error("spectral decomposition failed its consistency check (defect {defect:e})")]
    Inconsistent { defect: f64 },
}

const RECONSTRUCTION: f64 = 1e-9;

/// `U = sum_mu exp(i phi_mu) P_mu` with distinct phases in `(-pi, pi]`, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    phases: Vec<f64>,
    projectors: Vec<Projector>,
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_phase(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

impl SpectralDecomposition {
    /// Number of distinct eigenphases.
    pub fn m(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    /// Smallest circular distance between two distinct phases; `2 pi` when `m = 1`.
    pub fn min_phase_gap(&self) -> f64 {
        let mut best = 2.0 * PI;
        for i in 0..self.m() {
            for j in (i + 1)..self.m() {
                best = best.min(circular_distance(self.phases[i], self.phases[j]));
            }
        }
        best
    }

    /// `sum_mu exp(i phi_mu) P_mu`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim());
        for (phi, p) in self.phases.iter().zip(&self.projectors) {
            acc = &acc + &p.matrix().scale(Complex64::from_polar(1.0, *phi));
        }
        acc
    }

    /// Same decomposition with every projector replaced by `P_mu (x) I_bath`.
    pub fn embed_left(&self, bath_dim: usize) -> Result<Self, SpectralError> {
        let projectors = self
            .projectors
            .iter()
            .map(|p| p.embed_left(bath_dim))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            phases: self.phases.clone(),
            projectors,
        })
    }

    fn consistency_defect(&self) -> f64 {
        let n = self.dim();
        let mut sum = ComplexMatrix::zeros(n);
        for p in &self.projectors {
            sum = &sum + p.matrix();
        }
        let mut defect = sum.max_abs_diff(&ComplexMatrix::identity(n));
        for i in 0..self.m() {
            for j in (i + 1)..self.m() {
                let cross = self.projectors[i].matrix() * self.projectors[j].matrix();
                defect = defect.max(cross.max_abs());
            }
        }
        defect
    }
}

pub fn decompose_unitary(
    u: &UnitaryOperator,
    group_tol: f64,
) -> Result<SpectralDecomposition, SpectralError> {
    let (lo, hi) = tol::PHASE_GROUPING_RANGE;
    if !(lo..=hi).contains(&group_tol) {
        return Err(SpectralError::ToleranceOutOfRange(group_tol));
    }
    let n = u.dim();
    let (values, vectors) = unitary_eig(u)?;
    let mut order: Vec<(f64, usize)> = values
        .iter()
        .enumerate()
        .map(|(k, z)| (wrap_phase(z.arg()), k))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));

    // gap[k] is the circular gap from sorted entry k to entry k+1 (mod n)
    let gaps: Vec<f64> = (0..n)
        .map(|k| {
            if k + 1 < n {
                order[k + 1].0 - order[k].0
            } else {
                order[0].0 + 2.0 * PI - order[n - 1].0
            }
        })
        .collect();

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    if n == 1 {
        clusters.push(vec![0]);
    } else {
        // start walking right after the widest gap so no cluster straddles the start
        let widest = (0..n)
            .max_by(|&a, &b| gaps[a].total_cmp(&gaps[b]))
            .unwrap_or(0);
        let start = (widest + 1) % n;
        let mut current = vec![start];
        let mut spread = 0.0;
        let mut largest = (0.0, order[start].0);
        for step in 0..n - 1 {
            let k = (start + step) % n;
            let next = (k + 1) % n;
            if gaps[k] > group_tol {
                clusters.push(std::mem::take(&mut current));
                spread = 0.0;
                largest = (0.0, order[next].0);
            } else {
                spread += gaps[k];
                if gaps[k] > largest.0 {
                    largest = (gaps[k], order[k].0);
                }
                if spread > group_tol {
                    return Err(SpectralError::AmbiguousClustering {
                        gap: largest.0,
                        spread,
                        after: largest.1,
                        tol: group_tol,
                    });
                }
            }
            current.push(next);
        }
        clusters.push(current);
    }

    let mut groups: Vec<(f64, Projector)> = clusters
        .into_iter()
        .map(|members| {
            let mut mean = Complex64::new(0.0, 0.0);
            let mut p = ComplexMatrix::zeros(n);
            for &s in &members {
                let k = order[s].1;
                mean += values[k];
                let col: Vec<Complex64> = (0..n).map(|i| vectors.get(i, k)).collect();
                p = &p + &ComplexMatrix::outer(&col, &col);
            }
            let phase = wrap_phase(mean.arg());
            let rank = members.len();
            (phase, Projector::new_unchecked(p, rank))
        })
        .collect();
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (phases, projectors) = groups.into_iter().unzip();
    let decomposition = SpectralDecomposition { phases, projectors };

    let defect = decomposition.consistency_defect();
    if defect > tol::IDEMPOTENT {
        return Err(SpectralError::Inconsistent { defect });
    }
    let defect = decomposition.reconstruct().max_abs_diff(u.matrix());
    if defect > RECONSTRUCTION {
        return Err(SpectralError::Inconsistent { defect });
    }
    Ok(decomposition)
}

/// `exp(i K dt) P exp(-i K dt)`.
pub fn rotate_projector(
    p: &Projector,
    k: &HermitianOperator,
    dt: f64,
) -> Result<Projector, SpectralError> {
    check_same_dim(p.dim(), k.dim())?;
    if dt == 0.0 {
        return Ok(p.clone());
    }
    let r = expi_hermitian(k, dt)?;
    Ok(rotate_with(p, &r))
}

/// Conjugates a projector by a precomputed rotation.
pub fn rotate_with(p: &Projector, r: &UnitaryOperator) -> Projector {
    let rotated = r.conjugate(p.matrix());
    let sym = HermitianOperator::symmetrize(&rotated);
    Projector::new_unchecked(sym.matrix().clone(), p.rank())
}

/// Pinching `sum_mu P_mu H P_mu`.
pub fn project_block_diagonal(
    h: &HermitianOperator,
    d: &SpectralDecomposition,
) -> Result<HermitianOperator, SpectralError> {
    check_same_dim(d.dim(), h.dim())?;
    let mut acc = ComplexMatrix::zeros(h.dim());
    for p in d.projectors() {
        acc = &acc + &(&(p.matrix() * h.matrix()) * p.matrix());
    }
    Ok(HermitianOperator::symmetrize(&acc))
}
