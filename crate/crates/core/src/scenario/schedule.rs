//! Time-dependent generators `K(t)` on the system space.
//!
//! Every engine samples `K` at the left endpoint of each step: `K_j = K(j tau / N)`
//! for `j = 0..N`.

use thiserror::Error;

use crate::linalg::{check_same_dim, schatten_inf_norm, HermitianOperator, LinalgError};

const HORIZON_SLACK: f64 = 1e-12;
const GRID: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("schedule has no operators")]
    Empty,
    #[error("time {t} outside [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },
    #[error("table schedule queried off-grid at t = {t} (grid spacing {dt})")]
    OffGrid { t: f64, dt: f64 },
    #[error("knot times must be finite and strictly increasing (knot {index})")]
    Knots { index: usize },
    #[error("non-positive horizon {0}")]
    Horizon(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleKind {
    Constant(HermitianOperator),
    /// `K(t) = sum_p A_p t^p`.
    Polynomial(Vec<HermitianOperator>),
    PiecewiseLinear(Vec<(f64, HermitianOperator)>),
    /// One generator per step of width `horizon / len`.
    Table(Vec<HermitianOperator>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSchedule {
    kind: ScheduleKind,
    horizon: f64,
}

fn common_dim<'a>(ops: impl IntoIterator<Item = &'a HermitianOperator>) -> Result<usize, ScheduleError> {
    let mut dim = None;
    for op in ops {
        match dim {
            None => dim = Some(op.dim()),
            Some(d) => check_same_dim(d, op.dim())?,
        }
    }
    dim.ok_or(ScheduleError::Empty)
}

impl GeneratorSchedule {
    pub fn constant(k: HermitianOperator) -> Self {
        Self {
            kind: ScheduleKind::Constant(k),
            horizon: f64::INFINITY,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(HermitianOperator::zeros(dim))
    }

    pub fn polynomial(coefficients: Vec<HermitianOperator>) -> Result<Self, ScheduleError> {
        common_dim(&coefficients)?;
        Ok(Self {
            kind: ScheduleKind::Polynomial(coefficients),
            horizon: f64::INFINITY,
        })
    }

    pub fn piecewise_linear(knots: Vec<(f64, HermitianOperator)>) -> Result<Self, ScheduleError> {
        common_dim(knots.iter().map(|(_, k)| k))?;
        for (index, w) in knots.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(ScheduleError::Knots { index: index + 1 });
            }
        }
        if !knots.iter().all(|(t, _)| t.is_finite()) {
            return Err(ScheduleError::Knots { index: 0 });
        }
        let horizon = knots.last().map(|(t, _)| *t).unwrap_or(0.0);
        Ok(Self {
            kind: ScheduleKind::PiecewiseLinear(knots),
            horizon,
        })
    }

    pub fn table(steps: Vec<HermitianOperator>, tau: f64) -> Result<Self, ScheduleError> {
        common_dim(&steps)?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(ScheduleError::Horizon(tau));
        }
        Ok(Self {
            kind: ScheduleKind::Table(steps),
            horizon: tau,
        })
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ScheduleKind::Constant(_) => "constant",
            ScheduleKind::Polynomial(_) => "polynomial",
            ScheduleKind::PiecewiseLinear(_) => "piecewise_linear",
            ScheduleKind::Table(_) => "table",
        }
    }

    /// Constant and polynomial schedules have entries analytic in `t`.
    pub fn is_analytic(&self) -> bool {
        matches!(self.kind, ScheduleKind::Constant(_) | ScheduleKind::Polynomial(_))
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ScheduleKind::Constant(k) => k.dim(),
            ScheduleKind::Polynomial(c) => c[0].dim(),
            ScheduleKind::PiecewiseLinear(k) => k[0].1.dim(),
            ScheduleKind::Table(s) => s[0].dim(),
        }
    }

    /// Every operator in the payload.
    pub fn operators(&self) -> Vec<&HermitianOperator> {
        match &self.kind {
            ScheduleKind::Constant(k) => vec![k],
            ScheduleKind::Polynomial(c) => c.iter().collect(),
            ScheduleKind::PiecewiseLinear(k) => k.iter().map(|(_, op)| op).collect(),
            ScheduleKind::Table(s) => s.iter().collect(),
        }
    }

    pub fn sample(&self, t: f64) -> Result<HermitianOperator, ScheduleError> {
        let out_of_range = ScheduleError::OutOfRange {
            t,
            horizon: self.horizon,
        };
        let start = match &self.kind {
            ScheduleKind::PiecewiseLinear(k) => k[0].0,
            _ => 0.0,
        };
        let slack = HORIZON_SLACK * self.horizon.abs().max(1.0);
        if !t.is_finite() || t < start - slack || t > self.horizon + slack {
            return Err(out_of_range);
        }
        match &self.kind {
            ScheduleKind::Constant(k) => Ok(k.clone()),
            ScheduleKind::Polynomial(coeffs) => {
                let mut acc = HermitianOperator::zeros(coeffs[0].dim());
                for a in coeffs.iter().rev() {
                    acc = acc.scale(t).add(a);
                }
                Ok(acc)
            }
            ScheduleKind::PiecewiseLinear(knots) => {
                let i = knots
                    .windows(2)
                    .position(|w| t <= w[1].0)
                    .unwrap_or(knots.len().saturating_sub(2));
                if knots.len() == 1 {
                    return Ok(knots[0].1.clone());
                }
                let (t0, k0) = &knots[i];
                let (t1, k1) = &knots[i + 1];
                let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                Ok(k0.scale(1.0 - s).add(&k1.scale(s)))
            }
            ScheduleKind::Table(steps) => {
                let dt = self.horizon / steps.len() as f64;
                let x = t / dt;
                let r = x.round();
                if (x - r).abs() > GRID {
                    return Err(ScheduleError::OffGrid { t, dt });
                }
                let idx = (r.max(0.0) as usize).min(steps.len() - 1);
                Ok(steps[idx].clone())
            }
        }
    }

    /// The `N` left-endpoint samples `K(j tau / N)`.
    pub fn samples(&self, tau: f64, n: u64) -> Result<Vec<HermitianOperator>, ScheduleError> {
        let dt = tau / n as f64;
        (0..n).map(|j| self.sample(j as f64 * dt)).collect()
    }
}

/// Free-function form of [`GeneratorSchedule::sample`].
pub fn sample_generator(schedule: &GeneratorSchedule, t: f64) -> Result<HermitianOperator, ScheduleError> {
    schedule.sample(t)
}

/// `max_j ||K(j tau / N)||` over the left-endpoint samples.
pub fn k_max_norm(schedule: &GeneratorSchedule, tau: f64, n: u64) -> Result<f64, ScheduleError> {
    if let ScheduleKind::Constant(k) = schedule.kind() {
        return Ok(schatten_inf_norm(k.matrix()));
    }
    let dt = tau / n as f64;
    let mut max = 0.0f64;
    for j in 0..n {
        let k = schedule.sample(j as f64 * dt)?;
        max = max.max(schatten_inf_norm(k.matrix()));
    }
    Ok(max)
}
