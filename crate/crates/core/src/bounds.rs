//! Closed-form success-probability bounds for measurement steering and the
//! inverse problem: the measurement rate needed for a target failure probability.
//!
//! With `a = K + |H_SB|` (generator norm plus noise norm), duration `tau` and `N`
//! measurements,
//!
//! ```text
//! eps = 4 a^2 tau^2 / N * exp(2 a tau / N),     P(success) >= 1 - eps * exp(eps).
//! ```
//!
//! Requiring `eps * exp(eps) <= delta` is `eps <= W(delta)`, which inverts to
//! `lambda = N / tau >= 2a / W(W(delta) / (2 a tau))`.

use thiserror::Error;

/// Root of `w * exp(w) = 1`.
pub const OMEGA: f64 = 0.567_143_290_409_783_8;

const HALLEY_STEP_TOL: f64 = 1e-14;
const HALLEY_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("{field} must be finite and {rule} (got {value})")]
    InvalidInput {
        field: &'static str,
        rule: &'static str,
        value: f64,
    },
    #[error("Lambert W0 is evaluated on [0, inf) only (got {0})")]
    LambertDomain(f64),
    #[error("delta must lie in (0, 1) (got {0})")]
    DeltaDomain(f64),
}

/// Inputs of the success bound: `K = max_j |K_j|`, noise norm, duration and step count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub k_norm: f64,
    pub h_norm: f64,
    pub tau: f64,
    pub n_steps: u64,
}

impl BoundInputs {
    pub fn new(k_norm: f64, h_norm: f64, tau: f64, n_steps: u64) -> Result<Self, BoundsError> {
        nonnegative("k_norm", k_norm)?;
        nonnegative("h_norm", h_norm)?;
        if !(tau.is_finite() && tau > 0.0) {
            return Err(BoundsError::InvalidInput {
                field: "tau",
                rule: "positive",
                value: tau,
            });
        }
        if n_steps == 0 {
            return Err(BoundsError::InvalidInput {
                field: "n_steps",
                rule: "at least 1",
                value: 0.0,
            });
        }
        Ok(Self {
            k_norm,
            h_norm,
            tau,
            n_steps,
        })
    }

    /// Measurement rate `lambda = N / tau`.
    pub fn rate(&self) -> f64 {
        self.n_steps as f64 / self.tau
    }
}

fn nonnegative(field: &'static str, value: f64) -> Result<(), BoundsError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(BoundsError::InvalidInput {
            field,
            rule: "nonnegative",
            value,
        })
    }
}

pub fn epsilon(inputs: &BoundInputs) -> f64 {
    let a = inputs.k_norm + inputs.h_norm;
    let n = inputs.n_steps as f64;
    4.0 * a * a * inputs.tau * inputs.tau / n * (2.0 * a * inputs.tau / n).exp()
}

/// The same quantity written in terms of the rate: `4 a tau (a / lambda) exp(2 a / lambda)`.
pub fn epsilon_at_rate(k_norm: f64, h_norm: f64, tau: f64, rate: f64) -> f64 {
    let a = k_norm + h_norm;
    4.0 * a * tau * (a / rate) * (2.0 * a / rate).exp()
}

/// `1 - eps * exp(eps)`; negative values mean the bound carries no information.
pub fn success_bound(eps: f64) -> f64 {
    1.0 - eps * eps.exp()
}

/// Principal branch of the Lambert W function on `[0, inf)`.
pub fn lambert_w0(x: f64) -> Result<f64, BoundsError> {
    if x.is_nan() || x < 0.0 {
        return Err(BoundsError::LambertDomain(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    if x > 1e200 {
        // w e^w overflows here; Newton on w + ln w = ln x instead
        let lx = x.ln();
        let mut w = lx - lx.ln();
        for _ in 0..HALLEY_MAX_ITERATIONS {
            let step = (w + w.ln() - lx) / (1.0 + 1.0 / w);
            w -= step;
            if step.abs() <= HALLEY_STEP_TOL * w {
                break;
            }
        }
        return Ok(w);
    }
    let mut w = if x > std::f64::consts::E {
        let lx = x.ln();
        lx - lx.ln()
    } else {
        x / (1.0 + x)
    };
    for _ in 0..HALLEY_MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= HALLEY_STEP_TOL * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

/// Smallest measurement rate `lambda` with `eps * exp(eps) <= delta`.
///
/// Returns 0 when `k_norm + h_norm = 0`. The caller picks `N = ceil(lambda * tau)`.
pub fn required_measurement_rate(
    delta: f64,
    k_norm: f64,
    h_norm: f64,
    tau: f64,
) -> Result<f64, BoundsError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BoundsError::DeltaDomain(delta));
    }
    nonnegative("k_norm", k_norm)?;
    nonnegative("h_norm", h_norm)?;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(BoundsError::InvalidInput {
            field: "tau",
            rule: "positive",
            value: tau,
        });
    }
    let a = k_norm + h_norm;
    if a == 0.0 {
        return Ok(0.0);
    }
    let inner = lambert_w0(delta)? / (2.0 * a * tau);
    Ok(2.0 * a / lambert_w0(inner)?)
}

/// Step count `ceil(lambda * tau)`, at least one.
pub fn steps_for_rate(rate: f64, tau: f64) -> u64 {
    ((rate * tau).ceil() as u64).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2, PI};

    // independent oracle: bisection on w e^w = x over [0, max(1, x)]
    fn w_bisect(x: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, x.max(1.0));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn epsilon_examples() {
        assert_eq!(epsilon(&BoundInputs::new(0.0, 0.0, 2.0, 5).unwrap()), 0.0);
        let e100 = epsilon(&BoundInputs::new(FRAC_PI_2, 0.0, 1.0, 100).unwrap());
        let direct = PI * PI / 100.0 * (PI / 100.0).exp();
        assert!((e100 - direct).abs() < 1e-15);
        assert!((e100 - 0.10185).abs() < 5e-6);
        let e10 = epsilon(&BoundInputs::new(FRAC_PI_2, 0.0, 1.0, 10).unwrap());
        assert!((e10 - PI * PI / 10.0 * (PI / 10.0).exp()).abs() < 1e-14);
        assert!((e10 - 1.3513).abs() < 5e-5);
    }

    #[test]
    fn success_bound_examples() {
        assert_eq!(success_bound(0.0), 1.0);
        assert!(success_bound(OMEGA).abs() < 1e-10);
        assert!((success_bound(0.101847) - 0.88723).abs() < 1e-5);
        assert!(success_bound(0.58) < 0.0);
    }

    #[test]
    fn omega_constant_matches_bisection() {
        assert!((OMEGA - w_bisect(1.0)).abs() < 1e-15);
    }

    #[test]
    fn lambert_examples() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_4).abs() < 1e-10);
        assert!(matches!(lambert_w0(-0.1), Err(BoundsError::LambertDomain(_))));
    }

    #[test]
    fn lambert_extremes() {
        for &x in &[1e-300, 1e-12, 1e-3, 5.0, 1e10, 1e100, 1e250, 1e300] {
            let w = lambert_w0(x).unwrap();
            let rel = if x > 1e200 {
                ((w + w.ln()) - x.ln()).abs() / x.ln()
            } else {
                (w * w.exp() - x).abs() / x
            };
            assert!(rel < 1e-12, "x = {x:e}: rel {rel:e}");
            assert!(w <= x);
        }
    }

    #[test]
    fn rate_examples() {
        assert_eq!(required_measurement_rate(0.3, 0.0, 0.0, 2.0).unwrap(), 0.0);
        let lambda = required_measurement_rate(0.1, 1.0, 0.0, 1.0).unwrap();
        // oracle: bisection on N for eps(N) e^eps(N) = 0.1, as a real-valued N
        let f = |n: f64| {
            let e = 4.0 / n * (2.0 / n).exp();
            e * e.exp() - 0.1
        };
        let (mut lo, mut hi) = (1.0, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lambda - lo).abs() < 1e-8 * lambda);
        assert!((lambda - 45.8).abs() < 0.05, "{lambda}");
        assert!(matches!(
            required_measurement_rate(1.5, 1.0, 0.0, 1.0),
            Err(BoundsError::DeltaDomain(_))
        ));
        assert!(required_measurement_rate(0.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn rate_round_trip_fixed_point() {
        let (delta, k, h, tau) = (0.05, 2.0, 0.5, 3.0);
        let lambda = required_measurement_rate(delta, k, h, tau).unwrap();
        let n = steps_for_rate(lambda, tau);
        let eps = epsilon(&BoundInputs::new(k, h, tau, n).unwrap());
        assert!(eps * eps.exp() <= delta + 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(BoundInputs::new(-1.0, 0.0, 1.0, 1).is_err());
        assert!(BoundInputs::new(0.0, f64::NAN, 1.0, 1).is_err());
        assert!(BoundInputs::new(0.0, 0.0, 0.0, 1).is_err());
        assert!(BoundInputs::new(0.0, 0.0, 1.0, 0).is_err());
    }
}
