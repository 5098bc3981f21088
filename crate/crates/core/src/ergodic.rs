//! Weighted phase sums `sum_n f(n/N) exp(i n phi)` and log-log convergence fits.
//!
//! For `phi != 0 (mod 2 pi)` these sums stay bounded as `N` grows; with
//! `f(x) = x^k` the magnitude tends to `1 / |1 - exp(i phi)|`. All sums use
//! compensated (Neumaier) summation.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_TERMS: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ErgodicError {
    #[error("N must lie in [1, 2^20] (got {0})")]
    TermCount(u64),
    #[error("summation range L={l}, M={m} invalid for N={n}")]
    Range { l: u64, m: u64, n: u64 },
    #[error("phi = {0} is 0 mod 2 pi: the limit has a pole")]
    Pole(f64),
    #[error("unsupported weight function `{0}` (known: one, x, x2, x3, exp, sin3x, exp*sin3x)")]
    UnsupportedWeight(String),
    #[error("convergence fit needs at least 3 points (got {0})")]
    TooFewPoints(usize),
    #[error("convergence fit needs positive N and values (point {index}: N={n}, value={value:e})")]
    NonPositive { index: usize, n: f64, value: f64 },
}

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

fn neumaier(acc: &mut (f64, f64), x: f64) {
    let (sum, comp) = acc;
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, z.re);
        neumaier(&mut self.im, z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

/// Closed family of real-analytic weights evaluated pointwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AnalyticWeight {
    /// `sum_p c_p x^p`.
    Polynomial(Vec<f64>),
    /// `exp(a x)`.
    Exp { a: f64 },
    /// `sin(a x + b)`.
    Sin { a: f64, b: f64 },
    Product(Vec<AnalyticWeight>),
}

impl AnalyticWeight {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &cp| acc * x + cp),
            Self::Exp { a } => (a * x).exp(),
            Self::Sin { a, b } => (a * x + b).sin(),
            Self::Product(fs) => fs.iter().map(|f| f.eval(x)).product(),
        }
    }

    pub fn monomial(k: u32) -> Self {
        let mut c = vec![0.0; k as usize + 1];
        c[k as usize] = 1.0;
        Self::Polynomial(c)
    }

    /// Named members used by the command line.
    pub fn from_name(name: &str) -> Result<Self, ErgodicError> {
        Ok(match name {
            "one" | "1" => Self::Polynomial(vec![1.0]),
            "x" => Self::monomial(1),
            "x2" | "x^2" => Self::monomial(2),
            "x3" | "x^3" => Self::monomial(3),
            "exp" | "exp(x)" => Self::Exp { a: 1.0 },
            "sin3x" | "sin(3x)" => Self::Sin { a: 3.0, b: 0.0 },
            "exp*sin3x" => Self::Product(vec![Self::Exp { a: 1.0 }, Self::Sin { a: 3.0, b: 0.0 }]),
            other => return Err(ErgodicError::UnsupportedWeight(other.to_string())),
        })
    }
}

impl fmt::Display for AnalyticWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Polynomial(c) => {
                let terms: Vec<String> = c
                    .iter()
                    .enumerate()
                    .filter(|(_, &cp)| cp != 0.0)
                    .map(|(p, cp)| match p {
                        0 => format!("{cp}"),
                        1 => format!("{cp}*x"),
                        _ => format!("{cp}*x^{p}"),
                    })
                    .collect();
                if terms.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "{}", terms.join("+"))
                }
            }
            Self::Exp { a } => write!(f, "exp({a}*x)"),
            Self::Sin { a, b } => write!(f, "sin({a}*x+{b})"),
            Self::Product(fs) => {
                let parts: Vec<String> = fs.iter().map(|w| w.to_string()).collect();
                write!(f, "{}", parts.join("*"))
            }
        }
    }
}

fn check_terms(n: u64) -> Result<(), ErgodicError> {
    if n == 0 || n > MAX_TERMS {
        return Err(ErgodicError::TermCount(n));
    }
    Ok(())
}

fn weighted_sum(
    weight: impl Fn(f64) -> f64,
    phi: f64,
    l: u64,
    m: u64,
    n: u64,
    reverse: bool,
) -> Complex64 {
    let mut acc = CompensatedSum::default();
    let nf = n as f64;
    let mut term = |k: u64| {
        let (s, c) = (k as f64 * phi).sin_cos();
        acc.add(Complex64::new(c, s) * weight(k as f64 / nf));
    };
    if reverse {
        (l..=m).rev().for_each(&mut term);
    } else {
        (l..=m).for_each(&mut term);
    }
    acc.value()
}

/// `sum_{n=0}^{N-1} (n/N)^k exp(i n phi)`.
pub fn phase_power_sum(k: u32, phi: f64, n: u64) -> Result<Complex64, ErgodicError> {
    check_terms(n)?;
    Ok(weighted_sum(|x| x.powi(k as i32), phi, 0, n - 1, n, false))
}

/// `sum_{n=L}^{M} f(n/N) exp(i n phi)`.
pub fn analytic_phase_sum(
    f: &AnalyticWeight,
    phi: f64,
    l: u64,
    m: u64,
    n: u64,
) -> Result<Complex64, ErgodicError> {
    check_terms(n)?;
    if l > m || m >= n {
        return Err(ErgodicError::Range { l, m, n });
    }
    Ok(weighted_sum(|x| f.eval(x), phi, l, m, n, false))
}

/// Same sum accumulated from the last term down.
pub fn analytic_phase_sum_reversed(
    f: &AnalyticWeight,
    phi: f64,
    l: u64,
    m: u64,
    n: u64,
) -> Result<Complex64, ErgodicError> {
    check_terms(n)?;
    if l > m || m >= n {
        return Err(ErgodicError::Range { l, m, n });
    }
    Ok(weighted_sum(|x| f.eval(x), phi, l, m, n, true))
}

/// `1 / |1 - exp(i phi)|`.
pub fn lemma1_limit(phi: f64) -> Result<f64, ErgodicError> {
    let reduced = phi.rem_euclid(2.0 * PI);
    let d = (1.0 - Complex64::from_polar(1.0, phi)).norm();
    if reduced == 0.0 || d < 1e-15 {
        return Err(ErgodicError::Pole(phi));
    }
    Ok(1.0 / d)
}

/// One evaluated sum, optionally with its predicted large-`N` magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicSumResult {
    pub n: u64,
    pub value: Complex64,
    pub magnitude: f64,
    pub predicted_limit: Option<f64>,
}

impl ErgodicSumResult {
    pub fn new(n: u64, value: Complex64, predicted_limit: Option<f64>) -> Self {
        Self {
            n,
            value,
            magnitude: value.norm(),
            predicted_limit,
        }
    }
}

/// Ordinary least squares on `(ln N, ln value)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn convergence_fit(points: &[(f64, f64)]) -> Result<ConvergenceFit, ErgodicError> {
    if points.len() < 3 {
        return Err(ErgodicError::TooFewPoints(points.len()));
    }
    for (index, &(n, value)) in points.iter().enumerate() {
        if !(n > 0.0 && value > 0.0) {
            return Err(ErgodicError::NonPositive { index, n, value });
        }
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|&(n, v)| (n.ln(), v.ln())).collect();
    let (slope, intercept, r_squared) = least_squares(&xy);
    Ok(ConvergenceFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Slope, intercept and `R^2` of a straight-line fit; `R^2 = 1` for an exact (incl. flat) line.
pub fn least_squares(xy: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xy
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    (slope, intercept, r_squared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3};

    #[test]
    fn alternating_sums() {
        for n in [2u64, 10, 1 << 12] {
            let s0 = phase_power_sum(0, PI, n).unwrap();
            assert!(s0.norm() < 1e-14 * n as f64, "{s0}");
            // pairwise telescoping: sum n (-1)^n over even N is -N/2
            let s1 = phase_power_sum(1, PI, n).unwrap();
            assert!((s1.re + 0.5).abs() < 1e-12 && s1.im.abs() < 1e-14 * n as f64, "{s1}");
            assert!((s1.norm() - lemma1_limit(PI).unwrap()).abs() < 1e-11);
        }
    }

    #[test]
    fn quadratic_power_sum_quarter_turn() {
        let s = phase_power_sum(2, FRAC_PI_2, 1 << 16).unwrap();
        let limit = FRAC_1_SQRT_2;
        assert!((s.norm() - limit).abs() / limit < 0.02);
    }

    #[test]
    fn limit_examples() {
        assert!((lemma1_limit(PI).unwrap() - 0.5).abs() < 1e-15);
        assert!((lemma1_limit(FRAC_PI_2).unwrap() - FRAC_1_SQRT_2).abs() < 1e-15);
        // |1 - e^{i pi/3}| = 2 sin(pi/6) = 1
        assert!((lemma1_limit(FRAC_PI_3).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(lemma1_limit(0.0), Err(ErgodicError::Pole(_))));
        assert!(matches!(lemma1_limit(2.0 * PI), Err(ErgodicError::Pole(_))));
    }

    #[test]
    fn weighted_sum_consistency() {
        let n = 1000;
        let direct = phase_power_sum(1, 0.7, n).unwrap();
        let weighted = analytic_phase_sum(&AnalyticWeight::monomial(1), 0.7, 0, n - 1, n).unwrap();
        assert!((direct - weighted).norm() < 1e-13);
    }

    #[test]
    fn geometric_partial_sum_bounded() {
        let n = 1 << 10;
        for m in [n / 2, n / 2 + 1] {
            let s = analytic_phase_sum(&AnalyticWeight::Polynomial(vec![1.0]), PI, 0, m, n).unwrap();
            // closed form (1 - e^{i(M+1)pi}) / (1 - e^{i pi})
            let closed = (1.0 - Complex64::from_polar(1.0, (m + 1) as f64 * PI)) / 2.0;
            assert!((s - closed).norm() < 1e-12);
            assert!(s.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn range_and_count_errors() {
        assert!(matches!(phase_power_sum(1, 1.0, 0), Err(ErgodicError::TermCount(0))));
        assert!(phase_power_sum(1, 1.0, MAX_TERMS + 1).is_err());
        let f = AnalyticWeight::Exp { a: 1.0 };
        assert!(matches!(
            analytic_phase_sum(&f, 1.0, 5, 3, 10),
            Err(ErgodicError::Range { .. })
        ));
        assert!(analytic_phase_sum(&f, 1.0, 0, 10, 10).is_err());
        assert!(matches!(
            AnalyticWeight::from_name("gamma"),
            Err(ErgodicError::UnsupportedWeight(_))
        ));
    }

    #[test]
    fn weight_family() {
        let p = AnalyticWeight::Polynomial(vec![1.0, -2.0, 0.5]);
        assert!((p.eval(2.0) - (1.0 - 4.0 + 2.0)).abs() < 1e-15);
        let prod = AnalyticWeight::from_name("exp*sin3x").unwrap();
        assert!((prod.eval(0.4) - 0.4f64.exp() * 1.2f64.sin()).abs() < 1e-15);
        assert_eq!(AnalyticWeight::from_name("x2").unwrap().to_string(), "1*x^2");
    }

    #[test]
    fn fit_examples() {
        let ns: Vec<f64> = (4..=12).map(|p| 2f64.powi(p)).collect();
        let inv: Vec<(f64, f64)> = ns.iter().map(|&n| (n, 1.0 / n)).collect();
        let fit = convergence_fit(&inv).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = ns.iter().map(|&n| (n, 3.5)).collect();
        assert!(convergence_fit(&flat).unwrap().slope.abs() < 1e-12);
        let mixed: Vec<(f64, f64)> = ns.iter().map(|&n| (n, 3.0 / n + 1.0 / (n * n))).collect();
        let s = convergence_fit(&mixed).unwrap().slope;
        assert!((-1.05..=-0.95).contains(&s), "{s}");
        assert!(matches!(
            convergence_fit(&inv[..2]),
            Err(ErgodicError::TooFewPoints(2))
        ));
        let mut bad = inv.clone();
        bad[1].1 = 0.0;
        assert!(matches!(
            convergence_fit(&bad),
            Err(ErgodicError::NonPositive { index: 1, .. })
        ));
    }

    #[test]
    fn compensated_reversal_stable() {
        let n = 1 << 16;
        let f = AnalyticWeight::Exp { a: 1.0 };
        let phi = 2.0 * PI / 3.0;
        let fwd = analytic_phase_sum(&f, phi, 0, n - 1, n).unwrap();
        let rev = analytic_phase_sum_reversed(&f, phi, 0, n - 1, n).unwrap();
        assert!((fwd - rev).norm() <= 1e-10 * fwd.norm());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn power_sums_approach_limit(k in 1u32..=4, phi in 0.3f64..(2.0 * PI - 0.3)) {
            let limit = lemma1_limit(phi).unwrap();
            let far = phase_power_sum(k, phi, 1 << 15).unwrap().norm();
            let near = phase_power_sum(k, phi, 1 << 9).unwrap().norm();
            proptest::prop_assert!((far - limit).abs() / limit < 0.01, "{far} vs {limit}");
            proptest::prop_assert!((far - limit).abs() <= (near - limit).abs() + 1e-9);
        }

        #[test]
        fn partial_sums_obey_summation_by_parts(
            name in proptest::sample::select(vec!["one", "x", "x2", "exp", "sin3x", "exp*sin3x"]),
            phi in 0.2f64..(2.0 * PI - 0.2),
            n in 16u64..4096,
            a in 0.0f64..1.0,
            b in 0.0f64..1.0,
        ) {
            let f = AnalyticWeight::from_name(name).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let l = (lo * (n - 1) as f64) as u64;
            let m = (hi * (n - 1) as f64) as u64;
            let s = analytic_phase_sum(&f, phi, l, m, n).unwrap().norm();
            let vals: Vec<f64> = (l..=m).map(|j| f.eval(j as f64 / n as f64)).collect();
            let variation: f64 = vals.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
            let bound = (vals.last().unwrap().abs() + variation) / (phi / 2.0).sin().abs();
            proptest::prop_assert!(s <= bound * (1.0 + 1e-9) + 1e-12, "{s} > {bound}");
        }
    }
}
