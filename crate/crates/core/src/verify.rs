//! The acceptance suite: one check per criterion, each with a runtime budget.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{
    epsilon, epsilon_at_rate, lambert_w0, required_measurement_rate, steps_for_rate, success_bound, BoundInputs,
    OMEGA,
};
use crate::corpus;
use crate::ergodic::{analytic_phase_sum, convergence_fit, least_squares, lemma1_limit, phase_power_sum, AnalyticWeight};
use crate::linalg::{schatten_inf_norm, ComplexMatrix, HermitianOperator, UnitaryOperator};
use crate::measure::{
    all_success_with, branch_enumeration, final_projection_with, sample_with, MeasurementProtocol,
};
use crate::parallel;
use crate::pulse::{pulse_run, run_pulse_study, theorem2_residual};
use crate::scenario::{pauli_string, GeneratorSchedule, ScenarioDocument, ScheduleDoc, SteeringScenario};

pub type EpsilonFn = Box<dyn Fn(&BoundInputs) -> f64 + Send + Sync>;

/// Inputs the suite can be pointed at: the bound formula and the measurement corpus.
pub struct SuiteConfig {
    pub epsilon: EpsilonFn,
    pub corpus: Vec<SteeringScenario>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            epsilon: Box::new(epsilon),
            corpus: builtin_corpus(),
        }
    }
}

impl SuiteConfig {
    /// Same corpus, with the leading constant of the bound formula replaced.
    pub fn with_epsilon_prefactor(mut self, prefactor: f64) -> Self {
        self.epsilon = Box::new(move |b| epsilon(b) * prefactor / 4.0);
        self
    }
}

pub fn builtin_corpus() -> Vec<SteeringScenario> {
    corpus::measurement_corpus()
        .iter()
        .map(|d| d.validate().expect("built-in corpus is valid"))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    /// The numerical checks held.
    pub checks_passed: bool,
    pub elapsed: Duration,
    pub budget: Duration,
    pub detail: String,
}

impl CriterionResult {
    pub fn passed(&self) -> bool {
        self.checks_passed && self.elapsed <= self.budget
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let time = if self.elapsed <= self.budget { "" } else { " [over budget]" };
        write!(
            f,
            "{status} {:>2} {:<28} {:>8.3}s / {:>4}s{time}  {}",
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

fn timed(id: u8, name: &'static str, budget_s: u64, f: impl FnOnce() -> (bool, String)) -> CriterionResult {
    let start = Instant::now();
    let (checks_passed, detail) = f();
    CriterionResult {
        id,
        name,
        checks_passed,
        elapsed: start.elapsed(),
        budget: Duration::from_secs(budget_s),
        detail,
    }
}

fn powers_of_two(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|k| 1u64 << k).collect()
}

/// Final-measurement probability dominates the bound on every corpus scenario and `N`.
pub fn bound_dominance(config: &SuiteConfig) -> CriterionResult {
    timed(1, "bound dominance", 30, || {
        if config.corpus.len() < 12 {
            return (false, format!("corpus has {} scenarios, need at least 12", config.corpus.len()));
        }
        let ns = powers_of_two(4, 10);
        let outcome: Result<Vec<(usize, f64, usize)>, String> = parallel::install(|| {
            config
                .corpus
                .par_iter()
                .map(|s| {
                    let h_norm = schatten_inf_norm(s.noise().total().matrix());
                    let mut informative = 0;
                    let mut worst = f64::INFINITY;
                    for &n in &ns {
                        let protocol = MeasurementProtocol::new(s, n).map_err(|e| e.to_string())?;
                        let inputs =
                            BoundInputs::new(protocol.k_norm(), h_norm, s.tau(), n).map_err(|e| e.to_string())?;
                        let bound = success_bound((config.epsilon)(&inputs));
                        if bound >= 0.0 {
                            informative += 1;
                            worst = worst.min(final_projection_with(&protocol, s) - bound);
                        }
                    }
                    Ok((informative, worst, ns.len()))
                })
                .collect()
        });
        match outcome {
            Err(e) => (false, e),
            Ok(rows) => {
                let informative: usize = rows.iter().map(|r| r.0).sum();
                let worst = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
                let total: usize = rows.iter().map(|r| r.2).sum();
                let ok = worst >= -1e-9;
                (
                    ok,
                    format!(
                        "{} scenarios, {informative}/{total} informative (scenario, N) pairs, min p_final - bound = {worst:.3e}",
                        config.corpus.len()
                    ),
                )
            }
        }
    })
}

/// Noiseless qubit rotation: closed-form all-success values and the inverse-`N` failure rate.
pub fn zeno_convergence() -> CriterionResult {
    timed(2, "steering convergence", 5, || {
        let s = corpus::qubit_pi_rotation(1.0).validate().expect("valid");
        let p = |n: u64| all_success_with(&MeasurementProtocol::new(&s, n).expect("valid"), &s);
        let d10 = (p(10) - (PI / 20.0).cos().powi(20)).abs();
        let d100 = (p(100) - (PI / 200.0).cos().powi(200)).abs();
        let pts: Vec<(f64, f64)> = powers_of_two(4, 12).into_iter().map(|n| (n as f64, 1.0 - p(n))).collect();
        let slope = convergence_fit(&pts).map(|f| f.slope).unwrap_or(f64::NAN);
        let ok = d10 <= 1e-9 && d100 <= 1e-9 && (-1.1..=-0.9).contains(&slope);
        (
            ok,
            format!("p_all(10) = {:.7}, |err| {d10:.1e}; p_all(100) = {:.7}, |err| {d100:.1e}; slope {slope:.4}", p(10), p(100)),
        )
    })
}

fn random_bath_operator(bath_qubits: u32, norm: f64, rng: &mut ChaCha8Rng) -> HermitianOperator {
    let d = 1usize << bath_qubits;
    let m = ComplexMatrix::from_fn(d, |_, _| {
        num_complex::Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let h = HermitianOperator::symmetrize(&m);
    let scale = norm / schatten_inf_norm(h.matrix());
    h.scale(scale)
}

/// Adding `I_S (x) H_B` leaves both exact probabilities unchanged on the two-qubit-bath scenarios.
pub fn bath_invariance(config: &SuiteConfig) -> CriterionResult {
    timed(3, "bath-term invariance", 5, || {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let targets: Vec<&SteeringScenario> = config.corpus.iter().filter(|s| s.bath_qubits() == 2).collect();
        if targets.is_empty() {
            return (false, "corpus has no two-qubit-bath scenarios".to_string());
        }
        let mut worst = 0.0f64;
        let mut worst_commuting = 0.0f64;
        let mut n_commuting = 0;
        for s in &targets {
            for norm in [0.5, 2.0, 10.0] {
                let b = random_bath_operator(s.bath_qubits(), norm, &mut rng);
                let lifted = b.embed_right(s.sys_dim()).expect("dims");
                let existing = s.noise().h_b.clone().unwrap_or_else(|| HermitianOperator::zeros(s.dim()));
                let shifted = match s.with_bath_term(Some(existing.add(&lifted))) {
                    Ok(x) => x,
                    Err(e) => return (false, e.to_string()),
                };
                let commuting = s.noise().total().matrix().commutator(lifted.matrix()).max_abs() < 1e-12;
                for n in [16u64, 64] {
                    let a = MeasurementProtocol::new(s, n).expect("valid");
                    let b = MeasurementProtocol::new(&shifted, n).expect("valid");
                    let d_all = (all_success_with(&a, s) - all_success_with(&b, &shifted)).abs();
                    let d_fin = (final_projection_with(&a, s) - final_projection_with(&b, &shifted)).abs();
                    let d = d_all.max(d_fin);
                    worst = worst.max(d);
                    if commuting {
                        worst_commuting = worst_commuting.max(d);
                        n_commuting += 1;
                    }
                }
            }
        }
        (
            worst <= 1e-9,
            format!(
                "{} scenarios, max change {worst:.3e} (over {n_commuting} cases where H_B commutes with H: {worst_commuting:.1e})",
                targets.len()
            ),
        )
    })
}

/// Rate inversion round trip, the two algebraic forms of the bound, and Lambert W accuracy.
pub fn rate_round_trip(config: &SuiteConfig) -> CriterionResult {
    timed(4, "rate round trip", 1, || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut worst_margin = f64::INFINITY;
        let mut worst_identity = 0.0f64;
        for _ in 0..20 {
            let delta = rng.random_range(0.001..0.5);
            let k = rng.random_range(0.0..5.0);
            let h = rng.random_range(0.0..2.0);
            let tau = rng.random_range(0.1..5.0);
            let rate = match required_measurement_rate(delta, k, h, tau) {
                Ok(r) => r,
                Err(e) => return (false, e.to_string()),
            };
            let n = steps_for_rate(rate, tau).max(1);
            let inputs = BoundInputs::new(k, h, tau, n).expect("valid draw");
            let eps = (config.epsilon)(&inputs);
            worst_margin = worst_margin.min(delta + 1e-9 - eps * eps.exp());
            let alt = epsilon_at_rate(k, h, tau, n as f64 / tau);
            worst_identity = worst_identity.max((eps - alt).abs() / alt.max(f64::MIN_POSITIVE));
        }
        let mut worst_w = 0.0f64;
        for i in 0..100 {
            let x = 10f64.powf(-8.0 + 16.0 * i as f64 / 99.0);
            let w = lambert_w0(x).expect("x >= 0");
            worst_w = worst_w.max((w * w.exp() - x).abs() / x);
        }
        let ok = worst_margin >= 0.0 && worst_identity <= 1e-12 && worst_w <= 1e-12;
        (
            ok,
            format!(
                "min (delta - eps e^eps) = {worst_margin:.3e}, bound-form identity rel err {worst_identity:.1e}, W rel err {worst_w:.1e}"
            ),
        )
    })
}

/// Branch enumeration against both exact recursions, and sampling against the exact value.
pub fn oracle_equivalence(config: &SuiteConfig) -> CriterionResult {
    timed(5, "oracle equivalence", 60, || {
        let picked: Vec<&SteeringScenario> = config
            .corpus
            .iter()
            .filter(|s| s.dim() <= 8)
            .filter(|s| {
                let p = MeasurementProtocol::new(s, 12).expect("valid");
                let v = final_projection_with(&p, s);
                v > 0.01 && v < 0.999
            })
            .take(5)
            .collect();
        if picked.len() < 5 {
            return (false, format!("only {} suitable scenarios in corpus", picked.len()));
        }
        let results: Vec<(f64, f64)> = parallel::install(|| {
            picked
                .par_iter()
                .map(|s| {
                    let mut worst = 0.0f64;
                    for n in 1..=12u64 {
                        let protocol = MeasurementProtocol::new(s, n).expect("valid");
                        let branches = branch_enumeration(s, n).expect("n <= 12");
                        let total: f64 = branches.values().sum();
                        let marginal: f64 = branches.iter().filter(|(k, _)| k.ends_with('1')).map(|(_, v)| v).sum();
                        let all = branches[&"1".repeat(n as usize)];
                        worst = worst
                            .max((total - 1.0).abs())
                            .max((marginal - final_projection_with(&protocol, s)).abs())
                            .max((all - all_success_with(&protocol, s)).abs());
                    }
                    let protocol = MeasurementProtocol::new(s, 12).expect("valid");
                    let exact = final_projection_with(&protocol, s);
                    let mc = sample_with(&protocol, s, 10_000, 5).expect("n_traj > 0");
                    let z = (mc.estimate - exact).abs() / mc.stderr.max(f64::MIN_POSITIVE);
                    (worst, z)
                })
                .collect()
        });
        let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
        let z = results.iter().map(|r| r.1).fold(0.0, f64::max);
        (
            worst <= 1e-9 && z <= 4.0,
            format!("5 scenarios, N = 1..12: max mismatch {worst:.1e}; max |MC - exact| = {z:.2} stderr"),
        )
    })
}

fn zeno_gap_slope(u0: &UnitaryOperator, k: &HermitianOperator, ns: &[u64]) -> Option<f64> {
    let sched = GeneratorSchedule::constant(k.clone());
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| (n as f64, theorem2_residual(u0, &sched, 1.0, n).unwrap_or(f64::NAN)))
        .collect();
    if pts.iter().any(|p| !(p.1 > crate::pulse::FIT_FLOOR)) {
        return None;
    }
    convergence_fit(&pts).ok().map(|f| f.slope)
}

/// Pulse steering of the noiseless qubit, and the time-independent Zeno-limit gap.
pub fn pulse_limit() -> CriterionResult {
    timed(6, "pulse steering limit", 20, || {
        let ns = powers_of_two(4, 12);
        let s = corpus::qubit_pulse(1.0).validate().expect("valid");
        let study = match run_pulse_study(&s, &ns) {
            Ok(x) => x,
            Err(e) => return (false, e.to_string()),
        };
        let max_gap = study.rows.iter().map(|r| r.one_minus_weight.abs()).fold(0.0, f64::max);
        let weight_slope = study.weight_fit.map(|f| f.slope);
        let weight_ok = weight_slope.is_some_and(|sl| (-1.2..=-0.8).contains(&sl));

        let z = UnitaryOperator::new(pauli_string("Z", None).unwrap().matrix().clone()).expect("unitary");
        let cz = UnitaryOperator::new(pauli_string(corpus::CZ, None).unwrap().matrix().clone()).expect("unitary");
        let pinned = zeno_gap_slope(&z, &pauli_string("pi/2*Y", None).unwrap(), &ns);
        let generic = [
            zeno_gap_slope(&z, &pauli_string("pi/2*Y + 0.5*Z", None).unwrap(), &ns),
            zeno_gap_slope(&cz, &pauli_string("0.6*XY + 0.3*ZI + 0.4*IX", None).unwrap(), &ns),
        ];
        let gap_ok = generic.iter().all(|s| s.is_some_and(|sl| (-1.2..=-0.8).contains(&sl)));
        let fmt = |s: Option<f64>| s.map_or("none (values at roundoff)".to_string(), |v| format!("{v:.3}"));
        (
            weight_ok && gap_ok,
            format!(
                "1-weight slope {} (max |1-weight| {max_gap:.1e}); Zeno gap slope Z+Y drive {}, Z+(Y+Z) drive {}, CZ drive {}",
                fmt(weight_slope),
                fmt(pinned),
                fmt(generic[0]),
                fmt(generic[1])
            ),
        )
    })
}

/// Residual halving under `N -> 2N` for `Z` and `CZ`, and the factorization identity.
pub fn residual_rate() -> CriterionResult {
    timed(7, "residual rate", 30, || {
        let z = UnitaryOperator::new(pauli_string("Z", None).unwrap().matrix().clone()).expect("unitary");
        let cz = UnitaryOperator::new(pauli_string(corpus::CZ, None).unwrap().matrix().clone()).expect("unitary");
        let cases = [
            (z, GeneratorSchedule::polynomial(vec![pauli_string("X", None).unwrap(), pauli_string("X", None).unwrap()])),
            (
                cz,
                GeneratorSchedule::polynomial(vec![
                    pauli_string("0.5*XY + 0.3*ZI", None).unwrap(),
                    pauli_string("0.6*XI + 0.4*ZX", None).unwrap(),
                ]),
            ),
        ];
        let ns = powers_of_two(6, 12);
        let mut ratios = Vec::new();
        let mut max_h = 0.0f64;
        for (u0, sched) in &cases {
            let sched = sched.as_ref().expect("valid schedule");
            for i in 0..=64 {
                max_h = max_h.max(schatten_inf_norm(sched.sample(i as f64 / 64.0).expect("in range").matrix()));
            }
            let r: Vec<f64> = ns.iter().map(|&n| theorem2_residual(u0, sched, 1.0, n).unwrap_or(f64::NAN)).collect();
            ratios.extend(r.windows(2).map(|w| w[0] / w[1]));
        }
        let ratio_ok = ratios.iter().all(|r| (1.8..=2.2).contains(r));
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));

        let noisy = ScenarioDocument::pulse(
            2,
            1,
            1.0,
            ScheduleDoc::Polynomial {
                coefficients: vec!["0.5*XY + 0.2*ZI".into(), "0.4*IY".into()],
            },
            corpus::CZ.into(),
            0,
        )
        .with_noise(Some("0.1*XIX + 0.05*ZZY + 0.1*IYZ".into()), Some("0.3*IIZ".into()))
        .validate()
        .expect("valid");
        let scenarios = [corpus::qubit_pulse(1.0).validate().expect("valid"), noisy];
        let defect = scenarios
            .iter()
            .map(|s| pulse_run(s, 256).map(|r| r.factorization_defect).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        (
            ratio_ok && defect <= 1e-8 && max_h <= 2.0 + 1e-12,
            format!("ratios in [{lo:.4}, {hi:.4}] (max ||H|| {max_h:.2}); factorization defect at N=256 {defect:.1e}"),
        )
    })
}

/// Weighted phase sums: exact alternating value, limits, and absence of growth.
pub fn phase_sums() -> CriterionResult {
    timed(8, "phase sums", 10, || {
        let mut exact_err = 0.0f64;
        for n in [2u64, 10, 1 << 10, 1 << 16] {
            exact_err = exact_err.max((phase_power_sum(1, PI, n).unwrap().norm() - 0.5).abs());
        }
        let phis = [PI, PI / 2.0, 2.0 * PI / 3.0];
        let mut worst_rel = 0.0f64;
        for k in 1..=3 {
            for &phi in &phis {
                let limit = lemma1_limit(phi).unwrap();
                let m = phase_power_sum(k, phi, 1 << 16).unwrap().norm();
                worst_rel = worst_rel.max((m - limit).abs() / limit);
            }
        }
        let phi = 2.0 * PI / 3.0;
        let mut worst_slope = 0.0f64;
        let mut worst_sup = 0.0f64;
        for f in ["x2", "exp", "sin3x"] {
            let w = AnalyticWeight::from_name(f).unwrap();
            let mags: Vec<(u32, f64)> = (6..=16)
                .map(|k| {
                    let n = 1u64 << k;
                    (k, analytic_phase_sum(&w, phi, 0, n - 1, n).unwrap().norm())
                })
                .collect();
            let trend: Vec<(f64, f64)> =
                mags.iter().filter(|(k, _)| *k >= 8).map(|&(k, m)| (k as f64 * std::f64::consts::LN_2, m)).collect();
            worst_slope = worst_slope.max(least_squares(&trend).0.abs());
            let sup_small = mags.iter().filter(|(k, _)| *k <= 10).map(|p| p.1).fold(0.0, f64::max);
            let sup_all = mags.iter().map(|p| p.1).fold(0.0, f64::max);
            worst_sup = worst_sup.max((sup_all - sup_small) / sup_small);
        }
        let ok = exact_err <= 1e-12 && worst_rel <= 0.02 && worst_slope <= 0.05 && worst_sup <= 0.05;
        (
            ok,
            format!(
                "|S(1, pi)| - 1/2 = {exact_err:.1e}; max rel dev from limit {worst_rel:.2e}; max |trend| {worst_slope:.1e}; sup growth {worst_sup:.1e}"
            ),
        )
    })
}

/// The bound vanishes at the omega constant and is negative beyond it.
pub fn uninformative_marker() -> CriterionResult {
    timed(9, "uninformative regime", 1, || {
        let at_omega = success_bound(OMEGA);
        let w1 = lambert_w0(1.0).unwrap();
        let ok = at_omega.abs() <= 1e-10 && (w1 - OMEGA).abs() <= 1e-15 && success_bound(0.58) < 0.0;
        (ok, format!("bound(Omega) = {at_omega:.1e}; W(1) - Omega = {:.1e}", w1 - OMEGA))
    })
}

/// Every criterion, in order.
pub fn run_suite(config: &SuiteConfig) -> Vec<CriterionResult> {
    vec![
        bound_dominance(config),
        zeno_convergence(),
        bath_invariance(config),
        rate_round_trip(config),
        oracle_equivalence(config),
        pulse_limit(),
        residual_rate(),
        phase_sums(),
        uninformative_marker(),
    ]
}
