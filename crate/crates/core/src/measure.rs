//! Steering by repeated projective measurement.
//!
//! With `dt = tau / N` and left-endpoint samples `K_j = K(j dt)`, the measured
//! projectors are `Pi_{j+1} = exp(i K_j dt) Pi_j exp(-i K_j dt)` for
//! `j = 0..N`, each embedded as `Pi_j (x) I_B`. Between measurements the joint
//! state evolves under `exp(-i H dt)` with `H = h_sb + h_b`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{epsilon, success_bound, BoundInputs, BoundsError};
use crate::linalg::{
    expi_hermitian, schatten_inf_norm, tolerance as tol, ComplexMatrix, LinalgError, Projector,
    StateVector, UnitaryOperator,
};
use crate::parallel;
use crate::scenario::{k_max_norm, InitialState, ScheduleError, ScheduleKind, SteeringScenario};
use crate::spectral::rotate_with;

pub const MAX_ENUMERATION_STEPS: u64 = 14;
const DOMINANCE_SLACK: f64 = 1e-9;
const ORDERING_SLACK: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("number of steps must be at least 1")]
    NoSteps,
    #[error("branch enumeration is limited to N <= {MAX_ENUMERATION_STEPS} (got {0})")]
    EnumerationCap(u64),
    #[error("number of trajectories must be at least 1")]
    NoTrajectories,
    #[error("step list must be nonempty and strictly ascending")]
    StepList,
    #[error("initial state violates rho(0) = Pi0 rho(0) Pi0 (deviation {0:e})")]
    InitialCondition(f64),
    #[error("invariant violated at N = {n}: {what}")]
    Invariant { n: u64, what: String },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

/// The `N` embedded measurement projectors and the free step propagator.
#[derive(Clone, Debug)]
pub struct MeasurementProtocol {
    projectors: Vec<ComplexMatrix>,
    step: UnitaryOperator,
    k_norm: f64,
}

impl MeasurementProtocol {
    pub fn new(scenario: &SteeringScenario, n: u64) -> Result<Self, MeasureError> {
        if n == 0 {
            return Err(MeasureError::NoSteps);
        }
        check_initial(scenario)?;
        let dt = scenario.tau() / n as f64;
        let schedule = scenario.schedule();
        let constant = match schedule.kind() {
            ScheduleKind::Constant(k) => Some(expi_hermitian(k, dt)?),
            _ => None,
        };
        let bath = ComplexMatrix::identity(scenario.bath_dim());
        let mut current: Projector = scenario.initial_projector().clone();
        let mut projectors = Vec::with_capacity(n as usize);
        for j in 0..n {
            let rotation = match &constant {
                Some(r) => r.clone(),
                None => expi_hermitian(&schedule.sample(j as f64 * dt)?, dt)?,
            };
            current = rotate_with(&current, &rotation);
            projectors.push(current.matrix().kron(&bath)?);
        }
        let step = expi_hermitian(&scenario.noise().total(), -dt)?;
        Ok(Self {
            projectors,
            step,
            k_norm: k_max_norm(schedule, scenario.tau(), n)?,
        })
    }

    /// `Pi_1 .. Pi_N` on the joint space.
    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn step(&self) -> &UnitaryOperator {
        &self.step
    }

    /// `max_j ||K_j||` over the samples used to build the projectors.
    pub fn k_norm(&self) -> f64 {
        self.k_norm
    }

    pub fn n(&self) -> u64 {
        self.projectors.len() as u64
    }

    fn evolve(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.step.matrix().conjugate(rho)
    }
}

fn check_initial(scenario: &SteeringScenario) -> Result<(), MeasureError> {
    let p = scenario.initial_projector().embed_left(scenario.bath_dim())?;
    let rho = scenario.initial_state().density();
    let deviation = p.matrix().conjugate(rho.matrix()).max_abs_diff(rho.matrix());
    if deviation > tol::INITIAL_SUPPORT {
        return Err(MeasureError::InitialCondition(deviation));
    }
    Ok(())
}

/// Probability that all `N` measurements return `Pi`.
pub fn all_success_probability(scenario: &SteeringScenario, n: u64) -> Result<f64, MeasureError> {
    let protocol = MeasurementProtocol::new(scenario, n)?;
    Ok(all_success_with(&protocol, scenario))
}

pub fn all_success_with(protocol: &MeasurementProtocol, scenario: &SteeringScenario) -> f64 {
    let mut rho = scenario.initial_state().density().matrix().clone();
    for p in protocol.projectors() {
        rho = p.conjugate(&protocol.evolve(&rho));
    }
    rho.trace().re
}

/// `Tr[Pi_N rho(tau)]` with non-selective measurements at steps `1..N-1`.
pub fn final_projection_probability(scenario: &SteeringScenario, n: u64) -> Result<f64, MeasureError> {
    let protocol = MeasurementProtocol::new(scenario, n)?;
    Ok(final_projection_with(&protocol, scenario))
}

pub fn final_projection_with(protocol: &MeasurementProtocol, scenario: &SteeringScenario) -> f64 {
    let dim = scenario.dim();
    let identity = ComplexMatrix::identity(dim);
    let mut rho = scenario.initial_state().density().matrix().clone();
    let projectors = protocol.projectors();
    let last = projectors.len() - 1;
    for p in &projectors[..last] {
        rho = protocol.evolve(&rho);
        let q = &identity - p;
        rho = &p.conjugate(&rho) + &q.conjugate(&rho);
    }
    rho = protocol.evolve(&rho);
    (&projectors[last] * &rho).trace().re
}

/// Probability of every outcome record, keyed by strings of `'1'` (`Pi`) and `'0'` (`Pi^perp`).
pub fn branch_enumeration(scenario: &SteeringScenario, n: u64) -> Result<BTreeMap<String, f64>, MeasureError> {
    if n > MAX_ENUMERATION_STEPS {
        return Err(MeasureError::EnumerationCap(n));
    }
    let protocol = MeasurementProtocol::new(scenario, n)?;
    let identity = ComplexMatrix::identity(scenario.dim());
    let complements: Vec<ComplexMatrix> = protocol.projectors().iter().map(|p| &identity - p).collect();
    let mut out = BTreeMap::new();
    let mut stack = vec![(String::new(), scenario.initial_state().density().matrix().clone())];
    while let Some((record, rho)) = stack.pop() {
        let j = record.len();
        if j == n as usize {
            out.insert(record, rho.trace().re);
            continue;
        }
        let evolved = protocol.evolve(&rho);
        stack.push((format!("{record}0"), complements[j].conjugate(&evolved)));
        stack.push((format!("{record}1"), protocol.projectors()[j].conjugate(&evolved)));
    }
    Ok(out)
}

/// Outcome tallies of a Monte Carlo run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OutcomeCounts {
    /// Final measurement returned `Pi_N`.
    pub final_in_target: u64,
    /// Final measurement returned `Pi_N^perp`.
    pub final_outside: u64,
    /// Every measurement returned `Pi`.
    pub all_success: u64,
    /// Stopped on a branch weight below the renormalization floor; counted as failures.
    pub aborted: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub counts: OutcomeCounts,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Trajectory {
    Final { in_target: bool, all_success: bool },
    Aborted,
}

fn draw_initial(state: &InitialState, ensemble: &[(f64, StateVector)], rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    match state {
        InitialState::Pure(psi) => psi.amplitudes().to_vec(),
        InitialState::Mixed(_) => {
            let u: f64 = rng.random::<f64>() * ensemble.iter().map(|(w, _)| w).sum::<f64>();
            let mut acc = 0.0;
            for (w, v) in ensemble {
                acc += w;
                if u < acc {
                    return v.amplitudes().to_vec();
                }
            }
            ensemble[ensemble.len() - 1].1.amplitudes().to_vec()
        }
    }
}

fn run_trajectory(
    protocol: &MeasurementProtocol,
    state: &InitialState,
    ensemble: &[(f64, StateVector)],
    seed: u64,
    index: u64,
) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(parallel::stream_seed(seed, index));
    let mut psi = draw_initial(state, ensemble, &mut rng);
    let mut all = true;
    let mut last = false;
    for p in protocol.projectors() {
        psi = protocol.step.matrix().apply(&psi);
        let in_pi = p.apply(&psi);
        let p_pi: f64 = in_pi.iter().map(|z| z.norm_sqr()).sum();
        let u: f64 = rng.random();
        let (next, weight, outcome) = if u < p_pi {
            (in_pi, p_pi, true)
        } else {
            let out: Vec<Complex64> = psi.iter().zip(&in_pi).map(|(a, b)| a - b).collect();
            let w = out.iter().map(|z| z.norm_sqr()).sum();
            (out, w, false)
        };
        if weight < tol::RENORMALIZATION_FLOOR {
            return Trajectory::Aborted;
        }
        let scale = 1.0 / weight.sqrt();
        psi = next.into_iter().map(|z| z * scale).collect();
        all &= outcome;
        last = outcome;
    }
    Trajectory::Final {
        in_target: last,
        all_success: all,
    }
}

/// Born-rule sampling of `n_traj` measurement records.
///
/// Trajectory `i` draws from its own ChaCha8 stream keyed by `(seed, i)`, and
/// the tallies are reduced in index order, so results do not depend on the
/// thread count.
pub fn sample_trajectories(
    scenario: &SteeringScenario,
    n: u64,
    n_traj: u64,
    seed: u64,
) -> Result<TrajectoryEstimate, MeasureError> {
    let protocol = MeasurementProtocol::new(scenario, n)?;
    sample_with(&protocol, scenario, n_traj, seed)
}

pub fn sample_with(
    protocol: &MeasurementProtocol,
    scenario: &SteeringScenario,
    n_traj: u64,
    seed: u64,
) -> Result<TrajectoryEstimate, MeasureError> {
    if n_traj == 0 {
        return Err(MeasureError::NoTrajectories);
    }
    let state = scenario.initial_state();
    let ensemble = match state {
        InitialState::Mixed(rho) => rho.ensemble()?,
        InitialState::Pure(_) => Vec::new(),
    };
    let outcomes: Vec<Trajectory> = parallel::install(|| {
        (0..n_traj)
            .into_par_iter()
            .map(|i| run_trajectory(protocol, state, &ensemble, seed, i))
            .collect()
    });
    let mut counts = OutcomeCounts::default();
    for t in outcomes {
        match t {
            Trajectory::Aborted => counts.aborted += 1,
            Trajectory::Final { in_target, all_success } => {
                if in_target {
                    counts.final_in_target += 1;
                } else {
                    counts.final_outside += 1;
                }
                if all_success {
                    counts.all_success += 1;
                }
            }
        }
    }
    let total = n_traj as f64;
    let estimate = counts.final_in_target as f64 / total;
    let stderr = (estimate * (1.0 - estimate) / total).sqrt();
    Ok(TrajectoryEstimate {
        estimate,
        stderr,
        counts,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub n_traj: u64,
    pub seed: u64,
}

/// One row of a measurement study.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRunResult {
    pub n_steps: u64,
    pub p_all_success: f64,
    pub p_final_in_target: f64,
    pub epsilon: f64,
    pub bound: f64,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub mc_counts: Option<OutcomeCounts>,
    pub seed: u64,
}

/// Exact probabilities, bound and optional sampling for each `N`.
///
/// The bound uses `max_j ||K_j||` over the run's samples and the norm of the
/// full uncontrolled Hamiltonian `h_sb + h_b`.
pub fn run_measurement_study(
    scenario: &SteeringScenario,
    n_list: &[u64],
    mc: Option<MonteCarloConfig>,
) -> Result<Vec<MeasurementRunResult>, MeasureError> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MeasureError::StepList);
    }
    let h_norm = schatten_inf_norm(scenario.noise().total().matrix());
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let protocol = MeasurementProtocol::new(scenario, n)?;
        let p_all = all_success_with(&protocol, scenario);
        let p_final = final_projection_with(&protocol, scenario);
        let eps = epsilon(&BoundInputs::new(protocol.k_norm(), h_norm, scenario.tau(), n)?);
        let bound = success_bound(eps);
        if p_all > p_final + ORDERING_SLACK {
            return Err(MeasureError::Invariant {
                n,
                what: format!("all-success probability {p_all} exceeds final probability {p_final}"),
            });
        }
        if bound >= 0.0 && p_final < bound - DOMINANCE_SLACK {
            return Err(MeasureError::Invariant {
                n,
                what: format!("final probability {p_final} below the bound {bound}"),
            });
        }
        let sampled = match mc {
            Some(cfg) => Some(sample_with(&protocol, scenario, cfg.n_traj, cfg.seed)?),
            None => None,
        };
        rows.push(MeasurementRunResult {
            n_steps: n,
            p_all_success: p_all,
            p_final_in_target: p_final,
            epsilon: eps,
            bound,
            mc_estimate: sampled.as_ref().map(|s| s.estimate),
            mc_stderr: sampled.as_ref().map(|s| s.stderr),
            mc_counts: sampled.map(|s| s.counts),
            seed: mc.map(|c| c.seed).unwrap_or(0),
        });
    }
    Ok(rows)
}
