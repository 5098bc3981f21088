//! Steering by frequent unitary pulses.
//!
//! With `dt = tau / N`, rotations `R_l = exp(i K(l dt) dt)` and
//! `V_l = R_{l-1} ... R_0` (`V_0 = I`), the pulses are
//! `U_l = V_l U0 V_l^dagger` for `l = 1..N`. The joint state after `N` steps is
//! `U_N e^{-iH dt} ... U_1 e^{-iH dt} psi0`, which factors as
//! `V_N prod_l U0 exp(-i Kt_l dt)` with the effective generators
//! `exp(-i Kt_l dt) = V_l^dagger exp(-i K(l dt) dt) exp(-i H dt) V_l`.
//! All products run in descending time order, latest factor on the left.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::ergodic::{convergence_fit, ConvergenceFit};
use crate::linalg::{
    expi_hermitian, schatten_inf_norm, spectral_sum, tolerance as tol, unitary_eig, ComplexMatrix,
    HermitianOperator, LinalgError, StateVector, UnitaryOperator,
};
use crate::parallel;
use crate::scenario::{GeneratorSchedule, InitialState, ScheduleError, SteeringScenario};
use crate::spectral::{decompose_unitary, project_block_diagonal, SpectralDecomposition, SpectralError};

/// Values at or below this are treated as roundoff and excluded from log-log fits.
pub const FIT_FLOOR: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error("number of steps must be at least {min} (got {n})")]
    Steps { n: u64, min: u64 },
    #[error("step index {l} out of range for N = {n}")]
    StepIndex { l: u64, n: u64 },
    #[error("step list must be nonempty and strictly ascending")]
    StepList,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("logarithm branch ambiguity at step {step}: eigenphase {phase} within 1e-6 of +-pi")]
    Branch { step: u64, phase: f64 },
    #[error("non-analytic `{0}` schedule: the residual rate needs entries polynomial in t")]
    NonAnalytic(&'static str),
    #[error("scenario has no pulse unitary")]
    NotPulseScenario,
    #[error("initial state weight {0} in the target eigenspace is below 1 - 1e-10")]
    InitialWeight(f64),
    #[error("invariant violated at N = {n}: {what}")]
    Invariant { n: u64, what: String },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn bath_dim_of(sys_dim: usize, joint_dim: usize) -> Result<usize, PulseError> {
    if joint_dim % sys_dim != 0 {
        return Err(PulseError::Dimension(format!(
            "joint dimension {joint_dim} is not a multiple of the system dimension {sys_dim}"
        )));
    }
    Ok(joint_dim / sys_dim)
}

/// Principal logarithm `-(1/dt) log W` of a unitary near the identity.
fn log_generator(w: &UnitaryOperator, dt: f64, step: u64) -> Result<HermitianOperator, PulseError> {
    let (values, vectors) = unitary_eig(w)?;
    let mut eigen = Vec::with_capacity(values.len());
    for z in values {
        let theta = z.arg();
        if theta.abs() > std::f64::consts::PI - tol::LOG_BRANCH {
            return Err(PulseError::Branch { step, phase: theta });
        }
        eigen.push(Complex64::new(-theta / dt, 0.0));
    }
    Ok(HermitianOperator::symmetrize(&spectral_sum(&vectors, &eigen)))
}

/// Iterates the rotation frames `V_l` and effective generators `Kt_l` of one run.
struct Frames<'a> {
    schedule: &'a GeneratorSchedule,
    step_noise: UnitaryOperator,
    bath: ComplexMatrix,
    dt: f64,
    n: u64,
    l: u64,
    v: UnitaryOperator,
}

struct Frame {
    /// `V_l` on the joint space.
    v: UnitaryOperator,
    /// `R_l = exp(i K(l dt) dt)` on the joint space.
    rotation: UnitaryOperator,
    /// `exp(-i Kt_l dt)`.
    w: UnitaryOperator,
}

impl<'a> Frames<'a> {
    fn new(schedule: &'a GeneratorSchedule, h: &HermitianOperator, tau: f64, n: u64) -> Result<Self, PulseError> {
        if n == 0 {
            return Err(PulseError::Steps { n, min: 1 });
        }
        let bath_dim = bath_dim_of(schedule.dim(), h.dim())?;
        let dt = tau / n as f64;
        Ok(Self {
            schedule,
            step_noise: expi_hermitian(h, -dt)?,
            bath: ComplexMatrix::identity(bath_dim),
            dt,
            n,
            l: 0,
            v: UnitaryOperator::identity(h.dim()),
        })
    }

    fn next_frame(&mut self) -> Result<Option<Frame>, PulseError> {
        if self.l == self.n {
            return Ok(None);
        }
        let k = self.schedule.sample(self.l as f64 * self.dt)?;
        let rotation = UnitaryOperator::new_unchecked(expi_hermitian(&k, self.dt)?.matrix().kron(&self.bath)?);
        let step = rotation.adjoint().compose(&self.step_noise);
        let w = UnitaryOperator::new_unchecked(self.v.adjoint().matrix() * &(step.matrix() * self.v.matrix()));
        let frame = Frame {
            v: self.v.clone(),
            rotation: rotation.clone(),
            w,
        };
        self.v = rotation.compose(&self.v);
        self.l += 1;
        Ok(Some(frame))
    }
}

/// Pulses `U_1 .. U_N` on the system space.
pub fn pulse_sequence(
    u0: &UnitaryOperator,
    schedule: &GeneratorSchedule,
    tau: f64,
    n: u64,
) -> Result<Vec<UnitaryOperator>, PulseError> {
    if n == 0 {
        return Err(PulseError::Steps { n, min: 1 });
    }
    if u0.dim() != schedule.dim() {
        return Err(PulseError::Dimension(format!(
            "pulse has dimension {}, schedule {}",
            u0.dim(),
            schedule.dim()
        )));
    }
    let dt = tau / n as f64;
    let mut u = u0.clone();
    let mut out = Vec::with_capacity(n as usize);
    for l in 0..n {
        let r = expi_hermitian(&schedule.sample(l as f64 * dt)?, dt)?;
        u = UnitaryOperator::new_unchecked(r.conjugate(u.matrix()));
        out.push(u.clone());
    }
    Ok(out)
}

/// `U_N e^{-iH dt} ... U_1 e^{-iH dt} psi0` with pulses acting as `U_l (x) I_B`.
pub fn apply_pulse_sequence(
    psi0: &StateVector,
    u0: &UnitaryOperator,
    schedule: &GeneratorSchedule,
    h: &HermitianOperator,
    tau: f64,
    n: u64,
) -> Result<StateVector, PulseError> {
    if psi0.dim() != h.dim() {
        return Err(PulseError::Dimension(format!(
            "state has dimension {}, noise {}",
            psi0.dim(),
            h.dim()
        )));
    }
    let bath = ComplexMatrix::identity(bath_dim_of(u0.dim(), h.dim())?);
    let noise = expi_hermitian(h, -tau / n.max(1) as f64)?;
    let mut psi = psi0.amplitudes().to_vec();
    for u in pulse_sequence(u0, schedule, tau, n)? {
        psi = noise.matrix().apply(&psi);
        psi = u.matrix().kron(&bath)?.apply(&psi);
    }
    Ok(StateVector::new_unchecked(psi))
}

/// Effective generator `Kt(l dt)` on the joint space.
pub fn ktilde_step(
    l: u64,
    schedule: &GeneratorSchedule,
    h: &HermitianOperator,
    tau: f64,
    n: u64,
) -> Result<HermitianOperator, PulseError> {
    if l >= n {
        return Err(PulseError::StepIndex { l, n });
    }
    let mut frames = Frames::new(schedule, h, tau, n)?;
    let mut frame = frames.next_frame()?;
    for _ in 0..l {
        frame = frames.next_frame()?;
    }
    let frame = frame.expect("l < n frames exist");
    log_generator(&frame.w, tau / n as f64, l)
}

/// `U0^N prod_l exp(-i dt sum_mu P_mu Kt_l P_mu)` on the joint space.
pub fn zeno_limit_operator(
    u0: &UnitaryOperator,
    schedule: &GeneratorSchedule,
    h: &HermitianOperator,
    tau: f64,
    n_grid: u64,
) -> Result<UnitaryOperator, PulseError> {
    let bath_dim = bath_dim_of(u0.dim(), h.dim())?;
    let d = decompose_unitary(u0, tol::PHASE_GROUPING)?.embed_left(bath_dim)?;
    let dt = tau / n_grid as f64;
    let mut frames = Frames::new(schedule, h, tau, n_grid)?;
    let mut z = UnitaryOperator::identity(h.dim());
    while let Some(frame) = frames.next_frame()? {
        let kt = log_generator(&frame.w, dt, frames.l - 1)?;
        let pinched = project_block_diagonal(&kt, &d)?;
        z = expi_hermitian(&pinched, -dt)?.compose(&z);
    }
    Ok(u0.embed_left(bath_dim)?.pow(n_grid).compose(&z))
}

/// `|| U0^{dagger N} prod_l U0 e^{-i H_l t/N} - prod_l e^{-i (t/N) sum_mu P_mu H_l P_mu} ||`
/// with `H_l = H(l t / N)`, `l = 0..N`.
pub fn theorem2_residual(
    u0: &UnitaryOperator,
    h_of_t: &GeneratorSchedule,
    t: f64,
    n: u64,
) -> Result<f64, PulseError> {
    if !h_of_t.is_analytic() {
        return Err(PulseError::NonAnalytic(h_of_t.kind_name()));
    }
    if n < 2 {
        return Err(PulseError::Steps { n, min: 2 });
    }
    if u0.dim() != h_of_t.dim() {
        return Err(PulseError::Dimension(format!(
            "pulse has dimension {}, generator {}",
            u0.dim(),
            h_of_t.dim()
        )));
    }
    let d = decompose_unitary(u0, tol::PHASE_GROUPING)?;
    let generators = h_of_t.samples(t, n)?;
    residual_from_generators(u0, &d, &generators, t / n as f64)
}

fn residual_from_generators(
    u0: &UnitaryOperator,
    d: &SpectralDecomposition,
    generators: &[HermitianOperator],
    dt: f64,
) -> Result<f64, PulseError> {
    let dim = u0.dim();
    let mut full = ComplexMatrix::identity(dim);
    let mut pinched = ComplexMatrix::identity(dim);
    for h in generators {
        full = u0.matrix() * &(expi_hermitian(h, -dt)?.matrix() * &full);
        pinched = expi_hermitian(&project_block_diagonal(h, d)?, -dt)?.matrix() * &pinched;
    }
    let n = generators.len() as u64;
    let lhs = u0.adjoint().pow(n).matrix() * &full;
    Ok(schatten_inf_norm(&(&lhs - &pinched)))
}

/// One row of a pulse study.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseRunResult {
    pub n_steps: u64,
    /// `<psi(tau)| Pi_nu(tau) |psi(tau)>`.
    pub weight: f64,
    pub one_minus_weight: f64,
    /// Zeno-limit gap of the effective generators `Kt_l`.
    pub residual_norm: f64,
    /// Max-entry mismatch between the direct product and its factored form.
    pub factorization_defect: f64,
    pub m: usize,
    pub min_phase_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseStudy {
    pub rows: Vec<PulseRunResult>,
    /// Fit of `1 - weight` against `N`; `None` if any value is at roundoff.
    pub weight_fit: Option<ConvergenceFit>,
    /// Fit of the residual norm against `N`; `None` if any value is at roundoff.
    pub residual_fit: Option<ConvergenceFit>,
    /// Set for piecewise-linear and table schedules.
    pub non_analytic: bool,
}

fn fit_above_floor(points: Vec<(f64, f64)>) -> Option<ConvergenceFit> {
    if points.iter().any(|&(_, v)| v <= FIT_FLOOR) {
        return None;
    }
    convergence_fit(&points).ok()
}

/// Everything a pulse study reports for a single `N`.
pub fn pulse_run(scenario: &SteeringScenario, n: u64) -> Result<PulseRunResult, PulseError> {
    let setup = scenario.pulse().ok_or(PulseError::NotPulseScenario)?;
    if n == 0 {
        return Err(PulseError::Steps { n, min: 1 });
    }
    let bath_dim = scenario.bath_dim();
    let d = setup.decomposition.embed_left(bath_dim)?;
    let u0 = setup.unitary.embed_left(bath_dim)?;
    let p_nu = d.projectors()[setup.nu].matrix().clone();
    let h = scenario.noise().total();
    let dt = scenario.tau() / n as f64;
    let noise = expi_hermitian(&h, -dt)?;

    let rho0 = scenario.initial_state().density();
    let initial_weight = (&p_nu * rho0.matrix()).trace().re;
    if initial_weight < 1.0 - tol::PULSE_INITIAL_WEIGHT {
        return Err(PulseError::InitialWeight(initial_weight));
    }

    let mut frames = Frames::new(scenario.schedule(), &h, scenario.tau(), n)?;
    let mut direct = ComplexMatrix::identity(h.dim());
    let mut factored = ComplexMatrix::identity(h.dim());
    let mut pinched = ComplexMatrix::identity(h.dim());
    let mut v_n = UnitaryOperator::identity(h.dim());
    while let Some(frame) = frames.next_frame()? {
        let l = frames.l - 1;
        let v_next = frame.rotation.compose(&frame.v);
        let pulse = v_next.conjugate(u0.matrix());
        direct = &pulse * &(noise.matrix() * &direct);

        let kt = log_generator(&frame.w, dt, l)?;
        factored = u0.matrix() * &(expi_hermitian(&kt, -dt)?.matrix() * &factored);
        let projected = project_block_diagonal(&kt, &d)?;
        pinched = expi_hermitian(&projected, -dt)?.matrix() * &pinched;
        v_n = v_next;
    }

    let factorization_defect = direct.max_abs_diff(&(v_n.matrix() * &factored));
    let residual_norm = schatten_inf_norm(&(&(u0.adjoint().pow(n).matrix() * &factored) - &pinched));
    let target = v_n.conjugate(&p_nu);
    let weight = match scenario.initial_state() {
        InitialState::Pure(psi) => {
            let out = direct.apply(psi.amplitudes());
            target.expectation(&out).re
        }
        InitialState::Mixed(rho) => (&target * &direct.conjugate(rho.matrix())).trace().re,
    };
    if !(0.0..=1.0 + 1e-10).contains(&weight) {
        return Err(PulseError::Invariant {
            n,
            what: format!("weight {weight} outside [0, 1]"),
        });
    }
    Ok(PulseRunResult {
        n_steps: n,
        weight,
        one_minus_weight: 1.0 - weight,
        residual_norm,
        factorization_defect,
        m: setup.decomposition.m(),
        min_phase_gap: setup.decomposition.min_phase_gap(),
    })
}

/// Runs every `N` (in parallel, assembled in order) and fits both convergence rates.
pub fn run_pulse_study(scenario: &SteeringScenario, n_list: &[u64]) -> Result<PulseStudy, PulseError> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PulseError::StepList);
    }
    let rows: Vec<PulseRunResult> = parallel::install(|| {
        n_list
            .par_iter()
            .map(|&n| pulse_run(scenario, n))
            .collect::<Result<_, _>>()
    })?;
    let weight_fit = fit_above_floor(rows.iter().map(|r| (r.n_steps as f64, r.one_minus_weight)).collect());
    let residual_fit = fit_above_floor(rows.iter().map(|r| (r.n_steps as f64, r.residual_norm)).collect());
    Ok(PulseStudy {
        rows,
        weight_fit,
        residual_fit,
        non_analytic: !scenario.schedule().is_analytic(),
    })
}

#[cfg(test)]
mod tests;
