//! Steering problems: dimensions, generator schedule, noise, initial data and
//! (for pulse steering) the pulse unitary.
//!
//! Scenarios are read from JSON documents (see [`ScenarioDocument`]) and
//! validated once; a [`SteeringScenario`] is immutable afterwards. Operators
//! may be written as Pauli expressions (`"0.5*XX + 0.1*ZI"`) or as row-major
//! nested lists of `[re, im]` pairs. Re-serialization always writes matrices.

mod pauli_expr;
mod schedule;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    hermitian_eig, tolerance as tol, ComplexMatrix, DensityOperator, HermitianOperator, Projector,
    StateVector, UnitaryOperator,
};
use crate::spectral::{decompose_unitary, SpectralDecomposition};

pub use pauli_expr::{pauli_string, PauliError};
pub use schedule::{k_max_norm, sample_generator, GeneratorSchedule, ScheduleError, ScheduleKind};

pub const SCHEMA_VERSION: u32 = 1;
const MAX_QUBITS: u32 = 6;
const KNOT_SPAN: f64 = 1e-12;

/// One failed rule, located by a dotted field path.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub path: String,
    pub rule: String,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub struct ScenarioError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid scenario:")?;
        for v in &self.violations {
            write!(f, "\n  {}: {}", v.path, v.rule)?;
        }
        Ok(())
    }
}

impl ScenarioError {
    fn single(path: &str, rule: impl Into<String>) -> Self {
        Self {
            violations: vec![Violation {
                path: path.to_string(),
                rule: rule.into(),
            }],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Measure,
    Pulse,
}

/// A matrix entry: Pauli expression or raw rows of `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorDoc {
    Pauli(String),
    Matrix(Vec<Vec<[f64; 2]>>),
}

impl From<&ComplexMatrix> for OperatorDoc {
    fn from(m: &ComplexMatrix) -> Self {
        Self::Matrix(m.to_rows())
    }
}

impl From<&str> for OperatorDoc {
    fn from(s: &str) -> Self {
        Self::Pauli(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnotDoc {
    pub t: f64,
    pub op: OperatorDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleDoc {
    Constant { op: OperatorDoc },
    Polynomial { coefficients: Vec<OperatorDoc> },
    PiecewiseLinear { knots: Vec<KnotDoc> },
    Table { steps: Vec<OperatorDoc> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_sb: Option<OperatorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_b: Option<OperatorDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProjectorDoc {
    Ket { ket: Vec<[f64; 2]> },
    Operator(OperatorDoc),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateDoc {
    Ket(Vec<[f64; 2]>),
    Basis(usize),
    Density(Vec<Vec<[f64; 2]>>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projector: Option<ProjectorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseDoc {
    pub unitary: OperatorDoc,
    #[serde(default)]
    pub nu: usize,
}

/// Serialized form of a scenario, as read from and written to JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub mode: Mode,
    pub sys_qubits: u32,
    #[serde(default)]
    pub bath_qubits: u32,
    pub tau: f64,
    pub schedule: ScheduleDoc,
    #[serde(default)]
    pub noise: NoiseDoc,
    #[serde(default)]
    pub initial: InitialDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseDoc>,
}

impl ScenarioDocument {
    /// Measurement-mode skeleton with no noise and default initial data.
    pub fn measure(sys_qubits: u32, bath_qubits: u32, tau: f64, schedule: ScheduleDoc) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: None,
            mode: Mode::Measure,
            sys_qubits,
            bath_qubits,
            tau,
            schedule,
            noise: NoiseDoc::default(),
            initial: InitialDoc::default(),
            pulse: None,
        }
    }

    /// Pulse-mode skeleton targeting eigenspace `nu` of `unitary`.
    pub fn pulse(
        sys_qubits: u32,
        bath_qubits: u32,
        tau: f64,
        schedule: ScheduleDoc,
        unitary: OperatorDoc,
        nu: usize,
    ) -> Self {
        Self {
            mode: Mode::Pulse,
            pulse: Some(PulseDoc { unitary, nu }),
            ..Self::measure(sys_qubits, bath_qubits, tau, schedule)
        }
    }

    pub fn with_noise(mut self, h_sb: Option<OperatorDoc>, h_b: Option<OperatorDoc>) -> Self {
        self.noise = NoiseDoc { h_sb, h_b };
        self
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    pub fn validate(&self) -> Result<SteeringScenario, ScenarioError> {
        Builder::default().build(self)
    }
}

/// Joint-space initial condition.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    Pure(StateVector),
    Mixed(DensityOperator),
}

impl InitialState {
    pub fn density(&self) -> DensityOperator {
        match self {
            Self::Pure(psi) => psi.density(),
            Self::Mixed(rho) => rho.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Pure(psi) => psi.dim(),
            Self::Mixed(rho) => rho.dim(),
        }
    }
}

/// System-bath noise `h_sb` plus an optional bath-only term `h_b = I_S (x) B`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    pub h_sb: HermitianOperator,
    pub h_b: Option<HermitianOperator>,
}

impl NoiseModel {
    /// The full uncontrolled Hamiltonian `h_sb + h_b`.
    pub fn total(&self) -> HermitianOperator {
        match &self.h_b {
            Some(b) => self.h_sb.add(b),
            None => self.h_sb.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseSetup {
    pub unitary: UnitaryOperator,
    pub nu: usize,
    pub decomposition: SpectralDecomposition,
}

/// A validated steering problem.
#[derive(Clone, Debug, PartialEq)]
pub struct SteeringScenario {
    name: Option<String>,
    mode: Mode,
    sys_qubits: u32,
    bath_qubits: u32,
    tau: f64,
    schedule: GeneratorSchedule,
    noise: NoiseModel,
    initial_projector: Projector,
    initial_state: InitialState,
    pulse: Option<PulseSetup>,
}

impl SteeringScenario {
    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }
    pub fn mode(&self) -> Mode {
        self.mode
    }
    pub fn sys_qubits(&self) -> u32 {
        self.sys_qubits
    }
    pub fn bath_qubits(&self) -> u32 {
        self.bath_qubits
    }
    pub fn sys_dim(&self) -> usize {
        1 << self.sys_qubits
    }
    pub fn bath_dim(&self) -> usize {
        1 << self.bath_qubits
    }
    pub fn dim(&self) -> usize {
        self.sys_dim() * self.bath_dim()
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn schedule(&self) -> &GeneratorSchedule {
        &self.schedule
    }
    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }
    /// Projector on the system space.
    pub fn initial_projector(&self) -> &Projector {
        &self.initial_projector
    }
    pub fn initial_state(&self) -> &InitialState {
        &self.initial_state
    }
    pub fn pulse(&self) -> Option<&PulseSetup> {
        self.pulse.as_ref()
    }

    /// Copy with the bath-only term replaced; revalidates the factor structure.
    pub fn with_bath_term(&self, h_b: Option<HermitianOperator>) -> Result<Self, ScenarioError> {
        let mut doc = self.to_document();
        doc.noise.h_b = h_b.as_ref().map(|b| b.matrix().into());
        doc.validate()
    }

    /// Copy with a different noise operator.
    pub fn with_h_sb(&self, h_sb: &HermitianOperator) -> Result<Self, ScenarioError> {
        let mut doc = self.to_document();
        doc.noise.h_sb = Some(h_sb.matrix().into());
        doc.validate()
    }

    /// Document with every operator written as a raw matrix.
    pub fn to_document(&self) -> ScenarioDocument {
        let m = |h: &HermitianOperator| OperatorDoc::from(h.matrix());
        let schedule = match self.schedule.kind() {
            ScheduleKind::Constant(k) => ScheduleDoc::Constant { op: m(k) },
            ScheduleKind::Polynomial(c) => ScheduleDoc::Polynomial {
                coefficients: c.iter().map(m).collect(),
            },
            ScheduleKind::PiecewiseLinear(k) => ScheduleDoc::PiecewiseLinear {
                knots: k.iter().map(|(t, op)| KnotDoc { t: *t, op: m(op) }).collect(),
            },
            ScheduleKind::Table(s) => ScheduleDoc::Table {
                steps: s.iter().map(m).collect(),
            },
        };
        let state = match &self.initial_state {
            InitialState::Pure(psi) => StateDoc::Ket(psi.amplitudes().iter().map(|z| [z.re, z.im]).collect()),
            InitialState::Mixed(rho) => StateDoc::Density(rho.matrix().to_rows()),
        };
        ScenarioDocument {
            schema_version: SCHEMA_VERSION,
            name: self.name.clone(),
            mode: self.mode,
            sys_qubits: self.sys_qubits,
            bath_qubits: self.bath_qubits,
            tau: self.tau,
            schedule,
            noise: NoiseDoc {
                h_sb: Some(m(&self.noise.h_sb)),
                h_b: self.noise.h_b.as_ref().map(m),
            },
            initial: InitialDoc {
                projector: Some(ProjectorDoc::Operator(self.initial_projector.matrix().into())),
                state: Some(state),
            },
            pulse: self.pulse.as_ref().map(|p| PulseDoc {
                unitary: p.unitary.matrix().into(),
                nu: p.nu,
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("scenario documents always serialize")
    }
}

/// Parses and validates a JSON scenario document.
pub fn parse_scenario(text: &str) -> Result<SteeringScenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ScenarioDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ScenarioError::single(&path, format!("schema: {}", e.inner()))
    })?;
    doc.validate()
}

fn complex_vec(v: &[[f64; 2]]) -> Vec<num_complex::Complex64> {
    v.iter().map(|&[re, im]| num_complex::Complex64::new(re, im)).collect()
}

#[derive(Default)]
struct Builder {
    violations: Vec<Violation>,
}

impl Builder {
    fn fail(&mut self, path: &str, rule: impl fmt::Display) {
        self.violations.push(Violation {
            path: path.to_string(),
            rule: rule.to_string(),
        });
    }

    fn matrix(&mut self, doc: &OperatorDoc, dim: usize, qubits: usize, path: &str) -> Option<ComplexMatrix> {
        let m = match doc {
            OperatorDoc::Pauli(expr) => match pauli_string(expr, Some(qubits)) {
                Ok(h) => h.matrix().clone(),
                Err(e) => {
                    self.fail(path, e);
                    return None;
                }
            },
            OperatorDoc::Matrix(rows) => match ComplexMatrix::from_rows(rows) {
                Ok(m) => m,
                Err(e) => {
                    self.fail(path, e);
                    return None;
                }
            },
        };
        if m.dim() != dim {
            self.fail(path, format!("expected a {dim}x{dim} operator, found {0}x{0}", m.dim()));
            return None;
        }
        Some(m)
    }

    fn hermitian(&mut self, doc: &OperatorDoc, dim: usize, qubits: usize, path: &str) -> Option<HermitianOperator> {
        let m = self.matrix(doc, dim, qubits, path)?;
        match HermitianOperator::new(m) {
            Ok(h) => Some(h),
            Err(e) => {
                self.fail(path, e);
                None
            }
        }
    }

    fn schedule(&mut self, doc: &ScheduleDoc, dim: usize, qubits: usize, tau: f64) -> Option<GeneratorSchedule> {
        let ops = |b: &mut Self, list: &[OperatorDoc], field: &str| -> Option<Vec<HermitianOperator>> {
            if list.is_empty() {
                b.fail(&format!("schedule.{field}"), "must contain at least one operator");
                return None;
            }
            let out: Vec<_> = list
                .iter()
                .enumerate()
                .map(|(i, op)| b.hermitian(op, dim, qubits, &format!("schedule.{field}[{i}]")))
                .collect();
            out.into_iter().collect()
        };
        let built = match doc {
            ScheduleDoc::Constant { op } => {
                return self.hermitian(op, dim, qubits, "schedule.op").map(GeneratorSchedule::constant)
            }
            ScheduleDoc::Polynomial { coefficients } => {
                GeneratorSchedule::polynomial(ops(self, coefficients, "coefficients")?)
            }
            ScheduleDoc::Table { steps } => GeneratorSchedule::table(ops(self, steps, "steps")?, tau),
            ScheduleDoc::PiecewiseLinear { knots } => {
                if knots.len() < 2 {
                    self.fail("schedule.knots", "needs at least two knots spanning [0, tau]");
                    return None;
                }
                let first = knots[0].t;
                let last = knots[knots.len() - 1].t;
                if first.abs() > KNOT_SPAN || (last - tau).abs() > KNOT_SPAN * tau.max(1.0) {
                    self.fail(
                        "schedule.knots",
                        format!("knot times must span [0, tau] (found [{first}, {last}], tau = {tau})"),
                    );
                }
                let ops: Vec<_> = knots
                    .iter()
                    .enumerate()
                    .map(|(i, k)| {
                        self.hermitian(&k.op, dim, qubits, &format!("schedule.knots[{i}].op"))
                            .map(|h| (k.t, h))
                    })
                    .collect();
                GeneratorSchedule::piecewise_linear(ops.into_iter().collect::<Option<Vec<_>>>()?)
            }
        };
        match built {
            Ok(s) => Some(s),
            Err(e) => {
                self.fail("schedule", e);
                None
            }
        }
    }

    /// Checks `h_b = I_S (x) B` and returns it.
    fn bath_term(&mut self, h: HermitianOperator, sys_dim: usize, bath_dim: usize) -> Option<HermitianOperator> {
        let b = ComplexMatrix::from_fn(bath_dim, |a, c| {
            let mut sum = num_complex::Complex64::new(0.0, 0.0);
            for s in 0..sys_dim {
                sum += h.matrix().get(s * bath_dim + a, s * bath_dim + c);
            }
            sum / sys_dim as f64
        });
        let b = HermitianOperator::symmetrize(&b);
        let factored = b.embed_right(sys_dim).ok()?;
        let deviation = factored.matrix().max_abs_diff(h.matrix());
        if deviation > tol::BATH_FACTOR {
            self.fail(
                "noise.h_b",
                format!("must act on the bath only (max |h_b - I_S (x) B| = {deviation:e})"),
            );
            return None;
        }
        Some(h)
    }

    fn build(mut self, doc: &ScenarioDocument) -> Result<SteeringScenario, ScenarioError> {
        if doc.schema_version != SCHEMA_VERSION {
            self.fail("schema_version", format!("unsupported version {} (expected {SCHEMA_VERSION})", doc.schema_version));
        }
        if doc.sys_qubits == 0 {
            self.fail("sys_qubits", "must be at least 1");
        }
        if doc.sys_qubits + doc.bath_qubits > MAX_QUBITS {
            self.fail("bath_qubits", format!("system plus bath must not exceed {MAX_QUBITS} qubits"));
        }
        if !(doc.tau > 0.0 && doc.tau.is_finite()) {
            self.fail("tau", "must be positive and finite");
        }
        if !self.violations.is_empty() {
            return Err(ScenarioError {
                violations: self.violations,
            });
        }
        let (sq, bq) = (doc.sys_qubits as usize, doc.bath_qubits as usize);
        let (sys_dim, bath_dim) = (1usize << sq, 1usize << bq);
        let dim = sys_dim * bath_dim;

        let schedule = self.schedule(&doc.schedule, sys_dim, sq, doc.tau);
        let h_sb = match &doc.noise.h_sb {
            Some(op) => self.hermitian(op, dim, sq + bq, "noise.h_sb"),
            None => Some(HermitianOperator::zeros(dim)),
        };
        let h_b = match &doc.noise.h_b {
            Some(op) => self
                .hermitian(op, dim, sq + bq, "noise.h_b")
                .and_then(|h| self.bath_term(h, sys_dim, bath_dim))
                .map(Some),
            None => Some(None),
        };

        let pulse = match (doc.mode, &doc.pulse) {
            (Mode::Pulse, None) => {
                self.fail("pulse", "required in pulse mode");
                None
            }
            (_, Some(p)) => self.pulse(p, sys_dim, sq),
            (Mode::Measure, None) => None,
        };

        let projector = self.projector(doc, sys_dim, sq, pulse.as_ref());
        let state = self.state(doc, dim, projector.as_ref(), bath_dim);

        if let (Some(p), Some(s)) = (&projector, &state) {
            self.check_support(doc.mode, p, s, bath_dim);
        }

        match (schedule, h_sb, h_b, projector, state) {
            (Some(schedule), Some(h_sb), Some(h_b), Some(initial_projector), Some(initial_state))
                if self.violations.is_empty() =>
            {
                Ok(SteeringScenario {
                    name: doc.name.clone(),
                    mode: doc.mode,
                    sys_qubits: doc.sys_qubits,
                    bath_qubits: doc.bath_qubits,
                    tau: doc.tau,
                    schedule,
                    noise: NoiseModel { h_sb, h_b },
                    initial_projector,
                    initial_state,
                    pulse,
                })
            }
            _ => Err(ScenarioError {
                violations: self.violations,
            }),
        }
    }

    fn pulse(&mut self, p: &PulseDoc, sys_dim: usize, sq: usize) -> Option<PulseSetup> {
        let m = self.matrix(&p.unitary, sys_dim, sq, "pulse.unitary")?;
        let unitary = match UnitaryOperator::new(m) {
            Ok(u) => u,
            Err(e) => {
                self.fail("pulse.unitary", e);
                return None;
            }
        };
        let decomposition = match decompose_unitary(&unitary, tol::PHASE_GROUPING) {
            Ok(d) => d,
            Err(e) => {
                self.fail("pulse.unitary", e);
                return None;
            }
        };
        if p.nu >= decomposition.m() {
            self.fail(
                "pulse.nu",
                format!("eigenspace index {} out of range (unitary has {} distinct phases)", p.nu, decomposition.m()),
            );
            return None;
        }
        Some(PulseSetup {
            unitary,
            nu: p.nu,
            decomposition,
        })
    }

    fn projector(
        &mut self,
        doc: &ScenarioDocument,
        sys_dim: usize,
        sq: usize,
        pulse: Option<&PulseSetup>,
    ) -> Option<Projector> {
        let path = "initial.projector";
        let given = match &doc.initial.projector {
            None => None,
            Some(ProjectorDoc::Ket { ket }) => match StateVector::new(complex_vec(ket)) {
                Ok(v) if v.dim() == sys_dim => Some(Projector::from_ket(&v)),
                Ok(v) => {
                    self.fail(path, format!("ket has dimension {}, expected {sys_dim}", v.dim()));
                    return None;
                }
                Err(e) => {
                    self.fail(path, e);
                    return None;
                }
            },
            Some(ProjectorDoc::Operator(op)) => {
                let m = self.matrix(op, sys_dim, sq, path)?;
                match Projector::new(m) {
                    Ok(p) => Some(p),
                    Err(e) => {
                        self.fail(path, e);
                        return None;
                    }
                }
            }
        };
        if let Some(p) = &given {
            if p.rank() == 0 {
                self.fail(path, "projector must have positive rank");
                return None;
            }
        }
        match (doc.mode, pulse) {
            (Mode::Pulse, Some(setup)) => {
                let target = setup.decomposition.projectors()[setup.nu].clone();
                if let Some(p) = given {
                    if p.matrix().max_abs_diff(target.matrix()) > tol::IDEMPOTENT {
                        self.fail(path, "in pulse mode the projector must equal the target eigenprojector P_nu");
                        return None;
                    }
                }
                Some(target)
            }
            (Mode::Pulse, None) => None,
            (Mode::Measure, _) => Some(given.unwrap_or_else(|| Projector::from_ket(&StateVector::basis(sys_dim, 0)))),
        }
    }

    fn state(&mut self, doc: &ScenarioDocument, dim: usize, projector: Option<&Projector>, bath_dim: usize) -> Option<InitialState> {
        let path = "initial.state";
        let state = match &doc.initial.state {
            Some(StateDoc::Ket(amps)) => StateVector::new(complex_vec(amps)).map(InitialState::Pure),
            Some(StateDoc::Basis(i)) => {
                if *i >= dim {
                    self.fail(path, format!("basis index {i} out of range for dimension {dim}"));
                    return None;
                }
                Ok(InitialState::Pure(StateVector::basis(dim, *i)))
            }
            Some(StateDoc::Density(rows)) => ComplexMatrix::from_rows(rows)
                .and_then(DensityOperator::new)
                .map(InitialState::Mixed),
            None => match doc.mode {
                Mode::Pulse => Ok(InitialState::Pure(StateVector::basis(dim, 0))),
                Mode::Measure => {
                    let p = projector?;
                    let eig = hermitian_eig(&HermitianOperator::symmetrize(p.matrix())).ok()?;
                    let n = p.dim();
                    let top = n - 1;
                    let v: Vec<_> = (0..n).map(|i| eig.eigenvectors.matrix().get(i, top)).collect();
                    let sys = StateVector::new(v).ok()?;
                    Ok(InitialState::Pure(sys.tensor(&StateVector::basis(bath_dim, 0))))
                }
            },
        };
        match state {
            Ok(s) if s.dim() == dim => Some(s),
            Ok(s) => {
                self.fail(path, format!("state has dimension {}, expected {dim}", s.dim()));
                None
            }
            Err(e) => {
                self.fail(path, e);
                None
            }
        }
    }

    fn check_support(&mut self, mode: Mode, p: &Projector, s: &InitialState, bath_dim: usize) {
        let Ok(pe) = p.embed_left(bath_dim) else { return };
        match mode {
            Mode::Measure => {
                let defect = match s {
                    InitialState::Pure(psi) => {
                        let projected = pe.matrix().apply(psi.amplitudes());
                        projected
                            .iter()
                            .zip(psi.amplitudes())
                            .map(|(a, b)| (a - b).norm())
                            .fold(0.0, f64::max)
                    }
                    InitialState::Mixed(rho) => pe.matrix().conjugate(rho.matrix()).max_abs_diff(rho.matrix()),
                };
                if defect > tol::INITIAL_SUPPORT {
                    self.fail(
                        "initial.state",
                        format!(
                            "precondition violated: measurement steering requires rho(0) = Pi0 rho(0) Pi0 (deviation {defect:e})"
                        ),
                    );
                }
            }
            Mode::Pulse => {
                let weight = match s {
                    InitialState::Pure(psi) => psi.expectation(pe.matrix()),
                    InitialState::Mixed(rho) => (pe.matrix() * rho.matrix()).trace().re,
                };
                if weight < 1.0 - tol::PULSE_INITIAL_WEIGHT {
                    self.fail(
                        "initial.state",
                        format!("precondition violated: initial state must lie in the target eigenspace P_nu (weight {weight})"),
                    );
                }
            }
        }
    }
}
