//! Validation and comparison tolerances used across the crate.

/// Largest supported operator dimension (e.g. three system qubits with three bath qubits).
pub const MAX_DIM: usize = 64;

/// Max-entry deviation `|A - A^dagger|` accepted for a Hermitian operator.
pub const HERMITIAN: f64 = 1e-12;

/// Max-entry deviation `|U^dagger U - I|` accepted for a unitary.
pub const UNITARY: f64 = 1e-10;

/// Max-entry deviation `|P^2 - P|` accepted for a projector.
pub const IDEMPOTENT: f64 = 1e-10;

/// Allowed gap between a projector's trace and its integer rank.
pub const PROJECTOR_TRACE: f64 = 1e-8;

/// Allowed deviation of a state vector's norm from one.
pub const STATE_NORM: f64 = 1e-10;

/// Allowed deviation of a density operator's trace from one.
pub const DENSITY_TRACE: f64 = 1e-10;

/// Most negative eigenvalue accepted for a density operator.
pub const DENSITY_MIN_EIGENVALUE: f64 = -1e-10;

/// `rho(0) = Pi_0 rho(0) Pi_0` must hold to this max-entry deviation.
pub const INITIAL_SUPPORT: f64 = 1e-10;

/// Minimum initial weight `1 - w` deficit allowed in the pulse eigenspace.
pub const PULSE_INITIAL_WEIGHT: f64 = 1e-10;

/// Default circular gap below which two unitary eigenphases are merged.
pub const PHASE_GROUPING: f64 = 1e-8;

/// Smallest and largest accepted phase-grouping tolerance.
pub const PHASE_GROUPING_RANGE: (f64, f64) = (1e-10, 1e-2);

/// Eigenphases this close to the branch cut at `+-pi` make a logarithm ambiguous.
pub const LOG_BRANCH: f64 = 1e-6;

/// Max-entry deviation used when checking that a bath term factors as `I_S (x) B`.
pub const BATH_FACTOR: f64 = 1e-12;

/// Branch weight below which a Monte Carlo trajectory is aborted.
pub const RENORMALIZATION_FLOOR: f64 = 1e-300;

/// Iteration cap handed to the eigen solvers.
pub const EIGEN_MAX_ITERATIONS: usize = 10_000;
