//! Zeno-effect steering of open quantum systems.
//!
//! Two strategies drive a system state along a path of subspaces despite
//! uncontrolled coupling to a bath: frequent projective measurements
//! ([`measure`]) and frequent unitary kicks ([`pulse`]). [`bounds`] holds the
//! error estimates for the measured case and [`ergodic`] the weighted phase
//! sums behind the kicked case.

pub mod bounds;
pub mod ergodic;
pub mod linalg;
pub mod spectral;
pub mod scenario;
pub mod corpus;
pub mod measure;
pub mod parallel;
pub mod pulse;
pub mod verify;
