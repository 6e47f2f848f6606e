//! Coherence quantification through pure-state conversion.
//!
//! The coherence of a mixed state `rho` is measured by the least coherent
//! pure state that some incoherent operation can turn into `rho`. By
//! majorization, that minimum runs over the sorted aggregate coherence
//! vectors `sum_i p_i mu_desc(phi_i)` of all pure-state decompositions of
//! `rho`, which is what [`solver`] optimizes.
//!
//! Modules:
//!
//! - [`state`]: validated density matrices and pure states.
//! - [`majorization`]: coherence vectors, majorization, convertibility.
//! - [`measures`]: symmetric concave pure-state functionals `f(mu)`.
//! - [`channels`]: Kraus channels, class tests, constructive channels.
//! - [`solver`]: the monotone, its convex roof, qubit closed forms, oracles.
//! - [`suites`]: seeded property-verification suites used by the CLI.
//! - [`io`]: JSON file formats.

pub mod channels;
pub mod error;
pub mod io;
pub mod linalg;
pub mod majorization;
pub mod measures;
pub mod random;
pub mod solver;
pub mod state;
pub mod suites;
pub mod tol;

pub use error::{Error, Result};
