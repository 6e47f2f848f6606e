//! Numeric tolerances shared across the crate.
//!
//! `COHERENCE_TOL`, when set to a positive float, replaces both the state and
//! channel tolerances for the whole process. It exists for debugging noisy
//! inputs; leave it unset in normal use.

use std::sync::OnceLock;

pub const TOL_STATE: f64 = 1e-9;
pub const TOL_CHAN: f64 = 1e-8;
pub const TOL_MAJOR: f64 = 1e-9;
/// Eigenvalues below this are treated as zero when computing the rank of a state.
pub const RANK_CUTOFF: f64 = 1e-10;

pub const ENV_VAR: &str = "COHERENCE_TOL";

fn env_override() -> Option<f64> {
    static CELL: OnceLock<Option<f64>> = OnceLock::new();
    *CELL.get_or_init(|| {
        std::env::var(ENV_VAR)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
    })
}

pub fn state() -> f64 {
    env_override().unwrap_or(TOL_STATE)
}

pub fn chan() -> f64 {
    env_override().unwrap_or(TOL_CHAN)
}

/// Rejects a `COHERENCE_TOL` that is set but not a positive finite float,
/// which would otherwise be silently ignored.
pub fn check_env() -> crate::Result<()> {
    match std::env::var(ENV_VAR) {
        Ok(s) if env_override().is_none() => Err(crate::Error::Parse(format!("{ENV_VAR}={s:?} is not a positive number"))),
        _ => Ok(()),
    }
}
