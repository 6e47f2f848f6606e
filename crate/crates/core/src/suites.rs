//! Seeded verification suites behind `coherence verify`.
//!
//! Trial `t` of a run with seed `s` draws from its own ChaCha stream
//! `(s, t)`, so trials can run in any order and results still assemble
//! deterministically.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{
    build_dephasing_channel, build_n_channel, build_preparation_channel, build_t_channel, canonical_pure_state,
    random_io_with, random_sio_with, ChannelClass,
};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::majorization::{aggregate_vector, CoherenceVector, Ensemble};
use crate::measures::{probe_functional, PureCoherenceFunctional};
use crate::random::{random_density, random_ensemble, random_probability, random_pure, random_qubit};
use crate::solver::{qubit_cm, DIM_MAX};
use crate::state::{DensityMatrix, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Mono,
    Strong,
    Convex,
    Max,
    Lemma3,
    Prep,
    Dephase,
    Probe,
    Collapse,
    Order,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Mono,
        Suite::Strong,
        Suite::Convex,
        Suite::Max,
        Suite::Lemma3,
        Suite::Prep,
        Suite::Dephase,
        Suite::Probe,
        Suite::Collapse,
        Suite::Order,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Mono => "mono",
            Suite::Strong => "strong",
            Suite::Convex => "convex",
            Suite::Max => "max",
            Suite::Lemma3 => "lemma3",
            Suite::Prep => "prep",
            Suite::Dephase => "dephase",
            Suite::Probe => "probe",
            Suite::Collapse => "collapse",
            Suite::Order => "order",
        }
    }

    /// Tolerance a trial may exceed its inequality or identity by.
    pub fn slack(self) -> f64 {
        match self {
            Suite::Prep | Suite::Collapse | Suite::Order => 1e-12,
            Suite::Probe => 0.0,
            _ => 1e-9,
        }
    }

    fn qubit_only(self) -> bool {
        matches!(self, Suite::Mono | Suite::Strong | Suite::Convex | Suite::Max)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: Suite,
    pub dim: usize,
    pub trials: usize,
    pub failures: usize,
    /// Largest amount by which any checked relation was broken (or, for
    /// identities, the largest deviation), reported even on a pass.
    pub worst_violation: f64,
    pub slack: f64,
    pub seed: u64,
    pub wall_time: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Worst deviation in one trial and whether it counts as a failure.
#[derive(Debug, Clone, Copy)]
struct Trial {
    violation: f64,
    failed: bool,
}

impl Trial {
    fn against(violation: f64, slack: f64) -> Self {
        Self {
            violation: violation.max(0.0),
            failed: !(violation <= slack),
        }
    }

    fn merge(self, other: Trial) -> Trial {
        Trial {
            violation: self.violation.max(other.violation),
            failed: self.failed || other.failed,
        }
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Pure states drawn per SIO pair in the `lemma3` suite.
pub const LEMMA3_STATES: usize = 100;

pub fn run_suite(suite: Suite, dim: usize, trials: usize, seed: u64) -> Result<SuiteResult> {
    if dim == 0 {
        return Err(Error::Empty);
    }
    if dim > DIM_MAX {
        return Err(Error::DimensionTooLarge { dim, max: DIM_MAX });
    }
    if suite.qubit_only() && dim != 2 {
        return Err(Error::Unsupported(format!("suite {suite} runs on qubits only (--dim 2)")));
    }
    let start = Instant::now();
    let slack = suite.slack();

    let outcomes: Vec<Trial> = if suite == Suite::Probe {
        probe_trials(dim, trials, seed)
    } else {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(seed, t);
                run_trial(suite, dim, t, slack, &mut rng)
            })
            .collect::<Result<_>>()?
    };

    Ok(SuiteResult {
        suite,
        dim,
        trials,
        failures: outcomes.iter().filter(|t| t.failed).count(),
        worst_violation: outcomes.iter().map(|t| t.violation).fold(0.0, f64::max),
        slack,
        seed,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn run_trial(suite: Suite, dim: usize, t: usize, slack: f64, rng: &mut ChaCha8Rng) -> Result<Trial> {
    match suite {
        Suite::Mono => mono_trial(rng, slack),
        Suite::Strong => strong_trial(rng, slack),
        Suite::Convex => convex_trial(rng, slack),
        Suite::Max => max_trial(rng, t, slack),
        Suite::Lemma3 => lemma3_trial(rng, dim, slack),
        Suite::Prep => prep_trial(rng, dim, t, slack),
        Suite::Dephase => dephase_trial(rng, dim, slack),
        Suite::Collapse => Ok(collapse_trial(rng, dim, slack)),
        Suite::Order => Ok(order_trial(rng, dim, slack)),
        Suite::Probe => unreachable!("probe runs as a batch"),
    }
}

fn each_builtin(mut check: impl FnMut(&PureCoherenceFunctional) -> Result<Trial>) -> Result<Trial> {
    let mut acc = Trial {
        violation: 0.0,
        failed: false,
    };
    for f in PureCoherenceFunctional::BUILTINS {
        acc = acc.merge(check(&f)?);
    }
    Ok(acc)
}

/// `C(eps(sigma)) <= C(sigma)` for a random IO `eps`.
fn mono_trial(rng: &mut ChaCha8Rng, slack: f64) -> Result<Trial> {
    let sigma = random_qubit(rng);
    let ch = random_io_with(rng, 2);
    let out = ch.apply(&sigma)?;
    each_builtin(|f| Ok(Trial::against(qubit_cm(&out, f)? - qubit_cm(&sigma, f)?, slack)))
}

/// `sum_n p_n C(rho_n) <= C(sigma)` for a random SIO instrument.
fn strong_trial(rng: &mut ChaCha8Rng, slack: f64) -> Result<Trial> {
    let sigma = random_qubit(rng);
    let n = rng.random_range(1..=4);
    let ch = random_sio_with(rng, 2, n);
    let outcomes = ch.instrument(&sigma)?;
    each_builtin(|f| {
        let mut after = 0.0;
        for o in &outcomes {
            after += o.probability * qubit_cm(&o.state, f)?;
        }
        Ok(Trial::against(after - qubit_cm(&sigma, f)?, slack))
    })
}

/// `C(sum_j q_j sigma_j) <= sum_j q_j C(sigma_j)`.
fn convex_trial(rng: &mut ChaCha8Rng, slack: f64) -> Result<Trial> {
    let n = rng.random_range(2..=4);
    let q = random_probability(rng, n);
    let parts: Vec<DensityMatrix> = (0..n).map(|_| random_qubit(rng)).collect();
    let mut mix = CMatrix::zeros(2, 2);
    for (w, s) in q.iter().zip(&parts) {
        mix += s.matrix().scale(*w);
    }
    let mix = DensityMatrix::validate(mix)?;
    each_builtin(|f| {
        let mut rhs = 0.0;
        for (w, s) in q.iter().zip(&parts) {
            rhs += w * qubit_cm(s, f)?;
        }
        Ok(Trial::against(qubit_cm(&mix, f)? - rhs, slack))
    })
}

/// Only states with `|b| = 1/2` (maximally coherent) reach the maximum.
/// Every tenth trial is an exact maximally coherent state with a random
/// phase and every tenth-plus-one a random pure state, so both sides of the
/// boundary get exercised.
fn max_trial(rng: &mut ChaCha8Rng, t: usize, slack: f64) -> Result<Trial> {
    let sigma = match t % 10 {
        0 => PureState::mcs(2, &[0.0, rng.random_range(0.0..std::f64::consts::TAU)])?.density(),
        1 => random_pure(rng, 2).density(),
        _ => random_qubit(rng),
    };
    let near_mcs = (sigma.entry(0, 1).norm() - 0.5).abs() <= 1e-9;
    each_builtin(|f| {
        // the maximum itself, without the rounding a density matrix would add
        let gap = qubit_cm(&sigma, f)? - f.eval(&[0.5, 0.5]);
        Ok(if near_mcs {
            Trial::against(gap, slack)
        } else {
            // strict: reaching the maximum at all is a failure
            Trial {
                violation: gap.max(0.0),
                failed: gap >= 0.0,
            }
        })
    })
}

/// Outcome-wise probability and state equalities of the `T` / `N`
/// construction on one random SIO pair and [`LEMMA3_STATES`] pure inputs.
fn lemma3_trial(rng: &mut ChaCha8Rng, dim: usize, slack: f64) -> Result<Trial> {
    let n_m = rng.random_range(1..=3);
    let n_k = rng.random_range(1..=3);
    let m = random_sio_with(rng, dim, n_m);
    let k = random_sio_with(rng, dim, n_k);
    let t = build_t_channel(&m, &k)?;
    let ns = (0..k.kraus().len())
        .map(|i| build_n_channel(&m, &k, &t, i))
        .collect::<Result<Vec<_>>>()?;
    let structural = t.has(ChannelClass::Sio) && ns.iter().all(|n| n.has(ChannelClass::Sio));

    let mut worst: f64 = 0.0;
    for _ in 0..LEMMA3_STATES {
        let psi = random_pure(rng, dim).density();
        let rho = m.apply(&psi)?;
        for (i, ki) in k.kraus().iter().enumerate() {
            let target = ki * rho.matrix() * ki.adjoint();
            let ti = &t.kraus()[i];
            let branch = ti * psi.matrix() * ti.adjoint();
            worst = worst.max((branch.trace() - target.trace()).norm());
            let converted = ns[i].apply_operator(&branch)?;
            worst = worst.max(linalg::max_abs_diff(&converted, &target));
        }
    }
    let mut trial = Trial::against(worst, slack);
    trial.failed |= !structural;
    Ok(trial)
}

/// `eps_W(|0><0|) = diag(sigma)`. Every fourth target has a zero entry.
fn prep_trial(rng: &mut ChaCha8Rng, dim: usize, t: usize, slack: f64) -> Result<Trial> {
    let mut sigma = random_probability(rng, dim);
    if t % 4 == 3 && dim > 1 {
        sigma[rng.random_range(0..dim)] = 0.0;
        let s: f64 = sigma.iter().sum();
        sigma.iter_mut().for_each(|p| *p /= s);
    }
    let ch = build_preparation_channel(&sigma)?;
    let out = ch.apply(&PureState::basis(dim, 0).density())?;
    let target = DensityMatrix::from_diagonal(&sigma)?;
    let mut trial = Trial::against(out.max_distance(&target), slack);
    trial.failed |= !ch.has(ChannelClass::Sio);
    Ok(trial)
}

/// The dephasing channel takes `canonical_pure_state(rho)` back to `rho`.
fn dephase_trial(rng: &mut ChaCha8Rng, dim: usize, slack: f64) -> Result<Trial> {
    let rho = random_density(rng, dim);
    let ch = build_dephasing_channel(&rho)?;
    let out = ch.apply(&canonical_pure_state(&rho).density())?;
    let diagonal_kraus = ch
        .normal_form()
        .is_some_and(|nf| nf.iter().all(|k| k.perm.iter().enumerate().all(|(g, &p)| g == p)));
    let mut trial = Trial::against(out.max_distance(&rho), slack);
    trial.failed |= !diagonal_kraus;
    Ok(trial)
}

fn random_test_ensemble(rng: &mut ChaCha8Rng, dim: usize) -> Ensemble {
    let k = rng.random_range(1..=6);
    random_ensemble(rng, dim, k)
}

fn roof_sum(e: &Ensemble, f: &PureCoherenceFunctional) -> f64 {
    e.entries()
        .iter()
        .map(|(w, s)| w * f.eval_vector(&CoherenceVector::of(s)))
        .sum()
}

/// The geometric functional is additive along an ensemble:
/// `f(sum p mu_desc) = sum p f(mu_desc)`.
fn collapse_trial(rng: &mut ChaCha8Rng, dim: usize, slack: f64) -> Trial {
    let e = random_test_ensemble(rng, dim);
    let f = PureCoherenceFunctional::Geometric;
    let gap = (f.eval_vector(&aggregate_vector(&e)) - roof_sum(&e, &f)).abs();
    Trial::against(gap, slack)
}

/// Concavity per decomposition: `sum p f(mu_desc) <= f(sum p mu_desc)`.
fn order_trial(rng: &mut ChaCha8Rng, dim: usize, slack: f64) -> Trial {
    let e = random_test_ensemble(rng, dim);
    let agg = aggregate_vector(&e);
    PureCoherenceFunctional::BUILTINS
        .iter()
        .map(|f| Trial::against(roof_sum(&e, f) - f.eval_vector(&agg), slack))
        .fold(Trial { violation: 0.0, failed: false }, Trial::merge)
}

/// Runs the functional probe for each built-in; every violation it finds is a failure.
fn probe_trials(dim: usize, trials: usize, seed: u64) -> Vec<Trial> {
    PureCoherenceFunctional::BUILTINS
        .iter()
        .map(|f| {
            let r = probe_functional(f, dim, trials, seed);
            Trial {
                violation: r.worst_violation,
                failed: r.total_violations() > 0,
            }
        })
        .collect()
}
