//! Estimators for the pure-state-conversion monotone `C_m` and the convex
//! roof `C_f`.
//!
//! Both are infima over pure-state decompositions of `rho`. Decompositions
//! are searched through Givens-parametrized isometries (see
//! [`decomposition`]) by a randomized, derivative-free angle descent with
//! restarts. Outside the qubit closed form and the geometric reduction the
//! results are upper bounds only, and reports say so.

pub mod brute;
pub mod decomposition;
pub mod qubit;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::majorization::{aggregate_vector, pure_from_vector, CoherenceVector, Ensemble};
use crate::measures::PureCoherenceFunctional;
use crate::state::{DensityMatrix, PureState};
use crate::tol;

pub use brute::{brute_force_cm, GridSpec};
pub use decomposition::{decomposition_from_isometry, DecompositionParam, Objective};
pub use qubit::{qubit_cm, qubit_convexity_probe, qubit_optimal_decomposition, qubit_report, ConvexityProbe, QubitDecomposition};

use decomposition::{n_angles, Decomposer, Rotation, Scratch};

/// Largest dimension the estimators accept.
pub const DIM_MAX: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub seed: u64,
    pub restarts: usize,
    /// Hard cap on descent iterations per restart.
    pub max_iters: usize,
    /// A restart stops once its best value improved by less than
    /// `stall_tol` over the last `stall_window` iterations.
    pub stall_window: usize,
    pub stall_tol: f64,
    /// Ensemble sizes to cycle through; `None` means `rank..=d*d`.
    pub sizes: Option<Vec<usize>>,
    pub parallel: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 32,
            max_iters: 50_000,
            stall_window: 200,
            stall_tol: 1e-9,
            sizes: None,
            parallel: true,
        }
    }
}

impl SolveOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub value: f64,
    pub best_ensemble: Ensemble,
    pub best_mu: CoherenceVector,
    /// `pure_from_vector(best_mu)`: a pure state the input is reachable from.
    pub realizing_state: PureState,
    pub restarts_used: usize,
    pub converged: bool,
    pub method: String,
    pub measure: String,
    /// False only where the value is known to be exact.
    pub upper_bound: bool,
}

/// Outcome of one restart: the final angles and their objective value.
#[derive(Debug, Clone)]
struct Candidate {
    k: usize,
    angles: Vec<f64>,
    value: f64,
    converged: bool,
}

fn check_dim(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() > DIM_MAX {
        return Err(Error::DimensionTooLarge {
            dim: rho.dim(),
            max: DIM_MAX,
        });
    }
    Ok(())
}

fn method_name(obj: Objective) -> &'static str {
    match obj {
        Objective::Monotone => "optimize",
        Objective::Roof => "roof",
    }
}

fn value_of(e: &Ensemble, mu: &CoherenceVector, f: &PureCoherenceFunctional, obj: Objective) -> f64 {
    match obj {
        Objective::Monotone => f.eval_vector(mu),
        Objective::Roof => e
            .entries()
            .iter()
            .map(|(w, s)| w * f.eval_vector(&CoherenceVector::of(s)))
            .sum(),
    }
}

fn report_from(
    ensemble: Ensemble,
    f: &PureCoherenceFunctional,
    obj: Objective,
    restarts_used: usize,
    converged: bool,
    upper_bound: bool,
) -> SolveReport {
    let best_mu = aggregate_vector(&ensemble);
    let value = value_of(&ensemble, &best_mu, f, obj).max(0.0);
    SolveReport {
        value,
        realizing_state: pure_from_vector(&best_mu),
        best_mu,
        best_ensemble: ensemble,
        restarts_used,
        converged,
        method: method_name(obj).to_string(),
        measure: f.name().to_string(),
        upper_bound,
    }
}

/// `{(rho_ii, |i>)}`: for incoherent input its aggregate is a basis vector,
/// so every admissible functional is zero on it.
fn incoherent_report(rho: &DensityMatrix, f: &PureCoherenceFunctional, obj: Objective) -> SolveReport {
    let d = rho.dim();
    let entries = rho
        .diagonal()
        .into_iter()
        .enumerate()
        .filter(|(_, p)| *p > 0.0)
        .map(|(i, p)| (p, PureState::basis(d, i)))
        .collect();
    report_from(Ensemble::from_trusted(entries), f, obj, 0, true, false)
}

fn sizes_for(dec: &Decomposer, opts: &SolveOptions) -> Vec<usize> {
    let r = dec.rank();
    if r == 1 {
        return vec![1];
    }
    let d = dec.dim();
    match &opts.sizes {
        Some(s) => {
            let s: Vec<usize> = s.iter().copied().filter(|&k| k >= r).collect();
            if s.is_empty() {
                vec![r]
            } else {
                s
            }
        }
        None => (r..=(d * d).max(r)).collect(),
    }
}

/// Independent stream per restart so results do not depend on scheduling.
fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Randomized angle descent from `start`.
///
/// Each step perturbs either one coordinate or all of them with Gaussian
/// noise of the current step size; accepted moves enlarge the step and
/// rejected ones shrink it. Rotations are cached so a one-coordinate move
/// recomputes a single pair.
fn descend(
    dec: &Decomposer,
    f: &PureCoherenceFunctional,
    obj: Objective,
    k: usize,
    start: Vec<f64>,
    opts: &SolveOptions,
    rng: &mut ChaCha8Rng,
) -> Candidate {
    let r = dec.rank();
    let n = start.len();
    let mut scratch = Scratch::default();
    let mut v = Vec::with_capacity(k * r);
    let mut eval = |rots: &[Rotation]| {
        decomposition::isometry_into(k, r, rots, &mut v);
        dec.score(&v, k, f, obj, &mut scratch)
    };

    let mut x = start;
    let mut rots = decomposition::rotations(&x);
    let mut best = eval(&rots);
    if n == 0 {
        return Candidate {
            k,
            angles: x,
            value: best,
            converged: true,
        };
    }
    let mut cand = x.clone();
    let mut cand_rots = rots.clone();
    let mut step = 0.3;
    let mut window_start = best;
    let mut converged = false;
    let window = opts.stall_window.max(1);
    for it in 1..=opts.max_iters {
        let single = rng.random::<bool>();
        let j = if single {
            let j = rng.random_range(0..n);
            cand[j] += step * rng.sample::<f64, _>(StandardNormal);
            let pair = j / 2;
            cand_rots[pair] = Rotation::new(cand[2 * pair], cand[2 * pair + 1]);
            j
        } else {
            let s = step / (n as f64).sqrt();
            for a in cand.iter_mut() {
                *a += s * rng.sample::<f64, _>(StandardNormal);
            }
            for (g, a) in cand_rots.iter_mut().zip(cand.chunks_exact(2)) {
                *g = Rotation::new(a[0], a[1]);
            }
            0
        };
        let val = eval(&cand_rots);
        if val < best {
            best = val;
            x.copy_from_slice(&cand);
            rots.copy_from_slice(&cand_rots);
            step = (step * 2.0).min(PI);
        } else {
            if single {
                cand[j] = x[j];
                cand_rots[j / 2] = rots[j / 2];
            } else {
                cand.copy_from_slice(&x);
                cand_rots.copy_from_slice(&rots);
            }
            step = (step * 0.9).max(1e-7);
        }
        if it % window == 0 {
            if window_start - best < opts.stall_tol {
                converged = true;
                break;
            }
            window_start = best;
        }
    }
    Candidate {
        k,
        angles: x,
        value: best,
        converged,
    }
}

fn run_restarts(dec: &Decomposer, f: &PureCoherenceFunctional, obj: Objective, opts: &SolveOptions) -> Vec<Candidate> {
    let sizes = sizes_for(dec, opts);
    let restarts = opts.restarts.max(1);
    let one = |j: usize| {
        let k = sizes[j % sizes.len()];
        let mut rng = restart_rng(opts.seed, j);
        // the first pass over sizes starts from the eigen-decomposition
        let start: Vec<f64> = if j < sizes.len() {
            vec![0.0; n_angles(k, dec.rank())]
        } else {
            (0..n_angles(k, dec.rank())).map(|_| rng.random_range(0.0..2.0 * PI)).collect()
        };
        descend(dec, f, obj, k, start, opts, &mut rng)
    };
    if opts.parallel {
        (0..restarts).into_par_iter().map(one).collect()
    } else {
        (0..restarts).map(one).collect()
    }
}

/// Lowest value, ties to the lowest restart index.
fn best_index(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn estimate(rho: &DensityMatrix, f: &PureCoherenceFunctional, obj: Objective, opts: &SolveOptions) -> Result<SolveReport> {
    check_dim(rho)?;
    if rho.is_incoherent(tol::state()) {
        return Ok(incoherent_report(rho, f, obj));
    }
    let dec = Decomposer::new(rho);
    let pool = run_restarts(&dec, f, obj, opts);
    let i = best_index(pool.iter().map(|c| c.value));
    let best = &pool[i];
    let v = decomposition::givens_isometry(best.k, dec.rank(), &best.angles);
    let exact = dec.rank() == 1;
    Ok(report_from(
        dec.ensemble(&v, best.k),
        f,
        obj,
        pool.len(),
        best.converged,
        !exact,
    ))
}

/// Upper bound on `C_m(rho)`: the least `f(aggregate_vector(E))` found.
pub fn cm_estimate(rho: &DensityMatrix, f: &PureCoherenceFunctional, opts: &SolveOptions) -> Result<SolveReport> {
    estimate(rho, f, Objective::Monotone, opts)
}

/// Upper bound on the convex roof `C_f(rho)`.
pub fn cf_estimate(rho: &DensityMatrix, f: &PureCoherenceFunctional, opts: &SolveOptions) -> Result<SolveReport> {
    estimate(rho, f, Objective::Roof, opts)
}

/// Runs both searches, then scores every final decomposition from either
/// run under both objectives. Because `f(sum p mu) >= sum p f(mu)` holds per
/// decomposition, the returned monotone value is never below the roof value.
pub fn estimate_shared_pool(
    rho: &DensityMatrix,
    f: &PureCoherenceFunctional,
    opts: &SolveOptions,
) -> Result<(SolveReport, SolveReport)> {
    check_dim(rho)?;
    if rho.is_incoherent(tol::state()) {
        return Ok((
            incoherent_report(rho, f, Objective::Monotone),
            incoherent_report(rho, f, Objective::Roof),
        ));
    }
    let dec = Decomposer::new(rho);
    let mut pool = run_restarts(&dec, f, Objective::Monotone, opts);
    pool.extend(run_restarts(&dec, f, Objective::Roof, opts));
    let restarts_used = pool.len();
    let upper = dec.rank() != 1;

    let ensembles: Vec<Ensemble> = pool
        .iter()
        .map(|c| dec.ensemble(&decomposition::givens_isometry(c.k, dec.rank(), &c.angles), c.k))
        .collect();
    let pick = |obj: Objective| {
        let i = best_index(ensembles.iter().map(|e| value_of(e, &aggregate_vector(e), f, obj)));
        report_from(ensembles[i].clone(), f, obj, restarts_used, pool[i].converged, upper)
    };
    Ok((pick(Objective::Monotone), pick(Objective::Roof)))
}

/// Geometric monotone: closed form on qubits, otherwise the geometric roof,
/// which coincides with it decomposition by decomposition.
pub fn cm_geometric(rho: &DensityMatrix, opts: &SolveOptions) -> Result<SolveReport> {
    if rho.dim() == 2 {
        return qubit::qubit_report(rho, &PureCoherenceFunctional::Geometric);
    }
    cf_estimate(rho, &PureCoherenceFunctional::Geometric, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_density_rank};

    fn fast() -> SolveOptions {
        SolveOptions {
            restarts: 8,
            ..SolveOptions::default()
        }
    }

    fn example() -> DensityMatrix {
        DensityMatrix::from_real(2, &[0.75, 0.25, 0.25, 0.25]).unwrap()
    }

    // (1 - sqrt(0.75)) / 2, 30-digit mpmath reference
    const GEO_EXAMPLE: f64 = 0.0669872981077806766;

    #[test]
    fn incoherent_is_zero() {
        let rho = DensityMatrix::from_diagonal(&[0.2, 0.3, 0.5]).unwrap();
        for f in PureCoherenceFunctional::BUILTINS {
            let r = cm_estimate(&rho, &f, &fast()).unwrap();
            assert_eq!(r.value, 0.0);
            assert!(r.best_ensemble.mixture_error(&rho) < 1e-15);
            assert!(r.realizing_state.amplitudes()[0].re == 1.0);
            assert_eq!(cf_estimate(&rho, &f, &fast()).unwrap().value, 0.0);
        }
        assert_eq!(cm_geometric(&rho, &fast()).unwrap().value, 0.0);
    }

    #[test]
    fn qubit_example_matches_closed_form() {
        let rho = example();
        let cm = cm_estimate(&rho, &PureCoherenceFunctional::Geometric, &SolveOptions::default()).unwrap();
        assert!((cm.value - GEO_EXAMPLE).abs() < 1e-6, "{}", cm.value);
        assert!(cm.best_ensemble.mixture_error(&rho) < 1e-8);
        assert!(cm.upper_bound);
        let cf = cf_estimate(&rho, &PureCoherenceFunctional::Geometric, &SolveOptions::default()).unwrap();
        assert!((cf.value - GEO_EXAMPLE).abs() < 1e-6, "{}", cf.value);
        let g = cm_geometric(&rho, &fast()).unwrap();
        assert_eq!(g.method, "analytic");
        assert!((g.value - GEO_EXAMPLE).abs() < 1e-15);
    }

    #[test]
    fn pure_states_are_exact() {
        let phi = PureState::mcs_uniform(2).density();
        let r = cm_estimate(&phi, &PureCoherenceFunctional::RelativeEntropy, &fast()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(!r.upper_bound);
        let phi3 = PureState::mcs_uniform(3).density();
        let g = cm_geometric(&phi3, &fast()).unwrap();
        assert!((g.value - 2.0 / 3.0).abs() < 1e-12);
        let psi = PureState::from_real(&[0.6, 0.8, 0.0]).unwrap();
        let r = cf_estimate(&psi.density(), &PureCoherenceFunctional::L1, &fast()).unwrap();
        assert!((r.value - PureCoherenceFunctional::L1.eval(&[0.36, 0.64, 0.0])).abs() < 1e-12);
    }

    #[test]
    fn reports_are_consistent_and_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density(&mut rng, 3);
        let f = PureCoherenceFunctional::RelativeEntropy;
        let opts = SolveOptions { seed: 7, ..fast() };
        let a = cm_estimate(&rho, &f, &opts).unwrap();
        assert!(a.best_ensemble.mixture_error(&rho) < 1e-8);
        assert_eq!(a.value, f.eval_vector(&a.best_mu));
        assert_eq!(a.restarts_used, 8);
        let serial = cm_estimate(&rho, &f, &SolveOptions { parallel: false, ..opts.clone() }).unwrap();
        assert_eq!(a, serial);
        let b = cf_estimate(&rho, &f, &opts).unwrap();
        assert!(b.best_ensemble.mixture_error(&rho) < 1e-8);
    }

    #[test]
    fn shared_pool_orders_monotone_above_roof() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let rho = random_density(&mut rng, 3);
            for f in PureCoherenceFunctional::BUILTINS {
                let (cm, cf) = estimate_shared_pool(&rho, &f, &fast()).unwrap();
                assert!(cm.value >= cf.value - 1e-12, "{} {} {}", f.name(), cm.value, cf.value);
                assert_eq!(cm.restarts_used, 16);
            }
        }
    }

    #[test]
    fn optimizer_improves_on_the_eigen_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = random_density_rank(&mut rng, 3, 2);
        let f = PureCoherenceFunctional::L1;
        let dec = Decomposer::new(&rho);
        let eig = dec.ensemble(&decomposition::givens_isometry(2, 2, &[0.0, 0.0]), 2);
        let start = f.eval_vector(&aggregate_vector(&eig));
        let r = cm_estimate(&rho, &f, &fast()).unwrap();
        assert!(r.value <= start);
    }

    #[test]
    fn rejects_large_dimensions() {
        let rho = DensityMatrix::maximally_mixed(9);
        assert!(matches!(
            cm_estimate(&rho, &PureCoherenceFunctional::L1, &fast()),
            Err(Error::DimensionTooLarge { dim: 9, max: 8 })
        ));
    }
}
