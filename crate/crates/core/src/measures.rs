//! Pure-state coherence functionals `f(mu)`.
//!
//! A functional must be symmetric under permutations of `mu`, concave, vanish
//! on basis vectors and peak only at the uniform vector. The three built-ins
//! satisfy this analytically; custom ones can be checked with
//! [`probe_functional`], which samples and therefore only ever finds
//! counterexamples, never proofs.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Error;
use crate::majorization::CoherenceVector;

pub type CustomEval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Geometric,
    RelativeEntropy,
    L1,
    Custom,
}

#[derive(Clone)]
pub enum PureCoherenceFunctional {
    Geometric,
    RelativeEntropy,
    L1,
    Custom { name: String, eval: CustomEval },
}

impl PureCoherenceFunctional {
    pub const BUILTINS: [PureCoherenceFunctional; 3] = [Self::Geometric, Self::RelativeEntropy, Self::L1];

    pub fn custom(name: impl Into<String>, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn kind(&self) -> MeasureKind {
        match self {
            Self::Geometric => MeasureKind::Geometric,
            Self::RelativeEntropy => MeasureKind::RelativeEntropy,
            Self::L1 => MeasureKind::L1,
            Self::Custom { .. } => MeasureKind::Custom,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Geometric => "geometric",
            Self::RelativeEntropy => "relent",
            Self::L1 => "l1",
            Self::Custom { name, .. } => name,
        }
    }

    /// Evaluates on a raw probability slice (any order).
    #[inline]
    pub fn eval(&self, mu: &[f64]) -> f64 {
        match self {
            Self::Geometric => eval_geometric(mu),
            Self::RelativeEntropy => eval_relative_entropy(mu),
            Self::L1 => eval_l1(mu),
            Self::Custom { eval, .. } => eval(mu),
        }
    }

    pub fn eval_vector(&self, mu: &CoherenceVector) -> f64 {
        self.eval(mu.probs())
    }
}

impl fmt::Debug for PureCoherenceFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PureCoherenceFunctional({})", self.name())
    }
}

impl FromStr for PureCoherenceFunctional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "geometric" | "geo" => Ok(Self::Geometric),
            "relent" | "relative_entropy" | "entropy" => Ok(Self::RelativeEntropy),
            "l1" => Ok(Self::L1),
            other => Err(Error::Parse(format!("unknown measure '{other}' (expected geometric|relent|l1)"))),
        }
    }
}

/// `1 - max_i mu_i`.
pub fn eval_geometric(mu: &[f64]) -> f64 {
    (1.0 - mu.iter().copied().fold(0.0, f64::max)).max(0.0)
}

/// Shannon entropy in bits, `0 log 0 = 0`.
pub fn eval_relative_entropy(mu: &[f64]) -> f64 {
    let h: f64 = mu
        .iter()
        .map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 })
        .sum();
    h.max(0.0)
}

/// `(sum_i sqrt(mu_i))^2 - 1`.
pub fn eval_l1(mu: &[f64]) -> f64 {
    let s: f64 = mu.iter().map(|&p| p.max(0.0).sqrt()).sum();
    (s * s - 1.0).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub measure: String,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub symmetry_violations: usize,
    pub concavity_violations: usize,
    pub endpoint_violations: usize,
    pub worst_violation: f64,
}

impl ProbeReport {
    pub fn total_violations(&self) -> usize {
        self.symmetry_violations + self.concavity_violations + self.endpoint_violations
    }
}

/// Slack for the probe; well above the rounding of a length-16 sum.
const PROBE_SLACK: f64 = 1e-12;

/// Draws a point uniformly from the probability simplex.
pub(crate) fn random_simplex<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Samples `trials` random vector pairs and permutations, counting violations
/// of symmetry, concavity and the endpoint conditions (zero on basis
/// vectors, strict maximum at the uniform vector).
pub fn probe_functional(f: &PureCoherenceFunctional, dim: usize, trials: usize, seed: u64) -> ProbeReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ProbeReport {
        measure: f.name().to_string(),
        dim,
        trials,
        seed,
        symmetry_violations: 0,
        concavity_violations: 0,
        endpoint_violations: 0,
        worst_violation: 0.0,
    };
    let uniform = vec![1.0 / dim as f64; dim];
    let f_uniform = f.eval(&uniform);
    let mut perm: Vec<usize> = (0..dim).collect();

    for _ in 0..trials {
        let mu = random_simplex(&mut rng, dim);
        let nu = random_simplex(&mut rng, dim);
        let f_mu = f.eval(&mu);
        let f_nu = f.eval(&nu);

        perm.shuffle(&mut rng);
        let permuted: Vec<f64> = perm.iter().map(|&i| mu[i]).collect();
        let sym = (f.eval(&permuted) - f_mu).abs();
        if sym > PROBE_SLACK {
            report.symmetry_violations += 1;
            report.worst_violation = report.worst_violation.max(sym);
        }

        let lambda: f64 = rng.random();
        let mix: Vec<f64> = mu.iter().zip(&nu).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let gap = lambda * f_mu + (1.0 - lambda) * f_nu - f.eval(&mix);
        if gap > PROBE_SLACK {
            report.concavity_violations += 1;
            report.worst_violation = report.worst_violation.max(gap);
        }

        let mut e = vec![0.0; dim];
        e[rng.random_range(0..dim)] = 1.0;
        let at_basis = f.eval(&e).abs();
        if at_basis > PROBE_SLACK {
            report.endpoint_violations += 1;
            report.worst_violation = report.worst_violation.max(at_basis);
        }
        if dim > 1 {
            let excess = f_mu - f_uniform;
            if excess >= 0.0 {
                report.endpoint_violations += 1;
                report.worst_violation = report.worst_violation.max(excess);
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_examples() {
        assert_eq!(eval_geometric(&[0.5, 0.5]), 0.5);
        assert_eq!(eval_geometric(&[1.0, 0.0]), 0.0);
        assert!((eval_geometric(&[0.9, 0.1]) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(eval_relative_entropy(&[0.5, 0.5]), 1.0);
        assert_eq!(eval_relative_entropy(&[1.0, 0.0]), 0.0);
        // binary entropy of 0.9, 30-digit mpmath reference
        assert!((eval_relative_entropy(&[0.9, 0.1]) - 0.468995593589281221).abs() < 1e-14);
    }

    #[test]
    fn l1_examples() {
        assert!((eval_l1(&[0.5, 0.5]) - 1.0).abs() < 1e-15);
        assert_eq!(eval_l1(&[1.0, 0.0]), 0.0);
        assert!((eval_l1(&[0.9, 0.1]) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn parses_cli_names() {
        assert_eq!("geometric".parse::<PureCoherenceFunctional>().unwrap().kind(), MeasureKind::Geometric);
        assert_eq!("relent".parse::<PureCoherenceFunctional>().unwrap().kind(), MeasureKind::RelativeEntropy);
        assert_eq!("l1".parse::<PureCoherenceFunctional>().unwrap().kind(), MeasureKind::L1);
        assert!("tsallis".parse::<PureCoherenceFunctional>().is_err());
    }

    #[test]
    fn builtins_pass_the_probe() {
        let r = probe_functional(&PureCoherenceFunctional::Geometric, 3, 1000, 7);
        assert_eq!(r.total_violations(), 0, "{r:?}");
        let r = probe_functional(&PureCoherenceFunctional::RelativeEntropy, 4, 1000, 7);
        assert_eq!(r.total_violations(), 0, "{r:?}");
        for f in PureCoherenceFunctional::BUILTINS {
            for d in 2..=5 {
                let r = probe_functional(&f, d, 500, 11);
                assert_eq!(r.total_violations(), 0, "{r:?}");
            }
        }
    }

    #[test]
    fn asymmetric_custom_functional_is_caught() {
        let first = PureCoherenceFunctional::custom("first", |mu| mu[0]);
        let r = probe_functional(&first, 2, 1000, 7);
        assert!(r.symmetry_violations > 0);
        assert_eq!(r.trials, 1000);
    }

    #[test]
    fn probe_is_reproducible() {
        let f = PureCoherenceFunctional::custom("convex", |mu| mu.iter().map(|p| p * p).sum());
        assert_eq!(probe_functional(&f, 3, 200, 3), probe_functional(&f, 3, 200, 3));
        assert!(probe_functional(&f, 3, 200, 3).concavity_violations > 0);
    }

    #[test]
    fn uniform_is_the_maximum_over_many_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for f in PureCoherenceFunctional::BUILTINS {
            for d in 2..=5 {
                let top = f.eval(&vec![1.0 / d as f64; d]);
                for _ in 0..2000 {
                    let mu = random_simplex(&mut rng, d);
                    let v = f.eval(&mu);
                    assert!(v >= 0.0 && v < top, "{} d={d} {mu:?}", f.name());
                }
            }
        }
    }

    #[test]
    fn qubit_reductions() {
        for i in 0..=100 {
            let b = 0.005 * i as f64;
            let z = (1.0 - 4.0 * b * b).max(0.0).sqrt();
            let mu = [(1.0 + z) / 2.0, (1.0 - z) / 2.0];
            assert!((eval_l1(&mu) - 2.0 * b).abs() < 1e-12, "b={b}");
            assert!((eval_geometric(&mu) - (1.0 - z) / 2.0).abs() < 1e-15);
        }
    }
}
