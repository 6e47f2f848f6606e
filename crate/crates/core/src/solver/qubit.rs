//! Closed forms on qubits.
//!
//! For `sigma = [[s00, b], [b*, s11]]` the optimal decomposition mixes two
//! pure states `sigma+`, `sigma-` with coherence vectors
//! `((1 +- z)/2, (1 -+ z)/2)`, `z = sqrt(1 - 4|b|^2)`, so
//! `C_m(sigma) = f((1 + z)/2, (1 - z)/2)` for every admissible `f`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, CVector};
use crate::majorization::Ensemble;
use crate::measures::PureCoherenceFunctional;
use crate::state::{DensityMatrix, PureState};

use super::{report_from, Objective, SolveReport};

#[derive(Debug, Clone, PartialEq)]
pub struct QubitDecomposition {
    pub lambda: f64,
    pub plus: PureState,
    pub minus: PureState,
    pub b: Complex64,
    pub z: f64,
}

impl QubitDecomposition {
    pub fn ensemble(&self) -> Ensemble {
        let entries = [(self.lambda, &self.plus), (1.0 - self.lambda, &self.minus)]
            .into_iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, s)| (w, s.clone()))
            .collect();
        Ensemble::from_trusted(entries)
    }
}

fn require_qubit(sigma: &DensityMatrix) -> Result<()> {
    if sigma.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: sigma.dim(),
        });
    }
    Ok(())
}

/// `z = sqrt(1 - 4|b|^2)`, clamped at the pure-state boundary.
pub fn z_of(b_abs: f64) -> f64 {
    (1.0 - 4.0 * b_abs * b_abs).max(0.0).sqrt()
}

/// Sorted coherence vector `((1 + z)/2, (1 - z)/2)` of the optimal members.
pub fn qubit_mu(b_abs: f64) -> [f64; 2] {
    let z = z_of(b_abs);
    [(1.0 + z) / 2.0, (1.0 - z) / 2.0]
}

/// `sigma = lambda |sigma+><sigma+| + (1 - lambda) |sigma-><sigma-|`, with the
/// members' off-diagonal equal to `b` itself.
pub fn qubit_optimal_decomposition(sigma: &DensityMatrix) -> Result<QubitDecomposition> {
    require_qubit(sigma)?;
    let b = sigma.entry(0, 1);
    let z = z_of(b.norm());
    let lambda = if z > 0.0 {
        (2.0 * sigma.entry(0, 0).re - 1.0 + z) / (2.0 * z)
    } else {
        0.5
    };
    // slack covers states accepted at the PSD tolerance near the boundary
    assert!(
        (-1e-6..=1.0 + 1e-6).contains(&lambda) || z < 1e-4,
        "qubit weight {lambda} outside [0, 1] for a validated state"
    );
    let lambda = lambda.clamp(0.0, 1.0);
    let phase = Complex64::from_polar(1.0, -b.arg());
    let member = |hi: f64, lo: f64| PureState::from_trusted(CVector::from_vec(vec![c(hi.sqrt(), 0.0), phase * lo.sqrt()]));
    let (p, m) = ((1.0 + z) / 2.0, (1.0 - z) / 2.0);
    Ok(QubitDecomposition {
        lambda,
        plus: member(p, m),
        minus: member(m, p),
        b,
        z,
    })
}

/// Exact `C_m` of a qubit.
pub fn qubit_cm(sigma: &DensityMatrix, f: &PureCoherenceFunctional) -> Result<f64> {
    require_qubit(sigma)?;
    Ok(f.eval(&qubit_mu(sigma.entry(0, 1).norm())))
}

/// [`qubit_cm`] as a report, with the optimal decomposition as its ensemble.
pub fn qubit_report(sigma: &DensityMatrix, f: &PureCoherenceFunctional) -> Result<SolveReport> {
    let dec = qubit_optimal_decomposition(sigma)?;
    let mut r = report_from(dec.ensemble(), f, Objective::Monotone, 0, true, false);
    r.value = qubit_cm(sigma, f)?;
    r.method = "analytic".to_string();
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityProbe {
    pub measure: String,
    pub points: usize,
    pub convex: bool,
    pub nondecreasing: bool,
    /// Most negative second difference seen (0 when convex).
    pub worst_second_difference: f64,
}

/// Second-difference check of `g(|b|) = f(qubit_mu(|b|))` on an even grid
/// over `[0, 1/2]`. Convexity of `g` makes the qubit monotone a convex
/// measure.
pub fn qubit_convexity_probe(f: &PureCoherenceFunctional, points: usize) -> ConvexityProbe {
    const SLACK: f64 = 1e-12;
    let n = points.max(3);
    let g: Vec<f64> = (0..n).map(|i| f.eval(&qubit_mu(0.5 * i as f64 / (n - 1) as f64))).collect();
    let worst = g
        .windows(3)
        .map(|w| w[0] - 2.0 * w[1] + w[2])
        .fold(0.0f64, f64::min);
    ConvexityProbe {
        measure: f.name().to_string(),
        points: n,
        convex: worst >= -SLACK,
        nondecreasing: g.windows(2).all(|w| w[1] >= w[0] - SLACK),
        worst_second_difference: worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::random::random_qubit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example() -> DensityMatrix {
        DensityMatrix::from_real(2, &[0.75, 0.25, 0.25, 0.25]).unwrap()
    }

    // 30-digit mpmath references
    const Z_EXAMPLE: f64 = 0.866025403784438647;
    const LAMBDA_EXAMPLE: f64 = 0.788675134594812882;
    const GEO_EXAMPLE: f64 = 0.0669872981077806766;
    const RELENT_EXAMPLE: f64 = 0.354578902665269884;

    #[test]
    fn worked_example() {
        let d = qubit_optimal_decomposition(&example()).unwrap();
        assert!((d.z - Z_EXAMPLE).abs() < 1e-15);
        assert!((d.lambda - LAMBDA_EXAMPLE).abs() < 1e-15);
        assert!(d.ensemble().mixture_error(&example()) < 1e-15);
        assert!((qubit_cm(&example(), &PureCoherenceFunctional::Geometric).unwrap() - GEO_EXAMPLE).abs() < 1e-15);
        assert!((qubit_cm(&example(), &PureCoherenceFunctional::L1).unwrap() - 0.5).abs() < 1e-15);
        assert!((qubit_cm(&example(), &PureCoherenceFunctional::RelativeEntropy).unwrap() - RELENT_EXAMPLE).abs() < 1e-14);
    }

    #[test]
    fn incoherent_and_maximally_coherent_ends() {
        let d = qubit_optimal_decomposition(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert_eq!((d.z, d.lambda), (1.0, 0.5));
        assert_eq!(d.plus, PureState::basis(2, 0));
        assert_eq!(d.minus, PureState::basis(2, 1));

        let phi = PureState::mcs_uniform(2).density();
        let d = qubit_optimal_decomposition(&phi).unwrap();
        // z is only known to rounding here, and lambda inherits its conditioning
        assert!(d.z < 1e-7);
        assert!((d.lambda - 0.5).abs() < 1e-7);
        assert!(max_abs_diff(d.plus.density().matrix(), phi.matrix()) < 1e-7);
        assert!(max_abs_diff(d.minus.density().matrix(), phi.matrix()) < 1e-7);
    }

    #[test]
    fn rejects_other_dimensions() {
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(qubit_optimal_decomposition(&rho).is_err());
        assert!(qubit_cm(&rho, &PureCoherenceFunctional::L1).is_err());
    }

    #[test]
    fn mixture_holds_entrywise_for_complex_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let s = random_qubit(&mut rng);
            let d = qubit_optimal_decomposition(&s).unwrap();
            assert!((0.0..=1.0).contains(&d.lambda));
            assert!(d.ensemble().mixture_error(&s) < 1e-10);
            let off = d.plus.amplitudes()[0] * d.plus.amplitudes()[1].conj();
            assert!((off - d.b).norm() < 1e-12);
        }
    }

    #[test]
    fn analytic_report() {
        let r = qubit_report(&example(), &PureCoherenceFunctional::Geometric).unwrap();
        assert_eq!(r.method, "analytic");
        assert!(!r.upper_bound);
        assert!((r.value - GEO_EXAMPLE).abs() < 1e-15);
        assert!((r.value - PureCoherenceFunctional::Geometric.eval_vector(&r.best_mu)).abs() < 1e-15);
    }

    #[test]
    fn builtins_are_convex_in_b() {
        for f in PureCoherenceFunctional::BUILTINS {
            let p = qubit_convexity_probe(&f, 1001);
            assert!(p.convex && p.nondecreasing, "{p:?}");
        }
        let concave = PureCoherenceFunctional::custom("sqrt_l1", |mu| crate::measures::eval_l1(mu).sqrt());
        assert!(!qubit_convexity_probe(&concave, 101).convex);
    }
}
