//! Coherence vectors, the majorization preorder and pure-to-ensemble convertibility.
//!
//! A pure state `|psi>` can be turned into the ensemble `{p_i, |phi_i>}` by an
//! incoherent operation iff the sorted coherence vector of `|psi>` is
//! majorized by `sum_i p_i mu_desc(phi_i)`. Everything here works on that
//! aggregated, sorted vector.

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector};
use crate::state::{DensityMatrix, PureState};
use crate::tol;

/// Tolerance on `sum probs = 1` for a user-supplied coherence vector.
pub const SUM_TOL: f64 = 1e-9;

/// Squared amplitude moduli in the incoherent basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceVector {
    probs: Vec<f64>,
    sorted: bool,
}

impl CoherenceVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(i) = probs.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if let Some(p) = probs.iter().find(|&&p| !(-SUM_TOL..=1.0 + SUM_TOL).contains(&p)) {
            return Err(Error::NotProbabilityVector(format!("entry {p} outside [0, 1]")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::NotProbabilityVector(format!("entries sum to {total}")));
        }
        Ok(Self::from_parts(probs, false))
    }

    pub(crate) fn from_parts(probs: Vec<f64>, sorted: bool) -> Self {
        Self { probs, sorted }
    }

    /// `mu(psi)_i = |<i|psi>|^2`.
    pub fn of(psi: &PureState) -> Self {
        Self::from_parts(psi.amplitudes().iter().map(|a| a.norm_sqr()).collect(), false)
    }

    pub fn uniform(d: usize) -> Self {
        Self::from_parts(vec![1.0 / d as f64; d], true)
    }

    pub fn basis(d: usize) -> Self {
        let mut probs = vec![0.0; d];
        probs[0] = 1.0;
        Self::from_parts(probs, true)
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    /// Non-increasing rearrangement; ties keep their original order.
    pub fn sort_desc(&self) -> Self {
        let mut probs = self.probs.clone();
        sort_desc_in_place(&mut probs);
        Self::from_parts(probs, true)
    }

    /// `self` majorizes `other` (other is majorized by self) at [`tol::TOL_MAJOR`].
    pub fn majorizes(&self, other: &CoherenceVector) -> bool {
        majorizes_slices(&self.probs, &other.probs, tol::TOL_MAJOR)
    }

    /// Zero-pads to dimension `d` (no-op if already that long or longer).
    pub fn padded(&self, d: usize) -> Self {
        let mut probs = self.probs.clone();
        if probs.len() < d {
            probs.resize(d, 0.0);
        }
        Self::from_parts(probs, self.sorted)
    }
}

#[inline]
pub(crate) fn sort_desc_in_place(v: &mut [f64]) {
    // slice::sort_by is stable
    v.sort_by(|a, b| b.total_cmp(a));
}

/// `q` majorizes `p`: after zero-padding and sorting, every prefix sum of `q`
/// is at least the matching prefix sum of `p`, and the totals agree, all
/// within `tol`.
pub fn majorizes_slices(q: &[f64], p: &[f64], tol: f64) -> bool {
    let n = q.len().max(p.len());
    let mut qs = q.to_vec();
    let mut ps = p.to_vec();
    qs.resize(n, 0.0);
    ps.resize(n, 0.0);
    sort_desc_in_place(&mut qs);
    sort_desc_in_place(&mut ps);
    let (mut sq, mut sp) = (0.0, 0.0);
    for (a, b) in qs.iter().zip(&ps) {
        sq += a;
        sp += b;
        if sq < sp - tol {
            return false;
        }
    }
    (sq - sp).abs() <= tol
}

/// A finite pure-state ensemble `{w_i, |phi_i>}` with weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    entries: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new(entries: Vec<(f64, PureState)>) -> Result<Self> {
        let Some(first) = entries.first() else {
            return Err(Error::Empty);
        };
        let d = first.1.dim();
        for (w, s) in &entries {
            if s.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: s.dim(),
                });
            }
            if !(w.is_finite() && *w > 0.0 && *w <= 1.0 + SUM_TOL) {
                return Err(Error::NotProbabilityVector(format!("weight {w} outside (0, 1]")));
            }
        }
        let total: f64 = entries.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::NotProbabilityVector(format!("weights sum to {total}")));
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_trusted(entries: Vec<(f64, PureState)>) -> Self {
        Self { entries }
    }

    pub fn single(psi: PureState) -> Self {
        Self {
            entries: vec![(1.0, psi)],
        }
    }

    pub fn entries(&self) -> &[(f64, PureState)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].1.dim()
    }

    /// `sum_i w_i |phi_i><phi_i|`.
    pub fn mixture(&self) -> DensityMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (w, s) in &self.entries {
            let v: &CVector = s.amplitudes();
            m += (v * v.adjoint()).scale(*w);
        }
        DensityMatrix::from_trusted(m)
    }

    /// Largest entrywise deviation of the mixture from `target`.
    pub fn mixture_error(&self, target: &DensityMatrix) -> f64 {
        self.mixture().max_distance(target)
    }

    /// Checks the ensemble decomposes `target` within `tol`.
    pub fn bind(&self, target: &DensityMatrix, tol: f64) -> Result<()> {
        if target.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: target.dim(),
                got: self.dim(),
            });
        }
        let err = self.mixture_error(target);
        if err > tol {
            return Err(Error::Unsupported(format!(
                "ensemble does not mix to the target state (max deviation {err:.3e})"
            )));
        }
        Ok(())
    }
}

/// `sum_i w_i sort_desc(mu(phi_i))`; non-increasing by construction.
pub fn aggregate_vector(e: &Ensemble) -> CoherenceVector {
    let mut acc = vec![0.0; e.dim()];
    let mut buf = vec![0.0; e.dim()];
    for (w, s) in e.entries() {
        for (b, a) in buf.iter_mut().zip(s.amplitudes().iter()) {
            *b = a.norm_sqr();
        }
        sort_desc_in_place(&mut buf);
        for (x, b) in acc.iter_mut().zip(&buf) {
            *x += w * b;
        }
    }
    CoherenceVector::from_parts(acc, true)
}

/// The real, non-negative, sorted pure state whose coherence vector is `sort_desc(mu)`.
pub fn pure_from_vector(mu: &CoherenceVector) -> PureState {
    let sorted = mu.sort_desc();
    let amps = sorted.probs().iter().map(|&p| c(p.max(0.0).sqrt(), 0.0));
    PureState::from_trusted(CVector::from_iterator(sorted.dim(), amps))
}

/// Whether some incoherent operation converts `psi` into the ensemble `e`.
pub fn convertible_pure_to_ensemble(psi: &PureState, e: &Ensemble) -> Result<bool> {
    if psi.dim() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            got: psi.dim(),
        });
    }
    Ok(aggregate_vector(e).majorizes(&CoherenceVector::of(psi).sort_desc()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cv(p: &[f64]) -> CoherenceVector {
        CoherenceVector::new(p.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn coherence_vector_examples() {
        let h = 0.5f64.sqrt();
        assert!(close(CoherenceVector::of(&PureState::from_real(&[h, h]).unwrap()).probs(), &[0.5, 0.5], 1e-15));
        let psi = PureState::from_real(&[0.9f64.sqrt(), 0.1f64.sqrt()]).unwrap();
        assert!(close(CoherenceVector::of(&psi).probs(), &[0.9, 0.1], 1e-15));
        let psi = PureState::from_slice(&[
            num_complex::Complex64::from_polar(0.75f64.sqrt(), 1.3),
            c(0.5, 0.0),
        ])
        .unwrap();
        let mu = CoherenceVector::of(&psi);
        assert!(close(mu.probs(), &[0.75, 0.25], 1e-15));
        assert!(!mu.is_sorted());
    }

    #[test]
    fn sort_examples() {
        assert_eq!(cv(&[0.1, 0.9]).sort_desc().probs(), &[0.9, 0.1]);
        assert_eq!(cv(&[0.2, 0.3, 0.5]).sort_desc().probs(), &[0.5, 0.3, 0.2]);
        let s = cv(&[0.5, 0.5]).sort_desc();
        assert_eq!(s.probs(), &[0.5, 0.5]);
        assert!(s.is_sorted());
    }

    #[test]
    fn majorization_examples() {
        assert!(cv(&[0.9, 0.1]).majorizes(&cv(&[0.5, 0.5])));
        assert!(cv(&[0.6, 0.3, 0.1]).majorizes(&cv(&[0.5, 0.3, 0.2])));
        assert!(!cv(&[0.5, 0.5]).majorizes(&cv(&[0.9, 0.1])));
        // zero padding
        assert!(cv(&[0.9, 0.1]).majorizes(&cv(&[0.9, 0.1, 0.0])));
        assert!(cv(&[0.9, 0.1, 0.0]).majorizes(&cv(&[0.9, 0.1])));
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(CoherenceVector::new(vec![0.5, 0.6]).is_err());
        assert!(CoherenceVector::new(vec![1.5, -0.5]).is_err());
        assert!(CoherenceVector::new(vec![]).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let plus = PureState::mcs_uniform(2);
        let zero = PureState::basis(2, 0);
        let one = PureState::basis(2, 1);
        let e = Ensemble::new(vec![(0.5, plus.clone()), (0.5, zero.clone())]).unwrap();
        assert!(close(aggregate_vector(&e).probs(), &[0.75, 0.25], 1e-15));
        let psi = PureState::from_real(&[0.1f64.sqrt(), 0.9f64.sqrt()]).unwrap();
        let single = aggregate_vector(&Ensemble::single(psi.clone()));
        assert!(close(single.probs(), CoherenceVector::of(&psi).sort_desc().probs(), 0.0));
        let e = Ensemble::new(vec![(0.5, zero), (0.5, one)]).unwrap();
        assert_eq!(aggregate_vector(&e).probs(), &[1.0, 0.0]);
    }

    #[test]
    fn pure_from_vector_examples() {
        let p = pure_from_vector(&cv(&[0.75, 0.25]));
        assert!((p.amplitudes()[0].re - 0.8660254037844386).abs() < 1e-15);
        assert!((p.amplitudes()[1].re - 0.5).abs() < 1e-15);
        assert_eq!(pure_from_vector(&cv(&[1.0, 0.0])).amplitudes()[0].re, 1.0);
        let h = pure_from_vector(&cv(&[0.5, 0.5]));
        assert!((h.amplitudes()[1].re - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn convertibility_examples() {
        let mcs = PureState::mcs_uniform(2);
        let zero = PureState::basis(2, 0);
        assert!(convertible_pure_to_ensemble(&mcs, &Ensemble::single(zero.clone())).unwrap());
        let psi = PureState::from_real(&[0.9f64.sqrt(), 0.1f64.sqrt()]).unwrap();
        assert!(!convertible_pure_to_ensemble(&psi, &Ensemble::single(mcs.clone())).unwrap());
        let psi = pure_from_vector(&cv(&[0.75, 0.25]));
        let e = Ensemble::new(vec![(0.5, mcs), (0.5, zero)]).unwrap();
        assert!(convertible_pure_to_ensemble(&psi, &e).unwrap());
        assert!(matches!(
            convertible_pure_to_ensemble(&PureState::basis(3, 0), &e),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ensemble_validation() {
        let z = PureState::basis(2, 0);
        assert!(Ensemble::new(vec![(0.5, z.clone())]).is_err());
        assert!(Ensemble::new(vec![(0.5, z.clone()), (0.5, PureState::basis(3, 0))]).is_err());
        assert!(Ensemble::new(vec![(1.0, z.clone()), (0.0, z.clone())]).is_err());
        let e = Ensemble::new(vec![(0.5, z), (0.5, PureState::basis(2, 1))]).unwrap();
        assert!(e.bind(&DensityMatrix::maximally_mixed(2), 1e-12).is_ok());
        assert!(e.bind(&PureState::mcs_uniform(2).density(), 1e-8).is_err());
    }

    fn arb_prob(d: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..1.0, d)
            .prop_filter("nonzero", |v| v.iter().sum::<f64>() > 1e-6)
            .prop_map(|v| {
                let s: f64 = v.iter().sum();
                v.into_iter().map(|x| x / s).collect()
            })
    }

    proptest! {
        #[test]
        fn majorization_is_a_preorder_with_extremes(a in arb_prob(4), b in arb_prob(4), cc in arb_prob(4)) {
            prop_assert!(majorizes_slices(&a, &a, 1e-9));
            if majorizes_slices(&a, &b, 1e-12) && majorizes_slices(&b, &cc, 1e-12) {
                prop_assert!(majorizes_slices(&a, &cc, 1e-9));
            }
            prop_assert!(majorizes_slices(&a, &[0.25; 4], 1e-9));
            prop_assert!(majorizes_slices(&[1.0, 0.0, 0.0, 0.0], &a, 1e-9));
        }

        #[test]
        fn aggregate_is_sorted_and_realizable(
            raw in proptest::collection::vec(proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3), 1..5),
            weights in proptest::collection::vec(0.05f64..1.0, 5),
        ) {
            let states: Vec<PureState> = raw.iter()
                .filter_map(|v| PureState::normalized(CVector::from_iterator(3, v.iter().map(|&(a, b)| c(a, b)))).ok())
                .collect();
            prop_assume!(!states.is_empty());
            let total: f64 = weights[..states.len()].iter().sum();
            let e = Ensemble::new(states.into_iter().zip(&weights).map(|(s, w)| (w / total, s)).collect()).unwrap();
            let agg = aggregate_vector(&e);
            prop_assert!(agg.probs().windows(2).all(|w| w[0] >= w[1]));
            // the sorted pure state built from the aggregate reproduces it exactly
            let back = CoherenceVector::of(&pure_from_vector(&agg)).sort_desc();
            prop_assert!(close(back.probs(), agg.probs(), 1e-12));
            prop_assert!(agg.majorizes(&back) && back.majorizes(&agg));
            // that state is convertible into the ensemble
            prop_assert!(convertible_pure_to_ensemble(&pure_from_vector(&agg), &e).unwrap());
        }
    }
}
