//! Pure-state decompositions of a density matrix parametrized by isometries.
//!
//! With `rho = sum_a lambda_a |e_a><e_a|` (rank `r`), every `k`-member
//! decomposition is `|phi~_i> = sum_a V_ia sqrt(lambda_a) |e_a>` for some
//! `k x r` isometry `V`. Isometries are in turn generated as the first `r`
//! columns of a product of complex Givens rotations; row phases of `V` only
//! change global phases of the members, so the Givens product covers every
//! decomposition.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, ZERO};
use crate::majorization::{sort_desc_in_place, Ensemble};
use crate::measures::PureCoherenceFunctional;
use crate::state::{DensityMatrix, PureState};
use crate::tol;

/// Members lighter than this are dropped from reported ensembles.
const DROP_WEIGHT: f64 = 1e-15;

/// A `k x r` isometry `V` with `V^dagger V = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionParam {
    v: CMatrix,
}

impl DecompositionParam {
    pub fn new(v: CMatrix) -> Result<Self> {
        let (k, r) = v.shape();
        if r == 0 || k < r {
            return Err(Error::InvalidIsometry(f64::INFINITY));
        }
        let defect = linalg::max_abs_diff(&(v.adjoint() * &v), &CMatrix::identity(r, r));
        if defect > tol::TOL_STATE {
            return Err(Error::InvalidIsometry(defect));
        }
        Ok(Self { v })
    }

    pub fn identity(r: usize) -> Self {
        Self {
            v: CMatrix::identity(r, r),
        }
    }

    /// Isometry from Givens angles; see [`givens_isometry`].
    pub fn from_angles(k: usize, r: usize, angles: &[f64]) -> Self {
        let flat = givens_isometry(k, r, angles);
        Self {
            v: CMatrix::from_row_slice(k, r, &flat),
        }
    }

    pub fn rank(&self) -> usize {
        self.v.ncols()
    }

    pub fn size(&self) -> usize {
        self.v.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.v
    }
}

/// Index pairs `(p, q)` with `p < min(r, k)` and `q > p`, in product order.
///
/// Rotations with both indices at or beyond `r` only touch rows of the
/// embedded identity that are still zero, so they never change the
/// isometry and are left out.
pub fn givens_pairs(k: usize, r: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..r.min(k)).flat_map(move |p| ((p + 1)..k).map(move |q| (p, q)))
}

/// Number of angles parametrizing `k x r` isometries: two per pair.
pub fn n_angles(k: usize, r: usize) -> usize {
    2 * givens_pairs(k, r).count()
}

/// One complex Givens rotation `(theta, phi)` in precomputed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    cos: f64,
    sin: f64,
    phase: Complex64,
}

impl Rotation {
    pub fn new(theta: f64, phi: f64) -> Self {
        let (sin, cos) = theta.sin_cos();
        Self {
            cos,
            sin,
            phase: Complex64::from_polar(1.0, phi),
        }
    }
}

pub fn rotations(angles: &[f64]) -> Vec<Rotation> {
    angles.chunks_exact(2).map(|a| Rotation::new(a[0], a[1])).collect()
}

/// Row-major `k x r` matrix: the first `r` columns of the product of the
/// [`givens_pairs`] rotations, where `G_(p,q)` with angles `(theta, phi)`
/// acts on rows `p, q` as
/// `[[cos theta, -e^{i phi} sin theta], [e^{-i phi} sin theta, cos theta]]`.
pub fn givens_isometry(k: usize, r: usize, angles: &[f64]) -> Vec<Complex64> {
    let mut v = Vec::new();
    givens_into(k, r, angles, &mut v);
    v
}

/// [`givens_isometry`] into a reused buffer.
pub fn givens_into(k: usize, r: usize, angles: &[f64], v: &mut Vec<Complex64>) {
    isometry_into(k, r, &rotations(angles), v);
}

/// [`givens_isometry`] from precomputed rotations.
pub fn isometry_into(k: usize, r: usize, rots: &[Rotation], v: &mut Vec<Complex64>) {
    debug_assert_eq!(2 * rots.len(), n_angles(k, r));
    v.clear();
    v.resize(k * r, ZERO);
    for a in 0..r.min(k) {
        v[a * r + a] = c(1.0, 0.0);
    }
    // rightmost factor acts first
    let mut i = rots.len();
    for p in (0..r.min(k)).rev() {
        for q in ((p + 1)..k).rev() {
            i -= 1;
            let g = rots[i];
            for col in 0..r {
                let xp = v[p * r + col];
                let xq = v[q * r + col];
                v[p * r + col] = xp * g.cos - g.phase * xq * g.sin;
                v[q * r + col] = g.phase.conj() * xp * g.sin + xq * g.cos;
            }
        }
    }
}

/// Which objective a decomposition is scored with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// `f(sum_i p_i mu_desc(phi_i))`: the pure-state-conversion monotone.
    Monotone,
    /// `sum_i p_i f(mu(phi_i))`: the convex roof.
    Roof,
}

/// Spectral data of `rho` in the form the decomposition map needs.
#[derive(Debug, Clone)]
pub struct Decomposer {
    d: usize,
    r: usize,
    /// Row-major `d x r`: column `a` is `sqrt(lambda_a) e_a`.
    w: Vec<Complex64>,
}

impl Decomposer {
    pub fn new(rho: &DensityMatrix) -> Self {
        let (vals, vecs) = rho.eigen();
        let kept: Vec<usize> = (0..vals.len()).filter(|&a| vals[a] > tol::RANK_CUTOFF).collect();
        let d = rho.dim();
        let r = kept.len().max(1);
        let mut w = vec![ZERO; d * r];
        for (col, &a) in kept.iter().enumerate() {
            let s = vals[a].sqrt();
            for m in 0..d {
                w[m * r + col] = vecs[(m, a)] * s;
            }
        }
        Self { d, r, w }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    /// Unnormalized member `i` of the decomposition defined by row-major `v` (`k x r`).
    #[inline]
    fn member(&self, v: &[Complex64], i: usize, out: &mut [Complex64]) {
        let r = self.r;
        let row = &v[i * r..(i + 1) * r];
        for (m, o) in out.iter_mut().enumerate() {
            let wm = &self.w[m * r..(m + 1) * r];
            *o = row.iter().zip(wm).map(|(a, b)| a * b).sum();
        }
    }

    /// Scores the decomposition given by a row-major `k x r` isometry.
    pub fn score(&self, v: &[Complex64], k: usize, f: &PureCoherenceFunctional, obj: Objective, scratch: &mut Scratch) -> f64 {
        let d = self.d;
        scratch.ensure(d);
        let Scratch { amps, probs, acc } = scratch;
        acc[..d].iter_mut().for_each(|x| *x = 0.0);
        let mut roof = 0.0;
        for i in 0..k {
            self.member(v, i, &mut amps[..d]);
            let mut p = 0.0;
            for (q, a) in probs[..d].iter_mut().zip(&amps[..d]) {
                *q = a.norm_sqr();
                p += *q;
            }
            if p <= 0.0 {
                continue;
            }
            match obj {
                Objective::Monotone => {
                    sort_desc_in_place(&mut probs[..d]);
                    for (x, q) in acc[..d].iter_mut().zip(&probs[..d]) {
                        *x += q;
                    }
                }
                Objective::Roof => {
                    probs[..d].iter_mut().for_each(|q| *q /= p);
                    roof += p * f.eval(&probs[..d]);
                }
            }
        }
        match obj {
            Objective::Monotone => f.eval(&acc[..d]),
            Objective::Roof => roof,
        }
    }

    /// Normalized ensemble for a row-major `k x r` isometry.
    pub fn ensemble(&self, v: &[Complex64], k: usize) -> Ensemble {
        let mut buf = vec![ZERO; self.d];
        let mut entries = Vec::with_capacity(k);
        for i in 0..k {
            self.member(v, i, &mut buf);
            let p: f64 = buf.iter().map(|a| a.norm_sqr()).sum();
            if p > DROP_WEIGHT {
                let s = p.sqrt();
                let psi = PureState::from_trusted(CVector::from_iterator(self.d, buf.iter().map(|a| a / s)));
                entries.push((p, psi));
            }
        }
        Ensemble::from_trusted(entries)
    }
}

/// Reusable buffers for [`Decomposer::score`].
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    amps: Vec<Complex64>,
    probs: Vec<f64>,
    acc: Vec<f64>,
}

impl Scratch {
    fn ensure(&mut self, d: usize) {
        if self.amps.len() < d {
            self.amps.resize(d, ZERO);
            self.probs.resize(d, 0.0);
            self.acc.resize(d, 0.0);
        }
    }
}

/// The ensemble `{|phi~_i>}` induced by `param` on `rho`, zero-weight members dropped.
pub fn decomposition_from_isometry(rho: &DensityMatrix, param: &DecompositionParam) -> Result<Ensemble> {
    let dec = Decomposer::new(rho);
    if param.rank() != dec.rank() {
        return Err(Error::RankMismatch {
            state: dec.rank(),
            param: param.rank(),
        });
    }
    let flat: Vec<Complex64> = (0..param.size())
        .flat_map(|i| (0..param.rank()).map(move |a| (i, a)))
        .map(|(i, a)| param.matrix()[(i, a)])
        .collect();
    Ok(dec.ensemble(&flat, param.size()))
}
