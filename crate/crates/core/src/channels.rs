//! Kraus-operator channels, structural class tests and the constructive
//! channels used by the monotonicity arguments.
//!
//! Class membership is decided numerically with `tol` acting as a hard
//! structural-zero threshold:
//!
//! - CPTP: `sum_n K_n^dagger K_n = I`.
//! - IO: every Kraus operator has at most one nonzero entry per column.
//! - SIO: IO, and at most one nonzero per row as well.
//! - MIO: `eps(|i><i|)` is diagonal for every basis index (enough by linearity).
//! - DIO: `Delta(eps(E_mn)) = eps(Delta(E_mn))` on every matrix unit.
//!
//! SIO channels on a square space additionally carry a normal form: each
//! Kraus operator as a permutation plus one complex amplitude per column.
//! The composite channels `T` and `N` are built from that form.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, ZERO};
use crate::random::{gaussian_complex, random_unitary};
use crate::state::{DensityMatrix, PureState};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ChannelClass {
    #[serde(rename = "CPTP")]
    Cptp,
    #[serde(rename = "DIO")]
    Dio,
    #[serde(rename = "IO")]
    Io,
    #[serde(rename = "MIO")]
    Mio,
    #[serde(rename = "SIO")]
    Sio,
}

impl ChannelClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cptp => "CPTP",
            Self::Dio => "DIO",
            Self::Io => "IO",
            Self::Mio => "MIO",
            Self::Sio => "SIO",
        }
    }
}

impl fmt::Display for ChannelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `K = sum_gamma amps[gamma] |perm[gamma]><gamma|` with `perm` a permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct SioKraus {
    pub perm: Vec<usize>,
    pub amps: Vec<Complex64>,
}

impl SioKraus {
    pub fn diagonal(amps: Vec<Complex64>) -> Self {
        Self {
            perm: (0..amps.len()).collect(),
            amps,
        }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn to_matrix(&self) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (g, (&row, &a)) in self.perm.iter().zip(&self.amps).enumerate() {
            m[(row, g)] = a;
        }
        m
    }

    fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.dim()];
        self.amps.len() == self.dim()
            && self.perm.iter().all(|&p| p < seen.len() && !std::mem::replace(&mut seen[p], true))
    }

    /// Reads the normal form off a matrix with at most one entry above `tol`
    /// per row and column; empty columns are routed to unused rows in order.
    fn from_matrix(m: &CMatrix, tol: f64) -> Option<Self> {
        let d = m.nrows();
        if m.ncols() != d {
            return None;
        }
        let mut perm = vec![usize::MAX; d];
        let mut used = vec![false; d];
        for g in 0..d {
            let mut hits = (0..d).filter(|&r| m[(r, g)].norm() > tol);
            if let Some(r) = hits.next() {
                if hits.next().is_some() || used[r] {
                    return None;
                }
                perm[g] = r;
                used[r] = true;
            }
        }
        let mut free = (0..d).filter(|&r| !used[r]);
        for p in perm.iter_mut().filter(|p| **p == usize::MAX) {
            *p = free.next()?;
        }
        let amps = perm.iter().enumerate().map(|(g, &r)| m[(r, g)]).collect();
        Some(Self { perm, amps })
    }
}

/// A CPTP map in Kraus form together with the classes it was certified for.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    dim_in: usize,
    dim_out: usize,
    classes: BTreeSet<ChannelClass>,
    normal_form: Option<Vec<SioKraus>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentOutcome {
    pub probability: f64,
    pub state: DensityMatrix,
    pub index: usize,
}

fn check_dims(kraus: &[CMatrix]) -> Result<(usize, usize)> {
    let first = kraus.first().ok_or(Error::Empty)?;
    let (rows, cols) = first.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::Empty);
    }
    for k in kraus {
        if k.shape() != (rows, cols) {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: k.nrows() * k.ncols(),
            });
        }
        if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(0));
        }
    }
    Ok((rows, cols))
}

fn sum_kdag_k(kraus: &[CMatrix], dim_in: usize) -> CMatrix {
    let mut s = CMatrix::zeros(dim_in, dim_in);
    for k in kraus {
        s += k.adjoint() * k;
    }
    s
}

fn at_most_one_per_column(k: &CMatrix, tol: f64) -> bool {
    (0..k.ncols()).all(|g| (0..k.nrows()).filter(|&r| k[(r, g)].norm() > tol).count() <= 1)
}

fn at_most_one_per_row(k: &CMatrix, tol: f64) -> bool {
    (0..k.nrows()).all(|r| (0..k.ncols()).filter(|&g| k[(r, g)].norm() > tol).count() <= 1)
}

fn apply_raw(kraus: &[CMatrix], m: &CMatrix) -> CMatrix {
    let d = kraus[0].nrows();
    let mut out = CMatrix::zeros(d, d);
    for k in kraus {
        out += k * m * k.adjoint();
    }
    out
}

fn dephase_raw(m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| if i == j { m[(i, i)] } else { ZERO })
}

fn unit(d: usize, m: usize, n: usize) -> CMatrix {
    let mut e = CMatrix::zeros(d, d);
    e[(m, n)] = c(1.0, 0.0);
    e
}

fn max_off_diag(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

/// Builds a channel and tags it with every class the numeric tests certify.
/// Fails with [`Error::NotCptp`] when the Kraus set is not trace preserving.
pub fn classify(kraus: Vec<CMatrix>, tol: f64) -> Result<QuantumChannel> {
    let (dim_out, dim_in) = check_dims(&kraus)?;
    let deficit = linalg::max_abs_diff(&sum_kdag_k(&kraus, dim_in), &CMatrix::identity(dim_in, dim_in));
    if deficit > tol {
        return Err(Error::NotCptp(deficit));
    }
    let mut classes = BTreeSet::from([ChannelClass::Cptp]);

    let io = kraus.iter().all(|k| at_most_one_per_column(k, tol));
    let sio = io && kraus.iter().all(|k| at_most_one_per_row(k, tol));
    if io {
        classes.insert(ChannelClass::Io);
    }
    if sio {
        classes.insert(ChannelClass::Sio);
    }
    let mio = (0..dim_in).all(|i| max_off_diag(&apply_raw(&kraus, &unit(dim_in, i, i))) <= tol);
    if mio {
        classes.insert(ChannelClass::Mio);
    }
    let dio = (0..dim_in).all(|m| {
        (0..dim_in).all(|n| {
            let e = unit(dim_in, m, n);
            let lhs = dephase_raw(&apply_raw(&kraus, &e));
            let rhs = apply_raw(&kraus, &dephase_raw(&e));
            linalg::max_abs_diff(&lhs, &rhs) <= tol
        })
    });
    if dio {
        classes.insert(ChannelClass::Dio);
    }

    let normal_form = if sio && dim_in == dim_out {
        kraus.iter().map(|k| SioKraus::from_matrix(k, tol)).collect()
    } else {
        None
    };
    Ok(QuantumChannel {
        kraus,
        dim_in,
        dim_out,
        classes,
        normal_form,
    })
}

impl QuantumChannel {
    /// Builds a channel from SIO normal-form Kraus operators, keeping that
    /// form verbatim rather than re-deriving it from the matrices.
    pub fn from_sio_kraus(ops: Vec<SioKraus>, tol: f64) -> Result<Self> {
        if let Some((i, _)) = ops.iter().enumerate().find(|(_, k)| !k.is_permutation()) {
            return Err(Error::NotNormalForm(i));
        }
        let mut ch = classify(ops.iter().map(SioKraus::to_matrix).collect(), tol)?;
        ch.normal_form = Some(ops);
        Ok(ch)
    }

    pub fn identity(d: usize) -> Self {
        Self::from_sio_kraus(vec![SioKraus::diagonal(vec![c(1.0, 0.0); d])], tol::chan()).expect("identity is CPTP")
    }

    /// `{|i><i|}`: the full dephasing map.
    pub fn full_dephasing(d: usize) -> Self {
        let ops = (0..d)
            .map(|i| {
                let mut amps = vec![ZERO; d];
                amps[i] = c(1.0, 0.0);
                SioKraus::diagonal(amps)
            })
            .collect();
        Self::from_sio_kraus(ops, tol::chan()).expect("projectors are CPTP")
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn classes(&self) -> &BTreeSet<ChannelClass> {
        &self.classes
    }

    pub fn has(&self, class: ChannelClass) -> bool {
        self.classes.contains(&class)
    }

    /// Sorted class tags, e.g. `["CPTP", "DIO", "IO", "MIO", "SIO"]`.
    pub fn tag_names(&self) -> Vec<&'static str> {
        self.classes.iter().map(|c| c.as_str()).collect()
    }

    pub fn normal_form(&self) -> Option<&[SioKraus]> {
        self.normal_form.as_deref()
    }

    /// `sum_n K_n rho K_n^dagger`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_input(rho.dim())?;
        DensityMatrix::new(apply_raw(&self.kraus, rho.matrix()), tol::chan().max(tol::state()))
    }

    /// `sum_n K_n X K_n^dagger` for an arbitrary (unnormalized) square operator.
    pub fn apply_operator(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != x.ncols() {
            return Err(Error::NotSquare {
                rows: x.nrows(),
                cols: x.ncols(),
            });
        }
        self.check_input(x.nrows())?;
        Ok(apply_raw(&self.kraus, x))
    }

    /// Selective measurement: `(p_n, K_n rho K_n^dagger / p_n)` for every
    /// outcome with `p_n > tol_chan`.
    pub fn instrument(&self, rho: &DensityMatrix) -> Result<Vec<InstrumentOutcome>> {
        self.check_input(rho.dim())?;
        let cutoff = tol::chan();
        let mut out = Vec::new();
        for (index, k) in self.kraus.iter().enumerate() {
            let branch = k * rho.matrix() * k.adjoint();
            let p = branch.trace().re;
            if p > cutoff {
                out.push(InstrumentOutcome {
                    probability: p,
                    state: DensityMatrix::from_trusted(branch.unscale(p)),
                    index,
                });
            }
        }
        Ok(out)
    }

    fn check_input(&self, d: usize) -> Result<()> {
        if d != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                got: d,
            });
        }
        Ok(())
    }

    /// `other` after `self`; Kraus set `{B_j A_i}`.
    pub(crate) fn then(&self, other: &QuantumChannel, tol: f64) -> Result<QuantumChannel> {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for b in &other.kraus {
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        classify(kraus, tol)
    }

    fn normal_form_or_err(&self) -> Result<&[SioKraus]> {
        match &self.normal_form {
            Some(nf) => Ok(nf),
            None => {
                let bad = self
                    .kraus
                    .iter()
                    .position(|k| SioKraus::from_matrix(k, tol::chan()).is_none())
                    .unwrap_or(0);
                Err(Error::NotNormalForm(bad))
            }
        }
    }
}

/// The `W_j = sqrt(sigma_j) P_j` family, `P_j` the cyclic shift by `j`, which
/// sends `|0><0|` to `diag(sigma)`. Zero-weight shifts are omitted.
pub fn build_preparation_channel(sigma_diag: &[f64]) -> Result<QuantumChannel> {
    let d = sigma_diag.len();
    if d == 0 {
        return Err(Error::Empty);
    }
    let tol = tol::state();
    if let Some(p) = sigma_diag.iter().find(|p| !p.is_finite() || **p < -tol || **p > 1.0 + tol) {
        return Err(Error::NotProbabilityVector(format!("entry {p} outside [0, 1]")));
    }
    let total: f64 = sigma_diag.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::NotProbabilityVector(format!("entries sum to {total}")));
    }
    let ops = sigma_diag
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(j, &p)| SioKraus {
            perm: (0..d).map(|g| (g + j) % d).collect(),
            amps: vec![c(p.sqrt(), 0.0); d],
        })
        .collect();
    QuantumChannel::from_sio_kraus(ops, tol::chan())
}

/// `sum_i sqrt(rho_ii) |i>`: the pure state with the same diagonal as `rho`.
pub fn canonical_pure_state(rho: &DensityMatrix) -> PureState {
    let amps = rho.diagonal().into_iter().map(|p| c(p.max(0.0).sqrt(), 0.0));
    PureState::from_trusted(CVector::from_iterator(rho.dim(), amps))
}

/// Diagonal entries at or below this are outside the support.
const SUPPORT_CUTOFF: f64 = 1e-14;
/// Correlation-matrix eigenvalues below this are dropped from the factor.
const FACTOR_CUTOFF: f64 = 1e-12;

/// Purely dephasing channel taking `canonical_pure_state(rho)` to `rho`.
///
/// With `Gamma_mn = rho_mn / sqrt(rho_mm rho_nn)` factored as
/// `Gamma = U Lambda U^dagger`, the Kraus operators are
/// `D_j = sum_m sqrt(lambda_j) U_mj |m><m|`. Each column `m` of that factor is
/// a unit vector because `Gamma_mm = 1`, which makes the set trace
/// preserving.
pub fn build_dephasing_channel(rho: &DensityMatrix) -> Result<QuantumChannel> {
    let d = rho.dim();
    let diag = rho.diagonal();
    let support: Vec<usize> = (0..d).filter(|&m| diag[m] > SUPPORT_CUTOFF).collect();
    for m in (0..d).filter(|m| diag[*m] <= SUPPORT_CUTOFF) {
        let weight = (0..d).filter(|&n| n != m).map(|n| rho.entry(m, n).norm()).fold(0.0, f64::max);
        if weight > tol::state() {
            return Err(Error::SingularDiagonal { index: m, weight });
        }
    }

    let s = support.len();
    let gamma = CMatrix::from_fn(s, s, |a, b| {
        if a == b {
            c(1.0, 0.0)
        } else {
            let (m, n) = (support[a], support[b]);
            rho.entry(m, n) / (diag[m] * diag[n]).sqrt()
        }
    });
    let (vals, vecs) = linalg::hermitian_eigen(&gamma);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -tol::chan() {
        return Err(Error::FactorizationFailure(min));
    }
    let kept: Vec<usize> = (0..s).filter(|&j| vals[j] > FACTOR_CUTOFF).collect();
    let n_ops = kept.len().max(1);

    // x[j][m]: amplitude of Kraus j on basis index m
    let mut x = vec![vec![ZERO; d]; n_ops];
    for (a, &m) in support.iter().enumerate() {
        let mut norm2 = 0.0;
        for (j, &col) in kept.iter().enumerate() {
            let v = vecs[(a, col)] * vals[col].sqrt();
            norm2 += v.norm_sqr();
            x[j][m] = v;
        }
        let norm = norm2.sqrt();
        for row in x.iter_mut() {
            row[m] /= norm;
        }
    }
    for m in (0..d).filter(|m| diag[*m] <= SUPPORT_CUTOFF) {
        x[0][m] = c(1.0, 0.0);
    }
    QuantumChannel::from_sio_kraus(x.into_iter().map(SioKraus::diagonal).collect(), tol::chan())
}

/// Diagonal SIO `T` whose outcome probabilities on a pure state match those
/// of `K` applied after `M`:
/// `|d_gamma^(j)|^2 = sum_l |a_gamma^(l)|^2 |tau^(j)_{pi_l(gamma)}|^2`.
pub fn build_t_channel(m: &QuantumChannel, k: &QuantumChannel) -> Result<QuantumChannel> {
    let m_nf = m.normal_form_or_err()?;
    let k_nf = k.normal_form_or_err()?;
    if m.dim_in != k.dim_in {
        return Err(Error::DimensionMismatch {
            expected: m.dim_in,
            got: k.dim_in,
        });
    }
    let d = m.dim_in;
    let ops = k_nf
        .iter()
        .map(|ki| {
            let amps = (0..d)
                .map(|g| {
                    let s: f64 = m_nf
                        .iter()
                        .map(|ml| ml.amps[g].norm_sqr() * ki.amps[ml.perm[g]].norm_sqr())
                        .sum();
                    c(s.sqrt(), 0.0)
                })
                .collect();
            SioKraus::diagonal(amps)
        })
        .collect();
    QuantumChannel::from_sio_kraus(ops, tol::chan())
}

/// Amplitude products below this count as zero when `d_gamma` vanishes.
const ZERO_BRANCH: f64 = 1e-12;

/// SIO `N^(i)` with `N_l = sum_gamma (a_gamma^(l) tau^(i)_{pi_l(gamma)} / d_gamma^(i)) |f_i(pi_l(gamma))><gamma|`,
/// so that `eps_N(T_i psi psi^dagger T_i^dagger) = K_i eps_M(psi psi^dagger) K_i^dagger`.
///
/// Columns where `d_gamma^(i) = 0` carry no weight after `T_i`; they are routed
/// through `N_0` with unit amplitude so the result stays trace preserving.
pub fn build_n_channel(
    m: &QuantumChannel,
    k: &QuantumChannel,
    t: &QuantumChannel,
    i: usize,
) -> Result<QuantumChannel> {
    let m_nf = m.normal_form_or_err()?;
    let k_nf = k.normal_form_or_err()?;
    let t_nf = t.normal_form_or_err()?;
    if i >= k_nf.len() {
        return Err(Error::OutcomeOutOfRange { index: i, len: k_nf.len() });
    }
    if t_nf.len() != k_nf.len() {
        return Err(Error::OutcomeOutOfRange { index: i, len: t_nf.len() });
    }
    let ti = &t_nf[i];
    if ti.perm.iter().enumerate().any(|(g, &p)| g != p) {
        return Err(Error::NotNormalForm(i));
    }
    let ki = &k_nf[i];
    let d = m.dim_in;
    let mut ops = Vec::with_capacity(m_nf.len());
    for ml in m_nf {
        let perm: Vec<usize> = (0..d).map(|g| ki.perm[ml.perm[g]]).collect();
        let mut amps = vec![ZERO; d];
        for g in 0..d {
            let num = ml.amps[g] * ki.amps[ml.perm[g]];
            let den = ti.amps[g];
            if den.norm() > 0.0 {
                amps[g] = num / den;
            } else if num.norm() > ZERO_BRANCH {
                return Err(Error::DivisionByZeroAmplitude { outcome: i, gamma: g });
            }
        }
        ops.push(SioKraus { perm, amps });
    }
    for g in (0..d).filter(|&g| ti.amps[g].norm() == 0.0) {
        ops[0].amps[g] = c(1.0, 0.0);
    }
    QuantumChannel::from_sio_kraus(ops, tol::chan())
}

/// Seeded random SIO: random permutations and, per column, a random unit
/// vector of amplitudes across the `n_kraus` operators.
pub fn random_sio(dim: usize, n_kraus: usize, seed: u64) -> QuantumChannel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_sio_with(&mut rng, dim, n_kraus)
}

pub(crate) fn random_sio_with<R: Rng>(rng: &mut R, dim: usize, n_kraus: usize) -> QuantumChannel {
    let n = n_kraus.max(1);
    let mut amps = vec![vec![ZERO; dim]; n];
    for g in 0..dim {
        let col: Vec<Complex64> = (0..n).map(|_| gaussian_complex(rng)).collect();
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for (j, z) in col.into_iter().enumerate() {
            amps[j][g] = z / norm;
        }
    }
    let ops = amps
        .into_iter()
        .map(|a| {
            let mut perm: Vec<usize> = (0..dim).collect();
            perm.shuffle(rng);
            SioKraus { perm, amps: a }
        })
        .collect();
    QuantumChannel::from_sio_kraus(ops, tol::chan()).expect("columns are unit vectors")
}

/// Seeded random IO that is generally not SIO.
///
/// Mixes a random SIO with a "merging" IO `K_n = sum_gamma U_{n gamma} |t(gamma)><gamma|`
/// (`t` an arbitrary map, `U` unitary), then follows it with another random
/// SIO. Every Kraus operator keeps at most one nonzero per column.
pub fn random_io(dim: usize, seed: u64) -> QuantumChannel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_io_with(&mut rng, dim)
}

pub(crate) fn random_io_with<R: Rng>(rng: &mut R, dim: usize) -> QuantumChannel {
    let q: f64 = rng.random();
    let first = random_sio_with(rng, dim, 2);
    let u = random_unitary(rng, dim);
    let target: Vec<usize> = (0..dim).map(|_| rng.random_range(0..dim)).collect();
    let mut kraus: Vec<CMatrix> = first.kraus.iter().map(|k| k.scale(q.sqrt())).collect();
    for n in 0..dim {
        let mut k = CMatrix::zeros(dim, dim);
        for g in 0..dim {
            k[(target[g], g)] = u[(n, g)] * (1.0 - q).sqrt();
        }
        kraus.push(k);
    }
    let mixed = classify(kraus, tol::chan()).expect("mixture of IO channels is CPTP");
    let after = random_sio_with(rng, dim, 2);
    mixed.then(&after, tol::chan()).expect("composition is CPTP")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_pure};

    fn tags(ch: &QuantumChannel) -> Vec<&'static str> {
        ch.tag_names()
    }

    fn rho_example() -> DensityMatrix {
        DensityMatrix::from_real(2, &[0.75, 0.25, 0.25, 0.25]).unwrap()
    }

    #[test]
    fn classify_examples() {
        let id = classify(vec![CMatrix::identity(2, 2)], 1e-8).unwrap();
        assert_eq!(tags(&id), ["CPTP", "DIO", "IO", "MIO", "SIO"]);

        let h = 0.5f64.sqrt();
        let had = CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]);
        assert_eq!(tags(&classify(vec![had], 1e-8).unwrap()), ["CPTP"]);

        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![c(h, 0.0), c(h, 0.0)]));
        let b = CMatrix::from_diagonal(&CVector::from_vec(vec![c(h, 0.0), c(-h, 0.0)]));
        assert_eq!(tags(&classify(vec![a, b], 1e-8).unwrap()), ["CPTP", "DIO", "IO", "MIO", "SIO"]);
    }

    #[test]
    fn classify_rejects_non_cptp_and_ragged() {
        let half = CMatrix::identity(2, 2).scale(0.5);
        assert!(matches!(classify(vec![half], 1e-8), Err(Error::NotCptp(d)) if (d - 0.75).abs() < 1e-12));
        assert!(matches!(
            classify(vec![CMatrix::identity(2, 2), CMatrix::identity(3, 3)], 1e-8),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(classify(vec![], 1e-8), Err(Error::Empty)));
    }

    #[test]
    fn reset_is_sio() {
        let ch = classify(vec![unit(2, 0, 0), unit(2, 0, 1)], 1e-8).unwrap();
        assert_eq!(tags(&ch), ["CPTP", "DIO", "IO", "MIO", "SIO"]);
        assert!(ch.normal_form().is_some());
    }

    fn merging_channel() -> QuantumChannel {
        // (|0><0| +- |0><1|) / sqrt 2
        let h = 0.5f64.sqrt();
        let k0 = (unit(2, 0, 0) + unit(2, 0, 1)).scale(h);
        let k1 = (unit(2, 0, 0) - unit(2, 0, 1)).scale(h);
        classify(vec![k0, k1], 1e-8).unwrap()
    }

    #[test]
    fn merging_is_io_but_not_sio() {
        let ch = merging_channel();
        assert_eq!(tags(&ch), ["CPTP", "DIO", "IO", "MIO"]);
        assert!(ch.normal_form().is_none());
    }

    #[test]
    fn apply_examples() {
        let rho = rho_example();
        assert!(QuantumChannel::identity(2).apply(&rho).unwrap().max_distance(&rho) < 1e-15);
        let out = QuantumChannel::full_dephasing(2).apply(&rho).unwrap();
        assert!(out.max_distance(&DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap()) < 1e-15);
        let prep = build_preparation_channel(&[0.2, 0.3, 0.5]).unwrap();
        let out = prep.apply(&PureState::basis(3, 0).density()).unwrap();
        assert!(out.max_distance(&DensityMatrix::from_diagonal(&[0.2, 0.3, 0.5]).unwrap()) < 1e-15);
        assert!(matches!(prep.apply(&rho), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn instrument_examples() {
        let rho = rho_example();
        let out = QuantumChannel::identity(2).instrument(&rho).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].probability - 1.0).abs() < 1e-15);
        assert!(out[0].state.max_distance(&rho) < 1e-15);

        let out = QuantumChannel::full_dephasing(2).instrument(&rho).unwrap();
        assert_eq!(out.len(), 2);
        assert!((out[0].probability - 0.75).abs() < 1e-15);
        assert!((out[1].probability - 0.25).abs() < 1e-15);
        assert!(out[0].state.max_distance(&PureState::basis(2, 0).density()) < 1e-15);
        assert!(out[1].state.max_distance(&PureState::basis(2, 1).density()) < 1e-15);

        let ch = random_sio(3, 4, 8);
        let rho = random_density(&mut ChaCha8Rng::seed_from_u64(1), 3);
        let outcomes = ch.instrument(&rho).unwrap();
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-10);
        let mut mix = CMatrix::zeros(3, 3);
        for o in &outcomes {
            mix += o.state.matrix().scale(o.probability);
        }
        assert!(linalg::max_abs_diff(&mix, ch.apply(&rho).unwrap().matrix()) < 1e-12);
    }

    #[test]
    fn instrument_drops_zero_probability_branches() {
        let out = QuantumChannel::full_dephasing(2).instrument(&PureState::basis(2, 1).density()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].index, 1);
    }

    #[test]
    fn preparation_examples() {
        let ch = build_preparation_channel(&[0.2, 0.3, 0.5]).unwrap();
        assert_eq!(ch.kraus().len(), 3);
        for t in [ChannelClass::Cptp, ChannelClass::Io, ChannelClass::Sio] {
            assert!(ch.has(t));
        }
        let ch = build_preparation_channel(&[1.0, 0.0]).unwrap();
        assert_eq!(ch.kraus().len(), 1);
        let out = ch.apply(&PureState::basis(2, 0).density()).unwrap();
        assert_eq!(out, PureState::basis(2, 0).density());
        let ch = build_preparation_channel(&[0.5, 0.5]).unwrap();
        let out = ch.apply(&PureState::basis(2, 0).density()).unwrap();
        assert!(out.max_distance(&DensityMatrix::maximally_mixed(2)) < 1e-15);
        assert!(matches!(build_preparation_channel(&[0.7, 0.7]), Err(Error::NotProbabilityVector(_))));
        assert!(matches!(build_preparation_channel(&[1.2, -0.2]), Err(Error::NotProbabilityVector(_))));
    }

    #[test]
    fn canonical_pure_examples() {
        let p = canonical_pure_state(&rho_example());
        assert!((p.amplitudes()[0].re - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((p.amplitudes()[1].re - 0.5).abs() < 1e-15);
        let p = canonical_pure_state(&DensityMatrix::from_diagonal(&[0.2, 0.3, 0.5]).unwrap());
        assert!((p.amplitudes()[2].re - 0.5f64.sqrt()).abs() < 1e-15);
        let psi = PureState::from_real(&[0.6, 0.8]).unwrap();
        let back = canonical_pure_state(&psi.density());
        assert!((back.amplitudes() - psi.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn dephasing_examples() {
        let psi = PureState::from_real(&[0.6, 0.8]).unwrap();
        let ch = build_dephasing_channel(&psi.density()).unwrap();
        assert_eq!(ch.kraus().len(), 1);
        let k = &ch.kraus()[0];
        assert!((k[(0, 0)].norm() - 1.0).abs() < 1e-12 && (k[(1, 1)].norm() - 1.0).abs() < 1e-12);
        assert!((k[(0, 0)] - k[(1, 1)]).norm() < 1e-12);

        let rho = rho_example();
        let ch = build_dephasing_channel(&rho).unwrap();
        assert_eq!(tags(&ch), ["CPTP", "DIO", "IO", "MIO", "SIO"]);
        let out = ch.apply(&canonical_pure_state(&rho).density()).unwrap();
        assert!(out.max_distance(&rho) < 1e-10);

        let mm = DensityMatrix::maximally_mixed(2);
        let ch = build_dephasing_channel(&mm).unwrap();
        assert_eq!(ch.kraus().len(), 2);
        let out = ch.apply(&PureState::mcs_uniform(2).density()).unwrap();
        assert!(out.max_distance(&mm) < 1e-15);
    }

    #[test]
    fn dephasing_restricts_to_support() {
        let rho = DensityMatrix::from_real(3, &[0.75, 0.25, 0.0, 0.25, 0.25, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let ch = build_dephasing_channel(&rho).unwrap();
        let out = ch.apply(&canonical_pure_state(&rho).density()).unwrap();
        assert!(out.max_distance(&rho) < 1e-12);
    }

    #[test]
    fn lemma_constructions_on_trivial_inputs() {
        let id = QuantumChannel::identity(2);
        let deph = QuantumChannel::full_dephasing(2);
        let t = build_t_channel(&id, &deph).unwrap();
        assert!(linalg::max_abs_diff(&t.kraus()[0], &deph.kraus()[0]) < 1e-15);
        assert!(linalg::max_abs_diff(&t.kraus()[1], &deph.kraus()[1]) < 1e-15);

        let t = build_t_channel(&id, &id).unwrap();
        let n = build_n_channel(&id, &id, &t, 0).unwrap();
        assert!(linalg::max_abs_diff(&n.kraus()[0], &CMatrix::identity(2, 2)) < 1e-15);

        // K = identity: |d_gamma^(0)|^2 = sum_l |a_gamma^(l)|^2 = 1
        let prep = build_preparation_channel(&[0.5, 0.5]).unwrap();
        let t = build_t_channel(&prep, &id).unwrap();
        assert_eq!(t.kraus().len(), 1);
        assert!(linalg::max_abs_diff(&t.kraus()[0], &CMatrix::identity(2, 2)) < 1e-15);

        assert!(matches!(build_n_channel(&id, &id, &t, 3), Err(Error::OutcomeOutOfRange { .. })));
        assert!(matches!(build_t_channel(&merging_channel(), &id), Err(Error::NotNormalForm(_))));
    }

    #[test]
    fn n_channel_rejects_an_inconsistent_t() {
        let m = random_sio(3, 2, 4);
        let k = random_sio(3, 2, 5);
        let bogus = QuantumChannel::from_sio_kraus(
            vec![
                SioKraus::diagonal(vec![ZERO, c(1.0, 0.0), c(1.0, 0.0)]),
                SioKraus::diagonal(vec![c(1.0, 0.0), ZERO, ZERO]),
            ],
            1e-8,
        )
        .unwrap();
        assert!(matches!(
            build_n_channel(&m, &k, &bogus, 0),
            Err(Error::DivisionByZeroAmplitude { outcome: 0, gamma: 0 })
        ));
    }

    #[test]
    fn lemma_identities_hold_for_random_sio_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_sio(3, 3, 11);
        let k = random_sio(3, 2, 12);
        let t = build_t_channel(&m, &k).unwrap();
        assert!(t.has(ChannelClass::Sio));
        let ns: Vec<_> = (0..k.kraus().len()).map(|i| build_n_channel(&m, &k, &t, i).unwrap()).collect();
        for n in &ns {
            assert!(n.has(ChannelClass::Sio));
        }
        for _ in 0..100 {
            let psi = random_pure(&mut rng, 3).density();
            let rho = m.apply(&psi).unwrap();
            for (i, ki) in k.kraus().iter().enumerate() {
                let target = ki * rho.matrix() * ki.adjoint();
                let ti = &t.kraus()[i];
                let branch = ti * psi.matrix() * ti.adjoint();
                assert!((branch.trace() - target.trace()).norm() < 1e-10);
                let converted = apply_raw(ns[i].kraus(), &branch);
                assert!(linalg::max_abs_diff(&converted, &target) < 1e-10);
            }
        }
    }

    #[test]
    fn random_sio_is_deterministic_and_valid() {
        let a = random_sio(2, 2, 1);
        assert!(a.has(ChannelClass::Sio) && a.has(ChannelClass::Io) && a.has(ChannelClass::Cptp));
        let b = random_sio(3, 4, 2);
        let s = sum_kdag_k(b.kraus(), 3);
        assert!(linalg::max_abs_diff(&s, &CMatrix::identity(3, 3)) < 1e-12);
        assert_eq!(random_sio(3, 4, 2), b);
        assert_ne!(random_sio(3, 4, 3), b);
    }

    #[test]
    fn class_inclusions_on_random_channels() {
        for seed in 0..50 {
            let s = random_sio(3, 3, seed);
            assert!(s.has(ChannelClass::Io) && s.has(ChannelClass::Mio) && s.has(ChannelClass::Dio));
            let io = random_io(3, seed);
            assert!(io.has(ChannelClass::Io) && io.has(ChannelClass::Mio), "{:?}", io.tag_names());
        }
        // the merging component makes most random IO channels non-SIO
        assert!((0..50).any(|s| !random_io(3, s).has(ChannelClass::Sio)));
    }

    #[test]
    fn io_preserves_incoherence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..50 {
            let ch = random_io(3, seed);
            let p = crate::random::random_probability(&mut rng, 3);
            let delta = DensityMatrix::from_diagonal(&p).unwrap();
            assert!(ch.apply(&delta).unwrap().is_incoherent(1e-9));
        }
    }
}
