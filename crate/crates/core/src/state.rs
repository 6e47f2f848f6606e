//! Validated quantum states in the fixed computational (incoherent) basis.
//!
//! Both [`DensityMatrix`] and [`PureState`] are immutable once constructed.
//! Validation happens exactly once, in the constructors; every other
//! operation in the crate may assume the invariants hold.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, ZERO};
use crate::tol;

/// A `d x d` Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates `raw` at tolerance `tol`.
    ///
    /// Checks run in the order Hermitian, unit trace, PSD; the first failing
    /// invariant is reported together with its violation magnitude. The stored
    /// matrix is the Hermitian part `(M + M^dagger)/2`, so validating an
    /// already-valid state is idempotent.
    pub fn new(raw: CMatrix, tol: f64) -> Result<Self> {
        if raw.nrows() != raw.ncols() {
            return Err(Error::NotSquare {
                rows: raw.nrows(),
                cols: raw.ncols(),
            });
        }
        if raw.nrows() == 0 {
            return Err(Error::Empty);
        }
        if let Some(idx) = raw.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(idx));
        }
        let herm_defect = linalg::hermiticity_defect(&raw);
        if herm_defect > tol {
            return Err(Error::NotHermitian(herm_defect));
        }
        let trace_defect = (raw.trace() - c(1.0, 0.0)).norm();
        if trace_defect > tol {
            return Err(Error::NotUnitTrace(trace_defect));
        }
        let m = linalg::hermitize(&raw);
        let min_eig = linalg::min_hermitian_eigenvalue(&m);
        if min_eig < -tol {
            return Err(Error::NotPsd(min_eig));
        }
        Ok(Self { m })
    }

    pub fn validate(raw: CMatrix) -> Result<Self> {
        Self::new(raw, tol::state())
    }

    pub fn from_rows(rows: &[Vec<Complex64>], tol: f64) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| rows[i][j]), tol)
    }

    /// Real row-major entries; convenience for tests and examples.
    pub fn from_real(d: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: entries.len(),
            });
        }
        Self::validate(CMatrix::from_fn(d, d, |i, j| c(entries[i * d + j], 0.0)))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        Self::validate(CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                c(diag[i], 0.0)
            } else {
                ZERO
            }
        }))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        let w = 1.0 / d as f64;
        Self {
            m: CMatrix::from_fn(d, d, |i, j| if i == j { c(w, 0.0) } else { ZERO }),
        }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            m: linalg::outer(psi.amplitudes()),
        }
    }

    /// Wraps a matrix the caller has produced from already-valid data.
    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        Self {
            m: linalg::hermitize(&m),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    /// Eigenvalues (non-increasing) and eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        linalg::hermitian_eigen(&self.m)
    }

    pub fn rank(&self, cutoff: f64) -> usize {
        self.eigen().0.iter().filter(|&&v| v > cutoff).count()
    }

    /// The full dephasing map: off-diagonals zeroed, diagonal kept.
    pub fn dephase(&self) -> Self {
        let d = self.dim();
        Self {
            m: CMatrix::from_fn(d, d, |i, j| if i == j { self.m[(i, i)] } else { ZERO }),
        }
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    worst = worst.max(self.m[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// True iff every off-diagonal modulus is at most `tol`.
    pub fn is_incoherent(&self, tol: f64) -> bool {
        self.max_off_diagonal() <= tol
    }

    /// Largest entrywise distance to `other`; `INFINITY` on dimension mismatch.
    pub fn max_distance(&self, other: &DensityMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        linalg::max_abs_diff(&self.m, &other.m)
    }
}

/// A unit-norm vector of complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    v: CVector,
}

impl PureState {
    pub fn new(raw: CVector, tol: f64) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(idx) = raw.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(idx));
        }
        let defect = (raw.norm_squared() - 1.0).abs();
        if defect > tol {
            return Err(Error::NotNormalized(defect));
        }
        Ok(Self { v: raw })
    }

    pub fn validate(raw: CVector) -> Result<Self> {
        Self::new(raw, tol::state())
    }

    pub fn from_slice(amps: &[Complex64]) -> Result<Self> {
        Self::validate(CVector::from_column_slice(amps))
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::validate(CVector::from_iterator(amps.len(), amps.iter().map(|&a| c(a, 0.0))))
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(raw: CVector) -> Result<Self> {
        let n = raw.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotNormalized(1.0));
        }
        Self::validate(raw.unscale(n))
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = CVector::zeros(d);
        v[i] = c(1.0, 0.0);
        Self { v }
    }

    /// `(1/sqrt d) sum_n e^{i theta_n} |n>`.
    pub fn mcs(d: usize, phases: &[f64]) -> Result<Self> {
        if d == 0 {
            return Err(Error::Empty);
        }
        if phases.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: phases.len(),
            });
        }
        let amp = 1.0 / (d as f64).sqrt();
        Ok(Self {
            v: CVector::from_iterator(d, phases.iter().map(|&t| Complex64::from_polar(amp, t))),
        })
    }

    pub fn mcs_uniform(d: usize) -> Self {
        Self::mcs(d, &vec![0.0; d.max(1)]).expect("dimension matches")
    }

    pub(crate) fn from_trusted(v: CVector) -> Self {
        Self { v }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.v
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// `<psi|sigma|psi>`, clamped to `[0, 1]`.
pub fn fidelity_pure_mixed(psi: &PureState, sigma: &DensityMatrix) -> Result<f64> {
    if psi.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            got: psi.dim(),
        });
    }
    let v = psi.amplitudes();
    let z = (v.adjoint() * sigma.matrix() * v)[(0, 0)];
    debug_assert!(z.im.abs() <= tol::state().max(1e-9), "fidelity has imaginary part {}", z.im);
    Ok(z.re.clamp(0.0, 1.0))
}
