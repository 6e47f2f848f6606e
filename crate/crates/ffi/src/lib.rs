//! C ABI over `coherence-core`.
//!
//! States and channels live behind opaque handles that the caller frees with
//! the matching `_free` function. Every fallible call returns a `CohStatus`;
//! on failure `coh_last_error` describes what went wrong on the calling
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coherence::channels::{build_dephasing_channel, build_preparation_channel, ChannelClass, QuantumChannel};
use coherence::linalg::{c, CMatrix};
use coherence::measures::PureCoherenceFunctional;
use coherence::solver::{self, SolveOptions};
use coherence::state::DensityMatrix;
use coherence::{io, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CohStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Unsupported = 3,
    ConstructionFailed = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CohMeasure {
    Geometric = 0,
    RelativeEntropy = 1,
    L1 = 2,
}

impl CohMeasure {
    fn functional(self) -> PureCoherenceFunctional {
        match self {
            Self::Geometric => PureCoherenceFunctional::Geometric,
            Self::RelativeEntropy => PureCoherenceFunctional::RelativeEntropy,
            Self::L1 => PureCoherenceFunctional::L1,
        }
    }
}

/// Class bits returned by `coh_channel_classes`.
pub const COH_CLASS_CPTP: u32 = 1;
pub const COH_CLASS_MIO: u32 = 2;
pub const COH_CLASS_DIO: u32 = 4;
pub const COH_CLASS_IO: u32 = 8;
pub const COH_CLASS_SIO: u32 = 16;

/// A validated density matrix.
pub struct CohDensity(DensityMatrix);

/// A Kraus channel with its certified classes.
pub struct CohChannel(QuantumChannel);

/// Result of a numerical estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CohEstimate {
    pub value: f64,
    /// True when `value` is only an upper bound on the infimum.
    pub upper_bound: bool,
    pub converged: bool,
    pub ensemble_size: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(CohStatus, String);

impl Failure {
    fn input(e: Error) -> Self {
        Self(CohStatus::InvalidInput, e.to_string())
    }

    fn solver(e: Error) -> Self {
        match e {
            Error::DimensionTooLarge { .. } | Error::Unsupported(_) | Error::DimensionMismatch { .. } => {
                Self(CohStatus::Unsupported, e.to_string())
            }
            other => Self::input(other),
        }
    }

    fn null(what: &str) -> Self {
        Self(CohStatus::NullPointer, format!("{what} is null"))
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> CohStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CohStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {message}"));
            CohStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure::null("string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure(CohStatus::InvalidInput, format!("not UTF-8: {e}")))
}

/// Message for the most recent failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn coh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Validates a `dim x dim` row-major matrix. `im` may be null for a real matrix.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `dim * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coh_density_new(
    dim: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut CohDensity,
) -> CohStatus {
    guard(|| {
        if re.is_null() {
            return Err(Failure::null("re"));
        }
        let n = dim.checked_mul(dim).ok_or(Failure(CohStatus::InvalidInput, "dimension overflows".into()))?;
        let re = std::slice::from_raw_parts(re, n);
        let im = if im.is_null() { None } else { Some(std::slice::from_raw_parts(im, n)) };
        let m = CMatrix::from_fn(dim, dim, |i, j| {
            let k = i * dim + j;
            c(re[k], im.map_or(0.0, |im| im[k]))
        });
        store(out, CohDensity(DensityMatrix::validate(m).map_err(Failure::input)?))
    })
}

/// Parses a state file body: `{"dim", "matrix"}` or `{"dim", "vector"}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coh_density_from_json(json: *const c_char, out: *mut *mut CohDensity) -> CohStatus {
    guard(|| {
        let state = io::parse_state(text(json)?).map_err(Failure::input)?;
        store(out, CohDensity(state.density()))
    })
}

/// Dimension of the state, or 0 for a null handle.
///
/// # Safety
/// `rho` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn coh_density_dim(rho: *const CohDensity) -> usize {
    rho.as_ref().map_or(0, |r| r.0.dim())
}

/// Reads entry `(i, j)`.
///
/// # Safety
/// `rho` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coh_density_entry(
    rho: *const CohDensity,
    i: usize,
    j: usize,
    re: *mut f64,
    im: *mut f64,
) -> CohStatus {
    guard(|| {
        let rho = &deref(rho, "rho")?.0;
        if re.is_null() || im.is_null() {
            return Err(Failure::null("re/im"));
        }
        if i >= rho.dim() || j >= rho.dim() {
            return Err(Failure(
                CohStatus::InvalidInput,
                format!("entry ({i}, {j}) outside dimension {}", rho.dim()),
            ));
        }
        let z = rho.entry(i, j);
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// # Safety
/// `rho` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn coh_density_free(rho: *mut CohDensity) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// Incoherent channel sending `|0><0|` to `diag(diag)`, where `diag` is a
/// probability vector of length `n`.
///
/// # Safety
/// `diag` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coh_channel_preparation(diag: *const f64, n: usize, out: *mut *mut CohChannel) -> CohStatus {
    guard(|| {
        if diag.is_null() {
            return Err(Failure::null("diag"));
        }
        let ch = build_preparation_channel(std::slice::from_raw_parts(diag, n))
            .map_err(|e| Failure(CohStatus::ConstructionFailed, e.to_string()))?;
        store(out, CohChannel(ch))
    })
}

/// Purely dephasing channel sending the canonical pure state of `rho`
/// (amplitudes `sqrt(rho_ii)`) to `rho`.
///
/// # Safety
/// `rho` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coh_channel_dephasing(rho: *const CohDensity, out: *mut *mut CohChannel) -> CohStatus {
    guard(|| {
        let ch = build_dephasing_channel(&deref(rho, "rho")?.0)
            .map_err(|e| Failure(CohStatus::ConstructionFailed, e.to_string()))?;
        store(out, CohChannel(ch))
    })
}

/// Parses and classifies a channel file body `{"dim_in", "dim_out", "kraus"}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coh_channel_from_json(json: *const c_char, out: *mut *mut CohChannel) -> CohStatus {
    guard(|| {
        let ch = io::parse_channel(text(json)?).map_err(Failure::input)?;
        store(out, CohChannel(ch))
    })
}

/// Bitwise OR of the `COH_CLASS_*` flags the channel was certified for.
///
/// # Safety
/// `ch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn coh_channel_classes(ch: *const CohChannel) -> u32 {
    let Some(ch) = ch.as_ref() else { return 0 };
    ch.0.classes()
        .iter()
        .map(|class| match class {
            ChannelClass::Cptp => COH_CLASS_CPTP,
            ChannelClass::Mio => COH_CLASS_MIO,
            ChannelClass::Dio => COH_CLASS_DIO,
            ChannelClass::Io => COH_CLASS_IO,
            ChannelClass::Sio => COH_CLASS_SIO,
        })
        .fold(0, |a, b| a | b)
}

/// Number of Kraus operators, or 0 for a null handle.
///
/// # Safety
/// `ch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn coh_channel_kraus_count(ch: *const CohChannel) -> usize {
    ch.as_ref().map_or(0, |ch| ch.0.kraus().len())
}

/// Applies the channel to `rho`, returning a new state.
///
/// # Safety
/// `ch` and `rho` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coh_channel_apply(
    ch: *const CohChannel,
    rho: *const CohDensity,
    out: *mut *mut CohDensity,
) -> CohStatus {
    guard(|| {
        let sigma = deref(ch, "ch")?.0.apply(&deref(rho, "rho")?.0).map_err(Failure::solver)?;
        store(out, CohDensity(sigma))
    })
}

/// # Safety
/// `ch` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn coh_channel_free(ch: *mut CohChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// Closed-form monotone of a qubit.
///
/// # Safety
/// `rho` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coh_qubit_cm(rho: *const CohDensity, measure: CohMeasure, value: *mut f64) -> CohStatus {
    guard(|| {
        let v = solver::qubit_cm(&deref(rho, "rho")?.0, &measure.functional()).map_err(Failure::solver)?;
        if value.is_null() {
            return Err(Failure::null("value"));
        }
        *value = v;
        Ok(())
    })
}

unsafe fn estimate(
    rho: *const CohDensity,
    measure: CohMeasure,
    seed: u64,
    restarts: usize,
    out: *mut CohEstimate,
    roof: bool,
) -> CohStatus {
    guard(|| {
        let rho = &deref(rho, "rho")?.0;
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let opts = SolveOptions {
            seed,
            restarts,
            ..SolveOptions::default()
        };
        let f = measure.functional();
        let r = if roof {
            solver::cf_estimate(rho, &f, &opts)
        } else {
            solver::cm_estimate(rho, &f, &opts)
        }
        .map_err(Failure::solver)?;
        *out = CohEstimate {
            value: r.value,
            upper_bound: r.upper_bound,
            converged: r.converged,
            ensemble_size: r.best_ensemble.len(),
        };
        Ok(())
    })
}

/// Seeded estimate of the monotone (infimum of `f` at the aggregate vector).
///
/// # Safety
/// `rho` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coh_cm_estimate(
    rho: *const CohDensity,
    measure: CohMeasure,
    seed: u64,
    restarts: usize,
    out: *mut CohEstimate,
) -> CohStatus {
    estimate(rho, measure, seed, restarts, out, false)
}

/// Seeded estimate of the convex roof (infimum of the average of `f`).
///
/// # Safety
/// `rho` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coh_cf_estimate(
    rho: *const CohDensity,
    measure: CohMeasure,
    seed: u64,
    restarts: usize,
    out: *mut CohEstimate,
) -> CohStatus {
    estimate(rho, measure, seed, restarts, out, true)
}
