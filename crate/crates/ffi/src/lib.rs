//! C ABI for eulerflow.
//!
//! Handles are opaque and owned by the caller once returned; release them with
//! the matching `_free` function. Every fallible call returns an
//! [`EulerflowStatus`]; on failure [`eulerflow_last_error`] describes the
//! cause. Panics never cross the boundary.

use eulerflow::dynamics::{self, IntegrateOptions, Trajectory, TrajectoryStatus};
use eulerflow::killing::{self, ClassifyOptions, VerdictStatus};
use eulerflow::{presets, AlgebraKind, Error, MetricOp};
use nalgebra::{DMatrix, DVector};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EulerflowStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotLorentzian = 4,
    UnknownPreset = 5,
    NumericFailure = 6,
    BufferTooSmall = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EulerflowAlgebra {
    Sl2r = 0,
    Sl2c = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EulerflowVerdict {
    CompleteCertified = 0,
    IncompleteCertified = 1,
    CompleteEvidence = 2,
    IncompleteEvidence = 3,
    Undetermined = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EulerflowTrajectoryStatus {
    CompletedHorizon = 0,
    Escaped = 1,
    StepUnderflow = 2,
    StepLimit = 3,
}

/// Summary of an integrated trajectory. Times that do not apply are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EulerflowTrajectoryInfo {
    pub status: EulerflowTrajectoryStatus,
    pub samples: usize,
    pub t_end: f64,
    pub escape_time: f64,
    pub escape_time_estimate: f64,
    pub sup_norm: f64,
    pub max_drift: f64,
}

/// Opaque metric handle.
pub struct EulerflowMetric {
    inner: MetricOp,
}

/// Opaque trajectory handle.
pub struct EulerflowTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).expect("NULs removed"));
}

fn status_of(e: &Error) -> EulerflowStatus {
    match e {
        Error::DimensionMismatch { .. } => EulerflowStatus::DimensionMismatch,
        Error::NotLorentzian { .. } => EulerflowStatus::NotLorentzian,
        Error::UnknownPreset(_) => EulerflowStatus::UnknownPreset,
        Error::NonImaginaryEigenvalueRatio { .. }
        | Error::BlockStructureFailure { .. }
        | Error::DegenerateRotation(_)
        | Error::DomainExceeded { .. } => EulerflowStatus::NumericFailure,
        _ => EulerflowStatus::InvalidArgument,
    }
}

/// Runs `f`, mapping errors and panics to a status and the thread-local message.
fn guard(f: impl FnOnce() -> Result<(), (EulerflowStatus, String)>) -> EulerflowStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EulerflowStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EulerflowStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (EulerflowStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (EulerflowStatus, String) {
    (EulerflowStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (EulerflowStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn metric_ref<'a>(m: *const EulerflowMetric) -> Result<&'a MetricOp, (EulerflowStatus, String)> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null("metric"))
}

fn check_len(expected: usize, found: usize) -> Result<(), (EulerflowStatus, String)> {
    if expected != found {
        return Err(lib_err(Error::DimensionMismatch { expected, found }));
    }
    Ok(())
}

/// Message of the last failed call on this thread (empty after a success).
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn eulerflow_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn eulerflow_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a metric from `A^{-1}` in row-major order (`len = dim^2`).
///
/// # Safety
/// `ainv` must point to `len` doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn eulerflow_metric_new(
    algebra: EulerflowAlgebra,
    ainv: *const f64,
    len: usize,
    out: *mut *mut EulerflowMetric,
) -> EulerflowStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = match algebra {
            EulerflowAlgebra::Sl2r => AlgebraKind::Sl2r,
            EulerflowAlgebra::Sl2c => AlgebraKind::Sl2c,
        };
        let data = slice(ainv, len, "ainv")?;
        let n = kind.dim();
        check_len(n * n, len)?;
        let m = MetricOp::new(kind, DMatrix::from_row_slice(n, n, data)).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(EulerflowMetric { inner: m }));
        Ok(())
    })
}

/// Builds one of the built-in preset metrics by name.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eulerflow_metric_from_preset(
    name: *const c_char,
    out: *mut *mut EulerflowMetric,
) -> EulerflowStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| (EulerflowStatus::InvalidArgument, "name is not UTF-8".to_string()))?;
        let m = presets::metric(name).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(EulerflowMetric { inner: m }));
        Ok(())
    })
}

/// # Safety
/// `m` must come from a metric constructor and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn eulerflow_metric_free(m: *mut EulerflowMetric) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of the Lie algebra (3 or 6); 0 for a null handle.
///
/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn eulerflow_metric_dim(m: *const EulerflowMetric) -> usize {
    m.as_ref().map_or(0, |m| m.inner.dim())
}

/// Writes the Euler field `F(x) = [x, A^{-1} x]` into `out` (both of length `len = dim`).
///
/// # Safety
/// `x` and `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn eulerflow_euler_field(
    m: *const EulerflowMetric,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> EulerflowStatus {
    guard(|| {
        let m = metric_ref(m)?;
        let x = slice(x, len, "x")?;
        check_len(m.dim(), len)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let f = dynamics::euler_field(m, &DVector::from_column_slice(x));
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(f.as_slice());
        Ok(())
    })
}

/// Integrates the Euler field from `u0` on `[0, horizon]` with default tolerances.
///
/// # Safety
/// `u0` must point to `len` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn eulerflow_integrate(
    m: *const EulerflowMetric,
    u0: *const f64,
    len: usize,
    horizon: f64,
    out: *mut *mut EulerflowTrajectory,
) -> EulerflowStatus {
    guard(|| {
        let m = metric_ref(m)?;
        let u0 = slice(u0, len, "u0")?;
        check_len(m.dim(), len)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let traj = dynamics::integrate(m, &DVector::from_column_slice(u0), horizon, &IntegrateOptions::default())
            .map_err(lib_err)?;
        *out = Box::into_raw(Box::new(EulerflowTrajectory { inner: traj }));
        Ok(())
    })
}

/// # Safety
/// `t` must come from [`eulerflow_integrate`] and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn eulerflow_trajectory_free(t: *mut EulerflowTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `t` must be a live handle and `info` writable.
#[no_mangle]
pub unsafe extern "C" fn eulerflow_trajectory_info(
    t: *const EulerflowTrajectory,
    info: *mut EulerflowTrajectoryInfo,
) -> EulerflowStatus {
    guard(|| {
        let t = &t.as_ref().ok_or_else(|| null("trajectory"))?.inner;
        let info = info.as_mut().ok_or_else(|| null("info"))?;
        *info = EulerflowTrajectoryInfo {
            status: match t.status {
                TrajectoryStatus::CompletedHorizon => EulerflowTrajectoryStatus::CompletedHorizon,
                TrajectoryStatus::Escaped => EulerflowTrajectoryStatus::Escaped,
                TrajectoryStatus::StepUnderflow => EulerflowTrajectoryStatus::StepUnderflow,
                TrajectoryStatus::StepLimit => EulerflowTrajectoryStatus::StepLimit,
            },
            samples: t.len(),
            t_end: t.t_end(),
            escape_time: t.escape_time.unwrap_or(f64::NAN),
            escape_time_estimate: t.escape_time_estimate.unwrap_or(f64::NAN),
            sup_norm: t.sup_norm(),
            max_drift: t.drift.max(),
        };
        Ok(())
    })
}

/// Copies sample `index` into `time` and `state` (`len = dim`).
///
/// # Safety
/// `t` must be a live handle, `time` writable and `state` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn eulerflow_trajectory_sample(
    t: *const EulerflowTrajectory,
    index: usize,
    time: *mut f64,
    state: *mut f64,
    len: usize,
) -> EulerflowStatus {
    guard(|| {
        let t = &t.as_ref().ok_or_else(|| null("trajectory"))?.inner;
        if index >= t.len() {
            return Err((
                EulerflowStatus::InvalidArgument,
                format!("sample {index} out of range ({} samples)", t.len()),
            ));
        }
        let u = &t.states[index];
        check_len(u.len(), len)?;
        if time.is_null() || state.is_null() {
            return Err(null("output buffer"));
        }
        *time = t.times[index];
        std::slice::from_raw_parts_mut(state, len).copy_from_slice(u.as_slice());
        Ok(())
    })
}

/// Runs the completeness decision and reports its status. When `rule` is
/// not null it receives the deciding rule id, to be released with
/// [`eulerflow_string_free`].
///
/// # Safety
/// `m` must be a live handle, `status` writable, `rule` writable or null.
#[no_mangle]
pub unsafe extern "C" fn eulerflow_classify(
    m: *const EulerflowMetric,
    seed: u64,
    status: *mut EulerflowVerdict,
    rule: *mut *mut c_char,
) -> EulerflowStatus {
    guard(|| {
        let m = metric_ref(m)?;
        let status = status.as_mut().ok_or_else(|| null("status"))?;
        let v = killing::classify_completeness_with(
            m,
            &ClassifyOptions {
                seed,
                ..ClassifyOptions::default()
            },
        );
        *status = match v.status {
            VerdictStatus::CompleteCertified => EulerflowVerdict::CompleteCertified,
            VerdictStatus::IncompleteCertified => EulerflowVerdict::IncompleteCertified,
            VerdictStatus::CompleteEvidence => EulerflowVerdict::CompleteEvidence,
            VerdictStatus::IncompleteEvidence => EulerflowVerdict::IncompleteEvidence,
            VerdictStatus::Undetermined => EulerflowVerdict::Undetermined,
        };
        if !rule.is_null() {
            *rule = CString::new(v.rule).expect("rule ids have no NUL").into_raw();
        }
        Ok(())
    })
}

/// Full verdict as JSON, released with [`eulerflow_string_free`].
///
/// # Safety
/// `m` must be a live handle and `json` writable.
#[no_mangle]
pub unsafe extern "C" fn eulerflow_classify_json(
    m: *const EulerflowMetric,
    seed: u64,
    json: *mut *mut c_char,
) -> EulerflowStatus {
    guard(|| {
        let m = metric_ref(m)?;
        if json.is_null() {
            return Err(null("json"));
        }
        let v = killing::classify_completeness_with(
            m,
            &ClassifyOptions {
                seed,
                ..ClassifyOptions::default()
            },
        );
        let text = serde_json::to_string(&v).map_err(|e| (EulerflowStatus::NumericFailure, e.to_string()))?;
        *json = CString::new(text).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// Writes the Killing generators as `count` consecutive vectors of length
/// `dim` into `out`, which holds `capacity` doubles. With too little room
/// `count` is still set and [`EulerflowStatus::BufferTooSmall`] returned.
///
/// # Safety
/// `out` must hold `capacity` doubles (may be null when `capacity` is 0) and
/// `count` be writable.
#[no_mangle]
pub unsafe extern "C" fn eulerflow_find_killing(
    m: *const EulerflowMetric,
    out: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> EulerflowStatus {
    guard(|| {
        let m = metric_ref(m)?;
        let count = count.as_mut().ok_or_else(|| null("count"))?;
        let gens = killing::find_killing(m).generators;
        *count = gens.len();
        let needed = gens.len() * m.dim();
        if needed > capacity {
            return Err((
                EulerflowStatus::BufferTooSmall,
                format!("need {needed} doubles, have {capacity}"),
            ));
        }
        if needed == 0 {
            return Ok(());
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let buf = std::slice::from_raw_parts_mut(out, needed);
        for (chunk, g) in buf.chunks_mut(m.dim()).zip(&gens) {
            chunk.copy_from_slice(g.z.as_slice());
        }
        Ok(())
    })
}

/// [`eulerflow_last_error`] as an owned Rust string.
#[doc(hidden)]
pub fn last_error_string() -> String {
    let p = eulerflow_last_error();
    if p.is_null() {
        return String::new();
    }
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}
