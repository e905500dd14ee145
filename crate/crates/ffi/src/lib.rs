//! C ABI over the `acwr` crate.
//!
//! Every fallible function returns an [`AcwrStatus`]. On failure a message
//! is available from [`acwr_last_error_message`] on the same thread until
//! the next call into the library. Series are opaque handles created with
//! [`acwr_series_new`] and released with [`acwr_series_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use acwr::planner::{max_safe_acute, PlanBound, PlanRequest};
use acwr::ratio::{compute_series, convergence_day, lambda_from_n, weight_table, MethodSpec, RatioPoint};
use acwr::series::{Coupling, WindowConfig, WorkloadSeries};
use acwr::Error;
use chrono::NaiveDate;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcwrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InsufficientHistory = 3,
    OutOfRange = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcwrMethod {
    RollingCoupled = 0,
    RollingUncoupled = 1,
    EwmaCoupled = 2,
    EwmaUncoupled = 3,
}

impl AcwrMethod {
    fn spec(self) -> MethodSpec {
        match self {
            AcwrMethod::RollingCoupled => MethodSpec::rolling(WindowConfig::coupled(1, 4)),
            AcwrMethod::RollingUncoupled => MethodSpec::rolling(WindowConfig::uncoupled(1, 4)),
            AcwrMethod::EwmaCoupled => MethodSpec::ewma_coupled_default(),
            AcwrMethod::EwmaUncoupled => MethodSpec::ewma_uncoupled_default(),
        }
    }
}

/// One ratio. When `defined` is false, `ratio` is 0 and must be ignored.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AcwrRatio {
    /// Days since the first day of the series.
    pub day_index: usize,
    pub acute: f64,
    pub chronic: f64,
    pub ratio: f64,
    pub defined: bool,
    pub converged: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcwrBoundKind {
    Finite = 0,
    Unbounded = 1,
    Undefined = 2,
}

/// Opaque daily workload series.
pub struct AcwrSeries {
    inner: WorkloadSeries,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: AcwrStatus, msg: impl Into<String>) -> AcwrStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> AcwrStatus {
    let status = match e {
        Error::InsufficientHistory { .. } | Error::EmptySeries => AcwrStatus::InsufficientHistory,
        Error::DateOutOfRange(_) => AcwrStatus::OutOfRange,
        _ => AcwrStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

fn guard<F: FnOnce() -> AcwrStatus + UnwindSafe>(f: F) -> AcwrStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(f).unwrap_or_else(|_| fail(AcwrStatus::Panic, "internal panic"))
}

fn to_c(p: &RatioPoint, start: NaiveDate) -> AcwrRatio {
    AcwrRatio {
        day_index: (p.at - start).num_days() as usize,
        acute: p.acute,
        chronic: p.chronic,
        ratio: p.ratio.value().unwrap_or(0.0),
        defined: !p.ratio.is_undefined(),
        converged: p.converged,
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn acwr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn acwr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Create a series of `len` daily loads starting at `start_date`
/// (`YYYY-MM-DD`). `loads` may be NULL when `len` is 0.
///
/// # Safety
/// `athlete_id` and `start_date` must be NUL-terminated strings, `loads`
/// must point to `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn acwr_series_new(
    athlete_id: *const c_char,
    start_date: *const c_char,
    loads: *const f64,
    len: usize,
    out: *mut *mut AcwrSeries,
) -> AcwrStatus {
    guard(|| {
        if athlete_id.is_null() || start_date.is_null() || out.is_null() || (loads.is_null() && len > 0) {
            return fail(AcwrStatus::NullPointer, "null pointer argument");
        }
        let (Ok(id), Ok(date)) = (CStr::from_ptr(athlete_id).to_str(), CStr::from_ptr(start_date).to_str()) else {
            return fail(AcwrStatus::InvalidArgument, "strings must be UTF-8");
        };
        let Ok(start) = NaiveDate::parse_from_str(date, "%Y-%m-%d") else {
            return fail(AcwrStatus::InvalidArgument, format!("bad date `{date}`"));
        };
        let values = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(loads, len)
        };
        match WorkloadSeries::from_daily(id, start, values) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(AcwrSeries { inner }));
                AcwrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `series` must come from [`acwr_series_new`] and not be used afterwards.
/// NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn acwr_series_free(series: *mut AcwrSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Number of days in the series, 0 for NULL.
///
/// # Safety
/// `series` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn acwr_series_len(series: *const AcwrSeries) -> usize {
    series.as_ref().map_or(0, |s| s.inner.len())
}

/// Ratio on day `day_index` of the series.
///
/// # Safety
/// `series` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn acwr_ratio_at(
    series: *const AcwrSeries,
    method: AcwrMethod,
    day_index: usize,
    out: *mut AcwrRatio,
) -> AcwrStatus {
    guard(|| {
        let (Some(s), false) = (series.as_ref(), out.is_null()) else {
            return fail(AcwrStatus::NullPointer, "null pointer argument");
        };
        let Some(day) = s.inner.days().get(day_index) else {
            return fail(AcwrStatus::OutOfRange, format!("day {day_index} is outside the series"));
        };
        match method.spec().evaluate(&s.inner, day.date) {
            Ok(p) => {
                *out = to_c(&p, s.inner.start().expect("non-empty"));
                AcwrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Every defined-history ratio of the series. `*written` receives the
/// number of points; if it exceeds `capacity`, nothing is copied and
/// `BufferTooSmall` is returned. `out` may be NULL when `capacity` is 0.
///
/// # Safety
/// `series` must be a live handle, `out` must hold `capacity` elements and
/// `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn acwr_compute_series(
    series: *const AcwrSeries,
    method: AcwrMethod,
    out: *mut AcwrRatio,
    capacity: usize,
    written: *mut usize,
) -> AcwrStatus {
    guard(|| {
        let Some(s) = series.as_ref() else {
            return fail(AcwrStatus::NullPointer, "null series");
        };
        if written.is_null() || (out.is_null() && capacity > 0) {
            return fail(AcwrStatus::NullPointer, "null output pointer");
        }
        let points = match compute_series(&s.inner, &method.spec()) {
            Ok(p) => p,
            Err(e) => return from_error(e),
        };
        *written = points.len();
        if points.len() > capacity {
            return fail(
                AcwrStatus::BufferTooSmall,
                format!("need room for {} points", points.len()),
            );
        }
        let Some(start) = s.inner.start() else {
            return AcwrStatus::Ok;
        };
        let dst = std::slice::from_raw_parts_mut(out, points.len());
        for (d, p) in dst.iter_mut().zip(&points) {
            *d = to_c(p, start);
        }
        AcwrStatus::Ok
    })
}

/// 2/(n+1).
#[no_mangle]
pub extern "C" fn acwr_lambda_from_n(n: u32) -> f64 {
    lambda_from_n(n)
}

/// Weights of the initial value and the first load after `t` days.
///
/// # Safety
/// `w0` and `w1` must be writable.
#[no_mangle]
pub unsafe extern "C" fn acwr_first_weights(lambda: f64, t: usize, w0: *mut f64, w1: *mut f64) -> AcwrStatus {
    guard(|| {
        if w0.is_null() || w1.is_null() {
            return fail(AcwrStatus::NullPointer, "null output pointer");
        }
        match weight_table(lambda, t) {
            Ok(table) => {
                *w0 = table.w0;
                *w1 = table.w1();
                AcwrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// First day on which two EWMAs started `initial_difference` apart are
/// closer than `epsilon`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn acwr_convergence_day(
    lambda: f64,
    initial_difference: f64,
    epsilon: f64,
    out: *mut u64,
) -> AcwrStatus {
    guard(|| {
        if out.is_null() {
            return fail(AcwrStatus::NullPointer, "null output pointer");
        }
        match convergence_day(lambda, initial_difference, epsilon) {
            Ok(d) => {
                *out = d;
                AcwrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Largest next-week load keeping the rolling ratio at or below
/// `max_ratio`. `*value` is meaningful only when `*kind` is `Finite`.
///
/// # Safety
/// `prior_weekly_totals` must point to `len` doubles; `kind` and `value`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn acwr_max_safe_acute(
    prior_weekly_totals: *const f64,
    len: usize,
    max_ratio: f64,
    uncoupled: bool,
    chronic_weeks: usize,
    kind: *mut AcwrBoundKind,
    value: *mut f64,
) -> AcwrStatus {
    guard(|| {
        if kind.is_null() || value.is_null() || (prior_weekly_totals.is_null() && len > 0) {
            return fail(AcwrStatus::NullPointer, "null pointer argument");
        }
        let priors = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(prior_weekly_totals, len).to_vec()
        };
        let coupling = if uncoupled {
            Coupling::Uncoupled
        } else {
            Coupling::Coupled
        };
        let mut req = PlanRequest::new(priors, max_ratio, coupling);
        req.chronic_weeks = chronic_weeks;
        match max_safe_acute(&req) {
            Ok(res) => {
                let (k, v) = match res.max_acute_load {
                    PlanBound::Finite(v) => (AcwrBoundKind::Finite, v),
                    PlanBound::Unbounded => (AcwrBoundKind::Unbounded, 0.0),
                    PlanBound::Undefined => (AcwrBoundKind::Undefined, 0.0),
                };
                *kind = k;
                *value = v;
                AcwrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
