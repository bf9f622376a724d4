//! C ABI for the menger toolkit.
//!
//! Conventions:
//! - Measures are opaque handles created by the `menger_measure_*`
//!   constructors and released with [`menger_measure_free`].
//! - Fallible calls return a [`MengerStatus`]; outputs go through pointers.
//!   On failure, [`menger_last_error_message`] returns a description of the
//!   most recent error on the calling thread.
//! - Structured results (beta profiles, curvature reports) are returned as
//!   JSON in newly allocated strings; release them with
//!   [`menger_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use menger::beta::{beta2, centered_beta2, multiscale_beta_sum, BetaResult};
use menger::curvature::{integral_curvature_exact, monte_carlo_curvature, pointwise_curvature};
use menger::error::MengerError;
use menger::generators::{generate, GeneratorSpec};
use menger::{DiscreteMeasure, IntegrandKind, IntegrandSpec, ScaleGrid};

/// Status code of a C-ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MengerStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    IoError = 4,
    BudgetExceeded = 5,
    ZeroMassRegion = 6,
    DegenerateInput = 7,
    Unsupported = 8,
    /// The ball held too few points for a beta fit at this scale.
    InsufficientData = 9,
}

/// Opaque discrete measure handle.
pub struct MengerMeasure {
    inner: DiscreteMeasure,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &MengerError) -> MengerStatus {
    match err {
        MengerError::InvalidParameter(_) => MengerStatus::InvalidArgument,
        MengerError::BudgetExceeded { .. } => MengerStatus::BudgetExceeded,
        MengerError::DegenerateAffineHull => MengerStatus::DegenerateInput,
        MengerError::ZeroMassRegion => MengerStatus::ZeroMassRegion,
        MengerError::SymmetrizeCost { .. } => MengerStatus::InvalidArgument,
        MengerError::UnsupportedBruteForce { .. } => MengerStatus::Unsupported,
        MengerError::Parse { .. } => MengerStatus::ParseError,
        MengerError::Io(_) => MengerStatus::IoError,
        MengerError::Json(_) => MengerStatus::ParseError,
    }
}

fn fail(err: MengerError) -> MengerStatus {
    let code = status_of(&err);
    set_error(err.to_string());
    code
}

fn fail_msg(code: MengerStatus, msg: &str) -> MengerStatus {
    set_error(msg.to_string());
    code
}

unsafe fn measure_ref<'a>(handle: *const MengerMeasure) -> Option<&'a DiscreteMeasure> {
    handle.as_ref().map(|h| &h.inner)
}

unsafe fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, MengerStatus> {
    if ptr.is_null() {
        return Err(fail_msg(MengerStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        fail_msg(
            MengerStatus::InvalidArgument,
            "string argument is not UTF-8",
        )
    })
}

fn integrand(tag: u32, p: f64) -> Result<IntegrandSpec, MengerStatus> {
    let kind = match tag {
        1 => IntegrandKind::K1,
        2 => IntegrandKind::K2,
        other => {
            return Err(fail_msg(
                MengerStatus::InvalidArgument,
                &format!("integrand tag must be 1 (K1) or 2 (K2), got {other}"),
            ))
        }
    };
    IntegrandSpec::new(kind, p).map_err(fail)
}

fn write_json_out<T: serde::Serialize>(value: &T, out: *mut *mut c_char) -> MengerStatus {
    let text = match serde_json::to_string(value) {
        Ok(t) => t,
        Err(e) => return fail(MengerError::Json(e)),
    };
    let c = match CString::new(text) {
        Ok(c) => c,
        Err(_) => return fail_msg(MengerStatus::InvalidArgument, "JSON contained a NUL byte"),
    };
    unsafe { *out = c.into_raw() };
    MengerStatus::Ok
}

/// Version string of the library; static storage, do not free.
#[no_mangle]
pub extern "C" fn menger_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last error raised on this thread, or NULL if none.
/// Valid until the next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn menger_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |c| c.as_ptr())
    })
}

/// Builds a measure from `count` points of `ambient_dim` coordinates
/// (row-major) and `count` weights. Returns NULL on error.
///
/// # Safety
/// `coords` must point to `count * ambient_dim` doubles and `weights` to
/// `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn menger_measure_new(
    ambient_dim: usize,
    intrinsic_dim: usize,
    coords: *const f64,
    weights: *const f64,
    count: usize,
) -> *mut MengerMeasure {
    if (coords.is_null() || weights.is_null()) && count > 0 {
        fail_msg(
            MengerStatus::NullPointer,
            "null coordinate or weight buffer",
        );
        return std::ptr::null_mut();
    }
    let coords = if count == 0 {
        Vec::new()
    } else {
        std::slice::from_raw_parts(coords, count * ambient_dim).to_vec()
    };
    let weights = if count == 0 {
        Vec::new()
    } else {
        std::slice::from_raw_parts(weights, count).to_vec()
    };
    match DiscreteMeasure::new(ambient_dim, intrinsic_dim, coords, weights) {
        Ok(inner) => Box::into_raw(Box::new(MengerMeasure { inner })),
        Err(e) => {
            fail(e);
            std::ptr::null_mut()
        }
    }
}

/// Parses the JSON point-cloud form
/// `{"m": int, "n": int, "points": [[...]], "weights": [...]}`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn menger_measure_from_json(text: *const c_char) -> *mut MengerMeasure {
    let Ok(text) = str_arg(text) else {
        return std::ptr::null_mut();
    };
    match menger::io::read_json(text.as_bytes()) {
        Ok(inner) => Box::into_raw(Box::new(MengerMeasure { inner })),
        Err(e) => {
            fail(e);
            std::ptr::null_mut()
        }
    }
}

/// Reads the CSV point-cloud form (`x1,...,xm,weight` header) from a file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn menger_measure_from_csv_file(
    path: *const c_char,
    intrinsic_dim: usize,
) -> *mut MengerMeasure {
    let Ok(path) = str_arg(path) else {
        return std::ptr::null_mut();
    };
    match menger::io::read_csv_path(std::path::Path::new(path), intrinsic_dim) {
        Ok(inner) => Box::into_raw(Box::new(MengerMeasure { inner })),
        Err(e) => {
            fail(e);
            std::ptr::null_mut()
        }
    }
}

/// Builds one of the synthetic fixtures from its JSON spec, e.g.
/// `{"kind": "circle", "count": 300, "radius": 1.0}`.
///
/// # Safety
/// `spec_json` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn menger_measure_generate(spec_json: *const c_char) -> *mut MengerMeasure {
    let Ok(text) = str_arg(spec_json) else {
        return std::ptr::null_mut();
    };
    let spec: GeneratorSpec = match serde_json::from_str(text) {
        Ok(s) => s,
        Err(e) => {
            fail(MengerError::Json(e));
            return std::ptr::null_mut();
        }
    };
    match generate(&spec) {
        Ok(inner) => Box::into_raw(Box::new(MengerMeasure { inner })),
        Err(e) => {
            fail(e);
            std::ptr::null_mut()
        }
    }
}

/// Releases a measure handle. NULL is a no-op.
///
/// # Safety
/// `handle` must come from a `menger_measure_*` constructor and must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn menger_measure_free(handle: *mut MengerMeasure) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Releases a string returned by this library.
///
/// # Safety
/// `ptr` must come from a menger call that allocates a string.
#[no_mangle]
pub unsafe extern "C" fn menger_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(CString::from_raw(ptr));
    }
}

/// Number of points in the measure; 0 for NULL.
///
/// # Safety
/// `handle` must be a live measure handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn menger_measure_len(handle: *const MengerMeasure) -> usize {
    measure_ref(handle).map_or(0, |m| m.len())
}

/// Total mass; NaN for NULL.
///
/// # Safety
/// `handle` must be a live measure handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn menger_measure_mass(handle: *const MengerMeasure) -> f64 {
    measure_ref(handle).map_or(f64::NAN, |m| m.mass())
}

/// Exact integral Menger curvature with integrand tag 1 (`K1`) or 2 (`K2`)
/// and exponent `p`.
///
/// # Safety
/// `handle` must be a live measure handle; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn menger_integral_curvature(
    handle: *const MengerMeasure,
    integrand_tag: u32,
    p: f64,
    out_value: *mut f64,
) -> MengerStatus {
    let Some(mu) = measure_ref(handle) else {
        return fail_msg(MengerStatus::NullPointer, "null measure handle");
    };
    if out_value.is_null() {
        return fail_msg(MengerStatus::NullPointer, "null output pointer");
    }
    let spec = match integrand(integrand_tag, p) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match integral_curvature_exact(mu, spec) {
        Ok(report) => {
            *out_value = report.value;
            MengerStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Monte Carlo estimator of the integral curvature; fills the estimate and
/// its standard error. Deterministic for a fixed seed.
///
/// # Safety
/// `handle` must be a live measure handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn menger_monte_carlo_curvature(
    handle: *const MengerMeasure,
    integrand_tag: u32,
    p: f64,
    samples: u64,
    seed: u64,
    out_value: *mut f64,
    out_stderr: *mut f64,
) -> MengerStatus {
    let Some(mu) = measure_ref(handle) else {
        return fail_msg(MengerStatus::NullPointer, "null measure handle");
    };
    if out_value.is_null() || out_stderr.is_null() {
        return fail_msg(MengerStatus::NullPointer, "null output pointer");
    }
    let spec = match integrand(integrand_tag, p) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match monte_carlo_curvature(mu, spec, None, samples, seed) {
        Ok(report) => {
            *out_value = report.value;
            *out_stderr = report.stderr;
            MengerStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Pointwise curvature at `x` and scale `r`.
///
/// # Safety
/// `x` must point to `ambient_dim` doubles; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn menger_pointwise_curvature(
    handle: *const MengerMeasure,
    x: *const f64,
    r: f64,
    integrand_tag: u32,
    p: f64,
    out_value: *mut f64,
) -> MengerStatus {
    let Some(mu) = measure_ref(handle) else {
        return fail_msg(MengerStatus::NullPointer, "null measure handle");
    };
    if x.is_null() || out_value.is_null() {
        return fail_msg(MengerStatus::NullPointer, "null pointer argument");
    }
    let spec = match integrand(integrand_tag, p) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let x = std::slice::from_raw_parts(x, mu.ambient_dim());
    match pointwise_curvature(mu, x, spec, r) {
        Ok(report) => {
            *out_value = report.value;
            MengerStatus::Ok
        }
        Err(e) => fail(e),
    }
}

unsafe fn beta_common(
    handle: *const MengerMeasure,
    x: *const f64,
    r: f64,
    centered: bool,
    out_value: *mut f64,
) -> MengerStatus {
    let Some(mu) = measure_ref(handle) else {
        return fail_msg(MengerStatus::NullPointer, "null measure handle");
    };
    if x.is_null() || out_value.is_null() {
        return fail_msg(MengerStatus::NullPointer, "null pointer argument");
    }
    let x = std::slice::from_raw_parts(x, mu.ambient_dim());
    let result = if centered {
        centered_beta2(mu, x, r)
    } else {
        beta2(mu, x, r)
    };
    match result {
        Ok(BetaResult::Fit(fit)) => {
            *out_value = fit.value;
            MengerStatus::Ok
        }
        Ok(BetaResult::Insufficient { points_in_ball }) => fail_msg(
            MengerStatus::InsufficientData,
            &format!("only {points_in_ball} points in the ball"),
        ),
        Err(e) => fail(e),
    }
}

/// Exact Jones `beta_2(x, r)`.
///
/// # Safety
/// `x` must point to `ambient_dim` doubles; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn menger_beta2(
    handle: *const MengerMeasure,
    x: *const f64,
    r: f64,
    out_value: *mut f64,
) -> MengerStatus {
    beta_common(handle, x, r, false, out_value)
}

/// Exact centered `beta^_2(x, r)` (plane constrained through `x`).
///
/// # Safety
/// `x` must point to `ambient_dim` doubles; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn menger_centered_beta2(
    handle: *const MengerMeasure,
    x: *const f64,
    r: f64,
    out_value: *mut f64,
) -> MengerStatus {
    beta_common(handle, x, r, true, out_value)
}

/// Multiscale beta profile on the geometric grid `r_j = ratio^j top_radius`,
/// `j = 0..count-1`, returned as a JSON document (center, radii, values,
/// flags, multiscale sum). Free the string with [`menger_string_free`].
///
/// # Safety
/// `x` must point to `ambient_dim` doubles; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn menger_multiscale_beta_sum(
    handle: *const MengerMeasure,
    x: *const f64,
    top_radius: f64,
    ratio: f64,
    count: usize,
    centered: bool,
    p: f64,
    out_json: *mut *mut c_char,
) -> MengerStatus {
    let Some(mu) = measure_ref(handle) else {
        return fail_msg(MengerStatus::NullPointer, "null measure handle");
    };
    if x.is_null() || out_json.is_null() {
        return fail_msg(MengerStatus::NullPointer, "null pointer argument");
    }
    let grid = match ScaleGrid::new(top_radius, ratio, count) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let x = std::slice::from_raw_parts(x, mu.ambient_dim());
    match multiscale_beta_sum(mu, x, &grid, centered, p) {
        Ok(profile) => write_json_out(&profile, out_json),
        Err(e) => fail(e),
    }
}
