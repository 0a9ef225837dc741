//! C ABI over `feasilab`.
//!
//! Conventions: every fallible function returns an [`FlStatus`]; results go
//! through out-pointers. Objects are opaque handles owned by the caller and
//! released with the matching `*_free`. After a non-`Ok` status,
//! [`fl_last_error`] describes the failure on the calling thread. Strings
//! returned by the library are freed with [`fl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use feasilab::dynamics::{run_ap, RunOptions, TerminalStatus, Trace};
use feasilab::metrics::{aw_gap, make_couple, Couple, CoupleOptions, GapKind, GapSampler};
use feasilab::regularity::{contraction_factor, modulus_of_convexity};
use feasilab::scenarios::{run_scenario, Overrides};
use feasilab::{ConvexSet, Error, Point, SetDescription};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed JSON, unknown scenario, bad argument or set description.
    InvalidInput = 2,
    DimensionMismatch = 3,
    /// An iterative routine did not settle within its budget.
    NonConvergent = 4,
    Unbounded = 5,
    /// A numerical self-check or a precondition failed.
    ValidationFailed = 6,
    Io = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 8,
}

/// Opaque closed convex set.
pub struct FlSet(ConvexSet);

/// Opaque couple `(A, B)` with its displacement vector and nearest sets.
pub struct FlCouple(Couple);

/// Opaque alternating-projection trace.
pub struct FlTrace(Trace);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FlStatus {
    match e {
        Error::DimensionMismatch { .. } => FlStatus::DimensionMismatch,
        Error::Unbounded => FlStatus::Unbounded,
        Error::Io(_) => FlStatus::Io,
        e if e.is_numeric() => FlStatus::NonConvergent,
        e if e.is_config() => FlStatus::InvalidInput,
        _ => FlStatus::ValidationFailed,
    }
}

/// Internal failure: status plus message.
struct Fail(FlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(FlStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FlStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            FlStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(FlStatus::InvalidInput, format!("{what}: {e}")))
}

unsafe fn point_arg(p: *const f64, dim: usize, what: &str) -> Result<Point, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(Point::new(std::slice::from_raw_parts(p, dim).to_vec()))
}

unsafe fn write_point(p: &Point, dst: *mut f64, dim: usize) -> Result<(), Fail> {
    if dst.is_null() {
        return Err(null("output buffer"));
    }
    if dim != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: dim,
        }
        .into());
    }
    std::slice::from_raw_parts_mut(dst, dim).copy_from_slice(p);
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Fail(FlStatus::ValidationFailed, e.to_string()))
}

/// Message for the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a set from its JSON description, e.g.
/// `{"type":"ball","center":[0,0],"radius":1}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_set` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fl_set_from_json(
    json: *const c_char,
    out_set: *mut *mut FlSet,
) -> FlStatus {
    guard(|| {
        let json = str_arg(json, "json")?;
        let dst = out(out_set, "out_set")?;
        let desc: SetDescription =
            serde_json::from_str(json).map_err(|e| Fail(FlStatus::InvalidInput, e.to_string()))?;
        *dst = Box::into_raw(Box::new(FlSet(desc.build()?)));
        Ok(())
    })
}

/// # Safety
/// `set` must come from [`fl_set_from_json`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fl_set_free(set: *mut FlSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Ambient dimension, or 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_set_dim(set: *const FlSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.dim())
}

/// Nearest point of `set` to `x`, written to `out_point` (both of length `dim`).
///
/// # Safety
/// Pointers must be valid for `dim` doubles; `set` a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_set_project(
    set: *const FlSet,
    x: *const f64,
    dim: usize,
    out_point: *mut f64,
) -> FlStatus {
    guard(|| {
        let s = as_ref(set, "set")?;
        let p = s.0.proj(&point_arg(x, dim, "x")?)?;
        write_point(&p, out_point, dim)
    })
}

/// # Safety
/// `x` must be valid for `dim` doubles; `set` a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_set_dist(
    set: *const FlSet,
    x: *const f64,
    dim: usize,
    out_dist: *mut f64,
) -> FlStatus {
    guard(|| {
        let s = as_ref(set, "set")?;
        *out(out_dist, "out_dist")? = s.0.dist(&point_arg(x, dim, "x")?)?;
        Ok(())
    })
}

/// # Safety
/// `x` must be valid for `dim` doubles; `set` a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_set_contains(
    set: *const FlSet,
    x: *const f64,
    dim: usize,
    tol: f64,
    out_inside: *mut bool,
) -> FlStatus {
    guard(|| {
        let s = as_ref(set, "set")?;
        *out(out_inside, "out_inside")? = s.0.contains(&point_arg(x, dim, "x")?, tol)?;
        Ok(())
    })
}

/// Localized Hausdorff gap `h_N(A, B)`. `out_exact` is set when the value is
/// exact rather than a sampled lower bound.
///
/// # Safety
/// `a`, `b` must be live handles; out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn fl_aw_gap(
    a: *const FlSet,
    b: *const FlSet,
    n: u32,
    samples: usize,
    seed: u64,
    out_gap: *mut f64,
    out_exact: *mut bool,
) -> FlStatus {
    guard(|| {
        let (a, b) = (as_ref(a, "a")?, as_ref(b, "b")?);
        let g = aw_gap(&a.0, &b.0, n, &GapSampler::boundary(samples, seed))?;
        *out(out_gap, "out_gap")? = g.value;
        if let Some(e) = out_exact.as_mut() {
            *e = g.kind == GapKind::Exact;
        }
        Ok(())
    })
}

/// Builds the couple `(A, B)`: displacement vector and nearest sets.
/// `e_analytic` (nullable) supplies the nearest set `E` in closed form; it
/// is checked against the couple's identities. Without it `E` is resolved
/// by Dykstra's algorithm, which is slow when `A` and `B − v` only touch
/// tangentially.
///
/// # Safety
/// `a`, `b` must be live handles, `e_analytic` null or live; `out_couple` valid.
#[no_mangle]
pub unsafe extern "C" fn fl_couple_new(
    a: *const FlSet,
    b: *const FlSet,
    e_analytic: *const FlSet,
    out_couple: *mut *mut FlCouple,
) -> FlStatus {
    guard(|| {
        let (a, b) = (as_ref(a, "a")?, as_ref(b, "b")?);
        let dst = out(out_couple, "out_couple")?;
        let opts = CoupleOptions {
            e_analytic: e_analytic.as_ref().map(|e| e.0.clone()),
            ..CoupleOptions::default()
        };
        let c = make_couple(a.0.clone(), b.0.clone(), &opts)?;
        *dst = Box::into_raw(Box::new(FlCouple(c)));
        Ok(())
    })
}

/// # Safety
/// `couple` must come from [`fl_couple_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fl_couple_free(couple: *mut FlCouple) {
    if !couple.is_null() {
        drop(Box::from_raw(couple));
    }
}

/// # Safety
/// `couple` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_couple_dim(couple: *const FlCouple) -> usize {
    couple.as_ref().map_or(0, |c| c.0.dim())
}

/// Displacement vector `v` (length `dim`) and `d(A, B) = ‖v‖`.
///
/// # Safety
/// `out_v` must be valid for `dim` doubles; `out_dist` may be null.
#[no_mangle]
pub unsafe extern "C" fn fl_couple_displacement(
    couple: *const FlCouple,
    out_v: *mut f64,
    dim: usize,
    out_dist: *mut f64,
) -> FlStatus {
    guard(|| {
        let c = as_ref(couple, "couple")?;
        write_point(c.0.v(), out_v, dim)?;
        if let Some(d) = out_dist.as_mut() {
            *d = c.0.d_ab();
        }
        Ok(())
    })
}

/// Distance from `x` to `E`, the points of `A` nearest to `B`.
///
/// # Safety
/// `x` must be valid for `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn fl_couple_dist_to_e(
    couple: *const FlCouple,
    x: *const f64,
    dim: usize,
    out_dist: *mut f64,
) -> FlStatus {
    guard(|| {
        let c = as_ref(couple, "couple")?;
        *out(out_dist, "out_dist")? = c.0.dist_to_e(&point_arg(x, dim, "x")?)?;
        Ok(())
    })
}

/// Alternating projections from `c0` for at most `cap` rounds.
///
/// # Safety
/// `c0` must be valid for `dim` doubles; `out_trace` valid.
#[no_mangle]
pub unsafe extern "C" fn fl_run_ap(
    couple: *const FlCouple,
    c0: *const f64,
    dim: usize,
    cap: u64,
    tol: f64,
    out_trace: *mut *mut FlTrace,
) -> FlStatus {
    guard(|| {
        let c = as_ref(couple, "couple")?;
        let dst = out(out_trace, "out_trace")?;
        let t = run_ap(&c.0, &point_arg(c0, dim, "c0")?, RunOptions { cap, tol })?;
        *dst = Box::into_raw(Box::new(FlTrace(t)));
        Ok(())
    })
}

/// # Safety
/// `trace` must come from [`fl_run_ap`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fl_trace_free(trace: *mut FlTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of recorded rounds, or 0 for a null handle.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_trace_len(trace: *const FlTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.0.records.len())
}

/// 0 converged, 1 iteration cap reached, 2 diverged; -1 for a null handle.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_trace_status(trace: *const FlTrace) -> i32 {
    trace.as_ref().map_or(-1, |t| match t.0.status {
        TerminalStatus::Converged => 0,
        TerminalStatus::CapReached => 1,
        TerminalStatus::DivergedDiagnostic => 2,
    })
}

/// Round `index`: the iterate in `A` (`out_a`), in `B` (`out_b`) and the
/// distance of the former to `E`. Any out-pointer may be null.
///
/// # Safety
/// Non-null buffers must be valid for `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn fl_trace_record(
    trace: *const FlTrace,
    index: usize,
    out_a: *mut f64,
    out_b: *mut f64,
    dim: usize,
    out_dist_e: *mut f64,
) -> FlStatus {
    guard(|| {
        let t = as_ref(trace, "trace")?;
        let r = t.0.records.get(index).ok_or_else(|| {
            Fail(
                FlStatus::InvalidInput,
                format!("index {index} out of range ({} records)", t.0.records.len()),
            )
        })?;
        if !out_a.is_null() {
            write_point(&r.a, out_a, dim)?;
        }
        if !out_b.is_null() {
            write_point(&r.b, out_b, dim)?;
        }
        if let Some(d) = out_dist_e.as_mut() {
            *d = r.dist_a_e;
        }
        Ok(())
    })
}

/// Writes the trace as CSV to `path`.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fl_trace_write_csv(
    trace: *const FlTrace,
    path: *const c_char,
) -> FlStatus {
    guard(|| {
        let t = as_ref(trace, "trace")?;
        let path = str_arg(path, "path")?;
        let f = std::fs::File::create(path).map_err(Error::from)?;
        t.0.write_csv(std::io::BufWriter::new(f))?;
        Ok(())
    })
}

/// Runs a bundled scenario, writing its artifacts under `out_dir`.
/// `iterations == 0` keeps the scenario's default. On success `out_report`
/// receives the JSON run report (free with [`fl_string_free`]); a scenario
/// whose expectations fail still returns `Ok` with `"passed": false`.
///
/// # Safety
/// String arguments must be NUL-terminated; `out_report` valid.
#[no_mangle]
pub unsafe extern "C" fn fl_run_scenario(
    name: *const c_char,
    out_dir: *const c_char,
    iterations: u64,
    out_report: *mut *mut c_char,
) -> FlStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let dir = str_arg(out_dir, "out_dir")?;
        let dst = out(out_report, "out_report")?;
        let overrides = Overrides {
            iterations: (iterations > 0).then_some(iterations),
            ..Overrides::default()
        };
        let report = run_scenario(name, &overrides, Path::new(dir))?;
        *dst = into_c_string(serde_json::to_string(&report).map_err(Error::from)?)?;
        Ok(())
    })
}

/// `η = √(1 − 1/K²)` for `K >= 1`.
///
/// # Safety
/// `out_eta` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fl_contraction_factor(k: f64, out_eta: *mut f64) -> FlStatus {
    guard(|| {
        *out(out_eta, "out_eta")? = contraction_factor(k)?;
        Ok(())
    })
}

/// Euclidean modulus of convexity on `[0, 2]`.
///
/// # Safety
/// `out_delta` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fl_modulus_of_convexity(eta: f64, out_delta: *mut f64) -> FlStatus {
    guard(|| {
        *out(out_delta, "out_delta")? = modulus_of_convexity(eta)?;
        Ok(())
    })
}
