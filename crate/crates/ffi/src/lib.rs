//! C ABI over the `tvd` library.
//!
//! Matrices cross the boundary as opaque [`TvdMatrix`] handles. Every fallible
//! call returns a [`TvdStatus`]; on failure a message is kept per thread and
//! can be read with [`tvd_last_error_message`]. Handles returned through an
//! out-pointer are owned by the caller and must be released with
//! [`tvd_matrix_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tvd::{ImageMatrix, SignalKind, SolverConfig, TvError};

/// Opaque row-major matrix of doubles.
pub struct TvdMatrix {
    inner: ImageMatrix,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TvdStatus {
    Ok = 0,
    Argument = 1,
    Shape = 2,
    /// The solver stopped early. When a best iterate exists it is still
    /// returned through the output handle.
    Convergence = 3,
    Io = 4,
    Csv = 5,
    Json = 6,
    NullPointer = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TvdSignal {
    Two = 0,
    Four = 1,
    Worst = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TvdSolverConfig {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub bisect_tol: f64,
    pub max_bisect: usize,
}

impl From<TvdSolverConfig> for SolverConfig {
    fn from(c: TvdSolverConfig) -> Self {
        SolverConfig { max_iters: c.max_iters, rel_tol: c.rel_tol, bisect_tol: c.bisect_tol, max_bisect: c.max_bisect }
    }
}

impl From<SolverConfig> for TvdSolverConfig {
    fn from(c: SolverConfig) -> Self {
        TvdSolverConfig { max_iters: c.max_iters, rel_tol: c.rel_tol, bisect_tol: c.bisect_tol, max_bisect: c.max_bisect }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &TvError) -> TvdStatus {
    match err {
        TvError::Argument(_) => TvdStatus::Argument,
        TvError::Shape(_) => TvdStatus::Shape,
        TvError::Convergence { .. } => TvdStatus::Convergence,
        TvError::Io { .. } => TvdStatus::Io,
        TvError::Csv { .. } => TvdStatus::Csv,
        TvError::Json(_) => TvdStatus::Json,
    }
}

struct Failure {
    status: TvdStatus,
    message: String,
    best: Option<ImageMatrix>,
}

impl From<TvError> for Failure {
    fn from(err: TvError) -> Self {
        let status = status_of(&err);
        let message = err.to_string();
        let best = match err {
            TvError::Convergence { best, .. } => best.map(|b| *b),
            _ => None,
        };
        Failure { status, message, best }
    }
}

fn null_pointer(name: &str) -> Failure {
    Failure { status: TvdStatus::NullPointer, message: format!("{name} is null"), best: None }
}

/// Runs `f`, records any error, and converts panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TvdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            clear_last_error();
            TvdStatus::Ok
        }
        Ok(Err(fail)) => {
            set_last_error(fail.message);
            fail.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            TvdStatus::Panic
        }
    }
}

/// Same as [`guard`], writing a fresh handle to `out` on success and the best
/// iterate (when any) on convergence failure.
fn guard_matrix(out: *mut *mut TvdMatrix, f: impl FnOnce() -> Result<ImageMatrix, Failure>) -> TvdStatus {
    if out.is_null() {
        set_last_error("out is null".into());
        return TvdStatus::NullPointer;
    }
    unsafe { *out = ptr::null_mut() };
    guard(|| match f() {
        Ok(m) => {
            unsafe { *out = into_handle(m) };
            Ok(())
        }
        Err(mut fail) => {
            if let Some(best) = fail.best.take() {
                unsafe { *out = into_handle(best) };
            }
            Err(fail)
        }
    })
}

fn into_handle(m: ImageMatrix) -> *mut TvdMatrix {
    Box::into_raw(Box::new(TvdMatrix { inner: m }))
}

unsafe fn matrix_ref<'a>(m: *const TvdMatrix, name: &str) -> Result<&'a ImageMatrix, Failure> {
    unsafe { m.as_ref() }.map(|m| &m.inner).ok_or_else(|| null_pointer(name))
}

unsafe fn config_or_default(cfg: *const TvdSolverConfig) -> SolverConfig {
    unsafe { cfg.as_ref() }.map_or_else(SolverConfig::default, |c| (*c).into())
}

unsafe fn path_arg(path: *const c_char) -> Result<String, Failure> {
    if path.is_null() {
        return Err(null_pointer("path"));
    }
    unsafe { CStr::from_ptr(path) }.to_str().map(str::to_owned).map_err(|_| Failure {
        status: TvdStatus::Argument,
        message: "path is not valid UTF-8".into(),
        best: None,
    })
}

/// Message for the last failed call on this thread, or null after a
/// successful one. The pointer stays valid until the next call on this
/// thread.
#[no_mangle]
pub extern "C" fn tvd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn tvd_solver_config_default() -> TvdSolverConfig {
    SolverConfig::default().into()
}

/// Copies `rows*cols` row-major values from `data` into a new matrix.
///
/// # Safety
/// `data` must point to `rows*cols` readable doubles and `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tvd_matrix_new(rows: usize, cols: usize, data: *const f64, out: *mut *mut TvdMatrix) -> TvdStatus {
    guard_matrix(out, || {
        if data.is_null() {
            return Err(null_pointer("data"));
        }
        let len = rows.checked_mul(cols).ok_or_else(|| Failure::from(TvError::Argument("rows*cols overflows".into())))?;
        let values = unsafe { std::slice::from_raw_parts(data, len) }.to_vec();
        Ok(ImageMatrix::new(rows, cols, values)?)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `m` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tvd_matrix_free(m: *mut TvdMatrix) {
    if !m.is_null() {
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Row count, or 0 for null.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tvd_matrix_rows(m: *const TvdMatrix) -> usize {
    unsafe { m.as_ref() }.map_or(0, |m| m.inner.rows())
}

/// Column count, or 0 for null.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tvd_matrix_cols(m: *const TvdMatrix) -> usize {
    unsafe { m.as_ref() }.map_or(0, |m| m.inner.cols())
}

/// Copies the row-major values into `buf`, which must hold exactly
/// `rows*cols` doubles.
///
/// # Safety
/// `m` must be a live handle and `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tvd_matrix_copy_data(m: *const TvdMatrix, buf: *mut f64, len: usize) -> TvdStatus {
    guard(|| {
        let m = unsafe { matrix_ref(m, "matrix") }?;
        if buf.is_null() {
            return Err(null_pointer("buf"));
        }
        if len != m.len() {
            return Err(TvError::Argument(format!("buffer holds {len} values, matrix has {}", m.len())).into());
        }
        unsafe { std::slice::from_raw_parts_mut(buf, len) }.copy_from_slice(m.values());
        Ok(())
    })
}

/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tvd_matrix_read_csv(path: *const c_char, out: *mut *mut TvdMatrix) -> TvdStatus {
    guard_matrix(out, || {
        let path = unsafe { path_arg(path) }?;
        Ok(ImageMatrix::read_csv(path)?)
    })
}

/// # Safety
/// `m` must be a live handle and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tvd_matrix_write_csv(m: *const TvdMatrix, path: *const c_char) -> TvdStatus {
    guard(|| {
        let m = unsafe { matrix_ref(m, "matrix") }?;
        let path = unsafe { path_arg(path) }?;
        Ok(m.write_csv(path)?)
    })
}

/// Sum of absolute differences over all grid edges.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tvd_tv(m: *const TvdMatrix, out: *mut f64) -> TvdStatus {
    guard(|| {
        let m = unsafe { matrix_ref(m, "matrix") }?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null_pointer("out"))?;
        *out = tvd::tv(m);
        Ok(())
    })
}

/// Synthetic `n×n` signal.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tvd_make_signal(kind: TvdSignal, n: usize, out: *mut *mut TvdMatrix) -> TvdStatus {
    guard_matrix(out, || {
        let kind = match kind {
            TvdSignal::Two => SignalKind::Two,
            TvdSignal::Four => SignalKind::Four,
            TvdSignal::Worst => SignalKind::Worst,
        };
        Ok(tvd::make_signal(&kind.at(n))?)
    })
}

/// Minimizer of `‖y − θ‖² + lambda·tv(θ)`. A null `cfg` uses the defaults.
///
/// # Safety
/// `y` must be a live handle, `cfg` null or valid, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tvd_denoise_penalized(
    y: *const TvdMatrix,
    lambda: f64,
    cfg: *const TvdSolverConfig,
    out: *mut *mut TvdMatrix,
) -> TvdStatus {
    guard_matrix(out, || {
        let y = unsafe { matrix_ref(y, "y") }?;
        Ok(tvd::denoise_penalized(y, lambda, &unsafe { config_or_default(cfg) })?.estimate)
    })
}

/// Euclidean projection of `y` onto `{θ : tv(θ) ≤ budget}`.
///
/// # Safety
/// `y` must be a live handle, `cfg` null or valid, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tvd_project_tv_ball(
    y: *const TvdMatrix,
    budget: f64,
    cfg: *const TvdSolverConfig,
    out: *mut *mut TvdMatrix,
) -> TvdStatus {
    guard_matrix(out, || {
        let y = unsafe { matrix_ref(y, "y") }?;
        Ok(tvd::project_tv_ball(y, budget, &unsafe { config_or_default(cfg) })?.estimate)
    })
}

/// Noise-level estimate used by the tuning-free estimator.
///
/// # Safety
/// `y` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tvd_sigma_hat(y: *const TvdMatrix, out: *mut f64) -> TvdStatus {
    guard(|| {
        let y = unsafe { matrix_ref(y, "y") }?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null_pointer("out"))?;
        *out = tvd::sigma_hat(y)?;
        Ok(())
    })
}

/// Tuning-free estimate for a square `y`. `sigma_hat` may be null.
///
/// # Safety
/// `y` must be a live handle, `cfg` and `sigma_hat` null or valid, `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tvd_denoise_notuning(
    y: *const TvdMatrix,
    cfg: *const TvdSolverConfig,
    out: *mut *mut TvdMatrix,
    sigma_hat: *mut f64,
) -> TvdStatus {
    guard_matrix(out, || {
        let y = unsafe { matrix_ref(y, "y") }?;
        let r = tvd::denoise_notuning(y, &unsafe { config_or_default(cfg) })?;
        if let Some(s) = unsafe { sigma_hat.as_mut() } {
            *s = r.sigma_hat;
        }
        Ok(r.estimate)
    })
}
