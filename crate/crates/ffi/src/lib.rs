//! C ABI over `trilie`: opaque algebra and element handles, status codes and a
//! thread-local error message.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use trilie::calculus::{exp_growth_scan, NumericMatrix, Verdict};
use trilie::pbw::{PbwAlgebra, UEAElement};
use trilie::seminorm_lab::MatrixNorm;
use trilie::{catalog, LieAlgebra, LieError};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrilieStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    NotTriangular = 4,
    AlgebraMismatch = 5,
    Numeric = 6,
    Panic = 7,
}

/// Growth classification returned by [`trilie_growth_scan`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrilieGrowth {
    Polynomial = 0,
    Exponential = 1,
    Inconclusive = 2,
}

/// Lie algebra with its PBW ordering.
pub struct TrilieAlgebra {
    inner: Arc<PbwAlgebra>,
}

/// Element of the enveloping algebra in PBW normal form.
pub struct TrilieElement {
    inner: UEAElement,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: TrilieStatus, msg: impl Into<String>) -> TrilieStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> TrilieStatus) -> TrilieStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(TrilieStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, TrilieStatus> {
    if p.is_null() {
        return Err(fail(TrilieStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(TrilieStatus::InvalidUtf8, "string is not UTF-8"))
}

fn algebra_status(e: &LieError) -> TrilieStatus {
    match e {
        LieError::NotTriangular { .. } | LieError::IrrationalEigenvalues { .. } | LieError::NotSolvable(_) => TrilieStatus::NotTriangular,
        _ => TrilieStatus::InvalidInput,
    }
}

fn into_handle(lie: LieAlgebra, out: *mut *mut TrilieAlgebra) -> TrilieStatus {
    match PbwAlgebra::new(lie) {
        Ok(inner) => {
            // SAFETY: callers check `out` for null before reaching here.
            unsafe { *out = Box::into_raw(Box::new(TrilieAlgebra { inner })) };
            TrilieStatus::Ok
        }
        Err(e) => fail(TrilieStatus::InvalidInput, e.to_string()),
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn trilie_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses an algebra from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn trilie_algebra_from_json(json: *const c_char, out: *mut *mut TrilieAlgebra) -> TrilieStatus {
    guard(|| {
        if out.is_null() {
            return fail(TrilieStatus::NullPointer, "null output pointer");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match LieAlgebra::from_json(text) {
            Ok(lie) => into_handle(lie, out),
            Err(e) => fail(algebra_status(&e), e.to_string()),
        }
    })
}

/// Algebra by catalog name (`af1`, `heisenberg`, `e2`, `tri:3`, ...).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn trilie_algebra_from_catalog(name: *const c_char, out: *mut *mut TrilieAlgebra) -> TrilieStatus {
    guard(|| {
        if out.is_null() {
            return fail(TrilieStatus::NullPointer, "null output pointer");
        }
        let name = match read_str(name) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match catalog::algebra(name) {
            Some(lie) => into_handle(lie, out),
            None => fail(TrilieStatus::InvalidInput, format!("unknown catalog algebra `{name}`")),
        }
    })
}

/// # Safety
/// `alg` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn trilie_algebra_free(alg: *mut TrilieAlgebra) {
    if !alg.is_null() {
        drop(Box::from_raw(alg));
    }
}

/// Dimension of the algebra; 0 for NULL.
///
/// # Safety
/// `alg` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn trilie_algebra_dim(alg: *const TrilieAlgebra) -> usize {
    alg.as_ref().map_or(0, |a| a.inner.dim())
}

/// Writes whether the algebra is triangular; on `NotTriangular` the message names the witness.
///
/// # Safety
/// `alg` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn trilie_algebra_is_triangular(alg: *const TrilieAlgebra, out: *mut bool) -> TrilieStatus {
    guard(|| {
        let (Some(a), false) = (alg.as_ref(), out.is_null()) else {
            return fail(TrilieStatus::NullPointer, "null argument");
        };
        match a.inner.lie().triangular_flag() {
            Ok(_) => {
                *out = true;
                TrilieStatus::Ok
            }
            Err(e) => {
                *out = false;
                let status = algebra_status(&e);
                if status == TrilieStatus::NotTriangular {
                    set_error(e.to_string());
                    TrilieStatus::Ok
                } else {
                    fail(status, e.to_string())
                }
            }
        }
    })
}

/// Parses an element such as `3/2*e1^2*e3 - e2`; words are straightened.
///
/// # Safety
/// `alg` must be a live handle, `text` a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn trilie_element_parse(alg: *const TrilieAlgebra, text: *const c_char, out: *mut *mut TrilieElement) -> TrilieStatus {
    guard(|| {
        let (Some(a), false) = (alg.as_ref(), out.is_null()) else {
            return fail(TrilieStatus::NullPointer, "null argument");
        };
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match UEAElement::parse(&a.inner, text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(TrilieElement { inner }));
                TrilieStatus::Ok
            }
            Err(e) => fail(TrilieStatus::InvalidInput, e.to_string()),
        }
    })
}

/// Product `lhs * rhs` in PBW normal form.
///
/// # Safety
/// `lhs`, `rhs` must be live handles over the same algebra; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn trilie_element_mul(lhs: *const TrilieElement, rhs: *const TrilieElement, out: *mut *mut TrilieElement) -> TrilieStatus {
    guard(|| {
        let (Some(a), Some(b), false) = (lhs.as_ref(), rhs.as_ref(), out.is_null()) else {
            return fail(TrilieStatus::NullPointer, "null argument");
        };
        if !Arc::ptr_eq(a.inner.algebra(), b.inner.algebra()) && a.inner.algebra() != b.inner.algebra() {
            return fail(TrilieStatus::AlgebraMismatch, "elements belong to different algebras");
        }
        match a.inner.try_mul(&b.inner) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(TrilieElement { inner }));
                TrilieStatus::Ok
            }
            Err(e) => fail(TrilieStatus::InvalidInput, e.to_string()),
        }
    })
}

/// Text form of the element; release with [`trilie_string_free`]. NULL on a NULL handle.
///
/// # Safety
/// `e` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn trilie_element_to_string(e: *const TrilieElement) -> *mut c_char {
    e.as_ref().map_or(ptr::null_mut(), |e| CString::new(e.inner.to_string()).map_or(ptr::null_mut(), CString::into_raw))
}

/// # Safety
/// `e` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn trilie_element_free(e: *mut TrilieElement) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn trilie_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Growth scan of `||exp(isb)||` for a row-major `n x n` matrix.
///
/// # Safety
/// `entries` must point to `n * n` doubles; `alpha` and `verdict` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trilie_growth_scan(
    entries: *const f64,
    n: usize,
    s_max: f64,
    alpha: *mut f64,
    verdict: *mut TrilieGrowth,
) -> TrilieStatus {
    guard(|| {
        if entries.is_null() || alpha.is_null() || verdict.is_null() {
            return fail(TrilieStatus::NullPointer, "null argument");
        }
        if n == 0 || !s_max.is_finite() || s_max <= 0.0 {
            return fail(TrilieStatus::InvalidInput, "need n > 0 and a positive finite s_max");
        }
        let data = std::slice::from_raw_parts(entries, n * n);
        let b = NumericMatrix::from_row_slice(n, n, data);
        match exp_growth_scan(&b, s_max, 64, MatrixNorm::Operator2) {
            Ok(r) => {
                *alpha = r.alpha;
                *verdict = match r.verdict {
                    Verdict::Polynomial { .. } => TrilieGrowth::Polynomial,
                    Verdict::Exponential => TrilieGrowth::Exponential,
                    Verdict::Inconclusive => TrilieGrowth::Inconclusive,
                };
                TrilieStatus::Ok
            }
            Err(e) => fail(TrilieStatus::Numeric, e.to_string()),
        }
    })
}

/// Runs the command line with `args_json` (a JSON array of strings, without the program name).
/// Writes the exit code and the combined output, to be released with [`trilie_string_free`].
///
/// # Safety
/// `args_json` must be a NUL-terminated string; `code` and `output` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trilie_cli_run(args_json: *const c_char, code: *mut i32, output: *mut *mut c_char) -> TrilieStatus {
    guard(|| {
        if code.is_null() || output.is_null() {
            return fail(TrilieStatus::NullPointer, "null output pointer");
        }
        let text = match read_str(args_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let args: Vec<String> = match serde_json::from_str(text) {
            Ok(a) => a,
            Err(e) => return fail(TrilieStatus::InvalidInput, e.to_string()),
        };
        let out = trilie::cli::run(std::iter::once("trilie".to_string()).chain(args));
        *code = out.code;
        let body = if out.code == 0 { out.stdout } else { out.stderr };
        match CString::new(body) {
            Ok(c) => {
                *output = c.into_raw();
                TrilieStatus::Ok
            }
            Err(_) => fail(TrilieStatus::InvalidUtf8, "output contains NUL"),
        }
    })
}
