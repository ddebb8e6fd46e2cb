//! C interface to loccw.
//!
//! Sets are opaque handles created by `loccw_set_from_json` or
//! `loccw_set_family` and released with `loccw_set_free`. Every fallible call
//! returns a `LoccwStatus`; on failure `loccw_last_error_message` describes the
//! error for the calling thread. Strings returned through out-parameters are
//! owned by the caller and released with `loccw_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use loccw_core::constructions::{kmin_table, XiVariant};
use loccw_core::detector::build_mixed_detector;
use loccw_core::report::{analyze, family_input, Input, DEFAULT_GAMMA_TOL};
use loccw_core::setfile::parse_set_json;
use loccw_core::weyl::{criterion_verdict, Verdict};
use loccw_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoccwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    Internal = 5,
}

/// Opaque set handle.
pub struct LoccwMesSet {
    input: Input,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
    Ok(v) => v,
    Err(_) => panic!("version string contains a nul byte"),
};

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> LoccwStatus {
    match err {
        Error::Parse { .. } | Error::Json(_) => LoccwStatus::Parse,
        Error::Consistency(_) => LoccwStatus::Internal,
        _ => LoccwStatus::InvalidArgument,
    }
}

struct Failure(LoccwStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> LoccwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LoccwStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LoccwStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(LoccwStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(LoccwStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a>(set: *const LoccwMesSet) -> Result<&'a LoccwMesSet, Failure> {
    set.as_ref().ok_or_else(|| null("set handle"))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(LoccwStatus::Internal, "output contains a nul byte".into()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn loccw_version() -> *const c_char {
    VERSION.as_ptr()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next loccw call on the same thread.
#[no_mangle]
pub extern "C" fn loccw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a set in any of the JSON set formats.
///
/// # Safety
/// `json` must be a valid nul-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn loccw_set_from_json(json: *const c_char, out: *mut *mut LoccwMesSet) -> LoccwStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let set = parse_set_json(text)?;
        let boxed = Box::new(LoccwMesSet { input: Input::from_set(set, "ffi:json".into()) });
        write_out(out, Box::into_raw(boxed), "out")
    })
}

/// Builds a named family; `d` = 0 for families without a dimension parameter.
///
/// # Safety
/// `name` must be a valid nul-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn loccw_set_family(name: *const c_char, d: u32, out: *mut *mut LoccwMesSet) -> LoccwStatus {
    guard(|| {
        let name = read_str(name, "name")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let d = (d > 0).then_some(d as usize);
        let input = family_input(name, d, XiVariant::ExtraOnce)?;
        write_out(out, Box::into_raw(Box::new(LoccwMesSet { input })), "out")
    })
}

/// Releases a set handle; null is ignored.
///
/// # Safety
/// `set` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn loccw_set_free(set: *mut LoccwMesSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of members.
///
/// # Safety
/// `set` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn loccw_set_size(set: *const LoccwMesSet, out: *mut usize) -> LoccwStatus {
    guard(|| {
        let s = handle(set)?;
        write_out(out, s.input.descriptor.size, "out")
    })
}

/// Exact Weyl criterion; writes 1 for certified, 0 for inconclusive.
///
/// # Safety
/// `set` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn loccw_criterion_verdict(set: *const LoccwMesSet, out: *mut i32) -> LoccwStatus {
    guard(|| {
        let s = handle(set)?;
        let r = criterion_verdict(s.input.mes()?)?;
        write_out(out, i32::from(r.verdict == Verdict::CertifiedLoccIndistinguishable), "out")
    })
}

/// Full analysis report as JSON; release with `loccw_string_free`.
///
/// # Safety
/// `set` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn loccw_analyze_json(set: *const LoccwMesSet, out: *mut *mut c_char) -> LoccwStatus {
    guard(|| {
        let s = handle(set)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = analyze(&s.input, DEFAULT_GAMMA_TOL, false)?.to_json()?;
        write_out(out, into_c_string(json)?, "out")
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn loccw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Largest Schmidt coefficient of the detector for the weighted mixed family.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn loccw_mixed_detector_lambda1(d: u32, out: *mut f64) -> LoccwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let l = build_mixed_detector(d as usize)?.lambda1()?;
        write_out(out, l, "out")
    })
}

/// Smallest certified set size in local dimension `dim` (4 ≤ dim ≤ 64).
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn loccw_kmin(dim: u32, out: *mut u32) -> LoccwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !(4..=64).contains(&dim) {
            return Err(Failure(LoccwStatus::InvalidArgument, format!("dimension {dim} outside 4..=64")));
        }
        let row = kmin_table(dim as usize)?.pop().expect("table has a row per dimension");
        write_out(out, row.k_min as u32, "out")
    })
}
