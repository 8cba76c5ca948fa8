//! C ABI over the flagrock analyzer.
//!
//! Reports are opaque handles released with `flagrock_report_free`.
//! Every fallible call returns a `FlagrockStatus`; on failure the message
//! is available from `flagrock_last_error_message` on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use flagrock::cli::parse_weights;
use flagrock::report::Report;
use flagrock::rootsys::build_parabolic;
use flagrock::spectral::{analyze_structure, CaseLabel, Options, Provenance, Structure};
use flagrock::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlagrockStatus {
    Ok = 0,
    InvalidParameters = 2,
    Consistency = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    OutOfRange = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlagrockCase {
    First = 0,
    Second = 1,
    Degenerate = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlagrockVerdict {
    Undetermined = -1,
    NotMaximalHypoelliptic = 0,
    MaximalHypoelliptic = 1,
}

/// Opaque analysis report.
pub struct FlagrockReport {
    report: Report,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: FlagrockStatus, msg: impl Into<String>) -> FlagrockStatus {
    set_error(msg);
    status
}

fn guarded(f: impl FnOnce() -> FlagrockStatus) -> FlagrockStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(FlagrockStatus::Panic, "internal panic"),
    }
}

fn status_of(e: &Error) -> FlagrockStatus {
    match e {
        Error::InvalidParabolic { .. } | Error::InvalidForm(_) | Error::UnsupportedForm(_) => {
            FlagrockStatus::InvalidParameters
        }
        _ => FlagrockStatus::Consistency,
    }
}

/// Run the full analysis of `U(p,q) ⊃ U(p1) × U(p − p1, q)`.
///
/// `weights` is null for the default form, or a comma-separated list such
/// as `"sqrt2"` or `"3/2,2*sqrt2"`. On success `*out` receives a new report.
///
/// # Safety
/// `weights` must be null or a valid NUL-terminated string; `out` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flagrock_analyze(
    p: i64,
    q: i64,
    p1: i64,
    weights: *const c_char,
    out: *mut *mut FlagrockReport,
) -> FlagrockStatus {
    guarded(|| {
        if out.is_null() {
            return fail(FlagrockStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let weights = if weights.is_null() {
            None
        } else {
            let Ok(s) = CStr::from_ptr(weights).to_str() else {
                return fail(FlagrockStatus::InvalidUtf8, "weights are not UTF-8");
            };
            let tokens: Vec<String> = s.split(',').map(str::to_string).collect();
            match parse_weights(&tokens) {
                Ok(w) => Some(w),
                Err(m) => return fail(FlagrockStatus::InvalidParameters, m),
            }
        };
        let result = build_parabolic(p, q, p1)
            .and_then(|pd| Structure::build(&pd))
            .and_then(|st| analyze_structure(&st, weights.as_ref(), Options::default()));
        match result {
            Ok(a) => {
                let report = Report::from_analysis(&a, None);
                *out = Box::into_raw(Box::new(FlagrockReport { report }));
                FlagrockStatus::Ok
            }
            Err(e) => {
                let msg = match e.invariant() {
                    Some(name) => format!("invariant `{name}` violated: {e}"),
                    None => e.to_string(),
                };
                fail(status_of(&e), msg)
            }
        }
    })
}

/// # Safety
/// `report` must be null or a handle from `flagrock_analyze` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn flagrock_report_free(report: *mut FlagrockReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

unsafe fn with_report<T>(
    report: *const FlagrockReport,
    out: *mut T,
    f: impl FnOnce(&Report) -> Result<T, FlagrockStatus>,
) -> FlagrockStatus {
    guarded(|| {
        if report.is_null() || out.is_null() {
            return fail(FlagrockStatus::NullPointer, "null argument");
        }
        match f(&(*report).report) {
            Ok(v) => {
                *out = v;
                FlagrockStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// # Safety
/// `report` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flagrock_report_case(report: *const FlagrockReport, out: *mut FlagrockCase) -> FlagrockStatus {
    with_report(report, out, |r| {
        Ok(match r.case {
            CaseLabel::First => FlagrockCase::First,
            CaseLabel::Second => FlagrockCase::Second,
            CaseLabel::Degenerate => FlagrockCase::Degenerate,
        })
    })
}

/// # Safety
/// `report` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flagrock_report_rockland_fails(report: *const FlagrockReport, out: *mut bool) -> FlagrockStatus {
    with_report(report, out, |r| Ok(r.verdict.rockland_fails))
}

/// # Safety
/// `report` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flagrock_report_verdict(
    report: *const FlagrockReport,
    out: *mut FlagrockVerdict,
) -> FlagrockStatus {
    with_report(report, out, |r| {
        Ok(match r.verdict.maximal_hypoelliptic {
            None => FlagrockVerdict::Undetermined,
            Some(false) => FlagrockVerdict::NotMaximalHypoelliptic,
            Some(true) => FlagrockVerdict::MaximalHypoelliptic,
        })
    })
}

/// # Safety
/// `report` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flagrock_report_witness_count(report: *const FlagrockReport, out: *mut usize) -> FlagrockStatus {
    with_report(report, out, |r| Ok(r.witnesses.len()))
}

/// Degree, residual and exactness of witness `index`.
///
/// # Safety
/// `report` must be a live handle; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn flagrock_report_witness(
    report: *const FlagrockReport,
    index: usize,
    degree: *mut usize,
    residual: *mut f64,
    exact: *mut bool,
) -> FlagrockStatus {
    if residual.is_null() || exact.is_null() {
        return fail(FlagrockStatus::NullPointer, "null argument");
    }
    with_report(report, degree, |r| {
        let w = r
            .witnesses
            .get(index)
            .ok_or_else(|| fail(FlagrockStatus::OutOfRange, format!("no witness {index}")))?;
        *residual = w.residual;
        *exact = w.provenance == Provenance::Exact;
        Ok(w.degree)
    })
}

/// The report as JSON; release with `flagrock_string_free`.
///
/// # Safety
/// `report` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flagrock_report_json(report: *const FlagrockReport, out: *mut *mut c_char) -> FlagrockStatus {
    with_report(report, out, |r| {
        CString::new(r.to_json())
            .map(CString::into_raw)
            .map_err(|_| fail(FlagrockStatus::Panic, "report contains NUL"))
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn flagrock_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn flagrock_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn flagrock_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version literal"),
    };
    VERSION.as_ptr()
}
