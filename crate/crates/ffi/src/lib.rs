//! C interface. Points and verdicts are opaque handles owned by the caller
//! and released with their `_free` functions. Every fallible call returns a
//! [`PdgStatus`]; the message of the last failure on the calling thread is
//! available from [`pdg_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pedigree_core::io::parse_point_file;
use pedigree_core::oracle::oracle_membership;
use pedigree_core::rational::parse;
use pedigree_core::{check_membership, CharVector, Error, MembershipOptions, Verdict};

/// Skip the MCF when a cheap sufficient condition for membership holds.
pub const PDG_CHECK_SHORTCUTS: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Structural = 4,
    Precondition = 5,
    Resource = 6,
    Invariant = 7,
    Panic = 8,
}

pub struct PdgPoint {
    x: CharVector,
}

pub struct PdgVerdict {
    verdict: Verdict,
    headline: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: PdgStatus, msg: impl Into<String>) -> PdgStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> PdgStatus {
    let status = match e {
        Error::Structural(_) => PdgStatus::Structural,
        Error::Precondition(_) => PdgStatus::Precondition,
        Error::Resource(_) => PdgStatus::Resource,
        Error::Parse(_) => PdgStatus::Parse,
        Error::Invariant(_) => PdgStatus::Invariant,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> PdgStatus) -> PdgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(PdgStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, PdgStatus> {
    if s.is_null() {
        return Err(fail(PdgStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(PdgStatus::InvalidUtf8, "string is not UTF-8"))
}

fn boxed_point(out: *mut *mut PdgPoint, x: CharVector) -> PdgStatus {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(PdgPoint { x })) };
    PdgStatus::Ok
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn pdg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn pdg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Reads a point from JSON text: `{"n": 5, "coords": ["0", "1/3", ...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pdg_point_from_json(json: *const c_char, out: *mut *mut PdgPoint) -> PdgStatus {
    guard(|| {
        if out.is_null() {
            return fail(PdgStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_point_file(text).and_then(|f| f.to_point()) {
            Ok(x) => boxed_point(out, x),
            Err(e) => from_error(e),
        }
    })
}

/// Builds a point for `n` cities from `len` rational strings such as "3/8".
///
/// # Safety
/// `coords` must point to `len` NUL-terminated strings and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pdg_point_new(
    n: usize,
    coords: *const *const c_char,
    len: usize,
    out: *mut *mut PdgPoint,
) -> PdgStatus {
    guard(|| {
        if out.is_null() || (coords.is_null() && len > 0) {
            return fail(PdgStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let mut values = Vec::with_capacity(len);
        for i in 0..len {
            let s = match read_str(*coords.add(i)) {
                Ok(s) => s,
                Err(st) => return st,
            };
            match parse(s) {
                Ok(v) => values.push(v),
                Err(e) => return from_error(e),
            }
        }
        match CharVector::from_any(n, values) {
            Ok(x) => boxed_point(out, x),
            Err(e) => from_error(e),
        }
    })
}

/// Number of cities of the point, or 0 for NULL.
///
/// # Safety
/// `point` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pdg_point_n(point: *const PdgPoint) -> usize {
    point.as_ref().map_or(0, |p| p.x.n())
}

/// # Safety
/// `point` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pdg_point_free(point: *mut PdgPoint) {
    if !point.is_null() {
        drop(Box::from_raw(point));
    }
}

/// Decides membership. `flags` is a bit set of `PDG_CHECK_*` values.
///
/// # Safety
/// `point` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pdg_check(point: *const PdgPoint, flags: u32, out: *mut *mut PdgVerdict) -> PdgStatus {
    guard(|| {
        if out.is_null() {
            return fail(PdgStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let Some(p) = point.as_ref() else {
            return fail(PdgStatus::NullPointer, "null point");
        };
        let opts = MembershipOptions { shortcuts: flags & PDG_CHECK_SHORTCUTS != 0, ..Default::default() };
        match check_membership(&p.x, &opts) {
            Ok(verdict) => {
                let headline = CString::new(verdict.headline()).expect("headline has no NUL");
                *out = Box::into_raw(Box::new(PdgVerdict { verdict, headline }));
                PdgStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Membership by enumerating every pedigree; only for n <= 8.
///
/// # Safety
/// `point` must be a live handle and `member` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pdg_oracle_check(point: *const PdgPoint, member: *mut bool) -> PdgStatus {
    guard(|| {
        if member.is_null() {
            return fail(PdgStatus::NullPointer, "null output pointer");
        }
        let Some(p) = point.as_ref() else {
            return fail(PdgStatus::NullPointer, "null point");
        };
        match oracle_membership(&p.x) {
            Ok(v) => {
                *member = v.member;
                PdgStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `verdict` must be a live handle and `member` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pdg_verdict_is_member(verdict: *const PdgVerdict, member: *mut bool) -> PdgStatus {
    guard(|| match (verdict.as_ref(), member.is_null()) {
        (Some(v), false) => {
            *member = v.verdict.member;
            PdgStatus::Ok
        }
        _ => fail(PdgStatus::NullPointer, "null argument"),
    })
}

/// Stage at which the point was rejected, or the violated block for points
/// outside the relaxation; 0 for members.
///
/// # Safety
/// `verdict` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pdg_verdict_failure_stage(verdict: *const PdgVerdict) -> usize {
    verdict.as_ref().and_then(|v| v.verdict.failure.as_ref()).map_or(0, |f| f.k)
}

/// One-line summary such as "NOT MEMBER (stage 5, ...)". Owned by the
/// verdict; NULL for a NULL handle.
///
/// # Safety
/// `verdict` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pdg_verdict_headline(verdict: *const PdgVerdict) -> *const c_char {
    verdict.as_ref().map_or(ptr::null(), |v| v.headline.as_ptr())
}

/// # Safety
/// `verdict` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pdg_verdict_free(verdict: *mut PdgVerdict) {
    if !verdict.is_null() {
        drop(Box::from_raw(verdict));
    }
}
