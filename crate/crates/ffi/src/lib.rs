//! C ABI over the braidscape library.
//!
//! Trees and certificates are opaque handles owned by the caller and freed
//! with the matching `*_free`. Every fallible call returns a [`BsStatus`];
//! the message of the last failure on the calling thread is available from
//! [`bs_last_error`]. Strings returned through out-pointers are freed with
//! [`bs_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use braidscape::error::Error;
use braidscape::planner::{plan_ordered, plan_unordered, validate_path, Configuration};
use braidscape::tc::{decide_tc, verify_certificate, TcCertificate, TcOutcome};
use braidscape::tree::Tree;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    NotApplicable = 4,
    LimitExceeded = 5,
    Internal = 6,
}

/// A planar tree.
pub struct BsTree(Tree);

/// A topological complexity certificate.
pub struct BsCertificate(TcCertificate);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let mut bytes = msg.into();
    bytes.retain(|&b| b != 0);
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(bytes).expect("nul bytes removed"));
}

fn status_of(e: &Error) -> BsStatus {
    match e {
        Error::CapExceeded { .. }
        | Error::SearchBudgetExceeded { .. }
        | Error::FlowDidNotSettle { .. }
        | Error::CoefficientOverflow => BsStatus::LimitExceeded,
        Error::SingularPairing(_) | Error::InvalidPath(_) => BsStatus::Internal,
        _ => BsStatus::InvalidInput,
    }
}

fn guard(body: impl FnOnce() -> Result<(), (BsStatus, String)>) -> BsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside braidscape");
            BsStatus::Internal
        }
    }
}

fn lib<T>(r: braidscape::error::Result<T>) -> Result<T, (BsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, (BsStatus, String)> {
    if p.is_null() {
        return Err((BsStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (BsStatus::InvalidUtf8, e.to_string()))
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, (BsStatus, String)> {
    p.as_ref().ok_or((BsStatus::NullPointer, "null handle".into()))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), (BsStatus, String)> {
    if out.is_null() {
        return Err((BsStatus::NullPointer, "null output pointer".into()));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), (BsStatus, String)> {
    let c = CString::new(s).map_err(|e| (BsStatus::Internal, e.to_string()))?;
    put(out, c.into_raw())
}

/// Message of the last failed call on this thread. Valid until the next
/// call on the same thread; empty if nothing has failed.
#[no_mangle]
pub extern "C" fn bs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn bs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a tree from its JSON description.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_tree_from_json(json: *const c_char, out: *mut *mut BsTree) -> BsStatus {
    guard(|| {
        let tree = lib(Tree::parse_json(text(json)?))?;
        put(out, Box::into_raw(Box::new(BsTree(tree))))
    })
}

/// # Safety
/// `tree` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bs_tree_free(tree: *mut BsTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Writes the tree subdivided for `n` points as JSON.
///
/// # Safety
/// `tree` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_tree_subdivided_json(tree: *const BsTree, n: usize, out: *mut *mut c_char) -> BsStatus {
    guard(|| put_string(out, deref(tree)?.0.subdivide_for(n).to_json()))
}

/// Decides the topological complexity of `n` points on the tree.
///
/// # Safety
/// `tree` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_tc_decide(tree: *const BsTree, n: usize, out: *mut *mut BsCertificate) -> BsStatus {
    guard(|| {
        let cert = lib(decide_tc(&deref(tree)?.0, n))?;
        put(out, Box::into_raw(Box::new(BsCertificate(cert))))
    })
}

/// Reads a certificate back from its JSON form.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_certificate_from_json(json: *const c_char, out: *mut *mut BsCertificate) -> BsStatus {
    guard(|| {
        let parsed = serde_json::from_str(text(json)?).map_err(|e| (BsStatus::InvalidInput, e.to_string()))?;
        let cert = lib(TcCertificate::from_json(&parsed))?;
        put(out, Box::into_raw(Box::new(BsCertificate(cert))))
    })
}

/// # Safety
/// `cert` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bs_certificate_free(cert: *mut BsCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// The certified value. Returns `NotApplicable` with the reason in
/// [`bs_last_error`] when no value was determined.
///
/// # Safety
/// `cert` must be a live handle and `value` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_certificate_value(cert: *const BsCertificate, value: *mut usize) -> BsStatus {
    guard(|| match &deref(cert)?.0.outcome {
        TcOutcome::Determined(d) => put(value, d.value),
        TcOutcome::NotApplicable { diagnostics, .. } => Err((BsStatus::NotApplicable, diagnostics.clone())),
    })
}

/// # Safety
/// `cert` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_certificate_to_json(cert: *const BsCertificate, out: *mut *mut c_char) -> BsStatus {
    guard(|| {
        let json = serde_json::to_string(&deref(cert)?.0.to_json()).map_err(|e| (BsStatus::Internal, e.to_string()))?;
        put_string(out, json)
    })
}

/// Rechecks a certificate independently; `passed` is set to 1 or 0.
///
/// # Safety
/// `cert` must be a live handle and `passed` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_certificate_verify(cert: *const BsCertificate, passed: *mut i32) -> BsStatus {
    guard(|| {
        let report = lib(verify_certificate(&deref(cert)?.0))?;
        put(passed, report.passed() as i32)
    })
}

/// Plans a motion between two configurations of `n` points on the tree
/// subdivided for `n`, written as comma-separated points (`v:id` or
/// `e:id1-id2@num/den`). The path is returned as JSON keyframes.
///
/// # Safety
/// `tree` must be a live handle, `from` and `to` nul-terminated strings and
/// `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_plan(
    tree: *const BsTree,
    n: usize,
    from: *const c_char,
    to: *const c_char,
    ordered: i32,
    out: *mut *mut c_char,
) -> BsStatus {
    guard(|| {
        let order = deref(tree)?.0.subdivide_for(n).order();
        let x = lib(Configuration::parse(&order, text(from)?))?;
        let y = lib(Configuration::parse(&order, text(to)?))?;
        if x.len() != n || y.len() != n {
            return Err((BsStatus::InvalidInput, format!("expected {n} points")));
        }
        let path = lib(if ordered != 0 {
            plan_ordered(&order, &x, &y)
        } else {
            plan_unordered(&order, &x, &y)
        })?;
        let check = validate_path(&order, &path);
        if !check.valid {
            return Err((BsStatus::Internal, check.first_violation.unwrap_or_default()));
        }
        let json = serde_json::to_string(&path.to_json(&order)).map_err(|e| (BsStatus::Internal, e.to_string()))?;
        put_string(out, json)
    })
}
