//! C ABI for the sequence-recovery library.
//!
//! Sequences cross the boundary as NUL-terminated strings in the library's
//! text format ("010110", "1/3,1/3,2/5", "1,W,0"). Oracle sessions are
//! opaque handles. Every fallible call returns a status code; string
//! outputs are allocated by Rust and must be released with
//! `seqrec_string_free`. `seqrec_last_error` returns a message for the most
//! recent failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use seqrecover::oracle::{DistanceKind, OracleSession};
use seqrecover::{run_strategy, strategy_ids, Sequence};

/// Status code for every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeqrecStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// An input string was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A sequence or number failed to parse.
    ParseError = 3,
    /// An argument was outside its domain (unknown kind, bad n, ...).
    InvalidArgument = 4,
    /// The oracle rejected the call (alphabet, cap, mode, domain).
    OracleError = 5,
    /// A recovery strategy failed (adversarial answers, unknown id, ...).
    RecoveryError = 6,
    /// Internal panic; a bug.
    InternalError = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: SeqrecStatus, msg: String) -> SeqrecStatus {
    set_error(msg);
    status
}

/// Opaque oracle session handle.
pub struct SeqrecOracle {
    session: OracleSession,
}

unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, SeqrecStatus> {
    if ptr.is_null() {
        return Err(fail(SeqrecStatus::NullPointer, format!("{what} is NULL")));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| fail(SeqrecStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn parse_sequence(text: &str, what: &str) -> Result<Sequence, SeqrecStatus> {
    text.parse()
        .map_err(|e| fail(SeqrecStatus::ParseError, format!("{what}: {e}")))
}

fn parse_kind(kind: &str, p: u32) -> Result<DistanceKind, SeqrecStatus> {
    match kind {
        "edit" => Ok(DistanceKind::Edit),
        "dtw" if p >= 1 => Ok(DistanceKind::Dtw { p }),
        "frechet" => Ok(DistanceKind::Frechet),
        _ => Err(fail(
            SeqrecStatus::InvalidArgument,
            format!("unknown distance kind `{kind}` (p={p})"),
        )),
    }
}

fn write_string(out: *mut *mut c_char, value: String) -> SeqrecStatus {
    if out.is_null() {
        return fail(SeqrecStatus::NullPointer, "output pointer is NULL".into());
    }
    match CString::new(value) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            SeqrecStatus::Ok
        }
        Err(_) => fail(SeqrecStatus::InternalError, "output contains NUL".into()),
    }
}

fn guarded(body: impl FnOnce() -> SeqrecStatus) -> SeqrecStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(SeqrecStatus::InternalError, "internal panic".into()),
    }
}

/// Copies the most recent error message on this thread into a new string,
/// or returns NULL if there was none.
#[no_mangle]
pub extern "C" fn seqrec_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(c) => c.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Frees a string allocated by this library.
///
/// # Safety
/// `s` must have been returned by a `seqrec_*` call and not freed before.
#[no_mangle]
pub unsafe extern "C" fn seqrec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Exact distance between two sequences. `kind` is "edit", "dtw", or
/// "frechet"; `p` is the p-norm exponent for "dtw" (use 1 otherwise). The
/// result is written as a decimal integer or reduced fraction "p/q".
///
/// # Safety
/// `kind`, `x`, `y` must be valid NUL-terminated strings; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn seqrec_distance(
    kind: *const c_char,
    p: u32,
    x: *const c_char,
    y: *const c_char,
    out: *mut *mut c_char,
) -> SeqrecStatus {
    guarded(|| {
        let kind = match unsafe { read_str(kind, "kind") } {
            Ok(k) => k,
            Err(s) => return s,
        };
        let (x, y) = match (unsafe { read_str(x, "x") }, unsafe { read_str(y, "y") }) {
            (Ok(x), Ok(y)) => (x, y),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let kind = match parse_kind(kind, p) {
            Ok(k) => k,
            Err(s) => return s,
        };
        let x = match parse_sequence(x, "x") {
            Ok(v) => v,
            Err(s) => return s,
        };
        let y = match parse_sequence(y, "y") {
            Ok(v) => v,
            Err(s) => return s,
        };
        match seqrecover::lab::oracle_distance(kind, &x, &y) {
            Ok(v) => write_string(out, v.to_string()),
            Err(e) => fail(SeqrecStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Creates an oracle session over a hidden binary sequence of length at
/// most `n`. `adaptive` selects incremental queries vs a one-shot plan.
///
/// # Safety
/// String arguments must be valid NUL-terminated strings; `out` must be a
/// valid pointer. Free the handle with `seqrec_oracle_free`.
#[no_mangle]
pub unsafe extern "C" fn seqrec_oracle_new(
    kind: *const c_char,
    p: u32,
    hidden: *const c_char,
    n: usize,
    adaptive: bool,
    out: *mut *mut SeqrecOracle,
) -> SeqrecStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SeqrecStatus::NullPointer, "output pointer is NULL".into());
        }
        let kind = match unsafe { read_str(kind, "kind") }.and_then(|k| parse_kind(k, p)) {
            Ok(k) => k,
            Err(s) => return s,
        };
        let hidden =
            match unsafe { read_str(hidden, "hidden") }.and_then(|h| parse_sequence(h, "hidden")) {
                Ok(h) => h,
                Err(s) => return s,
            };
        let session = if adaptive {
            OracleSession::adaptive(hidden, kind, n)
        } else {
            OracleSession::non_adaptive(hidden, kind, n)
        };
        match session {
            Ok(session) => {
                let handle = Box::new(SeqrecOracle { session });
                unsafe { *out = Box::into_raw(handle) };
                SeqrecStatus::Ok
            }
            Err(e) => fail(SeqrecStatus::OracleError, e.to_string()),
        }
    })
}

/// Answers one query on an adaptive session; the answer is written as a
/// decimal integer or reduced fraction.
///
/// # Safety
/// `oracle` must be a live handle from `seqrec_oracle_new`; `q` must be a
/// valid NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn seqrec_oracle_query(
    oracle: *mut SeqrecOracle,
    q: *const c_char,
    out: *mut *mut c_char,
) -> SeqrecStatus {
    guarded(|| {
        if oracle.is_null() {
            return fail(SeqrecStatus::NullPointer, "oracle handle is NULL".into());
        }
        let handle = unsafe { &mut *oracle };
        let q = match unsafe { read_str(q, "query") }.and_then(|q| parse_sequence(q, "query")) {
            Ok(q) => q,
            Err(s) => return s,
        };
        match handle.session.query(&q) {
            Ok(answer) => write_string(out, answer.to_string()),
            Err(e) => fail(SeqrecStatus::OracleError, e.to_string()),
        }
    })
}

/// Number of answered queries so far; 0 for a NULL handle.
///
/// # Safety
/// `oracle` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn seqrec_oracle_query_count(oracle: *const SeqrecOracle) -> usize {
    if oracle.is_null() {
        return 0;
    }
    unsafe { &*oracle }.session.query_count()
}

/// Releases an oracle handle.
///
/// # Safety
/// `oracle` must be NULL or a handle from `seqrec_oracle_new`, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn seqrec_oracle_free(oracle: *mut SeqrecOracle) {
    if !oracle.is_null() {
        drop(unsafe { Box::from_raw(oracle) });
    }
}

/// Runs a registered recovery strategy against a hidden input and writes
/// the full report as JSON: recovered sequence, query count, declared
/// bound, bound flag, and recovery level.
///
/// # Safety
/// String arguments must be valid NUL-terminated strings; `out_json` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn seqrec_recover(
    strategy: *const c_char,
    hidden: *const c_char,
    n: usize,
    out_json: *mut *mut c_char,
) -> SeqrecStatus {
    guarded(|| {
        let strategy = match unsafe { read_str(strategy, "strategy") } {
            Ok(s) => s,
            Err(s) => return s,
        };
        let hidden =
            match unsafe { read_str(hidden, "hidden") }.and_then(|h| parse_sequence(h, "hidden")) {
                Ok(h) => h,
                Err(s) => return s,
            };
        match run_strategy(strategy, &hidden, n) {
            Ok(report) => match serde_json::to_string(&report) {
                Ok(json) => write_string(out_json, json),
                Err(e) => fail(SeqrecStatus::InternalError, e.to_string()),
            },
            Err(e) => fail(SeqrecStatus::RecoveryError, e.to_string()),
        }
    })
}

/// Writes the registered strategy ids as a JSON array of strings.
///
/// # Safety
/// `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn seqrec_strategy_ids(out_json: *mut *mut c_char) -> SeqrecStatus {
    guarded(|| {
        let ids = strategy_ids();
        match serde_json::to_string(&ids) {
            Ok(json) => write_string(out_json, json),
            Err(e) => fail(SeqrecStatus::InternalError, e.to_string()),
        }
    })
}
