//! C interface to the checker.
//!
//! A `HottSession` owns a global environment. Every call returns a
//! `HottStatus`; on failure the session keeps the diagnostic, readable with
//! `hott_session_last_error`. Strings returned to the caller must be released
//! with `hott_string_free`. Panics are caught at the boundary and reported
//! as `HOTT_STATUS_INTERNAL`.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hottcheck::diag::{Code, Diagnostic, Span};
use hottcheck::{cli, loopcalc, Session};

/// Result of an interface call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HottStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    Parse = 3,
    Scope = 4,
    Type = 5,
    Univ = 6,
    HitSchema = 7,
    LoopForm = 8,
    /// A panic inside the checker.
    Internal = 9,
}

impl From<Code> for HottStatus {
    fn from(c: Code) -> HottStatus {
        match c {
            Code::Parse => HottStatus::Parse,
            Code::Scope => HottStatus::Scope,
            Code::Type => HottStatus::Type,
            Code::Univ => HottStatus::Univ,
            Code::HitSchema => HottStatus::HitSchema,
            Code::LoopForm => HottStatus::LoopForm,
        }
    }
}

/// Opaque checking session.
pub struct HottSession {
    session: Session,
    last_error: Option<CString>,
}

impl HottSession {
    fn fail(&mut self, d: &Diagnostic) -> HottStatus {
        self.set_error(d.machine().trim_end());
        d.code.into()
    }

    fn set_error(&mut self, msg: &str) {
        self.last_error = CString::new(msg.replace('\0', " ")).ok();
    }
}

fn text<'a>(p: *const c_char) -> Result<&'a str, HottStatus> {
    if p.is_null() {
        return Err(HottStatus::NullArgument);
    }
    // SAFETY: the caller passes a NUL-terminated string valid for the call.
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| HottStatus::InvalidUtf8)
}

fn guarded(s: *mut HottSession, f: impl FnOnce(&mut HottSession) -> HottStatus) -> HottStatus {
    if s.is_null() {
        return HottStatus::NullArgument;
    }
    // SAFETY: non-null handles come from `hott_session_new` and are not
    // shared across threads by contract.
    let sess = unsafe { &mut *s };
    match catch_unwind(AssertUnwindSafe(|| f(sess))) {
        Ok(st) => st,
        Err(_) => {
            sess.set_error("internal error");
            HottStatus::Internal
        }
    }
}

/// Creates a session, with the prelude loaded when `with_prelude` is
/// true. Returns null if the prelude fails to check.
#[no_mangle]
pub extern "C" fn hott_session_new(with_prelude: bool) -> *mut HottSession {
    let made = catch_unwind(|| if with_prelude { Session::with_prelude() } else { Session::new() });
    match made {
        Ok(session) => Box::into_raw(Box::new(HottSession { session, last_error: None })),
        Err(_) => ptr::null_mut(),
    }
}

/// Releases a session. Null is ignored.
///
/// # Safety
/// `s` must be null or a session from `hott_session_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hott_session_free(s: *mut HottSession) {
    if !s.is_null() {
        // SAFETY: `s` was produced by `hott_session_new` and is freed once.
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Checks a source text and adds its declarations to the session. `path`
/// is used in diagnostics only. On failure nothing from the text after
/// the failing declaration is added.
///
/// # Safety
/// `s` must be null or a live session; `path` and `source` must be null or
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn hott_session_check(s: *mut HottSession, path: *const c_char, source: *const c_char) -> HottStatus {
    guarded(s, |sess| {
        let (path, source) = match (text(path), text(source)) {
            (Ok(p), Ok(t)) => (p, t),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        match sess.session.add_source(path, source) {
            Ok(_) => HottStatus::Ok,
            Err(d) => sess.fail(&d),
        }
    })
}

/// Number of declarations in the session.
///
/// # Safety
/// `s` must be null or a live session.
#[no_mangle]
pub unsafe extern "C" fn hott_session_declaration_count(s: *const HottSession) -> usize {
    if s.is_null() {
        return 0;
    }
    // SAFETY: see `guarded`.
    unsafe { &*s }.session.globals.len()
}

/// Writes the winding number of the named loop to `out`.
///
/// # Safety
/// `s` must be null or a live session; `name` must be null or a
/// NUL-terminated string; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hott_session_winding(s: *mut HottSession, name: *const c_char, out: *mut i64) -> HottStatus {
    guarded(s, |sess| {
        let name = match text(name) {
            Ok(n) => n,
            Err(e) => return e,
        };
        if out.is_null() {
            return HottStatus::NullArgument;
        }
        match loopcalc::winding_of(&sess.session.globals, name, Span::default()) {
            Ok(n) => {
                // SAFETY: `out` is non-null and points to writable memory.
                unsafe { *out = n };
                HottStatus::Ok
            }
            Err(e) => {
                let d = sess.session.diagnostic(&e);
                sess.fail(&d)
            }
        }
    })
}

/// Stores the printed normal form of the named declaration in `out`; free
/// it with `hott_string_free`.
///
/// # Safety
/// `s` must be null or a live session; `name` must be null or a
/// NUL-terminated string; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hott_session_normal_form(s: *mut HottSession, name: *const c_char, out: *mut *mut c_char) -> HottStatus {
    guarded(s, |sess| {
        let name = match text(name) {
            Ok(n) => n,
            Err(e) => return e,
        };
        if out.is_null() {
            return HottStatus::NullArgument;
        }
        match cli::normal_form(&sess.session.globals, name, Span::default()) {
            Ok(t) => {
                let c = CString::new(t).unwrap_or_default();
                // SAFETY: `out` is non-null and points to writable memory.
                unsafe { *out = c.into_raw() };
                HottStatus::Ok
            }
            Err(e) => {
                let d = sess.session.diagnostic(&e);
                sess.fail(&d)
            }
        }
    })
}

/// The last diagnostic as a tab-separated record (code, file, line,
/// column, message), or null. Owned by the session; valid until the next
/// call on it.
///
/// # Safety
/// `s` must be null or a live session.
#[no_mangle]
pub unsafe extern "C" fn hott_session_last_error(s: *const HottSession) -> *const c_char {
    if s.is_null() {
        return ptr::null();
    }
    // SAFETY: see `guarded`.
    match &unsafe { &*s }.last_error {
        Some(c) => c.as_ptr(),
        None => ptr::null(),
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `p` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn hott_string_free(p: *mut c_char) {
    if !p.is_null() {
        // SAFETY: `p` came from `CString::into_raw` in this library.
        drop(unsafe { CString::from_raw(p) });
    }
}
