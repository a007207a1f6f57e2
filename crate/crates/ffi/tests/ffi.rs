use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use hottcheck_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn check_norm_and_winding_through_handles() {
    // SAFETY: every pointer passed is null or valid for the call.
    unsafe {
        let s = hott_session_new(true);
        assert!(!s.is_null());
        let before = hott_session_declaration_count(s);
        let src = c("hit C where\n  | point b : C\n  | path l : b = b\n\ndef l2 : b = b := concat.{0} l l\n\ndef n : Nat := succ zero\n");
        assert_eq!(hott_session_check(s, c("t.hott").as_ptr(), src.as_ptr()), HottStatus::Ok);
        assert!(hott_session_declaration_count(s) > before);

        let mut w = 0i64;
        assert_eq!(hott_session_winding(s, c("l2").as_ptr(), &mut w), HottStatus::Ok);
        assert_eq!(w, 2);

        let mut out: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(hott_session_normal_form(s, c("n").as_ptr(), &mut out), HottStatus::Ok);
        assert_eq!(CStr::from_ptr(out).to_str().unwrap(), "succ zero");
        hott_string_free(out);
        hott_session_free(s);
    }
}

#[test]
fn errors_map_to_status_codes() {
    // SAFETY: every pointer passed is null or valid for the call.
    unsafe {
        let s = hott_session_new(true);
        let bad = c("def x : Nat := tt\n");
        assert_eq!(hott_session_check(s, c("bad.hott").as_ptr(), bad.as_ptr()), HottStatus::Type);
        let msg = CStr::from_ptr(hott_session_last_error(s)).to_str().unwrap().to_string();
        let fields: Vec<&str> = msg.split('\t').collect();
        assert_eq!(fields.len(), 5);
        assert_eq!(fields[0], "E-TYPE");
        assert_eq!(fields[1], "bad.hott");

        let mut w = 0i64;
        assert_eq!(hott_session_winding(s, c("nope").as_ptr(), &mut w), HottStatus::Scope);
        let def = c("def n : Nat := zero\n");
        assert_eq!(hott_session_check(s, c("ok.hott").as_ptr(), def.as_ptr()), HottStatus::Ok);
        assert_eq!(hott_session_winding(s, c("n").as_ptr(), &mut w), HottStatus::Type);
        hott_session_free(s);
    }
}

#[test]
fn null_and_invalid_arguments() {
    // SAFETY: every pointer passed is null or valid for the call.
    unsafe {
        assert_eq!(hott_session_check(ptr::null_mut(), ptr::null(), ptr::null()), HottStatus::NullArgument);
        let s = hott_session_new(false);
        assert_eq!(hott_session_check(s, ptr::null(), c("").as_ptr()), HottStatus::NullArgument);
        let bytes = [0xffu8, 0];
        assert_eq!(hott_session_check(s, c("x").as_ptr(), bytes.as_ptr().cast()), HottStatus::InvalidUtf8);
        assert_eq!(hott_session_winding(s, c("x").as_ptr(), ptr::null_mut()), HottStatus::NullArgument);
        assert!(hott_session_last_error(ptr::null()).is_null());
        assert_eq!(hott_session_declaration_count(ptr::null()), 0);
        hott_session_free(s);
        hott_session_free(ptr::null_mut());
        hott_string_free(ptr::null_mut());
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/hottcheck.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["hott_session_new", "hott_session_check", "hott_session_winding", "hott_string_free"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let main = dir.path().join("main.c");
    std::fs::write(&main, "#include \"hottcheck.h\"\nint main(void) { HottSession *s = hott_session_new(1); hott_session_free(s); return HOTT_STATUS_OK; }\n").unwrap();
    let Ok(status) = Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-I")
        .arg(header.parent().unwrap())
        .arg(&main)
        .status()
    else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(status.success());
}
