use std::ffi::{CStr, CString};
use std::ptr;

use trilie_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn last_error() -> String {
    let p = trilie_last_error();
    if p.is_null() {
        String::new()
    } else {
        CStr::from_ptr(p).to_string_lossy().into_owned()
    }
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    trilie_string_free(s);
    out
}

#[test]
fn product_round_trip() {
    unsafe {
        let mut alg = ptr::null_mut();
        assert_eq!(trilie_algebra_from_catalog(cstr("af1").as_ptr(), &mut alg), TrilieStatus::Ok);
        assert_eq!(trilie_algebra_dim(alg), 2);
        let (mut a, mut b, mut c) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(trilie_element_parse(alg, cstr("e2").as_ptr(), &mut a), TrilieStatus::Ok);
        assert_eq!(trilie_element_parse(alg, cstr("e1").as_ptr(), &mut b), TrilieStatus::Ok);
        assert_eq!(trilie_element_mul(a, b, &mut c), TrilieStatus::Ok);
        assert_eq!(take(trilie_element_to_string(c)), "e1*e2 - e2");
        trilie_element_free(a);
        trilie_element_free(b);
        trilie_element_free(c);
        trilie_algebra_free(alg);
    }
}

#[test]
fn json_algebra_and_triangularity() {
    let json = r#"{"dim": 3, "mode": "real", "brackets": [{"i": 1, "j": 2, "c": {"3": "1"}}, {"i": 1, "j": 3, "c": {"2": "-1"}}]}"#;
    unsafe {
        let mut alg = ptr::null_mut();
        assert_eq!(trilie_algebra_from_json(cstr(json).as_ptr(), &mut alg), TrilieStatus::Ok);
        let mut tri = true;
        assert_eq!(trilie_algebra_is_triangular(alg, &mut tri), TrilieStatus::Ok);
        assert!(!tri);
        assert!(last_error().contains("e1"));
        trilie_algebra_free(alg);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut alg = ptr::null_mut();
        assert_eq!(trilie_algebra_from_catalog(ptr::null(), &mut alg), TrilieStatus::NullPointer);
        assert_eq!(trilie_algebra_from_catalog(cstr("nope").as_ptr(), &mut alg), TrilieStatus::InvalidInput);
        assert!(last_error().contains("nope"));
        assert_eq!(trilie_algebra_from_json(cstr("{").as_ptr(), &mut alg), TrilieStatus::InvalidInput);
        let bad = r#"{"dim": 3, "brackets": [{"i": 1, "j": 2, "c": {"3": "1"}}, {"i": 2, "j": 3, "c": {"1": "1"}}, {"i": 1, "j": 3, "c": {"3": "1"}}]}"#;
        assert_eq!(trilie_algebra_from_json(cstr(bad).as_ptr(), &mut alg), TrilieStatus::InvalidInput);
        assert!(last_error().contains("Jacobi"));
        assert!(alg.is_null());
        assert_eq!(trilie_algebra_dim(ptr::null()), 0);
        assert!(trilie_element_to_string(ptr::null()).is_null());

        assert_eq!(trilie_algebra_from_catalog(cstr("heisenberg").as_ptr(), &mut alg), TrilieStatus::Ok);
        let mut e = ptr::null_mut();
        assert_eq!(trilie_element_parse(alg, cstr("e1 +* e9").as_ptr(), &mut e), TrilieStatus::InvalidInput);
        trilie_algebra_free(alg);
    }
}

#[test]
fn mismatched_algebras() {
    unsafe {
        let (mut a1, mut a2) = (ptr::null_mut(), ptr::null_mut());
        trilie_algebra_from_catalog(cstr("af1").as_ptr(), &mut a1);
        trilie_algebra_from_catalog(cstr("heisenberg").as_ptr(), &mut a2);
        let (mut x, mut y, mut z) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        trilie_element_parse(a1, cstr("e1").as_ptr(), &mut x);
        trilie_element_parse(a2, cstr("e1").as_ptr(), &mut y);
        assert_eq!(trilie_element_mul(x, y, &mut z), TrilieStatus::AlgebraMismatch);
        assert!(z.is_null());
        trilie_element_free(x);
        trilie_element_free(y);
        trilie_algebra_free(a1);
        trilie_algebra_free(a2);
    }
}

#[test]
fn growth_through_the_boundary() {
    let jordan = [0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
    let rotation = [0.0, -1.0, 1.0, 0.0];
    unsafe {
        let mut alpha = 0.0;
        let mut v = TrilieGrowth::Inconclusive;
        assert_eq!(trilie_growth_scan(jordan.as_ptr(), 3, 1000.0, &mut alpha, &mut v), TrilieStatus::Ok);
        assert_eq!(v, TrilieGrowth::Polynomial);
        assert!((alpha - 2.0).abs() < 0.2);
        assert_eq!(trilie_growth_scan(rotation.as_ptr(), 2, 1000.0, &mut alpha, &mut v), TrilieStatus::Ok);
        assert_eq!(v, TrilieGrowth::Exponential);
        assert_eq!(trilie_growth_scan(rotation.as_ptr(), 0, 1000.0, &mut alpha, &mut v), TrilieStatus::InvalidInput);
    }
}

#[test]
fn command_line_bridge() {
    unsafe {
        let mut code = -1;
        let mut out = ptr::null_mut();
        let args = cstr(r#"["mul", "--algebra", "af1", "e2*e1"]"#);
        assert_eq!(trilie_cli_run(args.as_ptr(), &mut code, &mut out), TrilieStatus::Ok);
        assert_eq!(code, 0);
        assert_eq!(take(out), "e1*e2 - e2\n");
        let args = cstr(r#"["check", "--algebra", "bogus"]"#);
        assert_eq!(trilie_cli_run(args.as_ptr(), &mut code, &mut out), TrilieStatus::Ok);
        assert_eq!(code, 1);
        assert!(take(out).contains("\"kind\":\"input\""));
        assert_eq!(trilie_cli_run(cstr("not json").as_ptr(), &mut code, &mut out), TrilieStatus::InvalidInput);
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/trilie.h")).unwrap();
    for name in [
        "trilie_algebra_from_json",
        "trilie_algebra_from_catalog",
        "trilie_algebra_free",
        "trilie_element_parse",
        "trilie_element_mul",
        "trilie_element_to_string",
        "trilie_string_free",
        "trilie_growth_scan",
        "trilie_cli_run",
        "trilie_last_error",
        "typedef struct TrilieAlgebra TrilieAlgebra",
        "TRILIE_STATUS_NOT_TRIANGULAR",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
