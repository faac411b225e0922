use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use stackplan_ffi::*;

fn last_error() -> String {
    let e = sp_last_error();
    assert!(!e.is_null());
    unsafe { CStr::from_ptr(e) }.to_string_lossy().into_owned()
}

fn generated(cubes: usize, seed: u64) -> *mut SpProblem {
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { sp_problem_generate(SpFamily::Reverse, cubes, 0.06, seed, &mut p) },
        SpStatus::Ok
    );
    p
}

#[test]
fn plan_simplify_validate_and_trace() {
    let p = generated(3, 7);
    unsafe {
        assert_eq!(sp_problem_object_count(p), 3);
        let mut s = ptr::null_mut();
        assert_eq!(sp_plan(p, 7, 60.0, &mut s), SpStatus::Ok);
        assert!(sp_solution_len(s) >= 6);
        assert!(sp_solution_nodes(s) >= 2);

        let mut short = ptr::null_mut();
        assert_eq!(sp_simplify(p, s, 7, &mut short), SpStatus::Ok);
        assert!(sp_solution_len(short) <= sp_solution_len(s));

        let mut valid = false;
        assert_eq!(sp_validate(p, short, &mut valid), SpStatus::Ok);
        assert!(valid);

        let mut json = ptr::null_mut();
        assert_eq!(sp_trace_json(p, short, 0.1, &mut json), SpStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        sp_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["steps"].as_array().unwrap().len(), sp_solution_len(short));

        sp_solution_free(short);
        sp_solution_free(s);
        sp_problem_free(p);
    }
}

#[test]
fn toml_round_trips_through_handles() {
    let p = generated(2, 1);
    unsafe {
        let mut text = ptr::null_mut();
        assert_eq!(sp_problem_to_toml(p, &mut text), SpStatus::Ok);
        let mut q = ptr::null_mut();
        assert_eq!(sp_problem_parse(text, &mut q), SpStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(sp_problem_to_toml(q, &mut again), SpStatus::Ok);
        assert_eq!(CStr::from_ptr(text), CStr::from_ptr(again));
        sp_string_free(text);
        sp_string_free(again);
        sp_problem_free(q);
        sp_problem_free(p);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut p = ptr::null_mut();
        let bad = CString::new("version = 1\n[scene]\nworkspace = 3\n").unwrap();
        assert_eq!(sp_problem_parse(bad.as_ptr(), &mut p), SpStatus::Parse);
        assert!(p.is_null());
        assert!(last_error().contains("line"));

        assert_eq!(
            sp_problem_generate(SpFamily::Transform, 4, 0.06, 0, &mut p),
            SpStatus::InvalidInput
        );
        assert!(last_error().contains("triangular"));

        assert_eq!(sp_problem_parse(ptr::null(), &mut p), SpStatus::NullArgument);
        let mut s = ptr::null_mut();
        assert_eq!(sp_plan(ptr::null(), 0, 1.0, &mut s), SpStatus::NullArgument);
        assert_eq!(sp_solution_len(ptr::null()), 0);
        sp_problem_free(ptr::null_mut());
        sp_solution_free(ptr::null_mut());
        sp_string_free(ptr::null_mut());
    }
}

#[test]
fn invalid_solution_reports_reason() {
    let p = generated(2, 5);
    let q = generated(2, 6);
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(sp_plan(p, 5, 60.0, &mut s), SpStatus::Ok);
        let mut valid = true;
        assert_eq!(sp_validate(q, s, &mut valid), SpStatus::Ok);
        assert!(!valid);
        assert!(last_error().contains("start"));
        sp_solution_free(s);
        sp_problem_free(p);
        sp_problem_free(q);
    }
}

#[test]
fn c_program_links_against_the_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // test builds produce only the rlib
    let target = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("staticlib");
    let built = Command::new(env!("CARGO"))
        .args([
            "build",
            "--offline",
            "--quiet",
            "--lib",
            "-p",
            "stackplan-ffi",
            "--target-dir",
        ])
        .arg(&target)
        .current_dir(&manifest)
        .status()
        .unwrap();
    assert!(built.success());
    let lib = target.join("debug/libstackplan_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).ends_with("moves\n"));
}
