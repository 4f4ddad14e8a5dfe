use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use pcrpp_ffi::*;

const BARRIER: &str = "3 3 1\n1 2 0.1 0\n2 3 1 1.3\n1 3 1 0\n";

fn parse(text: &str) -> (PcrppStatus, *mut PcrppInstance) {
    let c = CString::new(text).unwrap();
    let mut inst = ptr::null_mut();
    let status = unsafe { pcrpp_instance_parse(c.as_ptr(), &mut inst) };
    (status, inst)
}

fn last_error() -> String {
    let p = pcrpp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn walk(sol: *const PcrppSolution) -> Vec<usize> {
    let n = unsafe { pcrpp_solution_walk_len(sol) };
    let mut buf = vec![0; n];
    assert_eq!(unsafe { pcrpp_solution_walk(sol, buf.as_mut_ptr(), n) }, PcrppStatus::Ok);
    buf
}

#[test]
fn barrier_through_all_solvers() {
    let (status, inst) = parse(BARRIER);
    assert_eq!(status, PcrppStatus::Ok);
    unsafe {
        assert_eq!(pcrpp_instance_vertex_count(inst), 3);
        assert_eq!(pcrpp_instance_edge_count(inst), 3);

        let mut sol = ptr::null_mut();
        assert_eq!(pcrpp_solve(inst, true, &mut sol), PcrppStatus::Ok);
        assert!((pcrpp_solution_value(sol) - 1.3).abs() < 1e-9);
        assert!((pcrpp_solution_lower_bound(sol) - 1.3).abs() < 1e-9);
        assert_eq!(walk(sol), vec![1]);
        pcrpp_solution_free(sol);

        assert_eq!(pcrpp_reduce(inst, 12, false, &mut sol), PcrppStatus::Ok);
        assert!((pcrpp_solution_value(sol) - 2.1).abs() < 1e-9);
        assert!(pcrpp_solution_lower_bound(sol).is_nan());
        assert_eq!(walk(sol), vec![1, 2, 3, 1]);
        let mut small = [0usize; 2];
        assert_eq!(pcrpp_solution_walk(sol, small.as_mut_ptr(), 2), PcrppStatus::BufferTooSmall);
        pcrpp_solution_free(sol);

        assert_eq!(pcrpp_oracle(inst, 12, &mut sol), PcrppStatus::Ok);
        assert!((pcrpp_solution_value(sol) - 1.3).abs() < 1e-9);
        pcrpp_solution_free(sol);

        assert_eq!(pcrpp_oracle(inst, 2, &mut sol), PcrppStatus::CapExceeded);
        assert!(sol.is_null());
        assert!(last_error().contains("cap"));
        pcrpp_instance_free(inst);
    }
}

#[test]
fn errors_are_reported() {
    let (status, inst) = parse("2 1 1\n1 2 -1 0\n");
    assert_eq!(status, PcrppStatus::Parse);
    assert!(inst.is_null());
    assert!(last_error().contains("negative length"));

    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { pcrpp_instance_parse(ptr::null(), &mut inst) }, PcrppStatus::NullPointer);
    let bad = [0xffu8, 0];
    assert_eq!(unsafe { pcrpp_instance_parse(bad.as_ptr().cast(), &mut inst) }, PcrppStatus::InvalidUtf8);

    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { pcrpp_solve(ptr::null(), true, &mut sol) }, PcrppStatus::NullPointer);
    unsafe {
        assert!(pcrpp_solution_value(ptr::null()).is_nan());
        assert_eq!(pcrpp_solution_walk_len(ptr::null()), 0);
        assert_eq!(pcrpp_instance_vertex_count(ptr::null()), 0);
        pcrpp_instance_free(ptr::null_mut());
        pcrpp_solution_free(ptr::null_mut());
    }
}

#[test]
fn ratio_certificate() {
    let (mut bound, mut inconclusive) = (0.0, true);
    assert_eq!(unsafe { pcrpp_verify_ratio(1e-6, &mut bound, &mut inconclusive) }, PcrppStatus::Ok);
    assert!(inconclusive);
    assert_eq!(unsafe { pcrpp_verify_ratio(1e-7, &mut bound, &mut inconclusive) }, PcrppStatus::Ok);
    assert!(!inconclusive);
    assert!(bound < 1.6 && bound > 1.5986);
    assert_eq!(unsafe { pcrpp_verify_ratio(0.0, &mut bound, &mut inconclusive) }, PcrppStatus::InvalidInput);
    assert_eq!(unsafe { pcrpp_verify_ratio(1e-3, ptr::null_mut(), &mut inconclusive) }, PcrppStatus::NullPointer);
}

#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/pcrpp.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["pcrpp_instance_parse", "pcrpp_solve", "pcrpp_solution_walk", "pcrpp_verify_ratio", "PCRPP_STATUS_OK"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let src = tempfile_path("pcrpp_header_check.c");
    std::fs::write(&src, "#include \"pcrpp.h\"\nint main(void) { return pcrpp_last_error() == 0 ? 0 : 1; }\n").unwrap();
    let Ok(out) = Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg("-Werror").arg("-I").arg(dir.join("include")).arg(&src).output() else {
        eprintln!("no C compiler available");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn tempfile_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("{}_{name}", std::process::id()))
}
