use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use fosls_ffi::*;

fn problem(kind: u32, p_plus_1: usize, n: usize) -> FoslsProblem {
    FoslsProblem { kind, k: 2.0, p_plus_1, n, sigma: -1, max_dofs: 0 }
}

fn last_error() -> String {
    let p = fosls_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn polynomial_round_trip() {
    let mut s = ptr::null_mut();
    let st = unsafe { fosls_solve(&problem(FOSLS_PROBLEM_POLYNOMIAL, 1, 2), &mut s) };
    assert_eq!(st, FoslsStatus::Ok);
    let mut e = FoslsErrors::default();
    assert_eq!(unsafe { fosls_solution_errors(s, &mut e) }, FoslsStatus::Ok);
    assert!(e.rel_err_u < 1e-8 && e.rel_err_phi < 1e-8, "{e:?}");

    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { fosls_solution_evaluate(s, 0.3, 0.6, &mut re, &mut im) }, FoslsStatus::Ok);
    assert!((re - 0.9).abs() < 1e-9 && im.abs() < 1e-9);

    let mut needed = 0;
    assert_eq!(unsafe { fosls_solution_coefficients(s, ptr::null_mut(), 0, &mut needed) }, FoslsStatus::Ok);
    assert_eq!(needed, 2 * e.ndof);
    let mut buf = vec![0.0; needed];
    assert_eq!(
        unsafe { fosls_solution_coefficients(s, buf.as_mut_ptr(), needed - 1, &mut needed) },
        FoslsStatus::InvalidArgument
    );
    assert_eq!(unsafe { fosls_solution_coefficients(s, buf.as_mut_ptr(), buf.len(), &mut needed) }, FoslsStatus::Ok);
    assert!(buf.iter().all(|v| v.is_finite()) && buf.iter().any(|v| *v != 0.0));
    unsafe { fosls_solution_free(s) };
}

#[test]
fn error_codes() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(fosls_solve(ptr::null(), &mut s), FoslsStatus::NullPointer);
        assert!(s.is_null());
        assert_eq!(fosls_solve(&problem(7, 1, 2), &mut s), FoslsStatus::InvalidArgument);
        assert!(last_error().contains("kind"));
        assert_eq!(fosls_solve(&problem(FOSLS_PROBLEM_BESSEL, 5, 2), &mut s), FoslsStatus::InvalidArgument);
        let mut p = problem(FOSLS_PROBLEM_BESSEL, 1, 2);
        p.sigma = 0;
        assert_eq!(fosls_solve(&p, &mut s), FoslsStatus::InvalidArgument);
        p.sigma = 1;
        p.max_dofs = 10;
        assert_eq!(fosls_solve(&p, &mut s), FoslsStatus::ResourceCap);
        assert!(last_error().contains("limit"));
        assert!(s.is_null());
        assert_eq!(fosls_solve(&problem(FOSLS_PROBLEM_BESSEL, 1, 2), ptr::null_mut()), FoslsStatus::NullPointer);
        let mut e = FoslsErrors::default();
        assert_eq!(fosls_solution_errors(ptr::null(), &mut e), FoslsStatus::NullPointer);
        fosls_solution_free(ptr::null_mut());
    }
}

#[test]
fn evaluate_outside_domain() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(fosls_solve(&problem(FOSLS_PROBLEM_BESSEL, 1, 2), &mut s), FoslsStatus::Ok);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(fosls_solution_evaluate(s, 3.0, 0.0, &mut re, &mut im), FoslsStatus::InvalidArgument);
        fosls_solution_free(s);
    }
}

#[test]
fn bessel_values() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(fosls_bessel_j0(0.0, &mut v), FoslsStatus::Ok);
        assert_eq!(v, 1.0);
        assert_eq!(fosls_bessel_j1(0.0, &mut v), FoslsStatus::Ok);
        assert_eq!(v, 0.0);
        assert_eq!(fosls_bessel_j1(1.0, ptr::null_mut()), FoslsStatus::NullPointer);
    }
    let ver = unsafe { CStr::from_ptr(fosls_version()) };
    assert_eq!(ver.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(manifest_dir().join("include/fosls.h")).unwrap();
    for name in [
        "FOSLS_H",
        "typedef struct FoslsSolution FoslsSolution",
        "FOSLS_STATUS_OK",
        "FOSLS_STATUS_RESOURCE_CAP",
        "FOSLS_PROBLEM_BESSEL",
        "fosls_solve(const FoslsProblem *problem, FoslsSolution **out)",
        "fosls_solution_free",
        "fosls_solution_evaluate",
        "fosls_solution_coefficients",
        "fosls_last_error",
        "fosls_bessel_j0",
    ] {
        assert!(header.contains(name), "header lacks `{name}`");
    }
}

/// The static library sits next to the test binary's `deps` directory.
fn static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?.parent()?;
    let lib = dir.join("libfosls_ffi.a");
    lib.exists().then_some(lib)
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

#[test]
fn c_program_links_and_runs() {
    let (Some(lib), true) = (static_lib(), have_cc()) else {
        eprintln!("no C compiler or static library; skipping the C smoke test");
        return;
    };
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let src = manifest_dir().join("tests/c/smoke.c");
    let include = manifest_dir().join("include");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}: {}", out.status, String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
