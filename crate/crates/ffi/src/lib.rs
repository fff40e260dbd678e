//! C interface to the `fosls` solver.
//!
//! Every function returns a [`FoslsStatus`]. Results go through out-pointers;
//! a solved problem lives behind the opaque [`FoslsSolution`] handle, which the
//! caller releases with [`fosls_solution_free`]. After a non-OK status,
//! [`fosls_last_error`] describes the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fosls::assembly::{assemble, ProblemSpec};
use fosls::manufactured::{bessel_exact, bessel_j0, bessel_j1, polynomial_exact, RobinSign};
use fosls::mesh::{build_uniform_mesh, Mesh};
use fosls::metrics::{compute_errors, ErrorReport};
use fosls::solve::{solve, SolverOptions};
use fosls::space::{build_spaces, predicted_dofs, FESpacePair};
use fosls::Error;
use num_complex::Complex64;

/// Radial benchmark on `[-0.5, 0.5]²`.
pub const FOSLS_PROBLEM_BESSEL: u32 = 0;
/// `u = x + y` on the unit square.
pub const FOSLS_PROBLEM_POLYNOMIAL: u32 = 1;
/// Default DOF limit used when `FoslsProblem.max_dofs` is zero.
pub const FOSLS_DEFAULT_MAX_DOFS: usize = 500_000;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoslsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ResourceCap = 3,
    SolverFailed = 4,
    Internal = 5,
    Panic = 6,
}

/// Problem description passed to [`fosls_solve`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FoslsProblem {
    /// `FOSLS_PROBLEM_BESSEL` or `FOSLS_PROBLEM_POLYNOMIAL`.
    pub kind: u32,
    /// Wave number, positive.
    pub k: f64,
    /// Polynomial order `p + 1`, 1 to 4.
    pub p_plus_1: usize,
    /// Cells per side of the uniform mesh.
    pub n: usize,
    /// Robin sign, `+1` or `-1`.
    pub sigma: i32,
    /// DOF limit; zero selects `FOSLS_DEFAULT_MAX_DOFS`.
    pub max_dofs: usize,
}

/// Relative L² errors of a solution against the exact one.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FoslsErrors {
    pub rel_err_u: f64,
    pub rel_err_phi: f64,
    pub residual: f64,
    pub h: f64,
    pub kh_over_p: f64,
    pub ndof: usize,
}

/// Opaque solved problem.
pub struct FoslsSolution {
    mesh: Mesh,
    spaces: FESpacePair,
    coeff: Vec<Complex64>,
    report: ErrorReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> FoslsStatus {
    match err {
        Error::InvalidArgument(_)
        | Error::IndexOutOfRange { .. }
        | Error::DimensionMismatch { .. }
        | Error::NonFiniteData { .. }
        | Error::Config(_) => FoslsStatus::InvalidArgument,
        Error::ResourceCap(_) => FoslsStatus::ResourceCap,
        Error::NonPositivePivot
        | Error::Factorization(_)
        | Error::CgNotConverged { .. }
        | Error::EigenNotConverged(_) => FoslsStatus::SolverFailed,
        _ => FoslsStatus::Internal,
    }
}

/// Run `f`, turning errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<(), (FoslsStatus, String)>) -> FoslsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FoslsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside the solver".into());
            FoslsStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (FoslsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (FoslsStatus, String) {
    (FoslsStatus::NullPointer, format!("`{what}` is null"))
}

fn run_solve(p: &FoslsProblem) -> Result<FoslsSolution, (FoslsStatus, String)> {
    let sigma = RobinSign::from_value(p.sigma as i64).map_err(lib_err)?;
    let exact = match p.kind {
        FOSLS_PROBLEM_BESSEL => bessel_exact(p.k, sigma),
        FOSLS_PROBLEM_POLYNOMIAL => polynomial_exact(p.k, sigma),
        other => return Err((FoslsStatus::InvalidArgument, format!("unknown problem kind {other}"))),
    }
    .map_err(lib_err)?;
    if p.p_plus_1 == 0 || p.p_plus_1 > fosls::refelem::MAX_ORDER {
        return Err((FoslsStatus::InvalidArgument, format!("p_plus_1 must lie in 1..=4, got {}", p.p_plus_1)));
    }
    if p.n == 0 {
        return Err((FoslsStatus::InvalidArgument, "n must be at least 1".into()));
    }
    let n = p.n;
    let ndof = predicted_dofs((n + 1) * (n + 1), 3 * n * n + 2 * n, 2 * n * n, p.p_plus_1);
    let cap = if p.max_dofs == 0 { FOSLS_DEFAULT_MAX_DOFS } else { p.max_dofs };
    if ndof > cap {
        return Err((FoslsStatus::ResourceCap, format!("{ndof} dofs exceed the limit {cap}")));
    }
    let mesh = build_uniform_mesh(exact.domain, n).map_err(lib_err)?;
    let spaces = build_spaces(&mesh, p.p_plus_1).map_err(lib_err)?;
    let system = assemble(&mesh, &spaces, &ProblemSpec::from_exact(&exact)).map_err(lib_err)?;
    let (coeff, _) = solve(&system, &SolverOptions::default()).map_err(lib_err)?;
    let report = compute_errors(&mesh, &spaces, &coeff, &exact).map_err(lib_err)?;
    Ok(FoslsSolution { mesh, spaces, coeff, report })
}

/// Assemble and solve `problem`. On success `*out` owns a new handle.
///
/// # Safety
/// `problem` must point to a valid `FoslsProblem`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fosls_solve(problem: *const FoslsProblem, out: *mut *mut FoslsSolution) -> FoslsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let sol = run_solve(p)?;
        *out = Box::into_raw(Box::new(sol));
        Ok(())
    })
}

/// Release a handle from [`fosls_solve`]. Null is accepted.
///
/// # Safety
/// `solution` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fosls_solution_free(solution: *mut FoslsSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Error norms measured when the problem was solved.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fosls_solution_errors(solution: *const FoslsSolution, out: *mut FoslsErrors) -> FoslsStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = &s.report;
        *out = FoslsErrors {
            rel_err_u: r.rel_err_u,
            rel_err_phi: r.rel_err_phi,
            residual: r.fosls_residual,
            h: r.h,
            kh_over_p: r.kh_over_p,
            ndof: r.ndof,
        };
        Ok(())
    })
}

/// `u_h(x, y)` as real and imaginary parts.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fosls_solution_evaluate(
    solution: *const FoslsSolution,
    x: f64,
    y: f64,
    re: *mut f64,
    im: *mut f64,
) -> FoslsStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let u = s.spaces.evaluate_at(&s.mesh, &s.coeff, [x, y]).map_err(lib_err)?.u;
        *re = u.re;
        *im = u.im;
        Ok(())
    })
}

/// Copy the coefficient vector as interleaved `(re, im)` pairs.
///
/// `len` is the capacity of `buf` in doubles and must be at least `2 * ndof`.
/// Passing a null `buf` only reports the required length in `*needed`.
///
/// # Safety
/// `buf` must hold `len` doubles when non-null; `needed` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fosls_solution_coefficients(
    solution: *const FoslsSolution,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> FoslsStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        let needed = needed.as_mut().ok_or_else(|| null("needed"))?;
        *needed = 2 * s.coeff.len();
        if buf.is_null() {
            return Ok(());
        }
        if len < *needed {
            return Err((FoslsStatus::InvalidArgument, format!("buffer holds {len} doubles, {} needed", *needed)));
        }
        let out = std::slice::from_raw_parts_mut(buf, *needed);
        for (pair, c) in out.chunks_exact_mut(2).zip(&s.coeff) {
            pair[0] = c.re;
            pair[1] = c.im;
        }
        Ok(())
    })
}

/// Bessel function `J_0(x)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fosls_bessel_j0(x: f64, out: *mut f64) -> FoslsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = bessel_j0(x).map_err(lib_err)?;
        Ok(())
    })
}

/// Bessel function `J_1(x)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fosls_bessel_j1(x: f64, out: *mut f64) -> FoslsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = bessel_j1(x).map_err(lib_err)?;
        Ok(())
    })
}

/// Message for the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn fosls_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn fosls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
