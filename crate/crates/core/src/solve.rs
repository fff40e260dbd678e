//! Hermitian positive definite solvers: sparse Cholesky and Jacobi-preconditioned CG.

use std::time::Instant;

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::cholesky::factorize_symbolic_cholesky;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, MatMut, Par, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembly::FoslsSystem;
use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, CsrMatrix};

/// Relative residual a direct solve must reach.
pub const DIRECT_TOLERANCE: f64 = 1e-10;

/// Bytes per stored factor entry, including index overhead.
const FACTOR_ENTRY_BYTES: u64 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    /// Direct when the factor fits the memory budget, CG otherwise.
    #[default]
    Auto,
    Direct,
    Cg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Direct,
    Cg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub choice: SolverChoice,
    pub cg_tolerance: f64,
    pub cg_max_iterations: usize,
    /// Estimated factor size above which `Auto` falls back to CG.
    pub max_factor_bytes: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { choice: SolverChoice::Auto, cg_tolerance: 1e-10, cg_max_iterations: 20_000, max_factor_bytes: 8 << 30 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: SolveMethod,
    /// Zero for direct solves.
    pub iterations: usize,
    /// `‖Bx - rhs‖ / ‖rhs‖`, recomputed from the returned vector.
    pub relative_residual: f64,
    pub time_s: f64,
}

/// Lower triangle in compressed-column form, as the factorization reads it.
fn lower_triangle(matrix: &CsrMatrix) -> Result<SparseColMat<usize, Complex64>> {
    if matrix.nrows != matrix.ncols {
        return Err(Error::DimensionMismatch { expected: matrix.nrows, got: matrix.ncols });
    }
    let trips: Vec<Triplet<usize, usize, Complex64>> =
        matrix.triplets().filter(|&(r, c, _)| r >= c).map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    SparseColMat::try_new_from_triplets(matrix.nrows, matrix.ncols, &trips)
        .map_err(|e| Error::Factorization(format!("{e:?}")))
}

/// Estimated memory of the Cholesky factor, from the symbolic analysis.
pub fn estimate_factor_bytes(matrix: &CsrMatrix) -> Result<u64> {
    let lower = lower_triangle(matrix)?;
    let sym = factorize_symbolic_cholesky(lower.symbolic(), Side::Lower, Default::default(), Default::default())
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    Ok(sym.len_val() as u64 * FACTOR_ENTRY_BYTES)
}

/// A reusable `LLᴴ` factorization.
pub struct HermitianFactor {
    llt: faer::sparse::linalg::solvers::Llt<usize, Complex64>,
    n: usize,
}

impl std::fmt::Debug for HermitianFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HermitianFactor").field("n", &self.n).finish_non_exhaustive()
    }
}

impl HermitianFactor {
    pub fn new(matrix: &CsrMatrix) -> Result<Self> {
        // sequential factorization keeps results independent of the machine
        faer::set_global_parallelism(Par::Seq);
        let lower = lower_triangle(matrix)?;
        let llt = lower.sp_cholesky(Side::Lower).map_err(|e| match e {
            faer::sparse::linalg::LltError::Numeric(_) => Error::NonPositivePivot,
            other => Error::Factorization(format!("{other:?}")),
        })?;
        Ok(Self { llt, n: matrix.nrows })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        if rhs.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: rhs.len() });
        }
        let mut x = rhs.to_vec();
        let view = MatMut::from_column_major_slice_mut(&mut x, self.n, 1);
        self.llt.solve_in_place_with_conj(Conj::No, view);
        Ok(x)
    }
}

fn relative_residual(matrix: &CsrMatrix, x: &[Complex64], rhs: &[Complex64]) -> Result<f64> {
    let bnorm = norm2(rhs);
    let ax = matrix.matvec(x)?;
    let r: Vec<Complex64> = ax.iter().zip(rhs).map(|(a, b)| b - a).collect();
    Ok(if bnorm == 0.0 { norm2(&r) } else { norm2(&r) / bnorm })
}

/// Factor and solve `Bx = rhs`, with up to three refinement steps if the
/// residual misses [`DIRECT_TOLERANCE`].
pub fn solve_direct_matrix(matrix: &CsrMatrix, rhs: &[Complex64]) -> Result<(Vec<Complex64>, SolveReport)> {
    let start = Instant::now();
    if rhs.len() != matrix.nrows {
        return Err(Error::DimensionMismatch { expected: matrix.nrows, got: rhs.len() });
    }
    let factor = HermitianFactor::new(matrix)?;
    let mut x = factor.solve(rhs)?;
    let mut res = relative_residual(matrix, &x, rhs)?;
    for _ in 0..3 {
        if res <= DIRECT_TOLERANCE {
            break;
        }
        let ax = matrix.matvec(&x)?;
        let r: Vec<Complex64> = ax.iter().zip(rhs).map(|(a, b)| b - a).collect();
        let d = factor.solve(&r)?;
        x.iter_mut().zip(&d).for_each(|(xi, di)| *xi += di);
        res = relative_residual(matrix, &x, rhs)?;
    }
    if res > DIRECT_TOLERANCE {
        return Err(Error::Factorization(format!("relative residual {res:.3e} above {DIRECT_TOLERANCE:e}")));
    }
    let report =
        SolveReport { method: SolveMethod::Direct, iterations: 0, relative_residual: res, time_s: start.elapsed().as_secs_f64() };
    Ok((x, report))
}

pub fn solve_direct(sys: &FoslsSystem) -> Result<(Vec<Complex64>, SolveReport)> {
    solve_direct_matrix(&sys.matrix, &sys.rhs)
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
///
/// On failure the error carries the iterate with the smallest residual seen.
pub fn solve_cg_matrix(
    matrix: &CsrMatrix,
    rhs: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<Complex64>, SolveReport)> {
    let start = Instant::now();
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("CG tolerance must be positive, got {tol}")));
    }
    let n = matrix.nrows;
    if rhs.len() != n || matrix.ncols != n {
        return Err(Error::DimensionMismatch { expected: n, got: rhs.len() });
    }
    let inv_diag: Vec<f64> = matrix
        .diagonal()
        .iter()
        .map(|d| if d.re > 0.0 { Ok(1.0 / d.re) } else { Err(Error::NonPositivePivot) })
        .collect::<Result<_>>()?;

    let zero = Complex64::new(0.0, 0.0);
    let bnorm = norm2(rhs);
    let mut x = vec![zero; n];
    let report = |it: usize, res: f64| SolveReport {
        method: SolveMethod::Cg,
        iterations: it,
        relative_residual: res,
        time_s: start.elapsed().as_secs_f64(),
    };
    if bnorm == 0.0 {
        return Ok((x, report(0, 0.0)));
    }

    let mut r = rhs.to_vec();
    let mut z: Vec<Complex64> = r.iter().zip(&inv_diag).map(|(ri, d)| ri * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z).re;
    let mut ap = vec![zero; n];
    let mut best = (1.0, x.clone());

    for it in 1..=max_iter {
        matrix.matvec_into(&p, &mut ap)?;
        let pap = dot(&p, &ap).re;
        if !(pap > 0.0) {
            return Err(Error::NonPositivePivot);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
        }
        let res = norm2(&r) / bnorm;
        if res < best.0 {
            best = (res, x.clone());
        }
        if res <= tol {
            let true_res = relative_residual(matrix, &x, rhs)?;
            return Ok((x, report(it, true_res)));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z).re;
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + p[i] * beta;
        }
    }
    Err(Error::CgNotConverged { iterations: max_iter, residual: best.0, best: Box::new(best.1) })
}

pub fn solve_cg(sys: &FoslsSystem, tol: f64, max_iter: usize) -> Result<(Vec<Complex64>, SolveReport)> {
    solve_cg_matrix(&sys.matrix, &sys.rhs, tol, max_iter)
}

/// Solve with the configured method.
pub fn solve(sys: &FoslsSystem, opts: &SolverOptions) -> Result<(Vec<Complex64>, SolveReport)> {
    let direct = match opts.choice {
        SolverChoice::Direct => true,
        SolverChoice::Cg => false,
        SolverChoice::Auto => estimate_factor_bytes(&sys.matrix)? <= opts.max_factor_bytes,
    };
    if direct {
        solve_direct(sys)
    } else {
        solve_cg(sys, opts.cg_tolerance, opts.cg_max_iterations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn identity(n: usize) -> CsrMatrix {
        let t: Vec<_> = (0..n).map(|i| (i, i, c(1.0, 0.0))).collect();
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    fn two_by_two() -> CsrMatrix {
        CsrMatrix::from_triplets(2, 2, &[(0, 0, c(2.0, 0.0)), (0, 1, c(0.0, 1.0)), (1, 0, c(0.0, -1.0)), (1, 1, c(2.0, 0.0))])
            .unwrap()
    }

    #[test]
    fn identity_direct() {
        let b = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let (x, rep) = solve_direct_matrix(&identity(3), &b).unwrap();
        assert_eq!(x, b);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn hand_inverted_hermitian() {
        // inverse of [[2, i], [-i, 2]] is [[2, -i], [i, 2]] / 3
        let (x, _) = solve_direct_matrix(&two_by_two(), &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((x[0] - c(2.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - c(0.0, 1.0 / 3.0)).norm() < 1e-15);
        let (y, rep) = solve_cg_matrix(&two_by_two(), &[c(1.0, 0.0), c(0.0, 0.0)], 1e-14, 10).unwrap();
        assert!((y[1] - x[1]).norm() < 1e-13 && rep.iterations <= 2);
    }

    #[test]
    fn indefinite_is_rejected() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 0, c(1.0, 0.0)), (0, 1, c(2.0, 0.0)), (1, 0, c(2.0, 0.0)), (1, 1, c(1.0, 0.0))])
            .unwrap();
        assert!(matches!(solve_direct_matrix(&m, &[c(1.0, 0.0), c(0.0, 0.0)]), Err(Error::NonPositivePivot)));
    }

    #[test]
    fn cg_identity_one_iteration() {
        let (x, rep) = solve_cg_matrix(&identity(4), &[c(1.0, 2.0); 4], 1e-12, 5).unwrap();
        assert_eq!(rep.iterations, 1);
        assert_eq!(x, vec![c(1.0, 2.0); 4]);
    }

    #[test]
    fn cg_zero_iterations_fails() {
        match solve_cg_matrix(&identity(2), &[c(1.0, 0.0); 2], 1e-12, 0) {
            Err(Error::CgNotConverged { iterations, residual, .. }) => {
                assert_eq!(iterations, 0);
                assert_eq!(residual, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let (x, rep) = solve_direct_matrix(&two_by_two(), &[c(0.0, 0.0); 2]).unwrap();
        assert_eq!(x, vec![c(0.0, 0.0); 2]);
        assert_eq!(rep.relative_residual, 0.0);
    }

    #[test]
    fn factor_estimate_is_positive() {
        assert!(estimate_factor_bytes(&two_by_two()).unwrap() >= 3 * FACTOR_ENTRY_BYTES);
    }
}
