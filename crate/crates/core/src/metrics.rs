//! Error norms, field sampling and the coercivity probe.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, assemble_gram, residual_functional, ProblemSpec};
use crate::error::{Error, Result};
use crate::manufactured::{ExactSolution, RobinSign};
use crate::mesh::Mesh;
use crate::refelem::{quadrature_degree, triangle_quadrature};
use crate::solve::HermitianFactor;
use crate::space::FESpacePair;
use crate::sparse::{dot, CsrMatrix};

/// Default size limit of the coercivity probe.
pub const PROBE_MAX_DOFS: usize = 3000;
/// Step cap of the eigenvalue iteration.
pub const PROBE_MAX_STEPS: usize = 500;
const PROBE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub k: f64,
    pub p_plus_1: usize,
    pub n: usize,
    pub h: f64,
    pub kh_over_p: f64,
    pub ndof: usize,
    /// `‖u - u_h‖ / ‖u‖` in L²
    pub rel_err_u: f64,
    /// `‖φ - φ_h‖ / ‖φ‖` in L²
    pub rel_err_phi: f64,
    pub fosls_residual: f64,
}

/// Relative L² errors against an exact solution, plus the least-squares residual.
pub fn compute_errors(mesh: &Mesh, spaces: &FESpacePair, coeff: &[Complex64], exact: &ExactSolution) -> Result<ErrorReport> {
    spaces.check_len(coeff)?;
    let rule = triangle_quadrature(quadrature_degree(spaces.order))?;
    let parts: Vec<Result<[f64; 4]>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let map = mesh.element_map(t)?;
            let mut acc = [0.0; 4];
            for (&xh, &w) in rule.points.iter().zip(&rule.weights) {
                let x = map.apply(xh);
                let fv = spaces.evaluate(mesh, coeff, t, xh)?;
                let (u, phi) = (exact.u(x), exact.phi(x));
                let w = w * map.det;
                acc[0] += w * (u - fv.u).norm_sqr();
                acc[1] += w * u.norm_sqr();
                acc[2] += w * ((phi[0] - fv.phi[0]).norm_sqr() + (phi[1] - fv.phi[1]).norm_sqr());
                acc[3] += w * (phi[0].norm_sqr() + phi[1].norm_sqr());
            }
            Ok(acc)
        })
        .collect();
    let mut s = [0.0; 4];
    for p in parts {
        let p = p?;
        for i in 0..4 {
            s[i] += p[i];
        }
    }
    let ratio = |num: f64, den: f64| if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    let prob = ProblemSpec::from_exact(exact);
    Ok(ErrorReport {
        k: exact.k,
        p_plus_1: spaces.order,
        n: mesh.n,
        h: mesh.h,
        kh_over_p: exact.k * mesh.h / spaces.order as f64,
        ndof: spaces.ndof(),
        rel_err_u: ratio(s[0], s[1]),
        rel_err_phi: ratio(s[2], s[3]),
        fosls_residual: residual_functional(mesh, spaces, coeff, &prob)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub x: f64,
    pub re_u: f64,
    pub im_u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSample {
    pub x: f64,
    pub y: f64,
    pub re_u: f64,
    pub im_u: f64,
}

fn equispaced(a: f64, b: f64, m: usize) -> impl Iterator<Item = f64> {
    (0..m).map(move |i| if m == 1 { 0.5 * (a + b) } else if i + 1 == m { b } else { a + (b - a) * i as f64 / (m - 1) as f64 })
}

/// `m` equispaced samples of `u_h` along the line `y = const`, endpoints included.
pub fn sample_trace(mesh: &Mesh, spaces: &FESpacePair, coeff: &[Complex64], y: f64, m: usize) -> Result<Vec<TraceSample>> {
    let d = &mesh.domain;
    if !(y >= d.ymin && y <= d.ymax) {
        return Err(Error::InvalidArgument(format!("line y = {y} misses the domain [{}, {}]", d.ymin, d.ymax)));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    equispaced(d.xmin, d.xmax, m)
        .map(|x| {
            let u = spaces.evaluate_at(mesh, coeff, [x, y])?.u;
            Ok(TraceSample { x, re_u: u.re, im_u: u.im })
        })
        .collect()
}

/// `u_h` on an `m x m` grid covering the domain, row by row in `y`.
pub fn sample_grid(mesh: &Mesh, spaces: &FESpacePair, coeff: &[Complex64], m: usize) -> Result<Vec<GridSample>> {
    if m == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let d = &mesh.domain;
    let xs: Vec<f64> = equispaced(d.xmin, d.xmax, m).collect();
    let mut out = Vec::with_capacity(m * m);
    for y in equispaced(d.ymin, d.ymax, m) {
        for &x in &xs {
            let u = spaces.evaluate_at(mesh, coeff, [x, y])?.u;
            out.push(GridSample { x, y, re_u: u.re, im_u: u.im });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub lambda_min: f64,
    pub iterations: usize,
    pub ndof: usize,
}

/// Smallest eigenvalue of `B x = λ M x`, with `B` the FOSLS matrix and `M`
/// the Gram matrix of `‖φ‖² + ‖u‖² + k‖φ·n + σu‖²_{∂Ω}`.
///
/// This is inverse iteration accelerated by Lanczos: the Krylov space of
/// `B⁻¹M` is built with the `M` inner product (full reorthogonalization) and
/// the largest Ritz value gives `1/λ_min`.
pub fn coercivity_probe(mesh: &Mesh, spaces: &FESpacePair, k: f64, sigma: RobinSign) -> Result<CoercivityReport> {
    coercivity_probe_limited(mesh, spaces, k, sigma, PROBE_MAX_DOFS)
}

pub fn coercivity_probe_limited(
    mesh: &Mesh,
    spaces: &FESpacePair,
    k: f64,
    sigma: RobinSign,
    max_dofs: usize,
) -> Result<CoercivityReport> {
    if spaces.ndof() > max_dofs {
        return Err(Error::ResourceCap(format!("coercivity probe on {} dofs exceeds the limit {max_dofs}", spaces.ndof())));
    }
    let b = assemble(mesh, spaces, &ProblemSpec::homogeneous(k, sigma)?)?.matrix;
    let m = assemble_gram(mesh, spaces, k, sigma)?;
    // M must be positive definite for the pencil to make sense
    HermitianFactor::new(&m)?;
    let (mu, iterations) = largest_pencil_eigenvalue(&b, &m)?;
    Ok(CoercivityReport { lambda_min: 1.0 / mu, iterations, ndof: spaces.ndof() })
}

/// Largest eigenvalue of `B⁻¹M` and the Lanczos steps it took.
fn largest_pencil_eigenvalue(b: &CsrMatrix, m: &CsrMatrix) -> Result<(f64, usize)> {
    let n = b.nrows;
    let factor = HermitianFactor::new(b)?;
    let m_norm = |v: &[Complex64]| -> Result<f64> { Ok(dot(v, &m.matvec(v)?).re.max(0.0).sqrt()) };

    // deterministic, non-special start vector
    let mut q: Vec<Complex64> =
        (0..n).map(|i| Complex64::new(1.0 + 0.5 * (i as f64 * 0.7).sin(), 0.3 * (i as f64 * 1.3).cos())).collect();
    let nq = m_norm(&q)?;
    q.iter_mut().for_each(|v| *v /= nq);

    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut mbasis: Vec<Vec<Complex64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let steps = PROBE_MAX_STEPS.min(n);

    for j in 0..steps {
        let mq = m.matvec(&q)?;
        let mut w = factor.solve(&mq)?;
        let a = dot(&mq, &w).re;
        basis.push(q);
        mbasis.push(mq);
        alpha.push(a);
        // two passes of Gram-Schmidt in the M inner product
        for _ in 0..2 {
            for (v, mv) in basis.iter().zip(&mbasis) {
                let c = dot(mv, &w);
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
            }
        }
        let bnext = m_norm(&w)?;

        let dim = alpha.len();
        let t = DMatrix::from_fn(dim, dim, |r, c| {
            if r == c {
                alpha[r]
            } else if r == c + 1 {
                beta[c]
            } else if c == r + 1 {
                beta[r]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (imax, &mu) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .ok_or(Error::EigenNotConverged(j))?;
        let resid = (bnext * eig.eigenvectors[(dim - 1, imax)]).abs();
        if resid <= PROBE_TOLERANCE * mu.abs() || bnext <= f64::EPSILON * mu.abs() || dim == n {
            return Ok((mu, j + 1));
        }
        beta.push(bnext);
        q = w.into_iter().map(|v| v / bnext).collect();
    }
    Err(Error::EigenNotConverged(steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manufactured::{bessel_exact, polynomial_exact};
    use crate::mesh::{build_uniform_mesh, DomainBox};
    use crate::space::build_spaces;

    #[test]
    fn in_space_fields_have_zero_error() {
        let ex = polynomial_exact(2.0, RobinSign::Plus).unwrap();
        let m = build_uniform_mesh(ex.domain, 2).unwrap();
        for order in 1..=4 {
            let s = build_spaces(&m, order).unwrap();
            let c = s.interpolate(&m, |x| ex.phi(x), |x| ex.u(x)).unwrap();
            let r = compute_errors(&m, &s, &c, &ex).unwrap();
            assert!(r.rel_err_u <= 1e-9 && r.rel_err_phi <= 1e-9, "{r:?}");
        }
    }

    #[test]
    fn zero_coefficients_give_unit_error() {
        let ex = bessel_exact(5.0, RobinSign::Minus).unwrap();
        let m = build_uniform_mesh(ex.domain, 2).unwrap();
        let s = build_spaces(&m, 1).unwrap();
        let r = compute_errors(&m, &s, &vec![Complex64::new(0.0, 0.0); s.ndof()], &ex).unwrap();
        assert!((r.rel_err_u - 1.0).abs() < 1e-15 && (r.rel_err_phi - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trace_of_constant_field() {
        let m = build_uniform_mesh(DomainBox::centered_unit_square(), 3).unwrap();
        let s = build_spaces(&m, 2).unwrap();
        let c = s.interpolate(&m, |_| [Complex64::new(0.0, 0.0); 2], |_| Complex64::new(0.25, -1.0)).unwrap();
        let tr = sample_trace(&m, &s, &c, 0.0, 17).unwrap();
        assert_eq!(tr.len(), 17);
        assert_eq!(tr[0].x, -0.5);
        assert_eq!(tr[16].x, 0.5);
        for p in &tr {
            assert!((p.re_u - 0.25).abs() < 1e-13 && (p.im_u + 1.0).abs() < 1e-13);
        }
        let g = sample_grid(&m, &s, &c, 5).unwrap();
        assert_eq!(g.len(), 25);
        assert!(sample_trace(&m, &s, &c, 0.7, 4).is_err());
    }

    #[test]
    fn probe_is_positive_and_guarded() {
        let m = build_uniform_mesh(DomainBox::unit_square(), 4).unwrap();
        let s = build_spaces(&m, 1).unwrap();
        for k in [1.0, 10.0, 40.0] {
            let r = coercivity_probe(&m, &s, k, RobinSign::Plus).unwrap();
            assert!(r.lambda_min > 0.0, "k = {k}: {r:?}");
        }
        let big = build_uniform_mesh(DomainBox::unit_square(), 20).unwrap();
        let s = build_spaces(&big, 2).unwrap();
        assert!(matches!(coercivity_probe(&big, &s, 1.0, RobinSign::Plus), Err(Error::ResourceCap(_))));
    }

    #[test]
    fn lanczos_matches_dense_pencil() {
        // diagonal pencil with known spectrum
        let n = 40;
        let c = |v: f64| Complex64::new(v, 0.0);
        let b: Vec<_> = (0..n).map(|i| (i, i, c(1.0 + i as f64))).collect();
        let m: Vec<_> = (0..n).map(|i| (i, i, c(2.0))).collect();
        let b = CsrMatrix::from_triplets(n, n, &b).unwrap();
        let m = CsrMatrix::from_triplets(n, n, &m).unwrap();
        let (mu, _) = largest_pencil_eigenvalue(&b, &m).unwrap();
        assert!((1.0 / mu - 0.5).abs() < 1e-9);
    }
}
