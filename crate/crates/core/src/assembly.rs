//! Assembly of the FOSLS sesquilinear form and right-hand side.
//!
//! At each quadrature point every local basis function contributes a short
//! residual vector; the element matrix is the weighted Gram matrix of those
//! vectors, `A_ij = Σ_q w_q r_j(q)·conj(r_i(q))`. For the interior part a
//! flux basis function `ψ` gives `(ikψ_x, ikψ_y, div ψ)` and a scalar basis
//! function `v` gives `(∂_x v, ∂_y v, ikv)`. On boundary edges both give the
//! scalar `ψ·n` or `σv`, weighted by `k`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manufactured::{ExactSolution, RobinSign};
use crate::mesh::{Mesh, Point};
use crate::refelem::rt::reference_edge_point;
use crate::refelem::{
    edge_quadrature, quadrature_degree, triangle_quadrature, EdgeQuadratureRule, PiolaMap, QuadratureRule,
};
use crate::space::FESpacePair;
use crate::sparse::CsrMatrix;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Elements per parallel batch. Results are scattered in element order.
const BATCH: usize = 512;

pub type SourceFn = Arc<dyn Fn(Point) -> Complex64 + Send + Sync>;
/// Boundary datum as a function of the point and the outward unit normal.
pub type BoundaryFn = Arc<dyn Fn(Point, Point) -> Complex64 + Send + Sync>;

/// `-Δu - k²u = f` in the domain, `∂u/∂n - σ i k u = g` on its boundary.
#[derive(Clone)]
pub struct ProblemSpec {
    pub k: f64,
    pub sigma: RobinSign,
    pub f: SourceFn,
    pub g: BoundaryFn,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec").field("k", &self.k).field("sigma", &self.sigma).finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn new(k: f64, sigma: RobinSign, f: SourceFn, g: BoundaryFn) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidArgument(format!("wave number must be positive, got {k}")));
        }
        Ok(Self { k, sigma, f, g })
    }

    /// Data generated from a manufactured solution.
    pub fn from_exact(exact: &ExactSolution) -> Self {
        let (ef, eg) = (*exact, *exact);
        Self {
            k: exact.k,
            sigma: exact.sigma,
            f: Arc::new(move |x| ef.f(x)),
            g: Arc::new(move |x, n| eg.g(x, n)),
        }
    }

    /// `f = 0`, `g = 0`.
    pub fn homogeneous(k: f64, sigma: RobinSign) -> Result<Self> {
        Self::new(k, sigma, Arc::new(|_| ZERO), Arc::new(|_, _| ZERO))
    }
}

/// Assembled Hermitian system over the combined `[V; W]` coefficient vector.
#[derive(Debug, Clone)]
pub struct FoslsSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<Complex64>,
    /// `‖f/k‖² + ‖g‖²/k`, the constant term of the least-squares functional.
    pub data_norm_sq: f64,
    pub n_v: usize,
    pub n_w: usize,
    pub k: f64,
    pub sigma: RobinSign,
}

impl FoslsSystem {
    pub fn ndof(&self) -> usize {
        self.n_v + self.n_w
    }

    /// `cᴴBc - 2 Re(cᴴ rhs) + const`, the functional through the assembled matrix.
    pub fn quadratic_functional(&self, coeff: &[Complex64]) -> Result<f64> {
        let q = self.matrix.quadratic_form(coeff)?;
        let l = crate::sparse::dot(coeff, &self.rhs);
        Ok(q.re - 2.0 * l.re + self.data_norm_sq)
    }

    /// Write the matrix as `row,col,re,im` and the rhs as `index,re,im`.
    pub fn write_debug(&self, matrix: impl std::io::Write, mut rhs: impl std::io::Write) -> Result<()> {
        self.matrix.write_coo(matrix)?;
        writeln!(rhs, "index,re,im")?;
        for (i, v) in self.rhs.iter().enumerate() {
            writeln!(rhs, "{i},{:e},{:e}", v.re, v.im)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    Fosls,
    /// `‖φ‖² + ‖u‖² + k‖φ·n + σu‖²_{∂Ω}`
    Gram,
}

/// Reference basis tables at the quadrature points.
struct Tables {
    tri: QuadratureRule,
    edge: EdgeQuadratureRule,
    rt_val: Vec<Vec<[f64; 2]>>,
    rt_div: Vec<Vec<f64>>,
    lg_val: Vec<Vec<f64>>,
    lg_grad: Vec<Vec<[f64; 2]>>,
    /// `[local edge][edge point]`
    edge_rt: Vec<Vec<Vec<[f64; 2]>>>,
    edge_lg: Vec<Vec<Vec<f64>>>,
}

impl Tables {
    fn new(spaces: &FESpacePair) -> Result<Self> {
        let degree = quadrature_degree(spaces.order);
        let tri = triangle_quadrature(degree)?;
        let edge = edge_quadrature(degree)?;
        let (rt, lg) = (&spaces.rt, &spaces.lagrange);
        let edge_pts = |e: usize| edge.points.iter().map(move |&s| reference_edge_point(e, s));
        Ok(Self {
            rt_val: tri.points.iter().map(|&x| rt.values(x)).collect(),
            rt_div: tri.points.iter().map(|&x| rt.divergences(x)).collect(),
            lg_val: tri.points.iter().map(|&x| lg.values(x)).collect(),
            lg_grad: tri.points.iter().map(|&x| lg.gradients(x)).collect(),
            edge_rt: (0..3).map(|e| edge_pts(e).map(|x| rt.values(x)).collect()).collect(),
            edge_lg: (0..3).map(|e| edge_pts(e).map(|x| lg.values(x)).collect()).collect(),
            tri,
            edge,
        })
    }
}

struct Local {
    dofs: Vec<usize>,
    matrix: Vec<Complex64>,
    rhs: Vec<Complex64>,
    data_norm_sq: f64,
}

fn finite(v: Complex64, x: Point) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteData { x: x[0], y: x[1] })
    }
}

/// Combined global indices of triangle `t`: flux dofs, then scalar dofs.
fn element_dofs(spaces: &FESpacePair, t: usize) -> Vec<usize> {
    let (vd, _) = spaces.v_local(t);
    vd.iter().copied().chain(spaces.w_local(t).iter().map(|&g| spaces.n_v + g)).collect()
}

fn local_system(
    mesh: &Mesh,
    spaces: &FESpacePair,
    tables: &Tables,
    form: Form,
    k: f64,
    sigma: f64,
    data: Option<&ProblemSpec>,
    t: usize,
) -> Result<Local> {
    let map = mesh.element_map(t)?;
    let piola = PiolaMap::new(&map)?;
    let (_, signs) = spaces.v_local(t);
    let nrt = spaces.rt.dim();
    let nlg = spaces.lagrange.dim();
    let nloc = nrt + nlg;
    let ik = I * k;

    // columns[i] holds basis function i's residual entries, rows shared with `target`
    let mut columns: Vec<Vec<Complex64>> = vec![Vec::new(); nloc];
    let mut target: Vec<Complex64> = Vec::new();

    for (q, (&xh, &wh)) in tables.tri.points.iter().zip(&tables.tri.weights).enumerate() {
        let sw = (wh * map.det).sqrt();
        for i in 0..nrt {
            let s = signs[i] * sw;
            let v = piola.push_value(tables.rt_val[q][i]);
            let d = piola.push_divergence(tables.rt_div[q][i]);
            let col = &mut columns[i];
            match form {
                Form::Fosls => col.extend([ik * (s * v[0]), ik * (s * v[1]), Complex64::new(s * d, 0.0)]),
                Form::Gram => col.extend([Complex64::new(s * v[0], 0.0), Complex64::new(s * v[1], 0.0), ZERO]),
            }
        }
        for i in 0..nlg {
            let g = map.inv_t_mul(tables.lg_grad[q][i]);
            let v = tables.lg_val[q][i] * sw;
            let col = &mut columns[nrt + i];
            match form {
                Form::Fosls => col.extend([Complex64::new(sw * g[0], 0.0), Complex64::new(sw * g[1], 0.0), ik * v]),
                Form::Gram => col.extend([ZERO, ZERO, Complex64::new(v, 0.0)]),
            }
        }
        let rhs = match data {
            Some(p) => {
                let x = map.apply(xh);
                -I * finite((p.f)(x), x)? / k * sw
            }
            None => ZERO,
        };
        target.extend([ZERO, ZERO, rhs]);
    }

    for (le, inc) in mesh.incidence[t].iter().enumerate() {
        if !mesh.boundary[inc.edge] {
            continue;
        }
        let n = piola.outward_normal(le);
        let len = crate::refelem::piola::physical_edge_length(&map, le);
        for (q, (&s_par, &wq)) in tables.edge.points.iter().zip(&tables.edge.weights).enumerate() {
            let sw = (k * len * wq).sqrt();
            for i in 0..nrt {
                let v = piola.push_value(tables.edge_rt[le][q][i]);
                let flux = signs[i] * (v[0] * n[0] + v[1] * n[1]);
                columns[i].push(Complex64::new(sw * flux, 0.0));
            }
            for i in 0..nlg {
                columns[nrt + i].push(Complex64::new(sw * sigma * tables.edge_lg[le][q][i], 0.0));
            }
            let rhs = match data {
                Some(p) => {
                    let x = map.apply(reference_edge_point(le, s_par));
                    I * finite((p.g)(x, n), x)? / k * sw
                }
                None => ZERO,
            };
            target.push(rhs);
        }
    }

    let mut matrix = vec![ZERO; nloc * nloc];
    for i in 0..nloc {
        for j in 0..=i {
            let v: Complex64 = columns[i].iter().zip(&columns[j]).map(|(ri, rj)| rj * ri.conj()).sum();
            matrix[i * nloc + j] = v;
            matrix[j * nloc + i] = v.conj();
        }
        // keep the diagonal exactly real
        matrix[i * nloc + i].im = 0.0;
    }
    let rhs = columns.iter().map(|c| c.iter().zip(&target).map(|(r, tq)| tq * r.conj()).sum()).collect();
    let data_norm_sq = target.iter().map(|v| v.norm_sqr()).sum();
    Ok(Local { dofs: element_dofs(spaces, t), matrix, rhs, data_norm_sq })
}

fn assemble_form(
    mesh: &Mesh,
    spaces: &FESpacePair,
    form: Form,
    k: f64,
    sigma: RobinSign,
    data: Option<&ProblemSpec>,
    parallel: bool,
) -> Result<(CsrMatrix, Vec<Complex64>, f64)> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!("wave number must be positive, got {k}")));
    }
    let nt = mesh.num_triangles();
    if spaces.num_triangles() != nt {
        return Err(Error::InvalidArgument("spaces were built on a different mesh".into()));
    }
    let tables = Tables::new(spaces)?;
    let n = spaces.ndof();
    let elements: Vec<Vec<usize>> = (0..nt).map(|t| element_dofs(spaces, t)).collect();
    let mut matrix = CsrMatrix::from_element_pattern(n, &elements)?;
    drop(elements);
    let mut rhs = vec![ZERO; n];
    let mut data_norm_sq = 0.0;
    let sigma = sigma.value();

    let work = |t: usize| local_system(mesh, spaces, &tables, form, k, sigma, data, t);
    for start in (0..nt).step_by(BATCH) {
        let range = start..(start + BATCH).min(nt);
        let locals: Vec<Result<Local>> =
            if parallel { range.into_par_iter().map(work).collect() } else { range.map(work).collect() };
        for local in locals {
            let local = local?;
            matrix.add_local(&local.dofs, &local.matrix)?;
            for (&g, v) in local.dofs.iter().zip(&local.rhs) {
                rhs[g] += v;
            }
            data_norm_sq += local.data_norm_sq;
        }
    }
    Ok((matrix, rhs, data_norm_sq))
}

/// Assemble the FOSLS system. Element work runs on the rayon pool.
pub fn assemble(mesh: &Mesh, spaces: &FESpacePair, prob: &ProblemSpec) -> Result<FoslsSystem> {
    assemble_with(mesh, spaces, prob, true)
}

/// As [`assemble`], optionally on the calling thread only. The result is
/// bitwise identical either way.
pub fn assemble_with(mesh: &Mesh, spaces: &FESpacePair, prob: &ProblemSpec, parallel: bool) -> Result<FoslsSystem> {
    let (matrix, rhs, data_norm_sq) =
        assemble_form(mesh, spaces, Form::Fosls, prob.k, prob.sigma, Some(prob), parallel)?;
    Ok(FoslsSystem { matrix, rhs, data_norm_sq, n_v: spaces.n_v, n_w: spaces.n_w, k: prob.k, sigma: prob.sigma })
}

/// Gram matrix of `‖φ‖² + ‖u‖² + k‖φ·n + σu‖²_{∂Ω}` on the discrete space.
pub fn assemble_gram(mesh: &Mesh, spaces: &FESpacePair, k: f64, sigma: RobinSign) -> Result<CsrMatrix> {
    Ok(assemble_form(mesh, spaces, Form::Gram, k, sigma, None, true)?.0)
}

/// The three squared residual norms of a discrete pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualParts {
    /// `‖ikφ + ∇u‖²`
    pub flux: f64,
    /// `‖iku + div φ + if/k‖²`
    pub equation: f64,
    /// `k‖φ·n + σu - ig/k‖²_{∂Ω}`
    pub boundary: f64,
}

impl ResidualParts {
    pub fn total(&self) -> f64 {
        self.flux + self.equation + self.boundary
    }
}

/// Least-squares functional of `coeff`, by quadrature of the evaluated fields.
pub fn residual_functional(mesh: &Mesh, spaces: &FESpacePair, coeff: &[Complex64], prob: &ProblemSpec) -> Result<f64> {
    Ok(residual_parts(mesh, spaces, coeff, prob)?.total())
}

pub fn residual_parts(
    mesh: &Mesh,
    spaces: &FESpacePair,
    coeff: &[Complex64],
    prob: &ProblemSpec,
) -> Result<ResidualParts> {
    spaces.check_len(coeff)?;
    let degree = quadrature_degree(spaces.order);
    let tri = triangle_quadrature(degree)?;
    let edge = edge_quadrature(degree)?;
    let (k, sigma) = (prob.k, prob.sigma.value());
    let ik = I * k;

    let parts: Vec<Result<ResidualParts>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let map = mesh.element_map(t)?;
            let mut acc = ResidualParts::default();
            for (&xh, &w) in tri.points.iter().zip(&tri.weights) {
                let fv = spaces.evaluate(mesh, coeff, t, xh)?;
                let x = map.apply(xh);
                let f = finite((prob.f)(x), x)?;
                let w = w * map.det;
                acc.flux += w * ((ik * fv.phi[0] + fv.grad_u[0]).norm_sqr() + (ik * fv.phi[1] + fv.grad_u[1]).norm_sqr());
                acc.equation += w * (ik * fv.u + fv.div_phi + I * f / k).norm_sqr();
            }
            for (le, inc) in mesh.incidence[t].iter().enumerate() {
                if !mesh.boundary[inc.edge] {
                    continue;
                }
                let n = crate::refelem::piola::physical_outward_normal(&map, le);
                let len = crate::refelem::piola::physical_edge_length(&map, le);
                for (&s, &w) in edge.points.iter().zip(&edge.weights) {
                    let xh = reference_edge_point(le, s);
                    let x = map.apply(xh);
                    let fv = spaces.evaluate(mesh, coeff, t, xh)?;
                    let g = finite((prob.g)(x, n), x)?;
                    let r = fv.phi[0] * n[0] + fv.phi[1] * n[1] + sigma * fv.u - I * g / k;
                    acc.boundary += k * len * w * r.norm_sqr();
                }
            }
            Ok(acc)
        })
        .collect();
    // sum in element order
    let mut total = ResidualParts::default();
    for p in parts {
        let p = p?;
        total.flux += p.flux;
        total.equation += p.equation;
        total.boundary += p.boundary;
    }
    Ok(total)
}

/// `b(x, y)` for two combined coefficient vectors: `yᴴ B x`.
pub fn bilinear(sys: &FoslsSystem, x: &[Complex64], y: &[Complex64]) -> Result<Complex64> {
    let bx = sys.matrix.matvec(x)?;
    if y.len() != bx.len() {
        return Err(Error::DimensionMismatch { expected: bx.len(), got: y.len() });
    }
    Ok(crate::sparse::dot(y, &bx))
}
