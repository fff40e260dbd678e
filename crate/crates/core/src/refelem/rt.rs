//! Raviart-Thomas basis `RT_{p+1} = P_{p+1}^2 + x P~_{p+1}` on the reference triangle.
//!
//! The basis is the dual of the canonical degrees of freedom: normal-flux
//! moments against Legendre polynomials of degree `0..=p+1` on each edge,
//! followed by interior moments against an orthonormal basis of `P_p^2`.
//! It is obtained by inverting the functional/monomial matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::lagrange::REFERENCE_VERTICES;
use super::poly::{homogeneous, legendre01, monomial, monomial_grad, monomials_up_to, reference_monomial_integral};
use super::quadrature::{edge_quadrature, triangle_quadrature, EdgeQuadratureRule, QuadratureRule};
use super::MAX_ORDER;
use crate::error::{Error, Result};
use crate::mesh::LOCAL_EDGES;

/// Largest acceptable condition number of the dual matrix.
pub const MAX_DUAL_CONDITION: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SpanFn {
    /// `ξ^a η^b` in component `comp`.
    Component { comp: usize, mono: (usize, usize) },
    /// `ξ * ξ^a η^b` with `a + b = p + 1`.
    Radial { mono: (usize, usize) },
}

/// Span functions use centered, scaled coordinates `ξ = SCALE (x - CENTER)`,
/// which spans the same space and keeps the dual matrix well conditioned.
const CENTER: [f64; 2] = [1.0 / 3.0, 1.0 / 3.0];
const SCALE: f64 = 3.0;

fn local(x: [f64; 2]) -> [f64; 2] {
    [SCALE * (x[0] - CENTER[0]), SCALE * (x[1] - CENTER[1])]
}

impl SpanFn {
    fn value(&self, x: [f64; 2]) -> [f64; 2] {
        let x = local(x);
        match *self {
            SpanFn::Component { comp, mono } => {
                let v = monomial(x, mono);
                if comp == 0 {
                    [v, 0.0]
                } else {
                    [0.0, v]
                }
            }
            SpanFn::Radial { mono } => {
                let v = monomial(x, mono);
                [x[0] * v, x[1] * v]
            }
        }
    }

    fn divergence(&self, x: [f64; 2]) -> f64 {
        let x = local(x);
        SCALE
            * match *self {
                SpanFn::Component { comp, mono } => monomial_grad(x, mono)[comp],
                SpanFn::Radial { mono } => (mono.0 + mono.1 + 2) as f64 * monomial(x, mono),
            }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    /// `∫_F ψ·n L_degree(s) ds` with the outward normal and `s` running from the
    /// lower to the higher local vertex of the edge.
    EdgeMoment { edge: usize, degree: usize },
    /// `∫_K ψ_comp q_index` with `q_index` from an `L²(K̂)`-orthonormal basis of `P_p`.
    Interior { comp: usize, index: usize },
}

/// `L²`-orthonormal basis of `P_degree` on the reference triangle, by
/// Cholesky factorization of the exact monomial Gram matrix.
#[derive(Debug, Clone)]
struct OrthoPolys {
    monos: Vec<(usize, usize)>,
    /// Column `m` holds the monomial coefficients of `q_m`.
    coeffs: DMatrix<f64>,
}

impl OrthoPolys {
    fn new(degree: usize) -> Result<Self> {
        let monos = monomials_up_to(degree);
        let n = monos.len();
        let gram = DMatrix::from_fn(n, n, |i, j| {
            reference_monomial_integral(monos[i].0 + monos[j].0, monos[i].1 + monos[j].1)
        });
        let chol = gram.cholesky().ok_or(Error::IllConditioned(f64::INFINITY))?;
        let l_inv = chol.l().try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
        Ok(Self { monos, coeffs: l_inv.transpose() })
    }

    fn len(&self) -> usize {
        self.monos.len()
    }

    fn values(&self, x: [f64; 2]) -> Vec<f64> {
        let m: Vec<f64> = self.monos.iter().map(|&e| monomial(x, e)).collect();
        (0..self.len()).map(|q| m.iter().enumerate().map(|(j, mj)| self.coeffs[(j, q)] * mj).sum()).collect()
    }
}

/// Outward unit normal of local reference edge `e`.
pub fn reference_normal(e: usize) -> [f64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [[s, s], [-1.0, 0.0], [0.0, -1.0]][e]
}

pub fn reference_edge_length(e: usize) -> f64 {
    if e == 0 {
        std::f64::consts::SQRT_2
    } else {
        1.0
    }
}

/// Point at parameter `s` on local reference edge `e`.
pub fn reference_edge_point(e: usize, s: f64) -> [f64; 2] {
    let [a, b] = LOCAL_EDGES[e];
    let (xa, xb) = (REFERENCE_VERTICES[a], REFERENCE_VERTICES[b]);
    [xa[0] + s * (xb[0] - xa[0]), xa[1] + s * (xb[1] - xa[1])]
}

#[derive(Debug, Clone)]
pub struct RTBasis {
    pub order: usize,
    span: Vec<SpanFn>,
    pub functionals: Vec<Functional>,
    interior: OrthoPolys,
    /// Column `i` holds the span coefficients of basis function `i`.
    coeffs: DMatrix<f64>,
    pub dual_condition: f64,
    tri_rule: QuadratureRule,
    edge_rule: EdgeQuadratureRule,
}

impl RTBasis {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::InvalidArgument(format!("RT order {order} outside 1..={MAX_ORDER}")));
        }
        let p = order - 1;

        let mut span = Vec::new();
        for comp in 0..2 {
            for mono in monomials_up_to(order) {
                span.push(SpanFn::Component { comp, mono });
            }
        }
        for mono in homogeneous(order) {
            span.push(SpanFn::Radial { mono });
        }

        let mut functionals = Vec::new();
        for edge in 0..3 {
            for degree in 0..=order {
                functionals.push(Functional::EdgeMoment { edge, degree });
            }
        }
        let interior = OrthoPolys::new(p)?;
        for comp in 0..2 {
            for index in 0..interior.len() {
                functionals.push(Functional::Interior { comp, index });
            }
        }

        let rank = span_rank(&span);
        if rank != functionals.len() || span.len() != functionals.len() {
            return Err(Error::SpanDimension { span: rank, dofs: functionals.len() });
        }

        // Generous rules so that interpolation of smooth fields is accurate too.
        let degree = 2 * (order + 1) + 8;
        let tri_rule = triangle_quadrature(degree)?;
        let edge_rule = edge_quadrature(degree)?;

        let dim = span.len();
        let mut dual = DMatrix::<f64>::zeros(dim, dim);
        for (j, sf) in span.iter().enumerate() {
            let vals = apply_functionals(&functionals, &interior, &tri_rule, &edge_rule, |x| {
                let v = sf.value(x);
                [Complex64::new(v[0], 0.0), Complex64::new(v[1], 0.0)]
            });
            for (i, v) in vals.iter().enumerate() {
                dual[(i, j)] = v.re;
            }
        }
        let sv = dual.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let dual_condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if dual_condition > MAX_DUAL_CONDITION {
            return Err(Error::IllConditioned(dual_condition));
        }
        let coeffs = dual.try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;

        Ok(Self { order, span, functionals, interior, coeffs, dual_condition, tri_rule, edge_rule })
    }

    pub fn dim(&self) -> usize {
        self.span.len()
    }

    /// Degrees of freedom per edge, `p + 2`.
    pub fn edge_dofs(&self) -> usize {
        self.order + 1
    }

    pub fn num_interior(&self) -> usize {
        self.dim() - 3 * self.edge_dofs()
    }

    pub fn values(&self, x: [f64; 2]) -> Vec<[f64; 2]> {
        let s: Vec<[f64; 2]> = self.span.iter().map(|f| f.value(x)).collect();
        (0..self.dim())
            .map(|i| {
                s.iter().enumerate().fold([0.0, 0.0], |acc, (j, sj)| {
                    let c = self.coeffs[(j, i)];
                    [acc[0] + c * sj[0], acc[1] + c * sj[1]]
                })
            })
            .collect()
    }

    pub fn divergences(&self, x: [f64; 2]) -> Vec<f64> {
        let d: Vec<f64> = self.span.iter().map(|f| f.divergence(x)).collect();
        (0..self.dim())
            .map(|i| d.iter().enumerate().map(|(j, dj)| self.coeffs[(j, i)] * dj).sum())
            .collect()
    }

    /// Outward normal component of every basis function at parameter `s` of edge `e`.
    pub fn normal_traces(&self, e: usize, s: f64) -> Vec<f64> {
        let n = reference_normal(e);
        self.values(reference_edge_point(e, s))
            .iter()
            .map(|v| v[0] * n[0] + v[1] * n[1])
            .collect()
    }

    /// The degrees of freedom of a reference-coordinate field.
    pub fn apply_functionals(&self, field: impl Fn([f64; 2]) -> [Complex64; 2]) -> Vec<Complex64> {
        apply_functionals(&self.functionals, &self.interior, &self.tri_rule, &self.edge_rule, field)
    }
}

fn apply_functionals(
    functionals: &[Functional],
    interior: &OrthoPolys,
    tri_rule: &QuadratureRule,
    edge_rule: &EdgeQuadratureRule,
    field: impl Fn([f64; 2]) -> [Complex64; 2],
) -> Vec<Complex64> {
    let edge_vals: Vec<Vec<(f64, Complex64)>> = (0..3)
        .map(|e| {
            let n = reference_normal(e);
            let len = reference_edge_length(e);
            edge_rule
                .points
                .iter()
                .zip(&edge_rule.weights)
                .map(|(&s, &w)| {
                    let v = field(reference_edge_point(e, s));
                    (s, (v[0] * n[0] + v[1] * n[1]) * (w * len))
                })
                .collect()
        })
        .collect();
    let tri_vals: Vec<(Vec<f64>, f64, [Complex64; 2])> = tri_rule
        .points
        .iter()
        .zip(&tri_rule.weights)
        .map(|(&x, &w)| (interior.values(x), w, field(x)))
        .collect();

    functionals
        .iter()
        .map(|f| match *f {
            Functional::EdgeMoment { edge, degree } => {
                edge_vals[edge].iter().map(|&(s, v)| v * legendre01(degree, s)).sum()
            }
            Functional::Interior { comp, index } => {
                tri_vals.iter().map(|(q, w, v)| v[comp] * (w * q[index])).sum()
            }
        })
        .collect()
}

/// Numerical rank of a set of span functions sampled on a point cloud.
fn span_rank(span: &[SpanFn]) -> usize {
    let pts = triangle_quadrature(16).expect("fixed degree").points;
    let mut samples = DMatrix::<f64>::zeros(2 * pts.len(), span.len());
    for (j, f) in span.iter().enumerate() {
        for (i, &x) in pts.iter().enumerate() {
            let v = f.value(x);
            samples[(2 * i, j)] = v[0];
            samples[(2 * i + 1, j)] = v[1];
        }
    }
    samples.rank(1e-10 * samples.amax())
}
