//! Gauss rules on the reference triangle and on the unit interval.
//!
//! Triangle rules are collapsed (Duffy) tensor products: Gauss-Legendre along
//! the collapsed coordinate and Gauss-Jacobi with weight `(1 - t)` across it.
//! Nodes and weights come from the Golub-Welsch eigenvalue problem.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 60;

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

#[derive(Debug, Clone)]
pub struct EdgeQuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

/// Gauss-Jacobi nodes and weights on `[-1, 1]` for the weight `(1-t)^alpha (1+t)^beta`.
fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let ab = alpha + beta;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let denom = (2.0 * kf + ab) * (2.0 * kf + ab + 2.0);
        jac[(k, k)] = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / denom
        };
        if k + 1 < n {
            let m = kf + 1.0;
            let s = 2.0 * m + ab;
            let num = 4.0 * m * (m + alpha) * (m + beta) * (m + ab);
            let off = (num / (s * s * (s + 1.0) * (s - 1.0))).sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let mu0 = 2f64.powf(ab + 1.0) * gamma_int(alpha) * gamma_int(beta) / gamma_int(ab + 1.0);
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `Gamma(x + 1)` for non-negative integer `x`.
fn gamma_int(x: f64) -> f64 {
    (1..=x.round() as usize).fold(1.0, |acc, i| acc * i as f64)
}

fn points_for(degree: usize) -> usize {
    degree / 2 + 1
}

/// Gauss-Legendre rule on `[0, 1]` exact to `degree`.
pub fn edge_quadrature(degree: usize) -> Result<EdgeQuadratureRule> {
    if degree > MAX_DEGREE {
        return Err(Error::InvalidArgument(format!("quadrature degree {degree} exceeds {MAX_DEGREE}")));
    }
    let n = points_for(degree);
    let (t, w) = gauss_jacobi(n, 0.0, 0.0);
    Ok(EdgeQuadratureRule {
        points: t.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        weights: w.iter().map(|w| 0.5 * w).collect(),
        exact_degree: 2 * n - 1,
    })
}

/// Collapsed rule on the reference triangle `(0,0), (1,0), (0,1)` exact to `degree`.
pub fn triangle_quadrature(degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_DEGREE {
        return Err(Error::InvalidArgument(format!("quadrature degree {degree} exceeds {MAX_DEGREE}")));
    }
    let n = points_for(degree);
    let (xi, wxi) = gauss_jacobi(n, 0.0, 0.0);
    let (eta, weta) = gauss_jacobi(n, 1.0, 0.0);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (e, we) in eta.iter().zip(&weta) {
        // (1 - t) dt = 4 (1 - y) dy under t = 2y - 1
        let y = 0.5 * (e + 1.0);
        for (x, wx) in xi.iter().zip(&wxi) {
            let s = 0.5 * (x + 1.0);
            points.push([s * (1.0 - y), y]);
            weights.push(0.5 * wx * 0.25 * we);
        }
    }
    Ok(QuadratureRule { points, weights, exact_degree: 2 * n - 1 })
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

impl EdgeQuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}
