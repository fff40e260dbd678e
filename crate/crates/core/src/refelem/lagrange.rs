//! Nodal `P_{p+1}` basis on the reference triangle with equispaced nodes.

use nalgebra::DMatrix;

use super::poly::{monomial, monomial_grad, monomials_up_to};
use super::MAX_ORDER;
use crate::error::{Error, Result};
use crate::mesh::LOCAL_EDGES;

pub const REFERENCE_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Vertex(usize),
    /// `index` runs `1..=p` from the lower to the higher local vertex of `edge`.
    Edge { edge: usize, index: usize },
    Interior(usize),
}

#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    pub order: usize,
    pub nodes: Vec<[f64; 2]>,
    pub kinds: Vec<NodeKind>,
    monomials: Vec<(usize, usize)>,
    /// Column `i` holds the monomial coefficients of basis function `i`.
    coeffs: DMatrix<f64>,
}

impl LagrangeBasis {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::InvalidArgument(format!("Lagrange order {order} outside 1..={MAX_ORDER}")));
        }
        let p = order - 1;
        let mut nodes = Vec::new();
        let mut kinds = Vec::new();
        for (v, &x) in REFERENCE_VERTICES.iter().enumerate() {
            nodes.push(x);
            kinds.push(NodeKind::Vertex(v));
        }
        for (e, &[a, b]) in LOCAL_EDGES.iter().enumerate() {
            let (xa, xb) = (REFERENCE_VERTICES[a], REFERENCE_VERTICES[b]);
            for m in 1..=p {
                let t = m as f64 / order as f64;
                nodes.push([xa[0] + t * (xb[0] - xa[0]), xa[1] + t * (xb[1] - xa[1])]);
                kinds.push(NodeKind::Edge { edge: e, index: m });
            }
        }
        let mut interior = 0;
        for j in 1..order {
            for i in 1..order - j {
                nodes.push([i as f64 / order as f64, j as f64 / order as f64]);
                kinds.push(NodeKind::Interior(interior));
                interior += 1;
            }
        }

        let monomials = monomials_up_to(order);
        let dim = monomials.len();
        debug_assert_eq!(nodes.len(), dim);
        let vander = DMatrix::from_fn(dim, dim, |i, j| monomial(nodes[i], monomials[j]));
        let coeffs = vander
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("singular Lagrange Vandermonde".into()))?;
        Ok(Self { order, nodes, kinds, monomials, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_interior(&self) -> usize {
        let p = self.order - 1;
        p * p.saturating_sub(1) / 2
    }

    pub fn values(&self, x: [f64; 2]) -> Vec<f64> {
        let m: Vec<f64> = self.monomials.iter().map(|&e| monomial(x, e)).collect();
        (0..self.dim())
            .map(|i| m.iter().enumerate().map(|(j, mj)| self.coeffs[(j, i)] * mj).sum())
            .collect()
    }

    pub fn gradients(&self, x: [f64; 2]) -> Vec<[f64; 2]> {
        let g: Vec<[f64; 2]> = self.monomials.iter().map(|&e| monomial_grad(x, e)).collect();
        (0..self.dim())
            .map(|i| {
                g.iter().enumerate().fold([0.0, 0.0], |acc, (j, gj)| {
                    let c = self.coeffs[(j, i)];
                    [acc[0] + c * gj[0], acc[1] + c * gj[1]]
                })
            })
            .collect()
    }
}
