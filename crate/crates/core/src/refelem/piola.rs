//! Contravariant Piola transform `ψ = B ψ̂ / det B` for affine maps.
//!
//! Under this map `div ψ = div̂ ψ̂ / det B` and the edge flux density
//! `(ψ·n) |F|` equals `(ψ̂·n̂) |F̂|`.

use num_complex::Complex64;

use super::lagrange::LagrangeBasis;
use super::rt::{reference_edge_length, RTBasis};
use crate::error::{Error, Result};
use crate::mesh::{AffineMap, Point, LOCAL_EDGES};

#[derive(Debug, Clone, PartialEq)]
pub struct PushedField {
    pub values: Vec<[f64; 2]>,
    pub divergences: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct PiolaMap<'a> {
    pub map: &'a AffineMap,
}

impl<'a> PiolaMap<'a> {
    pub fn new(map: &'a AffineMap) -> Result<Self> {
        if !(map.det > 0.0) {
            return Err(Error::SingularMap(map.det));
        }
        Ok(Self { map })
    }

    pub fn push_value(&self, v: [f64; 2]) -> [f64; 2] {
        let bv = self.map.jac_mul(v);
        [bv[0] / self.map.det, bv[1] / self.map.det]
    }

    pub fn push_divergence(&self, d: f64) -> f64 {
        d / self.map.det
    }

    /// Inverse transform `ψ̂ = det B · B^{-1} ψ`.
    pub fn pull_value(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let inv = &self.map.inv;
        let d = self.map.det;
        [
            (v[0] * inv[0][0] + v[1] * inv[0][1]) * d,
            (v[0] * inv[1][0] + v[1] * inv[1][1]) * d,
        ]
    }

    /// `|F̂| / |F|` for local edge `e`: the factor turning `ψ̂·n̂` into `ψ·n`.
    pub fn normal_trace_scale(&self, e: usize) -> f64 {
        reference_edge_length(e) / physical_edge_length(self.map, e)
    }

    /// Outward unit normal of local edge `e` of the physical triangle.
    pub fn outward_normal(&self, e: usize) -> [f64; 2] {
        physical_outward_normal(self.map, e)
    }
}

fn physical_edge_vector(map: &AffineMap, e: usize) -> Point {
    let [a, b] = LOCAL_EDGES[e];
    let r = super::lagrange::REFERENCE_VERTICES;
    let (xa, xb) = (map.apply(r[a]), map.apply(r[b]));
    [xb[0] - xa[0], xb[1] - xa[1]]
}

pub fn physical_edge_length(map: &AffineMap, e: usize) -> f64 {
    let d = physical_edge_vector(map, e);
    d[0].hypot(d[1])
}

pub fn physical_outward_normal(map: &AffineMap, e: usize) -> Point {
    let d = physical_edge_vector(map, e);
    let len = d[0].hypot(d[1]);
    // CCW triangle: edges 0 and 2 run counterclockwise, edge 1 runs clockwise.
    let n = [d[1] / len, -d[0] / len];
    if e == 1 {
        [-n[0], -n[1]]
    } else {
        n
    }
}

/// Push reference values and divergences forward to the physical element.
pub fn piola_push(map: &AffineMap, values: &[[f64; 2]], divergences: &[f64]) -> Result<PushedField> {
    let piola = PiolaMap::new(map)?;
    Ok(PushedField {
        values: values.iter().map(|&v| piola.push_value(v)).collect(),
        divergences: divergences.iter().map(|&d| piola.push_divergence(d)).collect(),
    })
}

/// Canonical interpolant of a physical vector field, as local coefficients.
pub fn rt_interpolate(
    field: impl Fn(Point) -> [Complex64; 2],
    map: &AffineMap,
    basis: &RTBasis,
) -> Result<Vec<Complex64>> {
    let piola = PiolaMap::new(map)?;
    Ok(basis.apply_functionals(|xh| piola.pull_value(field(map.apply(xh)))))
}

/// Nodal interpolant of a physical scalar field, as local coefficients.
pub fn lagrange_interpolate(field: impl Fn(Point) -> Complex64, map: &AffineMap, basis: &LagrangeBasis) -> Vec<Complex64> {
    basis.nodes.iter().map(|&xh| field(map.apply(xh))).collect()
}
