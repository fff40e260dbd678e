//! Global numbering for the pair `V_h x W_h` (Raviart-Thomas x continuous Lagrange).
//!
//! Combined coefficient vectors are laid out `[V-block; W-block]`. Within each
//! block edge degrees of freedom come first (by global edge, then moment
//! degree or node position), followed by element interiors. Lagrange vertex
//! values precede the edge nodes in the W-block.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::refelem::{rt_interpolate, LagrangeBasis, NodeKind, PiolaMap, RTBasis};

#[derive(Debug, Clone)]
pub struct FESpacePair {
    pub order: usize,
    pub rt: RTBasis,
    pub lagrange: LagrangeBasis,
    pub n_v: usize,
    pub n_w: usize,
    v_dofs: Vec<usize>,
    v_signs: Vec<f64>,
    w_dofs: Vec<usize>,
    pub boundary: BoundaryDofs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub edge: usize,
    pub triangle: usize,
    pub local_edge: usize,
    /// RT degrees of freedom living on this edge (global V indices).
    pub v_dofs: Vec<usize>,
    /// Lagrange nodes on the closed edge (global W indices, unshifted).
    pub w_dofs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundaryDofs {
    pub v_dofs: Vec<usize>,
    pub edges: Vec<BoundaryEdge>,
}

/// Discrete fields at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldValue {
    pub phi: [Complex64; 2],
    pub div_phi: Complex64,
    pub u: Complex64,
    pub grad_u: [Complex64; 2],
}

pub fn build_spaces(mesh: &Mesh, p_plus_1: usize) -> Result<FESpacePair> {
    let rt = RTBasis::new(p_plus_1)?;
    let lagrange = LagrangeBasis::new(p_plus_1)?;
    let p = p_plus_1 - 1;
    let ne = mesh.num_edges();
    let nt = mesh.num_triangles();
    let nv = mesh.num_vertices();

    let per_edge = rt.edge_dofs();
    let rt_int = rt.num_interior();
    let n_v = ne * per_edge + nt * rt_int;
    let lag_int = lagrange.num_interior();
    let n_w = nv + ne * p + nt * lag_int;

    let mut v_dofs = Vec::with_capacity(nt * rt.dim());
    let mut v_signs = Vec::with_capacity(nt * rt.dim());
    let mut w_dofs = Vec::with_capacity(nt * lagrange.dim());

    for t in 0..nt {
        let inc = &mesh.incidence[t];
        for ei in inc {
            for j in 0..per_edge {
                v_dofs.push(ei.edge * per_edge + j);
                // odd Legendre moments flip when the edge parameter is reversed
                let flip = if ei.reversed && j % 2 == 1 { -1.0 } else { 1.0 };
                v_signs.push(ei.normal_sign * flip);
            }
        }
        for i in 0..rt_int {
            v_dofs.push(ne * per_edge + t * rt_int + i);
            v_signs.push(1.0);
        }

        for kind in &lagrange.kinds {
            let g = match *kind {
                NodeKind::Vertex(v) => mesh.triangles[t][v],
                NodeKind::Edge { edge, index } => {
                    let ei = inc[edge];
                    let m = if ei.reversed { p_plus_1 - index } else { index };
                    nv + ei.edge * p + (m - 1)
                }
                NodeKind::Interior(i) => nv + ne * p + t * lag_int + i,
            };
            w_dofs.push(g);
        }
    }

    let mut spaces = FESpacePair {
        order: p_plus_1,
        rt,
        lagrange,
        n_v,
        n_w,
        v_dofs,
        v_signs,
        w_dofs,
        boundary: BoundaryDofs::default(),
    };
    spaces.boundary = collect_boundary(mesh, &spaces);
    Ok(spaces)
}

fn collect_boundary(mesh: &Mesh, spaces: &FESpacePair) -> BoundaryDofs {
    let per_edge = spaces.rt.edge_dofs();
    let mut out = BoundaryDofs::default();
    for (e, &on_boundary) in mesh.boundary.iter().enumerate() {
        if !on_boundary {
            continue;
        }
        let t = mesh.edge_triangles[e][0].expect("boundary edge has a triangle");
        let local_edge = mesh.incidence[t].iter().position(|i| i.edge == e).expect("incidence");
        let v: Vec<usize> = (0..per_edge).map(|j| e * per_edge + j).collect();
        let w_local = spaces.w_local(t);
        let [a, b] = crate::mesh::LOCAL_EDGES[local_edge];
        let w: Vec<usize> = spaces
            .lagrange
            .kinds
            .iter()
            .zip(w_local)
            .filter(|(k, _)| match **k {
                NodeKind::Vertex(vx) => vx == a || vx == b,
                NodeKind::Edge { edge, .. } => edge == local_edge,
                NodeKind::Interior(_) => false,
            })
            .map(|(_, &g)| g)
            .collect();
        out.v_dofs.extend_from_slice(&v);
        out.edges.push(BoundaryEdge { edge: e, triangle: t, local_edge, v_dofs: v, w_dofs: w });
    }
    out
}

/// Boundary degrees of freedom of built spaces.
pub fn boundary_dofs(spaces: &FESpacePair) -> &BoundaryDofs {
    &spaces.boundary
}

/// Global degree-of-freedom count predicted from mesh counts alone.
pub fn predicted_dofs(vertices: usize, edges: usize, triangles: usize, p_plus_1: usize) -> usize {
    let p = p_plus_1 - 1;
    let n_v = edges * (p + 2) + triangles * (p + 1) * (p + 2);
    let n_w = vertices + edges * p + triangles * p * p.saturating_sub(1) / 2;
    n_v + n_w
}

impl FESpacePair {
    pub fn ndof(&self) -> usize {
        self.n_v + self.n_w
    }

    /// Triangle count of the mesh these spaces were built on.
    pub fn num_triangles(&self) -> usize {
        self.w_dofs.len() / self.lagrange.dim()
    }

    /// Global V indices and orientation signs of triangle `t`'s RT basis.
    pub fn v_local(&self, t: usize) -> (&[usize], &[f64]) {
        let d = self.rt.dim();
        (&self.v_dofs[t * d..(t + 1) * d], &self.v_signs[t * d..(t + 1) * d])
    }

    /// Global W indices (not shifted by `n_v`) of triangle `t`'s Lagrange basis.
    pub fn w_local(&self, t: usize) -> &[usize] {
        let d = self.lagrange.dim();
        &self.w_dofs[t * d..(t + 1) * d]
    }

    /// Evaluate the discrete fields of a combined coefficient vector at
    /// reference coordinates `xh` of triangle `t`.
    pub fn evaluate(&self, mesh: &Mesh, coeff: &[Complex64], t: usize, xh: Point) -> Result<FieldValue> {
        self.check_len(coeff)?;
        let map = mesh.element_map(t)?;
        let piola = PiolaMap::new(&map)?;
        let (vd, vs) = self.v_local(t);
        let vals = self.rt.values(xh);
        let divs = self.rt.divergences(xh);
        let zero = Complex64::new(0.0, 0.0);
        let mut phi = [zero; 2];
        let mut div_phi = zero;
        for (i, (&g, &s)) in vd.iter().zip(vs).enumerate() {
            let c = coeff[g] * s;
            let pv = piola.push_value(vals[i]);
            phi[0] += c * pv[0];
            phi[1] += c * pv[1];
            div_phi += c * piola.push_divergence(divs[i]);
        }
        let lv = self.lagrange.values(xh);
        let lg = self.lagrange.gradients(xh);
        let mut u = zero;
        let mut grad_u = [zero; 2];
        for (i, &g) in self.w_local(t).iter().enumerate() {
            let c = coeff[self.n_v + g];
            let pg = map.inv_t_mul(lg[i]);
            u += c * lv[i];
            grad_u[0] += c * pg[0];
            grad_u[1] += c * pg[1];
        }
        Ok(FieldValue { phi, div_phi, u, grad_u })
    }

    /// Evaluate at a physical point, locating the containing triangle.
    pub fn evaluate_at(&self, mesh: &Mesh, coeff: &[Complex64], x: Point) -> Result<FieldValue> {
        let t = mesh
            .locate(x)
            .ok_or_else(|| Error::InvalidArgument(format!("point {x:?} outside the mesh")))?;
        let xh = mesh.element_map(t)?.inverse_apply(x);
        self.evaluate(mesh, coeff, t, xh)
    }

    /// Canonical interpolant of `(φ, u)`: RT moments for `φ`, nodal values for `u`.
    pub fn interpolate(
        &self,
        mesh: &Mesh,
        phi: impl Fn(Point) -> [Complex64; 2],
        u: impl Fn(Point) -> Complex64,
    ) -> Result<Vec<Complex64>> {
        let mut coeff = vec![Complex64::new(0.0, 0.0); self.ndof()];
        let mut v_done = vec![false; self.n_v];
        for t in 0..mesh.num_triangles() {
            let map = mesh.element_map(t)?;
            let local = rt_interpolate(&phi, &map, &self.rt)?;
            let (vd, vs) = self.v_local(t);
            for ((&g, &s), c) in vd.iter().zip(vs).zip(local) {
                if !v_done[g] {
                    coeff[g] = c * s;
                    v_done[g] = true;
                }
            }
            for (&g, &xh) in self.w_local(t).iter().zip(&self.lagrange.nodes) {
                coeff[self.n_v + g] = u(map.apply(xh));
            }
        }
        Ok(coeff)
    }

    pub(crate) fn check_len(&self, coeff: &[Complex64]) -> Result<()> {
        if coeff.len() != self.ndof() {
            return Err(Error::DimensionMismatch { expected: self.ndof(), got: coeff.len() });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_uniform_mesh, DomainBox};

    #[test]
    fn counts_lowest_order() {
        let m = build_uniform_mesh(DomainBox::unit_square(), 1).unwrap();
        let s = build_spaces(&m, 1).unwrap();
        assert_eq!((s.n_v, s.n_w), (14, 4));
        let m = build_uniform_mesh(DomainBox::unit_square(), 2).unwrap();
        let s = build_spaces(&m, 1).unwrap();
        assert_eq!(s.n_w, 9);
    }

    #[test]
    fn counts_match_prediction() {
        for n in [1, 2, 3] {
            let m = build_uniform_mesh(DomainBox::unit_square(), n).unwrap();
            for order in 1..=4 {
                let s = build_spaces(&m, order).unwrap();
                let p = order - 1;
                assert_eq!(s.n_v, m.num_edges() * (p + 2) + m.num_triangles() * s.rt.num_interior());
                assert_eq!(s.n_w, m.num_vertices() + m.num_edges() * p + m.num_triangles() * s.lagrange.num_interior());
                assert_eq!(s.ndof(), predicted_dofs(m.num_vertices(), m.num_edges(), m.num_triangles(), order));
                // every global index is used
                let mut seen_v = vec![false; s.n_v];
                let mut seen_w = vec![false; s.n_w];
                for t in 0..m.num_triangles() {
                    s.v_local(t).0.iter().for_each(|&g| seen_v[g] = true);
                    s.w_local(t).iter().for_each(|&g| seen_w[g] = true);
                }
                assert!(seen_v.iter().all(|&b| b) && seen_w.iter().all(|&b| b));
            }
        }
    }

    #[test]
    fn boundary_lists() {
        let m = build_uniform_mesh(DomainBox::unit_square(), 1).unwrap();
        for order in 1..=4 {
            let s = build_spaces(&m, order).unwrap();
            assert_eq!(boundary_dofs(&s).v_dofs.len(), 4 * (order + 1));
            for be in &s.boundary.edges {
                assert_eq!(be.w_dofs.len(), order + 1);
            }
        }
        let m = build_uniform_mesh(DomainBox::unit_square(), 2).unwrap();
        let s = build_spaces(&m, 2).unwrap();
        assert_eq!(s.boundary.v_dofs.len(), 24);
        for be in &s.boundary.edges {
            assert!(m.boundary[be.edge]);
        }
    }

    #[test]
    fn numbering_is_deterministic() {
        let m = build_uniform_mesh(DomainBox::unit_square(), 3).unwrap();
        let a = build_spaces(&m, 3).unwrap();
        let b = build_spaces(&m, 3).unwrap();
        assert_eq!(a.v_dofs, b.v_dofs);
        assert_eq!(a.v_signs, b.v_signs);
        assert_eq!(a.w_dofs, b.w_dofs);
        assert_eq!(a.boundary, b.boundary);
    }

    #[test]
    fn rejects_short_coefficients() {
        let m = build_uniform_mesh(DomainBox::unit_square(), 1).unwrap();
        let s = build_spaces(&m, 1).unwrap();
        assert!(s.evaluate(&m, &[Complex64::new(0.0, 0.0); 3], 0, [0.2, 0.2]).is_err());
    }

    #[test]
    fn random_fields_are_conforming() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let m = build_uniform_mesh(DomainBox::new(-0.3, 0.9, 0.1, 0.6).unwrap(), 3).unwrap();
        for order in 1..=4 {
            let s = build_spaces(&m, order).unwrap();
            let coeff: Vec<Complex64> =
                (0..s.ndof()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            for e in 0..m.num_edges() {
                let [Some(t0), Some(t1)] = m.edge_triangles[e] else { continue };
                let [a, b] = m.edges[e];
                let (pa, pb) = (m.vertices[a], m.vertices[b]);
                let n = m.edge_normal(e);
                for q in [0.1, 0.37, 0.5, 0.81] {
                    let x = [pa[0] + q * (pb[0] - pa[0]), pa[1] + q * (pb[1] - pa[1])];
                    let f0 = s.evaluate(&m, &coeff, t0, m.element_map(t0).unwrap().inverse_apply(x)).unwrap();
                    let f1 = s.evaluate(&m, &coeff, t1, m.element_map(t1).unwrap().inverse_apply(x)).unwrap();
                    let fl0 = f0.phi[0] * n[0] + f0.phi[1] * n[1];
                    let fl1 = f1.phi[0] * n[0] + f1.phi[1] * n[1];
                    // size of the sum before cancellation
                    let map0 = m.element_map(t0).unwrap();
                    let piola = PiolaMap::new(&map0).unwrap();
                    let scale: f64 = s
                        .rt
                        .values(map0.inverse_apply(x))
                        .iter()
                        .zip(s.v_local(t0).0)
                        .map(|(v, &g)| {
                            let pv = piola.push_value(*v);
                            coeff[g].norm() * pv[0].hypot(pv[1])
                        })
                        .sum();
                    assert!((fl0 - fl1).norm() < 1e-11 * scale, "flux jump order {order} edge {e}");
                    assert!((f0.u - f1.u).norm() < 1e-11 * (1.0 + f0.u.norm()), "u jump order {order} edge {e}");
                }
            }
        }
    }
}
