//! Uniform triangulations of an axis-aligned box.
//!
//! Every square cell of an `n x n` grid is split along its lower-left to
//! upper-right diagonal. Triangles are stored counterclockwise, edges are keyed
//! by their sorted vertex pair, and the global edge normal is the `+90°`
//! rotation of the unit vector from the lower to the higher vertex index.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Local edge `e` joins the two local vertices listed here; it is the edge
/// opposite local vertex `e`. Pairs are sorted, so the local parameter runs
/// from the lower to the higher local vertex.
pub const LOCAL_EDGES: [[usize; 2]; 3] = [[1, 2], [0, 2], [0, 1]];

/// Axis-aligned rectangular domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBox {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl DomainBox {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        let b = Self { xmin, xmax, ymin, ymax };
        b.validate()?;
        Ok(b)
    }

    /// The square `[-0.5, 0.5]^2` used by the Bessel benchmark.
    pub fn centered_unit_square() -> Self {
        Self { xmin: -0.5, xmax: 0.5, ymin: -0.5, ymax: 0.5 }
    }

    pub fn unit_square() -> Self {
        Self { xmin: 0.0, xmax: 1.0, ymin: 0.0, ymax: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.xmin, self.xmax, self.ymin, self.ymax].iter().all(|v| v.is_finite());
        if !finite || self.xmin >= self.xmax || self.ymin >= self.ymax {
            return Err(Error::InvalidArgument(format!("degenerate domain box {self:?}")));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.xmin && p[0] <= self.xmax && p[1] >= self.ymin && p[1] <= self.ymax
    }

    /// Outward unit normal at a boundary point, choosing the closest side.
    pub fn outward_normal(&self, p: Point) -> Point {
        let d = [
            (p[0] - self.xmin).abs(),
            (self.xmax - p[0]).abs(),
            (p[1] - self.ymin).abs(),
            (self.ymax - p[1]).abs(),
        ];
        let side = (0..4).min_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
        [[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]][side]
    }
}

/// How a triangle sees one of its edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeIncidence {
    pub edge: usize,
    /// Local parameter direction (lower to higher local vertex) is opposite
    /// to the global direction (lower to higher global vertex).
    pub reversed: bool,
    /// `+1` when the triangle's outward normal equals the global edge normal.
    pub normal_sign: f64,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub domain: DomainBox,
    /// Cells per side of the generating grid.
    pub n: usize,
    pub vertices: Vec<Point>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// `(vmin, vmax)` with `vmin < vmax`.
    pub edges: Vec<[usize; 2]>,
    pub incidence: Vec<[EdgeIncidence; 3]>,
    /// Triangles adjacent to each edge; the second slot is `None` on the boundary.
    pub edge_triangles: Vec<[Option<usize>; 2]>,
    pub boundary: Vec<bool>,
    /// Maximum triangle diameter.
    pub h: f64,
}

/// Affine map `x = B x̂ + b` from the reference triangle `(0,0),(1,0),(0,1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    /// Row-major Jacobian.
    pub b_mat: [[f64; 2]; 2],
    pub shift: Point,
    pub det: f64,
    pub inv: [[f64; 2]; 2],
}

impl AffineMap {
    pub fn from_vertices(v: [Point; 3]) -> Result<Self> {
        let b_mat = [
            [v[1][0] - v[0][0], v[2][0] - v[0][0]],
            [v[1][1] - v[0][1], v[2][1] - v[0][1]],
        ];
        let det = b_mat[0][0] * b_mat[1][1] - b_mat[0][1] * b_mat[1][0];
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::SingularMap(det));
        }
        let inv = [
            [b_mat[1][1] / det, -b_mat[0][1] / det],
            [-b_mat[1][0] / det, b_mat[0][0] / det],
        ];
        Ok(Self { b_mat, shift: v[0], det, inv })
    }

    pub fn apply(&self, xh: Point) -> Point {
        [
            self.b_mat[0][0] * xh[0] + self.b_mat[0][1] * xh[1] + self.shift[0],
            self.b_mat[1][0] * xh[0] + self.b_mat[1][1] * xh[1] + self.shift[1],
        ]
    }

    pub fn inverse_apply(&self, x: Point) -> Point {
        let d = [x[0] - self.shift[0], x[1] - self.shift[1]];
        [
            self.inv[0][0] * d[0] + self.inv[0][1] * d[1],
            self.inv[1][0] * d[0] + self.inv[1][1] * d[1],
        ]
    }

    /// `B v`
    pub fn jac_mul(&self, v: Point) -> Point {
        [
            self.b_mat[0][0] * v[0] + self.b_mat[0][1] * v[1],
            self.b_mat[1][0] * v[0] + self.b_mat[1][1] * v[1],
        ]
    }

    /// `B^{-1} v`
    pub fn inv_mul(&self, v: Point) -> Point {
        [
            self.inv[0][0] * v[0] + self.inv[0][1] * v[1],
            self.inv[1][0] * v[0] + self.inv[1][1] * v[1],
        ]
    }

    /// `B^{-T} v`, the map for reference gradients.
    pub fn inv_t_mul(&self, v: Point) -> Point {
        [
            self.inv[0][0] * v[0] + self.inv[1][0] * v[1],
            self.inv[0][1] * v[0] + self.inv[1][1] * v[1],
        ]
    }
}

/// Mesh counts and resolution, for JSON output.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MeshSummary {
    pub n: usize,
    pub vertices: usize,
    pub triangles: usize,
    pub edges: usize,
    pub boundary_edges: usize,
    pub h: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kh_over_p: Option<f64>,
}

/// A mesh chosen to meet a resolution target `k h / (p+1) <= c`.
#[derive(Debug, Clone)]
pub struct ConditionedMesh {
    pub mesh: Mesh,
    pub kh_over_p: f64,
}

/// Diameter of the triangles produced by [`build_uniform_mesh`] with `n` cells per side.
pub fn uniform_mesh_h(domain: &DomainBox, n: usize) -> f64 {
    let dx = domain.width() / n as f64;
    let dy = domain.height() / n as f64;
    dx.hypot(dy)
}

pub fn build_uniform_mesh(domain: DomainBox, n: usize) -> Result<Mesh> {
    domain.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("mesh needs at least one cell per side".into()));
    }
    let np = n + 1;
    let dx = domain.width() / n as f64;
    let dy = domain.height() / n as f64;
    let mut vertices = Vec::with_capacity(np * np);
    for j in 0..np {
        for i in 0..np {
            // Pin the last row/column to the box so the tiling is exact.
            let x = if i == n { domain.xmax } else { domain.xmin + i as f64 * dx };
            let y = if j == n { domain.ymax } else { domain.ymin + j as f64 * dy };
            vertices.push([x, y]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = j * np + i;
            let v10 = v00 + 1;
            let v01 = v00 + np;
            let v11 = v01 + 1;
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }

    let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut edge_triangles: Vec<[Option<usize>; 2]> = Vec::new();
    let mut incidence = Vec::with_capacity(triangles.len());

    for (t, tri) in triangles.iter().enumerate() {
        let mut inc = [EdgeIncidence { edge: 0, reversed: false, normal_sign: 1.0 }; 3];
        for (le, &[a, b]) in LOCAL_EDGES.iter().enumerate() {
            let (ga, gb) = (tri[a], tri[b]);
            let key = [ga.min(gb), ga.max(gb)];
            let e = *edge_index.entry(key).or_insert_with(|| {
                edges.push(key);
                edge_triangles.push([None, None]);
                edges.len() - 1
            });
            let slot = &mut edge_triangles[e];
            if slot[0].is_none() {
                slot[0] = Some(t);
            } else {
                debug_assert!(slot[1].is_none(), "edge shared by more than two triangles");
                slot[1] = Some(t);
            }

            let p0 = vertices[key[0]];
            let p1 = vertices[key[1]];
            let global_normal = [-(p1[1] - p0[1]), p1[0] - p0[0]];
            let opposite = vertices[tri[le]];
            let mid = [0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])];
            let inward = [opposite[0] - mid[0], opposite[1] - mid[1]];
            let dot = global_normal[0] * inward[0] + global_normal[1] * inward[1];
            inc[le] = EdgeIncidence {
                edge: e,
                reversed: ga > gb,
                normal_sign: if dot < 0.0 { 1.0 } else { -1.0 },
            };
        }
        incidence.push(inc);
    }

    let boundary = edge_triangles.iter().map(|s| s[1].is_none()).collect();
    let h = uniform_mesh_h(&domain, n);

    Ok(Mesh { domain, n, vertices, triangles, edges, incidence, edge_triangles, boundary, h })
}

/// Smallest uniform mesh with `k h / p_plus_1 <= c`.
pub fn mesh_for_condition(
    domain: DomainBox,
    k: f64,
    p_plus_1: usize,
    c: f64,
    max_n: usize,
) -> Result<ConditionedMesh> {
    let n = cells_for_condition(&domain, k, p_plus_1, c)?;
    if n > max_n {
        return Err(Error::ResourceCap(format!(
            "k h/(p+1) <= {c} at k = {k}, p+1 = {p_plus_1} needs n = {n} > cap {max_n}"
        )));
    }
    let mesh = build_uniform_mesh(domain, n)?;
    let kh_over_p = k * mesh.h / p_plus_1 as f64;
    Ok(ConditionedMesh { mesh, kh_over_p })
}

/// The cell count [`mesh_for_condition`] would pick, without building the mesh.
pub fn cells_for_condition(domain: &DomainBox, k: f64, p_plus_1: usize, c: f64) -> Result<usize> {
    domain.validate()?;
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!("wave number must be positive, got {k}")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidArgument(format!("mesh ratio must be positive, got {c}")));
    }
    if p_plus_1 == 0 {
        return Err(Error::InvalidArgument("order p+1 must be at least 1".into()));
    }
    let ratio = |n: usize| k * uniform_mesh_h(domain, n) / p_plus_1 as f64;
    let diag = domain.width().hypot(domain.height());
    let mut n = ((k * diag / (p_plus_1 as f64 * c)).ceil() as usize).max(1);
    while n > 1 && ratio(n - 1) <= c {
        n -= 1;
    }
    while ratio(n) > c {
        n += 1;
    }
    Ok(n)
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_boundary_edges(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }

    pub fn triangle_vertices(&self, t: usize) -> [Point; 3] {
        let tri = self.triangles[t];
        [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]]
    }

    pub fn element_map(&self, t: usize) -> Result<AffineMap> {
        if t >= self.triangles.len() {
            return Err(Error::IndexOutOfRange { index: t, len: self.triangles.len() });
        }
        AffineMap::from_vertices(self.triangle_vertices(t))
    }

    /// Unit global normal of edge `e` (rotation of `v_max - v_min` by +90°).
    pub fn edge_normal(&self, e: usize) -> Point {
        let [a, b] = self.edges[e];
        let (p0, p1) = (self.vertices[a], self.vertices[b]);
        let len = self.edge_length(e);
        [-(p1[1] - p0[1]) / len, (p1[0] - p0[0]) / len]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        let (p0, p1) = (self.vertices[a], self.vertices[b]);
        (p1[0] - p0[0]).hypot(p1[1] - p0[1])
    }

    /// Triangle containing `p`, using the grid structure directly.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let d = &self.domain;
        let tol = 1e-12 * d.width().max(d.height());
        if p[0] < d.xmin - tol || p[0] > d.xmax + tol || p[1] < d.ymin - tol || p[1] > d.ymax + tol {
            return None;
        }
        let n = self.n;
        let sx = (p[0] - d.xmin) / d.width() * n as f64;
        let sy = (p[1] - d.ymin) / d.height() * n as f64;
        let i = (sx.floor().max(0.0) as usize).min(n - 1);
        let j = (sy.floor().max(0.0) as usize).min(n - 1);
        let (fx, fy) = (sx - i as f64, sy - j as f64);
        let cell = j * n + i;
        Some(if fy <= fx { 2 * cell } else { 2 * cell + 1 })
    }

    pub fn summary(&self, kh_over_p: Option<f64>) -> MeshSummary {
        MeshSummary {
            n: self.n,
            vertices: self.num_vertices(),
            triangles: self.num_triangles(),
            edges: self.num_edges(),
            boundary_edges: self.num_boundary_edges(),
            h: self.h,
            kh_over_p,
        }
    }
}
