//! Oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `J_n(x) = (1/2π) ∫₀^{2π} cos(nθ - x sin θ) dθ` by the trapezoidal rule.
/// The integrand is periodic and entire, so the rule converges geometrically
/// once the point count exceeds about `x + 40`.
pub fn bessel_trapezoid(n: u32, x: f64) -> f64 {
    let m = 2 * ((x.abs() as usize) + 200);
    let h = 2.0 * PI / m as f64;
    let nf = n as f64;
    let s: f64 = (0..m).map(|j| {
        let t = j as f64 * h;
        (nf * t - x * t.sin()).cos()
    }).sum();
    s / m as f64
}

/// Least-squares slope of `log e` against `log h`.
pub fn fitted_order(h: &[f64], e: &[f64]) -> f64 {
    let n = h.len() as f64;
    let lx: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// Drop the `time_s` column (by header name) from a CSV document.
pub fn without_column(csv: &str, name: &str) -> String {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let skip = header.iter().position(|h| *h == name);
    let keep = |fields: Vec<&str>| -> String {
        fields.iter().enumerate().filter(|(i, _)| Some(*i) != skip).map(|(_, f)| *f).collect::<Vec<_>>().join(",")
    };
    let mut out = vec![keep(header.clone())];
    // status messages may contain quoted commas; they sit after time_s, so a
    // plain split still isolates the time column correctly
    for l in lines {
        out.push(keep(l.split(',').collect()));
    }
    out.join("\n")
}

pub mod refelem {
    //! Independent checks of the reference-element identities.

    use std::f64::consts::PI;

    use fosls::mesh::{build_uniform_mesh, AffineMap, DomainBox, Point};
    use fosls::refelem::piola::{physical_edge_length, physical_outward_normal};
    use fosls::refelem::poly::legendre01;
    use fosls::refelem::rt::{reference_edge_length, reference_edge_point, reference_normal};
    use fosls::refelem::{edge_quadrature, rt_basis, rt_interpolate, triangle_quadrature, PiolaMap};
    use fosls::space::build_spaces;
    use nalgebra::{DMatrix, DVector};
    use num_complex::Complex64;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    pub fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    pub fn random_map(rng: &mut ChaCha8Rng) -> AffineMap {
        loop {
            let v: [Point; 3] = std::array::from_fn(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            if let Ok(m) = AffineMap::from_vertices(v) {
                if m.det > 0.05 {
                    return m;
                }
            }
        }
    }

    /// `max |F_i(ψ_j) - δ_ij|` over the dual functionals of the RT basis.
    pub fn duality_defect(order: usize) -> f64 {
        let basis = rt_basis(order).unwrap();
        let mut worst = 0.0f64;
        for j in 0..basis.dim() {
            let col = basis.apply_functionals(|xh| basis.values(xh)[j].map(re));
            for (i, v) in col.iter().enumerate() {
                let d = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - d).norm());
            }
        }
        worst
    }

    /// Smooth field with nonpolynomial divergence.
    fn field(x: Point) -> [f64; 2] {
        [x[0].sin() * x[1].exp(), x[0].powi(3) * x[1] + (2.0 * x[1]).cos()]
    }

    fn field_div(x: Point) -> f64 {
        x[0].cos() * x[1].exp() + x[0].powi(3) - 2.0 * (2.0 * x[1]).sin()
    }

    /// `‖div Πψ - P div ψ‖ / ‖div ψ‖` on one element, where `P` is the L²
    /// projection onto `P_{p+1}(K)` built from a monomial Gram system.
    pub fn commuting_defect(order: usize, map: &AffineMap) -> f64 {
        let basis = rt_basis(order).unwrap();
        let q = triangle_quadrature(20).unwrap();
        let piola = PiolaMap::new(map).unwrap();
        let coeff = rt_interpolate(|x| field(x).map(re), map, &basis).unwrap();

        let c = map.apply([1.0 / 3.0, 1.0 / 3.0]);
        let monos: Vec<(i32, i32)> = (0..=order as i32).flat_map(|d| (0..=d).map(move |a| (a, d - a))).collect();
        let m = |x: Point, (a, b): (i32, i32)| (x[0] - c[0]).powi(a) * (x[1] - c[1]).powi(b);
        let nm = monos.len();
        let mut gram = DMatrix::<f64>::zeros(nm, nm);
        let mut rhs = DVector::<f64>::zeros(nm);
        for (&xh, &w) in q.points.iter().zip(&q.weights) {
            let x = map.apply(xh);
            let w = w * map.det;
            for i in 0..nm {
                rhs[i] += w * field_div(x) * m(x, monos[i]);
                for j in 0..nm {
                    gram[(i, j)] += w * m(x, monos[i]) * m(x, monos[j]);
                }
            }
        }
        let proj = gram.lu().solve(&rhs).unwrap();

        let (mut diff, mut scale) = (0.0, 0.0);
        for (&xh, &w) in q.points.iter().zip(&q.weights) {
            let x = map.apply(xh);
            let w = w * map.det;
            let d: Complex64 =
                basis.divergences(xh).iter().zip(&coeff).map(|(d, cf)| cf * piola.push_divergence(*d)).sum();
            let p: f64 = (0..nm).map(|i| proj[i] * m(x, monos[i])).sum();
            diff += w * (d - p).norm_sqr();
            scale += w * field_div(x).powi(2);
        }
        (diff / scale).sqrt()
    }

    /// Largest relative gap between `∫_F ψ·n q ds` on the physical edge and
    /// the reference moment, over edges and Legendre `q` up to degree `p+1`,
    /// for random coefficients.
    pub fn flux_moment_defect(order: usize, map: &AffineMap, rng: &mut ChaCha8Rng) -> f64 {
        let basis = rt_basis(order).unwrap();
        let eq = edge_quadrature(24).unwrap();
        let piola = PiolaMap::new(map).unwrap();
        let coeff: Vec<f64> = (0..basis.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let eval = |xh: Point| -> [f64; 2] {
            basis.values(xh).iter().zip(&coeff).fold([0.0; 2], |a, (v, c)| [a[0] + c * v[0], a[1] + c * v[1]])
        };
        let mut worst = 0.0f64;
        for e in 0..3 {
            let (nh, lh) = (reference_normal(e), reference_edge_length(e));
            let (n, l) = (physical_outward_normal(map, e), physical_edge_length(map, e));
            for j in 0..=order {
                let (mut reference, mut physical, mut scale) = (0.0, 0.0, 0.0);
                for (&s, &w) in eq.points.iter().zip(&eq.weights) {
                    let xh = reference_edge_point(e, s);
                    let vh = eval(xh);
                    let v = piola.push_value(vh);
                    let qj = legendre01(j, s);
                    reference += w * lh * (vh[0] * nh[0] + vh[1] * nh[1]) * qj;
                    physical += w * l * (v[0] * n[0] + v[1] * n[1]) * qj;
                    scale += w * lh * (vh[0].abs() + vh[1].abs()) * qj.abs();
                }
                worst = worst.max((reference - physical).abs() / scale.max(1e-300));
            }
        }
        worst
    }

    /// L² interpolation error of `∇(cos πx cos πy)` on the unit square.
    pub fn interpolation_error(order: usize, n: usize) -> f64 {
        let mesh = build_uniform_mesh(DomainBox::unit_square(), n).unwrap();
        let spaces = build_spaces(&mesh, order).unwrap();
        let grad =
            |x: Point| [-PI * (PI * x[0]).sin() * (PI * x[1]).cos(), -PI * (PI * x[0]).cos() * (PI * x[1]).sin()];
        let coeff = spaces.interpolate(&mesh, |x| grad(x).map(re), |_| re(0.0)).unwrap();
        let q = triangle_quadrature(2 * order + 8).unwrap();
        let mut err = 0.0;
        for t in 0..mesh.num_triangles() {
            let map = mesh.element_map(t).unwrap();
            for (&xh, &w) in q.points.iter().zip(&q.weights) {
                let g = grad(map.apply(xh));
                let v = spaces.evaluate(&mesh, &coeff, t, xh).unwrap().phi;
                err += w * map.det * ((v[0] - g[0]).norm_sqr() + (v[1] - g[1]).norm_sqr());
            }
        }
        err.sqrt()
    }

    /// Observed orders between consecutive meshes `n ∈ {4, 8, 16}`.
    pub fn interpolation_orders(order: usize) -> Vec<f64> {
        let e: Vec<f64> = [4, 8, 16].iter().map(|&n| interpolation_error(order, n)).collect();
        e.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
    }
}
