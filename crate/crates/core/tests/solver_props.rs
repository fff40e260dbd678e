use fosls::assembly::{assemble, assemble_with, bilinear, residual_functional, ProblemSpec};
use fosls::manufactured::{bessel_exact, polynomial_exact_scaled, RobinSign};
use fosls::mesh::{build_uniform_mesh, DomainBox};
use fosls::metrics::compute_errors;
use fosls::solve::{solve_cg, solve_direct, HermitianFactor};
use fosls::space::{build_spaces, predicted_dofs};
use fosls::sparse::{dot, norm2};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn sign(plus: bool) -> RobinSign {
    if plus {
        RobinSign::Plus
    } else {
        RobinSign::Minus
    }
}

/// `B(u_h, v) = b(v)` for arbitrary discrete `v`.
#[test]
fn galerkin_orthogonality() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (order, n, k) in [(1, 6, 10.0), (2, 4, 5.0), (3, 3, 20.0)] {
        let exact = bessel_exact(k, RobinSign::Minus).unwrap();
        let mesh = build_uniform_mesh(exact.domain, n).unwrap();
        let spaces = build_spaces(&mesh, order).unwrap();
        let sys = assemble(&mesh, &spaces, &ProblemSpec::from_exact(&exact)).unwrap();
        let (x, _) = solve_direct(&sys).unwrap();
        for _ in 0..5 {
            let v = random_vec(&mut rng, sys.ndof());
            let lhs = bilinear(&sys, &x, &v).unwrap();
            let rhs = dot(&v, &sys.rhs);
            let scale = sys.matrix.quadratic_form(&v).unwrap().re.sqrt() * norm2(&sys.rhs);
            assert!((lhs - rhs).norm() <= 1e-9 * scale, "order {order}: {lhs} vs {rhs}");
        }
    }
}

/// The discrete solution minimizes the least-squares functional, evaluated
/// by direct quadrature of the residual rather than through the matrix.
#[test]
fn discrete_solution_minimizes_functional() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (order, n, k) in [(1, 8, 5.0), (2, 4, 10.0), (4, 2, 5.0)] {
        let exact = bessel_exact(k, RobinSign::Minus).unwrap();
        let prob = ProblemSpec::from_exact(&exact);
        let mesh = build_uniform_mesh(exact.domain, n).unwrap();
        let spaces = build_spaces(&mesh, order).unwrap();
        let sys = assemble(&mesh, &spaces, &prob).unwrap();
        let (x, _) = solve_direct(&sys).unwrap();
        let r0 = residual_functional(&mesh, &spaces, &x, &prob).unwrap();

        let interp = spaces.interpolate(&mesh, |p| exact.phi(p), |p| exact.u(p)).unwrap();
        let ri = residual_functional(&mesh, &spaces, &interp, &prob).unwrap();
        assert!(r0 <= ri * (1.0 + 1e-10), "order {order}: R(u_h) = {r0:e} > R(Πu) = {ri:e}");

        for _ in 0..4 {
            let dir = random_vec(&mut rng, sys.ndof());
            let t = 1e-3 * norm2(&x) / norm2(&dir);
            let y: Vec<Complex64> = x.iter().zip(&dir).map(|(a, b)| a + b * t).collect();
            let ry = residual_functional(&mesh, &spaces, &y, &prob).unwrap();
            assert!(ry >= r0 * (1.0 - 1e-10), "order {order}: perturbation lowered R ({ry:e} < {r0:e})");
        }
    }
}

#[test]
fn cg_agrees_with_direct() {
    let tol = 1e-10;
    let exact = bessel_exact(10.0, RobinSign::Minus).unwrap();
    let mesh = build_uniform_mesh(exact.domain, 4).unwrap();
    let spaces = build_spaces(&mesh, 1).unwrap();
    let sys = assemble(&mesh, &spaces, &ProblemSpec::from_exact(&exact)).unwrap();
    let (xd, _) = solve_direct(&sys).unwrap();
    let (xc, rep) = solve_cg(&sys, tol, 20_000).unwrap();
    assert!(rep.relative_residual <= tol);
    let diff: Vec<Complex64> = xd.iter().zip(&xc).map(|(a, b)| a - b).collect();
    // measured in the energy norm, where CG's residual bound translates directly
    let e = sys.matrix.quadratic_form(&diff).unwrap().re.sqrt();
    let s = sys.matrix.quadratic_form(&xd).unwrap().re.sqrt();
    assert!(e <= 10.0 * tol * s.max(1.0), "energy difference {e:e}");
    let ed = compute_errors(&mesh, &spaces, &xd, &exact).unwrap();
    let ec = compute_errors(&mesh, &spaces, &xc, &exact).unwrap();
    assert!((ed.rel_err_u - ec.rel_err_u).abs() <= 10.0 * tol * ed.rel_err_u.max(1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hermitian_positive_definite(order in 1usize..=4, n in 1usize..=4, k in 0.5f64..60.0, plus in any::<bool>()) {
        let exact = bessel_exact(k, sign(plus)).unwrap();
        let mesh = build_uniform_mesh(exact.domain, n).unwrap();
        let spaces = build_spaces(&mesh, order).unwrap();
        let sys = assemble(&mesh, &spaces, &ProblemSpec::from_exact(&exact)).unwrap();
        prop_assert!(sys.matrix.hermitian_defect() <= 1e-12);
        prop_assert!(sys.matrix.diagonal().iter().all(|d| d.re > 0.0 && d.im == 0.0));
        prop_assert!(HermitianFactor::new(&sys.matrix).is_ok());
    }

    /// Any `u = a (x + y)` on any box is reproduced by every order.
    #[test]
    fn linear_fields_are_exact(
        order in 1usize..=4,
        n in 1usize..=3,
        k in 0.5f64..30.0,
        are in -2.0f64..2.0,
        aim in -2.0f64..2.0,
        x0 in -1.0f64..1.0,
        w in 0.2f64..2.0,
        plus in any::<bool>(),
    ) {
        prop_assume!(are.hypot(aim) > 0.1);
        let domain = DomainBox::new(x0, x0 + w, -0.3, 0.7).unwrap();
        let exact = polynomial_exact_scaled(k, sign(plus), Complex64::new(are, aim), domain).unwrap();
        let mesh = build_uniform_mesh(domain, n).unwrap();
        let spaces = build_spaces(&mesh, order).unwrap();
        let sys = assemble(&mesh, &spaces, &ProblemSpec::from_exact(&exact)).unwrap();
        let (x, _) = solve_direct(&sys).unwrap();
        let e = compute_errors(&mesh, &spaces, &x, &exact).unwrap();
        prop_assert!(e.rel_err_u <= 1e-8 && e.rel_err_phi <= 1e-8, "{e:?}");
    }

    #[test]
    fn dof_count_prediction(order in 1usize..=4, n in 1usize..=12) {
        let mesh = build_uniform_mesh(DomainBox::unit_square(), n).unwrap();
        let spaces = build_spaces(&mesh, order).unwrap();
        prop_assert_eq!(
            spaces.ndof(),
            predicted_dofs(mesh.num_vertices(), mesh.num_edges(), mesh.num_triangles(), order)
        );
        prop_assert_eq!(mesh.num_edges(), 3 * n * n + 2 * n);
    }

    #[test]
    fn serial_and_parallel_assembly_agree(order in 1usize..=3, n in 1usize..=6, k in 1.0f64..20.0) {
        let exact = bessel_exact(k, RobinSign::Minus).unwrap();
        let mesh = build_uniform_mesh(exact.domain, n).unwrap();
        let spaces = build_spaces(&mesh, order).unwrap();
        let prob = ProblemSpec::from_exact(&exact);
        let a = assemble_with(&mesh, &spaces, &prob, false).unwrap();
        let b = assemble_with(&mesh, &spaces, &prob, true).unwrap();
        prop_assert!(a.matrix == b.matrix && a.rhs == b.rhs);
        prop_assert_eq!(a.data_norm_sq.to_bits(), b.data_norm_sq.to_bits());
    }
}
