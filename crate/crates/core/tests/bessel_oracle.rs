mod common;

use common::bessel_trapezoid;
use fosls::manufactured::{bessel_j0, bessel_j1};
use proptest::prelude::*;

#[test]
fn matches_integral_representation_on_0_500() {
    let m = 10_000;
    let mut worst = (0.0f64, 0.0);
    for i in 0..=m {
        let x = 500.0 * i as f64 / m as f64;
        let d0 = (bessel_j0(x).unwrap() - bessel_trapezoid(0, x)).abs();
        let d1 = (bessel_j1(x).unwrap() - bessel_trapezoid(1, x)).abs();
        if d0.max(d1) > worst.0 {
            worst = (d0.max(d1), x);
        }
    }
    assert!(worst.0 <= 1e-12, "max deviation {:e} at x = {}", worst.0, worst.1);
}

#[test]
fn first_zero_of_j0() {
    // Newton with J0' = -J1, from the rough guess 2.4
    let mut x: f64 = 2.4;
    for _ in 0..20 {
        let step = bessel_j0(x).unwrap() / -bessel_j1(x).unwrap();
        x -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    assert!((x - 2.404825557695773).abs() <= 1e-10, "zero at {x}");
}

#[test]
fn oracle_is_itself_accurate() {
    // tabulated values
    assert!((bessel_trapezoid(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
    assert!((bessel_trapezoid(1, 10.0) - 0.043_472_746_168_861_44).abs() < 1e-15);
}

#[test]
fn rejects_non_finite() {
    assert!(bessel_j0(f64::NAN).is_err());
    assert!(bessel_j1(f64::INFINITY).is_err());
    assert!(bessel_j0(-1.0).is_err());
}

proptest! {
    /// `J0' = -J1`, by a central difference.
    #[test]
    fn derivative_identity(x in 0.01f64..600.0) {
        let h = 1e-5;
        let d = (bessel_j0(x + h).unwrap() - bessel_j0(x - h).unwrap()) / (2.0 * h);
        prop_assert!((d + bessel_j1(x).unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn agrees_with_oracle(x in 0.0f64..500.0) {
        prop_assert!((bessel_j0(x).unwrap() - bessel_trapezoid(0, x)).abs() <= 1e-12);
        prop_assert!((bessel_j1(x).unwrap() - bessel_trapezoid(1, x)).abs() <= 1e-12);
    }

    /// Bound |J_n| <= 1 and the decay |J_0|² + |J_1|² <= 2/(π x) + O(x⁻²).
    #[test]
    fn bounded(x in 1.0f64..1e4) {
        let (a, b) = (bessel_j0(x).unwrap(), bessel_j1(x).unwrap());
        prop_assert!(a.abs() <= 1.0 && b.abs() <= 1.0);
        prop_assert!(a * a + b * b <= 2.0 / (std::f64::consts::PI * x) * (1.0 + 1.0 / x));
    }
}
