//! Scalar monomials and shifted Legendre polynomials.

/// Exponent pairs `(a, b)` of `x^a y^b` with `a + b <= degree`, ordered by total degree.
pub fn monomials_up_to(degree: usize) -> Vec<(usize, usize)> {
    (0..=degree).flat_map(homogeneous).collect()
}

/// Exponent pairs with `a + b == degree`.
pub fn homogeneous(degree: usize) -> Vec<(usize, usize)> {
    (0..=degree).map(|b| (degree - b, b)).collect()
}

pub fn powi(x: f64, e: usize) -> f64 {
    x.powi(e as i32)
}

pub fn monomial(x: [f64; 2], (a, b): (usize, usize)) -> f64 {
    powi(x[0], a) * powi(x[1], b)
}

pub fn monomial_grad(x: [f64; 2], (a, b): (usize, usize)) -> [f64; 2] {
    let dx = if a == 0 { 0.0 } else { a as f64 * powi(x[0], a - 1) * powi(x[1], b) };
    let dy = if b == 0 { 0.0 } else { b as f64 * powi(x[0], a) * powi(x[1], b - 1) };
    [dx, dy]
}

/// Legendre polynomial `P_j(2s - 1)` on `[0, 1]`.
pub fn legendre01(j: usize, s: f64) -> f64 {
    let t = 2.0 * s - 1.0;
    let (mut p0, mut p1) = (1.0, t);
    if j == 0 {
        return p0;
    }
    for n in 1..j {
        let nf = n as f64;
        let p2 = ((2.0 * nf + 1.0) * t * p1 - nf * p0) / (nf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Exact integral of `x^a y^b` over the reference triangle: `a! b! / (a + b + 2)!`.
pub fn reference_monomial_integral(a: usize, b: usize) -> f64 {
    let fact = |n: usize| (1..=n).fold(1.0f64, |acc, i| acc * i as f64);
    fact(a) * fact(b) / fact(a + b + 2)
}
