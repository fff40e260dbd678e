//! Exact solutions of `-Δu - k²u = f` with `∂u/∂n - σ i k u = g`.

use num_complex::Complex64;

use super::bessel::{j0, j1};
use crate::error::{Error, Result};
use crate::mesh::{DomainBox, Point};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Radius below which the radial formulas switch to their series limits.
const SMALL_R: f64 = 1e-8;

/// Sign `σ` in the Robin condition `∂u/∂n - σ i k u = g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum RobinSign {
    /// `∂u/∂n - i k u = g`
    Plus,
    /// `∂u/∂n + i k u = g`, the convention of the Bessel benchmark.
    Minus,
}

impl RobinSign {
    pub fn value(self) -> f64 {
        match self {
            RobinSign::Plus => 1.0,
            RobinSign::Minus => -1.0,
        }
    }

    pub fn from_value(v: i64) -> Result<Self> {
        match v {
            1 => Ok(RobinSign::Plus),
            -1 => Ok(RobinSign::Minus),
            _ => Err(Error::InvalidArgument(format!("Robin sign must be +1 or -1, got {v}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// Radially symmetric benchmark on a domain centered at the origin.
    Bessel { c: Complex64 },
    /// `u = a (x + y)`.
    Linear { a: Complex64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolution {
    pub k: f64,
    pub sigma: RobinSign,
    pub domain: DomainBox,
    kind: Kind,
}

/// The Bessel benchmark: `f = sin(kr)/r` and
/// `u = cos(kr)/k - C J_0(kr)` with `C = e^{ik} / (k (J_0(k) + i J_1(k)))`.
pub fn bessel_exact(k: f64, sigma: RobinSign) -> Result<ExactSolution> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!("wave number must be positive, got {k}")));
    }
    let denom = Complex64::new(j0(k), j1(k));
    if denom.norm() < 1e-14 {
        return Err(Error::InvalidArgument(format!("J0(k) + i J1(k) vanishes at k = {k}")));
    }
    let c = Complex64::new(k.cos(), k.sin()) / (k * denom);
    Ok(ExactSolution { k, sigma, domain: DomainBox::centered_unit_square(), kind: Kind::Bessel { c } })
}

/// `u = x + y`, which lies in every discrete space pair.
pub fn polynomial_exact(k: f64, sigma: RobinSign) -> Result<ExactSolution> {
    polynomial_exact_scaled(k, sigma, Complex64::new(1.0, 0.0), DomainBox::unit_square())
}

/// `u = a (x + y)` on an arbitrary box.
pub fn polynomial_exact_scaled(k: f64, sigma: RobinSign, a: Complex64, domain: DomainBox) -> Result<ExactSolution> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!("wave number must be positive, got {k}")));
    }
    domain.validate()?;
    Ok(ExactSolution { k, sigma, domain, kind: Kind::Linear { a } })
}

impl ExactSolution {
    pub fn is_bessel(&self) -> bool {
        matches!(self.kind, Kind::Bessel { .. })
    }

    /// Radial profile `(u(r), u'(r))`.
    fn radial(&self, r: f64, c: Complex64) -> (Complex64, Complex64) {
        let k = self.k;
        let kr = k * r;
        let u = (kr.cos() / k) - c * j0(kr);
        let du = -kr.sin() + c * k * j1(kr);
        (u, du)
    }

    pub fn u(&self, x: Point) -> Complex64 {
        match self.kind {
            Kind::Bessel { c } => self.radial(x[0].hypot(x[1]), c).0,
            Kind::Linear { a } => a * (x[0] + x[1]),
        }
    }

    pub fn grad_u(&self, x: Point) -> [Complex64; 2] {
        match self.kind {
            Kind::Bessel { c } => {
                let r = x[0].hypot(x[1]);
                // u'(r)/r, with its limit -k + C k^2 / 2 at the origin
                let s = if r < SMALL_R {
                    -self.k + c * self.k * self.k / 2.0
                } else {
                    self.radial(r, c).1 / r
                };
                [s * x[0], s * x[1]]
            }
            Kind::Linear { a } => [a, a],
        }
    }

    /// `φ = i k⁻¹ ∇u`
    pub fn phi(&self, x: Point) -> [Complex64; 2] {
        let g = self.grad_u(x);
        let s = I / self.k;
        [s * g[0], s * g[1]]
    }

    /// `Δu` in closed form.
    pub fn laplacian(&self, x: Point) -> Complex64 {
        match self.kind {
            Kind::Bessel { c } => {
                let k = self.k;
                let r = x[0].hypot(x[1]);
                if r < SMALL_R {
                    // Δ(cos(kr)/k) -> -2k, Δ J0(kr) -> -k^2
                    return Complex64::new(-2.0 * k, 0.0) + c * k * k;
                }
                let kr = k * r;
                let (_, du) = self.radial(r, c);
                // u'' = -k cos(kr) + C k^2 (J0(kr) - J1(kr)/(kr))
                let d2u = -k * kr.cos() + c * k * k * (j0(kr) - j1(kr) / kr);
                d2u + du / r
            }
            Kind::Linear { .. } => Complex64::new(0.0, 0.0),
        }
    }

    /// `div φ = i k⁻¹ Δu`
    pub fn div_phi(&self, x: Point) -> Complex64 {
        I / self.k * self.laplacian(x)
    }

    /// Source term `f = -Δu - k²u`.
    pub fn f(&self, x: Point) -> Complex64 {
        match self.kind {
            Kind::Bessel { .. } => {
                let k = self.k;
                let r = x[0].hypot(x[1]);
                let v = if r < SMALL_R { k - k * k * k * r * r / 6.0 } else { (k * r).sin() / r };
                Complex64::new(v, 0.0)
            }
            Kind::Linear { a } => -self.k * self.k * a * (x[0] + x[1]),
        }
    }

    /// Robin datum `g = ∇u·n - σ i k u` for the outward normal `n`.
    pub fn g(&self, x: Point, n: Point) -> Complex64 {
        let gu = self.grad_u(x);
        gu[0] * n[0] + gu[1] * n[1] - I * (self.sigma.value() * self.k) * self.u(x)
    }
}
