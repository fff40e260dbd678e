//! Bessel functions of the first kind, orders 0 and 1, for `x >= 0`.
//!
//! Below [`SERIES_LIMIT`] the ascending series is summed in double-double
//! arithmetic; cancellation between terms of size `~e^x / sqrt(x)` would
//! otherwise cost several digits. Above it the Hankel amplitude/phase
//! expansion is summed until its terms stop decreasing; at `x = 20` the
//! smallest term is below `1e-17`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

pub const SERIES_LIMIT: f64 = 20.0;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Self { hi: s, lo: err }
    }

    fn quick_two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        Self { hi: s, lo: b - (s - a) }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Self { hi: p, lo: a.mul_add(b, -p) }
    }

    fn add(self, o: Self) -> Self {
        let s = Self::two_sum(self.hi, o.hi);
        let t = Self::two_sum(self.lo, o.lo);
        let u = Self::quick_two_sum(s.hi, s.lo + t.hi);
        Self::quick_two_sum(u.hi, u.lo + t.lo)
    }

    fn mul(self, o: Self) -> Self {
        let p = Self::two_prod(self.hi, o.hi);
        let lo = p.lo + (self.hi * o.lo + self.lo * o.hi);
        Self::quick_two_sum(p.hi, lo)
    }

    fn div_f64(self, d: f64) -> Self {
        let q1 = self.hi / d;
        let p = Self::two_prod(q1, d);
        let r = Self::two_sum(self.hi, -p.hi);
        let q2 = (r.hi + (r.lo - p.lo + self.lo)) / d;
        Self::quick_two_sum(q1, q2)
    }

    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// `sum_m (-q)^m / (m! (m + order)!)`, with `q = x^2 / 4`, in double-double.
fn ascending_series(x: f64, order: usize) -> f64 {
    let q = DoubleDouble::two_prod(x, x).div_f64(4.0).neg();
    let mut term = DoubleDouble::from_f64(1.0);
    if order == 1 {
        term = term.div_f64(1.0);
    }
    let mut sum = term;
    for m in 1..200 {
        term = term.mul(q).div_f64((m * (m + order)) as f64);
        sum = sum.add(term);
        if term.hi.abs() < 1e-34 * sum.hi.abs().max(1e-300) {
            break;
        }
    }
    sum.to_f64()
}

/// Hankel expansion `P(x), Q(x)` for order `nu` (0 or 1).
fn hankel_pq(x: f64, nu: usize) -> (f64, f64) {
    let mu = 4.0 * (nu * nu) as f64;
    // a_k = prod_{j=1..k} (mu - (2j-1)^2) / (k! 8^k); P uses even k, Q odd k.
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..120 {
        let j = (2 * k - 1) as f64;
        a *= (mu - j * j) / (k as f64 * 8.0 * x);
        let mag = a.abs();
        if mag >= prev || mag < 1e-18 {
            break;
        }
        prev = mag;
        // term index k contributes (-1)^{k/2} a_k to P for even k,
        // (-1)^{(k-1)/2} a_k to Q for odd k.
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
    }
    (p, q)
}

fn check(x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("Bessel argument must be finite and non-negative, got {x}")));
    }
    Ok(())
}

/// `J_0(x)` for finite `x >= 0`.
pub fn bessel_j0(x: f64) -> Result<f64> {
    check(x)?;
    Ok(j0(x))
}

/// `J_1(x)` for finite `x >= 0`.
pub fn bessel_j1(x: f64) -> Result<f64> {
    check(x)?;
    Ok(j1(x))
}

/// Unchecked `J_0`; callers guarantee `x >= 0`.
pub(crate) fn j0(x: f64) -> f64 {
    if x < SERIES_LIMIT {
        ascending_series(x, 0)
    } else {
        let (p, q) = hankel_pq(x, 0);
        let (s, c) = x.sin_cos();
        // cos(x - π/4) and sin(x - π/4) without forming x - π/4
        let cw = FRAC_1_SQRT_2 * (c + s);
        let sw = FRAC_1_SQRT_2 * (s - c);
        (2.0 / (PI * x)).sqrt() * (p * cw - q * sw)
    }
}

/// Unchecked `J_1`; callers guarantee `x >= 0`.
pub(crate) fn j1(x: f64) -> f64 {
    if x < SERIES_LIMIT {
        0.5 * x * ascending_series(x, 1)
    } else {
        let (p, q) = hankel_pq(x, 1);
        let (s, c) = x.sin_cos();
        // cos(x - 3π/4) and sin(x - 3π/4)
        let cw = FRAC_1_SQRT_2 * (s - c);
        let sw = -FRAC_1_SQRT_2 * (s + c);
        (2.0 / (PI * x)).sqrt() * (p * cw - q * sw)
    }
}
