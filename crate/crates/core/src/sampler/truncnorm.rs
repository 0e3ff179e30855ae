//! Exact draws from a Gaussian restricted to an interval.
//!
//! Inside the bulk the inverse CDF is evaluated through `erfc`/`erfc_inv`;
//! beyond five standard deviations a translated-exponential proposal with
//! rejection takes over, which stays exact and efficient in the far tail.

use rand::Rng;
use rand_distr::{Distribution, Open01};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const TAIL_SWITCH: f64 = 5.0;

/// Draws from the density proportional to `exp(-quad z^2 - lin z)` on `[lo, hi]`.
/// Either bound may be infinite.
pub fn sample_truncated_gaussian<F: Scalar, R: Rng + ?Sized>(
    quad: F,
    lin: F,
    lo: F,
    hi: F,
    rng: &mut R,
) -> Result<F> {
    let (quad, lin, lo, hi) = (quad.as_f64(), lin.as_f64(), lo.as_f64(), hi.as_f64());
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::EmptyInterval { lo, hi });
    }
    if !(quad > 0.0) || !quad.is_finite() || !lin.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "quadratic coefficient must be positive, got {quad}"
        )));
    }
    let mean = -lin / (2.0 * quad);
    let sd = (0.5 / quad).sqrt();
    let a = (lo - mean) / sd;
    let b = (hi - mean) / sd;
    let z = standard_truncated(a, b, rng);
    let x = (mean + sd * z).clamp(lo, hi);
    Ok(F::lit(x))
}

/// Standard normal restricted to `[a, b]`, `a < b`.
pub(crate) fn standard_truncated<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if a >= 0.0 {
        upper(a, b, rng)
    } else if b <= 0.0 {
        -upper(-b, -a, rng)
    } else {
        let pa = normal_cdf(a);
        let pb = normal_cdf(b);
        let u: f64 = Open01.sample(rng);
        normal_quantile(pa + u * (pb - pa)).clamp(a, b)
    }
}

/// `0 <= a < b`.
fn upper<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if a < TAIL_SWITCH {
        let qa = upper_tail(a);
        let qb = upper_tail(b);
        let u: f64 = Open01.sample(rng);
        upper_tail_quantile(qb + u * (qa - qb)).clamp(a, b)
    } else {
        exponential_rejection(a, b, rng)
    }
}

fn exponential_rejection<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    let peak = rate.clamp(a, b);
    let width = b - a;
    loop {
        let u: f64 = Open01.sample(rng);
        let z = if width.is_finite() {
            a - (u * (-rate * width).exp_m1()).ln_1p() / rate
        } else {
            a - u.ln() / rate
        };
        let z = z.clamp(a, b);
        let v: f64 = Open01.sample(rng);
        let log_accept = -0.5 * ((z - rate).powi(2) - (peak - rate).powi(2));
        if v.ln() <= log_accept {
            return z;
        }
    }
}

pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

fn upper_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn upper_tail_quantile(p: f64) -> f64 {
    std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}
