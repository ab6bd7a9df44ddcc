//! Special functions: log-scale regularized incomplete gamma, its inverse,
//! and the standard normal CDF / quantile.

use crate::error::{domain, Result};

pub use libm::lgamma as ln_gamma;

const MAX_ITER: usize = 10_000;
const EPS: f64 = 1e-17;
const TINY: f64 = 1e-300;

/// `ln P(a, x)` and `ln Q(a, x)` for the regularized incomplete gamma pair.
///
/// Uses the power series below `x < a + 1` and a modified-Lentz continued
/// fraction above; the complementary side is taken with `ln_1p` so neither
/// tail underflows.
pub fn ln_gamma_pq(a: f64, x: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain(format!("incomplete gamma shape must be positive, got {a}")));
    }
    if !(x >= 0.0) {
        return Err(domain(format!("incomplete gamma argument must be >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    if x.is_infinite() {
        return Ok((0.0, f64::NEG_INFINITY));
    }
    let prefix = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let ln_p = prefix + series(a, x).ln();
        Ok((ln_p, (-ln_p.exp()).ln_1p()))
    } else {
        let ln_q = prefix + continued_fraction(a, x).ln();
        Ok(((-ln_q.exp()).ln_1p(), ln_q))
    }
}

pub fn ln_gamma_q(a: f64, x: f64) -> Result<f64> {
    ln_gamma_pq(a, x).map(|(_, q)| q)
}

pub fn ln_gamma_p(a: f64, x: f64) -> Result<f64> {
    ln_gamma_pq(a, x).map(|(p, _)| p)
}

/// Σ_{n≥0} x^n / (a (a+1) … (a+n)).
fn series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum
}

/// Continued fraction for `Γ(a, x) e^x x^{-a}`, modified Lentz.
fn continued_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Solves `P(a, x) = p` for `x`.
pub fn inverse_gamma_p(a: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("probability must lie in (0,1), got {p}")));
    }
    let target = p.ln();
    let below = |x: f64| -> Result<bool> { Ok(ln_gamma_p(a, x)? < target) };
    let mut lo = 0.0;
    let mut hi = a.max(1.0);
    while below(hi)? {
        lo = hi;
        hi *= 2.0;
    }
    // Bisection to full precision, then a Newton polish on the density.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let density = ((a - 1.0) * x.ln() - x - ln_gamma(a)).exp();
    if density > 0.0 && density.is_finite() {
        let step = (ln_gamma_p(a, x)?.exp() - p) / density;
        let polished = x - step;
        if polished > lo && polished < hi {
            return Ok(polished);
        }
    }
    Ok(x)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

const ACKLAM_A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const ACKLAM_B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const ACKLAM_C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const ACKLAM_D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

/// Standard normal quantile: Acklam's rational approximation (about 1e-9
/// relative) followed by one Halley step on the CDF.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("probability must lie in (0,1), got {p}")));
    }
    if p > 0.5 {
        return Ok(-normal_quantile(1.0 - p)?);
    }
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        tail_ratio(q)
    } else {
        let q = p - 0.5;
        let r = q * q;
        let [a0, a1, a2, a3, a4, a5] = ACKLAM_A;
        let [b0, b1, b2, b3, b4] = ACKLAM_B;
        (((((a0 * r + a1) * r + a2) * r + a3) * r + a4) * r + a5) * q
            / (((((b0 * r + b1) * r + b2) * r + b3) * r + b4) * r + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    Ok(x - u / (1.0 + 0.5 * x * u))
}

fn tail_ratio(q: f64) -> f64 {
    let [c0, c1, c2, c3, c4, c5] = ACKLAM_C;
    let [d0, d1, d2, d3] = ACKLAM_D;
    (((((c0 * q + c1) * q + c2) * q + c3) * q + c4) * q + c5)
        / ((((d0 * q + d1) * q + d2) * q + d3) * q + 1.0)
}
