//! Point estimators of `γ` and their asymptotic confidence intervals.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::renyi::{scaled_log_spacings, HeavySample, RenyiSample};
use crate::special::normal_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Hill,
    Quantile,
    MlUniform,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Hill => "hill",
            Method::Quantile => "quantile",
            Method::MlUniform => "ml_uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    /// `γ̂ ± σ̂ x_ε / √k` with σ̂ the empirical sd of the scaled log-spacings.
    SpacingVariance,
    /// `γ̂ ± γ̂ x_ε / √k`, the classical iid interval.
    HillSelf,
    /// `γ̃ ± σ̃ √h(s) x_ε / √n`.
    QuantileH,
    None,
}

impl IntervalMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            IntervalMethod::SpacingVariance => "spacing_variance",
            IntervalMethod::HillSelf => "hill_self",
            IntervalMethod::QuantileH => "quantile_h",
            IntervalMethod::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub gamma_hat: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub k_used: usize,
    /// Confidence level `1 − ε`.
    pub level: Option<f64>,
    pub method: Method,
    pub interval_method: IntervalMethod,
}

impl EstimateWithCI {
    pub fn point(gamma_hat: f64, k_used: usize, method: Method) -> Self {
        Self {
            gamma_hat,
            lower: None,
            upper: None,
            k_used,
            level: None,
            method,
            interval_method: IntervalMethod::None,
        }
    }

    pub fn covers(&self, gamma: f64) -> bool {
        match (self.lower, self.upper) {
            (Some(lo), Some(hi)) => lo <= gamma && gamma <= hi,
            _ => false,
        }
    }

    pub fn half_width(&self) -> Option<f64> {
        Some(0.5 * (self.upper? - self.lower?))
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(domain(format!("k = {k} outside 1..={n}")))
    } else {
        Ok(())
    }
}

/// Hill estimator in spacing form,
/// `(1/k) Σ_{j=1}^k j (log W_{n−j+1,n} − log W_{n−j,n})`, with `W_{0,n} = C`.
pub fn hill(h: &HeavySample, k: usize) -> Result<f64> {
    let n = h.n();
    check_k(k, n)?;
    let mut sum = 0.0;
    let mut upper = h.order_stat(n).ln();
    for j in 1..=k {
        let lower = h.order_stat(n - j).ln();
        sum += j as f64 * (upper - lower);
        upper = lower;
    }
    Ok(sum / k as f64)
}

/// Hill estimator in log-average form, `(1/k) Σ_{j=1}^k log W_{n+1−j,n} − log W_{n−k,n}`.
pub fn hill_log_average(h: &HeavySample, k: usize) -> Result<f64> {
    let n = h.n();
    check_k(k, n)?;
    let top: f64 = (1..=k).map(|j| h.order_stat(n + 1 - j).ln()).sum();
    Ok(top / k as f64 - h.order_stat(n - k).ln())
}

/// Hill estimates for every `k = 1..=n` in one pass.
pub fn hill_path(h: &HeavySample) -> Vec<f64> {
    let n = h.n();
    let mut out = Vec::with_capacity(n);
    let mut top_sum = 0.0;
    for k in 1..=n {
        top_sum += h.order_stat(n + 1 - k).ln();
        out.push(top_sum / k as f64 - h.order_stat(n - k).ln());
    }
    out
}

/// `⌈ns⌉`, snapping to an integer when `ns` is within 1e-9 of one.
pub fn upper_index(n: usize, s: f64) -> usize {
    let ns = n as f64 * s;
    let nearest = ns.round();
    if (ns - nearest).abs() < 1e-9 {
        nearest as usize
    } else {
        ns.ceil() as usize
    }
}

fn check_level(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("s must lie in (0,1), got {s}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantileScale {
    /// `Q¹_n(s) = X_{⌈ns⌉,n}`.
    Log,
    /// `Q²_n(s) = exp(Q¹_n(s))`.
    Level,
}

pub fn empirical_quantile(r: &RenyiSample, s: f64, which: QuantileScale) -> Result<f64> {
    let q = log_quantile(r.x(), s)?;
    Ok(match which {
        QuantileScale::Log => q,
        QuantileScale::Level => q.exp(),
    })
}

fn log_quantile(x: &[f64], s: f64) -> Result<f64> {
    check_level(s)?;
    let m = upper_index(x.len(), s);
    if m == 0 {
        return Err(domain(format!("⌈ns⌉ = 0 for n = {}, s = {s}", x.len())));
    }
    Ok(x[m - 1])
}

/// `γ̃_n(s) = X_{⌈ns⌉,n} / (−log(1 − s))`.
pub fn quantile_estimator(r: &RenyiSample, s: f64) -> Result<f64> {
    quantile_estimator_log_scale(r.x(), s)
}

/// [`quantile_estimator`] on any nondecreasing log-scale sample `x`, such as
/// `log(W/C)` of observed data.
pub fn quantile_estimator_log_scale(x: &[f64], s: f64) -> Result<f64> {
    Ok(log_quantile(x, s)? / -(-s).ln_1p())
}

/// `h(s) = s / ((1 − s) log²(1 − s))`.
pub fn h_function(s: f64) -> Result<f64> {
    check_level(s)?;
    let l = (-s).ln_1p();
    Ok(s / ((1.0 - s) * l * l))
}

/// Minimizer of `h` on `(0,1)`: the nonzero root of `log(1/(1−s)) = 2s`,
/// found by bisection. Returns `(s₀, h(s₀))`.
pub fn h_minimizer() -> (f64, f64) {
    let f = |s: f64| -(-s).ln_1p() - 2.0 * s;
    // f < 0 just right of the trivial root at 0, f > 0 near 1.
    let (mut lo, mut hi) = (0.5, 0.99);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s0 = 0.5 * (lo + hi);
    (s0, h_function(s0).expect("s0 in (0,1)"))
}

/// Empirical standard deviation (divisor `k − 1`) of the first `k` scaled
/// log-spacings.
pub fn spacing_sigma(h: &HeavySample, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::DegenerateSample(format!("spacing variance needs k >= 2, got {k}")));
    }
    check_k(k, h.n())?;
    let spacings = scaled_log_spacings(h);
    Ok(crate::stats::sample_variance(&spacings[..k]).sqrt())
}

/// `x_ε = Φ⁻¹(1 − ε/2)`.
pub fn normal_critical_value(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain(format!("eps must lie in (0,1), got {eps}")));
    }
    normal_quantile(1.0 - eps / 2.0)
}

fn interval(
    centre: f64,
    half_width: f64,
    k_used: usize,
    eps: f64,
    method: Method,
    interval_method: IntervalMethod,
) -> EstimateWithCI {
    EstimateWithCI {
        gamma_hat: centre,
        lower: Some(centre - half_width),
        upper: Some(centre + half_width),
        k_used,
        level: Some(1.0 - eps),
        method,
        interval_method,
    }
}

fn check_count(k: usize) -> Result<()> {
    if k == 0 {
        Err(domain("k must be at least 1"))
    } else {
        Ok(())
    }
}

/// `γ̂ ± σ̂ x_ε / √k`.
pub fn ci_spacing(gamma_hat: f64, sigma_hat: f64, k: usize, eps: f64) -> Result<EstimateWithCI> {
    check_count(k)?;
    let x = normal_critical_value(eps)?;
    let hw = sigma_hat * x / (k as f64).sqrt();
    Ok(interval(gamma_hat, hw, k, eps, Method::Hill, IntervalMethod::SpacingVariance))
}

/// `γ̂ ± γ̂ x_ε / √k`.
pub fn ci_hill_self(gamma_hat: f64, k: usize, eps: f64) -> Result<EstimateWithCI> {
    check_count(k)?;
    let x = normal_critical_value(eps)?;
    let hw = gamma_hat.abs() * x / (k as f64).sqrt();
    Ok(interval(gamma_hat, hw, k, eps, Method::Hill, IntervalMethod::HillSelf))
}

/// `γ̃ ± σ̃ √h(s) x_ε / √n`.
pub fn ci_quantile(
    gamma_tilde: f64,
    sigma_hat: f64,
    s: f64,
    n: usize,
    eps: f64,
) -> Result<EstimateWithCI> {
    check_count(n)?;
    let x = normal_critical_value(eps)?;
    let hw = sigma_hat * h_function(s)?.sqrt() * x / (n as f64).sqrt();
    Ok(interval(gamma_tilde, hw, n, eps, Method::Quantile, IntervalMethod::QuantileH))
}

/// Maximum-likelihood estimate under uniform spacings: half the largest of
/// the top-`k` scaled log-spacings.
pub fn ml_uniform(h: &HeavySample, k: usize) -> Result<f64> {
    let n = h.n();
    check_k(k, n)?;
    let spacings = scaled_log_spacings(h);
    Ok(0.5 * spacings[n - k..].iter().copied().fold(0.0, f64::max))
}

/// Log-scale sample `x[k] = log(W_{k,n} / C)`.
pub fn log_scale(h: &HeavySample) -> Vec<f64> {
    let lc = h.scale_c().ln();
    h.w().iter().map(|w| w.ln() - lc).collect()
}
