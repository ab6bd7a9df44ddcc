//! Densities of generalized Rényi samples and the conditional likelihood of
//! the top order statistics of a heavy sample.
//!
//! All products are accumulated in log space; `k!` enters through
//! `ln Γ(k + 1)`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::estimators::{hill, ml_uniform};
use crate::rand_models::DistributionSpec;
use crate::renyi::HeavySample;
use crate::special::ln_gamma;
use crate::Extended;

/// An absolutely continuous spacing law with a pointwise density `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityModel {
    spec: DistributionSpec,
}

impl DensityModel {
    pub fn new(spec: DistributionSpec) -> Result<Self> {
        spec.validate()?;
        match spec {
            DistributionSpec::Exponential { .. }
            | DistributionSpec::Uniform { .. }
            | DistributionSpec::Gamma { .. } => Ok(Self { spec }),
            DistributionSpec::Bernoulli { .. } => {
                Err(Error::NotAbsolutelyContinuous(spec.to_string()))
            }
            _ => Err(Error::Unsupported(format!("{spec} is not a spacing law"))),
        }
    }

    pub fn spec(&self) -> DistributionSpec {
        self.spec
    }

    /// `log g(x)`; `−∞` off the support.
    pub fn ln_density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        match self.spec {
            DistributionSpec::Exponential { gamma } => -gamma.ln() - x / gamma,
            DistributionSpec::Uniform { gamma } => {
                if x <= 2.0 * gamma {
                    -(2.0 * gamma).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            DistributionSpec::Gamma { r, gamma } => {
                let rate = r / gamma;
                let power = if x == 0.0 {
                    match r.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => 0.0,
                        _ => f64::NEG_INFINITY,
                    }
                } else {
                    (r - 1.0) * x.ln()
                };
                r * rate.ln() - ln_gamma(r) + power - rate * x
            }
            _ => unreachable!("constructor admits only continuous spacing laws"),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.ln_density(x).exp()
    }
}

fn check_values(y: &[f64]) -> Result<()> {
    if y.iter().any(|v| v.is_nan()) {
        return Err(domain("density argument contains NaN"));
    }
    Ok(())
}

/// `log p(y₁,…,y_k) = Σ_{j=1}^k [log(n−j+1) + log g((n−j+1)(y_j − y_{j−1}))]`
/// with `y₀ = 0`; `−∞` off the ordered cone.
pub fn ordered_log_density(model: &DensityModel, n: usize, y: &[f64]) -> Result<Extended> {
    check_values(y)?;
    if y.iter().any(|&v| v < 0.0) {
        return Err(domain("ordered density arguments must be nonnegative"));
    }
    let k = y.len();
    if k == 0 || k > n {
        return Err(domain(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut total = 0.0;
    let mut prev = 0.0;
    for (i, &yj) in y.iter().enumerate() {
        if yj < prev {
            return Ok(Extended::NegInfinity);
        }
        let m = (n - i) as f64;
        total += m.ln() + model.ln_density(m * (yj - prev));
        prev = yj;
    }
    Ok(to_extended(total))
}

pub fn ordered_density(model: &DensityModel, n: usize, y: &[f64]) -> Result<f64> {
    Ok(ordered_log_density(model, n, y)?.to_f64().exp())
}

/// Density of the randomly permuted sample `(X_{δ₁,n}, …, X_{δ_n,n})`:
/// `Π_j g((n−j+1)(y_{(j)} − y_{(j−1)}))` over the sorted coordinates.
pub fn permuted_density(model: &DensityModel, y: &[f64]) -> Result<f64> {
    check_values(y)?;
    if y.is_empty() {
        return Err(domain("permuted density needs at least one coordinate"));
    }
    if y.iter().any(|&v| v < 0.0) {
        return Ok(0.0);
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut total = 0.0;
    let mut prev = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        total += model.ln_density((n - i) as f64 * (v - prev));
        prev = v;
    }
    Ok(total.exp())
}

/// Log of the conditional density of `(W_{n−k+1,n}, …, W_{n,n})` given
/// `W_{n−k,n}`:
/// `log k! + Σ_{j=n−k+1}^n [log g((n−j+1)(log w_j − log w_{j−1})) − log w_j]`.
///
/// `block` holds the `k + 1` values `w_{n−k}, …, w_n` (with `w_0 = C` when
/// `k = n`).
pub fn conditional_log_likelihood(model: &DensityModel, block: &[f64], n: usize) -> Result<Extended> {
    check_values(block)?;
    if block.len() < 2 {
        return Err(domain("conditional likelihood needs at least two values"));
    }
    let k = block.len() - 1;
    if k > n {
        return Err(domain(format!("block implies k = {k} > n = {n}")));
    }
    if block.iter().any(|&w| w <= 0.0) {
        return Err(domain("heavy-sample values must be positive"));
    }
    if block.windows(2).any(|p| p[1] < p[0]) {
        return Err(Error::ModelViolation("conditional block is not nondecreasing".into()));
    }
    let mut total = ln_gamma(k as f64 + 1.0);
    let mut prev = block[0].ln();
    for (i, &w) in block[1..].iter().enumerate() {
        let lw = w.ln();
        let multiplier = (k - i) as f64;
        total += model.ln_density(multiplier * (lw - prev)) - lw;
        prev = lw;
    }
    Ok(to_extended(total))
}

fn to_extended(v: f64) -> Extended {
    if v == f64::NEG_INFINITY {
        Extended::NegInfinity
    } else if v == f64::INFINITY {
        Extended::PosInfinity
    } else {
        Extended::Finite(v)
    }
}

/// Parametric spacing families fitted by conditional maximum likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Exponential,
    /// Gamma with known shape `r` and rate `r/γ`.
    GammaFixedR(f64),
    Uniform,
}

impl ModelFamily {
    /// The family member with mean `gamma`.
    pub fn model(&self, gamma: f64) -> Result<DensityModel> {
        DensityModel::new(match *self {
            ModelFamily::Exponential => DistributionSpec::exponential(gamma)?,
            ModelFamily::GammaFixedR(r) => DistributionSpec::gamma(r, gamma)?,
            ModelFamily::Uniform => DistributionSpec::uniform(gamma)?,
        })
    }
}

impl std::fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelFamily::Exponential => f.write_str("exponential"),
            ModelFamily::GammaFixedR(r) => write!(f, "gamma:r={r}"),
            ModelFamily::Uniform => f.write_str("uniform"),
        }
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = Error;

    /// `exponential`, `uniform`, or `gamma:r=<shape>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "exponential" | "exp" => Ok(Self::Exponential),
            "uniform" | "unif" => Ok(Self::Uniform),
            other => {
                let r = other
                    .strip_prefix("gamma:r=")
                    .ok_or_else(|| Error::Parse(format!("unknown model family '{s}'")))?;
                let r: f64 = r
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid gamma shape in '{s}'")))?;
                if !(r > 0.0) {
                    return Err(Error::InvalidParameter(format!("gamma shape must be positive, got {r}")));
                }
                Ok(Self::GammaFixedR(r))
            }
        }
    }
}

/// Conditional ML estimate of `γ` from the top `k` order statistics.
///
/// For exponential and fixed-shape gamma spacings the likelihood in `γ` is
/// maximized by the Hill estimator; for uniform spacings by half the largest
/// top-`k` scaled log-spacing.
pub fn ml_fit(family: ModelFamily, h: &HeavySample, k: usize) -> Result<f64> {
    if let ModelFamily::GammaFixedR(r) = family {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma shape must be positive, got {r}")));
        }
    }
    match family {
        ModelFamily::Exponential | ModelFamily::GammaFixedR(_) => hill(h, k),
        ModelFamily::Uniform => ml_uniform(h, k),
    }
}

/// `conditional_log_likelihood` of the family member with mean `gamma` on
/// the top-`k` block of `h`.
pub fn family_log_likelihood(
    family: ModelFamily,
    gamma: f64,
    h: &HeavySample,
    k: usize,
) -> Result<Extended> {
    conditional_log_likelihood(&family.model(gamma)?, &h.top_block(k)?, h.n())
}
