//! Probability laws used throughout the crate.
//!
//! Spacing laws (`Exponential`, `Uniform`, `Bernoulli`, `Gamma`) are the
//! nonnegative `Z`'s feeding the generalized Rényi construction; each has mean
//! `γ`. `StrictPareto` and `HallPerturbedPareto` are classical iid heavy-tail
//! laws used as comparison models.
//!
//! Randomness comes from [`StreamRng`], a ChaCha8 keystream keyed by a 64-bit
//! master seed and selected by a 64-bit stream index, so that any number of
//! parallel workers can draw reproducibly without sharing state.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, param, Error, Result};
use crate::special::{inverse_gamma_p, ln_gamma_p};
use crate::Extended;

/// Lower endpoint of the Hall-class law, `Q(0) = 1·(1 + ½)`.
pub const HALL_LOWER_ENDPOINT: f64 = 1.5;
/// Tail index parameter of the Hall-class law (`Q(1−u) ~ u^{-1/2}`).
pub const HALL_GAMMA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    /// Exponential with mean `gamma`.
    Exponential { gamma: f64 },
    /// Uniform on `(0, 2·gamma)`.
    Uniform { gamma: f64 },
    /// Bernoulli with success probability (and mean) `gamma`.
    Bernoulli { gamma: f64 },
    /// Gamma with shape `r` and rate `r / gamma`.
    Gamma { r: f64, gamma: f64 },
    /// iid strict Pareto: `P(X > x) = (c / x)^{1/gamma}` for `x ≥ c`.
    StrictPareto { gamma: f64, c: f64 },
    /// iid Hall-class law with quantile `Q(1−u) = u^{-1/2}(1 + u/2)`.
    HallPerturbedPareto,
}

impl DistributionSpec {
    pub fn exponential(gamma: f64) -> Result<Self> {
        Self::Exponential { gamma }.validated()
    }

    pub fn uniform(gamma: f64) -> Result<Self> {
        Self::Uniform { gamma }.validated()
    }

    pub fn bernoulli(gamma: f64) -> Result<Self> {
        Self::Bernoulli { gamma }.validated()
    }

    pub fn gamma(r: f64, gamma: f64) -> Result<Self> {
        Self::Gamma { r, gamma }.validated()
    }

    pub fn strict_pareto(gamma: f64, c: f64) -> Result<Self> {
        Self::StrictPareto { gamma, c }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(param(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match *self {
            Self::Exponential { gamma } | Self::Uniform { gamma } => positive("gamma", gamma),
            Self::Bernoulli { gamma } => {
                // gamma = 1 is the degenerate atom at 1.
                if gamma > 0.0 && gamma <= 1.0 {
                    Ok(())
                } else {
                    Err(param(format!("Bernoulli gamma must lie in (0,1], got {gamma}")))
                }
            }
            Self::Gamma { r, gamma } => {
                positive("r", r)?;
                positive("gamma", gamma)
            }
            Self::StrictPareto { gamma, c } => {
                positive("gamma", gamma)?;
                positive("c", c)
            }
            Self::HallPerturbedPareto => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exp",
            Self::Uniform { .. } => "unif",
            Self::Bernoulli { .. } => "bern",
            Self::Gamma { .. } => "gamma",
            Self::StrictPareto { .. } => "pareto",
            Self::HallPerturbedPareto => "hall",
        }
    }

    /// True for the nonnegative spacing laws of the Rényi construction.
    pub fn is_spacing_law(&self) -> bool {
        !matches!(self, Self::StrictPareto { .. } | Self::HallPerturbedPareto)
    }

    pub fn is_absolutely_continuous(&self) -> bool {
        !matches!(self, Self::Bernoulli { .. })
    }

    /// The tail parameter `γ`: the spacing mean for spacing laws, the
    /// reciprocal tail index for the iid comparison laws.
    pub fn gamma_param(&self) -> f64 {
        match *self {
            Self::Exponential { gamma }
            | Self::Uniform { gamma }
            | Self::Bernoulli { gamma }
            | Self::Gamma { gamma, .. }
            | Self::StrictPareto { gamma, .. } => gamma,
            Self::HallPerturbedPareto => HALL_GAMMA,
        }
    }

    /// Lower endpoint of the iid comparison laws; `W_{0,n}` when their order
    /// statistics are treated as a heavy sample.
    pub fn lower_endpoint(&self) -> f64 {
        match *self {
            Self::StrictPareto { c, .. } => c,
            Self::HallPerturbedPareto => HALL_LOWER_ENDPOINT,
            _ => 0.0,
        }
    }

    pub fn mean(&self) -> Result<f64> {
        self.moment(1)
    }

    pub fn variance(&self) -> Result<f64> {
        Ok(match *self {
            Self::Exponential { gamma } => gamma * gamma,
            Self::Uniform { gamma } => gamma * gamma / 3.0,
            Self::Bernoulli { gamma } => gamma * (1.0 - gamma),
            Self::Gamma { r, gamma } => gamma * gamma / r,
            _ => {
                let m1 = self.moment(1)?;
                self.moment(2)? - m1 * m1
            }
        })
    }

    /// Exact raw moment `E Z^k`; `k = 0` gives 1.
    pub fn moment(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        let kf = k as f64;
        let infinite = || Error::InfiniteMoment {
            spec: self.to_string(),
            order: k,
        };
        Ok(match *self {
            Self::Exponential { gamma } => (1..=k).map(|i| i as f64 * gamma).product(),
            Self::Uniform { gamma } => (2.0 * gamma).powi(k as i32) / (kf + 1.0),
            Self::Bernoulli { gamma } => gamma,
            Self::Gamma { r, gamma } => (0..k).map(|i| (r + i as f64) * gamma / r).product(),
            Self::StrictPareto { gamma, c } => {
                if kf * gamma < 1.0 {
                    c.powi(k as i32) / (1.0 - kf * gamma)
                } else {
                    return Err(infinite());
                }
            }
            // ∫₀¹ u^{-k/2}(1 + u/2)^k du converges only for k = 1.
            Self::HallPerturbedPareto => {
                if k == 1 {
                    7.0 / 3.0
                } else {
                    return Err(infinite());
                }
            }
        })
    }

    /// Open interval on which the moment generating function is finite.
    pub fn mgf_domain(&self) -> Option<(f64, f64)> {
        match *self {
            Self::Exponential { gamma } => Some((f64::NEG_INFINITY, 1.0 / gamma)),
            Self::Gamma { r, gamma } => Some((f64::NEG_INFINITY, r / gamma)),
            Self::Uniform { .. } | Self::Bernoulli { .. } => {
                Some((f64::NEG_INFINITY, f64::INFINITY))
            }
            Self::StrictPareto { .. } | Self::HallPerturbedPareto => None,
        }
    }

    /// `M(t) = E e^{tZ}`, tagged `+∞` where it diverges.
    pub fn mgf(&self, t: f64) -> Result<Extended> {
        if t == 0.0 {
            return Ok(Extended::Finite(1.0));
        }
        match self.cgf(t)? {
            Extended::Finite(v) => Ok(Extended::Finite(v.exp())),
            other => Ok(other),
        }
    }

    /// Cumulant generating function `log M(t)`.
    pub fn cgf(&self, t: f64) -> Result<Extended> {
        if t.is_nan() {
            return Err(domain("cgf argument is NaN"));
        }
        if t == 0.0 {
            return Ok(Extended::Finite(0.0));
        }
        let Some((_, hi)) = self.mgf_domain() else {
            return if t > 0.0 {
                Ok(Extended::PosInfinity)
            } else {
                Err(Error::NotImplemented(format!("mgf at t < 0 for {self}")))
            };
        };
        if t >= hi {
            return Ok(Extended::PosInfinity);
        }
        let v = match *self {
            Self::Exponential { gamma } => -(-gamma * t).ln_1p(),
            Self::Gamma { r, gamma } => -r * (-gamma * t / r).ln_1p(),
            Self::Uniform { gamma } => uniform_cgf(2.0 * gamma * t),
            Self::Bernoulli { gamma } => {
                // log(1 − γ + γ e^t), written to avoid overflow for large |t|.
                if t > 0.0 {
                    t + (gamma + (1.0 - gamma) * (-t).exp()).ln()
                } else {
                    (gamma * t.exp_m1()).ln_1p()
                }
            }
            Self::StrictPareto { .. } | Self::HallPerturbedPareto => unreachable!(),
        };
        Ok(Extended::Finite(v))
    }

    /// Derivative of the cumulant generating function, the tilted mean.
    pub fn cgf_derivative(&self, t: f64) -> Result<f64> {
        let Some((_, hi)) = self.mgf_domain() else {
            return Err(Error::Unsupported(format!("{self} has no mgf near 0")));
        };
        if !(t < hi) {
            return Err(domain(format!("t = {t} outside the mgf domain")));
        }
        Ok(match *self {
            Self::Exponential { gamma } => gamma / (1.0 - gamma * t),
            Self::Gamma { r, gamma } => gamma / (1.0 - gamma * t / r),
            Self::Uniform { gamma } => {
                let a = 2.0 * gamma;
                let x = a * t;
                if x.abs() < 1e-4 {
                    a * (0.5 + x / 12.0 - x * x * x / 720.0)
                } else {
                    a * (1.0 / (-(-x).exp_m1()) - 1.0 / x)
                }
            }
            Self::Bernoulli { gamma } => {
                if gamma >= 1.0 {
                    1.0
                } else {
                    1.0 / (1.0 + (1.0 - gamma) / gamma * (-t).exp())
                }
            }
            Self::StrictPareto { .. } | Self::HallPerturbedPareto => unreachable!(),
        })
    }

    /// Characteristic function `φ(t) = E e^{itZ}` for the spacing laws.
    pub fn characteristic_function(&self, t: f64) -> Result<Complex64> {
        let i = Complex64::i();
        Ok(match *self {
            Self::Exponential { gamma } => 1.0 / (1.0 - i * gamma * t),
            Self::Uniform { gamma } => {
                let theta = 2.0 * gamma * t;
                if theta == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    // (e^{iθ} − 1)/(iθ) = sin θ/θ + i·2 sin²(θ/2)/θ
                    let half = (0.5 * theta).sin();
                    Complex64::new(theta.sin() / theta, 2.0 * half * half / theta)
                }
            }
            Self::Bernoulli { gamma } => (1.0 - gamma) + gamma * (i * t).exp(),
            Self::Gamma { r, gamma } => (1.0 - i * gamma * t / r).powf(-r),
            Self::StrictPareto { .. } | Self::HallPerturbedPareto => {
                return Err(Error::NotImplemented(format!("characteristic function of {self}")))
            }
        })
    }

    /// Closed convex hull of the support, as `(lower, upper)`.
    pub fn support_hull(&self) -> (f64, f64) {
        match *self {
            Self::Exponential { .. } | Self::Gamma { .. } => (0.0, f64::INFINITY),
            Self::Uniform { gamma } => (0.0, 2.0 * gamma),
            Self::Bernoulli { gamma } => {
                if gamma >= 1.0 {
                    (1.0, 1.0)
                } else {
                    (0.0, 1.0)
                }
            }
            Self::StrictPareto { c, .. } => (c, f64::INFINITY),
            Self::HallPerturbedPareto => (HALL_LOWER_ENDPOINT, f64::INFINITY),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Exponential { gamma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / gamma).exp_m1()
                }
            }
            Self::Uniform { gamma } => (x / (2.0 * gamma)).clamp(0.0, 1.0),
            Self::Bernoulli { gamma } => {
                if x < 0.0 {
                    0.0
                } else if x < 1.0 {
                    1.0 - gamma
                } else {
                    1.0
                }
            }
            Self::Gamma { r, gamma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    ln_gamma_p(r, x * r / gamma).map(f64::exp).unwrap_or(f64::NAN)
                }
            }
            Self::StrictPareto { gamma, c } => {
                if x <= c {
                    0.0
                } else {
                    1.0 - (c / x).powf(1.0 / gamma)
                }
            }
            Self::HallPerturbedPareto => {
                if x <= HALL_LOWER_ENDPOINT {
                    0.0
                } else {
                    // u^{-1/2}(1 + u/2) = x  ⇔  √u = x − √(x² − 2)
                    let v = 2.0 / (x + (x * x - 2.0).sqrt());
                    1.0 - v * v
                }
            }
        }
    }

    /// Left-continuous generalized inverse of the CDF, `u ∈ (0,1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(domain(format!("quantile level must lie in (0,1), got {u}")));
        }
        Ok(self.quantile_unchecked(u))
    }

    fn quantile_unchecked(&self, u: f64) -> f64 {
        match *self {
            Self::Exponential { gamma } => -gamma * (-u).ln_1p(),
            Self::Uniform { gamma } => 2.0 * gamma * u,
            Self::Bernoulli { gamma } => {
                if u <= 1.0 - gamma {
                    0.0
                } else {
                    1.0
                }
            }
            Self::Gamma { r, gamma } => {
                inverse_gamma_p(r, u).map(|x| x * gamma / r).unwrap_or(f64::NAN)
            }
            Self::StrictPareto { gamma, c } => c * (1.0 - u).powf(-gamma),
            Self::HallPerturbedPareto => {
                let tail = 1.0 - u;
                (1.0 + 0.5 * tail) / tail.sqrt()
            }
        }
    }

    /// Fills `out` with iid draws.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match *self {
            Self::Exponential { gamma } => {
                for v in out.iter_mut() {
                    *v = -gamma * open_unit(rng).ln();
                }
            }
            Self::Uniform { gamma } => {
                let width = 2.0 * gamma;
                for v in out.iter_mut() {
                    *v = width * rng.random::<f64>();
                }
            }
            Self::Bernoulli { gamma } => {
                for v in out.iter_mut() {
                    *v = if rng.random::<f64>() < gamma { 1.0 } else { 0.0 };
                }
            }
            Self::Gamma { r, gamma } => {
                let law = rand_distr::Gamma::new(r, gamma / r).expect("validated gamma parameters");
                for v in out.iter_mut() {
                    *v = rng.sample(law);
                }
            }
            Self::StrictPareto { gamma, c } => {
                for v in out.iter_mut() {
                    *v = c * open_unit(rng).powf(-gamma);
                }
            }
            Self::HallPerturbedPareto => {
                for v in out.iter_mut() {
                    let tail = open_unit(rng);
                    *v = (1.0 + 0.5 * tail) / tail.sqrt();
                }
            }
        }
    }

    pub fn sample_vec<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        let mut out = vec![0.0; count];
        self.sample_into(rng, &mut out);
        out
    }
}

/// Uniform on `(0, 1]`.
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// `log((e^x − 1)/x)` without overflow or cancellation.
fn uniform_cgf(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        x / 2.0 + x * x / 24.0
    } else if x > 0.0 {
        x + (-(-x).exp_m1()).ln() - x.ln()
    } else {
        (-x.exp_m1()).ln() - (-x).ln()
    }
}

/// Draws `count` iid values from `spec` on the stream named by `seed`.
pub fn sample(spec: &DistributionSpec, seed: SeedSpec, count: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    if count == 0 {
        return Err(domain("sample count must be positive"));
    }
    let mut rng = StreamRng::new(seed);
    Ok(spec.sample_vec(&mut rng, count))
}

pub fn quantile(spec: &DistributionSpec, u: f64) -> Result<f64> {
    spec.validate()?;
    spec.quantile(u)
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Exponential { gamma } => write!(f, "exp:gamma={gamma}"),
            Self::Uniform { gamma } => write!(f, "unif:gamma={gamma}"),
            Self::Bernoulli { gamma } => write!(f, "bern:gamma={gamma}"),
            Self::Gamma { r, gamma } => write!(f, "gamma:r={r},gamma={gamma}"),
            Self::StrictPareto { gamma, c } => write!(f, "pareto:gamma={gamma},c={c}"),
            Self::HallPerturbedPareto => f.write_str("hall"),
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Parses `kind[:key=value,...]`, case-insensitively. `gamma` defaults to
    /// 0.5 and `c` to 1; `r` is required for the gamma kind.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (kind, rest) = match lower.split_once(':') {
            Some((k, r)) => (k.trim(), r.trim()),
            None => (lower.as_str(), ""),
        };
        let allowed: &[&str] = match kind {
            "exp" | "unif" | "bern" => &["gamma"],
            "gamma" => &["r", "gamma"],
            "pareto" => &["gamma", "c"],
            "hall" => &[],
            other => return Err(Error::Parse(format!("unknown distribution kind '{other}'"))),
        };
        let mut gamma = None;
        let mut r = None;
        let mut c = None;
        for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{pair}'")))?;
            let key = key.trim();
            if !allowed.contains(&key) {
                return Err(Error::Parse(format!("unknown key '{key}' for kind '{kind}'")));
            }
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("invalid number '{value}' for '{key}'")))?;
            let slot = match key {
                "gamma" => &mut gamma,
                "r" => &mut r,
                _ => &mut c,
            };
            if slot.replace(value).is_some() {
                return Err(Error::Parse(format!("duplicate key '{key}'")));
            }
        }
        let gamma = gamma.unwrap_or(0.5);
        let spec = match kind {
            "exp" => Self::Exponential { gamma },
            "unif" => Self::Uniform { gamma },
            "bern" => Self::Bernoulli { gamma },
            "gamma" => Self::Gamma {
                r: r.ok_or_else(|| Error::Parse("gamma kind requires r".into()))?,
                gamma,
            },
            "pareto" => Self::StrictPareto {
                gamma,
                c: c.unwrap_or(1.0),
            },
            _ => Self::HallPerturbedPareto,
        };
        spec.validated()
    }
}

impl Serialize for DistributionSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DistributionSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Names one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }
}

/// ChaCha8 keystream: the key is the master seed, the stream index selects
/// the ChaCha stream, so distinct `(master, stream)` pairs never share state.
#[derive(Debug, Clone)]
pub struct StreamRng(ChaCha8Rng);

impl StreamRng {
    pub fn new(seed: SeedSpec) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.master_seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(seed.stream_index);
        Self(rng)
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// A bijection on `0..n`, stored zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Validates that `indices` is a bijection on `0..len`.
    pub fn from_zero_based(indices: Vec<usize>) -> Result<Self> {
        let n = indices.len();
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(domain(format!("not a permutation of 0..{n}")));
            }
        }
        Ok(Self(indices))
    }

    pub fn from_one_based(indices: &[usize]) -> Result<Self> {
        if indices.contains(&0) {
            return Err(domain("one-based permutation contains 0"));
        }
        Self::from_zero_based(indices.iter().map(|&i| i - 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }
}

/// Uniform random permutation (Fisher–Yates) of `n` items.
pub fn random_permutation(n: usize, seed: SeedSpec) -> Result<Permutation> {
    if n == 0 {
        return Err(domain("permutation size must be positive"));
    }
    let mut rng = StreamRng::new(seed);
    Ok(random_permutation_with(n, &mut rng))
}

pub fn random_permutation_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    Permutation(p)
}
