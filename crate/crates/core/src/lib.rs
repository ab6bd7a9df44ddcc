//! Generalized Rényi statistics and the heavy-tailed order-statistics model
//! built from them.
//!
//! A generalized Rényi statistic is the prefix sum
//! `X_{k,n} = Σ_{j≤k} Z_j / (n + 1 − j)` of iid nonnegative spacings `Z`.
//! Exponentiating (`W_{k,n} = C·exp(X_{k,n})`) yields ordered heavy-tailed
//! samples whose scaled log-spacings are exactly the iid `Z`'s, which makes
//! the Hill estimator an average of iid variables.
//!
//! Modules:
//! - [`rand_models`]: spacing laws, iid comparison laws, seeded streams.
//! - [`renyi`]: sample construction and exact finite-n oracles.
//! - [`estimators`]: Hill, quantile and ML estimators with confidence intervals.
//! - [`large_deviations`]: Cramér rate functions and tail-probability oracles.
//! - [`likelihood`]: ordered / permuted densities and the conditional likelihood.
//! - [`experiments`]: deterministic parallel Monte Carlo harness and report tables.

pub mod error;
pub mod estimators;
pub mod experiments;
pub mod large_deviations;
pub mod likelihood;
pub mod quadrature;
pub mod rand_models;
pub mod renyi;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use estimators::{EstimateWithCI, IntervalMethod, Method};
pub use rand_models::{DistributionSpec, SeedSpec, StreamRng};
pub use renyi::{HeavySample, RenyiSample};

/// A real value that may be tagged as infinite instead of carrying a huge float.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extended {
    Finite(f64),
    PosInfinity,
    NegInfinity,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    /// Collapses to an `f64`, mapping the tags onto IEEE infinities.
    pub fn to_f64(self) -> f64 {
        match self {
            Extended::Finite(v) => v,
            Extended::PosInfinity => f64::INFINITY,
            Extended::NegInfinity => f64::NEG_INFINITY,
        }
    }
}

impl std::fmt::Display for Extended {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::PosInfinity => f.write_str("inf"),
            Extended::NegInfinity => f.write_str("-inf"),
        }
    }
}
