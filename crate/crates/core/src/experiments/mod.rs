//! Deterministic parallel Monte Carlo harness for the figure reproductions and
//! the distributional checks.

mod coverage;
mod hill_plot;
mod ld_check;
mod moments;
mod report;
mod runner;
mod variance_curve;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rand_models::{DistributionSpec, HALL_GAMMA};

pub use coverage::{Coverage, CoverageRep};
pub use hill_plot::{HillPlot, HillPlotRep};
pub use ld_check::run_ld_check;
pub use moments::{PairRep, Theorem1Ks, Theorem2Moments};
pub use report::{Cell, Meta, ReportTable};
pub use runner::{
    execute, experiment_hash, replicate_range, replication_seed, Experiment, Runner,
};
pub use variance_curve::{VarianceCurve, VarianceRep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    VarianceCurve,
    HillPlot,
    Coverage,
    Theorem1Ks,
    Theorem2Moments,
    LdCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::VarianceCurve,
        ExperimentKind::HillPlot,
        ExperimentKind::Coverage,
        ExperimentKind::Theorem1Ks,
        ExperimentKind::Theorem2Moments,
        ExperimentKind::LdCheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::VarianceCurve => "variance_curve",
            ExperimentKind::HillPlot => "hill_plot",
            ExperimentKind::Coverage => "coverage",
            ExperimentKind::Theorem1Ks => "theorem1_ks",
            ExperimentKind::Theorem2Moments => "theorem2_moments",
            ExperimentKind::LdCheck => "ld_check",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown experiment '{s}'")))
    }
}

/// Parameters of one experiment run. Fields a given experiment does not use
/// are ignored by it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub specs: Vec<DistributionSpec>,
    pub n: usize,
    /// Sample sizes for the theorem checks.
    #[serde(default)]
    pub n_grid: Vec<usize>,
    /// Replications; for the Hill plot, the number of averaged seeds.
    pub reps: u64,
    pub eps: f64,
    #[serde(default)]
    pub s_grid: Vec<f64>,
    #[serde(default)]
    pub k_grid: Vec<usize>,
    /// Scale `C` of Rényi-model samples.
    pub scale_c: f64,
    /// Relative deviation `c` of the large-deviation threshold `y = (1 + c)γ`.
    pub ld_c: f64,
    pub master_seed: u64,
}

pub const DEFAULT_SEED: u64 = 20_240_501;

/// `count` log-spaced integers from `lo` to `hi`, deduplicated.
pub fn log_spaced_grid(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if hi <= lo || count < 2 {
        return vec![hi.max(lo)];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as usize)
        .collect();
    out.dedup();
    *out.last_mut().expect("nonempty") = hi;
    out
}

/// `s = 0.200, 0.201, …, 0.990`.
pub fn default_s_grid() -> Vec<f64> {
    (200..=990).map(|i| i as f64 / 1000.0).collect()
}

fn default_laws(gamma: f64) -> Vec<DistributionSpec> {
    vec![
        DistributionSpec::Uniform { gamma },
        DistributionSpec::Bernoulli { gamma },
        DistributionSpec::Exponential { gamma },
    ]
}

fn figure2_laws() -> Vec<DistributionSpec> {
    let mut laws = vec![
        DistributionSpec::StrictPareto {
            gamma: HALL_GAMMA,
            c: 1.0,
        },
        DistributionSpec::HallPerturbedPareto,
    ];
    laws.extend(default_laws(0.5));
    laws
}

impl ExperimentConfig {
    /// Desk-scale defaults for `kind`.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let base = Self {
            experiment: kind,
            specs: default_laws(0.5),
            n: 2000,
            n_grid: Vec::new(),
            reps: 2000,
            eps: 0.1,
            s_grid: Vec::new(),
            k_grid: Vec::new(),
            scale_c: 1.0,
            ld_c: 0.2,
            master_seed: DEFAULT_SEED,
        };
        match kind {
            ExperimentKind::VarianceCurve => Self {
                n: 1000,
                reps: 1000,
                s_grid: default_s_grid(),
                ..base
            },
            ExperimentKind::HillPlot => Self {
                specs: figure2_laws(),
                reps: 1,
                ..base
            },
            ExperimentKind::Coverage => Self {
                specs: figure2_laws(),
                k_grid: log_spaced_grid(10, 2000, 50),
                ..base
            },
            ExperimentKind::Theorem1Ks => Self {
                specs: vec![
                    DistributionSpec::Uniform { gamma: 0.5 },
                    DistributionSpec::Exponential { gamma: 0.5 },
                ],
                n_grid: vec![50, 200, 2000],
                reps: 100_000,
                ..base
            },
            ExperimentKind::Theorem2Moments => Self {
                specs: vec![
                    DistributionSpec::Uniform { gamma: 0.5 },
                    DistributionSpec::Exponential { gamma: 0.5 },
                ],
                n_grid: vec![2, 10, 100, 500],
                reps: 100_000,
                ..base
            },
            ExperimentKind::LdCheck => Self {
                specs: vec![
                    DistributionSpec::Exponential { gamma: 1.0 },
                    DistributionSpec::Gamma { r: 2.0, gamma: 1.0 },
                    DistributionSpec::Uniform { gamma: 0.5 },
                    DistributionSpec::Bernoulli { gamma: 0.5 },
                ],
                k_grid: vec![10, 20, 50, 100, 200],
                reps: 200_000,
                ..base
            },
        }
    }

    pub fn to_text(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if self.specs.is_empty() {
            return bad("at least one distribution is required".into());
        }
        for spec in &self.specs {
            spec.validate()?;
        }
        if !(self.scale_c > 0.0 && self.scale_c.is_finite()) {
            return bad(format!("scale C must be positive, got {}", self.scale_c));
        }
        let needs_spacing_laws = matches!(
            self.experiment,
            ExperimentKind::VarianceCurve
                | ExperimentKind::Theorem1Ks
                | ExperimentKind::Theorem2Moments
                | ExperimentKind::LdCheck
        );
        if needs_spacing_laws {
            if let Some(s) = self.specs.iter().find(|s| !s.is_spacing_law()) {
                return bad(format!("{} needs spacing laws, got {s}", self.experiment));
            }
        }
        match self.experiment {
            ExperimentKind::VarianceCurve => {
                if self.n == 0 {
                    return bad("n must be positive".into());
                }
                if self.s_grid.is_empty() {
                    return bad("s grid is empty".into());
                }
                if let Some(s) = self.s_grid.iter().find(|&&s| !(s > 0.0 && s < 1.0)) {
                    return bad(format!("s = {s} outside (0,1)"));
                }
                if let Some(s) = self
                    .s_grid
                    .iter()
                    .find(|&&s| crate::estimators::upper_index(self.n, s) == 0)
                {
                    return bad(format!("s = {s} selects no order statistic at n = {}", self.n));
                }
            }
            ExperimentKind::HillPlot => {
                if self.n == 0 {
                    return bad("n must be positive".into());
                }
            }
            ExperimentKind::Coverage => {
                if !(self.eps > 0.0 && self.eps < 1.0) {
                    return bad(format!("eps must lie in (0,1), got {}", self.eps));
                }
                if self.k_grid.is_empty() {
                    return bad("k grid is empty".into());
                }
                if let Some(k) = self.k_grid.iter().find(|&&k| k < 2 || k > self.n) {
                    return bad(format!("k = {k} outside 2..={}", self.n));
                }
            }
            ExperimentKind::Theorem1Ks | ExperimentKind::Theorem2Moments => {
                if self.n_grid.is_empty() {
                    return bad("n grid is empty".into());
                }
                if let Some(n) = self.n_grid.iter().find(|&&n| n < 2) {
                    return bad(format!("n = {n} too small; pairs need n >= 2"));
                }
            }
            ExperimentKind::LdCheck => {
                if self.k_grid.is_empty() {
                    return bad("k grid is empty".into());
                }
                if self.k_grid.contains(&0) {
                    return bad("k must be positive".into());
                }
                if !(self.ld_c > 0.0 && self.ld_c.is_finite()) {
                    return bad(format!("c must be positive, got {}", self.ld_c));
                }
            }
        }
        Ok(())
    }
}

/// Runs the configured experiment and attaches the reproducibility block.
pub fn run(cfg: &ExperimentConfig, runner: &Runner) -> Result<ReportTable> {
    cfg.validate()?;
    let start = Instant::now();
    let mut table = match cfg.experiment {
        ExperimentKind::VarianceCurve => execute(&VarianceCurve::new(cfg.clone())?, runner)?,
        ExperimentKind::HillPlot => execute(&HillPlot::new(cfg.clone())?, runner)?,
        ExperimentKind::Coverage => execute(&Coverage::new(cfg.clone())?, runner)?,
        ExperimentKind::Theorem1Ks => execute(&Theorem1Ks::new(cfg.clone())?, runner)?,
        ExperimentKind::Theorem2Moments => execute(&Theorem2Moments::new(cfg.clone())?, runner)?,
        ExperimentKind::LdCheck => run_ld_check(cfg, runner)?,
    };
    table.meta.config = serde_json::to_value(cfg)?;
    table.meta.master_seed = Some(cfg.master_seed);
    table.meta.wall_time_secs = Some(start.elapsed().as_secs_f64());
    Ok(table)
}

pub fn run_variance_curve(cfg: &ExperimentConfig, runner: &Runner) -> Result<ReportTable> {
    run_kind(cfg, ExperimentKind::VarianceCurve, runner)
}

pub fn run_hill_plot(cfg: &ExperimentConfig, runner: &Runner) -> Result<ReportTable> {
    run_kind(cfg, ExperimentKind::HillPlot, runner)
}

pub fn run_coverage(cfg: &ExperimentConfig, runner: &Runner) -> Result<ReportTable> {
    run_kind(cfg, ExperimentKind::Coverage, runner)
}

pub fn run_theorem1_ks(cfg: &ExperimentConfig, runner: &Runner) -> Result<ReportTable> {
    run_kind(cfg, ExperimentKind::Theorem1Ks, runner)
}

pub fn run_theorem2_moments(cfg: &ExperimentConfig, runner: &Runner) -> Result<ReportTable> {
    run_kind(cfg, ExperimentKind::Theorem2Moments, runner)
}

fn run_kind(cfg: &ExperimentConfig, kind: ExperimentKind, runner: &Runner) -> Result<ReportTable> {
    if cfg.experiment != kind {
        return Err(Error::Config(format!(
            "config is for {}, not {kind}",
            cfg.experiment
        )));
    }
    run(cfg, runner)
}

/// Column label of a law.
pub(crate) fn label(spec: &DistributionSpec) -> String {
    spec.to_string()
}

/// Sample variance with the `n − 1` divisor, or `None` for one observation.
pub(crate) fn variance_or_degenerate(xs: &[f64]) -> Option<f64> {
    (xs.len() >= 2).then(|| crate::stats::sample_variance(xs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        for kind in ExperimentKind::ALL {
            let cfg = ExperimentConfig::defaults(kind);
            cfg.validate().unwrap();
            let back = ExperimentConfig::from_text(&cfg.to_text().unwrap()).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::VarianceCurve);
        cfg.reps = 0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));

        let mut cfg = ExperimentConfig::defaults(ExperimentKind::VarianceCurve);
        cfg.specs.push(DistributionSpec::HallPerturbedPareto);
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));

        let mut cfg = ExperimentConfig::defaults(ExperimentKind::Coverage);
        cfg.k_grid.push(cfg.n + 1);
        assert!(cfg.validate().is_err());

        assert!(ExperimentConfig::from_text(r#"{"experiment":"coverage","bogus":1}"#).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in ExperimentKind::ALL {
            assert_eq!(kind.as_str().parse::<ExperimentKind>().unwrap(), kind);
        }
    }

    #[test]
    fn grids() {
        let g = log_spaced_grid(10, 2000, 50);
        assert_eq!(g[0], 10);
        assert_eq!(*g.last().unwrap(), 2000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let s = default_s_grid();
        assert_eq!(s.len(), 791);
        assert!(s.contains(&0.797));
    }
}
