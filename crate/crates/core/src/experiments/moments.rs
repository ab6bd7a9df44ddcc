use rand::seq::index;
use rand::Rng;

use crate::error::Result;
use crate::rand_models::{DistributionSpec, StreamRng};
use crate::renyi::{cross_moment_recursion, moments_at};
use crate::stats::{correlation, ks_critical_value, ks_statistic, mean, sample_variance};

use super::{label, Cell, Experiment, ExperimentConfig, ExperimentKind, ReportTable};

/// `(X_{δ₁,n}, X_{δ₂,n})` for two distinct uniformly chosen indices. Only the
/// spacings up to the larger index are drawn.
pub(crate) fn draw_pair<R: Rng + ?Sized>(spec: &DistributionSpec, n: usize, rng: &mut R) -> (f64, f64) {
    let picked = index::sample(rng, n, 2);
    let (d1, d2) = (picked.index(0) + 1, picked.index(1) + 1);
    let top = d1.max(d2);
    let z = spec.sample_vec(rng, top);
    let mut acc = 0.0;
    let (mut x1, mut x2) = (0.0, 0.0);
    for (j, &zj) in z.iter().enumerate() {
        acc += zj / (n - j) as f64;
        if j + 1 == d1 {
            x1 = acc;
        }
        if j + 1 == d2 {
            x2 = acc;
        }
    }
    (x1, x2)
}

/// `[law][n index] = (X_{δ₁,n}, X_{δ₂,n})`.
pub struct PairRep(pub Vec<Vec<(f64, f64)>>);

fn replicate_pairs(cfg: &ExperimentConfig, rng: &mut StreamRng) -> PairRep {
    PairRep(
        cfg.specs
            .iter()
            .map(|spec| cfg.n_grid.iter().map(|&n| draw_pair(spec, n, rng)).collect())
            .collect(),
    )
}

fn unzip(reps: &[PairRep], li: usize, ni: usize) -> (Vec<f64>, Vec<f64>) {
    reps.iter().map(|r| r.0[li][ni]).unzip()
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    (mean(xs), (sample_variance(xs) / xs.len() as f64).sqrt())
}

/// KS distance of `X_{δ₁,n}` to `Exp(γ)`, pair correlation and the
/// cross moment against its exact recursion.
pub struct Theorem1Ks {
    cfg: ExperimentConfig,
}

impl Theorem1Ks {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg })
    }
}

impl Experiment for Theorem1Ks {
    type Rep = PairRep;

    fn kind(&self) -> ExperimentKind {
        ExperimentKind::Theorem1Ks
    }

    fn master_seed(&self) -> u64 {
        self.cfg.master_seed
    }

    fn replications(&self) -> u64 {
        self.cfg.reps
    }

    fn replicate(&self, rng: &mut StreamRng, _rep: u64) -> Result<PairRep> {
        Ok(replicate_pairs(&self.cfg, rng))
    }

    fn summarize(&self, reps: Vec<PairRep>) -> Result<ReportTable> {
        let columns = [
            "law",
            "n",
            "ks",
            "ks_critical_1pct",
            "corr",
            "cross_moment_mc",
            "cross_moment_se",
            "cross_moment_exact",
        ];
        let mut table = ReportTable::new(columns.iter().map(|c| c.to_string()).collect());
        for (li, spec) in self.cfg.specs.iter().enumerate() {
            let gamma = spec.gamma_param();
            let max_n = *self.cfg.n_grid.iter().max().expect("nonempty grid");
            let exact = cross_moment_recursion(spec, max_n)?;
            for (ni, &n) in self.cfg.n_grid.iter().enumerate() {
                let (x1, x2) = unzip(&reps, li, ni);
                let ks = ks_statistic(&x1, |x| -(-x / gamma).exp_m1());
                let products: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a * b).collect();
                let (cm, cse) = mean_and_se(&products);
                let corr = if reps.len() >= 2 {
                    Cell::Real(correlation(&x1, &x2))
                } else {
                    Cell::tag("degenerate")
                };
                table.push_row(vec![
                    Cell::tag(label(spec)),
                    Cell::from(n),
                    Cell::Real(ks),
                    Cell::Real(ks_critical_value(0.01, reps.len())),
                    corr,
                    Cell::Real(cm),
                    Cell::Real(cse),
                    Cell::Real(exact[n - 2]),
                ]);
            }
        }
        Ok(table)
    }
}

/// Exact moments from the recursions next to their Monte Carlo estimates
/// and limits.
pub struct Theorem2Moments {
    cfg: ExperimentConfig,
}

impl Theorem2Moments {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg })
    }
}

impl Experiment for Theorem2Moments {
    type Rep = PairRep;

    fn kind(&self) -> ExperimentKind {
        ExperimentKind::Theorem2Moments
    }

    fn master_seed(&self) -> u64 {
        self.cfg.master_seed
    }

    fn replications(&self) -> u64 {
        self.cfg.reps
    }

    fn replicate(&self, rng: &mut StreamRng, _rep: u64) -> Result<PairRep> {
        Ok(replicate_pairs(&self.cfg, rng))
    }

    fn summarize(&self, reps: Vec<PairRep>) -> Result<ReportTable> {
        let columns = [
            "law", "n", "m1_exact", "m1_mc", "m1_se", "m2_exact", "m2_mc", "m2_se", "m2_limit",
            "c_exact", "c_mc", "c_se", "c_limit",
        ];
        let mut table = ReportTable::new(columns.iter().map(|c| c.to_string()).collect());
        for (li, spec) in self.cfg.specs.iter().enumerate() {
            let gamma = spec.gamma_param();
            let max_n = *self.cfg.n_grid.iter().max().expect("nonempty grid");
            let cross = cross_moment_recursion(spec, max_n)?;
            for (ni, &n) in self.cfg.n_grid.iter().enumerate() {
                let m = moments_at(spec, 2, n)?;
                let (x1, x2) = unzip(&reps, li, ni);
                let squares: Vec<f64> = x1.iter().map(|a| a * a).collect();
                let products: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a * b).collect();
                let (m1, m1se) = mean_and_se(&x1);
                let (m2, m2se) = mean_and_se(&squares);
                let (c, cse) = mean_and_se(&products);
                table.push_row(vec![
                    Cell::tag(label(spec)),
                    Cell::from(n),
                    Cell::Real(m[0]),
                    Cell::Real(m1),
                    Cell::Real(m1se),
                    Cell::Real(m[1]),
                    Cell::Real(m2),
                    Cell::Real(m2se),
                    Cell::Real(2.0 * gamma * gamma),
                    Cell::Real(cross[n - 2]),
                    Cell::Real(c),
                    Cell::Real(cse),
                    Cell::Real(gamma * gamma),
                ]);
            }
        }
        Ok(table)
    }
}
