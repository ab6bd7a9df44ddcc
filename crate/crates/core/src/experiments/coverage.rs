use crate::error::Result;
use crate::estimators::{ci_hill_self, ci_spacing, hill_path};
use crate::rand_models::StreamRng;
use crate::renyi::scaled_log_spacings;

use super::hill_plot::draw_ordered;
use super::{label, Cell, Experiment, ExperimentConfig, ExperimentKind, ReportTable};

/// Coverage frequencies of the spacing-variance and Hill-self intervals.
pub struct Coverage {
    cfg: ExperimentConfig,
}

/// `[law][k index] = (spacing interval covers, Hill-self interval covers)`.
pub struct CoverageRep(pub Vec<Vec<(bool, bool)>>);

impl Coverage {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg })
    }
}

impl Experiment for Coverage {
    type Rep = CoverageRep;

    fn kind(&self) -> ExperimentKind {
        ExperimentKind::Coverage
    }

    fn master_seed(&self) -> u64 {
        self.cfg.master_seed
    }

    fn replications(&self) -> u64 {
        self.cfg.reps
    }

    fn replicate(&self, rng: &mut StreamRng, _rep: u64) -> Result<CoverageRep> {
        let cfg = &self.cfg;
        let mut out = Vec::with_capacity(cfg.specs.len());
        for spec in &cfg.specs {
            let h = draw_ordered(spec, cfg.n, cfg.scale_c, rng)?;
            let path = hill_path(&h);
            let spacings = scaled_log_spacings(&h);
            // Welford over the first k spacings.
            let mut sd = vec![0.0; cfg.n + 1];
            let (mut mean, mut m2) = (0.0, 0.0);
            for (j, &z) in spacings.iter().enumerate() {
                let count = (j + 1) as f64;
                let d = z - mean;
                mean += d / count;
                m2 += d * (z - mean);
                if j >= 1 {
                    sd[j + 1] = (m2 / (count - 1.0)).sqrt();
                }
            }
            let gamma = spec.gamma_param();
            let hits = cfg
                .k_grid
                .iter()
                .map(|&k| {
                    let g = path[k - 1];
                    Ok((
                        ci_spacing(g, sd[k], k, cfg.eps)?.covers(gamma),
                        ci_hill_self(g, k, cfg.eps)?.covers(gamma),
                    ))
                })
                .collect::<Result<_>>()?;
            out.push(hits);
        }
        Ok(CoverageRep(out))
    }

    fn summarize(&self, reps: Vec<CoverageRep>) -> Result<ReportTable> {
        let mut columns = vec!["k".to_string()];
        for spec in &self.cfg.specs {
            let l = label(spec);
            columns.push(format!("{l}/spacing_variance"));
            columns.push(format!("{l}/hill_self"));
        }
        let mut table = ReportTable::new(columns);
        let total = reps.len() as f64;
        for (ki, &k) in self.cfg.k_grid.iter().enumerate() {
            let mut row = vec![Cell::from(k)];
            for li in 0..self.cfg.specs.len() {
                let spacing = reps.iter().filter(|r| r.0[li][ki].0).count();
                let hill = reps.iter().filter(|r| r.0[li][ki].1).count();
                row.push(Cell::Real(spacing as f64 / total));
                row.push(Cell::Real(hill as f64 / total));
            }
            table.push_row(row);
        }
        Ok(table)
    }
}
