use crate::error::Result;
use crate::estimators::{h_function, upper_index};
use crate::rand_models::StreamRng;

use super::{label, variance_or_degenerate, Cell, Experiment, ExperimentConfig, ExperimentKind, ReportTable};

/// Empirical variance of `√n(γ̃_n(s) − γ)/σ` over the s-grid, per law.
pub struct VarianceCurve {
    cfg: ExperimentConfig,
    sigmas: Vec<f64>,
    indices: Vec<usize>,
    denominators: Vec<f64>,
}

/// Standardized quantile estimates, `[law][s]`.
pub struct VarianceRep(pub Vec<Vec<f64>>);

impl VarianceCurve {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let sigmas = cfg
            .specs
            .iter()
            .map(|s| s.variance().map(f64::sqrt))
            .collect::<Result<_>>()?;
        let indices = cfg.s_grid.iter().map(|&s| upper_index(cfg.n, s)).collect();
        let denominators = cfg.s_grid.iter().map(|&s| -(-s).ln_1p()).collect();
        Ok(Self {
            cfg,
            sigmas,
            indices,
            denominators,
        })
    }
}

impl Experiment for VarianceCurve {
    type Rep = VarianceRep;

    fn kind(&self) -> ExperimentKind {
        ExperimentKind::VarianceCurve
    }

    fn master_seed(&self) -> u64 {
        self.cfg.master_seed
    }

    fn replications(&self) -> u64 {
        self.cfg.reps
    }

    fn replicate(&self, rng: &mut StreamRng, _rep: u64) -> Result<VarianceRep> {
        let n = self.cfg.n;
        let root_n = (n as f64).sqrt();
        let mut z = vec![0.0; n];
        let mut out = Vec::with_capacity(self.cfg.specs.len());
        for (spec, &sigma) in self.cfg.specs.iter().zip(&self.sigmas) {
            spec.sample_into(rng, &mut z);
            let x = crate::renyi::generalized_renyi(&z)?;
            let gamma = spec.gamma_param();
            out.push(
                self.indices
                    .iter()
                    .zip(&self.denominators)
                    .map(|(&m, &d)| root_n * (x.x()[m - 1] / d - gamma) / sigma)
                    .collect(),
            );
        }
        Ok(VarianceRep(out))
    }

    fn summarize(&self, reps: Vec<VarianceRep>) -> Result<ReportTable> {
        let mut columns = vec!["s".to_string(), "h".to_string()];
        columns.extend(self.cfg.specs.iter().map(label));
        let mut table = ReportTable::new(columns);
        let mut column = Vec::with_capacity(reps.len());
        let mut degenerate = false;
        for (si, &s) in self.cfg.s_grid.iter().enumerate() {
            let mut row = vec![Cell::Real(s), Cell::Real(h_function(s)?)];
            for li in 0..self.cfg.specs.len() {
                column.clear();
                column.extend(reps.iter().map(|r| r.0[li][si]));
                let v = variance_or_degenerate(&column).unwrap_or_else(|| {
                    degenerate = true;
                    0.0
                });
                row.push(Cell::Real(v));
            }
            table.push_row(row);
        }
        if degenerate {
            table
                .meta
                .notes
                .push("degenerate: single replication, variances set to 0".into());
        }
        Ok(table)
    }
}
