use rand::Rng;

use crate::error::Result;
use crate::estimators::hill_path;
use crate::rand_models::{DistributionSpec, StreamRng};
use crate::renyi::{simulate, HeavySample};

use super::{label, Cell, Experiment, ExperimentConfig, ExperimentKind, ReportTable};

/// Ordered sample of size `n` for `spec`: the Rényi model at scale `C` for spacing
/// laws, sorted iid draws conditioned on the lower endpoint otherwise.
pub(crate) fn draw_ordered<R: Rng + ?Sized>(
    spec: &DistributionSpec,
    n: usize,
    scale_c: f64,
    rng: &mut R,
) -> Result<HeavySample> {
    if spec.is_spacing_law() {
        return Ok(simulate(spec, n, scale_c, rng)?.1);
    }
    let mut w = spec.sample_vec(rng, n);
    w.sort_by(f64::total_cmp);
    HeavySample::from_order_statistics(w, spec.lower_endpoint())
}

/// Hill estimator paths `{(k, γ̂(k)) : k = 1..n}`, averaged over `reps` seeds.
pub struct HillPlot {
    cfg: ExperimentConfig,
}

/// `[law][k − 1]`.
pub struct HillPlotRep {
    pub paths: Vec<Vec<f64>>,
}

impl HillPlot {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg })
    }
}

impl Experiment for HillPlot {
    type Rep = HillPlotRep;

    fn kind(&self) -> ExperimentKind {
        ExperimentKind::HillPlot
    }

    fn master_seed(&self) -> u64 {
        self.cfg.master_seed
    }

    fn replications(&self) -> u64 {
        self.cfg.reps
    }

    fn replicate(&self, rng: &mut StreamRng, _rep: u64) -> Result<HillPlotRep> {
        let paths = self
            .cfg
            .specs
            .iter()
            .map(|spec| Ok(hill_path(&draw_ordered(spec, self.cfg.n, self.cfg.scale_c, rng)?)))
            .collect::<Result<_>>()?;
        Ok(HillPlotRep { paths })
    }

    fn summarize(&self, reps: Vec<HillPlotRep>) -> Result<ReportTable> {
        let mut columns = vec!["k".to_string()];
        columns.extend(self.cfg.specs.iter().map(label));
        let mut table = ReportTable::new(columns);
        let count = reps.len() as f64;
        for k in 0..self.cfg.n {
            let mut row = vec![Cell::from(k + 1)];
            for li in 0..self.cfg.specs.len() {
                let sum: f64 = reps.iter().map(|r| r.paths[li][k]).sum();
                row.push(Cell::Real(sum / count));
            }
            table.push_row(row);
        }
        Ok(table)
    }
}
