use crate::error::{Error, Result};
use crate::large_deviations::{exact_hill_tail, mc_tail_logprob, upper_tail_rate};
use crate::rand_models::SeedSpec;
use crate::Extended;

use super::runner::experiment_hash;
use super::{label, Cell, ExperimentConfig, ExperimentKind, ReportTable, Runner};

/// `(1/k) log P(γ̂(k) ≥ (1 + c)γ)` by Monte Carlo and, for exponential and
/// gamma spacings, exactly; next to the limit `−I(y)`. Row `i` uses streams
/// `hash·2³² + i·reps + 0..reps`.
pub fn run_ld_check(cfg: &ExperimentConfig, runner: &Runner) -> Result<ReportTable> {
    cfg.validate()?;
    let columns = ["law", "k", "y", "empirical", "empirical_se", "exact", "limit"];
    let mut table = ReportTable::new(columns.iter().map(|c| c.to_string()).collect());
    let base = u64::from(experiment_hash(ExperimentKind::LdCheck)) << 32;
    let mut row_index = 0u64;
    for spec in &cfg.specs {
        let y = (1.0 + cfg.ld_c) * spec.gamma_param();
        let limit = match upper_tail_rate(spec, y)? {
            Extended::Finite(v) => Cell::Real(v),
            other => Cell::tag(other.to_string()),
        };
        for &k in &cfg.k_grid {
            let seed = SeedSpec::new(cfg.master_seed, base.wrapping_add(row_index * cfg.reps));
            row_index += 1;
            let (empirical, se) =
                match runner.install(|| mc_tail_logprob(spec, k, y, cfg.reps, seed))? {
                    Ok(est) => (Cell::Real(est.estimate), Cell::Real(est.std_error)),
                    Err(Error::InsufficientEvents { .. }) => {
                        (Cell::tag("insufficient_events"), Cell::tag("insufficient_events"))
                    }
                    Err(e) => return Err(e),
                };
            let exact = match exact_hill_tail(spec, k, y) {
                Ok(v) => Cell::Real(v / k as f64),
                Err(Error::Unsupported(_)) => Cell::tag("n/a"),
                Err(e) => return Err(e),
            };
            table.push_row(vec![
                Cell::tag(label(spec)),
                Cell::from(k),
                Cell::Real(y),
                empirical,
                se,
                exact,
                limit.clone(),
            ]);
        }
    }
    Ok(table)
}
