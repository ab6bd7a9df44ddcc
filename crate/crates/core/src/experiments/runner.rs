use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rand_models::{SeedSpec, StreamRng};

use super::{ExperimentKind, ReportTable};

/// Executes replications on a fixed number of worker threads. Results are
/// always returned in replication order, so reductions are independent of
/// the worker count.
#[derive(Debug, Clone, Copy)]
pub struct Runner {
    workers: usize,
}

impl Default for Runner {
    fn default() -> Self {
        Self::new(rayon::current_num_threads())
    }
}

impl Runner {
    pub fn new(workers: usize) -> Self {
        Self {
            workers: workers.max(1),
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        if self.workers == 1 {
            return Ok(f());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(f))
    }

    pub fn map<T, F>(&self, range: Range<u64>, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64) -> Result<T> + Sync + Send,
    {
        if self.workers == 1 {
            return range.map(f).collect();
        }
        self.install(|| range.into_par_iter().map(&f).collect::<Result<Vec<T>>>())?
    }
}

/// FNV-1a of the experiment tag, truncated to 32 bits.
pub fn experiment_hash(kind: ExperimentKind) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for b in kind.as_str().bytes() {
        h ^= u32::from(b);
        h = h.wrapping_mul(0x0100_0193);
    }
    h
}

/// Stream of replication `rep` of experiment `kind`: `hash(kind)·2³² + rep`.
pub fn replication_seed(master_seed: u64, kind: ExperimentKind, rep: u64) -> SeedSpec {
    SeedSpec::new(
        master_seed,
        (u64::from(experiment_hash(kind)) << 32).wrapping_add(rep),
    )
}

/// A Monte Carlo experiment split into independent replications and a
/// deterministic, order-preserving summary.
pub trait Experiment: Sync {
    type Rep: Send;

    fn kind(&self) -> ExperimentKind;
    fn master_seed(&self) -> u64;
    fn replications(&self) -> u64;
    fn replicate(&self, rng: &mut StreamRng, rep: u64) -> Result<Self::Rep>;
    fn summarize(&self, reps: Vec<Self::Rep>) -> Result<ReportTable>;
}

/// Runs replications `range` (absolute indices, so partial runs merge).
pub fn replicate_range<E: Experiment>(
    experiment: &E,
    range: Range<u64>,
    runner: &Runner,
) -> Result<Vec<E::Rep>> {
    let kind = experiment.kind();
    let seed = experiment.master_seed();
    runner.map(range, |rep| {
        let mut rng = StreamRng::new(replication_seed(seed, kind, rep));
        experiment.replicate(&mut rng, rep)
    })
}

pub fn execute<E: Experiment>(experiment: &E, runner: &Runner) -> Result<ReportTable> {
    let reps = replicate_range(experiment, 0..experiment.replications(), runner)?;
    experiment.summarize(reps)
}
