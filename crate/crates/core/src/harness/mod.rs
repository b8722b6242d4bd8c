//! Measurement protocol: dataset ingestion, equivalence verification,
//! platform comparison reports, scope profiling, spike-drop robustness,
//! repeatability and a small trainer producing deployable weights.

mod drop;
mod eval;
mod mnist;
mod profile;
mod report;
mod tensor;
mod train;

pub use drop::{spike_drop, SpikeDropper};
pub use eval::{
    dense_accuracy, evaluate, repeatability, robustness_sweep, verify_equivalence, Equivalence, EvalReport,
    Mismatch, PlatformRow, RepeatReport, RobustnessReport, DEFAULT_DROP_RATIOS,
};
pub use mnist::{load_mnist_idx, parse_idx_images, parse_idx_labels, Dataset};
pub use profile::{scope_profile, ScopeBreakdown};
pub use report::{write_eval_csv, write_robustness_csv, write_scope_csv};
pub use tensor::{Tensor, DTYPE_F32, TENSOR_MAGIC};
pub use train::{train_linear_ttfs, TrainConfig};

use rayon::prelude::*;

use crate::accel::AccelConfig;
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,
    pub accel: AccelConfig,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { jobs: 0, accel: AccelConfig::default(), seed: DEFAULT_SEED }
    }
}

/// Maps `f` over `0..n` on a pool of `jobs` threads, keeping index order.
pub(crate) fn par_map<R, F>(jobs: usize, n: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize) -> Result<R> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::contract(format!("cannot start {jobs} workers: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}
