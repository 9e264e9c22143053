//! Seedable Monte Carlo for the pinned-premium selling problem.
//!
//! Paths are simulated in bridge coordinates on `[0, b]` and policies are
//! monitored on the uniform grid. Every sample draws from its own substream
//! keyed by `(seed, sample index)` and samples are reduced in index order, so
//! an estimate is a pure function of its inputs no matter how many threads
//! rayon uses.
//!
//! Monitoring a continuous boundary at grid times can only miss crossings,
//! so threshold estimates carry a downward discretisation bias that shrinks
//! as `steps` grows; see [`refinement_study`].

mod bridge;
mod drift;
mod engine;
mod policy;
mod rng;
mod stats;

use serde::Serialize;

use crate::error::{domain, Result};

pub use bridge::{marginal_at, sample_bridge, sample_bridge_indexed, Marginal, PathGrid};
pub use drift::{supermartingale_drift, DriftPoint, DriftReport, Increment};
pub use engine::{
    evaluate_policy, exp_model_sweep, policy_sweep, refinement_study, PairedDifference, Refinement, Sweep,
};
pub use policy::Policy;
pub use rng::substream;

/// Default number of samples.
pub const DEFAULT_PATHS: usize = 100_000;
/// Default number of grid steps.
pub const DEFAULT_STEPS: usize = 1_000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    /// Number of independent samples. With `antithetic` each sample is the
    /// average over a path and its mirror image, so twice as many paths are
    /// simulated.
    pub paths: usize,
    /// Uniform grid steps on `[0, b]`.
    pub steps: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { paths: DEFAULT_PATHS, steps: DEFAULT_STEPS, seed: DEFAULT_SEED, antithetic: false }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(domain("paths must be at least 1"));
        }
        if self.steps == 0 {
            return Err(domain("steps must be at least 1"));
        }
        Ok(())
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√paths`.
    pub stderr: f64,
    pub paths: usize,
    pub seed: u64,
}

impl McEstimate {
    pub(crate) fn from_samples(xs: &[f64], seed: u64) -> Self {
        let (mean, stderr) = stats::mean_and_stderr(xs);
        Self { mean, stderr, paths: xs.len(), seed }
    }
}
