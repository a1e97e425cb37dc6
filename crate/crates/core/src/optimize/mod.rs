//! Search for the Bayes action: the assignment minimizing the Monte-Carlo
//! expected loss over posterior draws.

mod brute;
mod genetic;
mod local;

use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::error::{config, Result};
use crate::loss::{ExpectedLoss, LossSpec};

pub use brute::{brute_force_assignment, brute_force_with, MAX_BRUTE_FORCE};
pub use genetic::{optimize_assignment, optimize_with, SearchReport};
pub use local::{local_search, local_search_with};

/// Genetic search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub population_size: usize,
    pub max_generations: usize,
    /// Stop after this many generations without improvement of the best.
    pub wait_generations: usize,
    /// Per-coordinate probability of resampling a label.
    pub mutation_rate: f64,
    /// Probability that a child is a uniform crossover of two parents
    /// rather than a copy of one.
    pub crossover_rate: f64,
    pub seed: u64,
    /// Polish the incumbent with best-improvement single-label moves.
    pub local_search: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            population_size: 3000,
            max_generations: 2000,
            wait_generations: 20,
            mutation_rate: 0.1,
            crossover_rate: 0.7,
            seed: 1,
            local_search: true,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(config("population_size must be at least 2"));
        }
        if self.max_generations < 1 || self.wait_generations < 1 {
            return Err(config("max_generations and wait_generations must be at least 1"));
        }
        for (name, rate) in [("mutation_rate", self.mutation_rate), ("crossover_rate", self.crossover_rate)] {
            if !(rate > 0.0 && rate < 1.0) {
                return Err(config(format!("{name} must lie in (0, 1), got {rate}")));
            }
        }
        Ok(())
    }
}

/// `true` when `candidate` beats `incumbent` by more than rounding noise.
pub(crate) fn improves(candidate: f64, incumbent: f64) -> bool {
    candidate < incumbent - 1e-12 * incumbent.abs().max(1.0)
}

pub(crate) fn objective(zs: &[Assignment], spec: &LossSpec) -> Result<ExpectedLoss> {
    ExpectedLoss::new(zs, spec)
}
