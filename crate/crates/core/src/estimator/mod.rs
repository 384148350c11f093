//! Robust estimation: the separable two-step RANSAC, plain RANSAC and LMEDS
//! baselines, and iteration budgeting.

mod budget;
mod config;
mod ransac;
mod report;
mod separable;

pub use budget::{iteration_budget, ransac_iterations, IterationBudget};
pub use config::{EstimatorConfig, FallbackBasis, InlierRatio, Variant};
pub use ransac::{estimate_lmeds, estimate_ransac};
pub use report::{EstimateReport, Method, ResidualStats, StepOneSummary};
pub use separable::{
    border_points, control_points, estimate_separable, step_one, step_two, StepOneFailure, StepOneOutcome,
    StepTwoOutcome,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent, reproducible random stream `stream` derived from `seed`.
/// Streams: 2 step one, 3 step two, 4 RANSAC / fallback, 5 LMEDS.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
