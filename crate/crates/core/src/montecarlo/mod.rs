//! Monte Carlo estimation of exposure risk measures under clearing scenarios.

mod engine;
mod evaluate;
pub mod marginals;
mod sampler;
pub mod stats;

use thiserror::Error;

use crate::market::MarketError;

pub use engine::{
    attach_analytic, simulate, simulate_detailed, DealerRisk, EpsilonSamples, RiskReport, RunMetadata,
    ScenarioRisk, SimulationOptions, BLOCK_PATHS, MIN_PATHS, MIN_TAIL_COUNT,
};
pub use evaluate::{evaluate_scenario, CompiledScenario};
pub use sampler::{
    sample_pair_exposures, CopulaSampler, ExposureDraw, NoiseSource, PairDraw, Sampler, SamplingModel,
};
pub use stats::{empirical_quantile, Histogram, Moments, UpperTail};

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("copula correlation must lie in [0, 1), got {0}")]
    Correlation(f64),
    #[error("correlation matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("sampling model has {model} marginals for {classes} classes")]
    ModelShape { model: usize, classes: usize },
    #[error("pair must be canonical i < j < N, got ({0}, {1})")]
    PairOrder(usize, usize),
    #[error("dealer index {0} out of range")]
    DealerOutOfRange(usize),
    #[error("at least {MIN_PATHS} paths required, got {0}")]
    TooFewPaths(u64),
    #[error("risk level must lie in (0, 1), got {0}")]
    Level(f64),
    #[error("empty sample")]
    EmptySample,
    #[error("tail sample too short for the requested level")]
    TailTooShort,
    #[error("scenario list needs a no-CCP base scenario")]
    NoBaseScenario,
    #[error("thread pool: {0}")]
    ThreadPool(String),
}
