//! Monte Carlo engine: correlated Euler simulation of the model SDE
//! systems with antithetic variates and deterministic parallelism.

pub mod config;
pub mod corr;
pub mod engine;
pub mod model;
pub mod rng;

pub use config::McConfig;
pub use corr::{CorrelationSpec, Driver};
pub use engine::{
    build_time_grid, cir_step, pair_mean_se, simulate, simulate_with_monitor, PathBundle,
    PathMonitor, PathState, SliceState, SPOT_FLOOR,
};
pub use model::ModelSpec;
pub use rng::PathRng;
