//! Simulation run configuration.

use crate::error::{Error, Result};

/// `n_pairs` counts antithetic pairs: the simulation runs 2 * n_pairs
/// paths in total.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub n_pairs: usize,
    pub max_dt: f64,
    pub seed: u64,
    /// Times at which path state is captured; ascending, positive. The
    /// Euler grid hits each exactly.
    pub capture_times: Vec<f64>,
}

impl McConfig {
    pub fn new(n_pairs: usize, max_dt: f64, seed: u64, capture_times: Vec<f64>) -> Result<Self> {
        let cfg = Self { n_pairs, max_dt, seed, capture_times };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 {
            return Err(Error::Invalid("n_pairs must be >= 1".into()));
        }
        if !(self.max_dt > 0.0) {
            return Err(Error::Invalid("max_dt must be positive".into()));
        }
        if self.capture_times.is_empty() {
            return Err(Error::Invalid("at least one capture time required".into()));
        }
        if self.capture_times[0] <= 0.0 {
            return Err(Error::Invalid("capture times must be positive".into()));
        }
        for w in self.capture_times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Invalid("capture times must be ascending".into()));
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        *self.capture_times.last().unwrap()
    }
}
