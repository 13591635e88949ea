//! Correlation structure over the simulation drivers.

use crate::error::{Error, Result};
use crate::math::linalg::psd_cholesky;

/// Brownian drivers appearing in the SDE systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Driver {
    Spot,
    Variance,
    DomRate,
    FgnRate,
}

/// Symmetric unit-diagonal correlation matrix over an ordered driver set.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSpec {
    drivers: Vec<Driver>,
    matrix: Vec<f64>,
}

impl CorrelationSpec {
    pub fn identity(drivers: &[Driver]) -> Self {
        let n = drivers.len();
        let mut matrix = vec![0.0; n * n];
        for i in 0..n {
            matrix[i * n + i] = 1.0;
        }
        Self { drivers: drivers.to_vec(), matrix }
    }

    /// Build from pairwise entries; unspecified pairs default to zero.
    pub fn from_pairs(drivers: &[Driver], pairs: &[(Driver, Driver, f64)]) -> Result<Self> {
        let mut spec = Self::identity(drivers);
        let n = drivers.len();
        for &(a, b, rho) in pairs {
            if a == b {
                return Err(Error::Invalid("correlation pair must be distinct drivers".into()));
            }
            if !(-1.0..=1.0).contains(&rho) {
                return Err(Error::Invalid(format!("correlation {rho} outside [-1, 1]")));
            }
            let (i, j) = match (spec.index_of(a), spec.index_of(b)) {
                (Some(i), Some(j)) => (i, j),
                _ => {
                    return Err(Error::Invalid(format!(
                        "correlation pair ({a:?}, {b:?}) references absent driver"
                    )))
                }
            };
            spec.matrix[i * n + j] = rho;
            spec.matrix[j * n + i] = rho;
        }
        Ok(spec)
    }

    pub fn drivers(&self) -> &[Driver] {
        &self.drivers
    }

    pub fn index_of(&self, d: Driver) -> Option<usize> {
        self.drivers.iter().position(|&x| x == d)
    }

    /// Pairwise correlation; zero when either driver is absent (the
    /// corresponding diffusion has zero loading in that variant).
    pub fn rho(&self, a: Driver, b: Driver) -> f64 {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.matrix[i * self.drivers.len() + j],
            _ => 0.0,
        }
    }

    /// Lower Cholesky factor; errors if the matrix is not positive
    /// semidefinite at pivot tolerance 1e-12.
    pub fn chol(&self) -> Result<Vec<f64>> {
        psd_cholesky(&self.matrix, self.drivers.len(), 1e-12)
    }
}
