//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("time {0} outside curve coverage [0, {1}]")]
    OutsideCurve(f64, f64),

    #[error("calendar arbitrage: total implied variance decreases in maturity at y={y:.4} between T={t0:.4} and T={t1:.4}")]
    CalendarArbitrage { y: f64, t0: f64, t1: f64 },

    #[error("maturity {0} before first variance slice {1}")]
    BeforeFirstSlice(f64, f64),

    #[error("correlation matrix is not positive semidefinite")]
    NotPositiveSemidefinite,

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("price {price} outside no-arbitrage bounds [{lo}, {hi}]")]
    PriceOutOfBounds { price: f64, lo: f64, hi: f64 },

    #[error("non-positive Dupire denominator at y={y:.4}, T={t:.4} (butterfly arbitrage)")]
    NonPositiveDenominator { y: f64, t: f64 },

    #[error("non-positive Dupire numerator at y={y:.4}, T={t:.4}")]
    NonPositiveNumerator { y: f64, t: f64 },

    #[error("no real local volatility at K={strike:.6}, T={t:.4}: numerator {numerator:.3e} (+/- {noise:.3e} MC)")]
    NoRealLocalVol { strike: f64, t: f64, numerator: f64, noise: f64 },

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
