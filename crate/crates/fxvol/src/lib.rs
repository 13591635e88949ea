//! Monte Carlo calibration of FX volatility models with stochastic G1++
//! interest rates.
//!
//! The crate builds four model families on a shared simulation engine:
//!
//! - **LV2SR** — Dupire local volatility with two stochastic short rates,
//!   calibrated slice by slice under the domestic T-forward measure.
//! - **SLV2DR** — stochastic local volatility (Heston variance times a
//!   leverage function) with deterministic rates.
//! - **SLV2SR** — the combined model, with the leverage function fitted by
//!   regression against spot and both rate factors.
//! - **BS2SR** — flat-volatility Black-Scholes with stochastic rates, whose
//!   total implied variance is quadratic in the flat volatility and bounds
//!   the calibratable region of LV2SR.
//!
//! Repricing harnesses in [`pricing`] verify calibration quality against
//! analytic Black-Scholes references.

pub mod analytic;
pub mod dupire;
pub mod error;
pub mod heston;
pub mod io;
pub mod leverage;
pub mod market;
pub mod math;
pub mod mc;
pub mod optim;
pub mod pricing;
pub mod rates;
pub mod surface;

pub use error::{Error, Result};
