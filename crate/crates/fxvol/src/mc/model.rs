//! Model variants simulated by the engine, in their calibration measures.

use crate::error::{Error, Result};
use crate::heston::HestonParams;
use crate::market::DiscountCurve;
use crate::mc::corr::{CorrelationSpec, Driver};
use crate::rates::G1ppParams;
use crate::surface::SliceSurface;

/// SDE system plus everything needed to integrate it.
///
/// T-forward variants (`*Tfwd`) carry the measure horizon; their drifts
/// depend on it through b^d(t, T). Deterministic-rate variants (`*Drn`)
/// read rates off the curves as instantaneous forwards.
#[derive(Debug, Clone)]
pub enum ModelSpec {
    /// Local volatility with two stochastic G1++ rates, domestic T-forward
    /// measure. Drivers (S, d, f).
    Lv2srTfwd {
        spot: f64,
        dom: G1ppParams,
        fgn: G1ppParams,
        local_vol: SliceSurface,
        corr: CorrelationSpec,
        horizon: f64,
    },
    /// Heston with deterministic rates, domestic risk-neutral measure.
    /// Drivers (S, U).
    HestonDrn {
        spot: f64,
        dom_curve: DiscountCurve,
        fgn_curve: DiscountCurve,
        heston: HestonParams,
        corr: CorrelationSpec,
    },
    /// Stochastic local volatility with deterministic rates. Drivers (S, U).
    Slv2drDrn {
        spot: f64,
        dom_curve: DiscountCurve,
        fgn_curve: DiscountCurve,
        heston: HestonParams,
        leverage: SliceSurface,
        corr: CorrelationSpec,
    },
    /// Full model: stochastic local volatility and stochastic rates under
    /// the domestic T-forward measure. Drivers (S, U, d, f).
    Slv2srTfwd {
        spot: f64,
        dom: G1ppParams,
        fgn: G1ppParams,
        heston: HestonParams,
        leverage: SliceSurface,
        corr: CorrelationSpec,
        horizon: f64,
    },
    /// Flat-vol Black-Scholes with stochastic rates, domestic T-forward
    /// measure. Drivers (S, d, f).
    Bs2srTfwd {
        spot: f64,
        sigma_s: f64,
        dom: G1ppParams,
        fgn: G1ppParams,
        corr: CorrelationSpec,
        horizon: f64,
    },
}

impl ModelSpec {
    pub fn drivers(&self) -> &'static [Driver] {
        use Driver::*;
        match self {
            ModelSpec::Lv2srTfwd { .. } | ModelSpec::Bs2srTfwd { .. } => &[Spot, DomRate, FgnRate],
            ModelSpec::HestonDrn { .. } | ModelSpec::Slv2drDrn { .. } => &[Spot, Variance],
            ModelSpec::Slv2srTfwd { .. } => &[Spot, Variance, DomRate, FgnRate],
        }
    }

    pub fn spot(&self) -> f64 {
        match self {
            ModelSpec::Lv2srTfwd { spot, .. }
            | ModelSpec::HestonDrn { spot, .. }
            | ModelSpec::Slv2drDrn { spot, .. }
            | ModelSpec::Slv2srTfwd { spot, .. }
            | ModelSpec::Bs2srTfwd { spot, .. } => *spot,
        }
    }

    pub fn corr(&self) -> &CorrelationSpec {
        match self {
            ModelSpec::Lv2srTfwd { corr, .. }
            | ModelSpec::HestonDrn { corr, .. }
            | ModelSpec::Slv2drDrn { corr, .. }
            | ModelSpec::Slv2srTfwd { corr, .. }
            | ModelSpec::Bs2srTfwd { corr, .. } => corr,
        }
    }

    /// Measure horizon for T-forward variants.
    pub fn horizon(&self) -> Option<f64> {
        match self {
            ModelSpec::Lv2srTfwd { horizon, .. }
            | ModelSpec::Slv2srTfwd { horizon, .. }
            | ModelSpec::Bs2srTfwd { horizon, .. } => Some(*horizon),
            _ => None,
        }
    }

    /// Same model under the T-forward measure of a different horizon;
    /// deterministic-rate variants are unchanged.
    pub fn with_horizon(&self, t: f64) -> Self {
        let mut m = self.clone();
        match &mut m {
            ModelSpec::Lv2srTfwd { horizon, .. }
            | ModelSpec::Slv2srTfwd { horizon, .. }
            | ModelSpec::Bs2srTfwd { horizon, .. } => *horizon = t,
            _ => {}
        }
        m
    }

    pub fn dom_curve(&self) -> &DiscountCurve {
        match self {
            ModelSpec::Lv2srTfwd { dom, .. }
            | ModelSpec::Slv2srTfwd { dom, .. }
            | ModelSpec::Bs2srTfwd { dom, .. } => dom.curve(),
            ModelSpec::HestonDrn { dom_curve, .. } | ModelSpec::Slv2drDrn { dom_curve, .. } => {
                dom_curve
            }
        }
    }

    pub fn fgn_curve(&self) -> &DiscountCurve {
        match self {
            ModelSpec::Lv2srTfwd { fgn, .. }
            | ModelSpec::Slv2srTfwd { fgn, .. }
            | ModelSpec::Bs2srTfwd { fgn, .. } => fgn.curve(),
            ModelSpec::HestonDrn { fgn_curve, .. } | ModelSpec::Slv2drDrn { fgn_curve, .. } => {
                fgn_curve
            }
        }
    }

    pub(crate) fn has_variance(&self) -> bool {
        matches!(
            self,
            ModelSpec::HestonDrn { .. } | ModelSpec::Slv2drDrn { .. } | ModelSpec::Slv2srTfwd { .. }
        )
    }

    pub(crate) fn has_rate_factors(&self) -> bool {
        matches!(
            self,
            ModelSpec::Lv2srTfwd { .. } | ModelSpec::Slv2srTfwd { .. } | ModelSpec::Bs2srTfwd { .. }
        )
    }

    pub fn validate(&self, horizon_needed: f64) -> Result<()> {
        if !(self.spot() > 0.0) {
            return Err(Error::Invalid("spot must be positive".into()));
        }
        let needed = self.drivers();
        for d in needed {
            if self.corr().index_of(*d).is_none() {
                return Err(Error::Invalid(format!("correlation matrix missing driver {d:?}")));
            }
        }
        if self.corr().drivers().len() != needed.len() {
            return Err(Error::Invalid("correlation matrix has extra drivers".into()));
        }
        if let Some(t) = self.horizon() {
            if horizon_needed > t + 1e-12 {
                return Err(Error::Invalid(format!(
                    "capture horizon {horizon_needed} exceeds T-forward horizon {t}"
                )));
            }
        }
        if self.dom_curve().max_tenor() + 1e-12 < horizon_needed
            || self.fgn_curve().max_tenor() + 1e-12 < horizon_needed
        {
            return Err(Error::Invalid("curves shorter than simulation horizon".into()));
        }
        match self {
            ModelSpec::Lv2srTfwd { local_vol, .. } => {
                if local_vol.is_empty() {
                    return Err(Error::Invalid("local vol surface is empty".into()));
                }
            }
            ModelSpec::Slv2drDrn { leverage, heston, .. }
            | ModelSpec::Slv2srTfwd { leverage, heston, .. } => {
                if leverage.is_empty() {
                    return Err(Error::Invalid("leverage surface is empty".into()));
                }
                heston.validate()?;
            }
            ModelSpec::HestonDrn { heston, .. } => heston.validate()?,
            ModelSpec::Bs2srTfwd { sigma_s, .. } => {
                if *sigma_s < 0.0 {
                    return Err(Error::Invalid("sigma_s must be nonnegative".into()));
                }
            }
        }
        Ok(())
    }
}
