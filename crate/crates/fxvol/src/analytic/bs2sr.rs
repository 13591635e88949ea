//! Flat-volatility Black-Scholes with two stochastic G1++ rates (BS2SR).
//!
//! Under the domestic T-forward measure the forward F(t,T) is driftless
//! with diffusion `sigma_S dW_S + sigma_d b_d dW_d - sigma_f b_f dW_f`, so
//! the total implied variance is an explicit quadratic in the flat FX
//! volatility. Its minimum over nonnegative volatilities bounds the
//! market variances the LV2SR extension can calibrate to.

use crate::error::{Error, Result};
use crate::math::linalg::psd_cholesky;
use crate::math::pwconst::merged_segments;
use crate::math::GaussLegendre;
use crate::rates::G1ppParams;

/// Flat FX volatility plus the two rate models and the (S, d, f)
/// correlations.
#[derive(Debug, Clone)]
pub struct Bs2srSpec {
    pub sigma_s: f64,
    pub dom: G1ppParams,
    pub fgn: G1ppParams,
    pub rho_sd: f64,
    pub rho_sf: f64,
    pub rho_df: f64,
}

impl Bs2srSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sigma_s < 0.0 {
            return Err(Error::Invalid("sigma_s must be nonnegative".into()));
        }
        let m = [
            1.0,
            self.rho_sd,
            self.rho_sf,
            self.rho_sd,
            1.0,
            self.rho_df,
            self.rho_sf,
            self.rho_df,
            1.0,
        ];
        psd_cholesky(&m, 3, 1e-12).map(|_| ())
    }

    pub fn rate_part(&self) -> RatePart<'_> {
        RatePart {
            dom: &self.dom,
            fgn: &self.fgn,
            rho_sd: self.rho_sd,
            rho_sf: self.rho_sf,
            rho_df: self.rho_df,
        }
    }
}

/// The sigma_S-independent inputs: rate models and correlations.
#[derive(Debug, Clone, Copy)]
pub struct RatePart<'a> {
    pub dom: &'a G1ppParams,
    pub fgn: &'a G1ppParams,
    pub rho_sd: f64,
    pub rho_sf: f64,
    pub rho_df: f64,
}

impl RatePart<'_> {
    /// (I1, I2) with
    /// `I1 = int_0^T [rho_Sd sigma_d b_d - rho_Sf sigma_f b_f] dt` and
    /// `I2 = int_0^T [(sigma_d b_d)^2 - 2 rho_df sigma_d b_d sigma_f b_f + (sigma_f b_f)^2] dt`.
    pub fn integrals(&self, t: f64) -> (f64, f64) {
        let gl = GaussLegendre::new(64);
        let dom_spec = self.dom.spec();
        let fgn_spec = self.fgn.spec();
        let segs = merged_segments(
            &[
                &dom_spec.mean_reversion,
                &dom_spec.volatility,
                &fgn_spec.mean_reversion,
                &fgn_spec.volatility,
            ],
            0.0,
            t,
        );
        let i1 = gl.integrate_segments(&segs, |u| {
            let gd = dom_spec.volatility.value(u) * dom_spec.b_factor(u, t).unwrap();
            let gf = fgn_spec.volatility.value(u) * fgn_spec.b_factor(u, t).unwrap();
            self.rho_sd * gd - self.rho_sf * gf
        });
        let i2 = gl.integrate_segments(&segs, |u| {
            let gd = dom_spec.volatility.value(u) * dom_spec.b_factor(u, t).unwrap();
            let gf = fgn_spec.volatility.value(u) * fgn_spec.b_factor(u, t).unwrap();
            gd * gd - 2.0 * self.rho_df * gd * gf + gf * gf
        });
        (i1, i2)
    }
}

/// Total implied variance Sigma^2 T of the BS2SR model at maturity `t`:
/// quadratic in sigma_S.
pub fn bs2sr_tiv(spec: &Bs2srSpec, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Invalid("bs2sr_tiv needs T > 0".into()));
    }
    spec.validate()?;
    let (i1, i2) = spec.rate_part().integrals(t);
    Ok(spec.sigma_s * spec.sigma_s * t + 2.0 * spec.sigma_s * i1 + i2)
}

/// Minimum total implied variance over sigma_S >= 0: the quadratic's
/// vertex value when the vertex is nonnegative, else the value at zero.
pub fn bs2sr_min_tiv(rates: &RatePart<'_>, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Invalid("bs2sr_min_tiv needs T > 0".into()));
    }
    let (i1, i2) = rates.integrals(t);
    if -i1 / t >= 0.0 {
        Ok((i2 - i1 * i1 / t).max(0.0))
    } else {
        Ok(i2)
    }
}

/// The nonnegative volatility at which the minimum is attained.
pub fn bs2sr_min_vol(rates: &RatePart<'_>, t: f64) -> f64 {
    let (i1, _) = rates.integrals(t);
    (-i1 / t).max(0.0)
}

/// Solve `bs2sr_tiv = target` for the flat volatility. Returns `None`
/// when the target variance lies below the model's attainable minimum
/// (no real, nonnegative volatility exists).
pub fn bs2sr_solve_vol(target: f64, rates: &RatePart<'_>, t: f64) -> Result<Option<f64>> {
    if !(t > 0.0) || target < 0.0 {
        return Err(Error::Invalid("bs2sr_solve_vol needs T > 0 and target >= 0".into()));
    }
    let (i1, i2) = rates.integrals(t);
    let disc = i1 * i1 - t * (i2 - target);
    if disc < 0.0 {
        return Ok(None);
    }
    let sq = disc.sqrt();
    // Larger root, on the increasing branch of the quadratic; rationalized
    // form when i1 > 0 avoids cancellation.
    let s = if i1 > 0.0 { (target - i2) / (i1 + sq) } else { (-i1 + sq) / t };
    if s < -1e-12 {
        return Ok(None);
    }
    Ok(Some(s.max(0.0)))
}
