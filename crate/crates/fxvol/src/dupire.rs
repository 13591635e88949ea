//! Dupire local-volatility calibration.
//!
//! Deterministic rates use the total-implied-variance form
//!
//! ```text
//! sigma_LV^2 = (dw/dT) / [1 - (y/w) w_y + 1/2 w_yy
//!              + 1/4 w_y^2 (-1/4 - 1/w + y^2/w^2)]
//! ```
//!
//! With stochastic rates the numerator becomes
//! `dC_BS/dT - P^d(0,T) E^T[(K r_T^d - S_T r_T^f) 1_{S_T > K}]` and the
//! denominator picks up dC_BS/dw; the expectation is estimated by Monte
//! Carlo under the T-forward measure, slice by slice in a bootstrap.

use crate::analytic::bs_call_tiv;
use crate::error::{Error, Result};
use crate::market::{TivPoint, TivSurface};
use crate::mc::{simulate, CorrelationSpec, McConfig, ModelSpec, SliceState};
use crate::rates::G1ppParams;
use crate::surface::{SliceSurface, SurfaceKind};

/// Monte Carlo estimate of the rate-coupling expectation at one strike.
#[derive(Debug, Clone, Copy)]
pub struct ExpectationEstimate {
    pub mean: f64,
    /// Standard error over antithetic pair means.
    pub se: f64,
    pub n_pairs: usize,
}

/// Local-vol calibration grid: one strike row per slice, log-uniform
/// around ATMF.
#[derive(Debug, Clone, Copy)]
pub struct LvGridSpec {
    pub slice_spacing: f64,
    pub n_strikes: usize,
    pub stdev_span: f64,
}

impl Default for LvGridSpec {
    fn default() -> Self {
        Self { slice_spacing: 0.05, n_strikes: 200, stdev_span: 3.0 }
    }
}

/// Strikes spanning `stdev_span` ATMF standard deviations, log-uniform
/// around the forward of the slice.
pub fn strike_grid(tiv: &TivSurface, t: f64, n_points: usize, stdev_span: f64) -> Result<Vec<f64>> {
    if n_points < 2 {
        return Err(Error::Invalid("strike grid needs >= 2 points".into()));
    }
    if t < tiv.first_slice_time() - 1e-12 {
        return Err(Error::BeforeFirstSlice(t, tiv.first_slice_time()));
    }
    let f_t = tiv.forward_at(t);
    let half = stdev_span * tiv.atmf_sigma(t) * t.sqrt();
    Ok((0..n_points)
        .map(|j| f_t * (-half + 2.0 * half * j as f64 / (n_points - 1) as f64).exp())
        .collect())
}

/// Dupire denominator bracket shared by the deterministic and
/// stochastic-rates forms.
fn denominator_bracket(y: f64, p: &TivPoint) -> f64 {
    let w = p.w;
    1.0 - (y / w) * p.dw_dy
        + 0.5 * p.d2w_dy2
        + 0.25 * p.dw_dy * p.dw_dy * (-0.25 - 1.0 / w + y * y / (w * w))
}

/// Deterministic-rates local volatility from an evaluated surface point.
pub fn dupire_det_from_point(y: f64, t: f64, p: &TivPoint) -> Result<f64> {
    let den = denominator_bracket(y, p);
    if den <= 0.0 {
        return Err(Error::NonPositiveDenominator { y, t });
    }
    if p.dw_dt <= 0.0 {
        return Err(Error::NonPositiveNumerator { y, t });
    }
    Ok((p.dw_dt / den).sqrt())
}

/// Deterministic-rates Dupire local volatility at (y, T).
pub fn local_vol_det_tiv(tiv: &TivSurface, y: f64, t: f64) -> Result<f64> {
    let p = tiv.eval(y, t)?;
    dupire_det_from_point(y, t, &p)
}

/// Call price surface with the partial derivatives the call-form Dupire
/// formula consumes.
pub trait CallPriceSurface {
    fn price(&self, k: f64, t: f64) -> Result<f64>;
    fn d_dt(&self, k: f64, t: f64) -> Result<f64>;
    fn d_dk(&self, k: f64, t: f64) -> Result<f64>;
    fn d2_dk2(&self, k: f64, t: f64) -> Result<f64>;
}

/// Central finite differences over any price function.
pub struct FiniteDiffCallSurface<F: Fn(f64, f64) -> Result<f64>> {
    price_fn: F,
    rel_dk: f64,
    dt: f64,
}

impl<F: Fn(f64, f64) -> Result<f64>> FiniteDiffCallSurface<F> {
    pub fn new(price_fn: F) -> Self {
        Self { price_fn, rel_dk: 1e-4, dt: 1e-4 }
    }
}

impl<F: Fn(f64, f64) -> Result<f64>> CallPriceSurface for FiniteDiffCallSurface<F> {
    fn price(&self, k: f64, t: f64) -> Result<f64> {
        (self.price_fn)(k, t)
    }
    fn d_dt(&self, k: f64, t: f64) -> Result<f64> {
        let h = self.dt;
        Ok(((self.price_fn)(k, t + h)? - (self.price_fn)(k, t - h)?) / (2.0 * h))
    }
    fn d_dk(&self, k: f64, t: f64) -> Result<f64> {
        let h = k * self.rel_dk;
        Ok(((self.price_fn)(k + h, t)? - (self.price_fn)(k - h, t)?) / (2.0 * h))
    }
    fn d2_dk2(&self, k: f64, t: f64) -> Result<f64> {
        let h = k * self.rel_dk;
        let c0 = (self.price_fn)(k, t)?;
        Ok(((self.price_fn)(k + h, t)? - 2.0 * c0 + (self.price_fn)(k - h, t)?) / (h * h))
    }
}

/// Deterministic-rates Dupire in call-price form:
/// `sigma^2 = [C_T + (r^d - r^f) K C_K + r^f C] / (K^2 C_KK / 2)`
/// with `r^i` the instantaneous forward rates at T.
pub fn local_vol_det_call<S: CallPriceSurface + ?Sized>(
    surface: &S,
    k: f64,
    t: f64,
    dom: &crate::market::DiscountCurve,
    fgn: &crate::market::DiscountCurve,
) -> Result<f64> {
    let r_d = dom.instantaneous_forward(t)?;
    let r_f = fgn.instantaneous_forward(t)?;
    let den = 0.5 * k * k * surface.d2_dk2(k, t)?;
    if den <= 0.0 {
        return Err(Error::NonPositiveDenominator { y: k.ln(), t });
    }
    let num = surface.d_dt(k, t)? + (r_d - r_f) * k * surface.d_dk(k, t)? + r_f * surface.price(k, t)?;
    if num <= 0.0 {
        return Err(Error::NonPositiveNumerator { y: k.ln(), t });
    }
    Ok((num / den).sqrt())
}

/// Sample mean and pair-mean standard error of
/// `(K r_T^d - S_T r_T^f) 1_{S_T > K}` over a captured slice.
pub fn stoch_rate_expectation(
    slice: &SliceState,
    k: f64,
    phi_dom: f64,
    phi_fgn: f64,
) -> Result<ExpectationEstimate> {
    let s = &slice.s;
    if s.is_empty() {
        return Err(Error::Invalid("empty slice".into()));
    }
    let xd = slice
        .x_dom
        .as_ref()
        .ok_or_else(|| Error::Invalid("slice lacks domestic rate factor".into()))?;
    let xf = slice
        .x_fgn
        .as_ref()
        .ok_or_else(|| Error::Invalid("slice lacks foreign rate factor".into()))?;
    let n = s.len() / 2;
    let payoff = |i: usize| -> f64 {
        if s[i] > k {
            let r_d = xd[i] + phi_dom;
            let r_f = xf[i] + phi_fgn;
            k * r_d - s[i] * r_f
        } else {
            0.0
        }
    };
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for p in 0..n {
        let m = 0.5 * (payoff(p) + payoff(n + p));
        sum += m;
        sum_sq += m * m;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let se = if n > 1 { (((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0) / nf).sqrt() } else { 0.0 };
    Ok(ExpectationEstimate { mean, se, n_pairs: n })
}

/// Stochastic-rates local volatility and its Monte Carlo error at (y, T).
///
/// A negative numerator means no real local volatility reproduces the
/// market at this point given the rate models and correlations.
pub fn local_vol_stoch(
    tiv: &TivSurface,
    y: f64,
    t: f64,
    estimate: &ExpectationEstimate,
    dom: &crate::market::DiscountCurve,
    fgn: &crate::market::DiscountCurve,
    spot: f64,
) -> Result<(f64, f64)> {
    let p = tiv.eval(y, t)?;
    let bracket = denominator_bracket(y, &p);
    if bracket <= 0.0 {
        return Err(Error::NonPositiveDenominator { y, t });
    }
    let call = bs_call_tiv(t, y, p.w, p.dw_dy, p.dw_dt, dom, fgn, spot)?;
    let den = call.d_dw * bracket;
    let pd = dom.df(t)?;
    let num = call.d_dt - pd * estimate.mean;
    if num <= 0.0 {
        return Err(Error::NoRealLocalVol {
            strike: tiv.forward_at(t) * y.exp(),
            t,
            numerator: num,
            noise: pd * estimate.se,
        });
    }
    let var = num / den;
    let sigma = var.sqrt();
    let err = (pd * estimate.se / (2.0 * sigma * den)).abs();
    Ok((sigma, err))
}

/// Calibration run summary.
#[derive(Debug, Clone, Default)]
pub struct LvDiagnostics {
    /// Points replaced by their nearest valid neighbor.
    pub flagged_points: usize,
    pub slices: usize,
}

/// Bootstrap LV2SR calibration.
///
/// Slice one is filled from the deterministic TIV formula (no simulation);
/// every later slice simulates the T-forward system with the surface built
/// so far and evaluates the stochastic-rates formula per strike. A
/// statistically significant negative numerator (beyond 3 MC errors)
/// aborts with the offending point; insignificant negatives are treated
/// like flagged points and filled from the nearest valid neighbor.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_lv2sr(
    tiv: &TivSurface,
    dom: &G1ppParams,
    fgn: &G1ppParams,
    corr: &CorrelationSpec,
    spot: f64,
    grid: &LvGridSpec,
    n_pairs: usize,
    max_dt: f64,
    seed: u64,
) -> Result<(SliceSurface, LvDiagnostics)> {
    if !(grid.slice_spacing > 0.0) || grid.n_strikes < 2 || !(grid.stdev_span > 0.0) {
        return Err(Error::Invalid("bad local-vol grid spec".into()));
    }
    let t_max = tiv.last_slice_time();
    let mut slice_times = Vec::new();
    let mut j = 1usize;
    loop {
        let t = grid.slice_spacing * j as f64;
        if t > t_max + 1e-9 {
            break;
        }
        slice_times.push(t);
        j += 1;
    }
    if slice_times.is_empty() {
        return Err(Error::Invalid("no calibration slices within surface horizon".into()));
    }

    let mut surface = SliceSurface::new(SurfaceKind::LocalVol);
    let mut diags = LvDiagnostics { flagged_points: 0, slices: slice_times.len() };

    for (si, &t) in slice_times.iter().enumerate() {
        let strikes = strike_grid(tiv, t, grid.n_strikes, grid.stdev_span)?;
        let f_t = tiv.forward_at(t);
        let mut points: Vec<Option<(f64, f64)>> = vec![None; strikes.len()];

        if si == 0 {
            for (pi, k) in strikes.iter().enumerate() {
                let y = (k / f_t).ln();
                match local_vol_det_tiv(tiv, y, t) {
                    Ok(v) => points[pi] = Some((v, 0.0)),
                    Err(
                        Error::NonPositiveDenominator { .. } | Error::NonPositiveNumerator { .. },
                    ) => {}
                    Err(e) => return Err(e),
                }
            }
        } else {
            let model = ModelSpec::Lv2srTfwd {
                spot,
                dom: dom.clone(),
                fgn: fgn.clone(),
                local_vol: surface.clone(),
                corr: corr.clone(),
                horizon: t,
            };
            let cfg = McConfig::new(n_pairs, max_dt, seed.wrapping_add(si as u64), vec![t])?;
            let bundle = simulate(&model, &cfg)?;
            let slice = &bundle.slices[0];
            let phi_d = dom.phi(t)?;
            let phi_f = fgn.phi(t)?;
            for (pi, k) in strikes.iter().enumerate() {
                let y = (k / f_t).ln();
                let est = stoch_rate_expectation(slice, *k, phi_d, phi_f)?;
                match local_vol_stoch(tiv, y, t, &est, dom.curve(), fgn.curve(), spot) {
                    Ok(v) => points[pi] = Some(v),
                    Err(Error::NoRealLocalVol { strike, t, numerator, noise }) => {
                        if numerator < -3.0 * noise {
                            return Err(Error::NoRealLocalVol { strike, t, numerator, noise });
                        }
                    }
                    Err(
                        Error::NonPositiveDenominator { .. } | Error::NonPositiveNumerator { .. },
                    ) => {}
                    Err(e) => return Err(e),
                }
            }
        }

        let (values, errors, flagged) = fill_flagged(&points, t)?;
        diags.flagged_points += flagged;
        surface.push_slice(t, strikes, values, Some(errors))?;
    }

    Ok((surface, diags))
}

/// Replace flagged (None) points with the nearest valid neighbor in the
/// slice; error if nothing in the slice is valid.
fn fill_flagged(points: &[Option<(f64, f64)>], t: f64) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let n = points.len();
    let valid: Vec<usize> = (0..n).filter(|&i| points[i].is_some()).collect();
    if valid.is_empty() {
        return Err(Error::Invalid(format!("all {n} local-vol points flagged at T={t}")));
    }
    let mut values = Vec::with_capacity(n);
    let mut errors = Vec::with_capacity(n);
    let mut flagged = 0;
    for i in 0..n {
        match points[i] {
            Some((v, e)) => {
                values.push(v);
                errors.push(e);
            }
            None => {
                flagged += 1;
                let nearest = *valid
                    .iter()
                    .min_by_key(|&&vi| (vi as isize - i as isize).unsigned_abs())
                    .unwrap();
                let (v, e) = points[nearest].unwrap();
                values.push(v);
                errors.push(e);
            }
        }
    }
    Ok((values, errors, flagged))
}
