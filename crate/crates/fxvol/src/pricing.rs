//! Monte Carlo repricing harness: vanillas and up-and-out barrier calls
//! under any model variant, with standard errors, implied-vol recovery,
//! and market-comparison reports.
//!
//! All prices discount with the domestic bond: T-forward variants price
//! as `P^d(0,T) E^T[payoff]`, deterministic-rate variants as
//! `e^{-int r^d} E[payoff]`, which is the same number when rates are
//! read off the curve.

use crate::analytic::{bs_call_tiv, implied_vol};
use crate::error::{Error, Result};
use crate::market::{forward, TivSurface};
use crate::mc::{pair_mean_se, simulate, simulate_with_monitor, McConfig, ModelSpec, PathMonitor};

#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub price: f64,
    pub se: f64,
    pub n_pairs: usize,
}

/// Price a strip of calls expiring at `t` off one shared simulation.
/// Common paths across strikes make the price monotone in strike path by
/// path.
pub fn price_vanillas_mc(
    model: &ModelSpec,
    strikes: &[f64],
    t: f64,
    n_pairs: usize,
    max_dt: f64,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    check_horizon(model, t)?;
    let cfg = McConfig::new(n_pairs, max_dt, seed, vec![t])?;
    let bundle = simulate(model, &cfg)?;
    let df = model.dom_curve().df(t)?;
    let s = &bundle.slices[0].s;
    let mut out = Vec::with_capacity(strikes.len());
    for &k in strikes {
        let payoffs: Vec<f64> = s.iter().map(|&sp| df * (sp - k).max(0.0)).collect();
        let (price, se) = pair_mean_se(&payoffs);
        out.push(McEstimate { price, se, n_pairs });
    }
    Ok(out)
}

pub fn price_vanilla_mc(
    model: &ModelSpec,
    k: f64,
    t: f64,
    n_pairs: usize,
    max_dt: f64,
    seed: u64,
) -> Result<McEstimate> {
    Ok(price_vanillas_mc(model, &[k], t, n_pairs, max_dt, seed)?[0])
}

fn check_horizon(model: &ModelSpec, t: f64) -> Result<()> {
    if let Some(h) = model.horizon() {
        if (h - t).abs() > 1e-12 {
            return Err(Error::Invalid(format!(
                "T-forward variant must be simulated with horizon exactly T: horizon {h}, T {t}"
            )));
        }
    }
    Ok(())
}

/// Barrier knockout monitoring scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierMonitoring {
    /// Knock out only when a simulated point breaches the barrier.
    Discrete,
    /// Additionally weight each step by the Brownian-bridge survival
    /// probability using the log-diffusion level at the step start.
    Bridge,
}

struct UpOutMonitor {
    barrier: f64,
    monitoring: BarrierMonitoring,
    strike: f64,
}

impl PathMonitor for UpOutMonitor {
    /// Survival weight in [0, 1].
    type Acc = f64;

    fn start(&self) -> f64 {
        1.0
    }

    #[inline]
    fn on_step(&self, alive: &mut f64, t0: f64, t1: f64, s0: f64, s1: f64, sig: f64) {
        if *alive == 0.0 {
            return;
        }
        if s0 >= self.barrier || s1 >= self.barrier {
            *alive = 0.0;
            return;
        }
        if self.monitoring == BarrierMonitoring::Bridge && sig > 0.0 {
            let dt = t1 - t0;
            let a = (self.barrier / s0).ln();
            let b = (self.barrier / s1).ln();
            *alive *= 1.0 - (-2.0 * a * b / (sig * sig * dt)).exp();
        }
    }

    fn finish(&self, alive: f64, s_terminal: f64) -> f64 {
        alive * (s_terminal - self.strike).max(0.0)
    }
}

/// Up-and-out barrier call. A barrier at or below spot is already knocked
/// and prices to zero with zero error.
#[allow(clippy::too_many_arguments)]
pub fn price_barrier_uo_mc(
    model: &ModelSpec,
    k: f64,
    barrier: f64,
    t: f64,
    n_pairs: usize,
    max_dt: f64,
    seed: u64,
    monitoring: BarrierMonitoring,
) -> Result<McEstimate> {
    if barrier <= model.spot() {
        return Ok(McEstimate { price: 0.0, se: 0.0, n_pairs });
    }
    check_horizon(model, t)?;
    let cfg = McConfig::new(n_pairs, max_dt, seed, vec![t])?;
    let monitor = UpOutMonitor { barrier, monitoring, strike: k };
    let raw = simulate_with_monitor(model, &cfg, &monitor)?;
    let df = model.dom_curve().df(t)?;
    let payoffs: Vec<f64> = raw.iter().map(|v| df * v).collect();
    let (price, se) = pair_mean_se(&payoffs);
    Ok(McEstimate { price, se, n_pairs })
}

/// One row of the repricing comparison report.
#[derive(Debug, Clone)]
pub struct ReportRecord {
    pub t: f64,
    pub strike: f64,
    pub mc_price: f64,
    pub mc_se: f64,
    pub bs_price: f64,
    pub diff: f64,
    /// Implied vol recovered from the MC price; None when the price falls
    /// outside the invertible band.
    pub iv_mc: Option<f64>,
    /// Implied vols at price -/+ 2 MC errors.
    pub iv_lo: Option<f64>,
    pub iv_hi: Option<f64>,
}

/// Reprice a strike-by-maturity grid and compare against the market
/// surface. T-forward models are re-anchored to each maturity; implied
/// vols use market-curve forwards.
#[allow(clippy::too_many_arguments)]
pub fn reprice_report(
    model: &ModelSpec,
    maturities: &[f64],
    strikes_per_maturity: usize,
    stdev_span: f64,
    tiv: &TivSurface,
    n_pairs: usize,
    max_dt: f64,
    seed: u64,
) -> Result<Vec<ReportRecord>> {
    let dom = model.dom_curve().clone();
    let fgn = model.fgn_curve().clone();
    let spot = model.spot();
    let mut records = Vec::with_capacity(maturities.len() * strikes_per_maturity);
    for (mi, &t) in maturities.iter().enumerate() {
        let strikes = crate::dupire::strike_grid(tiv, t, strikes_per_maturity, stdev_span)?;
        let model_t = model.with_horizon(t);
        let estimates =
            price_vanillas_mc(&model_t, &strikes, t, n_pairs, max_dt, seed.wrapping_add(mi as u64))?;
        let f_mkt = forward(spot, &dom, &fgn, t)?;
        let df = dom.df(t)?;
        for (k, est) in strikes.iter().zip(&estimates) {
            let y = (k / f_mkt).ln();
            let p = tiv.eval(y, t)?;
            let bs = bs_call_tiv(t, y, p.w, p.dw_dy, p.dw_dt, &dom, &fgn, spot)?.price;
            let invert = |price: f64| implied_vol(price, f_mkt, *k, t, df).ok();
            records.push(ReportRecord {
                t,
                strike: *k,
                mc_price: est.price,
                mc_se: est.se,
                bs_price: bs,
                diff: est.price - bs,
                iv_mc: invert(est.price),
                iv_lo: invert(est.price - 2.0 * est.se),
                iv_hi: invert(est.price + 2.0 * est.se),
            });
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{black_call, bs_barrier_up_out};
    use crate::market::{flat_quote_grid, DiscountCurve, TivGridSpec};
    use crate::mc::{CorrelationSpec, Driver::*};
    use crate::rates::{G1ppParams, G1ppSpec};
    use crate::surface::{SliceSurface, SurfaceKind};

    fn g1pp(rate: f64, sigma: f64, horizon: f64) -> G1ppParams {
        G1ppSpec::constant(0.01, sigma).fit_shift(&DiscountCurve::flat(rate, horizon)).unwrap()
    }

    fn lv_model(sigma_lv: f64, sig_rates: f64, horizon: f64) -> ModelSpec {
        ModelSpec::Lv2srTfwd {
            spot: 1.1,
            dom: g1pp(0.02, sig_rates, horizon + 1.0),
            fgn: g1pp(0.01, sig_rates, horizon + 1.0),
            local_vol: SliceSurface::constant(SurfaceKind::LocalVol, sigma_lv),
            corr: CorrelationSpec::from_pairs(
                &[Spot, DomRate, FgnRate],
                &[(Spot, DomRate, 0.15), (Spot, FgnRate, 0.3), (DomRate, FgnRate, 0.2)],
            )
            .unwrap(),
            horizon,
        }
    }

    #[test]
    fn zero_vol_is_deterministic() {
        let model = lv_model(0.0, 0.0, 1.0);
        let est = price_vanilla_mc(&model, 1.0, 1.0, 200, 0.005, 1).unwrap();
        assert_eq!(est.se, 0.0);
        let f = forward(1.1, model.dom_curve(), model.fgn_curve(), 1.0).unwrap();
        let expected = model.dom_curve().df(1.0).unwrap() * (f - 1.0f64).max(0.0);
        assert!((est.price - expected).abs() < 1e-5, "{} vs {expected}", est.price);
    }

    #[test]
    fn gbm_limit_reprices_black_scholes() {
        let model = lv_model(0.2, 0.0, 1.0);
        let f = forward(1.1, model.dom_curve(), model.fgn_curve(), 1.0).unwrap();
        let df = model.dom_curve().df(1.0).unwrap();
        for k in [1.0, 1.1, 1.25] {
            let est = price_vanilla_mc(&model, k, 1.0, 50_000, 0.01, 5).unwrap();
            let bs = black_call(f, k, 0.2, 1.0, df);
            assert!(
                (est.price - bs).abs() < 3.0 * est.se,
                "K={k}: {} vs {bs} (se {})",
                est.price,
                est.se
            );
        }
    }

    #[test]
    fn horizon_mismatch_rejected() {
        let model = lv_model(0.2, 0.01, 2.0);
        assert!(price_vanilla_mc(&model, 1.0, 1.0, 100, 0.05, 1).is_err());
    }

    #[test]
    fn vanilla_monotone_in_strike_on_common_paths() {
        let model = lv_model(0.2, 0.012, 1.0);
        let strikes = [0.8, 0.95, 1.1, 1.25, 1.4];
        let ests = price_vanillas_mc(&model, &strikes, 1.0, 5000, 0.02, 17).unwrap();
        for w in ests.windows(2) {
            assert!(w[1].price <= w[0].price + 1e-15, "{} > {}", w[1].price, w[0].price);
        }
    }

    #[test]
    fn barrier_at_or_below_spot_is_zero() {
        let model = lv_model(0.2, 0.0, 1.0);
        let est = price_barrier_uo_mc(
            &model,
            1.0,
            1.4,
            1.0,
            2000,
            0.02,
            1,
            BarrierMonitoring::Bridge,
        )
        .unwrap();
        assert!(est.price > 0.0);
        // Barrier at spot: already knocked.
        let knocked = price_barrier_uo_mc(
            &model,
            1.0,
            1.1,
            1.0,
            100,
            0.05,
            1,
            BarrierMonitoring::Discrete,
        )
        .unwrap();
        assert_eq!((knocked.price, knocked.se), (0.0, 0.0));
    }

    #[test]
    fn far_barrier_equals_vanilla_exactly() {
        let model = lv_model(0.2, 0.012, 1.0);
        let (n, dt, seed) = (4000, 0.02, 23);
        let vanilla = price_vanilla_mc(&model, 1.1, 1.0, n, dt, seed).unwrap();
        for monitoring in [BarrierMonitoring::Discrete, BarrierMonitoring::Bridge] {
            let uo =
                price_barrier_uo_mc(&model, 1.1, 1e6, 1.0, n, dt, seed, monitoring).unwrap();
            assert_eq!(uo.price, vanilla.price, "{monitoring:?}");
            assert_eq!(uo.se, vanilla.se);
        }
    }

    #[test]
    fn barrier_below_vanilla_on_common_paths() {
        let model = lv_model(0.2, 0.012, 1.0);
        let (n, dt, seed) = (5000, 0.02, 29);
        let vanilla = price_vanilla_mc(&model, 1.1, 1.0, n, dt, seed).unwrap();
        let uo = price_barrier_uo_mc(
            &model,
            1.1,
            1.3,
            1.0,
            n,
            dt,
            seed,
            BarrierMonitoring::Bridge,
        )
        .unwrap();
        assert!(uo.price < vanilla.price);
    }

    #[test]
    fn bridge_barrier_matches_analytic_black_scholes() {
        // BS2SR with zero rate vols is flat-vol GBM; bridge monitoring
        // removes the discrete-monitoring bias.
        let curve_d = DiscountCurve::flat(0.015, 2.0);
        let curve_f = DiscountCurve::flat(0.005, 2.0);
        let model = ModelSpec::Bs2srTfwd {
            spot: 1.0,
            sigma_s: 0.2,
            dom: G1ppSpec::constant(0.01, 0.0).fit_shift(&curve_d).unwrap(),
            fgn: G1ppSpec::constant(0.01, 0.0).fit_shift(&curve_f).unwrap(),
            corr: CorrelationSpec::identity(&[Spot, DomRate, FgnRate]),
            horizon: 1.0,
        };
        let (k, b, t) = (1.0, 1.2, 1.0);
        let est = price_barrier_uo_mc(
            &model,
            k,
            b,
            t,
            100_000,
            0.005,
            41,
            BarrierMonitoring::Bridge,
        )
        .unwrap();
        let analytic = bs_barrier_up_out(1.0, k, b, 0.2, 0.015, 0.005, t);
        assert!(
            (est.price - analytic).abs() < 3.0 * est.se + 1e-4,
            "bridge {} vs analytic {analytic} (se {})",
            est.price,
            est.se
        );
        // Discrete monitoring at coarse steps overprices (misses crossings).
        let discrete = price_barrier_uo_mc(
            &model,
            k,
            b,
            t,
            100_000,
            0.02,
            41,
            BarrierMonitoring::Discrete,
        )
        .unwrap();
        assert!(discrete.price > est.price);
    }

    #[test]
    fn se_scaling_with_paths() {
        let model = lv_model(0.2, 0.012, 1.0);
        let e1 = price_vanilla_mc(&model, 1.1, 1.0, 10_000, 0.02, 31).unwrap();
        let e2 = price_vanilla_mc(&model, 1.1, 1.0, 40_000, 0.02, 31).unwrap();
        let ratio = e1.se / e2.se;
        assert!((ratio - 2.0).abs() < 0.4, "SE ratio {ratio}");
    }

    #[test]
    fn report_on_degenerate_market() {
        let dom = DiscountCurve::flat(0.02, 3.0);
        let fgn = DiscountCurve::flat(0.01, 3.0);
        let spot = 1.1;
        let quotes = flat_quote_grid(0.2, &dom, &fgn, spot, &[0.5, 1.0, 2.0], 11, 3.0);
        let spec = TivGridSpec { slice_spacing: 0.25, points_per_slice: 40, stdev_span: 3.4 };
        let tiv = TivSurface::build(&quotes, &dom, &fgn, spot, &spec).unwrap();
        let model = lv_model(0.2, 0.0, 1.0);
        let records =
            reprice_report(&model, &[0.5, 1.0], 9, 2.0, &tiv, 20_000, 0.005, 3).unwrap();
        assert_eq!(records.len(), 18);
        let mut contained = 0;
        for r in &records {
            assert!(r.diff.abs() < 3.0 * r.mc_se, "diff {} vs se {}", r.diff, r.mc_se);
            if let (Some(lo), Some(hi)) = (r.iv_lo, r.iv_hi) {
                if lo <= 0.2 && 0.2 <= hi {
                    contained += 1;
                }
            }
        }
        // +/- 2 SE bands cover ~95% per point; demand a clear majority on
        // this small grid (the acceptance suite tests the 90% criterion
        // at full scale).
        assert!(
            contained as f64 >= 0.8 * records.len() as f64,
            "{contained}/{} bands contain the market vol",
            records.len()
        );
    }
}
