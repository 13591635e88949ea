//! Heston variance model with piecewise-constant parameters: the
//! semi-analytic characteristic-function pricer and the slice-by-slice
//! bootstrap calibration to near-ATMF quotes.
//!
//! The characteristic function is composed backward across constant-
//! parameter intervals: each interval solves its Riccati system in closed
//! form with the next interval's terminal value as initial condition.
//! Deterministic rates are folded into the forward.

use num_complex::Complex64;

use crate::analytic::bs_call_tiv;
use crate::error::{Error, Result};
use crate::market::{forward, DiscountCurve, TivSurface};
use crate::math::GaussLegendre;
use crate::optim::{nelder_mead, SimplexConfig};

/// Piecewise-constant Heston parameters. `times` are ascending slice end
/// times: slice `i` covers `[times[i-1], times[i])` (with an implicit 0
/// start) and the last slice extends beyond its end time.
#[derive(Debug, Clone, PartialEq)]
pub struct HestonParams {
    pub u0: f64,
    pub rho: f64,
    pub times: Vec<f64>,
    pub kappa: Vec<f64>,
    pub theta: Vec<f64>,
    pub xi: Vec<f64>,
}

impl HestonParams {
    pub fn constant(u0: f64, rho: f64, kappa: f64, theta: f64, xi: f64) -> Self {
        Self {
            u0,
            rho,
            times: vec![1.0],
            kappa: vec![kappa],
            theta: vec![theta],
            xi: vec![xi],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if n == 0 || self.kappa.len() != n || self.theta.len() != n || self.xi.len() != n {
            return Err(Error::Invalid("heston: slice arrays must be nonempty and equal".into()));
        }
        for w in self.times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Invalid("heston: slice times must be increasing".into()));
            }
        }
        if !(self.u0 > 0.0) {
            return Err(Error::Invalid("heston: U0 must be positive".into()));
        }
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return Err(Error::Invalid("heston: rho must lie in (-1, 1)".into()));
        }
        for i in 0..n {
            if !(self.kappa[i] > 0.0 && self.theta[i] > 0.0 && self.xi[i] > 0.0) {
                return Err(Error::Invalid("heston: kappa, theta, xi must be positive".into()));
            }
        }
        Ok(())
    }

    fn segment_index(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).min(self.times.len() - 1)
    }

    /// (kappa, theta, xi) governing time `t`.
    pub fn at(&self, t: f64) -> (f64, f64, f64) {
        let i = self.segment_index(t);
        (self.kappa[i], self.theta[i], self.xi[i])
    }

    /// Strict Feller condition 2 kappa theta > xi^2 on every slice.
    pub fn feller_ok(&self) -> bool {
        (0..self.times.len()).all(|i| 2.0 * self.kappa[i] * self.theta[i] > self.xi[i] * self.xi[i])
    }

    /// Constant-parameter segments of `[0, t]`: (start, end, slice index).
    fn segments_to(&self, t: f64) -> Vec<(f64, f64, usize)> {
        let mut bounds = vec![0.0];
        bounds.extend(self.times.iter().copied().filter(|&s| s > 0.0 && s < t));
        bounds.push(t);
        bounds
            .windows(2)
            .map(|w| (w[0], w[1], self.segment_index(w[0])))
            .collect()
    }
}

/// exp(C + D U0) for E[exp(z X_T)] with X = log(S_T / F_T), composed
/// backward over constant-parameter intervals.
fn cf(params: &HestonParams, z: Complex64, t: f64) -> Complex64 {
    let alpha = 0.5 * (z * z - z);
    let mut d = Complex64::new(0.0, 0.0);
    let mut c = Complex64::new(0.0, 0.0);
    for &(a, b, idx) in params.segments_to(t).iter().rev() {
        let tau = b - a;
        let (kappa, theta, xi) = (params.kappa[idx], params.theta[idx], params.xi[idx]);
        let beta = kappa - params.rho * xi * z;
        if xi < 1e-8 {
            // Linear Riccati limit: dD/dtau = alpha - beta D.
            let r_inf = alpha / beta;
            let decay = (-beta * tau).exp();
            let int_d = r_inf * tau + (d - r_inf) * (1.0 - decay) / beta;
            c += kappa * theta * int_d;
            d = r_inf + (d - r_inf) * decay;
        } else {
            let gamma = 0.5 * xi * xi;
            let mut disc = (beta * beta - 4.0 * alpha * gamma).sqrt();
            if disc.re < 0.0 {
                disc = -disc;
            }
            let r_minus = (beta - disc) / (2.0 * gamma);
            let r_plus = (beta + disc) / (2.0 * gamma);
            let g = (d - r_minus) / (d - r_plus);
            let e = (-disc * tau).exp();
            let one_ge = 1.0 - g * e;
            let int_d = r_minus * tau - (one_ge / (1.0 - g)).ln() / gamma;
            c += kappa * theta * int_d;
            d = (r_minus - r_plus * g * e) / one_ge;
        }
    }
    (c + d * params.u0).exp()
}

/// Gil-Pelaez probability $\frac12 + \frac1\pi \int_0^\infty
/// \mathrm{Re}[e^{iux} \varphi(u) / (iu)] du$ by panel Gauss-Legendre.
fn gil_pelaez(params: &HestonParams, z_shift: f64, x: f64, t: f64) -> Result<f64> {
    let gl = GaussLegendre::new(32);
    let integrand = |u: f64| -> f64 {
        let phi = cf(params, Complex64::new(z_shift, u), t);
        let rot = Complex64::new(0.0, u * x).exp();
        (rot * phi / Complex64::new(0.0, u)).re
    };
    let width = 4.0;
    let mut acc = 0.0;
    let mut converged = false;
    for p in 0..500 {
        let a = width * p as f64;
        let panel = gl.integrate(a, a + width, integrand);
        acc += panel;
        if a >= 24.0 && panel.abs() < 1e-13 * (1.0 + acc.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::QuadratureFailure(format!(
            "characteristic-function integral not decayed by u=2000 (x={x}, t={t})"
        )));
    }
    Ok(0.5 + acc / std::f64::consts::PI)
}

fn probabilities(params: &HestonParams, f: f64, k: f64, t: f64) -> Result<(f64, f64)> {
    let x = (f / k).ln();
    // P1 uses the measure shift z = 1 + iu (E[e^X] = 1 by construction).
    let p1 = gil_pelaez(params, 1.0, x, t)?;
    let p2 = gil_pelaez(params, 0.0, x, t)?;
    Ok((p1.clamp(0.0, 1.0), p2.clamp(0.0, 1.0)))
}

/// Semi-analytic call price under piecewise-constant Heston with
/// deterministic rates folded into the forward.
pub fn heston_call_cf(
    params: &HestonParams,
    dom: &DiscountCurve,
    fgn: &DiscountCurve,
    spot: f64,
    k: f64,
    t: f64,
) -> Result<f64> {
    params.validate()?;
    if !(t > 0.0 && k > 0.0 && spot > 0.0) {
        return Err(Error::Invalid("heston price needs positive t, k, spot".into()));
    }
    let f = forward(spot, dom, fgn, t)?;
    let df = dom.df(t)?;
    let (p1, p2) = probabilities(params, f, k, t)?;
    Ok(df * (f * p1 - k * p2))
}

/// Put from the complementary probabilities.
pub fn heston_put_cf(
    params: &HestonParams,
    dom: &DiscountCurve,
    fgn: &DiscountCurve,
    spot: f64,
    k: f64,
    t: f64,
) -> Result<f64> {
    params.validate()?;
    let f = forward(spot, dom, fgn, t)?;
    let df = dom.df(t)?;
    let (p1, p2) = probabilities(params, f, k, t)?;
    Ok(df * (k * (1.0 - p2) - f * (1.0 - p1)))
}

/// Calibration output: fitted parameters plus per-slice RMS price error.
#[derive(Debug, Clone)]
pub struct HestonCalibration {
    pub params: HestonParams,
    pub slice_rms: Vec<f64>,
}

/// Near-ATMF quote grid for one slice: strikes log-uniform over
/// `stdev_span` ATMF standard deviations and their market call prices.
fn slice_market(
    tiv: &TivSurface,
    dom: &DiscountCurve,
    fgn: &DiscountCurve,
    spot: f64,
    t: f64,
    n_strikes: usize,
    stdev_span: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let f_t = forward(spot, dom, fgn, t)?;
    let half = stdev_span * tiv.atmf_sigma(t) * t.sqrt();
    let mut strikes = Vec::with_capacity(n_strikes);
    let mut prices = Vec::with_capacity(n_strikes);
    for j in 0..n_strikes {
        let y = -half + 2.0 * half * j as f64 / (n_strikes - 1) as f64;
        let k = f_t * y.exp();
        let p = tiv.eval(y, t)?;
        let c = bs_call_tiv(t, y, p.w, p.dw_dy, p.dw_dt, dom, fgn, spot)?;
        strikes.push(k);
        prices.push(c.price);
    }
    Ok((strikes, prices))
}

fn feller_penalty(kappa: f64, theta: f64, xi: f64, weight: f64) -> f64 {
    let viol = (xi * xi - 2.0 * kappa * theta).max(0.0);
    weight * viol * viol
}

/// Bootstrap Heston calibration: slice one solves all five parameters,
/// later slices solve (kappa, theta, xi) with earlier slices frozen.
/// Positivity via log-reparametrization, rho via tanh, Feller via penalty
/// with a hard clamp afterwards.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_heston(
    tiv: &TivSurface,
    dom: &DiscountCurve,
    fgn: &DiscountCurve,
    spot: f64,
    slice_times: &[f64],
    n_strikes: usize,
    stdev_span: f64,
    cfg: &SimplexConfig,
) -> Result<HestonCalibration> {
    if slice_times.is_empty() || n_strikes < 3 {
        return Err(Error::Invalid("heston calibration needs slices and >= 3 strikes".into()));
    }
    for w in slice_times.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Invalid("slice times must be increasing".into()));
        }
    }
    if slice_times[0] <= 0.0 {
        return Err(Error::Invalid("slice times must be positive".into()));
    }

    let markets: Vec<(Vec<f64>, Vec<f64>)> = slice_times
        .iter()
        .map(|&t| slice_market(tiv, dom, fgn, spot, t, n_strikes, stdev_span))
        .collect::<Result<_>>()?;

    let sigma_atm0 = tiv.atmf_sigma(slice_times[0]);
    let var0 = sigma_atm0 * sigma_atm0;

    let mut params = HestonParams {
        u0: var0,
        rho: -0.3,
        times: Vec::new(),
        kappa: Vec::new(),
        theta: Vec::new(),
        xi: Vec::new(),
    };
    let mut slice_rms = Vec::with_capacity(slice_times.len());

    for (i, &t) in slice_times.iter().enumerate() {
        let (strikes, target) = &markets[i];
        let sse = |p: &HestonParams| -> f64 {
            let mut acc = 0.0;
            for (k, c_mkt) in strikes.iter().zip(target) {
                match heston_call_cf(p, dom, fgn, spot, *k, t) {
                    Ok(c) => acc += (c - c_mkt) * (c - c_mkt),
                    Err(_) => return f64::NAN,
                }
            }
            acc
        };

        if i == 0 {
            // Five parameters: [ln kappa, ln theta, ln xi, atanh rho, ln U0].
            let objective = |x: &[f64]| -> f64 {
                let (kappa, theta, xi) = (x[0].exp(), x[1].exp(), x[2].exp());
                let rho = x[3].tanh();
                let u0 = x[4].exp();
                let cand = HestonParams {
                    u0,
                    rho,
                    times: vec![t],
                    kappa: vec![kappa],
                    theta: vec![theta],
                    xi: vec![xi],
                };
                sse(&cand) + feller_penalty(kappa, theta, xi, cfg.feller_weight)
            };
            let xi0 = 0.5 * (2.0f64 * var0).sqrt();
            let mut best: Option<crate::optim::SimplexResult> = None;
            for rho0 in [-0.3f64, 0.3] {
                let x0 = [0.0, var0.ln(), xi0.ln(), rho0.atanh(), var0.ln()];
                let res = nelder_mead(objective, &x0, cfg);
                if best.as_ref().is_none_or(|b| res.value < b.value) {
                    best = Some(res);
                }
            }
            let res = best.unwrap();
            let (mut kappa, theta, mut xi) =
                (res.x[0].exp(), res.x[1].exp(), res.x[2].exp());
            params.rho = res.x[3].tanh();
            params.u0 = res.x[4].exp();
            enforce_feller(&mut kappa, theta, &mut xi);
            params.times.push(t);
            params.kappa.push(kappa);
            params.theta.push(theta);
            params.xi.push(xi);
        } else {
            let base = params.clone();
            let objective = |x: &[f64]| -> f64 {
                let (kappa, theta, xi) = (x[0].exp(), x[1].exp(), x[2].exp());
                let mut cand = base.clone();
                cand.times.push(t);
                cand.kappa.push(kappa);
                cand.theta.push(theta);
                cand.xi.push(xi);
                sse(&cand) + feller_penalty(kappa, theta, xi, cfg.feller_weight)
            };
            let j = params.times.len() - 1;
            let x0 = [params.kappa[j].ln(), params.theta[j].ln(), params.xi[j].ln()];
            let res = nelder_mead(objective, &x0, cfg);
            let (mut kappa, theta, mut xi) = (res.x[0].exp(), res.x[1].exp(), res.x[2].exp());
            enforce_feller(&mut kappa, theta, &mut xi);
            params.times.push(t);
            params.kappa.push(kappa);
            params.theta.push(theta);
            params.xi.push(xi);
        }

        let rms = (sse(&params) / strikes.len() as f64).sqrt();
        slice_rms.push(rms);
    }

    debug_assert!(params.feller_ok());
    Ok(HestonCalibration { params, slice_rms })
}

/// Strict Feller by construction: shrink xi (and nudge kappa if xi was
/// already tiny) until 2 kappa theta > xi^2.
fn enforce_feller(kappa: &mut f64, theta: f64, xi: &mut f64) {
    let ceiling = (2.0 * *kappa * theta).sqrt();
    if *xi >= ceiling {
        *xi = 0.999 * ceiling;
    }
    if *xi <= 0.0 {
        *xi = 1e-6;
        if 2.0 * *kappa * theta <= *xi * *xi {
            *kappa = *xi * *xi / theta;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::black_call;
    use crate::market::SmileSpec;
    use crate::market::TivGridSpec;
    use crate::math::inv_norm_cdf;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat(rate: f64) -> DiscountCurve {
        DiscountCurve::flat(rate, 12.0)
    }

    #[test]
    fn degenerate_vol_of_vol_is_black_scholes() {
        let params = HestonParams::constant(0.04, -0.5, 1.5, 0.04, 1e-9);
        let dom = flat(0.02);
        let fgn = flat(0.01);
        let (spot, t) = (1.1, 2.0);
        let f = forward(spot, &dom, &fgn, t).unwrap();
        for k in [0.9 * f, f, 1.15 * f] {
            let heston = heston_call_cf(&params, &dom, &fgn, spot, k, t).unwrap();
            let bs = black_call(f, k, 0.2, t, dom.df(t).unwrap());
            assert!((heston - bs).abs() < 1e-6, "K={k}: {heston} vs {bs}");
        }
    }

    #[test]
    fn merged_intervals_price_identically() {
        let split = HestonParams {
            u0: 0.05,
            rho: -0.4,
            times: vec![0.5, 1.0, 2.0],
            kappa: vec![1.2, 1.2, 0.8],
            theta: vec![0.05, 0.05, 0.06],
            xi: vec![0.3, 0.3, 0.25],
        };
        let merged = HestonParams {
            u0: 0.05,
            rho: -0.4,
            times: vec![1.0, 2.0],
            kappa: vec![1.2, 0.8],
            theta: vec![0.05, 0.06],
            xi: vec![0.3, 0.25],
        };
        let dom = flat(0.015);
        let fgn = flat(0.005);
        for &(k, t) in &[(1.0, 0.75), (1.05, 1.5), (0.95, 2.0)] {
            let a = heston_call_cf(&split, &dom, &fgn, 1.0, k, t).unwrap();
            let b = heston_call_cf(&merged, &dom, &fgn, 1.0, k, t).unwrap();
            assert!((a - b).abs() < 1e-10, "(K={k},T={t}): {a} vs {b}");
        }
    }

    #[test]
    fn put_call_parity() {
        let params = HestonParams {
            u0: 0.04,
            rho: -0.6,
            times: vec![1.0, 3.0],
            kappa: vec![2.0, 1.0],
            theta: vec![0.04, 0.05],
            xi: vec![0.35, 0.3],
        };
        let dom = flat(0.02);
        let fgn = flat(0.035);
        let (spot, t) = (1.2, 2.5);
        let f = forward(spot, &dom, &fgn, t).unwrap();
        let df = dom.df(t).unwrap();
        for k in [0.8, 1.1, 1.4] {
            let c = heston_call_cf(&params, &dom, &fgn, spot, k, t).unwrap();
            let p = heston_put_cf(&params, &dom, &fgn, spot, k, t).unwrap();
            let lhs = c - p;
            let rhs = df * (f - k);
            assert!((lhs - rhs).abs() < 1e-10, "K={k}: {lhs} vs {rhs}");
        }
    }

    /// Full-truncation Euler Heston Monte Carlo, independent of the engine.
    fn heston_mc(
        params: &HestonParams,
        r_d: f64,
        r_f: f64,
        spot: f64,
        k: f64,
        t: f64,
        n_paths: usize,
        dt: f64,
        seed: u64,
    ) -> (f64, f64) {
        let n_steps = (t / dt).round() as usize;
        let h = t / n_steps as f64;
        let sqrt_h = h.sqrt();
        let rho = params.rho;
        let rho_perp = (1.0 - rho * rho).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut uniform = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n_paths {
            let mut s = spot;
            let mut v = params.u0;
            for step in 0..n_steps {
                let (kappa, theta, xi) = params.at(step as f64 * h);
                let z1 = inv_norm_cdf(uniform().max(1e-17));
                let z2 = inv_norm_cdf(uniform().max(1e-17));
                let zs = z1;
                let zv = rho * z1 + rho_perp * z2;
                let vp = v.max(0.0);
                s += (r_d - r_f) * s * h + vp.sqrt() * s * sqrt_h * zs;
                s = s.max(1e-12);
                v += kappa * (theta - vp) * h + xi * vp.sqrt() * sqrt_h * zv;
            }
            let pv = (-r_d * t).exp() * (s - k).max(0.0);
            sum += pv;
            sum_sq += pv * pv;
        }
        let n = n_paths as f64;
        let mean = sum / n;
        let se = (((sum_sq / n - mean * mean).max(0.0)) / n).sqrt();
        (mean, se)
    }

    #[test]
    fn cf_price_matches_monte_carlo() {
        let params = HestonParams::constant(0.04, -0.5, 1.5, 0.05, 0.3);
        let (r_d, r_f, spot, t) = (0.02, 0.01, 1.1, 1.0);
        let dom = flat(r_d);
        let fgn = flat(r_f);
        for k in [1.0, 1.12, 1.25] {
            let cf_price = heston_call_cf(&params, &dom, &fgn, spot, k, t).unwrap();
            let (mc, se) = heston_mc(&params, r_d, r_f, spot, k, t, 200_000, 0.002, 31);
            assert!(
                (cf_price - mc).abs() < 3.0 * se + 2e-4,
                "K={k}: cf {cf_price} vs mc {mc} (se {se})"
            );
        }
    }

    #[test]
    fn price_increases_with_initial_variance() {
        let dom = flat(0.0);
        let mut last = 0.0;
        for &u0 in &[0.01, 0.04, 0.09] {
            let params = HestonParams::constant(u0, -0.3, 1.5, u0, 0.2);
            let c = heston_call_cf(&params, &dom, &dom, 1.0, 1.0, 1.0).unwrap();
            assert!(c > last, "u0={u0}: {c} vs {last}");
            last = c;
        }
    }

    #[test]
    fn calibrates_flat_market_to_bs_prices() {
        let dom = flat(0.01);
        let fgn = flat(0.02);
        let spot = 1.3;
        let quotes = SmileSpec::flat(0.18).quote_grid(&dom, &fgn, spot, &[0.5, 1.0], 9, 2.5);
        let spec = TivGridSpec { slice_spacing: 0.25, points_per_slice: 30, stdev_span: 3.0 };
        let tiv = TivSurface::build(&quotes, &dom, &fgn, spot, &spec).unwrap();
        let cfg = SimplexConfig::default();
        let cal =
            calibrate_heston(&tiv, &dom, &fgn, spot, &[0.5, 1.0], 7, 1.0, &cfg).unwrap();
        assert!(cal.params.feller_ok());
        for &t in &[0.5, 1.0] {
            let f = forward(spot, &dom, &fgn, t).unwrap();
            let df = dom.df(t).unwrap();
            for k in [0.95 * f, f, 1.05 * f] {
                let model = heston_call_cf(&cal.params, &dom, &fgn, spot, k, t).unwrap();
                let bs = black_call(f, k, 0.18, t, df);
                assert!(
                    (model - bs).abs() < 1e-3 * bs.max(1e-4),
                    "T={t}, K={k}: {model} vs {bs}"
                );
            }
        }
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let dom = flat(0.01);
        let fgn = flat(0.0);
        let smile = SmileSpec { base: 0.2, skew: -0.02, curv: 0.04, eta: 0.25 };
        let quotes = smile.quote_grid(&dom, &fgn, 1.0, &[0.5, 1.0], 9, 2.5);
        let spec = TivGridSpec { slice_spacing: 0.25, points_per_slice: 30, stdev_span: 3.0 };
        let tiv = TivSurface::build(&quotes, &dom, &fgn, 1.0, &spec).unwrap();
        let cfg = SimplexConfig::default();
        let a = calibrate_heston(&tiv, &dom, &fgn, 1.0, &[0.5, 1.0], 7, 1.0, &cfg).unwrap();
        let b = calibrate_heston(&tiv, &dom, &fgn, 1.0, &[0.5, 1.0], 7, 1.0, &cfg).unwrap();
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn validates_parameters() {
        let mut p = HestonParams::constant(0.04, -0.3, 1.0, 0.04, 0.2);
        p.u0 = 0.0;
        assert!(p.validate().is_err());
        let mut p = HestonParams::constant(0.04, -0.3, 1.0, 0.04, 0.2);
        p.rho = 1.0;
        assert!(p.validate().is_err());
    }
}
