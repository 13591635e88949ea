//! Leverage function calibration for the stochastic local volatility
//! models, built on the relation `sigma_LV(K,t)^2 = L(K,t)^2 E[U_t | S_t = K]`.
//!
//! The conditional expectation is estimated from simulated paths either
//! by sorted binning or by least-squares regression on monomials; the
//! full model regresses on (S, x^d, x^f) under the T-forward measure.

use crate::error::{Error, Result};
use crate::heston::HestonParams;
use crate::market::DiscountCurve;
use crate::math::linalg::solve_spd;
use crate::mc::{simulate, CorrelationSpec, McConfig, ModelSpec};
use crate::rates::G1ppParams;
use crate::surface::{SliceSurface, SurfaceKind};

/// Conditional-mean estimator choice for E[U | S].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// Sort paths by spot, average within `bins` equal buckets, and
    /// interpolate the bucket means piecewise-linearly.
    Binning { bins: usize },
    /// Least squares on (1, S, S^2).
    Regression,
}

/// Piecewise-linear interpolant through bin means, flat beyond.
#[derive(Debug, Clone)]
pub struct BinningEstimator {
    s_nodes: Vec<f64>,
    u_means: Vec<f64>,
    /// Standard error of each bin mean.
    u_ses: Vec<f64>,
}

impl BinningEstimator {
    pub fn eval(&self, s: f64) -> f64 {
        interp_flat(&self.s_nodes, &self.u_means, s)
    }

    /// Standard error of the bin closest to `s`.
    pub fn se_at(&self, s: f64) -> f64 {
        let i = nearest_index(&self.s_nodes, s);
        self.u_ses[i]
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.s_nodes, &self.u_means)
    }
}

fn interp_flat(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let lam = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + lam * (ys[i + 1] - ys[i])
}

fn nearest_index(xs: &[f64], x: f64) -> usize {
    let mut best = 0;
    let mut dist = f64::INFINITY;
    for (i, &v) in xs.iter().enumerate() {
        let d = (v - x).abs();
        if d < dist {
            dist = d;
            best = i;
        }
    }
    best
}

/// Sort (S, U) pairs by S and average within `m` bins; the last bin
/// absorbs any remainder when `m` does not divide the path count.
pub fn binning_fit(s: &[f64], u: &[f64], m: usize) -> Result<BinningEstimator> {
    let n = s.len();
    if n != u.len() {
        return Err(Error::Invalid("binning needs equal-length S and U".into()));
    }
    if m < 2 || m > n {
        return Err(Error::Invalid(format!("bin count {m} incompatible with {n} paths")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap());
    let per = n / m;
    let mut s_nodes = Vec::with_capacity(m);
    let mut u_means = Vec::with_capacity(m);
    let mut u_ses = Vec::with_capacity(m);
    for j in 0..m {
        let lo = j * per;
        let hi = if j == m - 1 { n } else { lo + per };
        let count = (hi - lo) as f64;
        let mut sm = 0.0;
        let mut um = 0.0;
        let mut uq = 0.0;
        for &idx in &order[lo..hi] {
            sm += s[idx];
            um += u[idx];
            uq += u[idx] * u[idx];
        }
        sm /= count;
        um /= count;
        let var = (uq / count - um * um).max(0.0);
        s_nodes.push(sm);
        u_means.push(um);
        u_ses.push((var / count).sqrt());
    }
    Ok(BinningEstimator { s_nodes, u_means, u_ses })
}

/// Least-squares fit with column scaling and a ridge fallback on rank
/// deficiency. Predictions clamp to the observed U range.
#[derive(Debug, Clone)]
pub struct RegressionEstimator {
    /// Coefficients in the unscaled basis.
    coeffs: Vec<f64>,
    u_min: f64,
    u_max: f64,
}

impl RegressionEstimator {
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    fn raw_eval(&self, basis: &[f64]) -> f64 {
        basis.iter().zip(&self.coeffs).map(|(b, c)| b * c).sum()
    }

    fn eval_clamped(&self, basis: &[f64]) -> f64 {
        self.raw_eval(basis).clamp(self.u_min, self.u_max)
    }
}

fn least_squares(rows: &[Vec<f64>], targets: &[f64]) -> Result<RegressionEstimator> {
    let n = rows.len();
    let p = rows[0].len();
    if n < p {
        return Err(Error::Invalid(format!("{n} paths cannot fit {p} basis functions")));
    }
    // Column scaling keeps the normal equations well conditioned.
    let mut scales = vec![0.0f64; p];
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            scales[j] = scales[j].max(v.abs());
        }
    }
    for sc in scales.iter_mut() {
        if *sc == 0.0 {
            *sc = 1.0;
        }
    }
    let mut xtx = vec![0.0; p * p];
    let mut xty = vec![0.0; p];
    for (row, &y) in rows.iter().zip(targets) {
        for j in 0..p {
            let bj = row[j] / scales[j];
            xty[j] += bj * y;
            for l in 0..=j {
                xtx[j * p + l] += bj * row[l] / scales[l];
            }
        }
    }
    for j in 0..p {
        for l in j + 1..p {
            xtx[j * p + l] = xtx[l * p + j];
        }
    }
    let trace: f64 = (0..p).map(|j| xtx[j * p + j]).sum();
    let mut solution = solve_spd(&xtx, &xty, p, 1e-12 * trace.max(1e-300));
    if solution.is_err() {
        let mut ridge = 1e-10 * trace;
        for _ in 0..3 {
            let mut reg = xtx.clone();
            for j in 0..p {
                reg[j * p + j] += ridge;
            }
            solution = solve_spd(&reg, &xty, p, 0.0);
            if solution.is_ok() {
                break;
            }
            ridge *= 100.0;
        }
    }
    let scaled = solution.map_err(|_| Error::RankDeficient)?;
    let coeffs: Vec<f64> = scaled.iter().zip(&scales).map(|(c, s)| c / s).collect();
    let mut u_min = f64::INFINITY;
    let mut u_max = f64::NEG_INFINITY;
    for &y in targets {
        u_min = u_min.min(y);
        u_max = u_max.max(y);
    }
    Ok(RegressionEstimator { coeffs, u_min, u_max })
}

/// Regress U on (1, S, S^2).
pub fn regression_fit(s: &[f64], u: &[f64]) -> Result<RegressionEstimator> {
    if s.len() != u.len() || s.len() < 3 {
        return Err(Error::Invalid("regression needs >= 3 (S, U) pairs".into()));
    }
    let rows: Vec<Vec<f64>> = s.iter().map(|&x| vec![1.0, x, x * x]).collect();
    least_squares(&rows, u)
}

/// Regress U on (1, S, S^2, x^d, (x^d)^2, x^f, (x^f)^2). The rate factors
/// substitute for the short rates; the deterministic shifts fold into the
/// other coefficients.
pub fn regression_fit_3d(
    s: &[f64],
    x_dom: &[f64],
    x_fgn: &[f64],
    u: &[f64],
) -> Result<RegressionEstimator> {
    let n = s.len();
    if x_dom.len() != n || x_fgn.len() != n || u.len() != n || n < 7 {
        return Err(Error::Invalid("3-factor regression needs >= 7 aligned paths".into()));
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let (a, b, c) = (s[i], x_dom[i], x_fgn[i]);
            vec![1.0, a, a * a, b, b * b, c, c * c]
        })
        .collect();
    least_squares(&rows, u)
}

/// Fitted conditional-mean evaluator for one slice.
enum SliceEstimator {
    Bin(BinningEstimator),
    Reg(RegressionEstimator),
    Reg3 (RegressionEstimator),
}

impl SliceEstimator {
    fn eval_spot(&self, s: f64) -> f64 {
        match self {
            SliceEstimator::Bin(b) => b.eval(s),
            SliceEstimator::Reg(r) => r.eval_clamped(&[1.0, s, s * s]),
            // Conditional mean marginalized at the regression level:
            // evaluated at x^d = x^f = 0 the rate terms drop out, which is
            // the defensible point estimate for a strike-only surface.
            SliceEstimator::Reg3(r) => r.eval_clamped(&[1.0, s, s * s, 0.0, 0.0, 0.0, 0.0]),
        }
    }
}

/// Leverage calibration output.
#[derive(Debug, Clone)]
pub struct LeverageCalibration {
    pub surface: SliceSurface,
    /// Conditional-mean evaluations floored at eps = 1e-6 U0.
    pub floored_points: usize,
}

const U_FLOOR_FRACTION: f64 = 1e-6;

fn leverage_slice_from_estimator(
    est: &SliceEstimator,
    strikes: &[f64],
    lv_values: &[f64],
    u0: f64,
    floored: &mut usize,
) -> Vec<f64> {
    let eps = U_FLOOR_FRACTION * u0;
    strikes
        .iter()
        .zip(lv_values)
        .map(|(&k, &sig)| {
            let mut u = est.eval_spot(k);
            if u < eps {
                u = eps;
                *floored += 1;
            }
            sig / u.sqrt()
        })
        .collect()
}

/// SLV2DR leverage bootstrap: slice 0 seeds `L(K,0) = sigma_LV(K,0)/sqrt(U0)`,
/// each later slice simulates the SDE system with the leverage built so
/// far, fits the estimator on (S, U) at the slice time, and applies the
/// leverage relation on the local-vol strike grid.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_leverage_slv2dr(
    local_vol: &SliceSurface,
    heston: &HestonParams,
    dom_curve: &DiscountCurve,
    fgn_curve: &DiscountCurve,
    rho_su: f64,
    spot: f64,
    estimator: EstimatorKind,
    n_pairs: usize,
    max_dt: f64,
    seed: u64,
) -> Result<LeverageCalibration> {
    heston.validate()?;
    if local_vol.is_empty() {
        return Err(Error::Invalid("empty local-vol surface".into()));
    }
    let corr = CorrelationSpec::from_pairs(
        &[crate::mc::Driver::Spot, crate::mc::Driver::Variance],
        &[(crate::mc::Driver::Spot, crate::mc::Driver::Variance, rho_su)],
    )?;

    let mut floored = 0usize;
    let mut surface = SliceSurface::new(SurfaceKind::Leverage);
    seed_t0_slice(&mut surface, local_vol, heston.u0)?;

    for j in 0..local_vol.n_slices() {
        let t = local_vol.times()[j];
        let model = ModelSpec::Slv2drDrn {
            spot,
            dom_curve: dom_curve.clone(),
            fgn_curve: fgn_curve.clone(),
            heston: heston.clone(),
            leverage: surface.clone(),
            corr: corr.clone(),
        };
        let cfg = McConfig::new(n_pairs, max_dt, seed.wrapping_add(j as u64), vec![t])?;
        let bundle = simulate(&model, &cfg)?;
        let slice = &bundle.slices[0];
        let u = slice.u.as_ref().expect("variance captured");
        let est = match estimator {
            EstimatorKind::Binning { bins } => SliceEstimator::Bin(binning_fit(&slice.s, u, bins)?),
            EstimatorKind::Regression => SliceEstimator::Reg(regression_fit(&slice.s, u)?),
        };
        let values = leverage_slice_from_estimator(
            &est,
            local_vol.slice_strikes(j),
            local_vol.slice_values(j),
            heston.u0,
            &mut floored,
        );
        surface.push_slice(t, local_vol.slice_strikes(j).to_vec(), values, None)?;
    }

    Ok(LeverageCalibration { surface, floored_points: floored })
}

/// SLV2SR leverage bootstrap under the per-slice T-forward measure, with
/// the three-factor regression estimator.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_leverage_slv2sr(
    local_vol: &SliceSurface,
    heston: &HestonParams,
    dom: &G1ppParams,
    fgn: &G1ppParams,
    corr: &CorrelationSpec,
    spot: f64,
    n_pairs: usize,
    max_dt: f64,
    seed: u64,
) -> Result<LeverageCalibration> {
    heston.validate()?;
    if local_vol.is_empty() {
        return Err(Error::Invalid("empty local-vol surface".into()));
    }
    let mut floored = 0usize;
    let mut surface = SliceSurface::new(SurfaceKind::Leverage);
    seed_t0_slice(&mut surface, local_vol, heston.u0)?;

    for j in 0..local_vol.n_slices() {
        let t = local_vol.times()[j];
        let model = ModelSpec::Slv2srTfwd {
            spot,
            dom: dom.clone(),
            fgn: fgn.clone(),
            heston: heston.clone(),
            leverage: surface.clone(),
            corr: corr.clone(),
            horizon: t,
        };
        let cfg = McConfig::new(n_pairs, max_dt, seed.wrapping_add(j as u64), vec![t])?;
        let bundle = simulate(&model, &cfg)?;
        let slice = &bundle.slices[0];
        let u = slice.u.as_ref().expect("variance captured");
        let xd = slice.x_dom.as_ref().expect("domestic factor captured");
        let xf = slice.x_fgn.as_ref().expect("foreign factor captured");
        let est = SliceEstimator::Reg3(regression_fit_3d(&slice.s, xd, xf, u)?);
        let values = leverage_slice_from_estimator(
            &est,
            local_vol.slice_strikes(j),
            local_vol.slice_values(j),
            heston.u0,
            &mut floored,
        );
        surface.push_slice(t, local_vol.slice_strikes(j).to_vec(), values, None)?;
    }

    Ok(LeverageCalibration { surface, floored_points: floored })
}

/// At t = 0 the leverage relation collapses to L(K,0) = sigma_LV(K,0)/sqrt(U0).
fn seed_t0_slice(surface: &mut SliceSurface, local_vol: &SliceSurface, u0: f64) -> Result<()> {
    let sqrt_u0 = u0.sqrt();
    let strikes = local_vol.slice_strikes(0).to_vec();
    let values: Vec<f64> = local_vol.slice_values(0).iter().map(|v| v / sqrt_u0).collect();
    surface.push_slice(0.0, strikes, values, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::Driver::*;
    use crate::rates::G1ppSpec;

    #[test]
    fn binning_hand_example() {
        let s = [1.0, 3.0, 2.0, 4.0];
        let u = [10.0, 30.0, 20.0, 40.0];
        let est = binning_fit(&s, &u, 2).unwrap();
        let (sn, un) = est.nodes();
        assert_eq!(sn, [1.5, 3.5]);
        assert_eq!(un, [15.0, 35.0]);
        // Node interpolation is exact; extrapolation is flat.
        assert_eq!(est.eval(1.5), 15.0);
        assert_eq!(est.eval(3.5), 35.0);
        assert_eq!(est.eval(2.5), 25.0);
        assert_eq!(est.eval(0.0), 15.0);
        assert_eq!(est.eval(9.0), 35.0);
    }

    #[test]
    fn binning_constant_variance() {
        let s: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let u = vec![0.04; 100];
        let est = binning_fit(&s, &u, 7).unwrap();
        for &x in &[0.0, 17.3, 99.0] {
            assert!((est.eval(x) - 0.04).abs() < 1e-15);
        }
    }

    #[test]
    fn binning_last_bin_absorbs_remainder() {
        let s: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let u: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let est = binning_fit(&s, &u, 3).unwrap();
        let (sn, _) = est.nodes();
        assert_eq!(sn.len(), 3);
        // Bins of 3, 3, 4: last mean is (6+7+8+9)/4.
        assert_eq!(sn[2], 7.5);
        assert!(binning_fit(&s, &u, 11).is_err());
    }

    #[test]
    fn regression_recovers_exact_linear() {
        let s: Vec<f64> = (0..50).map(|i| 0.5 + 0.03 * i as f64).collect();
        let u: Vec<f64> = s.iter().map(|&x| 2.0 + 3.0 * x).collect();
        let est = regression_fit(&s, &u).unwrap();
        let c = est.coefficients();
        assert!((c[0] - 2.0).abs() < 1e-10, "a1 = {}", c[0]);
        assert!((c[1] - 3.0).abs() < 1e-10, "a2 = {}", c[1]);
        assert!(c[2].abs() < 1e-10, "a3 = {}", c[2]);
    }

    #[test]
    fn regression_constant_target() {
        let s: Vec<f64> = (0..20).map(|i| 1.0 + 0.1 * i as f64).collect();
        let u = vec![0.07; 20];
        let est = regression_fit(&s, &u).unwrap();
        assert!((est.eval_clamped(&[1.0, 1.7, 1.7 * 1.7]) - 0.07).abs() < 1e-12);
    }

    #[test]
    fn regression_residual_is_minimal() {
        // Noisy quadratic data: any coefficient perturbation must not
        // reduce the sum of squares.
        let mut state = 3u64;
        let mut noise = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 0.01
        };
        let s: Vec<f64> = (0..200).map(|i| 0.8 + 0.004 * i as f64).collect();
        let u: Vec<f64> = s.iter().map(|&x| 0.05 - 0.01 * x + 0.02 * x * x + noise()).collect();
        let est = regression_fit(&s, &u).unwrap();
        let sse = |c: &[f64]| -> f64 {
            s.iter()
                .zip(&u)
                .map(|(&x, &y)| {
                    let f = c[0] + c[1] * x + c[2] * x * x;
                    (f - y) * (f - y)
                })
                .sum()
        };
        let base = sse(est.coefficients());
        for j in 0..3 {
            for delta in [-1e-3, 1e-3] {
                let mut c = est.coefficients().to_vec();
                c[j] += delta;
                assert!(sse(&c) >= base - 1e-12, "perturbing c[{j}] reduced the residual");
            }
        }
    }

    #[test]
    fn regression_3d_exact_fits_and_degeneracies() {
        let n = 64;
        let mut state = 5u64;
        let mut rand = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let s: Vec<f64> = (0..n).map(|_| 1.0 + 0.3 * rand()).collect();
        let xd: Vec<f64> = (0..n).map(|_| 0.05 * rand()).collect();
        let xf: Vec<f64> = (0..n).map(|_| 0.04 * rand()).collect();
        // Constant target.
        let est = regression_fit_3d(&s, &xd, &xf, &vec![0.04; n]).unwrap();
        assert!((est.raw_eval(&[1.0, 1.1, 1.21, 0.01, 1e-4, 0.0, 0.0]) - 0.04).abs() < 1e-9);
        // Exact linear in the domestic factor.
        let u: Vec<f64> = xd.iter().map(|&x| 1.0 + 2.0 * x).collect();
        let est = regression_fit_3d(&s, &xd, &xf, &u).unwrap();
        let c = est.coefficients();
        assert!((c[0] - 1.0).abs() < 1e-8, "a1 = {}", c[0]);
        assert!((c[3] - 2.0).abs() < 1e-8, "a4 = {}", c[3]);
        for (j, cj) in c.iter().enumerate() {
            if j != 0 && j != 3 {
                assert!(cj.abs() < 1e-7, "a{} = {}", j + 1, cj);
            }
        }
        // Collinear columns (zero rate factors) resolved by ridge: the
        // evaluator reduces to the one-dimensional fit on S.
        let zeros = vec![0.0; n];
        let u: Vec<f64> = s.iter().map(|&x| 0.02 + 0.01 * x).collect();
        let est3 = regression_fit_3d(&s, &zeros, &zeros, &u).unwrap();
        let est1 = regression_fit(&s, &u).unwrap();
        for &x in &[0.9, 1.0, 1.15] {
            let v3 = est3.eval_clamped(&[1.0, x, x * x, 0.0, 0.0, 0.0, 0.0]);
            let v1 = est1.eval_clamped(&[1.0, x, x * x]);
            assert!((v3 - v1).abs() < 1e-8, "at {x}: {v3} vs {v1}");
        }
    }

    fn flat_lv(sigma: f64, times: &[f64]) -> SliceSurface {
        let mut s = SliceSurface::new(SurfaceKind::LocalVol);
        for &t in times {
            let strikes: Vec<f64> = (0..15).map(|i| 0.8 + 0.05 * i as f64).collect();
            s.push_slice(t, strikes, vec![sigma; 15], None).unwrap();
        }
        s
    }

    #[test]
    fn t0_seed_is_exact() {
        let lv = flat_lv(0.21, &[0.25, 0.5]);
        let heston = HestonParams::constant(0.04, -0.4, 1.5, 0.04, 0.2);
        let dom = DiscountCurve::flat(0.02, 2.0);
        let fgn = DiscountCurve::flat(0.01, 2.0);
        let cal = calibrate_leverage_slv2dr(
            &lv,
            &heston,
            &dom,
            &fgn,
            -0.4,
            1.1,
            EstimatorKind::Regression,
            2000,
            0.02,
            7,
        )
        .unwrap();
        assert_eq!(cal.surface.times()[0], 0.0);
        for (l, sig) in cal.surface.slice_values(0).iter().zip(lv.slice_values(0)) {
            assert!((l * 0.2 - sig).abs() < 1e-14, "t0 seed: {l} * sqrt(U0) vs {sig}");
        }
        // Strike grids are the same arrays as the local-vol grid.
        assert_eq!(cal.surface.slice_strikes(1), lv.slice_strikes(0));
    }

    #[test]
    fn degenerate_variance_gives_lv_over_sqrt_u0() {
        // xi ~ 0 and theta = U0: E[U|S] = U0 exactly, so L = sigma_LV/sqrt(U0).
        let lv = flat_lv(0.2, &[0.25, 0.5, 0.75]);
        let heston = HestonParams::constant(0.04, 0.0, 1.5, 0.04, 1e-10);
        let dom = DiscountCurve::flat(0.02, 2.0);
        let fgn = DiscountCurve::flat(0.01, 2.0);
        for kind in [EstimatorKind::Binning { bins: 10 }, EstimatorKind::Regression] {
            let cal = calibrate_leverage_slv2dr(
                &lv, &heston, &dom, &fgn, 0.0, 1.1, kind, 4000, 0.02, 3,
            )
            .unwrap();
            assert_eq!(cal.floored_points, 0);
            for i in 0..cal.surface.n_slices() {
                for l in cal.surface.slice_values(i) {
                    assert!((l - 1.0).abs() < 1e-6, "{kind:?} slice {i}: L = {l}");
                }
            }
        }
    }

    #[test]
    fn slv2sr_zero_rate_vols_matches_slv2dr_regression() {
        let lv = flat_lv(0.2, &[0.25, 0.5]);
        let heston = HestonParams::constant(0.04, -0.3, 1.8, 0.045, 0.25);
        let dom_curve = DiscountCurve::flat(0.02, 2.0);
        let fgn_curve = DiscountCurve::flat(0.01, 2.0);
        let dom = G1ppSpec::constant(0.01, 0.0).fit_shift(&dom_curve).unwrap();
        let fgn = G1ppSpec::constant(0.01, 0.0).fit_shift(&fgn_curve).unwrap();
        let corr = CorrelationSpec::from_pairs(
            &[Spot, Variance, DomRate, FgnRate],
            &[(Spot, Variance, -0.3)],
        )
        .unwrap();
        let sr = calibrate_leverage_slv2sr(
            &lv, &heston, &dom, &fgn, &corr, 1.1, 30_000, 0.01, 11,
        )
        .unwrap();
        let dr = calibrate_leverage_slv2dr(
            &lv,
            &heston,
            &dom_curve,
            &fgn_curve,
            -0.3,
            1.1,
            EstimatorKind::Regression,
            30_000,
            0.01,
            11,
        )
        .unwrap();
        // Interior strikes only; wings carry little conditional data.
        for i in 1..sr.surface.n_slices() {
            let ks = sr.surface.slice_strikes(i);
            let n = ks.len();
            for j in n / 4..3 * n / 4 {
                let a = sr.surface.slice_values(i)[j];
                let b = dr.surface.slice_values(i)[j];
                assert!(
                    (a - b).abs() < 0.05,
                    "slice {i}, K={}: SLV2SR {a} vs SLV2DR {b}",
                    ks[j]
                );
            }
        }
    }
}
