//! Correlated Euler-Maruyama simulation of the model SDE systems with
//! antithetic variates and per-path counter-based RNG streams.
//!
//! Paths are integrated in antithetic pairs: the mate re-uses the pair's
//! normal draws with flipped sign. Work parallelizes over pairs; because
//! every pair owns an independent RNG stream keyed by (seed, pair index),
//! results are bit-identical for any worker count.

use rayon::prelude::*;

use crate::error::Result;
use crate::mc::config::McConfig;
use crate::mc::corr::Driver;
use crate::mc::model::ModelSpec;
use crate::mc::rng::PathRng;
use crate::surface::SliceSurface;

/// Hard floor keeping Euler spot paths positive.
pub const SPOT_FLOOR: f64 = 1e-12;

/// Full-truncation Euler step for the CIR variance:
/// `U' = U + [kappa (theta - U+) + drift_adjust sqrt(U+)] dt + xi sqrt(U+) dW`.
///
/// The state is stored as-is (it may go negative); every use of the
/// variance reads sqrt(U+). `drift_adjust` carries the T-forward measure
/// correction `-rho_Ud b^d sigma^d xi`.
#[inline]
pub fn cir_step(
    u: f64,
    kappa: f64,
    theta: f64,
    xi: f64,
    dt: f64,
    dw_u: f64,
    drift_adjust: f64,
) -> f64 {
    let up = u.max(0.0);
    let sq = up.sqrt();
    u + (kappa * (theta - up) + drift_adjust * sq) * dt + xi * sq * dw_u
}

/// State captured for all 2N paths at one slice time. Paths 0..N are the
/// regular polarity, N..2N their antithetic mates (pair p at indices p
/// and N + p). Variance is stored truncated at zero.
#[derive(Debug, Clone)]
pub struct SliceState {
    pub t: f64,
    pub s: Vec<f64>,
    pub x_dom: Option<Vec<f64>>,
    pub x_fgn: Option<Vec<f64>>,
    pub u: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct PathBundle {
    pub n_pairs: usize,
    pub slices: Vec<SliceState>,
    pub time_grid: Vec<f64>,
}

impl PathBundle {
    pub fn slice_at(&self, t: f64) -> Option<&SliceState> {
        self.slices.iter().find(|s| (s.t - t).abs() < 1e-12)
    }
}

/// Euler grid: anchors at 0 and every capture time, each interval split
/// into steps of size at most `max_dt`. Returns (grid, capture indices).
pub fn build_time_grid(capture_times: &[f64], max_dt: f64) -> (Vec<f64>, Vec<usize>) {
    let mut grid = vec![0.0];
    let mut capture_idx = Vec::with_capacity(capture_times.len());
    let mut prev = 0.0;
    for &t in capture_times {
        let n = ((t - prev) / max_dt - 1e-9).ceil().max(1.0) as usize;
        for i in 1..=n {
            grid.push(prev + (t - prev) * i as f64 / n as f64);
        }
        *grid.last_mut().unwrap() = t;
        capture_idx.push(grid.len() - 1);
        prev = t;
    }
    (grid, capture_idx)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PathState {
    pub s: f64,
    pub x_dom: f64,
    pub x_fgn: f64,
    pub u: f64,
}

/// Per-step coefficients, shared by all paths; precomputed once so the
/// hot loop performs no curve or shift lookups.
#[derive(Debug, Clone, Copy, Default)]
struct StepCoef {
    dt: f64,
    sqrt_dt: f64,
    sig_d: f64,
    sig_f: f64,
    a_d: f64,
    a_f: f64,
    b_d: f64,
    phi_d: f64,
    phi_f: f64,
    r_det: f64,
    kappa: f64,
    theta: f64,
    xi: f64,
    vol_idx: u32,
}

enum Kernel<'a> {
    Lv2sr { lv: &'a SliceSurface },
    Heston,
    Slv2dr { lev: &'a SliceSurface },
    Slv2sr { lev: &'a SliceSurface },
    Bs2sr { sigma_s: f64 },
}

/// Fully resolved simulation context.
pub(crate) struct Prepared<'a> {
    kernel: Kernel<'a>,
    coefs: Vec<StepCoef>,
    grid: Vec<f64>,
    chol: [[f64; 4]; 4],
    n_drivers: usize,
    rho_sd: f64,
    rho_sf: f64,
    rho_df: f64,
    rho_ud: f64,
    spot: f64,
    u0: f64,
}

pub(crate) fn prepare<'a>(model: &'a ModelSpec, grid: &[f64]) -> Result<Prepared<'a>> {
    let drivers = model.drivers();
    let n_drivers = drivers.len();
    let chol_flat = model.corr().chol()?;
    let mut chol = [[0.0; 4]; 4];
    // Rows in canonical driver order regardless of the spec's ordering.
    for (i, di) in drivers.iter().enumerate() {
        let ri = model.corr().index_of(*di).expect("validated");
        for (j, dj) in drivers.iter().enumerate() {
            let rj = model.corr().index_of(*dj).expect("validated");
            chol[i][j] = chol_flat[ri * n_drivers + rj];
        }
    }

    let corr = model.corr();
    let rho_sd = corr.rho(Driver::Spot, Driver::DomRate);
    let rho_sf = corr.rho(Driver::Spot, Driver::FgnRate);
    let rho_df = corr.rho(Driver::DomRate, Driver::FgnRate);
    let rho_ud = corr.rho(Driver::Variance, Driver::DomRate);

    let n_steps = grid.len() - 1;
    let mut coefs = vec![StepCoef::default(); n_steps];
    for k in 0..n_steps {
        let t0 = grid[k];
        let dt = grid[k + 1] - t0;
        let c = &mut coefs[k];
        c.dt = dt;
        c.sqrt_dt = dt.sqrt();
        match model {
            ModelSpec::Lv2srTfwd { dom, fgn, local_vol, horizon, .. } => {
                c.sig_d = dom.sigma(t0);
                c.sig_f = fgn.sigma(t0);
                c.a_d = dom.mean_reversion(t0);
                c.a_f = fgn.mean_reversion(t0);
                c.b_d = dom.b_factor(t0, *horizon)?;
                c.phi_d = dom.phi(t0)?;
                c.phi_f = fgn.phi(t0)?;
                c.vol_idx = local_vol.slice_index(t0) as u32;
            }
            ModelSpec::Bs2srTfwd { dom, fgn, horizon, .. } => {
                c.sig_d = dom.sigma(t0);
                c.sig_f = fgn.sigma(t0);
                c.a_d = dom.mean_reversion(t0);
                c.a_f = fgn.mean_reversion(t0);
                c.b_d = dom.b_factor(t0, *horizon)?;
                c.phi_d = dom.phi(t0)?;
                c.phi_f = fgn.phi(t0)?;
            }
            ModelSpec::HestonDrn { dom_curve, fgn_curve, heston, .. } => {
                c.r_det =
                    dom_curve.instantaneous_forward(t0)? - fgn_curve.instantaneous_forward(t0)?;
                let (kappa, theta, xi) = heston.at(t0);
                c.kappa = kappa;
                c.theta = theta;
                c.xi = xi;
            }
            ModelSpec::Slv2drDrn { dom_curve, fgn_curve, heston, leverage, .. } => {
                c.r_det =
                    dom_curve.instantaneous_forward(t0)? - fgn_curve.instantaneous_forward(t0)?;
                let (kappa, theta, xi) = heston.at(t0);
                c.kappa = kappa;
                c.theta = theta;
                c.xi = xi;
                c.vol_idx = leverage.slice_index(t0) as u32;
            }
            ModelSpec::Slv2srTfwd { dom, fgn, heston, leverage, horizon, .. } => {
                c.sig_d = dom.sigma(t0);
                c.sig_f = fgn.sigma(t0);
                c.a_d = dom.mean_reversion(t0);
                c.a_f = fgn.mean_reversion(t0);
                c.b_d = dom.b_factor(t0, *horizon)?;
                c.phi_d = dom.phi(t0)?;
                c.phi_f = fgn.phi(t0)?;
                let (kappa, theta, xi) = heston.at(t0);
                c.kappa = kappa;
                c.theta = theta;
                c.xi = xi;
                c.vol_idx = leverage.slice_index(t0) as u32;
            }
        }
    }

    let kernel = match model {
        ModelSpec::Lv2srTfwd { local_vol, .. } => Kernel::Lv2sr { lv: local_vol },
        ModelSpec::HestonDrn { .. } => Kernel::Heston,
        ModelSpec::Slv2drDrn { leverage, .. } => Kernel::Slv2dr { lev: leverage },
        ModelSpec::Slv2srTfwd { leverage, .. } => Kernel::Slv2sr { lev: leverage },
        ModelSpec::Bs2srTfwd { sigma_s, .. } => Kernel::Bs2sr { sigma_s: *sigma_s },
    };
    let u0 = match model {
        ModelSpec::HestonDrn { heston, .. }
        | ModelSpec::Slv2drDrn { heston, .. }
        | ModelSpec::Slv2srTfwd { heston, .. } => heston.u0,
        _ => 0.0,
    };

    Ok(Prepared {
        kernel,
        coefs,
        grid: grid.to_vec(),
        chol,
        n_drivers,
        rho_sd,
        rho_sf,
        rho_df,
        rho_ud,
        spot: model.spot(),
        u0,
    })
}

impl Prepared<'_> {
    fn initial_state(&self) -> PathState {
        PathState { s: self.spot, x_dom: 0.0, x_fgn: 0.0, u: self.u0 }
    }

    /// One Euler step. `z` holds iid normals in driver order; returns the
    /// log-diffusion level of the spot at the step start.
    #[inline]
    fn advance(&self, k: usize, st: &mut PathState, z: &[f64; 4]) -> f64 {
        let c = &self.coefs[k];
        // Correlate and scale the increments.
        let mut dw = [0.0f64; 4];
        for i in 0..self.n_drivers {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += self.chol[i][j] * z[j];
            }
            dw[i] = acc * c.sqrt_dt;
        }

        match &self.kernel {
            Kernel::Lv2sr { lv } => {
                let sig = lv.eval_slice(c.vol_idx as usize, st.s);
                let r_d = st.x_dom + c.phi_d;
                let r_f = st.x_fgn + c.phi_f;
                let drift_s = r_d - r_f - self.rho_sd * c.b_d * c.sig_d * sig;
                let s = st.s;
                st.s = (s + drift_s * s * c.dt + sig * s * dw[0]).max(SPOT_FLOOR);
                st.x_dom += (-c.a_d * st.x_dom - c.b_d * c.sig_d * c.sig_d) * c.dt + c.sig_d * dw[1];
                st.x_fgn += (-c.a_f * st.x_fgn
                    - self.rho_sf * c.sig_f * sig
                    - self.rho_df * c.b_d * c.sig_d * c.sig_f)
                    * c.dt
                    + c.sig_f * dw[2];
                sig
            }
            Kernel::Bs2sr { sigma_s } => {
                let sig = *sigma_s;
                let r_d = st.x_dom + c.phi_d;
                let r_f = st.x_fgn + c.phi_f;
                let drift_s = r_d - r_f - self.rho_sd * c.b_d * c.sig_d * sig;
                let s = st.s;
                st.s = (s + drift_s * s * c.dt + sig * s * dw[0]).max(SPOT_FLOOR);
                st.x_dom += (-c.a_d * st.x_dom - c.b_d * c.sig_d * c.sig_d) * c.dt + c.sig_d * dw[1];
                st.x_fgn += (-c.a_f * st.x_fgn
                    - self.rho_sf * c.sig_f * sig
                    - self.rho_df * c.b_d * c.sig_d * c.sig_f)
                    * c.dt
                    + c.sig_f * dw[2];
                sig
            }
            Kernel::Heston => {
                let sig = st.u.max(0.0).sqrt();
                let s = st.s;
                st.s = (s + c.r_det * s * c.dt + sig * s * dw[0]).max(SPOT_FLOOR);
                st.u = cir_step(st.u, c.kappa, c.theta, c.xi, c.dt, dw[1], 0.0);
                sig
            }
            Kernel::Slv2dr { lev } => {
                let sig = lev.eval_slice(c.vol_idx as usize, st.s) * st.u.max(0.0).sqrt();
                let s = st.s;
                st.s = (s + c.r_det * s * c.dt + sig * s * dw[0]).max(SPOT_FLOOR);
                st.u = cir_step(st.u, c.kappa, c.theta, c.xi, c.dt, dw[1], 0.0);
                sig
            }
            Kernel::Slv2sr { lev } => {
                let sig = lev.eval_slice(c.vol_idx as usize, st.s) * st.u.max(0.0).sqrt();
                let r_d = st.x_dom + c.phi_d;
                let r_f = st.x_fgn + c.phi_f;
                let drift_s = r_d - r_f - self.rho_sd * c.b_d * c.sig_d * sig;
                let s = st.s;
                st.s = (s + drift_s * s * c.dt + sig * s * dw[0]).max(SPOT_FLOOR);
                st.u = cir_step(
                    st.u,
                    c.kappa,
                    c.theta,
                    c.xi,
                    c.dt,
                    dw[1],
                    -self.rho_ud * c.b_d * c.sig_d * c.xi,
                );
                st.x_dom += (-c.a_d * st.x_dom - c.b_d * c.sig_d * c.sig_d) * c.dt + c.sig_d * dw[2];
                st.x_fgn += (-c.a_f * st.x_fgn
                    - self.rho_sf * c.sig_f * sig
                    - self.rho_df * c.b_d * c.sig_d * c.sig_f)
                    * c.dt
                    + c.sig_f * dw[3];
                sig
            }
        }
    }

    /// Evolve one antithetic pair through the whole grid, invoking the
    /// observer after every step for both polarities (0 = regular,
    /// 1 = mate).
    #[inline]
    fn evolve_pair<F: FnMut(usize, usize, f64, f64, &PathState, f64)>(
        &self,
        seed: u64,
        pair: u64,
        mut observe: F,
    ) -> (PathState, PathState) {
        let mut rng = PathRng::new(seed, pair);
        let mut reg = self.initial_state();
        let mut anti = self.initial_state();
        let mut z = [0.0f64; 4];
        for k in 0..self.coefs.len() {
            for zi in z.iter_mut().take(self.n_drivers) {
                *zi = rng.next_normal();
            }
            let s_before = reg.s;
            let sig = self.advance(k, &mut reg, &z);
            observe(0, k, s_before, sig, &reg, self.grid[k + 1]);

            let mut zn = [0.0f64; 4];
            for i in 0..self.n_drivers {
                zn[i] = -z[i];
            }
            let s_before = anti.s;
            let sig = self.advance(k, &mut anti, &zn);
            observe(1, k, s_before, sig, &anti, self.grid[k + 1]);
        }
        (reg, anti)
    }
}

/// Simulate and capture state at the configured slice times.
pub fn simulate(model: &ModelSpec, cfg: &McConfig) -> Result<PathBundle> {
    cfg.validate()?;
    model.validate(cfg.horizon())?;
    let (grid, capture_idx) = build_time_grid(&cfg.capture_times, cfg.max_dt);
    let prepared = prepare(model, &grid)?;

    let n = cfg.n_pairs;
    let n_caps = capture_idx.len();
    let capture_steps: Vec<usize> = capture_idx.iter().map(|&i| i - 1).collect();

    #[derive(Clone, Copy, Default)]
    struct Rec {
        s: f64,
        xd: f64,
        xf: f64,
        u: f64,
    }

    let records: Vec<Vec<[Rec; 2]>> = (0..n as u64)
        .into_par_iter()
        .map(|pair| {
            let mut recs = vec![[Rec::default(); 2]; n_caps];
            prepared.evolve_pair(cfg.seed, pair, |polarity, k, _s0, _sig, st, _t1| {
                // Capture when the step lands on a slice.
                if let Ok(ci) = capture_steps.binary_search(&k) {
                    recs[ci][polarity] = Rec {
                        s: st.s,
                        xd: st.x_dom,
                        xf: st.x_fgn,
                        u: st.u.max(0.0),
                    };
                }
            });
            recs
        })
        .collect();

    let want_rates = model.has_rate_factors();
    let want_var = model.has_variance();
    let mut slices = Vec::with_capacity(n_caps);
    for (ci, &t) in cfg.capture_times.iter().enumerate() {
        let mut s = vec![0.0; 2 * n];
        let mut xd = if want_rates { Some(vec![0.0; 2 * n]) } else { None };
        let mut xf = if want_rates { Some(vec![0.0; 2 * n]) } else { None };
        let mut u = if want_var { Some(vec![0.0; 2 * n]) } else { None };
        for (p, recs) in records.iter().enumerate() {
            for polarity in 0..2 {
                let idx = p + polarity * n;
                let r = &recs[ci][polarity];
                s[idx] = r.s;
                if let Some(v) = xd.as_mut() {
                    v[idx] = r.xd;
                }
                if let Some(v) = xf.as_mut() {
                    v[idx] = r.xf;
                }
                if let Some(v) = u.as_mut() {
                    v[idx] = r.u;
                }
            }
        }
        slices.push(SliceState { t, s, x_dom: xd, x_fgn: xf, u });
    }

    Ok(PathBundle { n_pairs: n, slices, time_grid: grid })
}

/// Per-path running statistic over the simulated trajectory; used by the
/// barrier pricer for knockout monitoring.
pub trait PathMonitor: Sync {
    type Acc: Clone + Send;
    fn start(&self) -> Self::Acc;
    /// Called after each step with the spot before and after the step and
    /// the log-diffusion level at the step start.
    fn on_step(&self, acc: &mut Self::Acc, t0: f64, t1: f64, s_before: f64, s_after: f64, sig: f64);
    /// Reduce to a per-path value given the terminal spot.
    fn finish(&self, acc: Self::Acc, s_terminal: f64) -> f64;
}

/// Simulate to the final capture time, folding each path through the
/// monitor. Returns 2N values laid out like [`SliceState`] paths.
pub fn simulate_with_monitor<M: PathMonitor>(
    model: &ModelSpec,
    cfg: &McConfig,
    monitor: &M,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    model.validate(cfg.horizon())?;
    let (grid, _) = build_time_grid(&cfg.capture_times, cfg.max_dt);
    let prepared = prepare(model, &grid)?;

    let n = cfg.n_pairs;
    let pair_values: Vec<[f64; 2]> = (0..n as u64)
        .into_par_iter()
        .map(|pair| {
            let mut accs = [monitor.start(), monitor.start()];
            let (reg, anti) = prepared.evolve_pair(cfg.seed, pair, |polarity, k, s0, sig, st, t1| {
                let t0 = t1 - prepared.coefs[k].dt;
                monitor.on_step(&mut accs[polarity], t0, t1, s0, st.s, sig);
            });
            [
                monitor.finish(accs[0].clone(), reg.s),
                monitor.finish(accs[1].clone(), anti.s),
            ]
        })
        .collect();

    let mut out = vec![0.0; 2 * n];
    for (p, v) in pair_values.iter().enumerate() {
        out[p] = v[0];
        out[n + p] = v[1];
    }
    Ok(out)
}

/// Mean and standard error over antithetic pairs: pair means first, then
/// the sample error of the N pair means.
pub fn pair_mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() / 2;
    assert!(n > 0 && values.len() == 2 * n);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for p in 0..n {
        let m = 0.5 * (values[p] + values[n + p]);
        sum += m;
        sum_sq += m * m;
    }
    let nf = n as f64;
    let mean = sum / nf;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}
