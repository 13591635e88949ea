//! G1++ short-rate machinery: r_t = x_t + phi_t with mean-reverting x_t,
//! piecewise-constant mean reversion a_t and volatility sigma_t, and a
//! deterministic shift phi_t fitted so model bonds reprice a discount
//! curve.
//!
//! The auxiliary factor
//!
//! ```text
//! b(t, T) = int_t^T exp(-int_t^v a_z dz) dv
//! ```
//!
//! appears in bond prices and in every T-forward drift correction; it is
//! composed exactly across constant-coefficient segments.

use crate::error::{Error, Result};
use crate::market::DiscountCurve;
use crate::math::pwconst::merged_segments;
use crate::math::{GaussLegendre, PiecewiseConstant as Pwc};

/// Spacing of the dense grid carrying the convexity part of the shift.
const SHIFT_GRID_DT: f64 = 0.0025;

/// Mean-reversion and volatility term structure, before shift fitting.
#[derive(Debug, Clone)]
pub struct G1ppSpec {
    pub mean_reversion: Pwc,
    pub volatility: Pwc,
}

impl G1ppSpec {
    pub fn new(mean_reversion: Pwc, volatility: Pwc) -> Result<Self> {
        if volatility.values().iter().any(|&s| s < 0.0) {
            return Err(Error::Invalid("G1++ volatility must be nonnegative".into()));
        }
        Ok(Self { mean_reversion, volatility })
    }

    pub fn constant(a: f64, sigma: f64) -> Self {
        Self { mean_reversion: Pwc::constant(a), volatility: Pwc::constant(sigma) }
    }

    /// exp(-int_{t0}^{t1} a_z dz), composed across segments.
    pub fn decay(&self, t0: f64, t1: f64) -> f64 {
        assert!(t1 >= t0);
        let mut acc = 0.0;
        for seg in merged_segments(&[&self.mean_reversion], t0, t1).windows(2) {
            acc += self.mean_reversion.value(seg[0]) * (seg[1] - seg[0]);
        }
        (-acc).exp()
    }

    /// b(t, T) by exact per-segment closed forms.
    pub fn b_factor(&self, t: f64, big_t: f64) -> Result<f64> {
        if t > big_t {
            return Err(Error::Invalid(format!("b_factor needs t <= T, got {t} > {big_t}")));
        }
        let mut b = 0.0;
        let mut decay_acc = 1.0;
        for seg in merged_segments(&[&self.mean_reversion], t, big_t).windows(2) {
            let a = self.mean_reversion.value(seg[0]);
            let dt = seg[1] - seg[0];
            let (piece, seg_decay) = if a.abs() < 1e-14 {
                (dt, 1.0)
            } else {
                let e = (-a * dt).exp();
                ((1.0 - e) / a, e)
            };
            b += decay_acc * piece;
            decay_acc *= seg_decay;
        }
        Ok(b)
    }

    /// int_t^T sigma_v^2 b(v, T)^2 dv, Gauss-Legendre per segment.
    pub fn variance_integral(&self, t: f64, big_t: f64, gl: &GaussLegendre) -> f64 {
        if big_t <= t {
            return 0.0;
        }
        let segs = merged_segments(&[&self.mean_reversion, &self.volatility], t, big_t);
        gl.integrate_segments(&segs, |v| {
            let s = self.volatility.value(v);
            let b = self.b_factor(v, big_t).expect("v <= T");
            s * s * b * b
        })
    }

    /// Convexity part of the shift: psi(T) = int_0^T sigma_v^2 b(v,T)
    /// exp(-int_v^T a) dv = d/dT [ half the variance integral ].
    fn psi(&self, big_t: f64, gl: &GaussLegendre) -> f64 {
        if big_t <= 0.0 {
            return 0.0;
        }
        let segs = merged_segments(&[&self.mean_reversion, &self.volatility], 0.0, big_t);
        gl.integrate_segments(&segs, |v| {
            let s = self.volatility.value(v);
            let b = self.b_factor(v, big_t).expect("v <= T");
            s * s * b * self.decay(v, big_t)
        })
    }

    /// Fit the shift so that model bonds reprice `curve` at every tenor.
    ///
    /// From the stochastic-discount identity, the shift integral satisfies
    /// `int_0^T phi = -log P(0,T) + 1/2 int_0^T sigma^2 b^2(v,T) dv`;
    /// differentiating gives `phi(t) = f(0,t) + psi(t)` with smooth psi
    /// stored on a dense grid.
    pub fn fit_shift(self, curve: &DiscountCurve) -> Result<G1ppParams> {
        let horizon = curve.max_tenor();
        let gl = GaussLegendre::new(32);
        let n = (horizon / SHIFT_GRID_DT).ceil() as usize;
        let psi_values: Vec<f64> =
            (0..=n).map(|i| self.psi(horizon * i as f64 / n as f64, &gl)).collect();
        Ok(G1ppParams { spec: self, curve: curve.clone(), psi_values, horizon, gl })
    }
}

/// Fitted G1++ parameter set for one currency.
#[derive(Debug, Clone)]
pub struct G1ppParams {
    spec: G1ppSpec,
    curve: DiscountCurve,
    psi_values: Vec<f64>,
    horizon: f64,
    gl: GaussLegendre,
}

impl G1ppParams {
    pub fn spec(&self) -> &G1ppSpec {
        &self.spec
    }

    pub fn curve(&self) -> &DiscountCurve {
        &self.curve
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn sigma(&self, t: f64) -> f64 {
        self.spec.volatility.value(t)
    }

    pub fn mean_reversion(&self, t: f64) -> f64 {
        self.spec.mean_reversion.value(t)
    }

    pub fn b_factor(&self, t: f64, big_t: f64) -> Result<f64> {
        self.spec.b_factor(t, big_t)
    }

    /// Shift value phi(t) = f(0,t) + psi(t), psi linearly interpolated on
    /// its dense grid.
    pub fn phi(&self, t: f64) -> Result<f64> {
        let f = self.curve.instantaneous_forward(t)?;
        let n = self.psi_values.len() - 1;
        let pos = (t / self.horizon * n as f64).clamp(0.0, n as f64);
        let i = (pos as usize).min(n - 1);
        let lam = pos - i as f64;
        Ok(f + (1.0 - lam) * self.psi_values[i] + lam * self.psi_values[i + 1])
    }

    /// Exact shift integral int_0^t phi_s ds via the bond identity.
    pub fn int_phi(&self, t: f64) -> Result<f64> {
        Ok(-self.curve.log_df(t)? + 0.5 * self.spec.variance_integral(0.0, t, &self.gl))
    }

    /// Model zero-coupon bond
    /// `P(t,T) = exp(-int_t^T phi - x b(t,T) + 1/2 int_t^T sigma^2 b^2(v,T) dv)`.
    pub fn model_bond(&self, t: f64, big_t: f64, x: f64) -> Result<f64> {
        if t > big_t {
            return Err(Error::Invalid(format!("model_bond needs t <= T, got {t} > {big_t}")));
        }
        let int_phi = self.int_phi(big_t)? - self.int_phi(t)?;
        let b = self.spec.b_factor(t, big_t)?;
        let var = self.spec.variance_integral(t, big_t, &self.gl);
        Ok((-int_phi - x * b + 0.5 * var).exp())
    }

    /// LHS - RHS of the stochastic-discount identity
    /// `exp(-int_t^T r) = P(t,T) exp(-int sigma b dW - 1/2 int sigma^2 b^2)`
    /// evaluated on a discrete path: trapezoid for the ds integrals,
    /// left-point (Ito) sums for the dW integral.
    ///
    /// `t_grid` has one more entry than `dw`; `x_path[k]` is the factor
    /// value at `t_grid[k]` simulated with increments `dw`.
    pub fn discount_identity_residual(
        &self,
        t_grid: &[f64],
        x_path: &[f64],
        dw: &[f64],
    ) -> Result<f64> {
        let n = t_grid.len();
        if n < 2 || x_path.len() != n || dw.len() != n - 1 {
            return Err(Error::Invalid("residual: grid/path/increment lengths mismatch".into()));
        }
        let (t0, t1) = (t_grid[0], t_grid[n - 1]);

        let mut int_r = 0.0;
        let mut int_s2b2 = 0.0;
        let mut int_sbdw = 0.0;
        for k in 0..n - 1 {
            let dt = t_grid[k + 1] - t_grid[k];
            let r0 = x_path[k] + self.phi(t_grid[k])?;
            let r1 = x_path[k + 1] + self.phi(t_grid[k + 1])?;
            int_r += 0.5 * (r0 + r1) * dt;
            let g = |t: f64| -> Result<f64> {
                let s = self.sigma(t);
                let b = self.spec.b_factor(t, t1)?;
                Ok(s * s * b * b)
            };
            int_s2b2 += 0.5 * (g(t_grid[k])? + g(t_grid[k + 1])?) * dt;
            int_sbdw += self.sigma(t_grid[k]) * self.spec.b_factor(t_grid[k], t1)? * dw[k];
        }

        let lhs = (-int_r).exp();
        let rhs = self.model_bond(t0, t1, x_path[0])? * (-int_sbdw - 0.5 * int_s2b2).exp();
        Ok(lhs - rhs)
    }
}
