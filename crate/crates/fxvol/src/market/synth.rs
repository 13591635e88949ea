//! Parametric synthetic markets. The paper's market data set is not
//! redistributable, so every end-to-end test and the CLI `gen-market`
//! command build self-contained flat, skewed, or smiled surfaces instead.

use crate::market::curves::{forward, DiscountCurve};
use crate::market::tiv::VolQuoteGrid;

/// Parametric total-variance smile
///
/// ```text
/// w(y, T) = T * [ base^2 + skew * y + curv * (sqrt(y^2 + eta^2) - eta) ]
/// ```
///
/// Linear in T at fixed log-moneyness, so the surface is free of calendar
/// arbitrage by construction; `curv >= |skew|` keeps the wings positive.
#[derive(Debug, Clone, Copy)]
pub struct SmileSpec {
    pub base: f64,
    pub skew: f64,
    pub curv: f64,
    pub eta: f64,
}

impl SmileSpec {
    pub fn flat(base: f64) -> Self {
        Self { base, skew: 0.0, curv: 0.0, eta: 0.25 }
    }

    pub fn total_variance(&self, y: f64, t: f64) -> f64 {
        let wing = (y * y + self.eta * self.eta).sqrt() - self.eta;
        t * (self.base * self.base + self.skew * y + self.curv * wing)
    }

    pub fn vol(&self, y: f64, t: f64) -> f64 {
        (self.total_variance(y, t) / t).sqrt()
    }

    /// Quote grid with per-expiry strikes spanning `span` ATMF standard
    /// deviations (log-uniform) around the forward.
    pub fn quote_grid(
        &self,
        dom: &DiscountCurve,
        fgn: &DiscountCurve,
        spot: f64,
        expiries: &[f64],
        strikes_per_expiry: usize,
        span: f64,
    ) -> VolQuoteGrid {
        assert!(self.curv >= self.skew.abs(), "wing positivity needs curv >= |skew|");
        assert!(strikes_per_expiry >= 2);
        let mut strikes = Vec::with_capacity(expiries.len());
        let mut vols = Vec::with_capacity(expiries.len());
        for &t in expiries {
            let f_t = forward(spot, dom, fgn, t).expect("curves cover expiries");
            let half = span * self.base * t.sqrt();
            let n = strikes_per_expiry;
            let ks: Vec<f64> = (0..n)
                .map(|j| f_t * (-half + 2.0 * half * j as f64 / (n - 1) as f64).exp())
                .collect();
            let vs: Vec<f64> = ks.iter().map(|k| self.vol((k / f_t).ln(), t)).collect();
            strikes.push(ks);
            vols.push(vs);
        }
        VolQuoteGrid::new(expiries.to_vec(), strikes, vols).expect("synthetic grid is valid")
    }
}

/// Flat-vol quote grid helper.
pub fn flat_quote_grid(
    sigma: f64,
    dom: &DiscountCurve,
    fgn: &DiscountCurve,
    spot: f64,
    expiries: &[f64],
    strikes_per_expiry: usize,
    span: f64,
) -> VolQuoteGrid {
    SmileSpec::flat(sigma).quote_grid(dom, fgn, spot, expiries, strikes_per_expiry, span)
}
