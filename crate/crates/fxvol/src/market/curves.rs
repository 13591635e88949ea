//! Discount curves with log-linear interpolation and the forward helpers
//! used throughout calibration.

use crate::error::{Error, Result};

/// Discount factor curve P(0, t), log-linear between tenors. P(0,0) = 1 is
/// implicit; instantaneous forwards are piecewise constant between tenors.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountCurve {
    tenors: Vec<f64>,
    dfs: Vec<f64>,
    log_dfs: Vec<f64>,
}

impl DiscountCurve {
    pub fn new(tenors: Vec<f64>, dfs: Vec<f64>) -> Result<Self> {
        if tenors.is_empty() || tenors.len() != dfs.len() {
            return Err(Error::Invalid("curve needs equal, nonempty tenors/dfs".into()));
        }
        if tenors[0] <= 0.0 {
            return Err(Error::Invalid("curve tenors must be positive".into()));
        }
        for w in tenors.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Invalid("curve tenors must be strictly increasing".into()));
            }
        }
        if dfs.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::Invalid("discount factors must be strictly positive".into()));
        }
        let log_dfs = dfs.iter().map(|d| d.ln()).collect();
        Ok(Self { tenors, dfs, log_dfs })
    }

    /// Flat continuously-compounded curve out to `horizon`.
    pub fn flat(rate: f64, horizon: f64) -> Self {
        let n = (horizon / 0.5).ceil().max(1.0) as usize;
        let tenors: Vec<f64> = (1..=n).map(|i| horizon * i as f64 / n as f64).collect();
        let dfs = tenors.iter().map(|t| (-rate * t).exp()).collect();
        Self::new(tenors, dfs).expect("flat curve construction")
    }

    pub fn max_tenor(&self) -> f64 {
        *self.tenors.last().unwrap()
    }

    pub fn tenors(&self) -> &[f64] {
        &self.tenors
    }

    pub fn dfs(&self) -> &[f64] {
        &self.dfs
    }

    pub fn log_df(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t > self.max_tenor() + 1e-12 {
            return Err(Error::OutsideCurve(t, self.max_tenor()));
        }
        if t <= 0.0 {
            return Ok(0.0);
        }
        // Implicit (0, log 1) node at the front.
        let i = match self.tenors.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => return Ok(self.log_dfs[i]),
            Err(i) => i,
        };
        let (t0, l0) = if i == 0 { (0.0, 0.0) } else { (self.tenors[i - 1], self.log_dfs[i - 1]) };
        let idx = i.min(self.tenors.len() - 1);
        let (t1, l1) = (self.tenors[idx], self.log_dfs[idx]);
        Ok(l0 + (l1 - l0) * (t - t0) / (t1 - t0))
    }

    /// P(0, t).
    pub fn df(&self, t: f64) -> Result<f64> {
        Ok(self.log_df(t)?.exp())
    }

    /// Instantaneous forward rate f(0, t) = -d log P / dt; piecewise
    /// constant on tenor intervals, right-continuous, left-closed at the
    /// final tenor.
    pub fn instantaneous_forward(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t > self.max_tenor() + 1e-12 {
            return Err(Error::OutsideCurve(t, self.max_tenor()));
        }
        let i = match self.tenors.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => (i + 1).min(self.tenors.len() - 1),
            Err(i) => i.min(self.tenors.len() - 1),
        };
        let (t0, l0) = if i == 0 { (0.0, 0.0) } else { (self.tenors[i - 1], self.log_dfs[i - 1]) };
        let (t1, l1) = (self.tenors[i], self.log_dfs[i]);
        Ok(-(l1 - l0) / (t1 - t0))
    }
}

/// FX forward F_T = S_0 P^f(0,T) / P^d(0,T).
pub fn forward(spot: f64, dom: &DiscountCurve, fgn: &DiscountCurve, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(spot);
    }
    Ok(spot * fgn.df(t)? / dom.df(t)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_curve_reprices_rate() {
        let c = DiscountCurve::flat(0.02, 10.0);
        assert!((c.df(3.3).unwrap() - (-0.02f64 * 3.3).exp()).abs() < 1e-15);
        assert!((c.instantaneous_forward(3.3).unwrap() - 0.02).abs() < 1e-12);
        assert!((c.instantaneous_forward(0.0).unwrap() - 0.02).abs() < 1e-12);
    }

    #[test]
    fn log_linear_forward_is_segment_slope() {
        let c = DiscountCurve::new(vec![1.0, 2.0, 4.0], vec![0.99, 0.97, 0.92]).unwrap();
        let expected = -((0.92f64).ln() - (0.97f64).ln()) / 2.0;
        assert!((c.instantaneous_forward(3.0).unwrap() - expected).abs() < 1e-14);
        // Constant within the segment.
        assert_eq!(
            c.instantaneous_forward(2.5).unwrap(),
            c.instantaneous_forward(3.9).unwrap()
        );
    }

    #[test]
    fn forward_examples() {
        let dom = DiscountCurve::new(vec![1.0], vec![0.95]).unwrap();
        let fgn = DiscountCurve::new(vec![1.0], vec![0.90]).unwrap();
        let f = forward(1.1, &dom, &fgn, 1.0).unwrap();
        assert!((f - 1.0421052631578947).abs() < 1e-12);
        // Equal curves: forward equals spot.
        let f2 = forward(1.1, &dom, &dom, 1.0).unwrap();
        assert!((f2 - 1.1).abs() < 1e-15);
        // T = 0 exactly.
        assert_eq!(forward(1.1, &dom, &fgn, 0.0).unwrap(), 1.1);
    }

    #[test]
    fn rejects_time_beyond_coverage() {
        let c = DiscountCurve::new(vec![1.0], vec![0.95]).unwrap();
        assert!(c.df(1.5).is_err());
        assert!(c.instantaneous_forward(-0.1).is_err());
    }

    #[test]
    fn df_at_zero_is_one() {
        let c = DiscountCurve::new(vec![2.0], vec![0.9]).unwrap();
        assert_eq!(c.df(0.0).unwrap(), 1.0);
    }
}
