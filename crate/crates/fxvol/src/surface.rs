//! Generic time-slice x strike tables used for local volatility and
//! leverage surfaces.
//!
//! Lookup semantics follow the bootstrap convention: a slice's values
//! apply from its own time until the next slice (left-constant in t), the
//! first slice also covers earlier times, strikes interpolate linearly
//! with flat extrapolation beyond the per-slice range.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    LocalVol,
    Leverage,
}

#[derive(Debug, Clone)]
pub struct SliceSurface {
    kind: SurfaceKind,
    times: Vec<f64>,
    strikes: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
    errors: Vec<Vec<f64>>,
}

impl SliceSurface {
    pub fn new(kind: SurfaceKind) -> Self {
        Self { kind, times: Vec::new(), strikes: Vec::new(), values: Vec::new(), errors: Vec::new() }
    }

    /// Surface that is `value` everywhere.
    pub fn constant(kind: SurfaceKind, value: f64) -> Self {
        let mut s = Self::new(kind);
        s.push_slice(0.0, vec![1.0, 2.0], vec![value, value], None).expect("constant surface");
        s
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn push_slice(
        &mut self,
        t: f64,
        strikes: Vec<f64>,
        values: Vec<f64>,
        errors: Option<Vec<f64>>,
    ) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::Invalid(format!("slice time {t} not after {last}")));
            }
        }
        if strikes.len() < 2 || strikes.len() != values.len() {
            return Err(Error::Invalid("slice needs >= 2 strike/value pairs".into()));
        }
        for w in strikes.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Invalid("slice strikes must be ascending".into()));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("slice values must be finite".into()));
        }
        if self.kind == SurfaceKind::LocalVol && values.iter().any(|&v| v < 0.0) {
            return Err(Error::Invalid("local vol values must be nonnegative".into()));
        }
        let errs = errors.unwrap_or_else(|| vec![0.0; values.len()]);
        if errs.len() != values.len() {
            return Err(Error::Invalid("error row length mismatch".into()));
        }
        self.times.push(t);
        self.strikes.push(strikes);
        self.values.push(values);
        self.errors.push(errs);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_slices(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slice_strikes(&self, i: usize) -> &[f64] {
        &self.strikes[i]
    }

    pub fn slice_values(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn slice_errors(&self, i: usize) -> &[f64] {
        &self.errors[i]
    }

    /// Index of the slice governing time `t` (left-constant convention).
    pub fn slice_index(&self, t: f64) -> usize {
        if self.times.is_empty() {
            panic!("lookup on empty surface");
        }
        match self.times.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    }

    /// Linear-in-strike evaluation on slice `i`, flat beyond the range.
    pub fn eval_slice(&self, i: usize, strike: f64) -> f64 {
        let ks = &self.strikes[i];
        let vs = &self.values[i];
        if strike <= ks[0] {
            return vs[0];
        }
        let n = ks.len();
        if strike >= ks[n - 1] {
            return vs[n - 1];
        }
        let j = ks.partition_point(|&k| k <= strike) - 1;
        let lam = (strike - ks[j]) / (ks[j + 1] - ks[j]);
        vs[j] + lam * (vs[j + 1] - vs[j])
    }

    pub fn value(&self, strike: f64, t: f64) -> f64 {
        self.eval_slice(self.slice_index(t), strike)
    }

    /// Bumped copy: value + shift * error, floored at `floor`.
    pub fn bumped(&self, shift: f64, floor: f64) -> Self {
        let values = self
            .values
            .iter()
            .zip(&self.errors)
            .map(|(vs, es)| {
                vs.iter().zip(es).map(|(v, e)| (v + shift * e).max(floor)).collect()
            })
            .collect();
        Self {
            kind: self.kind,
            times: self.times.clone(),
            strikes: self.strikes.clone(),
            values,
            errors: self.errors.clone(),
        }
    }
}
