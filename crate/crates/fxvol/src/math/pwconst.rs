//! Piecewise-constant functions of time, right-continuous on half-open
//! segments `[t_i, t_{i+1})`. The last value extends to infinity.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstant {
    /// `times[0]` must be 0 and times strictly increasing; `values[i]`
    /// applies on `[times[i], times[i+1])`.
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::Invalid(
                "piecewise-constant needs equal, nonempty times/values".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::Invalid("piecewise-constant must start at t=0".into()));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Invalid("breakpoints must be strictly increasing".into()));
            }
        }
        Ok(Self { times, values })
    }

    pub fn constant(value: f64) -> Self {
        Self { times: vec![0.0], values: vec![value] }
    }

    pub fn value(&self, t: f64) -> f64 {
        let idx = self.segment_index(t);
        self.values[idx]
    }

    fn segment_index(&self, t: f64) -> usize {
        match self.times.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Interior breakpoints strictly inside `(a, b)`, ascending.
    pub fn breakpoints_within(&self, a: f64, b: f64) -> Vec<f64> {
        self.times.iter().copied().filter(|&t| t > a && t < b).collect()
    }
}

/// Merge sorted breakpoint lists of several functions within `(a, b)` into
/// the segment endpoints `[a, ..., b]`, deduplicated.
pub fn merged_segments(fns: &[&PiecewiseConstant], a: f64, b: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = vec![a, b];
    for f in fns {
        pts.extend(f.breakpoints_within(a, b));
    }
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    pts
}
