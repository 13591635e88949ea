//! Not-a-knot cubic spline with analytic first and second derivatives.
//!
//! The not-a-knot end conditions reproduce any cubic polynomial exactly,
//! which keeps the Dupire denominator clean on smooth synthetic smiles.

use crate::error::{Error, Result};

/// C2 cubic spline through `(x_i, y_i)` with not-a-knot boundary conditions.
///
/// Degenerates to a straight line for two points and the unique parabola
/// for three.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    d2: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::Invalid(format!(
                "spline needs >= 2 nodes with matching lengths, got {} / {}",
                n,
                ys.len()
            )));
        }
        for w in xs.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Invalid("spline abscissae must be strictly increasing".into()));
            }
        }
        let d2 = match n {
            2 => vec![0.0; 2],
            3 => {
                // Single parabola through the three points.
                let (h0, h1) = (xs[1] - xs[0], xs[2] - xs[1]);
                let s0 = (ys[1] - ys[0]) / h0;
                let s1 = (ys[2] - ys[1]) / h1;
                let c2 = 2.0 * (s1 - s0) / (h0 + h1);
                vec![c2; 3]
            }
            _ => Self::solve_not_a_knot(&xs, &ys),
        };
        Ok(Self { xs, ys, d2 })
    }

    /// Tridiagonal solve for the interior second derivatives with the
    /// not-a-knot ends eliminated by substitution.
    fn solve_not_a_knot(xs: &[f64], ys: &[f64]) -> Vec<f64> {
        let n = xs.len();
        let m = n - 2; // unknowns d2[1..n-1]
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for k in 0..m {
            let i = k + 1; // node index
            sub[k] = h[i - 1];
            diag[k] = 2.0 * (h[i - 1] + h[i]);
            sup[k] = h[i];
            rhs[k] = 6.0 * (slope[i] - slope[i - 1]);
        }
        // Not-a-knot at the left: d2[0] = d2[1] - h0*(d2[2]-d2[1])/h1.
        diag[0] += h[0] + h[0] * h[0] / h[1];
        sup[0] -= h[0] * h[0] / h[1];
        // Not-a-knot at the right: d2[n-1] = d2[n-2] + h[n-2]*(d2[n-2]-d2[n-3])/h[n-3].
        let l = m - 1;
        diag[l] += h[n - 2] + h[n - 2] * h[n - 2] / h[n - 3];
        sub[l] -= h[n - 2] * h[n - 2] / h[n - 3];

        // Thomas algorithm.
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        c[0] = sup[0] / diag[0];
        d[0] = rhs[0] / diag[0];
        for k in 1..m {
            let denom = diag[k] - sub[k] * c[k - 1];
            c[k] = sup[k] / denom;
            d[k] = (rhs[k] - sub[k] * d[k - 1]) / denom;
        }
        let mut interior = vec![0.0; m];
        interior[l] = d[l];
        for k in (0..l).rev() {
            interior[k] = d[k] - c[k] * interior[k + 1];
        }

        let mut d2 = vec![0.0; n];
        d2[1..n - 1].copy_from_slice(&interior);
        d2[0] = d2[1] - h[0] * (d2[2] - d2[1]) / h[1];
        d2[n - 1] = d2[n - 2] + h[n - 2] * (d2[n - 2] - d2[n - 3]) / h[n - 3];
        d2
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// Value, first, and second derivative at `x`, with `x` clamped to the
    /// knot range.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let x = x.clamp(self.x_min(), self.x_max());
        let i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        let v = a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.d2[i] + (b * b * b - b) * self.d2[i + 1]) * h * h / 6.0;
        let dv = (self.ys[i + 1] - self.ys[i]) / h
            - (3.0 * a * a - 1.0) / 6.0 * h * self.d2[i]
            + (3.0 * b * b - 1.0) / 6.0 * h * self.d2[i + 1];
        let d2v = a * self.d2[i] + b * self.d2[i + 1];
        (v, dv, d2v)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_quadratic_exactly() {
        let (a, b, c) = (0.03, -0.01, 0.25);
        let xs: Vec<f64> = (0..11).map(|i| -1.0 + 0.2 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| a + b * x + c * x * x).collect();
        let sp = CubicSpline::new(xs, ys).unwrap();
        for i in 0..41 {
            let x = -1.0 + 0.05 * i as f64;
            let (v, dv, d2v) = sp.eval(x);
            assert!((v - (a + b * x + c * x * x)).abs() < 1e-13, "value at {x}");
            assert!((dv - (b + 2.0 * c * x)).abs() < 1e-12, "d1 at {x}: {dv}");
            assert!((d2v - 2.0 * c).abs() < 1e-11, "d2 at {x}: {d2v}");
        }
    }

    #[test]
    fn reproduces_cubic_exactly() {
        let f = |x: f64| 1.0 + 0.5 * x - 0.3 * x * x + 0.1 * x * x * x;
        let df = |x: f64| 0.5 - 0.6 * x + 0.3 * x * x;
        let xs: Vec<f64> = (0..9).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let sp = CubicSpline::new(xs, ys).unwrap();
        for i in 0..33 {
            let x = i as f64 * 0.125;
            let (v, dv, _) = sp.eval(x);
            assert!((v - f(x)).abs() < 1e-12);
            assert!((dv - df(x)).abs() < 1e-11);
        }
    }

    #[test]
    fn interpolates_nodes() {
        let xs = vec![0.0, 0.7, 1.1, 2.0, 3.5];
        let ys = vec![1.0, -0.4, 0.9, 0.2, 2.0];
        let sp = CubicSpline::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((sp.value(*x) - y).abs() < 1e-14);
        }
    }

    #[test]
    fn three_points_fit_parabola() {
        let sp = CubicSpline::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 5.0]).unwrap();
        // Parabola through (0,1),(1,2),(2,5): y = 1 + x^2 - ... solve: a=1, b+c=1, 2b+4c=4 -> c=1, b=0.
        let (v, dv, d2v) = sp.eval(0.5);
        assert!((v - 1.25).abs() < 1e-14);
        assert!((dv - 1.0).abs() < 1e-14);
        assert!((d2v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn clamps_outside_range() {
        let sp = CubicSpline::new(vec![0.0, 1.0], vec![2.0, 3.0]).unwrap();
        assert_eq!(sp.value(-5.0), 2.0);
        assert_eq!(sp.value(9.0), 3.0);
    }

    #[test]
    fn rejects_unsorted() {
        assert!(CubicSpline::new(vec![0.0, 0.0, 1.0], vec![1.0, 2.0, 3.0]).is_err());
    }
}
