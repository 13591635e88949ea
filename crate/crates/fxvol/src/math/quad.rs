//! Gauss-Legendre quadrature with nodes computed by Newton iteration on
//! the Legendre recurrence.

/// Nodes and weights on the reference interval [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Chebyshev-based initial guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // Legendre P_n(x) and derivative via the three-term recurrence.
                let mut p0 = 1.0;
                let mut p1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Integrate over `[segments[0], segments[last]]` applying the rule on
    /// each sub-segment; exactness is preserved across breakpoints of
    /// piecewise-smooth integrands.
    pub fn integrate_segments<F: FnMut(f64) -> f64>(&self, segments: &[f64], mut f: F) -> f64 {
        let mut acc = 0.0;
        for w in segments.windows(2) {
            if w[1] > w[0] {
                acc += self.integrate(w[0], w[1], &mut f);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        let gl = GaussLegendre::new(8);
        // Degree 15 is the exactness limit for 8 nodes.
        let v = gl.integrate(0.0, 1.0, |x| x.powi(15));
        assert!((v - 1.0 / 16.0).abs() < 1e-15, "got {v}");
    }

    #[test]
    fn exponential_to_machine_precision() {
        let gl = GaussLegendre::new(32);
        let v = gl.integrate(0.0, 2.0, f64::exp);
        let expected = 2.0f64.exp() - 1.0;
        assert!((v - expected).abs() < 1e-13 * expected);
    }

    #[test]
    fn weights_sum_to_interval() {
        for n in [1, 2, 5, 32, 64] {
            let gl = GaussLegendre::new(n);
            let s: f64 = gl.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}: {s}");
        }
    }

    #[test]
    fn segmented_matches_single_interval_for_smooth() {
        let gl = GaussLegendre::new(16);
        let a = gl.integrate(0.0, 3.0, |x| (x * 0.7).sin());
        let b = gl.integrate_segments(&[0.0, 1.0, 2.2, 3.0], |x| (x * 0.7).sin());
        assert!((a - b).abs() < 1e-13);
    }
}
