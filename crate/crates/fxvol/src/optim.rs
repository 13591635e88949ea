//! Nelder-Mead downhill simplex minimizer.

/// Simplex settings. `feller_weight` is consumed by the Heston objective
/// builder, not by the search itself.
#[derive(Debug, Clone, Copy)]
pub struct SimplexConfig {
    pub max_iters: usize,
    /// Absolute-plus-relative tolerance on the simplex objective spread.
    pub tolerance: f64,
    /// Absolute coordinate step for the initial simplex.
    pub initial_scale: f64,
    /// Penalty weight on Feller-condition violations.
    pub feller_weight: f64,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        Self { max_iters: 600, tolerance: 1e-12, initial_scale: 0.15, feller_weight: 1e3 }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Standard reflect / expand / contract / shrink Nelder-Mead. Returns the
/// best point seen; non-finite objective values are treated as +inf.
pub fn nelder_mead<F>(mut objective: F, x0: &[f64], cfg: &SimplexConfig) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    assert!(dim >= 1);
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut eval = |x: &[f64]| {
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            1e300
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut p = x0.to_vec();
        p[i] += cfg.initial_scale;
        simplex.push(p);
    }
    let mut scores: Vec<f64> = simplex.iter().map(|p| eval(p)).collect();

    let mut iterations = 0;
    for it in 0..cfg.max_iters {
        iterations = it + 1;
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        if scores[worst] - scores[best] <= cfg.tolerance * (1.0 + scores[best].abs()) {
            break;
        }

        let mut centroid = vec![0.0; dim];
        for &idx in order.iter().take(dim) {
            for d in 0..dim {
                centroid[d] += simplex[idx][d];
            }
        }
        for c in centroid.iter_mut() {
            *c /= dim as f64;
        }

        let reflected: Vec<f64> =
            (0..dim).map(|d| centroid[d] + alpha * (centroid[d] - simplex[worst][d])).collect();
        let f_r = eval(&reflected);

        if f_r < scores[best] {
            let expanded: Vec<f64> =
                (0..dim).map(|d| centroid[d] + gamma * (reflected[d] - centroid[d])).collect();
            let f_e = eval(&expanded);
            if f_e < f_r {
                simplex[worst] = expanded;
                scores[worst] = f_e;
            } else {
                simplex[worst] = reflected;
                scores[worst] = f_r;
            }
            continue;
        }
        if f_r < scores[second_worst] {
            simplex[worst] = reflected;
            scores[worst] = f_r;
            continue;
        }

        let contracted: Vec<f64> =
            (0..dim).map(|d| centroid[d] + rho * (simplex[worst][d] - centroid[d])).collect();
        let f_c = eval(&contracted);
        if f_c < scores[worst] {
            simplex[worst] = contracted;
            scores[worst] = f_c;
            continue;
        }

        let best_point = simplex[best].clone();
        for idx in 0..=dim {
            if idx == best {
                continue;
            }
            for d in 0..dim {
                simplex[idx][d] = best_point[d] + sigma * (simplex[idx][d] - best_point[d]);
            }
            scores[idx] = eval(&simplex[idx]);
        }
    }

    let mut best = 0;
    for i in 1..=dim {
        if scores[i] < scores[best] {
            best = i;
        }
    }
    SimplexResult { x: simplex[best].clone(), value: scores[best], iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converges_on_quadratic_bowl() {
        for dim in 1..=5 {
            let center: Vec<f64> = (0..dim).map(|i| 0.3 * i as f64 - 0.5).collect();
            let c = center.clone();
            let cfg = SimplexConfig { max_iters: 500, ..Default::default() };
            let res = nelder_mead(
                |x| x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum(),
                &vec![1.0; dim],
                &cfg,
            );
            assert!(res.iterations <= 500);
            for (a, b) in res.x.iter().zip(&center) {
                assert!((a - b).abs() < 1e-6, "dim {dim}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rosenbrock_2d() {
        let cfg = SimplexConfig { max_iters: 2000, tolerance: 1e-16, ..Default::default() };
        let res = nelder_mead(
            |x| {
                let (a, b) = (x[0], x[1]);
                (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
            },
            &[-1.2, 1.0],
            &cfg,
        );
        assert!((res.x[0] - 1.0).abs() < 1e-3 && (res.x[1] - 1.0).abs() < 1e-3, "{:?}", res.x);
    }

    #[test]
    fn penalty_steers_to_feasible_region() {
        // Minimize (xi - 0.9)^2 with a Feller-style penalty for xi^2 > 2 k t;
        // fixed k t = 0.08 means the feasible ceiling is xi ~ 0.283.
        let cfg = SimplexConfig { max_iters: 1000, ..Default::default() };
        let kt = 0.04;
        let res = nelder_mead(
            |x| {
                let xi = x[0];
                (xi - 0.9) * (xi - 0.9) + 1e4 * (xi * xi - 2.0 * kt).max(0.0).powi(2)
            },
            &[0.9],
            &cfg,
        );
        let xi = res.x[0];
        assert!(xi * xi <= 2.0 * kt + 5e-3, "penalized solution xi = {xi}");
    }

    #[test]
    fn handles_non_finite_objective() {
        let cfg = SimplexConfig::default();
        let res = nelder_mead(
            |x| if x[0] < 0.0 { f64::NAN } else { (x[0] - 2.0) * (x[0] - 2.0) },
            &[1.0],
            &cfg,
        );
        assert!((res.x[0] - 2.0).abs() < 1e-6);
    }
}
