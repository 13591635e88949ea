//! Small dense symmetric solvers used by the correlation factorization and
//! the regression estimators. Matrices here are at most 7x7.

use crate::error::{Error, Result};

/// Cholesky factor of a positive semidefinite matrix (row-major, n x n).
///
/// Semidefinite directions produce zero columns; genuine negative pivots
/// below `-tol` are rejected. The factor always satisfies
/// `||L L^T - A||_inf <= ~tol` for valid inputs.
pub fn psd_cholesky(a: &[f64], n: usize, tol: f64) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d > tol {
            let lj = d.sqrt();
            l[j * n + j] = lj;
            for i in j + 1..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / lj;
            }
        } else if d > -tol {
            // Semidefinite pivot: the whole column must vanish.
            for i in j + 1..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if s.abs() > tol.sqrt() {
                    return Err(Error::NotPositiveSemidefinite);
                }
            }
        } else {
            return Err(Error::NotPositiveSemidefinite);
        }
    }
    // Reconstruction check.
    let mut max_err = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            let mut s = 0.0;
            for k in 0..n {
                s += l[i * n + k] * l[j * n + k];
            }
            max_err = max_err.max((s - a[i * n + j]).abs());
        }
    }
    if max_err > 100.0 * tol.max(1e-14) {
        return Err(Error::NotPositiveSemidefinite);
    }
    Ok(l)
}

/// Solve `A x = b` for symmetric positive definite `A` via Cholesky.
/// Errors if a pivot drops below `tol` (rank deficiency).
pub fn solve_spd(a: &[f64], b: &[f64], n: usize, tol: f64) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= tol {
            return Err(Error::RankDeficient);
        }
        let lj = d.sqrt();
        l[j * n + j] = lj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / lj;
        }
    }
    // Forward then backward substitution.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_identity() {
        let a = vec![1.0, 0.0, 0.0, 1.0];
        let l = psd_cholesky(&a, 2, 1e-12).unwrap();
        assert_eq!(l, a);
    }

    #[test]
    fn cholesky_2x2_correlation() {
        let rho = 0.5f64;
        let a = vec![1.0, rho, rho, 1.0];
        let l = psd_cholesky(&a, 2, 1e-12).unwrap();
        assert!((l[0] - 1.0).abs() < 1e-15);
        assert!((l[2] - 0.5).abs() < 1e-15);
        assert!((l[3] - 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cholesky_semidefinite() {
        // Perfectly correlated pair: rank 1, must factor with a zero column.
        let a = vec![1.0, 1.0, 1.0, 1.0];
        let l = psd_cholesky(&a, 2, 1e-12).unwrap();
        assert!((l[3]).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(psd_cholesky(&a, 2, 1e-12).is_err());
    }

    #[test]
    fn spd_solve_roundtrip() {
        let a = vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let x_true = [1.0, -2.0, 0.5];
        let mut b = vec![0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i] += a[i * 3 + j] * x_true[j];
            }
        }
        let x = solve_spd(&a, &b, 3, 1e-14).unwrap();
        for i in 0..3 {
            assert!((x[i] - x_true[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn spd_solve_rejects_singular() {
        let a = vec![1.0, 1.0, 1.0, 1.0];
        assert!(solve_spd(&a, &[1.0, 1.0], 2, 1e-14).is_err());
    }
}
