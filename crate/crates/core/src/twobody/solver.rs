//! Preconditioned conjugate gradients on a masked subspace.

use crate::error::{Error, Result};

/// Default relative residual tolerance for `R` solves.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    None,
    /// Jacobi scaling by the operator diagonal `|P-q|² + |q|² + L⁻¹V̂(0)`.
    #[default]
    KineticDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub preconditioner: Preconditioner,
}

impl SolverConfig {
    pub fn new(tol: f64, max_iter: usize, preconditioner: Preconditioner) -> Result<Self> {
        if !(tol > 0.0 && tol <= 1e-6) {
            return Err(Error::invalid(format!("solver tol must lie in (0, 1e-6], got {tol}")));
        }
        if max_iter == 0 {
            return Err(Error::invalid("solver max_iter must be at least 1"));
        }
        Ok(SolverConfig {
            tol,
            max_iter,
            preconditioner,
        })
    }

    pub fn with_tol(tol: f64) -> Result<Self> {
        Self::new(tol, Self::default().max_iter, Preconditioner::default())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: DEFAULT_TOL,
            max_iter: 2000,
            preconditioner: Preconditioner::KineticDiagonal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final relative residual `‖b - Ax‖ / ‖b‖`, recomputed from scratch.
    pub residual: f64,
}

/// Fixed-order dot product.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for symmetric positive definite `A` acting on the entries
/// where `active` is true. `apply` must leave inactive entries of its output
/// at zero when the input vanishes there; inactive entries of `x` are zero.
pub(crate) fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    active: &[bool],
    diag: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveStats)> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r: Vec<f64> = b
        .iter()
        .zip(active)
        .map(|(&v, &on)| if on { v } else { 0.0 })
        .collect();
    let b_norm = dot(&r, &r).sqrt();
    if b_norm == 0.0 {
        return Ok((x, SolveStats::default()));
    }
    let precondition = |r: &[f64], z: &mut [f64]| match diag {
        Some(d) => {
            for i in 0..n {
                z[i] = if active[i] { r[i] / d[i] } else { 0.0 };
            }
        }
        None => z.copy_from_slice(r),
    };
    let mut z = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    // outer loop restarts from the true residual if the recursive one drifted
    loop {
        precondition(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while iterations < cfg.max_iter {
            if dot(&r, &r).sqrt() <= cfg.tol * b_norm {
                break;
            }
            iterations += 1;
            apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            precondition(&r, &mut z);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        apply(&x, &mut ap);
        for i in 0..n {
            r[i] = if active[i] { b[i] - ap[i] } else { 0.0 };
        }
        let residual = dot(&r, &r).sqrt() / b_norm;
        if residual <= cfg.tol {
            return Ok((
                x,
                SolveStats {
                    iterations,
                    residual,
                },
            ));
        }
        if iterations >= cfg.max_iter {
            return Err(Error::Convergence {
                what: "conjugate gradient".into(),
                residual,
                target: cfg.tol,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_plus(n: usize, shift: f64) -> impl Fn(&[f64], &mut [f64]) {
        move |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut v = (2.0 + shift + i as f64) * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= x[i + 1];
                }
                y[i] = v;
            }
        }
    }

    #[test]
    fn solves_tridiagonal_system() {
        let n = 50;
        let a = laplacian_plus(n, 0.5);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let active = vec![true; n];
        let diag: Vec<f64> = (0..n).map(|i| 2.5 + i as f64).collect();
        for d in [None, Some(diag.as_slice())] {
            let (x, stats) = pcg(&a, &b, &active, d, &SolverConfig::default()).unwrap();
            let mut ax = vec![0.0; n];
            a(&x, &mut ax);
            let err = ax.iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
            assert!(err <= 1e-10 * dot(&b, &b).sqrt());
            assert!(stats.residual <= 1e-10);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let (x, stats) = pcg(
            laplacian_plus(3, 0.0),
            &[0.0; 3],
            &[true; 3],
            None,
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(x, vec![0.0; 3]);
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = SolverConfig::new(1e-12, 1, Preconditioner::None).unwrap();
        let b: Vec<f64> = (0..30).map(|i| 1.0 + i as f64).collect();
        let err = pcg(laplacian_plus(30, 0.0), &b, &[true; 30], None, &cfg).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(1e-5, 10, Preconditioner::None).is_err());
        assert!(SolverConfig::new(0.0, 10, Preconditioner::None).is_err());
        assert!(SolverConfig::new(1e-8, 0, Preconditioner::None).is_err());
    }
}
