//! Lowest eigenpairs of a sparse symmetric operator.
//!
//! Each run is a Lanczos iteration with full reorthogonalization from a seeded
//! random start, deflated against the eigenvectors already locked. One run
//! locks one eigenpair, so degenerate levels are found one copy at a time.
//! The search stops once `d` pairs are locked and a further run finds nothing
//! below the `d`-th. A diagonal operator is answered exactly from its diagonal.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::SparseOperator;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LanczosConfig {
    /// Residual target `‖Hv - λv‖ ≤ tol·‖H‖`.
    pub tol: f64,
    /// Krylov steps allowed per run.
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        LanczosConfig {
            tol: 1e-8,
            max_iter: 3000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpairs {
    /// Nondecreasing.
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// `‖Hv - λv‖` per pair.
    pub residuals: Vec<f64>,
    /// `‖H‖` used to scale the residual target.
    pub norm: f64,
}

pub fn lowest_eigenvalues(op: &SparseOperator, d: usize) -> Result<Eigenpairs> {
    lowest_eigenvalues_with(op, d, &LanczosConfig::default())
}

pub fn lowest_eigenvalues_with(op: &SparseOperator, d: usize, cfg: &LanczosConfig) -> Result<Eigenpairs> {
    if !op.is_hermitian() {
        return Err(Error::invalid("Lanczos requires a symmetric operator"));
    }
    if d == 0 {
        return Err(Error::invalid("number of eigenvalues d must be at least 1"));
    }
    let n = op.dimension();
    if d > n {
        return Err(Error::domain(format!("{d} eigenvalues requested from dimension {n}")));
    }
    let norm = op.norm_inf().max(f64::MIN_POSITIVE);
    if op.entries().all(|(r, c, _)| r == c) {
        return Ok(diagonal_pairs(op, d, norm));
    }
    let target = cfg.tol * norm;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut locked: Vec<(f64, Vec<f64>)> = Vec::new();
    while locked.len() < n {
        let (theta, v) = lowest_pair(op, &locked, &mut rng, cfg, norm)?;
        if locked.len() >= d {
            let mut vals: Vec<f64> = locked.iter().map(|p| p.0).collect();
            vals.sort_by(f64::total_cmp);
            if theta >= vals[d - 1] - target {
                break;
            }
        }
        locked.push((theta, v));
    }
    locked.sort_by(|a, b| a.0.total_cmp(&b.0));
    locked.truncate(d);
    let mut out = Eigenpairs {
        values: Vec::with_capacity(d),
        vectors: Vec::with_capacity(d),
        residuals: Vec::with_capacity(d),
        norm,
    };
    let mut hv = vec![0.0; n];
    for (theta, v) in locked {
        op.apply(&v, &mut hv);
        let r = hv.iter().zip(&v).map(|(h, x)| (h - theta * x).powi(2)).sum::<f64>().sqrt();
        if r > target {
            return Err(Error::Convergence {
                what: format!("Lanczos eigenpair λ = {theta}"),
                residual: r,
                target,
            });
        }
        out.values.push(theta);
        out.vectors.push(v);
        out.residuals.push(r);
    }
    Ok(out)
}

fn diagonal_pairs(op: &SparseOperator, d: usize, norm: f64) -> Eigenpairs {
    let n = op.dimension();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| op.get(a, a).total_cmp(&op.get(b, b)).then(a.cmp(&b)));
    order.truncate(d);
    Eigenpairs {
        values: order.iter().map(|&i| op.get(i, i)).collect(),
        vectors: order
            .iter()
            .map(|&i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                v
            })
            .collect(),
        residuals: vec![0.0; d],
        norm,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthogonalize(w: &mut [f64], against: impl Iterator<Item = impl AsRef<[f64]>> + Clone) {
    // twice is enough
    for _ in 0..2 {
        for u in against.clone() {
            let u = u.as_ref();
            let c = dot(w, u);
            for (x, y) in w.iter_mut().zip(u) {
                *x -= c * y;
            }
        }
    }
}

/// Lowest eigenpair of `H` on the complement of the locked vectors.
fn lowest_pair(
    op: &SparseOperator,
    locked: &[(f64, Vec<f64>)],
    rng: &mut ChaCha8Rng,
    cfg: &LanczosConfig,
    norm: f64,
) -> Result<(f64, Vec<f64>)> {
    let n = op.dimension();
    let room = n - locked.len();
    let target = cfg.tol * norm;
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    orthogonalize(&mut v, locked.iter().map(|p| &p.1));
    let vn = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= vn);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut best = f64::INFINITY;
    loop {
        op.apply(&v, &mut w);
        let alpha = dot(&v, &w);
        basis.push(v);
        alphas.push(alpha);
        orthogonalize(&mut w, locked.iter().map(|p| &p.1).chain(basis.iter()));
        let beta = dot(&w, &w).sqrt();
        let m = basis.len();
        let exhausted = beta <= 1e-13 * norm || m == room;
        if exhausted || m % 10 == 0 || m >= cfg.max_iter {
            let mut t = DMatrix::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alphas[i];
                if i + 1 < m {
                    t[(i, i + 1)] = betas[i];
                    t[(i + 1, i)] = betas[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let (i, &theta) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("nonempty Krylov space");
            let s = eig.eigenvectors.column(i);
            let estimate = beta * s[m - 1].abs();
            best = best.min(estimate);
            if exhausted || estimate <= 0.1 * target {
                let mut y = vec![0.0; n];
                for (c, b) in s.iter().zip(&basis) {
                    for (yy, bb) in y.iter_mut().zip(b) {
                        *yy += c * bb;
                    }
                }
                let yn = dot(&y, &y).sqrt();
                y.iter_mut().for_each(|x| *x /= yn);
                return Ok((theta, y));
            }
            if m >= cfg.max_iter {
                return Err(Error::Convergence {
                    what: "Lanczos iteration".into(),
                    residual: best,
                    target,
                });
            }
        }
        betas.push(beta);
        v = w.iter().map(|x| x / beta).collect();
    }
}
