//! Composite Gauss-Legendre quadrature on finite intervals.

use std::sync::OnceLock;

const ORDER: usize = 16;

/// Nodes and weights of the `ORDER`-point rule on [-1, 1], computed once by
/// Newton iteration on the Legendre polynomial.
fn rule() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Integrates `f` over `[a, b]` split into `panels` equal panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = rule();
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

/// Integrates `f` over consecutive intervals given by sorted `breaks`, with
/// `panels` panels per interval. Used when the integrand has kinks at known
/// points.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(f: F, breaks: &[f64], panels: usize) -> f64 {
    breaks
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], panels))
        .sum()
}
