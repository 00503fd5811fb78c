//! Lattice sums for the Lee–Huang–Yang correction.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::DispersionTable;

/// A truncated lattice sum with its correction for the modes beyond the cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LhySum {
    /// Best estimate of the infinite-lattice sum.
    pub value: f64,
    /// Sum over the lattice modes `0 < |k| ≤ Q`.
    pub partial: f64,
    /// Magnitude of the correction applied for `|k| > Q`; always `≥ 0`.
    pub tail_estimate: f64,
    pub cutoff: f64,
}

/// `g_k = √(|k|⁴ + 2b|k|²) - |k|² - b + b²/(2|k|²)` at `x = |k|²`, written
/// without cancellation as `b²(2bx/(s+x) + b) / (2x(s+x+b))`, `s = √(x² + 2bx)`.
pub fn universal_summand(b: f64, x: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let s = (x * x + 2.0 * b * x).sqrt();
    b * b * (2.0 * b * x / (s + x) + b) / (2.0 * x * (s + x + b))
}

/// `r₃(m)`: number of integer vectors with `|n|² = m`, for `m ≤ max`.
pub fn shell_counts(max: usize) -> Vec<u64> {
    let n = (max as f64).sqrt().floor() as usize;
    let mut r1 = vec![0.0; max + 1];
    r1[0] = 1.0;
    for z in 1..=n {
        if z * z <= max {
            r1[z * z] = 2.0;
        }
    }
    let mut r2 = vec![0u64; max + 1];
    for x in 0..=n {
        for y in 0..=n {
            let m = x * x + y * y;
            if m > max {
                break;
            }
            r2[m] += match (x, y) {
                (0, 0) => 1,
                (0, _) | (_, 0) => 2,
                _ => 4,
            };
        }
    }
    let size = (2 * max + 1).next_power_of_two();
    let mut a: Vec<Complex64> = (0..size)
        .map(|i| Complex64::new(if i <= max { r2[i] as f64 } else { 0.0 }, 0.0))
        .collect();
    let mut b: Vec<Complex64> = (0..size)
        .map(|i| Complex64::new(if i <= max { r1[i] } else { 0.0 }, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut a);
    planner.plan_fft_forward(size).process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    planner.plan_fft_inverse(size).process(&mut a);
    a[..=max]
        .iter()
        .map(|z| (z.re / size as f64).round() as u64)
        .collect()
}

/// `½ Σ_{0<|k|≤Q} g_k` with `b = 8π a N^κ`, plus the tail
/// `½ ∫_{|k|>Q} b³/(2|k|⁴) d³k/(2π)³ = b³/(8π²Q)`.
pub fn lhy_sum_universal(a: f64, particles: usize, kappa: f64, q_max: f64) -> LhySum {
    let b = 8.0 * PI * a * (particles as f64).powf(kappa);
    let r = q_max / (2.0 * PI);
    let max = (r * r * (1.0 + 1e-12)).floor() as usize;
    if b == 0.0 || max == 0 {
        let tail = if q_max > 0.0 { b.powi(3) / (8.0 * PI * PI * q_max) } else { 0.0 };
        return LhySum {
            value: tail,
            partial: 0.0,
            tail_estimate: tail,
            cutoff: q_max,
        };
    }
    let counts = shell_counts(max);
    let unit = 4.0 * PI * PI;
    let partial = 0.5
        * counts
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &c)| c > 0)
            .map(|(m, &c)| c as f64 * universal_summand(b, unit * m as f64))
            .sum::<f64>();
    let tail = b.powi(3) / (8.0 * PI * PI * q_max);
    LhySum {
        value: partial + tail,
        partial,
        tail_estimate: tail,
        cutoff: q_max,
    }
}

/// `½ Σ_k (e_k - A_k + C_k)` over the table in its stored order (by `|k|`,
/// then lexicographic). Beyond the cutoff the summand decays like `|k|⁻⁴`, so
/// the partial sums behave as `S(Q) = S∞ - c/Q`; the value is the Richardson
/// extrapolation `2S(Q) - S(Q/2)` and the tail estimate its distance from `S(Q)`.
pub fn lhy_sum_exact(table: &DispersionTable) -> LhySum {
    let q = table.cutoff;
    let half_sq = (q / 2.0).powi(2) * (1.0 + 1e-12);
    let mut partial = 0.0;
    let mut inner = 0.0;
    for rec in &table.records {
        let s = 0.5 * rec.summand();
        partial += s;
        if rec.k.norm2() <= half_sq {
            inner += s;
        }
    }
    let value = 2.0 * partial - inner;
    LhySum {
        value,
        partial,
        tail_estimate: (value - partial).abs(),
        cutoff: q,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_counts(max: usize) -> Vec<u64> {
        let n = (max as f64).sqrt() as i64 + 1;
        let mut c = vec![0; max + 1];
        for x in -n..=n {
            for y in -n..=n {
                for z in -n..=n {
                    let m = (x * x + y * y + z * z) as usize;
                    if m <= max {
                        c[m] += 1;
                    }
                }
            }
        }
        c
    }

    #[test]
    fn shell_counts_match_brute_force() {
        assert_eq!(shell_counts(400), brute_counts(400));
        assert_eq!(&shell_counts(3)[..], &[1, 6, 12, 8]);
    }

    #[test]
    fn summand_matches_naive_form() {
        for (b, x) in [(1.0f64, 39.0f64), (12.5, 4.0), (0.3, 1e3)] {
            let naive = (x * x + 2.0 * b * x).sqrt() - x - b + b * b / (2.0 * x);
            assert!((universal_summand(b, x) - naive).abs() < 1e-12 * (1.0 + naive.abs()));
        }
    }

    #[test]
    fn summand_asymptote() {
        // g_k |k|⁴ → b³/2 = (16πa)³/16 with c = 2b
        let b = 1.0;
        let k = 2.0 * PI * 100.0;
        let x = k * k;
        let ratio = universal_summand(b, x) * x * x / (b * b * b / 2.0);
        assert!((ratio - 1.0).abs() < 0.01);
    }

    #[test]
    fn zero_scattering_length_gives_zero() {
        let s = lhy_sum_universal(0.0, 100, 0.0, 20.0 * PI);
        assert_eq!(s.value, 0.0);
        assert_eq!(s.tail_estimate, 0.0);
    }

    #[test]
    fn tail_shrinks_with_cutoff() {
        let a = 1.0 / (8.0 * PI);
        let coarse = lhy_sum_universal(a, 1, 0.0, 2.0 * PI * 25.0);
        let fine = lhy_sum_universal(a, 1, 0.0, 2.0 * PI * 50.0);
        assert!(fine.tail_estimate < coarse.tail_estimate);
        assert!((fine.value - coarse.value).abs() < 0.05 * coarse.tail_estimate);
    }
}
