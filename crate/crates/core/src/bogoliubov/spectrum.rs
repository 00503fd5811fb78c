//! The `d` smallest values of `Σ n_k ε_k` over occupations `n_k ∈ ℕ₀`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// A multiset of sorted-gap indices, stored as `base` (the sum over indices
/// below `last`, accumulated in index order) plus `count` copies of `last`.
#[derive(Debug, Clone, Copy)]
struct State {
    sum: f64,
    base: f64,
    last: usize,
    count: u32,
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for State {}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for State {
    // reversed for a min-heap; ties broken by index for determinism
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .sum
            .total_cmp(&self.sum)
            .then_with(|| other.last.cmp(&self.last))
            .then_with(|| other.count.cmp(&self.count))
    }
}

/// Returns `λ⁽¹⁾ ≤ … ≤ λ⁽ᵈ⁾`, starting with `λ⁽¹⁾ = 0` (all `n_k = 0`), with
/// multiplicities. Gaps are sorted ascending; a multiset `i₁ ≤ … ≤ i_r` has the
/// two successors "repeat `i_r`" and "replace `i_r` by `i_r + 1`", so every
/// multiset is reached exactly once and sums never decrease along an edge.
/// Each sum is accumulated as `Σ n_k ε_k` in sorted-gap order.
pub fn enumerate_excitations(gaps: &[f64], d: usize) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::invalid("number of excitation levels d must be at least 1"));
    }
    if let Some(g) = gaps.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::invalid(format!("excitation gaps must be positive and finite, got {g}")));
    }
    if gaps.is_empty() && d > 1 {
        return Err(Error::domain(format!(
            "only one level exists without modes, {d} requested"
        )));
    }
    let mut eps = gaps.to_vec();
    eps.sort_by(f64::total_cmp);

    let mut out = Vec::with_capacity(d);
    out.push(0.0);
    let mut heap = BinaryHeap::new();
    if !eps.is_empty() {
        heap.push(State {
            sum: eps[0],
            base: 0.0,
            last: 0,
            count: 1,
        });
    }
    while out.len() < d {
        let s = heap.pop().expect("the heap of an infinite enumeration never empties");
        out.push(s.sum);
        let e = eps[s.last];
        let count = s.count + 1;
        heap.push(State {
            sum: s.base + count as f64 * e,
            count,
            ..s
        });
        if s.last + 1 < eps.len() {
            let base = if s.count > 1 {
                s.base + (s.count - 1) as f64 * e
            } else {
                s.base
            };
            heap.push(State {
                sum: base + eps[s.last + 1],
                base,
                last: s.last + 1,
                count: 1,
            });
        }
    }
    Ok(out)
}

/// Exhaustive reference: all occupations with `Σ n_k ε_k ≤ (d-1)·min ε`,
/// summed in sorted-gap order, sorted, truncated to `d`.
pub fn enumerate_excitations_brute_force(gaps: &[f64], d: usize) -> Vec<f64> {
    let mut eps = gaps.to_vec();
    eps.sort_by(f64::total_cmp);
    if eps.is_empty() {
        return vec![0.0];
    }
    let bound = (d.saturating_sub(1)) as f64 * eps[0] * (1.0 + 1e-12);
    let mut sums = Vec::new();
    let mut n = vec![0u32; eps.len()];
    fn rec(i: usize, partial_bound: f64, eps: &[f64], n: &mut Vec<u32>, bound: f64, sums: &mut Vec<f64>) {
        if i == eps.len() {
            let mut s = 0.0;
            for (k, &c) in n.iter().enumerate() {
                if c > 0 {
                    s += c as f64 * eps[k];
                }
            }
            sums.push(s);
            return;
        }
        let mut c = 0;
        while partial_bound + c as f64 * eps[i] <= bound {
            n[i] = c;
            rec(i + 1, partial_bound + c as f64 * eps[i], eps, n, bound, sums);
            c += 1;
        }
        n[i] = 0;
    }
    rec(0, 0.0, &eps, &mut n, bound, &mut sums);
    sums.sort_by(f64::total_cmp);
    sums.truncate(d);
    sums
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_modes() {
        let v = enumerate_excitations(&[1.5, 1.0], 6).unwrap();
        assert_eq!(v, vec![0.0, 1.0, 1.5, 2.0, 2.5, 3.0]);
    }

    #[test]
    fn ground_level_and_degeneracy() {
        assert_eq!(enumerate_excitations(&[2.0, 2.0, 2.0, 5.0], 1).unwrap(), vec![0.0]);
        let v = enumerate_excitations(&[2.0, 2.0, 2.0, 5.0], 5).unwrap();
        assert_eq!(v, vec![0.0, 2.0, 2.0, 2.0, 4.0]);
    }

    #[test]
    fn errors() {
        assert!(matches!(enumerate_excitations(&[1.0], 0), Err(Error::Invalid(_))));
        assert!(matches!(enumerate_excitations(&[0.0], 2), Err(Error::Invalid(_))));
        assert!(matches!(enumerate_excitations(&[], 2), Err(Error::Domain(_))));
        assert_eq!(enumerate_excitations(&[], 1).unwrap(), vec![0.0]);
    }

    proptest! {
        #[test]
        fn matches_brute_force(gaps in prop::collection::vec(0.1f64..10.0, 3..=5), d in 1usize..=50) {
            let fast = enumerate_excitations(&gaps, d).unwrap();
            prop_assert!(fast.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(fast, enumerate_excitations_brute_force(&gaps, d));
        }

        #[test]
        fn integer_gaps_have_exact_multiplicities(gaps in prop::collection::vec(1u8..5, 3..=5), d in 1usize..=40) {
            let g: Vec<f64> = gaps.iter().map(|&x| x as f64).collect();
            prop_assert_eq!(enumerate_excitations(&g, d).unwrap(), enumerate_excitations_brute_force(&g, d));
        }
    }
}
