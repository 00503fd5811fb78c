//! Momentum lattices `2πℤ³ ∩ {|k| ≤ Q_max}`, the low/high pair split and
//! fixed-total-momentum two-body blocks.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};

/// Slack used when comparing squared integer radii against a real cutoff.
const CUTOFF_SLACK: f64 = 1e-9;

/// A lattice momentum `2π·(x, y, z)`, stored by its integer coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Momentum(pub [i32; 3]);

impl Momentum {
    pub const ZERO: Momentum = Momentum([0, 0, 0]);

    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Momentum([x, y, z])
    }

    /// Squared length in units of `(2π)²`.
    pub fn norm2_int(self) -> i64 {
        self.0.iter().map(|&c| (c as i64) * (c as i64)).sum()
    }

    /// `|k|²` in physical units.
    pub fn norm2(self) -> f64 {
        4.0 * PI * PI * self.norm2_int() as f64
    }

    /// `|k|` in physical units.
    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn is_zero(self) -> bool {
        self == Momentum::ZERO
    }

    /// Canonical representative of the orbit under the 48-element cubic group:
    /// absolute values sorted in decreasing order.
    pub fn cubic_orbit_key(self) -> Momentum {
        let mut a = self.0.map(i32::abs);
        a.sort_unstable_by(|x, y| y.cmp(x));
        Momentum(a)
    }
}

impl Add for Momentum {
    type Output = Momentum;
    fn add(self, o: Momentum) -> Momentum {
        Momentum([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Momentum {
    type Output = Momentum;
    fn sub(self, o: Momentum) -> Momentum {
        Momentum([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Momentum {
    type Output = Momentum;
    fn neg(self) -> Momentum {
        Momentum(self.0.map(|c| -c))
    }
}

impl fmt::Display for Momentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2π({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// Low-momentum cutoff `K` for the pair set `𝓛 = ⋃_{|k|<K} {(k,0),(0,k)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LowCutoff {
    Finite(f64),
    Infinite,
}

impl LowCutoff {
    /// `|k| < K`.
    pub fn admits(self, k: Momentum) -> bool {
        match self {
            LowCutoff::Infinite => true,
            LowCutoff::Finite(cut) => k.norm() < cut,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            LowCutoff::Infinite => f64::INFINITY,
            LowCutoff::Finite(c) => c,
        }
    }
}

impl fmt::Display for LowCutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LowCutoff::Infinite => write!(f, "inf"),
            LowCutoff::Finite(c) => write!(f, "{c:.17e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    q_max: f64,
    low_cutoff: LowCutoff,
}

impl LatticeSpec {
    /// `q_max` is the physical radial cutoff; lattice points are `|k| ≤ q_max`.
    pub fn new(q_max: f64, low_cutoff: LowCutoff) -> Result<Self> {
        if !(q_max >= 0.0 && q_max.is_finite()) {
            return Err(Error::invalid(format!("q_max must be finite and >= 0, got {q_max}")));
        }
        if let LowCutoff::Finite(k) = low_cutoff {
            if !(k > 0.0) || k > q_max * (1.0 + CUTOFF_SLACK) + CUTOFF_SLACK {
                return Err(Error::invalid(format!(
                    "low-momentum cutoff K = {k} must lie in (0, q_max = {q_max}] or be infinite"
                )));
            }
        }
        Ok(LatticeSpec {
            q_max,
            low_cutoff,
        })
    }

    /// Cutoff given as a radius in lattice units: `q_max = 2π·radius`.
    pub fn with_radius(radius: f64, low_cutoff: LowCutoff) -> Result<Self> {
        Self::new(2.0 * PI * radius, low_cutoff)
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn low_cutoff(&self) -> LowCutoff {
        self.low_cutoff
    }

    pub fn with_low_cutoff(&self, low_cutoff: LowCutoff) -> Result<Self> {
        Self::new(self.q_max, low_cutoff)
    }

    /// Largest admissible `|n|²` for integer coordinates `n`.
    pub fn max_norm2_int(&self) -> i64 {
        let r = self.q_max / (2.0 * PI);
        (r * r * (1.0 + CUTOFF_SLACK) + CUTOFF_SLACK).floor() as i64
    }

    /// Integer radius bounding the lattice along each axis.
    pub fn axis_radius(&self) -> i32 {
        (self.max_norm2_int() as f64).sqrt().floor() as i32
    }

    pub fn contains(&self, k: Momentum) -> bool {
        k.norm2_int() <= self.max_norm2_int()
    }

    /// Whether the pair `(k₁, k₂)` belongs to `𝓛`.
    pub fn is_low_pair(&self, k1: Momentum, k2: Momentum) -> bool {
        (k2.is_zero() && self.low_cutoff.admits(k1)) || (k1.is_zero() && self.low_cutoff.admits(k2))
    }

    /// Lattice modes, zero first, the rest in lexicographic order of coordinates.
    pub fn enumerate_modes(&self) -> Vec<Momentum> {
        let r = self.axis_radius();
        let max2 = self.max_norm2_int();
        let mut modes = vec![Momentum::ZERO];
        for x in -r..=r {
            for y in -r..=r {
                for z in -r..=r {
                    let k = Momentum::new(x, y, z);
                    if !k.is_zero() && k.norm2_int() <= max2 {
                        modes.push(k);
                    }
                }
            }
        }
        modes
    }

    /// Builds the block of pairs `(P - q, q)` with both momenta in the lattice.
    pub fn build_block(&self, total: Momentum) -> Result<MomentumBlock> {
        let max2 = self.max_norm2_int();
        if (total.norm2_int() as f64).sqrt() > 2.0 * (max2 as f64).sqrt() + CUTOFF_SLACK {
            return Err(Error::domain(format!(
                "total momentum {total} exceeds 2·q_max"
            )));
        }
        let r = self.axis_radius();
        let mut rel = Vec::new();
        for x in -r..=r {
            for y in -r..=r {
                for z in -r..=r {
                    let q = Momentum::new(x, y, z);
                    if q.norm2_int() <= max2 && (total - q).norm2_int() <= max2 {
                        rel.push(q);
                    }
                }
            }
        }
        if rel.is_empty() {
            return Err(Error::domain(format!(
                "no lattice pair carries total momentum {total}"
            )));
        }
        let low: Vec<bool> = rel
            .iter()
            .map(|&q| self.is_low_pair(total - q, q))
            .collect();
        let kinetic = rel
            .iter()
            .map(|&q| (total - q).norm2() + q.norm2())
            .collect();
        let index = rel.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        Ok(MomentumBlock {
            total,
            rel,
            low,
            kinetic,
            index,
        })
    }
}

/// The pairs `(P - q, q)` at fixed total momentum `P`, in lexicographic order of `q`.
#[derive(Debug, Clone)]
pub struct MomentumBlock {
    total: Momentum,
    rel: Vec<Momentum>,
    low: Vec<bool>,
    kinetic: Vec<f64>,
    index: HashMap<Momentum, usize>,
}

impl MomentumBlock {
    pub fn total(&self) -> Momentum {
        self.total
    }

    pub fn len(&self) -> usize {
        self.rel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rel.is_empty()
    }

    /// Relative momenta `q`; the pair is `(P - q, q)`.
    pub fn rel_points(&self) -> &[Momentum] {
        &self.rel
    }

    /// `true` where the pair belongs to `𝓛`.
    pub fn low_mask(&self) -> &[bool] {
        &self.low
    }

    /// `|P - q|² + |q|²`.
    pub fn kinetic_diag(&self) -> &[f64] {
        &self.kinetic
    }

    /// Position of the pair `(k₁, k₂)` with `k₁ + k₂ = P`.
    pub fn position(&self, k1: Momentum, k2: Momentum) -> Option<usize> {
        if k1 + k2 != self.total {
            return None;
        }
        self.index.get(&k2).copied()
    }

    pub fn position_of_rel(&self, q: Momentum) -> Option<usize> {
        self.index.get(&q).copied()
    }

    pub fn low_positions(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.low[i]).collect()
    }
}
