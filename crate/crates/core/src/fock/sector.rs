//! Fixed-particle-number sectors of the bosonic Fock space over a finite mode set.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Momentum};

pub const MAX_PARTICLES: usize = 6;
pub const MAX_MODES: usize = 33;
pub const DEFAULT_DIMENSION_CAP: usize = 2_000_000;

/// Occupation numbers, one per mode in sector order.
pub type Occupation = Vec<u8>;

#[derive(Debug, Clone)]
pub struct FockSector {
    particles: usize,
    spec: LatticeSpec,
    modes: Vec<Momentum>,
    mode_index: HashMap<Momentum, usize>,
    total: Option<Momentum>,
    basis: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
}

/// All occupations of the lattice modes with `Σ n = N` and, when `total` is
/// given, `Σ n_k k = total`; `None` keeps every total momentum.
pub fn build_sector(particles: usize, spec: &LatticeSpec, total: Option<Momentum>) -> Result<FockSector> {
    build_sector_with_cap(particles, spec, total, DEFAULT_DIMENSION_CAP)
}

pub fn build_sector_with_cap(
    particles: usize,
    spec: &LatticeSpec,
    total: Option<Momentum>,
    cap: usize,
) -> Result<FockSector> {
    if particles > MAX_PARTICLES {
        return Err(Error::domain(format!(
            "N = {particles} exceeds the exact-diagonalization limit {MAX_PARTICLES}"
        )));
    }
    let modes = spec.enumerate_modes();
    if modes.len() > MAX_MODES {
        return Err(Error::domain(format!(
            "{} modes exceed the exact-diagonalization limit {MAX_MODES}",
            modes.len()
        )));
    }
    let mut basis = Vec::new();
    let mut occ = vec![0u8; modes.len()];
    let mut gen = Generator {
        modes: &modes,
        total,
        cap,
        out: &mut basis,
    };
    gen.fill(0, particles, Momentum::ZERO, &mut occ)?;
    let index = basis.iter().enumerate().map(|(i, o)| (o.clone(), i)).collect();
    let mode_index = modes.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    Ok(FockSector {
        particles,
        spec: *spec,
        modes,
        mode_index,
        total,
        basis,
        index,
    })
}

struct Generator<'a> {
    modes: &'a [Momentum],
    total: Option<Momentum>,
    cap: usize,
    out: &'a mut Vec<Occupation>,
}

impl Generator<'_> {
    // ascending counts at each position give lexicographic order
    fn fill(&mut self, i: usize, remaining: usize, p: Momentum, occ: &mut Occupation) -> Result<()> {
        if i == self.modes.len() {
            if remaining == 0 && self.total.is_none_or(|t| t == p) {
                self.push(occ)?;
            }
            return Ok(());
        }
        // the last mode takes whatever is left
        let first = if i + 1 == self.modes.len() { remaining } else { 0 };
        for c in first..=remaining {
            occ[i] = c as u8;
            self.fill(i + 1, remaining - c, add_scaled(p, self.modes[i], c), occ)?;
        }
        occ[i] = 0;
        Ok(())
    }

    fn push(&mut self, occ: &Occupation) -> Result<()> {
        if self.out.len() >= self.cap {
            return Err(Error::domain(format!(
                "sector dimension exceeds the cap {}",
                self.cap
            )));
        }
        self.out.push(occ.clone());
        Ok(())
    }
}

fn add_scaled(p: Momentum, k: Momentum, c: usize) -> Momentum {
    let c = c as i32;
    Momentum([p.0[0] + c * k.0[0], p.0[1] + c * k.0[1], p.0[2] + c * k.0[2]])
}

impl FockSector {
    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn modes(&self) -> &[Momentum] {
        &self.modes
    }

    pub fn mode_index(&self, k: Momentum) -> Option<usize> {
        self.mode_index.get(&k).copied()
    }

    /// `None` for a sector holding every total momentum.
    pub fn total(&self) -> Option<Momentum> {
        self.total
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Occupation] {
        &self.basis
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    pub fn momentum_of(&self, occ: &[u8]) -> Momentum {
        occ.iter()
            .zip(&self.modes)
            .fold(Momentum::ZERO, |p, (&c, &k)| add_scaled(p, k, c as usize))
    }

    /// Kinetic energy `Σ n_k |k|²` of a basis state.
    pub fn kinetic(&self, occ: &[u8]) -> f64 {
        occ.iter()
            .zip(&self.modes)
            .filter(|(&c, _)| c > 0)
            .map(|(&c, k)| c as f64 * k.norm2())
            .sum()
    }

    /// One line per basis state: index, then the occupied modes as `n×k`.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# N = {}, modes = {}, dimension = {}", self.particles, self.modes.len(), self.dimension())?;
        for (i, occ) in self.basis.iter().enumerate() {
            let parts: Vec<String> = occ
                .iter()
                .zip(&self.modes)
                .filter(|(&c, _)| c > 0)
                .map(|(c, k)| format!("{c}×{k}"))
                .collect();
            writeln!(out, "{i} {}", parts.join(" "))?;
        }
        Ok(())
    }
}
