//! Second-quantized operators on occupation-number bases.
//!
//! Conventions, used everywhere in this module:
//! `a_i |…, n_i, …⟩ = √n_i |…, n_i - 1, …⟩` and
//! `a_i† |…, n_i, …⟩ = √(n_i + 1) |…, n_i + 1, …⟩`.
//! A word `[x₁, x₂, …, x_r]` denotes the product `x₁ x₂ ⋯ x_r` and is applied
//! right to left. For example `a_0† a_0† a_1 a_1 |0, 2, 0⟩ = 2 |2, 0, 0⟩`, and
//! the interaction term `½ Σ V_{jk,mn} a_k† a_j† a_m a_n` takes `|2_0⟩` to
//! `√2 V_{k(-k),00} |1_k 1_{-k}⟩` for each pair `±k`.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::sector::FockSector;
use super::sparse::SparseOperator;
use crate::error::{Error, Result};
use crate::lattice::Momentum;
use crate::potential::{check_no_wrap, Potential};
use crate::twobody::KernelTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

/// Applies a word in place; `None` when the state is annihilated.
pub fn apply_word(occ: &mut [u8], word: &[Ladder]) -> Option<f64> {
    let mut weight: u64 = 1;
    for &op in word.iter().rev() {
        match op {
            Ladder::Annihilate(i) => {
                if occ[i] == 0 {
                    return None;
                }
                weight *= occ[i] as u64;
                occ[i] -= 1;
            }
            Ladder::Create(i) => {
                occ[i] += 1;
                weight *= occ[i] as u64;
            }
        }
    }
    Some((weight as f64).sqrt())
}

/// A linear combination of words.
pub type Terms = Vec<(f64, Vec<Ladder>)>;

/// Matrix of `Σ coef · word` from `source` into `target`; every image must lie
/// in `target`.
pub fn assemble(source: &FockSector, target: &FockSector, terms: &[(f64, Vec<Ladder>)]) -> Result<SparseOperator> {
    let columns: Vec<Result<Vec<(usize, usize, f64)>>> = source
        .basis()
        .par_iter()
        .enumerate()
        .map(|(col, occ)| {
            let mut out = Vec::new();
            let mut scratch = occ.clone();
            for (coef, word) in terms {
                scratch.copy_from_slice(occ);
                if let Some(amp) = apply_word(&mut scratch, word) {
                    let row = target.index_of(&scratch).ok_or_else(|| {
                        Error::domain("operator image leaves the target sector")
                    })?;
                    out.push((row, col, coef * amp));
                }
            }
            Ok(out)
        })
        .collect();
    let mut triplets = Vec::new();
    for c in columns {
        triplets.extend(c?);
    }
    SparseOperator::from_triplets(target.dimension(), source.dimension(), triplets)
}

/// `V_{jk,mn} = L⁻¹ V̂(|k - n|/L)` for momentum-conserving indices, tabulated by
/// the integer norm of the transfer.
pub(crate) fn pair_potential(sector: &FockSector, potential: &Potential, scale: f64) -> KernelTable {
    let two_pi_over_l = 2.0 * PI / scale;
    KernelTable::new(4 * sector.spec().max_norm2_int(), move |n2| {
        potential.fourier_hat(two_pi_over_l * (n2 as f64).sqrt()) / scale
    })
}

/// `Σ_k |k|² a_k† a_k + ½ Σ_{jk,mn} V_{jk,mn} a_k† a_j† a_m a_n` on a sector,
/// with `L = N^{1-κ}`.
pub fn build_hamiltonian(sector: &FockSector, potential: &Potential, particles: usize, kappa: f64) -> Result<SparseOperator> {
    if particles != sector.particles() {
        return Err(Error::invalid(format!(
            "sector holds {} particles, {particles} requested",
            sector.particles()
        )));
    }
    hamiltonian_at_scale(sector, potential, (particles as f64).powf(1.0 - kappa))
}

/// [`build_hamiltonian`] on a torus of explicit scale `L`.
pub fn hamiltonian_at_scale(sector: &FockSector, potential: &Potential, scale: f64) -> Result<SparseOperator> {
    check_no_wrap(potential, scale)?;
    let table = pair_potential(sector, potential, scale);
    let modes = sector.modes();
    let zero = potential.is_zero();
    let rows: Vec<Vec<(usize, usize, f64)>> = sector
        .basis()
        .par_iter()
        .enumerate()
        .map(|(col, occ)| {
            let mut out = vec![(col, col, sector.kinetic(occ))];
            if zero {
                return out;
            }
            let mut scratch = occ.clone();
            for (mi, &m) in modes.iter().enumerate() {
                if occ[mi] == 0 {
                    continue;
                }
                for (ni, &n) in modes.iter().enumerate() {
                    if occ[ni] == 0 || (ni == mi && occ[mi] < 2) {
                        continue;
                    }
                    for (ji, &j) in modes.iter().enumerate() {
                        let Some(ki) = sector.mode_index(m + n - j) else {
                            continue;
                        };
                        let k = modes[ki];
                        let v = 0.5 * table.get((k - n).norm2_int());
                        scratch.copy_from_slice(occ);
                        let word = [
                            Ladder::Create(ki),
                            Ladder::Create(ji),
                            Ladder::Annihilate(mi),
                            Ladder::Annihilate(ni),
                        ];
                        if let Some(amp) = apply_word(&mut scratch, &word) {
                            let row = sector
                                .index_of(&scratch)
                                .expect("interaction conserves particle number and momentum");
                            out.push((row, col, v * amp));
                        }
                    }
                }
            }
            out
        })
        .collect();
    SparseOperator::from_triplets(sector.dimension(), sector.dimension(), rows.into_iter().flatten().collect())
}

/// Largest `|A_{uv}|` between basis states of different total momentum.
pub fn max_cross_momentum(op: &SparseOperator, sector: &FockSector) -> f64 {
    let basis = sector.basis();
    let momenta: Vec<Momentum> = basis.iter().map(|o| sector.momentum_of(o)).collect();
    op.entries()
        .filter(|&(r, c, _)| momenta[r] != momenta[c])
        .map(|(_, _, v)| v.abs())
        .fold(0.0, f64::max)
}
