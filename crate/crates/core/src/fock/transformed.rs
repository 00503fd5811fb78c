//! The variables `c_k`, `ψ_{jk}` built from `T - 1`, and the operator identity
//! `Σ_k |k|² c_k† c_k + ½ Σ Ṽ_{jk,mn} ψ_{jk}† ψ_{mn} = H + 𝓡`.
//!
//! `T - 1` is taken from two-body solves on the same lattice as the sector, so
//! every sum closes on the finite mode set and the identity is exact up to the
//! solver tolerance.

use std::collections::{BTreeMap, HashMap};

use super::hamiltonian::{assemble, hamiltonian_at_scale, pair_potential, Ladder, Terms};
use super::sector::{build_sector, FockSector};
use super::sparse::SparseOperator;
use crate::error::{Error, Result};
use crate::lattice::Momentum;
use crate::twobody::TwoBodyContext;

/// Size cap for [`verify_many_body_identity`].
pub const IDENTITY_DIMENSION_LIMIT: usize = 10_000;

/// Nonzero entries `(T - 1)_{jk,mn}` as mode indices `[j, k, m, n]`.
#[derive(Debug, Clone, Default)]
pub struct CorrelationTable {
    pub entries: BTreeMap<[usize; 4], f64>,
}

impl CorrelationTable {
    pub fn build(sector: &FockSector, ctx: &TwoBodyContext) -> Result<Self> {
        check_closure(sector, ctx)?;
        let spec = sector.spec();
        let modes = sector.modes();
        let mut entries = BTreeMap::new();
        for (mi, &m) in modes.iter().enumerate() {
            for (ni, &n) in modes.iter().enumerate() {
                if !spec.is_low_pair(m, n) {
                    continue;
                }
                for (ji, &j) in modes.iter().enumerate() {
                    let Some(ki) = sector.mode_index(m + n - j) else {
                        continue;
                    };
                    let x = ctx.t_minus_one(j, modes[ki], m, n)?;
                    if x != 0.0 {
                        entries.insert([ji, ki, mi, ni], x);
                    }
                }
            }
        }
        Ok(CorrelationTable { entries })
    }

    /// Entries with bra pair `(j, k)` fixed: `(m, n, value)`.
    fn by_bra(&self) -> HashMap<(usize, usize), Vec<(usize, usize, f64)>> {
        let mut out: HashMap<_, Vec<_>> = HashMap::new();
        for (&[j, k, m, n], &x) in &self.entries {
            out.entry((j, k)).or_default().push((m, n, x));
        }
        out
    }

    /// Entries with second bra index `k` fixed: `(j, m, n, value)`.
    fn by_second(&self) -> HashMap<usize, Vec<(usize, usize, usize, f64)>> {
        let mut out: HashMap<_, Vec<_>> = HashMap::new();
        for (&[j, k, m, n], &x) in &self.entries {
            out.entry(k).or_default().push((j, m, n, x));
        }
        out
    }
}

fn check_closure(sector: &FockSector, ctx: &TwoBodyContext) -> Result<()> {
    if sector.spec() != ctx.spec() {
        return Err(Error::domain(
            "the two-body coefficients come from a different lattice than the sector",
        ));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TransformedVariables {
    /// The `N`-particle sector the operators act on.
    pub source: FockSector,
    /// `N - 1` particles, every total momentum.
    pub minus_one: FockSector,
    /// `N - 2` particles, every total momentum.
    pub minus_two: FockSector,
    /// `c_k = a_k + Σ (T-1)_{jk,mn} a_j† a_m a_n`, from `source` to `minus_one`.
    pub c: BTreeMap<Momentum, SparseOperator>,
    /// `ψ_{jk} = a_j a_k + Σ (T-1)_{jk,mn} a_m a_n`, from `source` to `minus_two`.
    pub psi: BTreeMap<(Momentum, Momentum), SparseOperator>,
    pub correlations: CorrelationTable,
}

/// Assembles `c_k` for every mode and `ψ_{jk}` for every ordered pair.
pub fn build_transformed_variables(sector: &FockSector, ctx: &TwoBodyContext) -> Result<TransformedVariables> {
    let n = sector.particles();
    if n < 2 {
        return Err(Error::domain(format!("transformed variables need N ≥ 2, got {n}")));
    }
    let correlations = CorrelationTable::build(sector, ctx)?;
    let minus_one = build_sector(n - 1, sector.spec(), None)?;
    let minus_two = build_sector(n - 2, sector.spec(), None)?;
    let modes = sector.modes();

    let by_second = correlations.by_second();
    let mut c = BTreeMap::new();
    for (ki, &k) in modes.iter().enumerate() {
        let mut terms: Terms = vec![(1.0, vec![Ladder::Annihilate(ki)])];
        for &(j, m, nn, x) in by_second.get(&ki).map(Vec::as_slice).unwrap_or(&[]) {
            terms.push((x, vec![Ladder::Create(j), Ladder::Annihilate(m), Ladder::Annihilate(nn)]));
        }
        c.insert(k, assemble(sector, &minus_one, &terms)?);
    }

    let by_bra = correlations.by_bra();
    let mut psi = BTreeMap::new();
    for (ji, &j) in modes.iter().enumerate() {
        for (ki, &k) in modes.iter().enumerate() {
            let mut terms: Terms = vec![(1.0, vec![Ladder::Annihilate(ji), Ladder::Annihilate(ki)])];
            for &(m, nn, x) in by_bra.get(&(ji, ki)).map(Vec::as_slice).unwrap_or(&[]) {
                terms.push((x, vec![Ladder::Annihilate(m), Ladder::Annihilate(nn)]));
            }
            psi.insert((j, k), assemble(sector, &minus_two, &terms)?);
        }
    }
    Ok(TransformedVariables {
        source: sector.clone(),
        minus_one,
        minus_two,
        c,
        psi,
        correlations,
    })
}

/// `𝓡 = Σ |k|² (T-1)_{j'k,m'n'} (T-1)_{jk,mn} a_{n'}† a_{m'}† a_j† a_{j'} a_m a_n`.
pub fn remainder_operator(sector: &FockSector, correlations: &CorrelationTable) -> Result<SparseOperator> {
    let modes = sector.modes();
    let mut terms: Terms = Vec::new();
    for (k, list) in correlations.by_second().into_iter().collect::<BTreeMap<_, _>>() {
        let k2 = modes[k].norm2();
        if k2 == 0.0 {
            continue;
        }
        for &(jp, mp, np, xp) in &list {
            for &(j, m, n, x) in &list {
                terms.push((
                    k2 * xp * x,
                    vec![
                        Ladder::Create(np),
                        Ladder::Create(mp),
                        Ladder::Create(j),
                        Ladder::Annihilate(jp),
                        Ladder::Annihilate(m),
                        Ladder::Annihilate(n),
                    ],
                ));
            }
        }
    }
    assemble(sector, sector, &terms)
}

#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub dimension: usize,
    /// `max |LHS - (H + 𝓡)|` over matrix elements.
    pub max_deviation: f64,
    /// `‖H‖` as the maximum absolute row sum.
    pub h_norm: f64,
    /// `10³ · tol · ‖H‖`.
    pub threshold: f64,
    pub lhs_asymmetry: f64,
    pub rhs_asymmetry: f64,
    pub solver_tol: f64,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.threshold
    }
}

/// Both sides of the identity on `sector`, with `L` and `T - 1` from `ctx`;
/// `Ṽ = π_𝓛 (V - V R V) π_𝓛 + π_𝓗 V π_𝓗`.
pub fn verify_many_body_identity(sector: &FockSector, ctx: &TwoBodyContext) -> Result<IdentityReport> {
    if sector.dimension() > IDENTITY_DIMENSION_LIMIT {
        return Err(Error::domain(format!(
            "sector dimension {} exceeds the identity check limit {IDENTITY_DIMENSION_LIMIT}",
            sector.dimension()
        )));
    }
    let vars = build_transformed_variables(sector, ctx)?;
    let h = hamiltonian_at_scale(sector, ctx.potential(), ctx.scale())?;
    let r = remainder_operator(sector, &vars.correlations)?;
    let rhs = h.add_scaled(&r, 1.0)?;

    let dim = sector.dimension();
    let mut lhs = SparseOperator::from_triplets(dim, dim, Vec::new())?;
    for (k, ck) in &vars.c {
        let k2 = k.norm2();
        if k2 > 0.0 {
            lhs = lhs.add_scaled(&ck.transpose().matmul(ck)?, k2)?;
        }
    }

    let spec = sector.spec();
    let bare = pair_potential(sector, ctx.potential(), ctx.scale());
    let modes = sector.modes();
    let mut by_total: BTreeMap<Momentum, Vec<(Momentum, Momentum)>> = BTreeMap::new();
    for &j in modes {
        for &k in modes {
            by_total.entry(j + k).or_default().push((j, k));
        }
    }
    for pairs in by_total.values() {
        for &(m, n) in pairs {
            let low_ket = spec.is_low_pair(m, n);
            let renorm = if low_ket {
                let bras: Vec<_> = pairs.iter().copied().filter(|&(j, k)| spec.is_low_pair(j, k)).collect();
                let values = ctx.renorm_elements((m, n), &bras)?;
                bras.into_iter().zip(values).collect::<HashMap<_, _>>()
            } else {
                HashMap::new()
            };
            let psi_mn = &vars.psi[&(m, n)];
            for &(j, k) in pairs {
                let v = match (spec.is_low_pair(j, k), low_ket) {
                    (true, true) => renorm[&(j, k)],
                    (false, false) => bare.get((k - n).norm2_int()),
                    _ => 0.0,
                };
                if v != 0.0 {
                    let term = vars.psi[&(j, k)].transpose().matmul(psi_mn)?;
                    lhs = lhs.add_scaled(&term, 0.5 * v)?;
                }
            }
        }
    }

    Ok(IdentityReport {
        dimension: dim,
        max_deviation: lhs.max_abs_diff(&rhs)?,
        h_norm: h.norm_inf(),
        threshold: 1e3 * ctx.solver().tol * h.norm_inf(),
        lhs_asymmetry: lhs.max_asymmetry(),
        rhs_asymmetry: rhs.max_asymmetry(),
        solver_tol: ctx.solver().tol,
    })
}
