//! Bogoliubov dispersion, Lee–Huang–Yang sums, energy predictions and the
//! excitation spectrum built from the renormalized two-body coefficients.

pub mod lhy;
pub mod spectrum;

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::lattice::{LowCutoff, Momentum};
use crate::twobody::cache::fmt_f64;
use crate::twobody::RenormalizedCoefficients;

pub use lhy::{lhy_sum_exact, lhy_sum_universal, universal_summand, LhySum};
pub use spectrum::enumerate_excitations;

/// κ at and above which the excitation-spectrum statement no longer applies.
pub const KAPPA_SPECTRUM_LIMIT: f64 = 0.125;
/// Upper end of the admissible κ range.
pub const KAPPA_MAX: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionRecord {
    pub k: Momentum,
    pub mu: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub nu: f64,
}

impl DispersionRecord {
    /// `e_k - A_k + C_k`.
    pub fn summand(&self) -> f64 {
        self.e - self.a + self.c
    }
}

#[derive(Debug, Clone)]
pub struct DispersionTable {
    /// Nonzero lattice modes ordered by `|k|`, then lexicographically.
    pub records: Vec<DispersionRecord>,
    pub epsilon: f64,
    pub particles: usize,
    pub kappa: f64,
    pub low_cutoff: LowCutoff,
    pub cutoff: f64,
}

/// Default low-momentum cutoff: `K = ∞` at κ = 0, otherwise `K = N^{5/16 + κ/2}`
/// (infinite when that exceeds the lattice).
pub fn default_low_cutoff(particles: usize, kappa: f64, q_max: f64) -> LowCutoff {
    if kappa == 0.0 {
        return LowCutoff::Infinite;
    }
    let k = (particles as f64).powf(5.0 / 16.0 + kappa / 2.0);
    if k > q_max {
        LowCutoff::Infinite
    } else {
        LowCutoff::Finite(k)
    }
}

/// Builds `μ_k = 1(|k|<K)4σ_k - 2σ₀ - |k|²w_k²`, `A_k = |k|² + |k|²w_k² + μ_k - ε`,
/// `B_k = 2|k|²w_k`, `C_k = 2|k|²w_k²`, `e_k = √(A_k² - B_k²)`,
/// `α_k = (A_k - e_k)/B_k = B_k/(A_k + e_k)` (zero when `B_k = 0`),
/// `γ_k = 1/√(1 - α_k²)`, `ν_k = α_k γ_k`.
///
/// `B_k` may be negative where `V̂` changes sign; stability requires `A_k > |B_k|`.
pub fn dispersion_table(coeffs: &RenormalizedCoefficients, epsilon: f64) -> Result<DispersionTable> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("ε must be finite and >= 0, got {epsilon}")));
    }
    let cutoff = coeffs.spec.low_cutoff();
    let sigma0 = coeffs.sigma.sigma0;
    let mut modes: Vec<Momentum> = coeffs.w.keys().copied().collect();
    modes.sort_by_key(|k| (k.norm2_int(), *k));
    let mut records = Vec::with_capacity(modes.len());
    for k in modes {
        let w = coeffs.w[&k];
        let k2 = k.norm2();
        let low = if cutoff.admits(k) {
            4.0 * coeffs.sigma.by_mode.get(&k).copied().ok_or_else(|| {
                Error::invalid(format!("σ missing for mode {k} below the low cutoff"))
            })?
        } else {
            0.0
        };
        let mu = low - 2.0 * sigma0 - k2 * w * w;
        let a = k2 + k2 * w * w + mu - epsilon;
        let b = 2.0 * k2 * w;
        let c = 2.0 * k2 * w * w;
        if !(a > b.abs()) {
            return Err(Error::Stability { mode: k.0, a, b });
        }
        let e = ((a - b) * (a + b)).sqrt();
        let alpha = if b == 0.0 { 0.0 } else { b / (a + e) };
        let gamma = 1.0 / ((1.0 - alpha) * (1.0 + alpha)).sqrt();
        records.push(DispersionRecord {
            k,
            mu,
            a,
            b,
            c,
            e,
            alpha,
            gamma,
            nu: alpha * gamma,
        });
    }
    Ok(DispersionTable {
        records,
        epsilon,
        particles: coeffs.particles,
        kappa: coeffs.kappa,
        low_cutoff: cutoff,
        cutoff: coeffs.spec.q_max(),
    })
}

impl DispersionTable {
    /// Modes whose LHY summand `e - A + C` is negative.
    pub fn negative_summands(&self) -> Vec<Momentum> {
        self.records
            .iter()
            .filter(|r| r.summand() < 0.0)
            .map(|r| r.k)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(out, "# k = 2π·(kx, ky, kz)")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kx", "ky", "kz", "mu", "A", "B", "C", "e", "alpha", "gamma", "nu"])?;
        for r in &self.records {
            let mut row: Vec<String> = r.k.0.iter().map(|c| c.to_string()).collect();
            row.extend([r.mu, r.a, r.b, r.c, r.e, r.alpha, r.gamma, r.nu].map(fmt_f64));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `√(|k|⁴ + 16π a N^κ |k|²)` for each mode.
pub fn universal_gaps(a: f64, particles: usize, kappa: f64, modes: &[Momentum]) -> Vec<f64> {
    let c = 16.0 * PI * a * (particles as f64).powf(kappa);
    modes
        .iter()
        .filter(|k| !k.is_zero())
        .map(|k| {
            let x = k.norm2();
            (x * x + c * x).sqrt()
        })
        .collect()
}

/// `λ⁽¹⁾ … λ⁽ᵈ⁾` from the universal gaps of the modes `0 < |k| ≤ q_max`. Only
/// modes with a gap at most `(d - 1)` times the smallest one can contribute, so
/// only those are enumerated.
pub fn universal_spectrum(a: f64, particles: usize, kappa: f64, q_max: f64, d: usize) -> Result<Vec<f64>> {
    let unit = 4.0 * PI * PI;
    let c = 16.0 * PI * a * (particles as f64).powf(kappa);
    let gap_min = (unit * unit + c * unit).sqrt();
    let bound = (d.saturating_sub(1)) as f64 * gap_min;
    // ε(x) = √(x² + c x) ≤ bound
    let x_max = 0.5 * ((c * c + 4.0 * bound * bound).sqrt() - c);
    let radius = (x_max / unit).sqrt().max(1.0) * 2.0 * PI * (1.0 + 1e-12);
    if q_max < 2.0 * PI * (1.0 - 1e-12) {
        return enumerate_excitations(&[], d);
    }
    let spec = crate::lattice::LatticeSpec::new(radius.min(q_max), LowCutoff::Infinite)?;
    enumerate_excitations(&universal_gaps(a, particles, kappa, &spec.enumerate_modes()), d)
}

#[derive(Debug, Clone)]
pub struct EnergyPrediction {
    pub particles: usize,
    pub kappa: f64,
    /// `4π a_L N^κ (N - 1)`.
    pub mean_field: f64,
    pub lhy_exact: LhySum,
    pub lhy_universal: LhySum,
    /// `λ⁽¹⁾ … λ⁽ᵈ⁾` from the universal dispersion on the lattice modes.
    pub lambda: Vec<f64>,
    pub a_l: f64,
    pub scattering_length: f64,
    pub q_max: f64,
    pub low_cutoff: LowCutoff,
    pub warnings: Vec<String>,
}

impl EnergyPrediction {
    pub fn ground_exact(&self) -> f64 {
        self.mean_field + self.lhy_exact.value
    }

    pub fn ground_universal(&self) -> f64 {
        self.mean_field + self.lhy_universal.value
    }
}

/// Ground-state predictions from the coefficient table and the continuum
/// scattering length `a`, plus the first `d_max` excitation levels.
pub fn energy_prediction(
    coeffs: &RenormalizedCoefficients,
    table: &DispersionTable,
    a: f64,
    d_max: usize,
) -> Result<EnergyPrediction> {
    let (n, kappa) = (coeffs.particles, coeffs.kappa);
    if !(0.0..KAPPA_MAX).contains(&kappa) {
        return Err(Error::invalid(format!("κ must lie in [0, 2/3), got {kappa}")));
    }
    let mut warnings = Vec::new();
    if kappa >= KAPPA_SPECTRUM_LIMIT {
        let msg = format!("κ = {kappa} ≥ 1/8: the LHY and spectrum statements are not expected to hold");
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let mean_field = 4.0 * PI * coeffs.a_l * (n as f64).powf(kappa) * (n as f64 - 1.0);
    let lhy_exact = lhy_sum_exact(table);
    let lhy_universal = lhy_sum_universal(a, n, kappa, coeffs.spec.q_max());
    let lambda = if d_max > 0 {
        universal_spectrum(a, n, kappa, coeffs.spec.q_max(), d_max)?
    } else {
        Vec::new()
    };
    Ok(EnergyPrediction {
        particles: n,
        kappa,
        mean_field,
        lhy_exact,
        lhy_universal,
        lambda,
        a_l: coeffs.a_l,
        scattering_length: a,
        q_max: coeffs.spec.q_max(),
        low_cutoff: coeffs.spec.low_cutoff(),
        warnings,
    })
}
