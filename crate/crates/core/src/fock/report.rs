//! Exact-diagonalization energies next to the Bogoliubov predictions.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};

use super::hamiltonian::build_hamiltonian;
use super::lanczos::lowest_eigenvalues;
use super::sector::build_sector;
use crate::bogoliubov::{dispersion_table, energy_prediction};
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Momentum};
use crate::potential::Potential;
use crate::twobody::cache::fmt_f64;
use crate::twobody::{SolverConfig, TwoBodyContext};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdRow {
    pub particles: usize,
    pub kappa: f64,
    /// Level index, starting at 1 for the ground state.
    pub level: usize,
    pub e_ed: f64,
    /// `E^(d) - E^(1)`.
    pub gap_ed: f64,
    pub mean_field: f64,
    pub lhy_exact: f64,
    pub lhy_universal: f64,
    pub lambda: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EdReport {
    pub rows: Vec<EdRow>,
    pub warnings: Vec<String>,
}

/// For each `N`: the `d` lowest ED levels in the sector of total momentum
/// `total` (`None` for all momenta) at `L = N^{1-κ}`, with the mean-field and
/// LHY predictions and `λ^(d)` from the same lattice. No pass/fail is implied.
pub fn ed_report(
    particles: &[usize],
    kappa: f64,
    potential: &Potential,
    spec: &LatticeSpec,
    d: usize,
    total: Option<Momentum>,
    solver: SolverConfig,
) -> Result<EdReport> {
    let a = potential.scattering_length()?.a;
    let mut report = EdReport::default();
    for &n in particles {
        if n < 2 {
            return Err(Error::invalid(format!("N must be at least 2, got {n}")));
        }
        let sector = build_sector(n, spec, total)?;
        let h = build_hamiltonian(&sector, potential, n, kappa)?;
        let levels = lowest_eigenvalues(&h, d.min(sector.dimension()))?;
        let scale = (n as f64).powf(1.0 - kappa);
        let ctx = TwoBodyContext::new(potential.clone(), scale, *spec, solver)?;
        let coeffs = ctx.coefficients(n, kappa, &[])?;
        let table = dispersion_table(&coeffs, 0.0)?;
        let pred = energy_prediction(&coeffs, &table, a, d)?;
        report.warnings.extend(pred.warnings.iter().cloned());
        for (i, (&e, &r)) in levels.values.iter().zip(&levels.residuals).enumerate() {
            report.rows.push(EdRow {
                particles: n,
                kappa,
                level: i + 1,
                e_ed: e,
                gap_ed: e - levels.values[0],
                mean_field: pred.mean_field,
                lhy_exact: pred.lhy_exact.value,
                lhy_universal: pred.lhy_universal.value,
                lambda: pred.lambda[i],
                residual: r,
            });
        }
    }
    Ok(report)
}

impl EdReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "N", "kappa", "d", "E_ed", "gap_ed", "mean_field", "lhy_exact", "lhy_universal", "lambda_d", "residual",
        ])?;
        for r in &self.rows {
            let mut row = vec![r.particles.to_string(), fmt_f64(r.kappa), r.level.to_string()];
            row.extend(
                [r.e_ed, r.gap_ed, r.mean_field, r.lhy_exact, r.lhy_universal, r.lambda, r.residual].map(fmt_f64),
            );
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Lowest eigenvalue of `-Δ₂ + V_L` on the exchange-symmetric functions of the
/// `P = 0` pair block, by dense diagonalization.
pub fn dense_two_body_ground(potential: &Potential, scale: f64, spec: &LatticeSpec) -> Result<f64> {
    let ctx = TwoBodyContext::new(potential.clone(), scale, *spec, SolverConfig::default())?;
    let sys = ctx.block_system(Momentum::ZERO)?;
    let block = sys.block();
    let n = block.len();
    let mut h = DMatrix::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for i in 0..n {
        e[i] = 1.0;
        sys.apply_full(&e, &mut col);
        e[i] = 0.0;
        for r in 0..n {
            h[(r, i)] = col[r];
        }
    }
    // basis (e_q + e_{-q})/√2, or e_0
    let mut sym: Vec<Vec<(usize, f64)>> = Vec::new();
    for (i, &q) in block.rel_points().iter().enumerate() {
        let j = block.position_of_rel(-q).expect("the P = 0 block is closed under q → -q");
        if i == j {
            sym.push(vec![(i, 1.0)]);
        } else if i < j {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            sym.push(vec![(i, s), (j, s)]);
        }
    }
    let m = sym.len();
    let h = &h;
    let mut p = DMatrix::<f64>::zeros(m, m);
    for (a, u) in sym.iter().enumerate() {
        for (b, v) in sym.iter().enumerate() {
            p[(a, b)] = u
                .iter()
                .flat_map(|&(i, x)| v.iter().map(move |&(j, y)| x * y * h[(i, j)]))
                .sum::<f64>();
        }
    }
    Ok(SymmetricEigen::new(p).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// First-order energy of the condensate `|N_0⟩`: `(V_L)_{00,00} N(N-1)/2`.
pub fn first_order_energy(potential: &Potential, scale: f64, particles: usize) -> f64 {
    let n = particles as f64;
    potential.fourier_hat(0.0) / scale * n * (n - 1.0) / 2.0
}
