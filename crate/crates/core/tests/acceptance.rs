//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints exactly one PASS/FAIL line; exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use bosegas::bogoliubov::{dispersion_table, enumerate_excitations, lhy_sum_exact, lhy_sum_universal, universal_summand};
use bosegas::fock::{
    build_sector, dense_two_body_ground, first_order_energy, hamiltonian_at_scale, lowest_eigenvalues,
    verify_many_body_identity,
};
use bosegas::twobody::{SolverConfig, TwoBodyContext};
use bosegas::{LatticeSpec, LowCutoff, Momentum, Potential, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Frozen direct-summation value of the universal sum at `8πa = 1`, `κ = 0`,
/// `Q = 1000·2π`, tail included (independent long-double point-by-point sum).
const UNIVERSAL_ORACLE: f64 = 0.0026104182376028326;

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: String) -> Self {
        Verdict { passed, detail }
    }
}

fn well() -> Potential {
    Potential::square_well(10.0, 1.0).unwrap()
}

fn context(potential: &Potential, scale: f64, q_max: f64, cutoff: LowCutoff, tol: f64) -> Result<TwoBodyContext> {
    let spec = LatticeSpec::new(q_max, cutoff)?;
    TwoBodyContext::new(potential.clone(), scale, spec, SolverConfig::with_tol(tol)?)
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.abs().ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn scattering_oracle() -> Result<Verdict> {
    let start = Instant::now();
    let sol = well().scattering_length()?;
    let secs = start.elapsed().as_secs_f64();
    let mu = (10.0f64 / 2.0).sqrt();
    let exact = 1.0 - mu.tanh() / mu;
    let rel = (sol.a - exact).abs() / exact.abs();
    Ok(Verdict::new(
        rel <= 1e-8 && secs < 1.0,
        format!("a = {:.12}, closed form {exact:.12}, rel {rel:.2e}, {secs:.3} s", sol.a),
    ))
}

fn box_rate() -> Result<Verdict> {
    let pot = well();
    let a = pot.scattering_length()?.a;
    let start = Instant::now();
    let mut points = Vec::new();
    for l in [8.0, 16.0, 32.0, 64.0] {
        let q = TwoBodyContext::default_q_max(&pot, l);
        let a_l = context(&pot, l, q, LowCutoff::Infinite, 1e-10)?.box_scattering_length()?;
        points.push((l, a_l - a));
    }
    let s = slope(&points);
    let secs = start.elapsed().as_secs_f64();
    let diffs: Vec<String> = points.iter().map(|(l, d)| format!("L={l}: {d:.3e}")).collect();
    Ok(Verdict::new(
        (-1.3..=-0.7).contains(&s) && secs < 300.0,
        format!("slope {s:.3} ({}), {secs:.1} s", diffs.join(", ")),
    ))
}

fn cutoff_independence() -> Result<Verdict> {
    let pot = well();
    let (l, tol) = (8.0, 1e-10);
    let q = TwoBodyContext::default_q_max(&pot, l);
    let small = context(&pot, l, q, LowCutoff::Finite(2.0 * PI), tol)?.box_scattering_length()?;
    let large = context(&pot, l, q, LowCutoff::Finite(8.0 * PI), tol)?.box_scattering_length()?;
    let rel = (small - large).abs() / large.abs();
    Ok(Verdict::new(
        rel <= 10.0 * tol,
        format!("a_L(2π) = {small:.15}, a_L(8π) = {large:.15}, rel {rel:.2e}"),
    ))
}

/// Conserving tuples `k₁ + k₂ = k₃ + k₄` in lattice units, `Σ|nᵢ| ≤ 20`.
fn sample_tuples(count: usize) -> Vec<[Momentum; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draw = |rng: &mut ChaCha8Rng| Momentum::new(rng.gen_range(-5..=5), rng.gen_range(-5..=5), rng.gen_range(-5..=5));
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (k1, k2, k3) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let k4 = k1 + k2 - k3;
        let total: f64 = [k1, k2, k3, k4].iter().map(|k| (k.norm2_int() as f64).sqrt()).sum();
        if total <= 20.0 {
            out.push([k1, k2, k3, k4]);
        }
    }
    out
}

fn coefficient_flatness() -> Result<Verdict> {
    let pot = well();
    let eight_pi_a = 8.0 * PI * pot.scattering_length()?.a;
    let tuples = sample_tuples(50);
    let mut maxima = Vec::new();
    for l in [8.0, 16.0, 32.0] {
        let q = TwoBodyContext::default_q_max(&pot, l).max(2.0 * PI * 12.0);
        let ctx = context(&pot, l, q, LowCutoff::Infinite, 1e-10)?;
        let mut worst = 0.0f64;
        for [k1, k2, k3, k4] in &tuples {
            let el = ctx.renorm_element(*k1, *k2, *k3, *k4)?;
            let weight = 1.0 + k1.norm() + k2.norm() + k3.norm() + k4.norm();
            worst = worst.max((l * el - eight_pi_a).abs() / weight);
        }
        maxima.push(worst);
    }
    let ratios = [maxima[1] / maxima[0], maxima[2] / maxima[1]];
    Ok(Verdict::new(
        ratios.iter().all(|r| (0.35..=0.65).contains(r)),
        format!(
            "max deviation {:.3e}, {:.3e}, {:.3e} at L = 8, 16, 32; ratios {:.3}, {:.3}",
            maxima[0], maxima[1], maxima[2], ratios[0], ratios[1]
        ),
    ))
}

fn block_diagonalization() -> Result<Verdict> {
    let pot = well();
    let l = 8.0;
    let mut ok = true;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for tol in [1e-6, 1e-8, 1e-10] {
        let ctx = context(&pot, l, 8.0 * PI, LowCutoff::Infinite, tol)?;
        let r = ctx.verify_block_diagonal(Momentum::ZERO)?;
        let bound = 1e3 * tol * r.h_norm;
        ok &= r.max_deviation <= bound && r.max_coupling <= bound;
        rows.push(format!(
            "tol {tol:.0e}: dev {:.2e}, coupling {:.2e}, bound {bound:.2e}",
            r.max_deviation, r.max_coupling
        ));
        points.push((tol, r.max_deviation));
    }
    let s = slope(&points);
    ok &= (0.7..=1.3).contains(&s);
    Ok(Verdict::new(ok, format!("{}; deviation slope in tol {s:.3}", rows.join("; "))))
}

fn universal_sum() -> Result<Verdict> {
    let a = 1.0 / (8.0 * PI);
    let sum = lhy_sum_universal(a, 1, 0.0, 1000.0 * 2.0 * PI);
    let rel = (sum.value - UNIVERSAL_ORACLE).abs() / UNIVERSAL_ORACLE;
    let k2 = (100.0 * 2.0 * PI).powi(2);
    let asymptote = universal_summand(8.0 * PI * a, k2) * k2 * k2;
    let expected = (16.0 * PI * a).powi(3) / 16.0;
    let asym_rel = (asymptote - expected).abs() / expected;
    Ok(Verdict::new(
        rel <= 1e-6 && asym_rel <= 0.01,
        format!(
            "sum {:.16e} vs oracle {UNIVERSAL_ORACLE:.16e} (rel {rel:.2e}); g|k|⁴ = {asymptote:.6} vs {expected} (rel {asym_rel:.2e})",
            sum.value
        ),
    ))
}

fn lhy_agreement() -> Result<Verdict> {
    // a wide, weak well keeps the default q_max small at N = 1000
    let pot = Potential::square_well(2.4e-5, 50.0)?;
    let a = pot.scattering_length()?.a;
    let mut diffs = Vec::new();
    for n in [100usize, 1000] {
        let l = n as f64;
        let q = TwoBodyContext::default_q_max(&pot, l);
        let ctx = context(&pot, l, q, LowCutoff::Infinite, 1e-10)?;
        let co = ctx.coefficients(n, 0.0, &[])?;
        let exact = lhy_sum_exact(&dispersion_table(&co, 0.0)?);
        let universal = lhy_sum_universal(a, n, 0.0, q);
        diffs.push((exact.value - universal.value).abs());
    }
    let shrink = diffs[0] / diffs[1];
    Ok(Verdict::new(
        shrink >= 3.0,
        format!("|diff| {:.4e} at N=100, {:.4e} at N=1000, shrink {shrink:.2}x", diffs[0], diffs[1]),
    ))
}

/// All occupation sums `Σ n_k ε_k ≤ (d-1)·min ε`, each accumulated in sorted-gap order.
fn exhaustive_levels(gaps: &[f64], d: usize) -> Vec<f64> {
    let mut eps = gaps.to_vec();
    eps.sort_by(f64::total_cmp);
    let bound = (d - 1) as f64 * eps[0] * (1.0 + 1e-12);
    let mut occupations = vec![vec![]];
    for &e in &eps {
        let mut next = Vec::new();
        for occ in &occupations {
            let used: f64 = occ.iter().zip(&eps).map(|(&c, &g)| c as f64 * g).sum();
            let mut c = 0u32;
            while used + c as f64 * e <= bound {
                let mut o: Vec<u32> = occ.clone();
                o.push(c);
                next.push(o);
                c += 1;
            }
        }
        occupations = next;
    }
    let mut sums: Vec<f64> = occupations
        .iter()
        .map(|occ| {
            let mut s = 0.0;
            for (&c, &g) in occ.iter().zip(&eps) {
                if c > 0 {
                    s += c as f64 * g;
                }
            }
            s
        })
        .collect();
    sums.sort_by(f64::total_cmp);
    sums.truncate(d);
    sums
}

fn excitation_enumeration() -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut mismatches = 0;
    for _ in 0..20 {
        let modes = rng.gen_range(3..=5);
        let d = rng.gen_range(1..=50);
        let gaps: Vec<f64> = (0..modes)
            .map(|_| {
                // half of the instances use integer gaps to force ties
                if rng.gen_bool(0.5) {
                    rng.gen_range(1..=6) as f64
                } else {
                    rng.gen_range(0.5..5.0)
                }
            })
            .collect();
        if enumerate_excitations(&gaps, d)? != exhaustive_levels(&gaps, d) {
            mismatches += 1;
        }
    }
    Ok(Verdict::new(mismatches == 0, format!("{mismatches} of 20 instances differ")))
}

fn many_body_identity() -> Result<Verdict> {
    let spec = LatticeSpec::with_radius(1.0, LowCutoff::Infinite)?;
    let sector = build_sector(3, &spec, None)?;
    let ctx = TwoBodyContext::new(well(), 3.0, spec, SolverConfig::default())?;
    let r = verify_many_body_identity(&sector, &ctx)?;
    let herm = 1e-12 * r.h_norm.max(1.0);
    Ok(Verdict::new(
        r.passed() && r.lhs_asymmetry <= herm && r.rhs_asymmetry <= herm,
        format!(
            "dim {}, deviation {:.2e} (bound {:.2e}), asymmetry {:.1e} / {:.1e}",
            r.dimension, r.max_deviation, r.threshold, r.lhs_asymmetry, r.rhs_asymmetry
        ),
    ))
}

fn ed_cross_check() -> Result<Verdict> {
    let spec = LatticeSpec::with_radius(2.0, LowCutoff::Infinite)?;
    let sector = build_sector(2, &spec, Some(Momentum::ZERO))?;
    let h = hamiltonian_at_scale(&sector, &well(), 2.0)?;
    let ed = lowest_eigenvalues(&h, 1)?.values[0];
    let dense = dense_two_body_ground(&well(), 2.0, &spec)?;
    let mut ok = (ed - dense).abs() <= 1e-8;
    let mut detail = format!("N=2: {ed:.12} vs dense {dense:.12}");

    let seven = LatticeSpec::with_radius(1.0, LowCutoff::Infinite)?;
    let sector = build_sector(3, &seven, Some(Momentum::ZERO))?;
    for v0 in [0.1, 0.2] {
        let pot = Potential::square_well(v0, 1.0)?;
        let e = lowest_eigenvalues(&hamiltonian_at_scale(&sector, &pot, 3.0)?, 1)?.values[0];
        let ratio = e / first_order_energy(&pot, 3.0, 3);
        ok &= (ratio - 1.0).abs() <= 0.05;
        detail.push_str(&format!("; V0={v0}: E/first-order {ratio:.4}"));
    }
    Ok(Verdict::new(ok, detail))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Verdict>); 10] = [
        ("continuum scattering length vs closed form", scattering_oracle),
        ("box scattering length converges like 1/L", box_rate),
        ("box scattering length independent of K", cutoff_independence),
        ("renormalized coefficients flatten like 1/L", coefficient_flatness),
        ("two-body block diagonalization", block_diagonalization),
        ("universal LHY sum vs frozen oracle", universal_sum),
        ("exact vs universal LHY agreement improves with N", lhy_agreement),
        ("excitation enumeration vs exhaustive search", excitation_enumeration),
        ("many-body identity, N=3 on 7 modes", many_body_identity),
        ("exact diagonalization cross-checks", ed_cross_check),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = check().unwrap_or_else(|e| Verdict::new(false, format!("error: {e}")));
        let status = if verdict.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {status}: {name} [{}] ({:.1} s)",
            i + 1,
            verdict.detail,
            start.elapsed().as_secs_f64()
        );
        failures += usize::from(!verdict.passed);
    }
    println!(
        "criterion 11 N/A : large-N energy and spectrum asymptotics are out of reach of exact \
         diagonalization; covered by criteria 2, 4, 5, 7, 8 and 9"
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
