use super::*;
use crate::lattice::LowCutoff;
use proptest::prelude::*;

fn well() -> Potential {
    Potential::square_well(10.0, 1.0).unwrap()
}

fn ctx(potential: Potential, scale: f64, radius: f64, cutoff: LowCutoff) -> TwoBodyContext {
    let spec = LatticeSpec::with_radius(radius, cutoff).unwrap();
    TwoBodyContext::new(potential, scale, spec, SolverConfig::default()).unwrap()
}

fn m(x: i32, y: i32, z: i32) -> Momentum {
    Momentum::new(x, y, z)
}

#[test]
fn free_solve_is_diagonal() {
    let c = ctx(Potential::zero(), 8.0, 3.0, LowCutoff::Infinite);
    let p = m(1, 0, 0);
    let sys = c.block_system(p).unwrap();
    let rhs: Vec<f64> = (0..sys.block().len()).map(|i| 1.0 + i as f64).collect();
    let (x, _) = c.apply_r(p, &rhs).unwrap();
    for i in 0..rhs.len() {
        let expect = if sys.block().low_mask()[i] {
            0.0
        } else {
            rhs[i] / sys.block().kinetic_diag()[i]
        };
        assert!((x[i] - expect).abs() <= 1e-10 * expect.abs());
    }
}

#[test]
fn low_supported_rhs_gives_zero() {
    let c = ctx(well(), 8.0, 3.0, LowCutoff::Finite(4.0 * PI));
    let p = m(1, 0, 0);
    let sys = c.block_system(p).unwrap();
    let rhs: Vec<f64> = sys.block().low_mask().iter().map(|&l| if l { 3.0 } else { 0.0 }).collect();
    assert_eq!(rhs.iter().filter(|&&v| v != 0.0).count(), 2);
    let (x, stats) = c.apply_r(p, &rhs).unwrap();
    assert!(x.iter().all(|&v| v == 0.0));
    assert_eq!(stats.iterations, 0);
}

#[test]
fn solve_satisfies_defining_equation() {
    // P = 0, Q_max = 16π at L = 32
    let c = ctx(well(), 32.0, 8.0, LowCutoff::Infinite);
    let sys = c.block_system(Momentum::ZERO).unwrap();
    let z = sys.block().position_of_rel(Momentum::ZERO).unwrap();
    let mut rhs = sys.potential_column(Momentum::ZERO);
    rhs[z] = 0.0;
    let (x, stats) = c.apply_r(Momentum::ZERO, &rhs).unwrap();
    assert_eq!(x[z], 0.0);
    let mut ax = vec![0.0; x.len()];
    sys.apply_high(&x, &mut ax);
    let num: f64 = ax.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(num / den <= 1e-10, "{} after {} iterations", num / den, stats.iterations);
}

#[test]
fn zero_potential_has_zero_coefficients() {
    let c = ctx(Potential::zero(), 8.0, 2.0, LowCutoff::Infinite);
    assert_eq!(c.box_scattering_length().unwrap(), 0.0);
    assert!(c.w_coefficients(8, 0.0).unwrap().values().all(|&w| w == 0.0));
    let s = c.sigma_coefficients(8, 0.0).unwrap();
    assert_eq!(s.sigma0, 0.0);
    assert!(s.by_mode.values().all(|&v| v == 0.0));
    assert!(c.f_coefficients(m(1, 0, 0)).unwrap().values().all(|&v| v == 0.0));
    assert_eq!(c.renorm_element(m(1, 0, 0), m(-1, 0, 0), m(0, 1, 0), m(0, -1, 0)).unwrap(), 0.0);
}

#[test]
fn non_conserving_elements_vanish_without_solving() {
    let c = ctx(well(), 8.0, 2.0, LowCutoff::Infinite);
    let v = c.renorm_element(m(1, 0, 0), Momentum::ZERO, Momentum::ZERO, Momentum::ZERO).unwrap();
    assert_eq!(v, 0.0);
    assert_eq!(c.solves_performed(), 0);
}

#[test]
fn out_of_lattice_pairs_are_rejected() {
    let c = ctx(well(), 8.0, 2.0, LowCutoff::Infinite);
    assert!(c.renorm_element(m(3, 0, 0), m(-3, 0, 0), Momentum::ZERO, Momentum::ZERO).is_err());
}

#[test]
fn box_scattering_length_is_bounded() {
    let v = well();
    let bound = v.l1_norm() / (8.0 * PI);
    let c = ctx(v, 16.0, 8.0, LowCutoff::Infinite);
    let a_l = c.box_scattering_length().unwrap();
    assert!(a_l > 0.0 && a_l < bound, "a_L = {a_l}, bound {bound}");
}

#[test]
fn box_scattering_length_decreases_with_cutoff() {
    let mut prev = f64::INFINITY;
    for r in [2.0, 4.0, 8.0, 12.0] {
        let a_l = ctx(well(), 8.0, r, LowCutoff::Infinite).box_scattering_length().unwrap();
        assert!(a_l < prev, "a_L({r}) = {a_l} not below {prev}");
        prev = a_l;
    }
}

#[test]
fn box_scattering_length_ignores_low_cutoff() {
    let a = ctx(well(), 8.0, 4.0, LowCutoff::Finite(2.0 * PI)).box_scattering_length().unwrap();
    let b = ctx(well(), 8.0, 4.0, LowCutoff::Finite(8.0 * PI)).box_scattering_length().unwrap();
    assert!((a - b).abs() <= 10.0 * 1e-10 * a);
}

#[test]
fn convolution_paths_agree_on_a_l() {
    let direct = ctx(well(), 16.0, 6.0, LowCutoff::Infinite).with_convolution(ConvolutionMethod::Direct);
    let fft = ctx(well(), 16.0, 6.0, LowCutoff::Infinite).with_convolution(ConvolutionMethod::Fft);
    let a = direct.box_scattering_length().unwrap();
    let b = fft.box_scattering_length().unwrap();
    assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
}

#[test]
fn sigma_zero_is_the_box_scattering_length() {
    let n = 16;
    let c = ctx(well(), 16.0, 3.0, LowCutoff::Finite(4.0 * PI));
    let s = c.sigma_coefficients(n, 0.0).unwrap();
    let a_l = c.box_scattering_length().unwrap();
    assert!((s.sigma0 - 4.0 * PI * a_l).abs() <= 1e-14 * s.sigma0);
    // |k|² ∈ {1, 2, 3} in lattice units lie below K = 4π
    assert_eq!(s.by_mode.len(), 26);
}

#[test]
fn sigma_is_constant_on_cubic_orbits() {
    let c = ctx(well(), 8.0, 2.0, LowCutoff::Infinite);
    let s = c.sigma_coefficients(8, 0.0).unwrap();
    let k = m(0, -1, 1);
    let z = Momentum::ZERO;
    let direct = 2.0 * (c.renorm_element(k, z, k, z).unwrap() + c.renorm_element(z, k, k, z).unwrap());
    assert!((direct - s.by_mode[&k]).abs() <= 1e-8 * direct.abs());
}

#[test]
fn scale_must_match_particle_number() {
    let c = ctx(well(), 8.0, 2.0, LowCutoff::Infinite);
    assert!(matches!(c.w_coefficients(9, 0.0), Err(Error::Domain(_))));
    assert!(c.w_coefficients(64, 0.5).is_ok());
}

#[test]
fn w_coefficients_are_flat_times_inverse_kinetic() {
    let c = ctx(well(), 16.0, 8.0, LowCutoff::Infinite);
    let w = c.w_coefficients(16, 0.0).unwrap();
    let bound = w
        .iter()
        .map(|(k, v)| (k.norm2() * v).abs())
        .fold(0.0, f64::max);
    let l1 = c.potential().l1_norm();
    // |k|² w_k = N/2 · (V - VRV) ≤ N/2 · L⁻¹∫V
    assert!(bound <= 16.0 / 2.0 * l1 / 16.0);
}

#[test]
fn f_vanishes_where_defined_to() {
    let c = ctx(well(), 8.0, 2.0, LowCutoff::Finite(4.0 * PI));
    assert!(c.f_coefficients(Momentum::ZERO).unwrap().values().all(|&v| v == 0.0));
    // |ℓ| = 4π is not below K
    assert!(c.f_coefficients(m(2, 0, 0)).unwrap().values().all(|&v| v == 0.0));
    let ell = m(1, 0, 0);
    let f = c.f_coefficients(ell).unwrap();
    assert_eq!(f[&Momentum::ZERO], 0.0);
    assert_eq!(f[&ell], 0.0);
    assert!(f.values().any(|&v| v != 0.0));
}

#[test]
fn f_matches_t_minus_one() {
    let c = ctx(well(), 8.0, 2.0, LowCutoff::Finite(4.0 * PI));
    let ell = m(0, 1, 0);
    let z = Momentum::ZERO;
    for (k, v) in c.f_coefficients(ell).unwrap() {
        let t = c.t_minus_one(ell - k, k, ell, z).unwrap() + c.t_minus_one(ell - k, k, z, ell).unwrap();
        assert!((t - v).abs() <= 1e-8 * (1.0 + v.abs()), "k = {k}: {t} vs {v}");
    }
}

#[test]
fn block_diagonalization_is_exact_for_free_gas() {
    let c = ctx(Potential::zero(), 8.0, 4.0, LowCutoff::Infinite);
    let r = c.verify_block_diagonal(Momentum::ZERO).unwrap();
    assert_eq!(r.max_deviation, 0.0);
    assert_eq!(r.max_coupling, 0.0);
}

#[test]
fn block_diagonalization_holds_to_solver_tolerance() {
    let c = ctx(well(), 8.0, 4.0, LowCutoff::Infinite);
    let r = c.verify_block_diagonal(Momentum::ZERO).unwrap();
    let bound = 10.0 * c.solver().tol * r.h_norm;
    assert!(r.max_deviation <= bound, "{r:?}");
    assert!(r.max_coupling <= bound, "{r:?}");
    let c = ctx(well(), 8.0, 3.0, LowCutoff::Finite(4.0 * PI));
    let r = c.verify_block_diagonal(m(1, 0, 0)).unwrap();
    assert!(r.max_deviation <= 10.0 * c.solver().tol * r.h_norm, "{r:?}");
}

#[test]
fn dense_check_has_a_size_cap() {
    let c = ctx(Potential::zero(), 32.0, 8.0, LowCutoff::Infinite);
    assert!(matches!(c.verify_block_diagonal(Momentum::ZERO), Err(Error::Domain(_))));
}

#[test]
fn cache_hits_skip_solves() {
    let dir = tempfile::tempdir().unwrap();
    let make = || ctx(well(), 8.0, 2.0, LowCutoff::Infinite).with_cache_dir(dir.path()).unwrap();
    let first = make();
    let a = first.box_scattering_length().unwrap();
    let w = first.w_coefficients(8, 0.0).unwrap();
    assert_eq!(first.solves_performed(), 1);
    first.persist().unwrap();
    assert!(first.cache_file().unwrap().exists());

    let second = make();
    assert_eq!(second.box_scattering_length().unwrap(), a);
    assert_eq!(second.w_coefficients(8, 0.0).unwrap(), w);
    assert_eq!(second.solves_performed(), 0);

    let other = ctx(well(), 8.0, 2.0, LowCutoff::Finite(2.0 * PI));
    assert_ne!(other.fingerprint(), first.fingerprint());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exchange_symmetry(p in 0usize..33, i in 0usize..1000, j in 0usize..1000) {
        let ctx = ctx(well(), 8.0, 2.0, LowCutoff::Infinite);
        let total = ctx.spec().enumerate_modes()[p];
        let sys = ctx.block_system(total).unwrap();
        let rel = sys.block().rel_points();
        let (q, q2) = (rel[i % rel.len()], rel[j % rel.len()]);
        let x = ctx.renorm_element(total - q, q, total - q2, q2).unwrap();
        let y = ctx.renorm_element(total - q2, q2, total - q, q).unwrap();
        let scale = ctx.potential().l1_norm() / ctx.scale();
        prop_assert!((x - y).abs() <= 10.0 * 1e-10 * scale, "{} vs {}", x, y);
    }

    #[test]
    fn momentum_conservation_is_exact(
        a in (-2i32..=2, -2i32..=2, -2i32..=2),
        b in (-2i32..=2, -2i32..=2, -2i32..=2),
        c in (-2i32..=2, -2i32..=2, -2i32..=2),
        d in (-2i32..=2, -2i32..=2, -2i32..=2),
    ) {
        let k = [m(a.0, a.1, a.2), m(b.0, b.1, b.2), m(c.0, c.1, c.2), m(d.0, d.1, d.2)];
        prop_assume!(k[0] + k[1] != k[2] + k[3]);
        let ctx = ctx(well(), 8.0, 2.0, LowCutoff::Infinite);
        prop_assert_eq!(ctx.renorm_element(k[0], k[1], k[2], k[3]).unwrap(), 0.0);
    }
}

#[test]
fn oversized_lattice_is_rejected() {
    let spec = LatticeSpec::with_radius(MAX_AXIS_RADIUS as f64 + 1.0, LowCutoff::Infinite).unwrap();
    assert!(matches!(
        TwoBodyContext::new(well(), 1000.0, spec, SolverConfig::default()),
        Err(Error::Domain(_))
    ));
    let spec = LatticeSpec::with_radius(MAX_AXIS_RADIUS as f64, LowCutoff::Infinite).unwrap();
    assert!(TwoBodyContext::new(well(), 1000.0, spec, SolverConfig::default()).is_ok());
}

#[test]
fn block_cache_respects_point_budget() {
    let c = ctx(well(), 8.0, 40.0, LowCutoff::Infinite);
    let per_block = c.block_system(Momentum::ZERO).unwrap().block().len();
    for x in 1..=(BLOCK_MEMO_POINTS / per_block + 2) as i32 {
        c.block_system(m(x % 3, x / 3 % 3, x / 9)).unwrap();
    }
    let held: usize = c.blocks.lock().unwrap().values().map(|b| b.block.len()).sum();
    assert!(held <= BLOCK_MEMO_POINTS);
}
