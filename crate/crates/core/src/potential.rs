//! Radial, compactly supported, nonnegative pair interactions.
//!
//! A [`Potential`] knows its radial profile `V(r)`, its three-dimensional
//! Fourier transform `V̂(p) = 4π ∫ r sin(pr)/p V(r) dr`, the plane-wave matrix
//! element of the rescaled interaction `V_L(x) = L² V(Lx)` on the unit torus,
//! and its continuum scattering length from the zero-energy radial equation
//! `(-2Δ + V)φ = 0`, `φ → 1`.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::Momentum;
use crate::quadrature;

/// Below this value of `p·R` the Fourier transform switches to its Taylor
/// series around `p = 0`.
const SMALL_PR: f64 = 1e-4;

/// Below this `pR` the square-well closed form loses digits to cancellation
/// and its Taylor series is summed instead.
const SQUARE_WELL_SERIES_X: f64 = 0.5;

/// Shape of the radial profile.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `V(r) = V₀` for `r ≤ R`.
    SquareWell,
    /// `V(r) = V₀ exp(-r²/(2w²))` for `r ≤ R`, with `w = R/4`.
    GaussianTruncated,
    /// `V(r) = V₀ · t(r)` with `t` a monotone cubic interpolant of samples.
    Tabulated(MonotoneCubic),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    profile: Profile,
    strength: f64,
    range: f64,
}

impl Potential {
    pub fn square_well(strength: f64, range: f64) -> Result<Self> {
        Self::new(Profile::SquareWell, strength, range)
    }

    pub fn gaussian_truncated(strength: f64, range: f64) -> Result<Self> {
        Self::new(Profile::GaussianTruncated, strength, range)
    }

    /// Tabulated profile `V(r) = strength · t(r)`; the support radius is the
    /// last sample radius unless `range` is smaller.
    pub fn tabulated(samples: &[(f64, f64)], strength: f64, range: Option<f64>) -> Result<Self> {
        let table = MonotoneCubic::new(samples)?;
        let last = table.last_radius();
        let range = range.map_or(last, |r| r.min(last));
        Self::new(Profile::Tabulated(table), strength, range)
    }

    /// Reads a two-column CSV `radius,value` (optional header line, `#` comments).
    pub fn tabulated_from_csv(path: &Path, strength: f64, range: Option<f64>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut samples = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() < 2 {
                return Err(Error::invalid(format!(
                    "{}: line {} needs two columns",
                    path.display(),
                    line + 1
                )));
            }
            match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
                (Ok(r), Ok(v)) => samples.push((r, v)),
                // tolerate a textual header on the first line
                _ if line == 0 && samples.is_empty() => continue,
                _ => {
                    return Err(Error::invalid(format!(
                        "{}: line {} is not numeric",
                        path.display(),
                        line + 1
                    )))
                }
            }
        }
        Self::tabulated(&samples, strength, range)
    }

    /// The zero interaction (support radius 1 so that size checks stay meaningful).
    pub fn zero() -> Self {
        Potential {
            profile: Profile::SquareWell,
            strength: 0.0,
            range: 1.0,
        }
    }

    fn new(profile: Profile, strength: f64, range: f64) -> Result<Self> {
        if !(strength >= 0.0 && strength.is_finite()) {
            return Err(Error::invalid(format!(
                "potential strength must be finite and nonnegative, got {strength}"
            )));
        }
        if !(range > 0.0 && range.is_finite()) {
            return Err(Error::invalid(format!(
                "support radius must be positive, got {range}"
            )));
        }
        Ok(Potential {
            profile,
            strength,
            range,
        })
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    /// Support radius `R_supp`.
    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn is_zero(&self) -> bool {
        self.strength == 0.0
    }

    pub fn kind_name(&self) -> &'static str {
        match self.profile {
            Profile::SquareWell => "square-well",
            Profile::GaussianTruncated => "gaussian-truncated",
            Profile::Tabulated(_) => "tabulated-radial",
        }
    }

    /// A stable textual description used for cache fingerprints.
    pub fn descriptor(&self) -> String {
        let mut s = format!(
            "{}:{:.17e}:{:.17e}",
            self.kind_name(),
            self.strength,
            self.range
        );
        if let Profile::Tabulated(t) = &self.profile {
            for (r, v) in t.radii.iter().zip(&t.values) {
                s.push_str(&format!(":{r:.17e},{v:.17e}"));
            }
        }
        s
    }

    /// `V(r)`; zero outside the support.
    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        if r > self.range || self.strength == 0.0 {
            return 0.0;
        }
        match &self.profile {
            Profile::SquareWell => self.strength,
            Profile::GaussianTruncated => {
                let w = self.range / 4.0;
                self.strength * (-(r * r) / (2.0 * w * w)).exp()
            }
            Profile::Tabulated(t) => self.strength * t.eval(r),
        }
    }

    /// Points where the profile is not smooth; quadrature panels are aligned to them.
    fn breakpoints(&self) -> Vec<f64> {
        match &self.profile {
            Profile::Tabulated(t) => {
                let mut b: Vec<f64> = std::iter::once(0.0)
                    .chain(t.radii.iter().copied().filter(|&r| r > 0.0 && r < self.range))
                    .collect();
                b.push(self.range);
                b.dedup();
                b
            }
            _ => vec![0.0, self.range],
        }
    }

    /// `∫_{ℝ³} V = 4π ∫₀^R r² V(r) dr`.
    pub fn l1_norm(&self) -> f64 {
        self.fourier_hat(0.0)
    }

    /// `V̂(p) = 4π ∫₀^R r sin(pr)/p V(r) dr`, even in `p`.
    pub fn fourier_hat(&self, p: f64) -> f64 {
        if self.strength == 0.0 {
            return 0.0;
        }
        match self.profile {
            Profile::SquareWell => square_well_hat(self.strength, self.range, p.abs()),
            _ => self.fourier_hat_quadrature(p),
        }
    }

    /// Quadrature route to `V̂(p)`, valid for every profile. For the square
    /// well this is an independent check of the closed form.
    pub fn fourier_hat_quadrature(&self, p: f64) -> f64 {
        let p = p.abs();
        if self.strength == 0.0 {
            return 0.0;
        }
        let breaks = self.breakpoints();
        let panels = 4 + (p * self.range / PI).ceil() as usize;
        if p * self.range < SMALL_PR {
            // sin(pr)/p = r (1 - (pr)²/6 + (pr)⁴/120 - ...)
            let p2 = p * p;
            4.0 * PI
                * quadrature::integrate_piecewise(
                    |r| {
                        let x = p2 * r * r;
                        r * r * (1.0 - x / 6.0 + x * x / 120.0) * self.value(r)
                    },
                    &breaks,
                    panels,
                )
        } else {
            4.0 * PI / p
                * quadrature::integrate_piecewise(
                    |r| r * (p * r).sin() * self.value(r),
                    &breaks,
                    panels,
                )
        }
    }

    /// Continuum scattering length of `V` with the default radial grid.
    pub fn scattering_length(&self) -> Result<ScatteringSolution> {
        scattering_length_continuum(self, &RadialGrid::default())
    }
}

fn square_well_hat(v0: f64, r: f64, p: f64) -> f64 {
    let x = p * r;
    let prefactor = 4.0 * PI * v0 * r.powi(3) / 3.0;
    if x < SQUARE_WELL_SERIES_X {
        // 3(sin x - x cos x)/x³ = 3 Σ (-1)ⁿ (2n+2) x²ⁿ / (2n+3)!
        let x2 = x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..12 {
            let m = 2.0 * n as f64;
            term *= -x2 * (m + 2.0) / (m * (m + 2.0) * (m + 3.0));
            sum += term;
        }
        prefactor * sum
    } else {
        4.0 * PI * v0 * (x.sin() - x * x.cos()) / p.powi(3)
    }
}

/// Plane-wave matrix element of the rescaled interaction `V_L(x, y) = L² V(L(x-y))`
/// on the unit torus at momentum transfer `q` (a lattice vector `2π·n`):
/// `L⁻¹ V̂(|q|/L)`. The full tensor element `(V_L)_{jk,mn}` is this value at
/// `q = j - m` times the indicator of `j + k = m + n`.
pub fn lattice_matrix_element(potential: &Potential, scale: f64, q: Momentum) -> Result<f64> {
    check_no_wrap(potential, scale)?;
    Ok(potential.fourier_hat(q.norm() / scale) / scale)
}

/// The periodized potential must not overlap with its images: `L ≥ 2·R_supp`.
pub fn check_no_wrap(potential: &Potential, scale: f64) -> Result<()> {
    if !(scale.is_finite() && scale >= 2.0 * potential.range()) {
        return Err(Error::domain(format!(
            "scale L = {scale} is below 2·R_supp = {}; the rescaled potential wraps around the torus",
            2.0 * potential.range()
        )));
    }
    Ok(())
}

/// Radial grid for the zero-energy scattering equation.
#[derive(Debug, Clone, Copy)]
pub struct RadialGrid {
    /// Initial number of RK4 steps on `[0, R_supp]` (rounded up to even).
    pub steps: usize,
    /// Maximum number of step doublings.
    pub max_refinements: u32,
    /// Relative tolerance of the `8πa` vs `∫Vφ` consistency check.
    pub tolerance: f64,
}

impl Default for RadialGrid {
    fn default() -> Self {
        RadialGrid {
            steps: 512,
            max_refinements: 10,
            tolerance: 1e-10,
        }
    }
}

/// Zero-energy scattering solution. `u(r) = r φ(r)` is normalized so that
/// `φ → 1` at infinity, i.e. `u(r) = r - a` outside the support.
#[derive(Debug, Clone)]
pub struct ScatteringSolution {
    /// Scattering length `a`.
    pub a: f64,
    /// `(r, u(r))` on the final grid over `[0, R_supp]`.
    pub u_samples: Vec<(f64, f64)>,
    /// `∫ V φ`, computed by quadrature independently of `a`.
    pub integral_v_phi: f64,
    /// Number of RK4 steps of the accepted grid.
    pub steps: usize,
}

impl ScatteringSolution {
    /// `φ(r)`; linear interpolation of `u/r` inside the support.
    pub fn phi(&self, r: f64) -> f64 {
        let range = self.u_samples.last().map_or(0.0, |s| s.0);
        if r >= range {
            return 1.0 - self.a / r;
        }
        if r <= 0.0 {
            // u'(0)/c
            return self.u_samples.get(1).map_or(1.0, |s| s.1 / s.0);
        }
        let h = range / (self.u_samples.len() - 1) as f64;
        let i = ((r / h) as usize).min(self.u_samples.len() - 2);
        let (r0, u0) = self.u_samples[i];
        let (r1, u1) = self.u_samples[i + 1];
        let u = u0 + (u1 - u0) * (r - r0) / (r1 - r0);
        u / r
    }

    /// `ω = 1 - φ`, the solution of `(-2Δ + V)ω = V` decaying at infinity.
    pub fn omega(&self, r: f64) -> f64 {
        1.0 - self.phi(r)
    }
}

struct RadialRun {
    a: f64,
    integral: f64,
    samples: Vec<(f64, f64)>,
}

/// Integrates `u'' = (V/2) u` with `u(0) = 0`, `u'(0) = 1` by fixed-step RK4,
/// returning `a = R - u(R)/u'(R)` and `∫Vφ = 4π ∫ r V u / u'(R) dr` (Simpson).
fn radial_run(potential: &Potential, steps: usize) -> RadialRun {
    let range = potential.range();
    let h = range / steps as f64;
    let f = |r: f64| 0.5 * potential.value(r);
    let mut u = 0.0;
    let mut du = 1.0;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((0.0, 0.0));
    for i in 0..steps {
        let r = i as f64 * h;
        // Evaluate V strictly inside the step so a jump at R_supp is not sampled from outside.
        let (va, vm, vb) = (f(r), f(r + 0.5 * h), f((r + h).min(range)));
        let k1u = du;
        let k1v = va * u;
        let k2u = du + 0.5 * h * k1v;
        let k2v = vm * (u + 0.5 * h * k1u);
        let k3u = du + 0.5 * h * k2v;
        let k3v = vm * (u + 0.5 * h * k2u);
        let k4u = du + h * k3v;
        let k4v = vb * (u + h * k3u);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        du += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        samples.push(((i + 1) as f64 * h, u));
    }
    let c = du;
    let a = range - u / c;
    for s in samples.iter_mut() {
        s.1 /= c;
    }
    // Simpson on the nodes; `steps` is even.
    let g = |i: usize| {
        let (r, u) = samples[i];
        let v = if i == steps {
            potential.value(range)
        } else {
            potential.value(r)
        };
        r * v * u
    };
    let mut simpson = g(0) + g(steps);
    for i in 1..steps {
        simpson += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i);
    }
    let integral = 4.0 * PI * simpson * h / 3.0;
    RadialRun {
        a,
        integral,
        samples,
    }
}

/// Continuum scattering length from the zero-energy radial equation.
///
/// The grid is refined by step doubling until `|8πa - ∫Vφ| / (8πa)` drops
/// below `grid.tolerance`; the reported `a` is the Richardson combination of
/// the last two grids.
pub fn scattering_length_continuum(
    potential: &Potential,
    grid: &RadialGrid,
) -> Result<ScatteringSolution> {
    let mut steps = grid.steps.max(2).next_multiple_of(2);
    let mut prev = radial_run(potential, steps);
    let mut last_mismatch = f64::INFINITY;
    for _ in 0..=grid.max_refinements {
        steps *= 2;
        let run = radial_run(potential, steps);
        let a = (16.0 * run.a - prev.a) / 15.0;
        let scale = (8.0 * PI * a).abs().max(f64::MIN_POSITIVE);
        let mismatch = if a == 0.0 && run.integral == 0.0 {
            0.0
        } else {
            (8.0 * PI * a - run.integral).abs() / scale
        };
        last_mismatch = mismatch;
        if mismatch < grid.tolerance {
            return Ok(ScatteringSolution {
                a,
                u_samples: run.samples,
                integral_v_phi: run.integral,
                steps,
            });
        }
        prev = run;
    }
    Err(Error::Convergence {
        what: format!(
            "scattering length (8πa = {:e}, ∫Vφ = {:e})",
            8.0 * PI * prev.a,
            prev.integral
        ),
        residual: last_mismatch,
        target: grid.tolerance,
    })
}

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant, clamped at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    radii: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid("a tabulated potential needs at least two samples"));
        }
        let radii: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let values: Vec<f64> = samples.iter().map(|s| s.1).collect();
        if radii[0] < 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "tabulated radii must be nonnegative and strictly increasing",
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("tabulated values must be finite and nonnegative"));
        }
        let n = radii.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (values[i + 1] - values[i]) / (radii[i + 1] - radii[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            slopes[i] = if secants[i - 1] * secants[i] <= 0.0 {
                0.0
            } else {
                (secants[i - 1] + secants[i]) / 2.0
            };
        }
        for i in 0..n - 1 {
            if secants[i] == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let alpha = slopes[i] / secants[i];
            let beta = slopes[i + 1] / secants[i];
            let norm = alpha * alpha + beta * beta;
            if norm > 9.0 {
                let tau = 3.0 / norm.sqrt();
                slopes[i] = tau * alpha * secants[i];
                slopes[i + 1] = tau * beta * secants[i];
            }
        }
        Ok(MonotoneCubic {
            radii,
            values,
            slopes,
        })
    }

    pub fn last_radius(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub fn eval(&self, r: f64) -> f64 {
        let n = self.radii.len();
        if r <= self.radii[0] {
            return self.values[0];
        }
        if r > self.radii[n - 1] {
            return 0.0;
        }
        let i = match self.radii.binary_search_by(|x| x.total_cmp(&r)) {
            Ok(i) => return self.values[i],
            Err(i) => i - 1,
        };
        let h = self.radii[i + 1] - self.radii[i];
        let t = (r - self.radii[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * self.values[i]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * self.values[i + 1]
            + (t3 - t2) * h * self.slopes[i + 1];
        v.max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_well_a(v0: f64, r: f64) -> f64 {
        let k = (v0 / 2.0).sqrt();
        r - (k * r).tanh() / k
    }

    #[test]
    fn zero_potential_does_not_scatter() {
        let sol = Potential::zero().scattering_length().unwrap();
        assert_eq!(sol.a, 0.0);
        assert_eq!(sol.integral_v_phi, 0.0);
        assert_eq!(Potential::zero().fourier_hat(3.0), 0.0);
    }

    #[test]
    fn square_well_matches_closed_form() {
        let v = Potential::square_well(10.0, 1.0).unwrap();
        let sol = v.scattering_length().unwrap();
        let exact = square_well_a(10.0, 1.0);
        assert!((exact - 0.5628879598389264).abs() < 1e-15);
        assert!((sol.a - exact).abs() / exact < 1e-10, "{} vs {exact}", sol.a);
        assert!((8.0 * PI * sol.a - sol.integral_v_phi).abs() / (8.0 * PI * sol.a) < 1e-8);
    }

    #[test]
    fn hard_sphere_limit() {
        let v = Potential::square_well(2.0e5, 1.0).unwrap();
        let grid = RadialGrid {
            steps: 4096,
            ..RadialGrid::default()
        };
        let sol = scattering_length_continuum(&v, &grid).unwrap();
        assert!((sol.a - square_well_a(2.0e5, 1.0)).abs() < 1e-9);
        assert!((1.0 - sol.a) < 4e-3);
    }

    #[test]
    fn phi_tends_to_one() {
        let v = Potential::gaussian_truncated(20.0, 1.5).unwrap();
        let sol = v.scattering_length().unwrap();
        assert!(sol.a > 0.0);
        assert!((sol.phi(1e4) - 1.0).abs() < 1e-3);
        assert!((sol.omega(3.0) - sol.a / 3.0).abs() < 1e-12);
        // φ is continuous across the support edge
        assert!((sol.phi(1.5 - 1e-9) - sol.phi(1.5 + 1e-9)).abs() < 1e-6);
    }

    #[test]
    fn fourier_hat_closed_form_agrees_with_quadrature() {
        let v = Potential::square_well(10.0, 1.0).unwrap();
        for p in [0.0, 1e-6, 0.3, 1.0, 4.4934, 17.0, 123.4] {
            let q = v.fourier_hat_quadrature(p);
            let c = v.fourier_hat(p);
            assert!((q - c).abs() < 1e-11 * v.l1_norm(), "p={p}: {q} vs {c}");
        }
        assert!((v.fourier_hat(0.0) - 4.0 * PI * 10.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fourier_hat_is_even_and_bounded() {
        let v = Potential::gaussian_truncated(3.0, 2.0).unwrap();
        let v0 = v.fourier_hat(0.0);
        for i in 0..50 {
            let p = 0.37 * i as f64;
            assert_eq!(v.fourier_hat(p), v.fourier_hat(-p));
            assert!(v.fourier_hat(p).abs() <= v0 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn small_p_branch_is_continuous() {
        let v = Potential::square_well(10.0, 1.0).unwrap();
        for x in [SMALL_PR, SQUARE_WELL_SERIES_X] {
            let below = v.fourier_hat(x * (1.0 - 1e-13));
            let above = v.fourier_hat(x * (1.0 + 1e-13));
            assert!((below - above).abs() < 1e-9);
            assert!((below - v.fourier_hat_quadrature(x)).abs() < 1e-10);
        }
        let g = Potential::gaussian_truncated(10.0, 1.0).unwrap();
        assert!((g.fourier_hat(0.99e-4) - g.fourier_hat(1.01e-4)).abs() < 1e-9);
    }

    #[test]
    fn lattice_element_checks_wrap() {
        let v = Potential::square_well(10.0, 1.0).unwrap();
        assert!(matches!(
            lattice_matrix_element(&v, 1.5, Momentum::ZERO),
            Err(Error::Domain(_))
        ));
        let e = lattice_matrix_element(&v, 32.0, Momentum::ZERO).unwrap();
        assert!((e - v.l1_norm() / 32.0).abs() < 1e-15);
    }

    #[test]
    fn lattice_element_is_direct_torus_integral() {
        // ∫_Λ V_L(r) e^{-iqr} dr evaluated as a radial integral over the
        // rescaled support, independent of fourier_hat.
        let v = Potential::square_well(10.0, 1.0).unwrap();
        let l = 32.0;
        let q = Momentum::new(1, 0, 0);
        let qn = q.norm();
        let rmax = 1.0 / l;
        let direct = 4.0 * PI
            * quadrature::integrate(
                |r| l * l * v.value(l * r) * r * r * (qn * r).sin() / (qn * r),
                0.0,
                rmax,
                8,
            );
        let elem = lattice_matrix_element(&v, l, q).unwrap();
        assert!((direct - elem).abs() < 1e-13, "{direct} vs {elem}");
        assert!((elem - v.fourier_hat(2.0 * PI / 32.0) / 32.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_diagonal_converges_to_l1_norm() {
        let v = Potential::square_well(10.0, 1.0).unwrap();
        let q = Momentum::new(1, 1, 0);
        let mut prev = f64::INFINITY;
        for l in [8.0, 16.0, 32.0, 64.0] {
            let d = (l * lattice_matrix_element(&v, l, q).unwrap() - v.l1_norm()).abs();
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 1e-2 * v.l1_norm());
    }

    #[test]
    fn tabulated_profile_reproduces_square_well() {
        let samples: Vec<(f64, f64)> = (0..=20).map(|i| (i as f64 * 0.05, 1.0)).collect();
        let v = Potential::tabulated(&samples, 10.0, None).unwrap();
        assert_eq!(v.range(), 1.0);
        let sq = Potential::square_well(10.0, 1.0).unwrap();
        assert!((v.l1_norm() - sq.l1_norm()).abs() < 1e-11);
        let a = v.scattering_length().unwrap().a;
        assert!((a - square_well_a(10.0, 1.0)).abs() < 1e-9);
    }

    #[test]
    fn tabulated_interpolation_is_nonnegative_and_monotone() {
        let samples = [(0.0, 5.0), (0.2, 4.9), (0.4, 0.1), (0.6, 0.0), (1.0, 0.0)];
        let t = MonotoneCubic::new(&samples).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let y = t.eval(x);
            assert!(y >= 0.0);
            assert!(y <= prev + 1e-14);
            prev = y;
        }
        assert!(MonotoneCubic::new(&[(0.0, 1.0), (0.5, -1.0)]).is_err());
        assert!(MonotoneCubic::new(&[(0.5, 1.0), (0.5, 1.0)]).is_err());
    }

    #[test]
    fn tabulated_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        std::fs::write(&path, "radius,value\n# comment\n0.0, 2.0\n0.5, 1.0\n1.0, 0.0\n").unwrap();
        let v = Potential::tabulated_from_csv(&path, 3.0, None).unwrap();
        assert_eq!(v.value(0.0), 6.0);
        assert_eq!(v.value(1.5), 0.0);
        std::fs::write(&path, "0.0,1\nx,y\n").unwrap();
        assert!(Potential::tabulated_from_csv(&path, 1.0, None).is_err());
    }
}
