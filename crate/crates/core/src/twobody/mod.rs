//! Feshbach–Schur renormalization of the two-body problem on the torus.
//!
//! In a block of fixed total momentum `P` the pair `(P - q, q)` is labelled by
//! `q`. The operator is `-Δ₂ + V_L` with `(V_L)_{(P-q)q,(P-q')q'} = L⁻¹V̂(|q-q'|/L)`,
//! `R` is the inverse of its restriction to the high pairs `𝓗`, and
//! `T - 1 = R V_L π_𝓛`. A single solve `x = R V_L e_ket` yields the whole
//! column `(V_L - V_L R V_L) e_ket = V_L e_ket - V_L x` as well as the column
//! `x` of `T - 1`.

pub mod cache;
pub mod convolution;
pub mod solver;

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Momentum, MomentumBlock};
use crate::potential::{check_no_wrap, Potential};

use cache::ElementKey;
pub use convolution::{ConvolutionMethod, KernelTable};
pub use solver::{Preconditioner, SolveStats, SolverConfig};

/// Columns of blocks up to this size are kept in memory after a solve.
const COLUMN_MEMO_LIMIT: usize = 20_000;
/// Built blocks kept in memory, by count and by total points; the map is
/// cleared when either would be exceeded.
const BLOCK_MEMO_LIMIT: usize = 64;
const BLOCK_MEMO_POINTS: usize = 4_000_000;
/// Largest lattice radius in units of 2π; a pair block then holds about 3.7M
/// points and one FFT apply needs about 1 GB.
pub const MAX_AXIS_RADIUS: i32 = 96;
/// Dense assembly cap for [`TwoBodyContext::verify_block_diagonal`].
pub const DENSE_LIMIT: usize = 2000;

/// A pair block together with its matrix-free operator.
pub struct BlockSystem {
    block: MomentumBlock,
    convolver: convolution::Convolver,
    kernel: Arc<KernelTable>,
    diag: Vec<f64>,
    high: Vec<bool>,
}

impl BlockSystem {
    pub fn block(&self) -> &MomentumBlock {
        &self.block
    }

    pub fn convolution_method(&self) -> ConvolutionMethod {
        self.convolver.method()
    }

    /// `(-Δ₂ + V_L) x` on the whole block.
    pub fn apply_full(&self, x: &[f64], out: &mut [f64]) {
        self.convolver.apply(x, out);
        for ((o, &k), &v) in out.iter_mut().zip(self.block.kinetic_diag()).zip(x) {
            *o += k * v;
        }
    }

    /// `π_𝓗 (-Δ₂ + V_L) π_𝓗 x`.
    pub fn apply_high(&self, x: &[f64], out: &mut [f64]) {
        let masked: Vec<f64> = x
            .iter()
            .zip(&self.high)
            .map(|(&v, &h)| if h { v } else { 0.0 })
            .collect();
        self.apply_full(&masked, out);
        for (o, &h) in out.iter_mut().zip(&self.high) {
            if !h {
                *o = 0.0;
            }
        }
    }

    /// `V_L e_ket` for the pair with relative momentum `ket`: entry `q` is `L⁻¹V̂(|q - ket|/L)`.
    pub fn potential_column(&self, ket: Momentum) -> Vec<f64> {
        self.block
            .rel_points()
            .iter()
            .map(|&q| self.kernel.get((q - ket).norm2_int()))
            .collect()
    }
}

/// One solve `x = R V_L e_ket` and the derived column of `V_L - V_L R V_L`.
#[derive(Debug, Clone)]
pub struct RenormColumn {
    /// Column of `T - 1`, zero on `𝓛`.
    pub correction: Vec<f64>,
    /// Column of `V_L - V_L R V_L`.
    pub values: Vec<f64>,
    pub stats: SolveStats,
}

/// Result of the dense Feshbach–Schur check on one block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockDiagonalReport {
    pub dimension: usize,
    /// `max |T†(-Δ₂ + Ṽ)T - H|`.
    pub max_deviation: f64,
    /// `max |(S†HS)_{𝓛𝓗}|` with `S = T⁻¹`.
    pub max_coupling: f64,
    /// Max-row-sum norm of `H`.
    pub h_norm: f64,
}

/// σ coefficients: `σ₀` and `σ_k` for `0 < |k| < K`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaCoefficients {
    pub sigma0: f64,
    pub by_mode: BTreeMap<Momentum, f64>,
}

/// Coefficient families for one `(V, L, K, Q_max, tol)` configuration.
#[derive(Debug, Clone)]
pub struct RenormalizedCoefficients {
    pub particles: usize,
    pub kappa: f64,
    pub scale: f64,
    pub spec: LatticeSpec,
    pub a_l: f64,
    pub w: BTreeMap<Momentum, f64>,
    pub sigma: SigmaCoefficients,
    /// `f_{ℓ,k}` keyed by `(ℓ, k)`, for the requested `ℓ`.
    pub f: BTreeMap<(Momentum, Momentum), f64>,
    pub raw: BTreeMap<ElementKey, f64>,
    pub fingerprint: String,
}

/// Two-body problem for a potential `V` on a torus of scale `L` with momentum
/// cutoff and low-set parameter taken from `spec`.
pub struct TwoBodyContext {
    potential: Potential,
    scale: f64,
    spec: LatticeSpec,
    solver: SolverConfig,
    convolution: ConvolutionMethod,
    kernel: Arc<KernelTable>,
    blocks: Mutex<HashMap<Momentum, Arc<BlockSystem>>>,
    columns: Mutex<HashMap<(Momentum, Momentum), Arc<RenormColumn>>>,
    elements: Mutex<BTreeMap<ElementKey, f64>>,
    cache_dir: Option<PathBuf>,
    dirty: AtomicBool,
    solves: AtomicUsize,
}

impl TwoBodyContext {
    pub fn new(potential: Potential, scale: f64, spec: LatticeSpec, solver: SolverConfig) -> Result<Self> {
        check_no_wrap(&potential, scale)?;
        if spec.axis_radius() > MAX_AXIS_RADIUS {
            return Err(Error::domain(format!(
                "q_max = {} is {} lattice units, beyond the supported {MAX_AXIS_RADIUS}; \
                 lower q_max or use a smaller L",
                spec.q_max(),
                spec.axis_radius()
            )));
        }
        let r = spec.axis_radius() as i64;
        let max_norm2 = (12 * r * r).max(4 * spec.max_norm2_int());
        let kernel = {
            let v = &potential;
            let two_pi_over_l = 2.0 * PI / scale;
            KernelTable::new(max_norm2, |n2| {
                v.fourier_hat(two_pi_over_l * (n2 as f64).sqrt()) / scale
            })
        };
        Ok(TwoBodyContext {
            potential,
            scale,
            spec,
            solver,
            convolution: ConvolutionMethod::Auto,
            kernel: Arc::new(kernel),
            blocks: Mutex::default(),
            columns: Mutex::default(),
            elements: Mutex::default(),
            cache_dir: None,
            dirty: AtomicBool::new(false),
            solves: AtomicUsize::new(0),
        })
    }

    /// Default momentum cutoff: `max(16π, 2π⌈L/R⌉)`, which resolves `V̂(|k|/L)`
    /// out to its first zero for the square well; `16π` for the zero potential.
    pub fn default_q_max(potential: &Potential, scale: f64) -> f64 {
        if potential.is_zero() {
            return 16.0 * PI;
        }
        (16.0 * PI).max(2.0 * PI * (scale / potential.range()).ceil())
    }

    pub fn with_convolution(mut self, method: ConvolutionMethod) -> Self {
        self.convolution = method;
        self
    }

    /// Attaches an on-disk cache directory and loads any elements stored under
    /// this configuration's fingerprint.
    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        let path = cache::cache_path(&dir, &self.fingerprint());
        if path.exists() {
            let loaded = cache::read_elements(&path)?;
            log::debug!("loaded {} cached elements from {}", loaded.len(), path.display());
            self.elements.get_mut().unwrap().extend(loaded);
        }
        self.cache_dir = Some(dir);
        Ok(self)
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn solver(&self) -> &SolverConfig {
        &self.solver
    }

    /// Number of linear solves performed so far (cache hits perform none).
    pub fn solves_performed(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    pub fn fingerprint(&self) -> String {
        cache::fingerprint(&[
            self.potential.descriptor(),
            cache::fmt_f64(self.scale),
            cache::fmt_f64(self.spec.q_max()),
            self.spec.low_cutoff().to_string(),
            cache::fmt_f64(self.solver.tol),
        ])
    }

    pub fn cache_file(&self) -> Option<PathBuf> {
        self.cache_dir
            .as_deref()
            .map(|d| cache::cache_path(d, &self.fingerprint()))
    }

    /// Writes the element cache if anything new was computed.
    pub fn persist(&self) -> Result<()> {
        let Some(path) = self.cache_file() else {
            return Ok(());
        };
        if !self.dirty.swap(false, Ordering::AcqRel) {
            return Ok(());
        }
        let elements = self.elements.lock().unwrap().clone();
        cache::write_atomic(&path, |f| cache::write_elements(f, &elements))
    }

    /// Snapshot of every element computed or loaded so far.
    pub fn raw_elements(&self) -> BTreeMap<ElementKey, f64> {
        self.elements.lock().unwrap().clone()
    }

    pub fn block_system(&self, total: Momentum) -> Result<Arc<BlockSystem>> {
        if let Some(b) = self.blocks.lock().unwrap().get(&total) {
            return Ok(b.clone());
        }
        let block = self.spec.build_block(total)?;
        let convolver =
            convolution::Convolver::new(block.rel_points(), self.kernel.clone(), self.convolution);
        let v0 = self.kernel.get(0);
        let diag = block.kinetic_diag().iter().map(|k| k + v0).collect();
        let high = block.low_mask().iter().map(|&l| !l).collect();
        let sys = Arc::new(BlockSystem {
            block,
            convolver,
            kernel: self.kernel.clone(),
            diag,
            high,
        });
        let mut blocks = self.blocks.lock().unwrap();
        let held: usize = blocks.values().map(|b| b.block.len()).sum();
        if blocks.len() >= BLOCK_MEMO_LIMIT || held + sys.block.len() > BLOCK_MEMO_POINTS {
            blocks.clear();
        }
        blocks.insert(total, sys.clone());
        Ok(sys)
    }

    /// Solves `π_𝓗(-Δ₂ + V_L)π_𝓗 x = π_𝓗 rhs` in the block of total momentum `total`.
    pub fn apply_r(&self, total: Momentum, rhs: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        let sys = self.block_system(total)?;
        self.solve_in(&sys, rhs)
    }

    fn solve_in(&self, sys: &BlockSystem, rhs: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        if rhs.len() != sys.block.len() {
            return Err(Error::invalid(format!(
                "right-hand side has {} entries, block has {}",
                rhs.len(),
                sys.block.len()
            )));
        }
        let diag = match self.solver.preconditioner {
            Preconditioner::KineticDiagonal => Some(sys.diag.as_slice()),
            Preconditioner::None => None,
        };
        self.solves.fetch_add(1, Ordering::Relaxed);
        solver::pcg(|x, y| sys.apply_high(x, y), rhs, &sys.high, diag, &self.solver)
    }

    /// The solve for ket pair `(k₃, k₄)`.
    pub fn renorm_column(&self, k3: Momentum, k4: Momentum) -> Result<Arc<RenormColumn>> {
        let total = k3 + k4;
        if let Some(c) = self.columns.lock().unwrap().get(&(total, k4)) {
            return Ok(c.clone());
        }
        let sys = self.block_system(total)?;
        if sys.block.position(k3, k4).is_none() {
            return Err(Error::domain(format!("pair ({k3}, {k4}) lies outside the lattice")));
        }
        let column = Arc::new(self.compute_column(&sys, k4)?);
        if sys.block.len() <= COLUMN_MEMO_LIMIT {
            self.columns
                .lock()
                .unwrap()
                .insert((total, k4), column.clone());
        }
        Ok(column)
    }

    fn compute_column(&self, sys: &BlockSystem, ket: Momentum) -> Result<RenormColumn> {
        let n = sys.block.len();
        let vcol = sys.potential_column(ket);
        if self.potential.is_zero() {
            return Ok(RenormColumn {
                correction: vec![0.0; n],
                values: vcol,
                stats: SolveStats::default(),
            });
        }
        let (x, stats) = self.solve_in(sys, &vcol)?;
        let mut vx = vec![0.0; n];
        sys.convolver.apply(&x, &mut vx);
        let values = vcol.iter().zip(&vx).map(|(a, b)| a - b).collect();
        Ok(RenormColumn {
            correction: x,
            values,
            stats,
        })
    }

    /// `(V_L - V_L R V_L)_{k₁k₂,k₃k₄}`; exactly zero unless `k₁ + k₂ = k₃ + k₄`.
    pub fn renorm_element(&self, k1: Momentum, k2: Momentum, k3: Momentum, k4: Momentum) -> Result<f64> {
        Ok(self.renorm_elements((k3, k4), &[(k1, k2)])?[0])
    }

    /// Several bras against one ket, sharing a single solve.
    pub fn renorm_elements(&self, ket: (Momentum, Momentum), bras: &[(Momentum, Momentum)]) -> Result<Vec<f64>> {
        let (k3, k4) = ket;
        let total = k3 + k4;
        let mut out = vec![0.0; bras.len()];
        let mut missing = Vec::new();
        {
            let elements = self.elements.lock().unwrap();
            for (i, &(k1, k2)) in bras.iter().enumerate() {
                if k1 + k2 != total {
                    continue;
                }
                match elements.get(&[k1, k2, k3, k4]) {
                    Some(&v) => out[i] = v,
                    None => missing.push(i),
                }
            }
        }
        if missing.is_empty() {
            return Ok(out);
        }
        let column = self.renorm_column(k3, k4)?;
        let sys = self.block_system(total)?;
        let mut elements = self.elements.lock().unwrap();
        for i in missing {
            let (k1, k2) = bras[i];
            let pos = sys.block.position(k1, k2).ok_or_else(|| {
                Error::domain(format!("pair ({k1}, {k2}) lies outside the lattice"))
            })?;
            out[i] = column.values[pos];
            elements.insert([k1, k2, k3, k4], out[i]);
        }
        self.dirty.store(true, Ordering::Release);
        Ok(out)
    }

    /// `(T - 1)_{jk,mn} = (R V_L π_𝓛)_{jk,mn}`.
    pub fn t_minus_one(&self, j: Momentum, k: Momentum, m: Momentum, n: Momentum) -> Result<f64> {
        if j + k != m + n || !self.spec.is_low_pair(m, n) {
            return Ok(0.0);
        }
        let column = self.renorm_column(m, n)?;
        let sys = self.block_system(m + n)?;
        let pos = sys
            .block
            .position(j, k)
            .ok_or_else(|| Error::domain(format!("pair ({j}, {k}) lies outside the lattice")))?;
        Ok(column.correction[pos])
    }

    /// `a_L = L/(8π) (V_L - V_L R V_L)_{00,00}`.
    pub fn box_scattering_length(&self) -> Result<f64> {
        let z = Momentum::ZERO;
        Ok(self.scale / (8.0 * PI) * self.renorm_element(z, z, z, z)?)
    }

    fn check_scaling(&self, particles: usize, kappa: f64) -> Result<()> {
        let expected = (particles as f64).powf(1.0 - kappa);
        if (expected - self.scale).abs() > 1e-9 * self.scale {
            return Err(Error::domain(format!(
                "torus scale L = {} does not match N^(1-κ) = {expected} for N = {particles}, κ = {kappa}",
                self.scale
            )));
        }
        Ok(())
    }

    /// `w_k = N/(2|k|²) (V_L - V_L R V_L)_{(-k)k,00}` for every nonzero lattice mode.
    pub fn w_coefficients(&self, particles: usize, kappa: f64) -> Result<BTreeMap<Momentum, f64>> {
        self.check_scaling(particles, kappa)?;
        let modes: Vec<Momentum> = self.spec.enumerate_modes().into_iter().skip(1).collect();
        let bras: Vec<(Momentum, Momentum)> = modes.iter().map(|&k| (-k, k)).collect();
        let z = Momentum::ZERO;
        let values = self.renorm_elements((z, z), &bras)?;
        let n = particles as f64;
        Ok(modes
            .into_iter()
            .zip(values)
            .map(|(k, v)| (k, n / (2.0 * k.norm2()) * v))
            .collect())
    }

    /// `σ_k = N/4 [(V_L - V_L R V_L)_{k0,k0} + (V_L - V_L R V_L)_{0k,k0}]` for
    /// `k = 0` and every lattice mode with `|k| < K`. One solve per cubic orbit.
    pub fn sigma_coefficients(&self, particles: usize, kappa: f64) -> Result<SigmaCoefficients> {
        self.check_scaling(particles, kappa)?;
        let n = particles as f64;
        let z = Momentum::ZERO;
        let sigma0 = n / 4.0 * 2.0 * self.renorm_element(z, z, z, z)?;
        let cutoff = self.spec.low_cutoff();
        let mut orbits: BTreeMap<Momentum, Vec<Momentum>> = BTreeMap::new();
        for k in self.spec.enumerate_modes().into_iter().skip(1) {
            if cutoff.admits(k) {
                orbits.entry(k.cubic_orbit_key()).or_default().push(k);
            }
        }
        let reps: Vec<Momentum> = orbits.keys().copied().collect();
        let values: Vec<f64> = reps
            .par_iter()
            .map(|&k| {
                let e = self.renorm_elements((k, z), &[(k, z), (z, k)])?;
                Ok(n / 4.0 * (e[0] + e[1]))
            })
            .collect::<Result<_>>()?;
        let mut by_mode = BTreeMap::new();
        for (rep, value) in reps.into_iter().zip(values) {
            for &k in &orbits[&rep] {
                by_mode.insert(k, value);
            }
        }
        Ok(SigmaCoefficients { sigma0, by_mode })
    }

    /// `f_{ℓ,k}` for every `k` with `(ℓ - k, k)` in the lattice. It is the sum of
    /// the two `T - 1` entries `((ℓ-k)k, ℓ0)` and `((ℓ-k)k, 0ℓ)`, evaluated as
    /// `[(V-VRV)_{(ℓ-k)k,ℓ0} + (V-VRV)_{(ℓ-k)k,0ℓ}] / (|k|² + |ℓ-k|²)`. It vanishes
    /// for `ℓ = 0`, for `|ℓ| ≥ K` (the kets leave `𝓛`) and on the rows `k ∈ {0, ℓ}`
    /// (the bras lie in `𝓛`).
    pub fn f_coefficients(&self, ell: Momentum) -> Result<BTreeMap<Momentum, f64>> {
        let sys = self.block_system(ell)?;
        let rel = sys.block.rel_points();
        let mut out: BTreeMap<Momentum, f64> = rel.iter().map(|&k| (k, 0.0)).collect();
        if ell.is_zero() || !self.spec.low_cutoff().admits(ell) {
            return Ok(out);
        }
        let bras: Vec<(Momentum, Momentum)> = rel.iter().map(|&k| (ell - k, k)).collect();
        let z = Momentum::ZERO;
        let first = self.renorm_elements((ell, z), &bras)?;
        let second = self.renorm_elements((z, ell), &bras)?;
        for (i, &k) in rel.iter().enumerate() {
            if sys.block.low_mask()[i] {
                continue;
            }
            let kin = sys.block.kinetic_diag()[i];
            out.insert(k, (first[i] + second[i]) / kin);
        }
        Ok(out)
    }

    /// All coefficient families at `L = N^{1-κ}`; `f` is computed for each `ℓ` in `ells`.
    pub fn coefficients(&self, particles: usize, kappa: f64, ells: &[Momentum]) -> Result<RenormalizedCoefficients> {
        let a_l = self.box_scattering_length()?;
        let w = self.w_coefficients(particles, kappa)?;
        let sigma = self.sigma_coefficients(particles, kappa)?;
        let mut f = BTreeMap::new();
        for &ell in ells {
            for (k, v) in self.f_coefficients(ell)? {
                f.insert((ell, k), v);
            }
        }
        Ok(RenormalizedCoefficients {
            particles,
            kappa,
            scale: self.scale,
            spec: self.spec,
            a_l,
            w,
            sigma,
            f,
            raw: self.raw_elements(),
            fingerprint: self.fingerprint(),
        })
    }

    /// Dense check of `T†(-Δ₂ + Ṽ)T = H` and of the vanishing `𝓛𝓗` block of
    /// `S†HS` on one block, with `T = 1 + X π_𝓛`, `X = R V_L π_𝓛` from the
    /// iterative solver, `Ṽ = π_𝓛(V - V X)π_𝓛 + π_𝓗 V π_𝓗`.
    pub fn verify_block_diagonal(&self, total: Momentum) -> Result<BlockDiagonalReport> {
        let sys = self.block_system(total)?;
        let block = &sys.block;
        let n = block.len();
        if n > DENSE_LIMIT {
            return Err(Error::domain(format!(
                "block of {n} points exceeds the dense limit {DENSE_LIMIT}"
            )));
        }
        let rel = block.rel_points();
        let low = block.low_mask();
        let kin = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(block.kinetic_diag()));
        let v = DMatrix::from_fn(n, n, |i, j| self.kernel.get((rel[i] - rel[j]).norm2_int()));
        let h = &kin + &v;

        let mut t = DMatrix::<f64>::identity(n, n);
        let mut vt = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if !low[i] && !low[j] {
                    vt[(i, j)] = v[(i, j)];
                }
            }
        }
        for (l, &q) in rel.iter().enumerate() {
            if !low[l] {
                continue;
            }
            let column = self.renorm_column(total - q, q)?;
            for i in 0..n {
                t[(i, l)] += column.correction[i];
                if low[i] {
                    vt[(i, l)] = column.values[i];
                }
            }
        }
        let lhs = t.transpose() * (&kin + &vt) * &t;
        let max_deviation = (lhs - &h).amax();

        let mut s = DMatrix::<f64>::identity(n, n);
        for i in 0..n {
            for l in 0..n {
                if low[l] && !low[i] {
                    s[(i, l)] = -(t[(i, l)]);
                }
            }
        }
        let shs = s.transpose() * &h * &s;
        let mut max_coupling = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if low[i] && !low[j] {
                    max_coupling = max_coupling.max(shs[(i, j)].abs());
                }
            }
        }
        let h_norm = (0..n)
            .map(|i| h.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(BlockDiagonalReport {
            dimension: n,
            max_deviation,
            max_coupling,
            h_norm,
        })
    }

    pub fn cache_dir(&self) -> Option<&Path> {
        self.cache_dir.as_deref()
    }
}

#[cfg(test)]
mod tests;
