//! Momentum-space convolution `y_i = Σ_j K(|q_i - q_j|²) x_j` over the points of
//! a pair block, where `K` is a radial kernel on integer displacements.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::lattice::Momentum;

/// Blocks with at least this many points use the FFT path under [`ConvolutionMethod::Auto`].
pub const FFT_THRESHOLD: usize = 4000;

/// Lines gathered per strided FFT batch.
const BATCH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionMethod {
    #[default]
    Auto,
    Direct,
    Fft,
}

/// Kernel values indexed by the squared integer displacement `|d|²`.
#[derive(Debug, Clone)]
pub struct KernelTable {
    values: Vec<f64>,
}

impl KernelTable {
    pub fn new(max_norm2: i64, f: impl Fn(i64) -> f64 + Sync + Send) -> Self {
        let values = (0..=max_norm2).into_par_iter().map(f).collect();
        KernelTable { values }
    }

    pub fn max_norm2(&self) -> i64 {
        self.values.len() as i64 - 1
    }

    #[inline]
    pub fn get(&self, norm2: i64) -> f64 {
        self.values[norm2 as usize]
    }
}

pub enum Convolver {
    Direct(DirectConvolver),
    Fft(FftConvolver),
}

impl Convolver {
    pub fn new(points: &[Momentum], kernel: Arc<KernelTable>, method: ConvolutionMethod) -> Self {
        let use_fft = match method {
            ConvolutionMethod::Auto => points.len() >= FFT_THRESHOLD,
            ConvolutionMethod::Direct => false,
            ConvolutionMethod::Fft => true,
        };
        if use_fft {
            Convolver::Fft(FftConvolver::new(points, &kernel))
        } else {
            Convolver::Direct(DirectConvolver {
                points: points.to_vec(),
                kernel,
            })
        }
    }

    pub fn method(&self) -> ConvolutionMethod {
        match self {
            Convolver::Direct(_) => ConvolutionMethod::Direct,
            Convolver::Fft(_) => ConvolutionMethod::Fft,
        }
    }

    /// Overwrites `out` with the convolution of `x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Convolver::Direct(c) => c.apply(x, out),
            Convolver::Fft(c) => c.apply(x, out),
        }
    }
}

pub struct DirectConvolver {
    points: Vec<Momentum>,
    kernel: Arc<KernelTable>,
}

impl DirectConvolver {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.points.len());
        let support: Vec<(Momentum, f64)> = self
            .points
            .iter()
            .zip(x)
            .filter(|(_, &v)| v != 0.0)
            .map(|(&q, &v)| (q, v))
            .collect();
        out.par_iter_mut().enumerate().for_each(|(i, y)| {
            let qi = self.points[i];
            *y = support
                .iter()
                .map(|&(qj, v)| self.kernel.get((qi - qj).norm2_int()) * v)
                .sum();
        });
    }
}

/// Zero-padded 3D FFT convolution on an `m³` grid with `m ≥ 2E - 1`, where `E`
/// is the largest block extent along an axis. Forward transforms skip the
/// all-zero z-lines and x-planes; inverse transforms skip outputs outside the
/// block's bounding box. The kernel is even in every coordinate, so its
/// spectrum is real and stored as one octant.
pub struct FftConvolver {
    m: usize,
    extent: [usize; 3],
    offsets: Vec<usize>,
    zlines: Vec<usize>,
    half: usize,
    spectrum: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftConvolver {
    fn new(points: &[Momentum], kernel: &KernelTable) -> Self {
        let mut lo = [i32::MAX; 3];
        let mut hi = [i32::MIN; 3];
        for q in points {
            for a in 0..3 {
                lo[a] = lo[a].min(q.0[a]);
                hi[a] = hi[a].max(q.0[a]);
            }
        }
        let extent = [0, 1, 2].map(|a| (hi[a] - lo[a] + 1).max(1) as usize);
        let e = *extent.iter().max().unwrap();
        let m = smooth_size(2 * e - 1);
        let offsets: Vec<usize> = points
            .iter()
            .map(|q| {
                let c = [0, 1, 2].map(|a| (q.0[a] - lo[a]) as usize);
                (c[0] * m + c[1]) * m + c[2]
            })
            .collect();
        let mut zlines: Vec<usize> = offsets.iter().map(|o| o / m).collect();
        zlines.sort_unstable();
        zlines.dedup();

        let half = m / 2 + 1;
        let spectrum = even_spectrum(kernel, e, m, half);

        let mut planner = FftPlanner::new();
        FftConvolver {
            m,
            extent,
            offsets,
            zlines,
            half,
            spectrum,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    pub fn grid_size(&self) -> usize {
        self.m
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.offsets.len());
        let m = self.m;
        let mut g = vec![Complex64::new(0.0, 0.0); m * m * m];
        for (&off, &v) in self.offsets.iter().zip(x) {
            g[off].re = v;
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        let mut batch = vec![Complex64::new(0.0, 0.0); BATCH * m];

        for &line in &self.zlines {
            self.forward
                .process_with_scratch(&mut g[line * m..(line + 1) * m], &mut scratch);
        }
        for xi in 0..self.extent[0] {
            strided_pass(&mut g, &*self.forward, xi * m * m, m, m, m, &mut batch, &mut scratch);
        }
        for yi in 0..m {
            strided_pass(&mut g, &*self.forward, yi * m, m * m, m, m, &mut batch, &mut scratch);
        }

        let h = self.half;
        let fold = |a: usize| a.min(m - a);
        for a in 0..m {
            let fa = fold(a) * h;
            for b in 0..m {
                let fb = (fa + fold(b)) * h;
                let row = &mut g[(a * m + b) * m..(a * m + b + 1) * m];
                for (c, z) in row.iter_mut().enumerate() {
                    *z *= self.spectrum[fb + fold(c)];
                }
            }
        }

        for yi in 0..m {
            strided_pass(&mut g, &*self.inverse, yi * m, m * m, m, m, &mut batch, &mut scratch);
        }
        for xi in 0..self.extent[0] {
            strided_pass(&mut g, &*self.inverse, xi * m * m, m, m, m, &mut batch, &mut scratch);
        }
        for &line in &self.zlines {
            self.inverse
                .process_with_scratch(&mut g[line * m..(line + 1) * m], &mut scratch);
        }
        for (y, &off) in out.iter_mut().zip(&self.offsets) {
            *y = g[off].re;
        }
    }
}

/// FFTs of the `nlines` lines `base + l + t·stride` (`t = 0..m`), gathered in
/// batches of consecutive `l` so that reads are contiguous.
#[allow(clippy::too_many_arguments)]
fn strided_pass(
    g: &mut [Complex64],
    fft: &dyn Fft<f64>,
    base: usize,
    stride: usize,
    nlines: usize,
    m: usize,
    batch: &mut [Complex64],
    scratch: &mut [Complex64],
) {
    let mut l0 = 0;
    while l0 < nlines {
        let b = BATCH.min(nlines - l0);
        for t in 0..m {
            let src = &g[base + l0 + t * stride..base + l0 + t * stride + b];
            for (j, &v) in src.iter().enumerate() {
                batch[j * m + t] = v;
            }
        }
        fft.process_with_scratch(&mut batch[..b * m], scratch);
        for t in 0..m {
            let dst = &mut g[base + l0 + t * stride..base + l0 + t * stride + b];
            for (j, v) in dst.iter_mut().enumerate() {
                *v = batch[j * m + t];
            }
        }
        l0 += b;
    }
}

/// Octant `[0, m/2]³` of the (real, even) DFT of the kernel restricted to
/// displacements `|d_a| < e`, divided by `m³` so the inverse transform is normalized.
fn even_spectrum(kernel: &KernelTable, e: usize, m: usize, half: usize) -> Vec<f64> {
    let needed = 3 * ((e as i64) - 1).pow(2);
    assert!(kernel.max_norm2() >= needed, "kernel table too short");
    // cos table with the d > 0 weights folded in
    let cos: Vec<f64> = (0..half)
        .flat_map(|f| {
            (0..e).map(move |d| {
                let w = if d == 0 { 1.0 } else { 2.0 };
                w * (2.0 * std::f64::consts::PI * (f * d % m) as f64 / m as f64).cos()
            })
        })
        .collect();
    let transform = |src: &[f64], len_in: usize, outer: usize| -> Vec<f64> {
        // src is [outer][len_in] (after earlier passes, axes are rotated);
        // produce [half][outer] so the next pass transforms the next axis.
        let mut dst = vec![0.0; half * outer];
        dst.par_chunks_mut(outer).enumerate().for_each(|(f, row)| {
            let c = &cos[f * e..f * e + len_in];
            for (o, v) in row.iter_mut().enumerate() {
                let s = &src[o * len_in..(o + 1) * len_in];
                *v = s.iter().zip(c).map(|(a, b)| a * b).sum();
            }
        });
        dst
    };
    let mut g = vec![0.0; e * e * e];
    for dx in 0..e {
        for dy in 0..e {
            for dz in 0..e {
                g[(dx * e + dy) * e + dz] = kernel.get((dx * dx + dy * dy + dz * dz) as i64);
            }
        }
    }
    // [dx][dy][dz] -> [fz][dx][dy] -> [fy][fz][dx] -> [fx][fy][fz]
    let g = transform(&g, e, e * e);
    let g = transform(&g, e, half * e);
    let mut g = transform(&g, e, half * half);
    let norm = 1.0 / (m as f64).powi(3);
    g.iter_mut().for_each(|v| *v *= norm);
    g
}

/// Smallest `n ≥ min` whose prime factors are all in {2, 3, 5, 7}.
fn smooth_size(min: usize) -> usize {
    (min.max(1)..)
        .find(|&n| {
            let mut r = n;
            for p in [2, 3, 5, 7] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .unwrap()
}
