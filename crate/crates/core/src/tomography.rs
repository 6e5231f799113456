//! Forward model of the two-ion Fourier-push measurement, shot-noise
//! sampling, inverse-Fourier reconstruction of the normal-coordinate
//! distribution, and ground-truth position distributions.
//!
//! Grid wavevectors are *push* wavevectors: a grid point k labels the push
//! unitary exp(-(i/2) sigma (2k) (a + a^dag)), whose readout is the
//! characteristic function chi(q) = Tr[rho e^{i q (a + a^dag)}] at q = k.
//! This is the laser-calibration convention of the experiment's k axes
//! (k = eta Omega t); in terms of the dimensionless position x = (a +
//! a^dag)/sqrt(2) the sampled wavevector is sqrt(2) k. The
//! [`characteristic_function`] operation itself uses x-conjugate
//! wavevectors, where the two-mode vacuum reads exp(-(k_x^2 + k_y^2)/4).

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, MotionalDensity, SpinBosonState};
use crate::linalg::CMat;

/// k-space sampling grid (push wavevectors, see module docs).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KGrid {
    /// Cutoff and extent per axis; the grid spans [-k_max, k_max].
    pub k_max: f64,
    /// Points per axis (odd counts sample k = 0).
    pub points: usize,
    /// Rotation angle applied to the wavevectors (AC-Stark axis rotation).
    pub rotation: f64,
}

impl Default for KGrid {
    fn default() -> Self {
        Self { k_max: 2.8, points: 25, rotation: 0.0 }
    }
}

impl KGrid {
    pub fn axis(&self) -> Vec<f64> {
        linspace(-self.k_max, self.k_max, self.points)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.k_max / (self.points - 1) as f64
    }

    /// Rotated push wavevector at grid indices (i, j).
    pub fn wavevector(&self, i: usize, j: usize) -> (f64, f64) {
        let ks = self.axis();
        let (c, s) = (self.rotation.cos(), self.rotation.sin());
        let (kx, ky) = (ks[i], ks[j]);
        (c * kx - s * ky, s * kx + c * ky)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Shot-noise model: per-point binomial sampling with a deterministic
/// per-point seed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShotNoise {
    pub shots: u32,
    pub seed: u64,
}

/// Sampled characteristic-function maps: the sigma_z-prepared run reads the
/// cosine (real) part and the sigma_y-prepared run the sine (imaginary)
/// part.
#[derive(Debug, Clone)]
pub struct FourierSamples {
    pub grid: KGrid,
    pub cos_part: Array2<f64>,
    pub sin_part: Array2<f64>,
    pub noise: Option<ShotNoise>,
}

impl FourierSamples {
    pub fn is_noisy(&self) -> bool {
        self.noise.is_some()
    }

    /// The k_y = 0 row in the rotated frame: the cut along the grid's
    /// rotation angle, (k, cos, sin) triples.
    pub fn axis_cut(&self) -> Vec<(f64, f64, f64)> {
        let j = self.grid.points / 2;
        let ks = self.grid.axis();
        (0..self.grid.points)
            .map(|i| (ks[i], self.cos_part[(i, j)], self.sin_part[(i, j)]))
            .collect()
    }

    /// Largest violation of cos(-k) = cos(k), sin(-k) = -sin(k); zero only
    /// makes sense for exact samples.
    pub fn symmetry_error(&self) -> f64 {
        let n = self.grid.points;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let (ri, rj) = (n - 1 - i, n - 1 - j);
                worst = worst
                    .max((self.cos_part[(i, j)] - self.cos_part[(ri, rj)]).abs())
                    .max((self.sin_part[(i, j)] + self.sin_part[(ri, rj)]).abs());
            }
        }
        worst
    }
}

/// <m| D(alpha) |n> on the truncated block, exact in the full oscillator
/// (Glauber displacement matrix elements via Laguerre recurrences).
pub fn displacement_block(n_max: usize, alpha: C64) -> CMat {
    let x = alpha.norm_sqr();
    let gauss = (-x / 2.0).exp();
    let mut d = CMat::zeros((n_max, n_max));
    for m in 0..n_max {
        for n in 0..n_max {
            let (small, k) = if m >= n { (n, m - n) } else { (m, n - m) };
            // sqrt(small!/(small+k)!) alpha^k, accumulated stably
            let mut pref = C64::new(gauss, 0.0);
            let base = if m >= n { alpha } else { -alpha.conj() };
            for j in small + 1..=small + k {
                pref *= base / C64::new((j as f64).sqrt(), 0.0);
            }
            d[(m, n)] = pref * laguerre(small, k as f64, x);
        }
    }
    d
}

/// Generalized Laguerre polynomial L_n^{(k)}(x) by upward recurrence.
fn laguerre(n: usize, k: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut lm1 = 1.0;
    let mut l = 1.0 + k - x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + k - x) * l - (jf + k) * lm1) / (jf + 1.0);
        lm1 = l;
        l = next;
    }
    l
}

/// Tr[rho e^{i q_x (a_x + a_x^dag)} e^{i q_y (a_y + a_y^dag)}] (push
/// wavevectors).
pub fn characteristic_function_push(rho: &MotionalDensity, q: (f64, f64)) -> C64 {
    let (nx, ny) = (rho.space.n_max_x, rho.space.n_max_y);
    // e^{i q (a + a^dag)} = D(i q)
    let dx = displacement_block(nx, C64::new(0.0, q.0));
    let dy = displacement_block(ny, C64::new(0.0, q.1));
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..nx {
        for np in 0..nx {
            let mut inner = C64::new(0.0, 0.0);
            for m in 0..ny {
                for mp in 0..ny {
                    inner += rho.matrix[(n * ny + m, np * ny + mp)] * dy[(mp, m)];
                }
            }
            acc += dx[(np, n)] * inner;
        }
    }
    acc
}

/// Tr[rho e^{i (k_x x + k_y y)}] with x-conjugate wavevectors
/// (x = (a + a^dag)/sqrt 2): the two-mode vacuum gives
/// exp(-(k_x^2 + k_y^2)/4). Real part = sigma_z-prepared signal, imaginary
/// part = sigma_y-prepared signal.
pub fn characteristic_function(rho: &MotionalDensity, k: (f64, f64)) -> C64 {
    characteristic_function_push(rho, (k.0 / 2f64.sqrt(), k.1 / 2f64.sqrt()))
}

fn point_seed(seed: u64, index: u64, part: u64) -> u64 {
    // splitmix64 over (seed, point index, part tag)
    let mut z = seed ^ index.wrapping_mul(0x9e3779b97f4a7c15) ^ (part << 56);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn sample_mean(value: f64, shots: u32, rng_seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let p = ((1.0 + value) / 2.0).clamp(0.0, 1.0);
    let mut up = 0u32;
    for _ in 0..shots {
        if rng.random_bool(p) {
            up += 1;
        }
    }
    2.0 * up as f64 / shots as f64 - 1.0
}

/// Evaluate the characteristic function on the (optionally rotated) grid;
/// with finite shots each entry is the mean of Bernoulli draws seeded by
/// the point index, so results do not depend on evaluation order.
pub fn scan(rho: &MotionalDensity, grid: &KGrid, noise: Option<ShotNoise>) -> FourierSamples {
    let n = grid.points;
    let flat: Vec<(f64, f64)> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let chi = characteristic_function_push(rho, grid.wavevector(i, j));
            match noise {
                None => (chi.re, chi.im),
                Some(sn) => (
                    sample_mean(chi.re, sn.shots, point_seed(sn.seed, idx as u64, 0)),
                    sample_mean(chi.im, sn.shots, point_seed(sn.seed, idx as u64, 1)),
                ),
            }
        })
        .collect();
    let mut cos_part = Array2::zeros((n, n));
    let mut sin_part = Array2::zeros((n, n));
    for (idx, (c, s)) in flat.into_iter().enumerate() {
        cos_part[(idx / n, idx % n)] = c;
        sin_part[(idx / n, idx % n)] = s;
    }
    FourierSamples { grid: *grid, cos_part, sin_part, noise }
}

/// Real-space output grid specification, [-extent, extent]^2.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub extent: f64,
    pub resolution: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { extent: 4.0, resolution: 101 }
    }
}

impl GridSpec {
    pub fn axis(&self) -> Vec<f64> {
        linspace(-self.extent, self.extent, self.resolution)
    }

    pub fn cell_area(&self) -> f64 {
        let d = 2.0 * self.extent / (self.resolution - 1) as f64;
        d * d
    }
}

/// Shot-noise bookkeeping carried by reconstructed grids so that ratio
/// uncertainties can be propagated through the linear inverse transform.
#[derive(Debug, Clone)]
pub struct ReconNoise {
    /// Wavevectors of the included samples (x-conjugate units).
    pub qvecs: Vec<(f64, f64)>,
    /// Quadrature coefficient of each sample in the reconstruction sum
    /// (after normalization).
    pub coef: Vec<f64>,
    /// Plug-in variances of the measured cosine / sine parts.
    pub var_cos: Vec<f64>,
    pub var_sin: Vec<f64>,
}

/// Real-space distribution (reconstructed grids may carry negative values
/// and a shot-noise model).
#[derive(Debug, Clone)]
pub struct SpatialGrid {
    pub spec: GridSpec,
    pub values: Array2<f64>,
    pub noise: Option<ReconNoise>,
}

impl SpatialGrid {
    pub fn integral(&self) -> f64 {
        self.values.sum() * self.spec.cell_area()
    }

    /// Total mass of negative cells (reported, never clipped).
    pub fn negativity(&self) -> f64 {
        self.values.iter().filter(|v| **v < 0.0).map(|v| -*v).sum::<f64>()
            * self.spec.cell_area()
    }
}

/// Inverse Fourier reconstruction of the position distribution from
/// sampled characteristic-function data: trapezoidal quadrature on the
/// square grid with a hard disk cutoff at |k| >= k_max, normalized to unit
/// grid integral. Negative excursions from noise and ringing are kept.
pub fn reconstruct(samples: &FourierSamples, out: &GridSpec) -> Result<SpatialGrid> {
    let grid = &samples.grid;
    if grid.k_max * out.extent < std::f64::consts::PI {
        return Err(Error::InsufficientCoverage(grid.k_max * out.extent));
    }
    let n = grid.points;
    let ks = grid.axis();
    // push wavevectors q = sqrt(2) k sample e^{i q (a+a^dag)} =
    // e^{i (sqrt2 q) x}: x-conjugate wavevector and measure
    let unit = 2f64.sqrt();
    let dk = grid.spacing() * unit;
    let norm = dk * dk / (std::f64::consts::TAU * std::f64::consts::TAU);

    let mut qvecs = Vec::new();
    let mut coef = Vec::new();
    let mut cvals = Vec::new();
    let mut svals = Vec::new();
    let mut var_cos = Vec::new();
    let mut var_sin = Vec::new();
    for i in 0..n {
        for j in 0..n {
            // hard disk cutoff in grid units
            if ks[i] * ks[i] + ks[j] * ks[j] >= grid.k_max * grid.k_max {
                continue;
            }
            let mut w = 1.0;
            if i == 0 || i == n - 1 {
                w *= 0.5;
            }
            if j == 0 || j == n - 1 {
                w *= 0.5;
            }
            let (qx, qy) = grid.wavevector(i, j);
            qvecs.push((unit * qx, unit * qy));
            coef.push(w * norm);
            cvals.push(samples.cos_part[(i, j)]);
            svals.push(samples.sin_part[(i, j)]);
            if let Some(sn) = samples.noise {
                let c = samples.cos_part[(i, j)];
                let s = samples.sin_part[(i, j)];
                var_cos.push((1.0 - c * c).max(0.0) / sn.shots as f64);
                var_sin.push((1.0 - s * s).max(0.0) / sn.shots as f64);
            }
        }
    }

    let xs = out.axis();
    let res = out.resolution;
    let rows: Vec<Vec<f64>> = (0..res)
        .into_par_iter()
        .map(|ix| {
            let x = xs[ix];
            let mut row = vec![0.0f64; res];
            for (((q, w), c), s) in qvecs.iter().zip(&coef).zip(&cvals).zip(&svals) {
                let (sin_x, cos_x) = (q.0 * x).sin_cos();
                for (iy, out_v) in row.iter_mut().enumerate() {
                    // Re[(c + i s) e^{-i q.r}] = c cos(q.r) + s sin(q.r)
                    let (sin_y, cos_y) = (q.1 * xs[iy]).sin_cos();
                    let cos_qr = cos_x * cos_y - sin_x * sin_y;
                    let sin_qr = sin_x * cos_y + cos_x * sin_y;
                    *out_v += w * (c * cos_qr + s * sin_qr);
                }
            }
            row
        })
        .collect();
    let mut values = Array2::zeros((res, res));
    for (ix, row) in rows.into_iter().enumerate() {
        for (iy, v) in row.into_iter().enumerate() {
            values[(ix, iy)] = v;
        }
    }

    let total = values.sum() * out.cell_area();
    if total <= 0.0 {
        return Err(Error::EmptyDistribution);
    }
    values.mapv_inplace(|v| v / total);

    let noise = samples.noise.map(|_| ReconNoise {
        qvecs,
        coef: coef.iter().map(|w| w / total).collect(),
        var_cos,
        var_sin,
    });
    Ok(SpatialGrid { spec: *out, values, noise })
}

/// Table of dimensionless harmonic-oscillator eigenfunctions psi_n(x) by
/// the stable two-term recurrence; rows indexed by n.
pub fn hermite_table(n_max: usize, xs: &[f64]) -> Array2<f64> {
    let mut out = Array2::zeros((n_max, xs.len()));
    for (c, &x) in xs.iter().enumerate() {
        out[(0, c)] = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
        if n_max > 1 {
            out[(1, c)] = 2f64.sqrt() * x * out[(0, c)];
        }
    }
    for n in 1..n_max.saturating_sub(1) {
        let a = (2.0 / (n as f64 + 1.0)).sqrt();
        let b = (n as f64 / (n as f64 + 1.0)).sqrt();
        for (c, &x) in xs.iter().enumerate() {
            out[(n + 1, c)] = a * x * out[(n, c)] - b * out[(n - 1, c)];
        }
    }
    out
}

/// Ground-truth position distribution of the motional state (spin traced
/// out when starting from a full state).
pub fn position_distribution(state: &SpinBosonState, out: &GridSpec) -> SpatialGrid {
    let space = state.space;
    let (nx, ny) = (space.n_max_x, space.n_max_y);
    let xs = out.axis();
    let bx = hermite_table(nx, &xs);
    let by = hermite_table(ny, &xs);
    let res = out.resolution;
    let mut values = Array2::zeros((res, res));
    for s in 0..fock::SPIN_DIM {
        // A[x, m] = sum_n c[n, m] psi_n(x), then psi(x, y) = A[x, :] . by[:, y]
        let mut a = Array2::<C64>::zeros((res, ny));
        for n in 0..nx {
            for m in 0..ny {
                let cnm = state.amplitudes()[space.index(s, n, m)];
                if cnm.norm_sqr() == 0.0 {
                    continue;
                }
                for ix in 0..res {
                    a[(ix, m)] += cnm * bx[(n, ix)];
                }
            }
        }
        for ix in 0..res {
            for iy in 0..res {
                let mut amp = C64::new(0.0, 0.0);
                for m in 0..ny {
                    amp += a[(ix, m)] * by[(m, iy)];
                }
                values[(ix, iy)] += amp.norm_sqr();
            }
        }
    }
    SpatialGrid { spec: *out, values, noise: None }
}

/// Position distribution of a reduced motional density matrix.
pub fn position_distribution_rho(rho: &MotionalDensity, out: &GridSpec) -> SpatialGrid {
    let space = rho.space;
    let (nx, ny) = (space.n_max_x, space.n_max_y);
    let xs = out.axis();
    let bx = hermite_table(nx, &xs);
    let by = hermite_table(ny, &xs);
    let res = out.resolution;

    // g[(n, np), iy] = sum_{m, mp} rho[(n m), (np mp)] psi_m(y) psi_mp(y)
    let mut g = vec![0.0f64; nx * nx * res];
    for n in 0..nx {
        for np in 0..nx {
            for m in 0..ny {
                for mp in 0..ny {
                    let r = rho.matrix[(n * ny + m, np * ny + mp)];
                    if r.norm_sqr() == 0.0 {
                        continue;
                    }
                    let base = (n * nx + np) * res;
                    for iy in 0..res {
                        // the y-contractions are real only after the m/mp sum;
                        // accumulate the real part of the symmetric pairing
                        g[base + iy] += (r * by[(m, iy)] * by[(mp, iy)]).re;
                    }
                }
            }
        }
    }
    let mut values = Array2::zeros((res, res));
    for ix in 0..res {
        for iy in 0..res {
            let mut acc = 0.0;
            for n in 0..nx {
                for np in 0..nx {
                    acc += bx[(n, ix)] * bx[(np, ix)] * g[(n * nx + np) * res + iy];
                }
            }
            values[(ix, iy)] = acc;
        }
    }
    SpatialGrid { spec: *out, values, noise: None }
}

/// Multiplicative attenuation of the push signal from an off-resonant
/// spectator mode of thermal width sigma:
/// exp(-4 sigma^2 (eta2 Omega / Delta)^2 sin^2(Delta t / 2)).
pub fn offresonant_envelope(sigma: f64, eta2_omega: f64, delta: f64, t: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let ratio = eta2_omega / delta;
    let s = (delta * t / 2.0).sin();
    Ok((-4.0 * sigma * sigma * ratio * ratio * s * s).exp())
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

/// Sidecar metadata written next to CSV artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridMetadata {
    pub kind: String,
    pub points_x: usize,
    pub points_y: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub rotation: f64,
    pub shots: Option<u32>,
    pub seed: Option<u64>,
}

fn write_grid_csv(
    path: &std::path::Path,
    xs: &[f64],
    ys: &[f64],
    values: &Array2<f64>,
) -> Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "x_index,y_index,x,y,value")?;
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            writeln!(f, "{},{},{},{},{}", i, j, x, y, values[(i, j)])?;
        }
    }
    Ok(())
}

impl FourierSamples {
    /// Write one part (cos or sin) as CSV with the standard header.
    pub fn write_csv(&self, path: &std::path::Path, part: SamplePart) -> Result<()> {
        let ks = self.grid.axis();
        let values = match part {
            SamplePart::Cos => &self.cos_part,
            SamplePart::Sin => &self.sin_part,
        };
        write_grid_csv(path, &ks, &ks, values)
    }

    pub fn metadata(&self, kind: &str) -> GridMetadata {
        GridMetadata {
            kind: kind.to_string(),
            points_x: self.grid.points,
            points_y: self.grid.points,
            x_min: -self.grid.k_max,
            x_max: self.grid.k_max,
            rotation: self.grid.rotation,
            shots: self.noise.map(|n| n.shots),
            seed: self.noise.map(|n| n.seed),
        }
    }

    pub fn write_metadata(&self, path: &std::path::Path, kind: &str) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.metadata(kind))
            .expect("metadata serializes");
        std::fs::write(path, json)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplePart {
    Cos,
    Sin,
}

impl SpatialGrid {
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let xs = self.spec.axis();
        write_grid_csv(path, &xs, &xs, &self.values)
    }

    pub fn metadata(&self, kind: &str) -> GridMetadata {
        GridMetadata {
            kind: kind.to_string(),
            points_x: self.spec.resolution,
            points_y: self.spec.resolution,
            x_min: -self.spec.extent,
            x_max: self.spec.extent,
            rotation: 0.0,
            shots: None,
            seed: None,
        }
    }

    pub fn write_metadata(&self, path: &std::path::Path, kind: &str) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.metadata(kind))
            .expect("metadata serializes");
        std::fs::write(path, json)?;
        Ok(())
    }
}
