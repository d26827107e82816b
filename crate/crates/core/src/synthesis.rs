//! Random generation of fractional Brownian paths and anisotropic fields.
//!
//! One-dimensional paths are exact: fractional Gaussian noise is drawn by
//! circulant embedding of its autocovariance and summed. Planar fields use
//! the discretized spectral representation
//!
//! ```text
//! y(k1/M, k2/M) = pi * sum_{n1,n2 = -M+1..M} z(n1,n2) g(pi n1, pi n2) e^{-2 i pi (n1 k1 + n2 k2) / 2M}
//! x = Re(y - y(0,0))
//! ```
//!
//! with `g = f^{1/2}`, `g(0,0) = 0` and `z` complex white noise, evaluated by
//! a single `2M x 2M` FFT.
//!
//! Randomness comes from ChaCha8 seeded through [`Seed`]; a given seed
//! reproduces the same bits on a given platform.

use std::sync::Arc;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::SpectralModel;

/// Eigenvalues below this fraction of the largest are treated as round-off.
const EIGEN_CLAMP: f64 = 1e-8;
const MAX_DOUBLINGS: usize = 2;

/// 64-bit experiment seed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed(pub u64);

impl Seed {
    /// Child seed for replicate or cell `index`. Children of one parent are
    /// independent of how many siblings are drawn.
    pub fn derive(self, index: u64) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15))))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples `X(k/N)`, `k = 0..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath<T> {
    values: Vec<T>,
    /// Ground truth index for synthetic paths.
    pub hurst: Option<f64>,
}

impl<T: Real> SampledPath<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::PathTooShort { got: values.len(), needed: 2 });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("path contains non-finite samples".into()));
        }
        Ok(Self { values, hurst: None })
    }

    pub fn with_hurst(mut self, h: f64) -> Self {
        self.hurst = Some(h);
        self
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Number of steps `N`.
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        1.0 / self.steps() as f64
    }

    /// Every `stride`-th sample starting at zero.
    pub fn decimate(&self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidParameter("stride must be positive".into()));
        }
        let values: Vec<T> = self.values.iter().step_by(stride).copied().collect();
        let mut out = Self::new(values)?;
        out.hurst = self.hurst;
        Ok(out)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), hurst: self.hurst }
    }
}

/// Field samples on the grid `{(k1/M, k2/M) : 0 <= k1, k2 <= M}`, row-major in
/// `k1` (first coordinate).
#[derive(Clone, Debug, PartialEq)]
pub struct GridField2D<T> {
    size: usize,
    values: Vec<T>,
    /// Ground truth `(h_h, h_v)` for synthetic fields.
    pub truth: Option<(f64, f64)>,
    pub seed: u64,
}

impl<T: Real> GridField2D<T> {
    /// `values` holds `(size + 1)^2` samples.
    pub fn new(size: usize, values: Vec<T>) -> Result<Self> {
        if size < 1 {
            return Err(Error::InvalidParameter("grid size must be positive".into()));
        }
        if values.len() != (size + 1) * (size + 1) {
            return Err(Error::InvalidParameter(format!(
                "grid of size {size} needs {} values, got {}",
                (size + 1) * (size + 1),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("field contains non-finite samples".into()));
        }
        Ok(Self { size, values, truth: None, seed: 0 })
    }

    pub fn from_fn(size: usize, f: impl Fn(usize, usize) -> T) -> Result<Self> {
        let n = size + 1;
        Self::new(size, (0..n * n).map(|i| f(i / n, i % n)).collect())
    }

    /// `M`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn at(&self, k1: usize, k2: usize) -> T {
        self.values[k1 * (self.size + 1) + k2]
    }

    /// Samples `x(k1/M, .)`.
    pub fn row(&self, k1: usize) -> &[T] {
        let n = self.size + 1;
        &self.values[k1 * n..(k1 + 1) * n]
    }

    /// Swap the two coordinates; the truth pair is swapped too.
    pub fn transpose(&self) -> Self {
        let n = self.size + 1;
        let values = (0..n * n).map(|i| self.values[(i % n) * n + i / n]).collect();
        Self { size: self.size, values, truth: self.truth.map(|(h, v)| (v, h)), seed: self.seed }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }
}

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: i64) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k.abs() as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

fn check_hurst(hurst: f64) -> Result<()> {
    if hurst > 0.0 && hurst < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("Hurst index {hurst} outside (0, 1)")))
    }
}

/// Exact fractional Gaussian noise sampler for one `(H, n)`; reusable across
/// seeds.
pub struct FgnGenerator<T: Real> {
    hurst: f64,
    len: usize,
    /// `sqrt(lambda_k / m)` for the circulant eigenvalues `lambda_k`.
    scales: Vec<T>,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Real> FgnGenerator<T> {
    pub fn new(hurst: f64, len: usize) -> Result<Self> {
        check_hurst(hurst)?;
        if len < 2 {
            return Err(Error::InvalidParameter("need at least two noise samples".into()));
        }
        let mut planner = FftPlanner::<f64>::new();
        let mut half = len - 1;
        let mut worst = 0.0;
        for _ in 0..=MAX_DOUBLINGS {
            let m = 2 * half;
            let mut row: Vec<Complex<f64>> = (0..m)
                .map(|j| {
                    let lag = if j <= half { j } else { m - j };
                    Complex::new(fgn_autocovariance(hurst, lag as i64), 0.0)
                })
                .collect();
            planner.plan_fft_forward(m).process(&mut row);
            let largest = row.iter().fold(0.0f64, |a, c| a.max(c.re));
            let smallest = row.iter().fold(f64::INFINITY, |a, c| a.min(c.re));
            if smallest >= -EIGEN_CLAMP * largest {
                let scales = row.iter().map(|c| T::of((c.re.max(0.0) / m as f64).sqrt())).collect();
                let fft = FftPlanner::<T>::new().plan_fft_forward(m);
                return Ok(Self { hurst, len, scales, fft });
            }
            worst = smallest;
            half *= 2;
        }
        Err(Error::EmbeddingNotPsd(worst))
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// Embedding size `m`.
    pub fn embedding_len(&self) -> usize {
        self.scales.len()
    }

    pub fn sample(&self, seed: Seed) -> Vec<T> {
        let mut rng = seed.rng();
        let mut buf: Vec<Complex<T>> = self
            .scales
            .iter()
            .map(|&s| {
                let re = T::standard_normal(&mut rng);
                let im = T::standard_normal(&mut rng);
                Complex::new(re * s, im * s)
            })
            .collect();
        self.fft.process(&mut buf);
        buf.truncate(self.len);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// `n` samples of unit-step fractional Gaussian noise with index `hurst`.
pub fn fgn_exact<T: Real>(hurst: f64, n: usize, seed: Seed) -> Result<Vec<T>> {
    Ok(FgnGenerator::new(hurst, n)?.sample(seed))
}

/// Fractional Brownian path sampler on `k/N`, `k = 0..=N`.
pub struct FbmGenerator<T: Real> {
    noise: FgnGenerator<T>,
    scale: T,
}

impl<T: Real> FbmGenerator<T> {
    pub fn new(hurst: f64, steps: usize) -> Result<Self> {
        let noise = FgnGenerator::new(hurst, steps)?;
        Ok(Self { noise, scale: T::of((steps as f64).powf(-hurst)) })
    }

    pub fn sample(&self, seed: Seed) -> SampledPath<T> {
        let mut values = Vec::with_capacity(self.noise.len + 1);
        let mut acc = T::zero();
        values.push(acc);
        for g in self.noise.sample(seed) {
            acc += g;
            values.push(acc * self.scale);
        }
        SampledPath { values, hurst: Some(self.noise.hurst) }
    }
}

pub fn fbm_path<T: Real>(hurst: f64, steps: usize, seed: Seed) -> Result<SampledPath<T>> {
    Ok(FbmGenerator::new(hurst, steps)?.sample(seed))
}

/// Spectral-representation field synthesizer for a fixed model and grid.
pub struct SraSynthesizer<T: Real> {
    model: SpectralModel,
    size: usize,
    /// `pi * g(pi n1, pi n2)` laid out like the noise.
    amplitude: Vec<T>,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Real> SraSynthesizer<T> {
    /// `size` is `M`, a power of two; the transform has side `2M`.
    pub fn new(model: &SpectralModel, size: usize) -> Result<Self> {
        if model.dim != 2 {
            return Err(Error::InvalidParameter("field synthesis needs a planar model".into()));
        }
        if size < 2 || !size.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("grid size {size} is not a power of two >= 2")));
        }
        let side = 2 * size;
        let mut amplitude = Vec::with_capacity(side * side);
        for i1 in 0..side {
            for i2 in 0..side {
                let (n1, n2) = (wrap_index(i1, size), wrap_index(i2, size));
                let a = if n1 == 0 && n2 == 0 {
                    0.0
                } else {
                    let xi = [std::f64::consts::PI * n1 as f64, std::f64::consts::PI * n2 as f64];
                    std::f64::consts::PI * model.density_unchecked(&xi, xi[0].hypot(xi[1])).sqrt()
                };
                amplitude.push(T::of(a));
            }
        }
        let fft = FftPlanner::<T>::new().plan_fft_forward(side);
        Ok(Self { model: *model, size, amplitude, fft })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn model(&self) -> &SpectralModel {
        &self.model
    }

    /// Complex white noise `z(n1, n2)` stored at `(n1 mod 2M) * 2M + (n2 mod 2M)`,
    /// drawn in storage order, real part first.
    pub fn draw_noise(&self, seed: Seed) -> Vec<Complex<T>> {
        let mut rng = seed.rng();
        (0..self.amplitude.len())
            .map(|_| {
                let re = T::standard_normal(&mut rng);
                let im = T::standard_normal(&mut rng);
                Complex::new(re, im)
            })
            .collect()
    }

    pub fn synthesize(&self, seed: Seed) -> GridField2D<T> {
        let noise = self.draw_noise(seed);
        let mut field = self.synthesize_from_noise(noise).expect("noise has the synthesizer's shape");
        field.seed = seed.0;
        field
    }

    /// Field from an explicit noise array in the [`draw_noise`](Self::draw_noise) layout.
    pub fn synthesize_from_noise(&self, mut noise: Vec<Complex<T>>) -> Result<GridField2D<T>> {
        let side = 2 * self.size;
        if noise.len() != side * side {
            return Err(Error::InvalidParameter(format!("noise has {} entries, need {}", noise.len(), side * side)));
        }
        for (z, &a) in noise.iter_mut().zip(&self.amplitude) {
            *z *= a;
        }
        // transform along n2 for every row, then along n1 for the needed columns
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); self.fft.get_inplace_scratch_len()];
        self.fft.process_with_scratch(&mut noise, &mut scratch);
        let n = self.size + 1;
        let mut values = vec![T::zero(); n * n];
        let mut column = vec![Complex::new(T::zero(), T::zero()); side];
        for k2 in 0..n {
            for (i1, c) in column.iter_mut().enumerate() {
                *c = noise[i1 * side + k2];
            }
            self.fft.process_with_scratch(&mut column, &mut scratch);
            for k1 in 0..n {
                values[k1 * n + k2] = column[k1].re;
            }
        }
        let origin = values[0];
        for v in &mut values {
            *v -= origin;
        }
        let mut field = GridField2D::new(self.size, values)?;
        field.truth = Some(self.model.index.axes());
        Ok(field)
    }
}

/// Frequency index `n in -M+1..=M` stored at position `i in 0..2M`.
pub(crate) fn wrap_index(i: usize, size: usize) -> i64 {
    if i <= size {
        i as i64
    } else {
        i as i64 - 2 * size as i64
    }
}

/// One planar field of grid size `M >= 8` from the discretized spectral
/// representation.
pub fn afb_sra<T: Real>(model: &SpectralModel, size: usize, seed: Seed) -> Result<GridField2D<T>> {
    if size < 8 {
        return Err(Error::InvalidParameter(format!("grid size {size} below 8")));
    }
    Ok(SraSynthesizer::new(model, size)?.synthesize(seed))
}
