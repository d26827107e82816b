//! Asymptotic constants of the quadratic-variation estimator.
//!
//! All constants derive from the integrals
//!
//! ```text
//! Gamma(p) = int_R e^{-i p xi} h(xi) |xi|^{-2H-1} d xi,   h(xi) = P_a(e^{-i u xi}) conj(P_a(e^{-i v xi}))
//! ```
//!
//! For integer `p` the factor `e^{-i p xi} h(xi)` is `2 pi`-periodic, so the
//! line integral folds onto one period against the periodized power weight
//! `W(t) = sum_n |t + 2 pi n|^{-2H-1}`, whose tail is a pair of Hurwitz zeta
//! values. The singularity of `W` at zero is integrable because `h` vanishes
//! to order `2K` there; a power substitution smooths it before adaptive
//! Gauss-Kronrod quadrature.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::filters::DiscreteFilter;
use crate::quad::{self, hurwitz_zeta, Tolerance};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoryOptions {
    /// Largest lag summed in the covariance series.
    pub p_max: usize,
    /// Quadrature relative tolerance.
    pub rel_tol: f64,
    /// Quadrature panels per unit of oscillation frequency.
    pub panels_per_period: f64,
}

impl Default for TheoryOptions {
    fn default() -> Self {
        Self { p_max: 4096, rel_tol: 1e-12, panels_per_period: 2.0 }
    }
}

/// Relative size of the fitted tail at which the series is accepted.
const SERIES_TOL: f64 = 1e-7;
/// Tail size tolerated once `p_max` is reached.
const SERIES_BUDGET: f64 = 1e-6;
/// Largest fitted tail, relative to the partial sum, trusted once the
/// extrapolated total has settled.
const EXTRAPOLATION_LIMIT: f64 = 1e-3;
/// Multiple of the quadrature tolerance below which a lag is treated as zero.
const NOISE_FLOOR: f64 = 100.0;

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticConstants {
    pub coeffs: Vec<f64>,
    pub u: usize,
    pub v: usize,
    pub hurst: f64,
    pub e_u: f64,
    pub e_v: f64,
    pub c_uu: f64,
    pub c_vv: f64,
    pub c_uv: f64,
    /// Limit of `N Var(H_hat)`.
    pub gamma: f64,
}

/// `Gamma(p)` for one filter, dilation pair and index.
struct Kernel {
    coeffs: Vec<f64>,
    u: usize,
    v: usize,
    beta: f64,
    /// Substitution power `t = pi x^m`.
    power: i32,
    span: usize,
    opts: TheoryOptions,
}

impl Kernel {
    fn new<T: Real>(filter: &DiscreteFilter<T>, u: usize, v: usize, hurst: f64, opts: TheoryOptions) -> Result<Self> {
        check_order(filter.order(), hurst, 0.0)?;
        if u == 0 || v == 0 {
            return Err(Error::InvalidParameter("dilations must be at least 1".into()));
        }
        let beta = 2.0 * hurst + 1.0;
        // integrand ~ t^alpha at zero; after t = pi x^m it is x^{m(alpha+1)-1}
        let alpha = 2.0 * filter.order() as f64 - beta;
        let power = (2.0 / (alpha + 1.0)).ceil().clamp(1.0, 40.0) as i32;
        Ok(Self {
            coeffs: filter.coeffs().iter().map(|c| c.as_f64()).collect(),
            u,
            v,
            beta,
            power,
            span: filter.span(),
            opts,
        })
    }

    /// `P_a(e^{-i d t}) = sum_k a_k (e^{-i k d t} - 1)`, accurate for small `t`.
    fn poly(&self, d: usize, t: f64) -> Complex<f64> {
        self.coeffs.iter().enumerate().fold(Complex::new(0.0, 0.0), |acc, (k, &a)| {
            let half = 0.5 * (k * d) as f64 * t;
            // e^{-2i half} - 1 = -2i sin(half) e^{-i half}
            let s = half.sin();
            acc + Complex::new(-2.0 * s * half.sin(), -2.0 * s * half.cos()) * a
        })
    }

    fn weight(&self, t: f64) -> f64 {
        let b = self.beta;
        let x = t / (2.0 * PI);
        t.powf(-b) + (2.0 * PI).powf(-b) * (hurwitz_zeta(b, 1.0 + x) + hurwitz_zeta(b, 1.0 - x))
    }

    /// `Gamma(p)` with absolute quadrature tolerance `abs`.
    fn fourier(&self, p: i64, abs: f64) -> Result<f64> {
        let m = self.power;
        let (u, v) = (self.u, self.v);
        let integrand = |x: f64| {
            let t = PI * x.powi(m);
            if t <= 0.0 {
                return 0.0;
            }
            let h = self.poly(u, t) * self.poly(v, t).conj();
            let phase = Complex::from_polar(1.0, -(p as f64) * t);
            let jac = PI * m as f64 * x.powi(m - 1);
            (phase * h).re * self.weight(t) * jac
        };
        let freq = p.unsigned_abs() as f64 + (self.span * u.max(v)) as f64;
        let panels = (self.opts.panels_per_period * (freq + 1.0)).ceil() as usize;
        let points: Vec<f64> = (0..=panels).map(|j| (j as f64 / panels as f64).powf(1.0 / m as f64)).collect();
        let tol = Tolerance { abs, rel: self.opts.rel_tol, max_splits: 50_000 + 20 * panels };
        // the integrand over (-pi, pi) is even in its real part
        Ok(2.0 * quad::integrate_points(integrand, &points, tol)?.value)
    }
}

fn check_order(order: usize, hurst: f64, margin: f64) -> Result<()> {
    if hurst.is_nan() || hurst <= 0.0 || !hurst.is_finite() {
        return Err(Error::InvalidParameter(format!("index {hurst} must be positive")));
    }
    if (order as f64) <= hurst + margin {
        let need = if margin == 0.0 { format!("K > {hurst}") } else { format!("K > {hurst} + {margin}") };
        return Err(Error::OrderTooLow { order, hurst, need });
    }
    Ok(())
}

/// `E_a^u(H) = int |P_a(e^{-i u xi})|^2 |xi|^{-2H-1} d xi`, which equals
/// `u^{2H} E_a^1(H)`. Requires `K > H`.
pub fn e_const<T: Real>(filter: &DiscreteFilter<T>, u: usize, hurst: f64) -> Result<f64> {
    e_const_with(filter, u, hurst, TheoryOptions::default())
}

pub fn e_const_with<T: Real>(filter: &DiscreteFilter<T>, u: usize, hurst: f64, opts: TheoryOptions) -> Result<f64> {
    Kernel::new(filter, u, u, hurst, opts)?.fourier(0, 0.0)
}

/// `int e^{-i p xi} h_a^{u,v}(xi) |xi|^{-2H-1} d xi`, real for real filters.
pub fn gamma_fourier<T: Real>(filter: &DiscreteFilter<T>, u: usize, v: usize, hurst: f64, p: i64) -> Result<f64> {
    gamma_fourier_with(filter, u, v, hurst, p, TheoryOptions::default())
}

pub fn gamma_fourier_with<T: Real>(
    filter: &DiscreteFilter<T>,
    u: usize,
    v: usize,
    hurst: f64,
    p: i64,
    opts: TheoryOptions,
) -> Result<f64> {
    let kernel = Kernel::new(filter, u, v, hurst, opts)?;
    let scale = cross_scale(filter, u, v, hurst, opts)?;
    kernel.fourier(p, opts.rel_tol * scale)
}

/// `sqrt(E_u E_v)`, a bound on every `|Gamma(p)|`.
fn cross_scale<T: Real>(
    filter: &DiscreteFilter<T>,
    u: usize,
    v: usize,
    hurst: f64,
    opts: TheoryOptions,
) -> Result<f64> {
    let eu = e_const_with(filter, u, hurst, opts)?;
    let ev = if u == v { eu } else { e_const_with(filter, v, hurst, opts)? };
    Ok((eu * ev).sqrt())
}

/// `C_a^{u,v}(H) = 2 sum_{p in Z} Gamma(p)^2`. Requires `K > H + 1/4`.
pub fn c_const<T: Real>(filter: &DiscreteFilter<T>, u: usize, v: usize, hurst: f64) -> Result<f64> {
    c_const_with(filter, u, v, hurst, TheoryOptions::default())
}

pub fn c_const_with<T: Real>(
    filter: &DiscreteFilter<T>,
    u: usize,
    v: usize,
    hurst: f64,
    opts: TheoryOptions,
) -> Result<f64> {
    check_order(filter.order(), hurst, 0.25)?;
    let kernel = Kernel::new(filter, u, v, hurst, opts)?;
    let abs = opts.rel_tol * cross_scale(filter, u, v, hurst, opts)?;
    let symmetric = u == v;

    let g0 = kernel.fourier(0, abs)?;
    let mut sum = g0 * g0;
    // |Gamma(p)| by lag, both signs
    let mut pos = vec![g0.abs()];
    let mut neg = vec![g0.abs()];
    let mut checkpoint = 16usize;
    let mut tail = f64::INFINITY;
    let mut previous = f64::NAN;
    let accept = |sum: f64, tail: f64, previous: f64, tol: f64| {
        let total = sum + tail;
        tail <= tol * sum || (tail <= EXTRAPOLATION_LIMIT * sum && (total - previous).abs() <= tol * total)
    };
    for p in 1..=opts.p_max {
        let gp = kernel.fourier(p as i64, abs)?;
        let gn = if symmetric { gp } else { kernel.fourier(-(p as i64), abs)? };
        sum += gp * gp + gn * gn;
        pos.push(gp.abs());
        neg.push(gn.abs());
        if p == checkpoint || p == opts.p_max {
            tail = fitted_tail(&pos, p, NOISE_FLOOR * abs) + fitted_tail(&neg, p, NOISE_FLOOR * abs);
            if accept(sum, tail, previous, SERIES_TOL) {
                return Ok(2.0 * (sum + tail));
            }
            if p == opts.p_max && accept(sum, tail, previous, SERIES_BUDGET) {
                return Ok(2.0 * (sum + tail));
            }
            previous = sum + tail;
            checkpoint *= 2;
        }
    }
    Err(Error::TailNotConverged(tail / sum))
}

/// `sum_{p > last} Gamma(p)^2` under a fitted envelope `C (1 + p)^{-delta}`.
/// Lags whose values sit at the quadrature noise `floor` count as zero.
fn fitted_tail(mags: &[f64], last: usize, floor: f64) -> f64 {
    let half = last / 2;
    // (lag, value) of the largest magnitude in lo..=hi
    let peak = |lo: usize, hi: usize| {
        (lo..=hi).fold((lo, 0.0f64), |best, i| if mags[i] > best.1 { (i, mags[i]) } else { best })
    };
    let (ri, recent) = peak(half + 1, last);
    if recent <= floor {
        return 0.0;
    }
    let (ei, earlier) = peak(half / 2 + 1, half);
    if earlier <= recent {
        return f64::INFINITY;
    }
    let delta = (earlier / recent).ln() / ((1.0 + ri as f64) / (1.0 + ei as f64)).ln();
    let exponent = 2.0 * delta;
    if exponent <= 1.0 {
        return f64::INFINITY;
    }
    let c = recent * (1.0 + ri as f64).powf(delta);
    c * c * hurwitz_zeta(exponent, last as f64 + 2.0)
}

/// Every constant entering the asymptotic variance of `H_hat(u, v)`.
pub fn gamma_const<T: Real>(filter: &DiscreteFilter<T>, u: usize, v: usize, hurst: f64) -> Result<AsymptoticConstants> {
    gamma_const_with(filter, u, v, hurst, TheoryOptions::default())
}

pub fn gamma_const_with<T: Real>(
    filter: &DiscreteFilter<T>,
    u: usize,
    v: usize,
    hurst: f64,
    opts: TheoryOptions,
) -> Result<AsymptoticConstants> {
    if u == v {
        return Err(Error::EqualDilations);
    }
    check_order(filter.order(), hurst, 0.25)?;
    let e_u = e_const_with(filter, u, hurst, opts)?;
    let e_v = e_const_with(filter, v, hurst, opts)?;
    let c_uu = c_const_with(filter, u, u, hurst, opts)?;
    let c_vv = c_const_with(filter, v, v, hurst, opts)?;
    let c_uv = c_const_with(filter, u, v, hurst, opts)?;
    let log_ratio = (u as f64 / v as f64).ln();
    let raw = (c_uu / (e_u * e_u) + c_vv / (e_v * e_v) - 2.0 * c_uv / (e_u * e_v)) / (4.0 * log_ratio * log_ratio);
    if raw < -1e-9 {
        return Err(Error::NegativeVariance(raw));
    }
    Ok(AsymptoticConstants {
        coeffs: filter.coeffs().iter().map(|c| c.as_f64()).collect(),
        u,
        v,
        hurst,
        e_u,
        e_v,
        c_uu,
        c_vv,
        c_uv,
        gamma: raw.max(0.0),
    })
}

/// Limit of `N^{2H} E(V_{N,a^u})` for a density `c |xi|^{-2H-1}` at high
/// frequencies: `c u^{2H} E_a^1(H)`. Requires `K > H`.
pub fn expected_variation_limit<T: Real>(
    filter: &DiscreteFilter<T>,
    u: usize,
    hurst: f64,
    amplitude: f64,
) -> Result<f64> {
    Ok(amplitude * (u as f64).powf(2.0 * hurst) * e_const(filter, 1, hurst)?)
}

/// Limit of `E(V_u) / E(V_v)`, free of the amplitude.
pub fn expected_variation_ratio(u: usize, v: usize, hurst: f64) -> f64 {
    (u as f64 / v as f64).powf(2.0 * hurst)
}

type CacheKey = (Vec<u64>, usize, usize, i64);

/// Memo of [`gamma_const`] results keyed by filter, dilations and the index
/// rounded to `1e-12`. Lookups take a shared lock; computation runs outside
/// any lock and the first insertion wins.
#[derive(Default)]
pub struct TheoryCache {
    entries: RwLock<HashMap<CacheKey, AsymptoticConstants>>,
}

impl TheoryCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get<T: Real>(
        &self,
        filter: &DiscreteFilter<T>,
        u: usize,
        v: usize,
        hurst: f64,
    ) -> Result<AsymptoticConstants> {
        let key: CacheKey =
            (filter.coeffs().iter().map(|c| c.as_f64().to_bits()).collect(), u, v, (hurst * 1e12).round() as i64);
        if let Some(hit) = self.entries.read().expect("theory cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let value = gamma_const(filter, u, v, hurst)?;
        let mut map = self.entries.write().expect("theory cache poisoned");
        Ok(map.entry(key).or_insert(value).clone())
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("theory cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
