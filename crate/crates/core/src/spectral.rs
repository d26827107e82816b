//! Anisotropic spectral densities `f(xi) = c |xi|^{-2 h(xi) - d}` and their
//! windowed Radon transforms.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// Directional index `h`, even and 0-homogeneous on the frequency plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnisotropicIndex {
    Constant(f64),
    /// `vertical` when `|xi_1| < |xi_2|`, `horizontal` otherwise (ties included).
    AxisPair {
        horizontal: f64,
        vertical: f64,
    },
}

impl AnisotropicIndex {
    pub fn constant(h: f64) -> Result<Self> {
        check_unit(h)?;
        Ok(Self::Constant(h))
    }

    pub fn axis_pair(horizontal: f64, vertical: f64) -> Result<Self> {
        check_unit(horizontal)?;
        check_unit(vertical)?;
        Ok(Self::AxisPair { horizontal, vertical })
    }

    /// Index in the direction of `xi`; only the direction matters.
    pub fn at(&self, xi: &[f64]) -> f64 {
        match *self {
            Self::Constant(h) => h,
            Self::AxisPair { horizontal, vertical } => {
                if xi[0].abs() < xi[1].abs() {
                    vertical
                } else {
                    horizontal
                }
            }
        }
    }

    /// `h_0 = min h`.
    pub fn min(&self) -> f64 {
        match *self {
            Self::Constant(h) => h,
            Self::AxisPair { horizontal, vertical } => horizontal.min(vertical),
        }
    }

    /// `h_1 = max h`.
    pub fn max(&self) -> f64 {
        match *self {
            Self::Constant(h) => h,
            Self::AxisPair { horizontal, vertical } => horizontal.max(vertical),
        }
    }

    /// `(h_h, h_v)`, the values seen along the two grid axes.
    pub fn axes(&self) -> (f64, f64) {
        match *self {
            Self::Constant(h) => (h, h),
            Self::AxisPair { horizontal, vertical } => (horizontal, vertical),
        }
    }
}

fn check_unit(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("index {h} outside (0, 1)")))
    }
}

impl FromStr for AnisotropicIndex {
    type Err = Error;

    /// `constant:0.5` or `axes:0.7,0.2` (horizontal, vertical).
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) =
            s.split_once(':').ok_or_else(|| Error::Parse(format!("index {s:?}: expected kind:values")))?;
        let values = rest
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("index value {v:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        match (kind.trim(), values.as_slice()) {
            ("constant", [h]) => Self::constant(*h),
            ("axes", [hh, hv]) => Self::axis_pair(*hh, *hv),
            _ => Err(Error::Parse(format!("index {s:?}: expected constant:h or axes:h_h,h_v"))),
        }
    }
}

impl fmt::Display for AnisotropicIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(h) => write!(f, "constant:{h}"),
            Self::AxisPair { horizontal, vertical } => write!(f, "axes:{horizontal},{vertical}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralModel {
    pub index: AnisotropicIndex,
    pub dim: usize,
    pub amplitude: f64,
}

impl SpectralModel {
    pub fn new(index: AnisotropicIndex, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if dim != 2 && matches!(index, AnisotropicIndex::AxisPair { .. }) {
            return Err(Error::InvalidParameter("axis-pair index needs dimension 2".into()));
        }
        Ok(Self { index, dim, amplitude: 1.0 })
    }

    /// Planar model with unit amplitude.
    pub fn planar(index: AnisotropicIndex) -> Self {
        Self { index, dim: 2, amplitude: 1.0 }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!("amplitude {amplitude}")));
        }
        self.amplitude = amplitude;
        Ok(self)
    }

    pub fn density(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "frequency has {} components, model dimension is {}",
                xi.len(),
                self.dim
            )));
        }
        let norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroFrequency);
        }
        Ok(self.density_unchecked(xi, norm))
    }

    pub(crate) fn density_unchecked(&self, xi: &[f64], norm: f64) -> f64 {
        let h = self.index.at(xi);
        self.amplitude * norm.powf(-2.0 * h - self.dim as f64)
    }
}

/// Window profile on the hyperplane coordinate (a scalar in the plane).
///
/// Used as a spatial weight `rho` for projections and as the squared window
/// transform `|rho_hat|^2` when integrating densities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window {
    /// `1` on the closed interval `[lo, hi]`.
    Indicator {
        lo: f64,
        hi: f64,
    },
    /// `exp(-x^2 / (2 sigma^2))`.
    Gaussian {
        sigma: f64,
    },
    Zero,
}

impl Window {
    /// `1_{[0,1]}`.
    pub const UNIT: Window = Window::Indicator { lo: 0.0, hi: 1.0 };

    pub fn gaussian(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(Self::Gaussian { sigma })
        } else {
            Err(Error::InvalidParameter(format!("gaussian width {sigma}")))
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Indicator { lo, hi } => {
                if x >= lo && x <= hi {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Gaussian { sigma } => (-0.5 * (x / sigma).powi(2)).exp(),
            Self::Zero => 0.0,
        }
    }

    /// Compact support, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Self::Indicator { lo, hi } => Some((lo, hi)),
            Self::Gaussian { .. } => None,
            Self::Zero => Some((0.0, 0.0)),
        }
    }

    /// `int rho`.
    pub fn mass(&self) -> f64 {
        match *self {
            Self::Indicator { lo, hi } => (hi - lo).max(0.0),
            Self::Gaussian { sigma } => sigma * (2.0 * PI).sqrt(),
            Self::Zero => 0.0,
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Indicator { lo, hi } => write!(f, "indicator:{lo},{hi}"),
            Self::Gaussian { sigma } => write!(f, "gaussian:{sigma}"),
            Self::Zero => f.write_str("zero"),
        }
    }
}

impl FromStr for Window {
    type Err = Error;

    /// `unit`, `zero`, `indicator:lo,hi` or `gaussian:sigma`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "unit" => return Ok(Self::UNIT),
            "zero" => return Ok(Self::Zero),
            _ => {}
        }
        let (kind, rest) = s.split_once(':').ok_or_else(|| Error::Parse(format!("window {s:?}")))?;
        let values = rest
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("window value {v:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        match (kind, values.as_slice()) {
            ("indicator", [lo, hi]) if lo <= hi => Ok(Self::Indicator { lo: *lo, hi: *hi }),
            ("gaussian", [sigma]) => Self::gaussian(*sigma),
            _ => Err(Error::Parse(format!("window {s:?}"))),
        }
    }
}

/// Radon transform of a planar density against a normalized window profile:
/// `int f(gamma, p) w(gamma) d gamma / int w`.
///
/// `p` is the frequency along the projection direction `(0, 1)`; the window
/// plays the role of `|rho_hat|^2`.
pub fn radon_density(model: &SpectralModel, window: &Window, p: f64) -> Result<f64> {
    if model.dim != 2 {
        return Err(Error::InvalidParameter("radon_density needs a planar model".into()));
    }
    if p == 0.0 || !p.is_finite() {
        return Err(Error::ZeroFrequency);
    }
    let mass = window.mass();
    if mass.is_nan() || mass <= 0.0 {
        return Err(Error::InvalidParameter(format!("window {window} has no mass")));
    }
    let tol = Tolerance { abs: 0.0, rel: 1e-10, max_splits: 5_000 };
    let pa = p.abs();
    let f = |gamma: f64| {
        let xi = [gamma, p];
        model.density_unchecked(&xi, gamma.hypot(p))
    };
    let estimate = match *window {
        Window::Indicator { lo, hi } => {
            // the axis-pair exponent jumps at |gamma| = |p|
            let mut points = vec![lo, hi];
            points.extend([-pa, pa].iter().filter(|&&x| x > lo && x < hi));
            points.sort_by(f64::total_cmp);
            quad::integrate_points(f, &points, tol)?
        }
        Window::Gaussian { sigma } => {
            // gamma = sigma tan(phi) maps the real line onto (-pi/2, pi/2)
            let g = |phi: f64| {
                let t = phi.tan();
                let sec2 = 1.0 + t * t;
                f(sigma * t) * (-0.5 * t * t).exp() * sigma * sec2
            };
            let kink = (pa / sigma).atan();
            quad::integrate_points(g, &[-PI / 2.0, -kink, kink, PI / 2.0], tol)?
        }
        Window::Zero => unreachable!("zero window rejected above"),
    };
    if estimate.error > 1e-6 * estimate.value.abs() {
        return Err(Error::QuadratureFailure(estimate.error / estimate.value.abs()));
    }
    Ok(estimate.value / mass)
}
