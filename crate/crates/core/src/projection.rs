//! Discrete windowed Radon transforms of a grid field along the grid axes.
//!
//! `I_h(k/M) = (1/M) sum_{k2=0..M} x(k/M, k2/M)` and symmetrically for `I_v`.
//! The `M + 1` samples are divided by `M`, not `M + 1`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::Window;
use crate::synthesis::{GridField2D, SampledPath};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// Function of the first coordinate, summed over the second.
    Horizontal,
    /// Function of the second coordinate, summed over the first.
    Vertical,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Horizontal, Direction::Vertical];
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Horizontal => "horizontal",
            Self::Vertical => "vertical",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "horizontal" | "h" => Ok(Self::Horizontal),
            "vertical" | "v" => Ok(Self::Vertical),
            other => Err(Error::Parse(format!("direction {other:?}: expected horizontal or vertical"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionResult<T> {
    /// `I(k/M)`, `k = 0..=M`.
    pub values: Vec<T>,
    pub direction: Direction,
    pub window: Window,
}

impl<T: Real> ProjectionResult<T> {
    /// Projection as a path sampled at `k/M`.
    pub fn to_path(&self) -> Result<SampledPath<T>> {
        SampledPath::new(self.values.clone())
    }
}

/// Axis projection with the unit indicator window.
pub fn project_axis<T: Real>(field: &GridField2D<T>, direction: Direction) -> ProjectionResult<T> {
    let m = field.size();
    let n = m + 1;
    let mt = T::of(m as f64);
    let data = field.values();
    let values = match direction {
        Direction::Horizontal => {
            (0..n).map(|k1| data[k1 * n..(k1 + 1) * n].iter().fold(T::zero(), |acc, &x| acc + x) / mt).collect()
        }
        Direction::Vertical => {
            (0..n).map(|k2| (0..n).fold(T::zero(), |acc, k1| acc + data[k1 * n + k2]) / mt).collect()
        }
    };
    ProjectionResult { values, direction, window: Window::UNIT }
}

/// Projection weighted by `rho(s / M_sub)` along the summed coordinate,
/// sampled every `M / M_sub` grid points:
/// `I(t) = (1/M_sub) sum_{s=0..M_sub} x(s/M_sub, t) rho(s/M_sub)`.
///
/// Gaussian windows are truncated to the grid footprint `[0, 1]`.
pub fn project_window<T: Real>(
    field: &GridField2D<T>,
    direction: Direction,
    window: &Window,
    sub_size: usize,
) -> Result<ProjectionResult<T>> {
    let m = field.size();
    if sub_size == 0 || sub_size > m || !m.is_multiple_of(sub_size) {
        return Err(Error::InvalidParameter(format!("sub-grid size {sub_size} does not divide grid size {m}")));
    }
    if let Some((lo, hi)) = window.support() {
        if lo < 0.0 || hi > 1.0 {
            return Err(Error::WindowOutOfSupport);
        }
    }
    let stride = m / sub_size;
    let weights: Vec<T> = (0..=sub_size).map(|s| T::of(window.eval(s as f64 / sub_size as f64))).collect();
    let norm = T::of(sub_size as f64);
    let n = m + 1;
    let data = field.values();
    let at = |s: usize, t: usize| match direction {
        Direction::Horizontal => data[t * n + s * stride],
        Direction::Vertical => data[s * stride * n + t],
    };
    let values =
        (0..n).map(|t| weights.iter().enumerate().fold(T::zero(), |acc, (s, &w)| acc + at(s, t) * w) / norm).collect();
    Ok(ProjectionResult { values, direction, window: *window })
}
