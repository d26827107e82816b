//! Adaptive Gauss-Kronrod quadrature and the Hurwitz zeta function.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae (non-negative half) with their weights, and the
// weights of the embedded 7-point Gauss rule at xgk[1], xgk[3], xgk[5], xgk[7].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    /// Maximum number of bisections across all segments.
    pub max_splits: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 0.0, rel: 1e-10, max_splits: 20_000 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_k = kron.abs();
    let mut values = [(0.0, 0.0); 7];
    for (j, &x) in XGK[..7].iter().enumerate() {
        let dx = half * x;
        let (f1, f2) = (f(center - dx), f(center + dx));
        values[j] = (f1, f2);
        kron += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kron;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (j, &(f1, f2)) in values.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kron * half;
    let resasc = asc * half.abs();
    let resabs = abs_k * half.abs();
    let mut error = ((kron - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Segment { a, b, value, error }
}

/// Integrate `f` over the sorted `points` (at least two), refining the worst
/// segment until the summed error estimate meets `tol`.
///
/// Integrable endpoint singularities are fine: the Kronrod rule never
/// samples an interval endpoint.
pub fn integrate_points<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], tol: Tolerance) -> Result<Estimate> {
    assert!(points.len() >= 2, "need at least one interval");
    let mut heap: BinaryHeap<Segment> =
        points.windows(2).filter(|w| w[1] > w[0]).map(|w| kronrod(&mut f, w[0], w[1])).collect();
    let mut splits = 0;
    loop {
        let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target {
            return Ok(Estimate { value, error });
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => return Ok(Estimate { value, error }),
        };
        let mid = 0.5 * (worst.a + worst.b);
        if splits >= tol.max_splits || mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            let rel = if value != 0.0 { error / value.abs() } else { error };
            return Err(Error::QuadratureFailure(rel));
        }
        heap.push(kronrod(&mut f, worst.a, mid));
        heap.push(kronrod(&mut f, mid, worst.b));
        splits += 1;
    }
}

#[cfg(test)]
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    integrate_points(f, &[a, b], tol)
}

// B_2 .. B_16
const BERNOULLI: [f64; 8] =
    [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0];

/// Hurwitz zeta `sum_{n >= 0} (n + a)^{-s}` for `s > 1`, `a > 0`, by
/// Euler-Maclaurin summation.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0 && a > 0.0);
    const DIRECT: usize = 10;
    let mut sum: f64 = (0..DIRECT).map(|n| (n as f64 + a).powf(-s)).sum();
    let x = a + DIRECT as f64;
    let xs = x.powf(-s);
    sum += x * xs / (s - 1.0) + 0.5 * xs;
    // term_j = B_2j / (2j)! * s (s+1) ... (s+2j-2) * x^{-s-2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut xp = xs / x;
    for (j, b) in BERNOULLI.iter().enumerate() {
        if j > 0 {
            let m = 2.0 * j as f64;
            rising *= (s + m - 1.0) * (s + m);
            fact *= (m + 1.0) * (m + 2.0);
            xp /= x * x;
        }
        sum += b / fact * rising * xp;
    }
    sum
}
