//! Reference computations shared by the integration targets.

#![allow(dead_code)]

use std::f64::consts::PI;

use afb::SpectralModel;
use num_complex::Complex;
use statrs::function::gamma::gamma;

/// `Gamma(p) = -kappa_H sum_{j,k} a_j a_k |p + u j - v k|^{2H}`, the Fourier
/// transform of `|xi|^{-2H-1}` against a filter with vanishing moments.
pub fn gamma_closed(a: &[f64], u: usize, v: usize, h: f64, p: i64) -> f64 {
    let kappa = PI / (gamma(2.0 * h + 1.0) * (PI * h).sin());
    let mut s = 0.0;
    for (j, aj) in a.iter().enumerate() {
        for (k, ak) in a.iter().enumerate() {
            let lag = p as f64 + (u * j) as f64 - (v * k) as f64;
            s += aj * ak * lag.abs().powf(2.0 * h);
        }
    }
    -kappa * s
}

/// `x(k) = Re y(k) - Re y(0)`, with `y(k) = pi sum_n z(n) g(pi n) e^{-2 pi i n.k / 2M}`
/// summed literally over `n in (-M, M]^2`.
pub fn literal_field(model: &SpectralModel, m: usize, noise: &[Complex<f64>]) -> Vec<f64> {
    let side = 2 * m;
    let range: Vec<i64> = (-(m as i64) + 1..=m as i64).collect();
    let y = |k1: usize, k2: usize| {
        let mut acc = Complex::new(0.0, 0.0);
        for &n1 in &range {
            for &n2 in &range {
                if n1 == 0 && n2 == 0 {
                    continue;
                }
                let g = model.density(&[PI * n1 as f64, PI * n2 as f64]).unwrap().sqrt();
                let z = noise[n1.rem_euclid(side as i64) as usize * side + n2.rem_euclid(side as i64) as usize];
                let phase = -2.0 * PI * ((n1 * k1 as i64 + n2 * k2 as i64) as f64) / side as f64;
                acc += z * Complex::from_polar(PI * g, phase);
            }
        }
        acc.re
    };
    let origin = y(0, 0);
    let mut out = Vec::with_capacity((m + 1) * (m + 1));
    for k1 in 0..=m {
        for k2 in 0..=m {
            out.push(y(k1, k2) - origin);
        }
    }
    out
}
