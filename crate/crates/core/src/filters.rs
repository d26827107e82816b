//! Finite difference filters: order, dilation and transfer functions.
//!
//! A filter `a = (a_0, ..., a_l)` has order `K` when its first `K` discrete
//! moments `sum_k a_k k^r` vanish and the `K`-th does not. Applied to samples
//! of a process it kills every polynomial trend of degree below `K`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative moment tolerance; scaled by `max|a_k| * l^r` for moment `r`.
const ORDER_TOLERANCE: f64 = 1e-9;

/// Discrete filter of order `K >= 1`, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteFilter<T> {
    coeffs: Vec<T>,
    order: usize,
}

/// Smallest `r` whose moment `sum_k a_k k^r` is nonzero beyond tolerance.
///
/// Fails with [`Error::OrderZero`] when the coefficients do not sum to zero
/// and with [`Error::AllMomentsVanish`] when no moment up to `r = l` survives.
pub fn infer_order<T: Real>(coeffs: &[T]) -> Result<usize> {
    if coeffs.is_empty() {
        return Err(Error::InvalidFilter("no coefficients".into()));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidFilter("non-finite coefficient".into()));
    }
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.as_f64().abs()));
    let len = coeffs.len() - 1;
    for r in 0..=len {
        let moment: f64 = coeffs.iter().enumerate().map(|(k, a)| a.as_f64() * power(k as f64, r)).sum();
        let tol = ORDER_TOLERANCE * scale * power(len as f64, r).max(1.0);
        if moment.abs() > tol {
            return if r == 0 { Err(Error::OrderZero) } else { Ok(r) };
        }
    }
    Err(Error::AllMomentsVanish)
}

// 0^0 = 1
fn power(x: f64, r: usize) -> f64 {
    x.powi(r as i32)
}

impl<T: Real> DiscreteFilter<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        let order = infer_order(&coeffs)?;
        Ok(Self { coeffs, order })
    }

    /// Increment filter `(1, -1)`.
    pub fn increment() -> Self {
        Self { coeffs: vec![T::one(), -T::one()], order: 1 }
    }

    /// Second difference `(1, -2, 1)`.
    pub fn second_difference() -> Self {
        Self::new(vec![T::one(), T::of(-2.0), T::one()]).expect("order 2 filter")
    }

    /// Binomial `K`-th order difference, `a_k = (-1)^(K-k) C(K, k)`.
    pub fn binomial(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::OrderZero);
        }
        let coeffs = (0..=order)
            .map(|k| {
                let sign = if (order - k).is_multiple_of(2) { 1.0 } else { -1.0 };
                T::of(sign * binomial(order, k))
            })
            .collect();
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Number of vanishing moments `K`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Index of the last coefficient, `l`.
    pub fn span(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Spread coefficients by `u`: `a^u_{k u} = a_k`, zero elsewhere.
    pub fn dilate(&self, u: usize) -> Result<Self> {
        if u == 0 {
            return Err(Error::InvalidParameter("dilation must be at least 1".into()));
        }
        let mut coeffs = vec![T::zero(); self.span() * u + 1];
        for (k, &a) in self.coeffs.iter().enumerate() {
            coeffs[k * u] = a;
        }
        Ok(Self { coeffs, order: self.order })
    }

    /// Filter polynomial `P_a(z) = sum_k a_k z^k` (Horner).
    pub fn polynomial(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs.iter().rev().fold(Complex::new(T::zero(), T::zero()), |acc, &a| acc * z + a)
    }

    /// `|P_a(e^{-i xi})|^2`.
    pub fn transfer_sq(&self, xi: T) -> T {
        self.polynomial(Complex::from_polar(T::one(), -xi)).norm_sqr()
    }

    /// `P_a(e^{-i u xi}) * conj(P_a(e^{-i v xi}))`.
    pub fn cross_transfer(&self, u: usize, v: usize, xi: T) -> Complex<T> {
        let pu = self.polynomial(Complex::from_polar(T::one(), -T::of(u as f64) * xi));
        let pv = self.polynomial(Complex::from_polar(T::one(), -T::of(v as f64) * xi));
        pu * pv.conj()
    }

    /// `P_a^{(K)}(1) / K! = sum_k a_k C(k, K)`, the leading Taylor constant of
    /// the transfer function at zero frequency.
    pub fn taylor_constant(&self) -> f64 {
        self.coeffs.iter().enumerate().map(|(k, a)| a.as_f64() * binomial(k, self.order)).sum()
    }

    /// Filtered sequence `Z(p) = sum_k a_k x[p + k]` for every full window.
    pub fn apply(&self, samples: &[T]) -> Vec<T> {
        if samples.len() < self.coeffs.len() {
            return Vec::new();
        }
        samples.windows(self.coeffs.len()).map(|w| self.dot(w)).collect()
    }

    pub(crate) fn dot(&self, window: &[T]) -> T {
        self.coeffs.iter().zip(window).fold(T::zero(), |acc, (&a, &x)| acc + a * x)
    }

    /// Same filter with coefficients converted to another scalar type.
    pub fn cast<U: Real>(&self) -> DiscreteFilter<U> {
        DiscreteFilter { coeffs: self.coeffs.iter().map(|c| U::of(c.as_f64())).collect(), order: self.order }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

impl<T: Real> FromStr for DiscreteFilter<T> {
    type Err = Error;

    /// Parses comma separated coefficients such as `"1,-2,1"`.
    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map(T::of)
                    .map_err(|e| Error::Parse(format!("filter coefficient {tok:?}: {e}")))
            })
            .collect::<Result<Vec<T>>>()?;
        Self::new(coeffs)
    }
}

impl<T: Real> fmt::Display for DiscreteFilter<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn filter(c: &[f64]) -> DiscreteFilter<f64> {
        DiscreteFilter::new(c.to_vec()).unwrap()
    }

    #[test]
    fn order_of_standard_filters() {
        assert_eq!(infer_order(&[1.0, -2.0, 1.0]).unwrap(), 2);
        assert_eq!(infer_order(&[1.0, -1.0]).unwrap(), 1);
        assert!(matches!(infer_order(&[1.0, 1.0]), Err(Error::OrderZero)));
        assert!(matches!(infer_order(&[0.0, 0.0, 0.0]), Err(Error::AllMomentsVanish)));
        assert!(infer_order::<f64>(&[]).is_err());
        assert_eq!(infer_order(&[1.0, -3.0, 3.0, -1.0]).unwrap(), 3);
    }

    #[test]
    fn parse_from_cli_syntax() {
        let f: DiscreteFilter<f64> = "1, -2 ,1".parse().unwrap();
        assert_eq!(f.coeffs(), &[1.0, -2.0, 1.0]);
        assert_eq!(f.to_string(), "1,-2,1");
        assert!("1,x".parse::<DiscreteFilter<f64>>().is_err());
        assert!(matches!("1,1".parse::<DiscreteFilter<f64>>(), Err(Error::OrderZero)));
    }

    #[test]
    fn dilation_examples() {
        let a = DiscreteFilter::<f64>::second_difference();
        assert_eq!(a.dilate(2).unwrap().coeffs(), &[1.0, 0.0, -2.0, 0.0, 1.0]);
        assert_eq!(a.dilate(1).unwrap(), a);
        let inc = DiscreteFilter::<f64>::increment();
        assert_eq!(inc.dilate(3).unwrap().coeffs(), &[1.0, 0.0, 0.0, -1.0]);
        assert!(a.dilate(0).is_err());
    }

    #[test]
    fn dilation_preserves_inferred_order() {
        let family = [
            vec![1.0, -1.0],
            vec![1.0, -2.0, 1.0],
            vec![1.0, -3.0, 3.0, -1.0],
            vec![1.0, -4.0, 6.0, -4.0, 1.0],
            vec![0.5, -0.5, -0.5, 0.5],
            vec![1.0, 0.0, -1.0],
        ];
        for c in family {
            let a = filter(&c);
            for u in 1..=8 {
                let d = a.dilate(u).unwrap();
                assert_eq!(d.len(), a.span() * u + 1);
                assert_eq!(infer_order(d.coeffs()).unwrap(), a.order(), "{c:?} u={u}");
            }
        }
    }

    #[test]
    fn transfer_examples() {
        let a = DiscreteFilter::<f64>::second_difference();
        assert!((a.transfer_sq(PI) - 16.0).abs() < 1e-12);
        assert!(a.transfer_sq(0.0).abs() < 1e-15);
        // 1 - 2 e^{-i pi/2} + e^{-i pi} = 1 + 2i - 1
        let direct = Complex::new(1.0, 0.0) - Complex::new(0.0, -1.0) * 2.0 + Complex::new(-1.0, 0.0);
        assert!((a.transfer_sq(PI / 2.0) - direct.norm_sqr()).abs() < 1e-12);
        assert!((a.transfer_sq(PI / 2.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cross_transfer_examples() {
        let a = DiscreteFilter::<f64>::second_difference();
        let h = a.cross_transfer(1, 1, PI);
        assert!((h.re - 16.0).abs() < 1e-12 && h.im.abs() < 1e-12);
        assert!(a.cross_transfer(1, 2, 0.0).norm() < 1e-15);
        // P(-1) * conj(P(1)) = 4 * 0
        assert!(a.cross_transfer(1, 2, PI).norm() < 1e-12);
        for &xi in &[0.1, 0.7, 2.0, 3.0] {
            for u in 1..4 {
                let h = a.cross_transfer(u, u, xi);
                let d = a.dilate(u).unwrap().transfer_sq(xi);
                assert!(h.im.abs() < 1e-12 && (h.re - d).abs() < 1e-12);
                assert!(h.re >= 0.0);
            }
        }
    }

    #[test]
    fn transfer_taylor_limit() {
        for c in [vec![1.0, -1.0], vec![1.0, -2.0, 1.0], vec![1.0, 0.0, -1.0], vec![1.0, -3.0, 3.0, -1.0]] {
            let a = filter(&c);
            let k = a.order() as i32;
            let limit = a.taylor_constant().powi(2);
            for &xi in &[1e-3, 1e-4] {
                let ratio = a.transfer_sq(xi) / xi.powi(2 * k);
                assert!(((ratio - limit) / limit).abs() < 1e-4, "{c:?}: {ratio} vs {limit}");
            }
        }
    }

    #[test]
    fn binomial_filters() {
        for k in 1..6 {
            let a = DiscreteFilter::<f64>::binomial(k).unwrap();
            assert_eq!(a.order(), k);
            assert_eq!(a.len(), k + 1);
        }
        assert_eq!(DiscreteFilter::<f64>::binomial(2).unwrap(), DiscreteFilter::second_difference());
    }

    #[test]
    fn works_in_single_precision() {
        let a: DiscreteFilter<f32> = "1,-2,1".parse().unwrap();
        assert_eq!(a.order(), 2);
        assert_eq!(a.apply(&[0.0, 1.0, 4.0, 9.0]), vec![2.0, 2.0]);
    }

    proptest! {
        #[test]
        fn annihilates_low_degree_polynomials(
            order in 1usize..5,
            extra in 0usize..3,
            poly in proptest::collection::vec(-3.0f64..3.0, 5),
            offset in -5.0f64..5.0,
            step in 0.01f64..1.0,
        ) {
            // convolve the binomial difference with a random smoothing kernel
            // to get order-`order` filters of varying shape
            let base = DiscreteFilter::<f64>::binomial(order).unwrap();
            let mut coeffs = base.coeffs().to_vec();
            for j in 0..extra {
                let w = 0.3 + 0.2 * j as f64;
                let mut next = vec![0.0; coeffs.len() + 1];
                for (i, c) in coeffs.iter().enumerate() {
                    next[i] += c;
                    next[i + 1] += w * c;
                }
                coeffs = next;
            }
            let a = DiscreteFilter::new(coeffs).unwrap();
            prop_assert_eq!(a.order(), order);
            let degree = order - 1;
            let samples: Vec<f64> = (0..40)
                .map(|k| {
                    let t = offset + step * k as f64;
                    poly[..=degree].iter().rev().fold(0.0, |acc, c| acc * t + c)
                })
                .collect();
            let scale = samples.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            let magnitude = a.coeffs().iter().map(|c| c.abs()).sum::<f64>();
            for z in a.apply(&samples) {
                prop_assert!(z.abs() <= 1e-10 * magnitude * scale, "{}", z);
            }
        }
    }
}
