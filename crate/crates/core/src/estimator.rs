//! Generalized quadratic variations and log-ratio regularity estimators.

use crate::error::{Error, Result};
use crate::filters::DiscreteFilter;
use crate::projection::{project_axis, Direction, ProjectionResult};
use crate::scalar::Real;
use crate::synthesis::{GridField2D, SampledPath};

/// Variations below this are treated as exact annihilation.
pub const ZERO_VARIATION: f64 = 1e-300;

/// Coarsest grid, in steps, accepted after subsampling.
pub const MIN_STEPS: usize = 8;

/// Filter `a`, dilation `u` and number of steps `N` of a quadratic variation.
#[derive(Clone, Debug, PartialEq)]
pub struct VariationSpec<T> {
    pub filter: DiscreteFilter<T>,
    pub dilation: usize,
    pub steps: usize,
}

impl<T: Real> VariationSpec<T> {
    pub fn new(filter: DiscreteFilter<T>, dilation: usize, steps: usize) -> Result<Self> {
        let spec = Self { filter, dilation, steps };
        spec.terms()?;
        Ok(spec)
    }

    /// Number of summands `N - l u + 1`, at least two.
    pub fn terms(&self) -> Result<usize> {
        if self.dilation == 0 {
            return Err(Error::InvalidParameter("dilation must be at least 1".into()));
        }
        let reach = self.filter.span() * self.dilation;
        if self.steps < reach + 1 {
            return Err(Error::InvalidParameter(format!(
                "{} steps leave fewer than two filter positions at dilation {}",
                self.steps, self.dilation
            )));
        }
        Ok(self.steps - reach + 1)
    }
}

/// `V = (1 / (N - l u + 1)) sum_{p=0}^{N - l u} (sum_k a_k x[(p + k u) stride])^2`
/// over the samples `x[j * stride]`, `j = 0..=N`.
fn strided_variation<T: Real>(values: &[T], stride: usize, steps: usize, filter: &DiscreteFilter<T>, u: usize) -> T {
    let terms = steps - filter.span() * u + 1;
    let coeffs = filter.coeffs();
    let mut sum = T::zero();
    for p in 0..terms {
        let z = coeffs.iter().enumerate().fold(T::zero(), |acc, (k, &a)| acc + a * values[(p + k * u) * stride]);
        sum += z * z;
    }
    sum / T::of(terms as f64)
}

/// Generalized quadratic variation of `path` for `spec`.
pub fn quad_variation<T: Real>(path: &SampledPath<T>, spec: &VariationSpec<T>) -> Result<T> {
    spec.terms()?;
    let got = path.values().len();
    if got < spec.steps + 1 {
        return Err(Error::PathTooShort { got, needed: spec.steps + 1 });
    }
    Ok(strided_variation(path.values(), 1, spec.steps, &spec.filter, spec.dilation))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateResult {
    pub value: f64,
    /// Variation at the larger-index dilation `u`.
    pub v_u: f64,
    /// Variation at dilation `v`.
    pub v_v: f64,
    pub u: usize,
    pub v: usize,
    pub direction: Option<Direction>,
    pub nu: Option<u32>,
}

impl EstimateResult {
    /// Estimates are reported raw; this flags values outside `(0, 1)`.
    pub fn out_of_range(&self) -> bool {
        !(self.value > 0.0 && self.value < 1.0)
    }
}

fn log_ratio(v_u: f64, v_v: f64, u: usize, v: usize) -> Result<f64> {
    if v_u < ZERO_VARIATION || v_v < ZERO_VARIATION {
        return Err(Error::ZeroVariation);
    }
    Ok((v_u / v_v).ln() / (2.0 * (u as f64 / v as f64).ln()))
}

fn two_scale<T: Real>(
    values: &[T],
    stride: usize,
    steps: usize,
    filter: &DiscreteFilter<T>,
    u: usize,
    v: usize,
) -> Result<EstimateResult> {
    if u == v {
        return Err(Error::EqualDilations);
    }
    for d in [u, v] {
        VariationSpec { filter: filter.clone(), dilation: d, steps }.terms()?;
    }
    let v_u = strided_variation(values, stride, steps, filter, u).as_f64();
    let v_v = strided_variation(values, stride, steps, filter, v).as_f64();
    let value = log_ratio(v_u, v_v, u, v)?;
    Ok(EstimateResult { value, v_u, v_v, u, v, direction: None, nu: None })
}

/// `H = log(V_{a^u} / V_{a^v}) / (2 log(u / v))` over the whole path.
pub fn estimate_h<T: Real>(
    path: &SampledPath<T>,
    filter: &DiscreteFilter<T>,
    u: usize,
    v: usize,
) -> Result<EstimateResult> {
    two_scale(path.values(), 1, path.steps(), filter, u, v)
}

/// Directional index from an axis projection subsampled by `2^nu`:
/// second differences at dilations 2 and 1, minus the half unit of
/// regularity the planar projection adds.
pub fn estimate_projection<T: Real>(projection: &ProjectionResult<T>, nu: u32) -> Result<EstimateResult> {
    let size = projection.values.len() - 1;
    let stride = 1usize.checked_shl(nu).filter(|s| *s <= size).ok_or(Error::GridTooCoarse { grid: size, nu })?;
    if !size.is_multiple_of(stride) || size / stride < MIN_STEPS {
        return Err(Error::GridTooCoarse { grid: size, nu });
    }
    let filter = DiscreteFilter::second_difference();
    let mut est = two_scale(&projection.values, stride, size / stride, &filter, 2, 1)?;
    est.value -= 0.5;
    est.direction = Some(projection.direction);
    est.nu = Some(nu);
    Ok(est)
}

pub fn estimate_direction<T: Real>(field: &GridField2D<T>, direction: Direction, nu: u32) -> Result<EstimateResult> {
    estimate_projection(&project_axis(field, direction), nu)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairEstimate {
    pub horizontal: EstimateResult,
    pub vertical: EstimateResult,
}

impl PairEstimate {
    /// `h_h - h_v`.
    pub fn difference(&self) -> f64 {
        self.horizontal.value - self.vertical.value
    }
}

pub fn estimate_pair<T: Real>(field: &GridField2D<T>, nu: u32) -> Result<PairEstimate> {
    Ok(PairEstimate {
        horizontal: estimate_direction(field, Direction::Horizontal, nu)?,
        vertical: estimate_direction(field, Direction::Vertical, nu)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{AnisotropicIndex, SpectralModel};
    use crate::synthesis::{afb_sra, fbm_path, Seed};

    fn path_of(n: usize, f: impl Fn(f64) -> f64) -> SampledPath<f64> {
        SampledPath::new((0..=n).map(|k| f(k as f64 / n as f64)).collect()).unwrap()
    }

    fn spec(u: usize, n: usize) -> VariationSpec<f64> {
        VariationSpec::new(DiscreteFilter::second_difference(), u, n).unwrap()
    }

    #[test]
    fn affine_paths_have_zero_variation() {
        let n = 64;
        let p = path_of(n, |t| 1.5 - 0.75 * t);
        for u in 1..5 {
            assert!(quad_variation(&p, &spec(u, n)).unwrap().abs() < 1e-28);
        }
    }

    #[test]
    fn parabola_variation_closed_form() {
        let n = 50;
        let p = path_of(n, |t| t * t);
        let z = DiscreteFilter::second_difference().apply(p.values());
        for zp in &z {
            assert!((zp - 2.0 / (n * n) as f64).abs() < 1e-15);
        }
        let v = quad_variation(&p, &spec(1, n)).unwrap();
        let expected = 4.0 / (n as f64).powi(4);
        assert!(((v - expected) / expected).abs() < 1e-10);
    }

    #[test]
    fn variation_is_quadratic() {
        let p = fbm_path::<f64>(0.4, 128, Seed(1)).unwrap();
        let s = spec(2, 128);
        let base = quad_variation(&p, &s).unwrap();
        for lambda in [0.3, 3.0, 17.0] {
            let v = quad_variation(&p.map(|x| lambda * x), &s).unwrap();
            assert!((v - lambda * lambda * base).abs() <= 1e-12 * lambda * lambda * base);
        }
    }

    #[test]
    fn spec_and_path_errors() {
        let f = DiscreteFilter::<f64>::second_difference();
        assert!(VariationSpec::new(f.clone(), 2, 4).is_err());
        assert!(VariationSpec::new(f.clone(), 2, 5).is_ok());
        assert!(VariationSpec::new(f.clone(), 0, 50).is_err());
        let p = path_of(10, |t| t);
        assert!(matches!(quad_variation(&p, &spec(1, 20)), Err(Error::PathTooShort { got: 11, needed: 21 })));
    }

    #[test]
    fn estimate_errors() {
        let f = DiscreteFilter::<f64>::second_difference();
        let p = path_of(64, |t| t);
        assert!(matches!(estimate_h(&p, &f, 2, 1), Err(Error::ZeroVariation)));
        let q = fbm_path::<f64>(0.5, 64, Seed(2)).unwrap();
        assert!(matches!(estimate_h(&q, &f, 1, 1), Err(Error::EqualDilations)));
    }

    #[test]
    fn estimate_scale_invariance() {
        let f = DiscreteFilter::<f64>::second_difference();
        let p = fbm_path::<f64>(0.7, 1024, Seed(3)).unwrap();
        let base = estimate_h(&p, &f, 2, 1).unwrap().value;
        // powers of two scale every operation exactly
        assert_eq!(estimate_h(&p.map(|x| 4.0 * x), &f, 2, 1).unwrap().value, base);
        for lambda in [3.0, 10.0, 0.01] {
            let e = estimate_h(&p.map(|x| lambda * x), &f, 2, 1).unwrap().value;
            assert!((e - base).abs() <= 1e-12, "{lambda}: {e} vs {base}");
        }
    }

    #[test]
    fn estimate_shift_invariance() {
        let f = DiscreteFilter::<f64>::second_difference();
        let p = fbm_path::<f64>(0.3, 1024, Seed(4)).unwrap();
        let base = estimate_h(&p, &f, 2, 1).unwrap();
        let n = p.steps() as f64;
        let shifted =
            SampledPath::new(p.values().iter().enumerate().map(|(k, x)| x + 5.0 - 2.0 * k as f64 / n).collect())
                .unwrap();
        let e = estimate_h(&shifted, &f, 2, 1).unwrap();
        assert!((e.value - base.value).abs() <= 1e-10);
        assert!((e.v_u - base.v_u).abs() <= 1e-10 * base.v_u);
    }

    fn field(hh: f64, hv: f64, m: usize, seed: u64) -> GridField2D<f64> {
        let model = SpectralModel::planar(AnisotropicIndex::axis_pair(hh, hv).unwrap());
        afb_sra(&model, m, Seed(seed)).unwrap()
    }

    #[test]
    fn strided_estimate_matches_decimated_projection() {
        let f = field(0.7, 0.2, 128, 5);
        for d in Direction::BOTH {
            let proj = project_axis(&f, d);
            let path = proj.to_path().unwrap();
            for nu in 0..=3u32 {
                let direct = estimate_projection(&proj, nu).unwrap();
                let decimated = path.decimate(1 << nu).unwrap();
                let via_path =
                    ProjectionResult { values: decimated.values().to_vec(), direction: d, window: proj.window };
                let reference = estimate_projection(&via_path, 0).unwrap();
                assert_eq!(direct.value, reference.value);
                assert_eq!((direct.v_u, direct.v_v), (reference.v_u, reference.v_v));
                assert_eq!(direct.nu, Some(nu));
            }
        }
    }

    #[test]
    fn projection_estimate_follows_normalizers() {
        // T1 over p = 0..N-2 divided by N-1, T2 over p = 0..N-4 divided by N-3
        let f = field(0.5, 0.5, 64, 6);
        let proj = project_axis(&f, Direction::Vertical);
        let nu = 1;
        let n = 64 >> nu;
        let i = |p: usize| proj.values[p << nu];
        let t1 = (0..=n - 2).map(|p| (i(p) - 2.0 * i(p + 1) + i(p + 2)).powi(2)).sum::<f64>() / (n - 1) as f64;
        let t2 = (0..=n - 4).map(|p| (i(p) - 2.0 * i(p + 2) + i(p + 4)).powi(2)).sum::<f64>() / (n - 3) as f64;
        let expected = (t2 / t1).ln() / (2.0 * 2f64.ln()) - 0.5;
        let e = estimate_projection(&proj, nu).unwrap();
        assert!((e.value - expected).abs() < 1e-12);
        assert!((e.v_v - t1).abs() <= 1e-12 * t1 && (e.v_u - t2).abs() <= 1e-12 * t2);
    }

    #[test]
    fn field_scale_invariance() {
        let f = field(0.7, 0.2, 64, 7);
        let g = f.map(|x| 10.0 * x);
        for nu in 0..=2 {
            let a = estimate_pair(&f, nu).unwrap();
            let b = estimate_pair(&g, nu).unwrap();
            assert!((a.horizontal.value - b.horizontal.value).abs() <= 1e-12);
            assert!((a.vertical.value - b.vertical.value).abs() <= 1e-12);
        }
    }

    #[test]
    fn transposed_field_negates_difference() {
        let f = field(0.7, 0.2, 64, 8);
        for nu in 0..=3 {
            let a = estimate_pair(&f, nu).unwrap();
            let b = estimate_pair(&f.transpose(), nu).unwrap();
            assert_eq!(a.difference(), -b.difference());
        }
    }

    #[test]
    fn grid_too_coarse() {
        let f = field(0.5, 0.5, 32, 9);
        assert!(estimate_direction(&f, Direction::Horizontal, 2).is_ok());
        assert!(matches!(
            estimate_direction(&f, Direction::Horizontal, 3),
            Err(Error::GridTooCoarse { grid: 32, nu: 3 })
        ));
        assert!(matches!(estimate_direction(&f, Direction::Horizontal, 70), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn out_of_range_flag() {
        let mut e = EstimateResult { value: 0.4, v_u: 1.0, v_v: 1.0, u: 2, v: 1, direction: None, nu: None };
        assert!(!e.out_of_range());
        e.value = -0.01;
        assert!(e.out_of_range());
        e.value = 1.2;
        assert!(e.out_of_range());
    }
}
