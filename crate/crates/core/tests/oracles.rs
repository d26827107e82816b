//! Independent closed forms and literal sums checked against the fast paths.

use afb::synthesis::SraSynthesizer;
use afb::theory::{c_const, e_const, gamma_fourier};
use afb::{AnisotropicIndex, DiscreteFilter, Seed, SpectralModel};
mod common;
use common::{gamma_closed, literal_field};

#[test]
fn fourier_constants_match_closed_form() {
    let filters = [DiscreteFilter::second_difference(), DiscreteFilter::binomial(3).unwrap()];
    for f in &filters {
        for h in [0.2, 0.5, 0.7, 0.9] {
            let scale = e_const(f, 1, h).unwrap();
            for (u, v) in [(1, 1), (2, 1), (1, 3)] {
                for p in [-7i64, -2, 0, 1, 3, 10, 41] {
                    let got = gamma_fourier(f, u, v, h, p).unwrap();
                    let want = gamma_closed(f.coeffs(), u, v, h, p);
                    assert!((got - want).abs() <= 1e-9 * scale, "a={f} H={h} u={u} v={v} p={p}: {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn e_const_matches_closed_form() {
    let f = DiscreteFilter::second_difference();
    for h in [0.1, 0.35, 0.5, 0.8, 1.3] {
        let want = gamma_closed(f.coeffs(), 1, 1, h, 0);
        let got = e_const(&f, 1, h).unwrap();
        assert!(((got - want) / want).abs() < 1e-9, "H={h}");
    }
}

#[test]
fn series_constant_matches_closed_form() {
    let d2 = DiscreteFilter::second_difference();
    let inc = DiscreteFilter::increment();
    let cases = [(&d2, 0.2), (&d2, 0.5), (&d2, 0.7), (&inc, 0.3)];
    for (f, h) in cases {
        for (u, v) in [(1, 1), (2, 2), (2, 1)] {
            // Gamma(p)^2 ~ p^{4H-4K}: the sum beyond 10^5 is below 1e-8 relative
            let mut want = 0.0;
            for p in -100_000i64..=100_000 {
                want += gamma_closed(f.coeffs(), u, v, h, p).powi(2);
            }
            want *= 2.0;
            let got = c_const(f, u, v, h).unwrap();
            assert!(((got - want) / want).abs() < 1e-6, "a={f} H={h} u={u} v={v}: {got} vs {want}");
        }
    }
}

#[test]
fn sra_fft_matches_literal_sum() {
    for index in [AnisotropicIndex::axis_pair(0.7, 0.2).unwrap(), AnisotropicIndex::constant(0.5).unwrap()] {
        let model = SpectralModel::planar(index);
        for m in [4, 8] {
            let synth = SraSynthesizer::<f64>::new(&model, m).unwrap();
            for s in 0..20 {
                let seed = Seed(1000 + s);
                let noise = synth.draw_noise(seed);
                let fast = synth.synthesize(seed);
                let slow = literal_field(&model, m, &noise);
                let diff = fast.values().iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(diff <= 1e-9, "{index} M={m} seed={s}: {diff}");
            }
        }
    }
}
