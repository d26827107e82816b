use afb::io::{read_path_csv, write_path_csv};
use afb::{
    estimate_h, estimate_pair, project_axis, AnisotropicIndex, Direction, DiscreteFilter, FbmGenerator, GridField2D,
    SampledPath, Seed, SpectralModel, SraSynthesizer,
};
use proptest::prelude::*;

fn field(hh: f64, hv: f64, seed: u64) -> GridField2D {
    let model = SpectralModel::planar(AnisotropicIndex::axis_pair(hh, hv).unwrap());
    SraSynthesizer::new(&model, 32).unwrap().synthesize(Seed(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn estimate_ignores_affine_trends(
        h in 0.1f64..0.9,
        seed in any::<u64>(),
        scale in 0.01f64..100.0,
        offset in -10.0f64..10.0,
        slope in -10.0f64..10.0,
    ) {
        let path = FbmGenerator::new(h, 512).unwrap().sample(Seed(seed));
        let a = DiscreteFilter::second_difference();
        let base = estimate_h(&path, &a, 2, 1).unwrap().value;
        let step = path.step();
        let moved: Vec<f64> =
            path.values().iter().enumerate().map(|(i, x)| scale * x + offset + slope * i as f64 * step).collect();
        let got = estimate_h(&SampledPath::new(moved).unwrap(), &a, 2, 1).unwrap().value;
        prop_assert!((got - base).abs() <= 1e-8, "{} vs {}", got, base);
    }

    #[test]
    fn projection_is_linear(s1 in any::<u64>(), s2 in any::<u64>(), alpha in -5.0f64..5.0, beta in -5.0f64..5.0) {
        let (x, y) = (field(0.6, 0.3, s1), field(0.4, 0.8, s2));
        let combo = GridField2D::new(32, x.values().iter().zip(y.values()).map(|(p, q)| alpha * p + beta * q).collect())
            .unwrap();
        for d in Direction::BOTH {
            let (px, py, pc) = (project_axis(&x, d), project_axis(&y, d), project_axis(&combo, d));
            for ((a, b), c) in px.values.iter().zip(&py.values).zip(&pc.values) {
                prop_assert!((c - (alpha * a + beta * b)).abs() <= 1e-12 * (1.0 + c.abs()));
            }
        }
    }

    #[test]
    fn transposing_swaps_directions(hh in 0.1f64..0.9, hv in 0.1f64..0.9, seed in any::<u64>()) {
        let f = field(hh, hv, seed);
        let a = estimate_pair(&f, 0).unwrap();
        let b = estimate_pair(&f.transpose(), 0).unwrap();
        prop_assert_eq!(a.horizontal.value, b.vertical.value);
        prop_assert_eq!(a.vertical.value, b.horizontal.value);
    }

    #[test]
    fn path_csv_round_trips(values in proptest::collection::vec(-1e6f64..1e6, 2..200)) {
        let path = SampledPath::new(values).unwrap();
        let mut buf = Vec::new();
        write_path_csv(&path, &mut buf).unwrap();
        let back: SampledPath = read_path_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(path.values(), back.values());
    }
}
