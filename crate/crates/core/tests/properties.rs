//! Randomized invariants.

use geostat::quadrature::{pairwise_sum, SphereRule};
use geostat::sampling::{halton, Shell};
use geostat::solutions::{
    schwarzschild, schwarzschild_pseudo_newtonian, SchwarzschildChart, SchwarzschildSpec,
};
use geostat::statics::{from_pseudo_newtonian, to_pseudo_newtonian, PhysicalConstants};
use geostat::surface::ClosedSurface;
use geostat::surfint::{center_of_mass, mass};
use proptest::prelude::*;

fn chart() -> impl Strategy<Value = SchwarzschildChart> {
    prop_oneof![
        Just(SchwarzschildChart::Isotropic),
        Just(SchwarzschildChart::SchwarzschildArea),
        Just(SchwarzschildChart::GammaHarmonic),
    ]
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0..1.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pseudo_newtonian_roundtrip(m in 0.2..3.0f64, kind in chart(), dir in point(), r in 4.0..50.0f64) {
        let k = PhysicalConstants::geometric();
        let s = schwarzschild(&SchwarzschildSpec::centered(m, kind), &k).unwrap();
        let back = from_pseudo_newtonian(&to_pseudo_newtonian(&s).unwrap());
        let norm = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt().max(1e-3);
        let p = dir.map(|v| v / norm * r * m);
        let n0 = s.lapse(&p).unwrap();
        prop_assert!((back.lapse(&p).unwrap() - n0).abs() <= 1e-13 * n0.abs().max(1.0));
        let (g0, g1) = (s.g.components(&p).unwrap(), back.g.components(&p).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((g0[i][j] - g1[i][j]).abs() <= 1e-12 * g0[i][j].abs().max(1.0));
            }
        }
    }

    #[test]
    fn lapse_hessian_is_symmetric(m in 0.2..3.0f64, kind in chart(), dir in point(), r in 4.0..50.0f64) {
        let s = schwarzschild(&SchwarzschildSpec::new(m, [0.5, 0.0, -0.5], kind), &PhysicalConstants::geometric()).unwrap();
        let norm = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt().max(1e-3);
        let p = [0.5 + dir[0] / norm * r * m, dir[1] / norm * r * m, -0.5 + dir[2] / norm * r * m];
        let jet = s.n.eval_scalar_jet(&p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(jet.hessian[i][j], jet.hessian[j][i]);
            }
        }
    }

    #[test]
    fn halton_points_stay_in_shell(r_min in 0.1..10.0f64, width in 0.0..50.0f64, c in point(), n in 1usize..200) {
        let shell = Shell::new(c, r_min, r_min + width).unwrap();
        for p in shell.halton_points(n) {
            let d = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt();
            prop_assert!(d >= r_min * (1.0 - 1e-14) && d <= (r_min + width) * (1.0 + 1e-14));
        }
        prop_assert!(halton(n).iter().flatten().all(|&u| (0.0..1.0).contains(&u)));
    }

    #[test]
    fn pairwise_sum_is_close_to_naive(values in prop::collection::vec(-1e3..1e3f64, 0..300)) {
        let naive: f64 = values.iter().sum();
        let scale: f64 = values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        prop_assert!((pairwise_sum(&values) - naive).abs() <= 1e-13 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mass_ignores_the_enclosing_sphere(m in 0.3..2.0f64, offset in point(), r in 3.0..20.0f64) {
        let spec = SchwarzschildSpec::centered(m, SchwarzschildChart::GammaHarmonic);
        let p = schwarzschild_pseudo_newtonian(&spec, &PhysicalConstants::geometric()).unwrap();
        let center = offset.map(|v| v * 0.5 * m);
        let sphere = ClosedSurface::sphere("s", center, r * m).unwrap();
        let value = mass(&p, &sphere, SphereRule::default()).unwrap().scalar();
        prop_assert!((value - m).abs() < 1e-9 * m, "{} vs {}", value, m);
    }

    #[test]
    fn harmonic_center_follows_the_source(m in 0.3..2.0f64, c in point(), r in 4.0..20.0f64) {
        let spec = SchwarzschildSpec::new(m, c, SchwarzschildChart::GammaHarmonic);
        let p = schwarzschild_pseudo_newtonian(&spec, &PhysicalConstants::geometric()).unwrap();
        let sphere = ClosedSurface::sphere("s", c, r * m).unwrap();
        let z = center_of_mass(&p, &sphere, SphereRule::default(), m).unwrap().vector();
        for k in 0..3 {
            prop_assert!((z[k] - c[k]).abs() < 1e-8, "{:?} vs {:?}", z, c);
        }
    }
}
