//! Static vacuum equations in both sets of variables.

mod common;

use std::sync::Arc;

use geostat::charts::fields::FlatMetric;
use geostat::charts::{Chart, ChartedMetric};
use geostat::solutions::{
    schwarzschild, schwarzschild_lapse, schwarzschild_pseudo_newtonian, SchwarzschildChart,
    SchwarzschildSpec,
};
use geostat::statics::{
    conformal_residual, flat_vacuum, from_pseudo_newtonian, static_residual, to_pseudo_newtonian,
    PhysicalConstants, StaticSystem,
};

#[test]
fn schwarzschild_satisfies_both_formulations() {
    let k = PhysicalConstants::geometric();
    for m in [0.5, 1.0, 2.0] {
        for chart in [
            SchwarzschildChart::Isotropic,
            SchwarzschildChart::GammaHarmonic,
        ] {
            let spec = SchwarzschildSpec::centered(m, chart);
            let s = schwarzschild(&spec, &k).unwrap();
            let points = s.samples(1000).unwrap();
            assert_eq!(points.len(), 1000);
            let (ric, lap) = static_residual(&s, &points).unwrap();
            let p = schwarzschild_pseudo_newtonian(&spec, &k).unwrap();
            let (cric, clap) = conformal_residual(&p, &points).unwrap();
            for r in [&ric, &lap, &cric, &clap] {
                assert!(
                    r.sup_norm <= 1e-9,
                    "m={m} {chart:?} {}: {:e}",
                    r.eq_name,
                    r.sup_norm
                );
            }
        }
    }
    let flat = flat_vacuum(k);
    let points = flat.samples(1000).unwrap();
    let (ric, lap) = static_residual(&flat, &points).unwrap();
    assert_eq!((ric.sup_norm, lap.sup_norm), (0.0, 0.0));
}

#[test]
fn flat_metric_with_schwarzschild_lapse_is_not_static_vacuum() {
    let k = PhysicalConstants::geometric();
    let spec = SchwarzschildSpec::centered(1.0, SchwarzschildChart::Isotropic);
    let real = schwarzschild(&spec, &k).unwrap();
    let chart: Chart = real.chart.clone();
    let fake = StaticSystem {
        g: ChartedMetric::new(chart.clone(), Arc::new(FlatMetric::default())),
        n: geostat::charts::ChartedScalar::new(chart.clone(), schwarzschild_lapse(&spec, &k)),
        ..real
    };
    let points = fake.samples(1000).unwrap();
    let (ric, _) = static_residual(&fake, &points).unwrap();
    assert!(ric.sup_norm > 1e-3, "{:e}", ric.sup_norm);
}

#[test]
fn conformal_transform_round_trips_across_the_catalog() {
    for entry in common::catalog() {
        let s = &entry.system;
        let back = from_pseudo_newtonian(&to_pseudo_newtonian(s).unwrap());
        for p in s.samples(200).unwrap() {
            let (n0, n1) = (s.n.value(&p).unwrap(), back.n.value(&p).unwrap());
            assert!((n0 - n1).abs() <= 1e-13 * n0.abs(), "{}", entry.name);
            let (g0, g1) = (s.g.components(&p).unwrap(), back.g.components(&p).unwrap());
            for i in 0..3 {
                for j in 0..3 {
                    assert!(
                        (g0[i][j] - g1[i][j]).abs() <= 1e-13 * g0[i][i].abs().max(1.0),
                        "{}",
                        entry.name
                    );
                }
            }
        }
    }
}

#[test]
fn residuals_agree_between_formulations_on_the_catalog() {
    for entry in common::catalog() {
        let s = &entry.system;
        let p = to_pseudo_newtonian(s).unwrap();
        let points = s.samples(300).unwrap();
        let (a, b) = static_residual(s, &points).unwrap();
        let (c, d) = conformal_residual(&p, &points).unwrap();
        let tol = if entry.name.starts_with("weyl") {
            1e-8
        } else {
            1e-9
        };
        for r in [&a, &b, &c, &d] {
            assert!(
                r.sup_norm <= tol,
                "{} {}: {:e}",
                entry.name,
                r.eq_name,
                r.sup_norm
            );
        }
    }
}
