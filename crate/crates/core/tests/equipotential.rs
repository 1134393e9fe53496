//! Constrained particles follow induced geodesics exactly on lapse level sets.

mod common;

use geostat::dynamics::{
    default_probes, equipotential_deviation, extract_level_set, sphericity_defect, LevelSetOptions,
};
use geostat::quadrature::SphereRule;
use geostat::solutions::{schwarzschild, weyl_system, SchwarzschildChart, SchwarzschildSpec};
use geostat::statics::{from_pseudo_newtonian, PhysicalConstants, StaticSystem};
use geostat::surface::ClosedSurface;
use geostat::GeoError;

const SPAN: f64 = 5.0;
const CHECK: SphereRule = SphereRule {
    n_theta: 8,
    n_phi: 16,
};

fn isotropic() -> StaticSystem {
    let spec = SchwarzschildSpec::centered(1.0, SchwarzschildChart::Isotropic);
    schwarzschild(&spec, &PhysicalConstants::geometric()).unwrap()
}

fn weyl() -> StaticSystem {
    from_pseudo_newtonian(
        &weyl_system(&common::two_rods(), &PhysicalConstants::geometric()).unwrap(),
    )
}

/// `N = (1 − 1/(2r))/(1 + 1/(2r))` for the unit isotropic mass.
fn isotropic_level(r: f64) -> f64 {
    (1.0 - 0.5 / r) / (1.0 + 0.5 / r)
}

#[test]
fn level_sets_are_equipotential() {
    let s = isotropic();
    let options = LevelSetOptions {
        r_min: 0.6,
        r_max: 200.0,
        ..Default::default()
    };
    for r in [3.0, 5.0, 8.0] {
        let level = extract_level_set(&s, isotropic_level(r), [0.0; 3], options).unwrap();
        let x = level.point(0.7, 1.9).unwrap();
        assert!(((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() - r).abs() < 1e-10);
        let report =
            equipotential_deviation(&s, &level, &default_probes(0.3), SPAN, CHECK).unwrap();
        assert!(report.deviation <= 1e-6, "{report:?}");
        assert!(report.tangential_gradient <= 1e-10, "{report:?}");
        assert!(report.energy_drift <= 1e-8, "{report:?}");
    }

    let w = weyl();
    let options = LevelSetOptions {
        r_min: 7.0,
        r_max: 500.0,
        ..Default::default()
    };
    let level = extract_level_set(&w, (-0.25f64).exp(), [0.0, 0.0, 4.0 / 3.0], options).unwrap();
    let report = equipotential_deviation(&w, &level, &default_probes(0.3), SPAN, CHECK).unwrap();
    assert!(report.deviation <= 1e-6, "{report:?}");
    assert!(report.tangential_gradient <= 1e-10, "{report:?}");
    assert!(report.energy_drift <= 1e-8, "{report:?}");
}

#[test]
fn perturbed_surfaces_are_not_equipotential() {
    let s = isotropic();
    let surfaces = [
        ClosedSurface::sphere("off-center", [1.0, 0.0, 0.0], 5.0).unwrap(),
        ClosedSurface::dipole("dipole", [0.0; 3], 5.0, 1e-2).unwrap(),
        ClosedSurface::ellipsoid("ellipsoid", [0.0; 3], [5.0, 5.0, 5.2]).unwrap(),
    ];
    for surface in &surfaces {
        let report =
            equipotential_deviation(&s, surface, &default_probes(0.3), SPAN, CHECK).unwrap();
        assert!(report.deviation >= 1e-3, "{report:?}");
        assert!(report.energy_drift <= 1e-8, "{report:?}");
    }
    let off = equipotential_deviation(&s, &surfaces[0], &default_probes(0.3), SPAN, CHECK).unwrap();
    assert!(off.tangential_gradient >= 1e-3, "{off:?}");

    let w = weyl();
    let tilted = ClosedSurface::dipole("weyl-dipole", [0.0, 0.0, 4.0 / 3.0], 12.0, 0.5).unwrap();
    let report = equipotential_deviation(&w, &tilted, &default_probes(0.3), SPAN, CHECK).unwrap();
    assert!(report.deviation >= 1e-3, "{report:?}");
}

#[test]
fn distant_weyl_level_sets_are_nearly_round() {
    let w = weyl();
    let options = LevelSetOptions {
        r_min: 7.0,
        r_max: 2000.0,
        ..Default::default()
    };
    let level =
        extract_level_set(&w, (-3.0f64 / 30.0).exp(), [0.0, 0.0, 4.0 / 3.0], options).unwrap();
    let x = level.point(1.0, 0.0).unwrap();
    assert!(x[0].hypot(x[2] - 4.0 / 3.0) > 20.0);
    assert!(sphericity_defect(&level, SphereRule::new(8, 16)).unwrap() < 0.05);
    let lf = level.level_function.as_ref().unwrap();
    for node in SphereRule::new(8, 16).nodes() {
        let x = level.point(node.theta, node.phi).unwrap();
        assert!((lf.field.value(&x) - lf.level).abs() <= 1e-10);
    }
}

#[test]
fn flat_space_has_no_level_sets() {
    let flat = geostat::statics::flat_vacuum(PhysicalConstants::geometric());
    let err = extract_level_set(&flat, 0.9, [0.0; 3], LevelSetOptions::default()).unwrap_err();
    assert!(matches!(err, GeoError::LevelNotFound { .. }));
}
