//! Forward-mode jets against central differences over the whole catalog.

mod common;

use geostat::charts::finite_difference_jet;
use geostat::solutions::{BetaReference, Rod, WeylGeometry, WeylSpec};

fn norm_inf(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a, b| a.max(b.abs()))
}

#[test]
fn jets_match_finite_differences_across_the_catalog() {
    let mut worst_gradient: f64 = 0.0;
    let mut worst_hessian: f64 = 0.0;
    for entry in common::catalog() {
        let points = entry.system.samples(60).unwrap();
        for (label, field) in common::scalars(&entry.system) {
            for p in &points {
                let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                let exact = field.eval_scalar_jet(p).unwrap();
                let fd = finite_difference_jet(&field, p, 2e-4 * r).unwrap();
                let g_scale = norm_inf(exact.gradient).max(1e-12);
                let h_scale = norm_inf(exact.hessian.iter().flatten().copied()).max(1e-12);
                let dg = norm_inf((0..3).map(|i| exact.gradient[i] - fd.gradient[i])) / g_scale;
                let dh = norm_inf(
                    (0..9).map(|k| exact.hessian[k / 3][k % 3] - fd.hessian[k / 3][k % 3]),
                ) / h_scale;
                if norm_inf(exact.gradient) > 1e-12 {
                    worst_gradient = worst_gradient.max(dg);
                    assert!(
                        dg <= 1e-6,
                        "{} {label} at {p:?}: gradient {dg:e}",
                        entry.name
                    );
                }
                if norm_inf(exact.hessian.iter().flatten().copied()) > 1e-12 {
                    worst_hessian = worst_hessian.max(dh);
                    assert!(
                        dh <= 1e-4,
                        "{} {label} at {p:?}: hessian {dh:e}",
                        entry.name
                    );
                }
            }
        }
    }
    println!("worst relative errors: gradient {worst_gradient:e}, hessian {worst_hessian:e}");
}

/// `e^{2β} = ((R₊ + R₋)² − 4M²)/(4 R₊ R₋)` with `R±` the distances to the rod ends.
fn single_rod_beta(m: f64, rho: f64, z: f64) -> f64 {
    let rp = (rho * rho + (z - m).powi(2)).sqrt();
    let rm = (rho * rho + (z + m).powi(2)).sqrt();
    0.5 * (((rp + rm).powi(2) - 4.0 * m * m) / (4.0 * rp * rm)).ln()
}

#[test]
fn single_rod_metric_function_matches_the_two_center_formula() {
    let m = 1.5;
    let g = WeylGeometry::new(&WeylSpec::new(vec![Rod {
        center_z: 0.0,
        half_length: m,
    }]))
    .unwrap();
    let mut worst: f64 = 0.0;
    for &(rho, z) in &[
        (0.5, 0.0),
        (2.0, 3.0),
        (0.2, -2.5),
        (7.0, 1.0),
        (3.0, -9.0),
        (0.05, 4.0),
    ] {
        for reference in [
            BetaReference::Nearest,
            BetaReference::Top,
            BetaReference::Bottom,
        ] {
            let beta = g.beta_meridian(rho, z, reference).unwrap();
            worst = worst.max((beta - single_rod_beta(m, rho, z)).abs());
        }
    }
    assert!(worst <= 1e-8, "{worst:e}");
}
