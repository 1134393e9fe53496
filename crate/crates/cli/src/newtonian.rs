//! Convergence of a `λ = c⁻²` family to its Newtonian limit.

use serde::{Deserialize, Serialize};

use geostat::convergence::loglog_slope;
use geostat::quadrature::SphereRule;
use geostat::sampling::Shell;
use geostat::solutions::lambda::build as build_lambda_family;
use geostat::solutions::{LambdaFamily, SchwarzschildChart};
use geostat::surface::ClosedSurface;
use geostat::surfint::{center_of_mass, mass};
use geostat::{GeoError, Result};

/// Per-`λ` sup-norm errors against the Newtonian limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub lambda: f64,
    /// `sup |U_λ + Gm/r|` over the sample points.
    pub potential_error: f64,
    /// `sup max_ij |γ_λ,ij − δ_ij|` over the sample points.
    pub metric_error: f64,
    pub mass: f64,
    pub center_of_mass: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonianLimitReport {
    pub newtonian_mass: f64,
    pub center: [f64; 3],
    pub chart: String,
    pub shell: Shell,
    pub samples: usize,
    pub rows: Vec<LambdaRow>,
    pub potential_rate: f64,
    pub metric_rate: f64,
    /// Largest deviation of the per-`λ` masses from the Newtonian mass.
    pub mass_spread: f64,
    /// Largest deviation of the per-`λ` centers from the family center.
    pub center_spread: f64,
}

/// Inputs of [`newtonian_limit_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct NewtonianLimitSetup {
    pub mass: f64,
    pub g: f64,
    pub center: [f64; 3],
    pub chart: SchwarzschildChart,
    pub lambdas: Vec<f64>,
    /// Radii relative to `center`.
    pub r_min: f64,
    pub r_max: f64,
    pub samples: usize,
    pub rule: SphereRule,
}

fn distance(p: &[f64; 3], c: &[f64; 3]) -> f64 {
    ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt()
}

/// Sup-norm errors of the family against `−Gm/r` and `δ`, their log-log
/// rates in `λ`, and mass and center of mass per member.
///
/// The errors are measured in the chart of `setup.chart`. The center of mass
/// needs γ-harmonic coordinates, so it is computed on the harmonic-chart
/// family with the same parameters.
pub fn newtonian_limit_report(setup: &NewtonianLimitSetup) -> Result<NewtonianLimitReport> {
    let l = &setup.lambdas;
    if l.len() < 4 || l[0] / l[l.len() - 1] < 100.0 {
        return Err(GeoError::InvalidSpec(
            "a Newtonian-limit fit needs at least four lambdas spanning two decades".into(),
        ));
    }
    let family = build_lambda_family(setup.mass, l, setup.g, setup.center, setup.chart)?;
    let harmonic = build_lambda_family(
        setup.mass,
        l,
        setup.g,
        setup.center,
        SchwarzschildChart::GammaHarmonic,
    )?;
    let shell = Shell::new(setup.center, setup.r_min, setup.r_max)?;
    let points = shell.halton_points(setup.samples);
    let sphere = ClosedSurface::sphere(
        "limit-sphere",
        setup.center,
        0.5 * (setup.r_min + setup.r_max),
    )?;
    let rows = rows(&family, &harmonic, &points, &sphere, setup)?;
    let lambdas: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
    let pot: Vec<f64> = rows.iter().map(|r| r.potential_error).collect();
    let met: Vec<f64> = rows.iter().map(|r| r.metric_error).collect();
    let mass_spread = rows
        .iter()
        .map(|r| (r.mass - setup.mass).abs())
        .fold(0.0, f64::max);
    let center_spread = rows
        .iter()
        .flat_map(|r| (0..3).map(move |k| (r.center_of_mass[k] - setup.center[k]).abs()))
        .fold(0.0, f64::max);
    Ok(NewtonianLimitReport {
        newtonian_mass: setup.mass,
        center: setup.center,
        chart: family.members[0].system.chart.name().to_string(),
        shell,
        samples: points.len(),
        potential_rate: loglog_slope(&lambdas, &pot)?,
        metric_rate: loglog_slope(&lambdas, &met)?,
        rows,
        mass_spread,
        center_spread,
    })
}

fn rows(
    family: &LambdaFamily,
    harmonic: &LambdaFamily,
    points: &[[f64; 3]],
    sphere: &ClosedSurface,
    setup: &NewtonianLimitSetup,
) -> Result<Vec<LambdaRow>> {
    family
        .members
        .iter()
        .zip(&harmonic.members)
        .map(|(member, h)| {
            let p = &member.system;
            let mut potential_error: f64 = 0.0;
            let mut metric_error: f64 = 0.0;
            for x in points {
                let newtonian = -setup.g * setup.mass / distance(x, &setup.center);
                potential_error = potential_error.max((p.potential(x)? - newtonian).abs());
                let gamma = p.gamma.components(x)?;
                for (i, row) in gamma.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        metric_error = metric_error.max((v - delta).abs());
                    }
                }
            }
            let m = mass(p, sphere, setup.rule)?.scalar();
            let z = center_of_mass(&h.system, sphere, setup.rule, setup.mass)?.vector();
            Ok(LambdaRow {
                lambda: member.lambda,
                potential_error,
                metric_error,
                mass: m,
                center_of_mass: z,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_chart_family_converges_at_first_order() {
        let setup = NewtonianLimitSetup {
            mass: 1.0,
            g: 1.0,
            center: [0.5, -1.0, 2.0],
            chart: SchwarzschildChart::SchwarzschildArea,
            lambdas: vec![1e-2, 1e-3, 1e-4, 1e-5],
            r_min: 10.0,
            r_max: 20.0,
            samples: 200,
            rule: SphereRule::new(16, 32),
        };
        let r = newtonian_limit_report(&setup).unwrap();
        assert!(
            (r.potential_rate - 1.0).abs() < 0.05,
            "{}",
            r.potential_rate
        );
        assert!((r.metric_rate - 1.0).abs() < 0.05, "{}", r.metric_rate);
        assert!(r.mass_spread < 1e-8 && r.center_spread < 1e-8, "{r:?}");
    }

    #[test]
    fn too_few_lambdas_are_rejected() {
        let setup = NewtonianLimitSetup {
            mass: 1.0,
            g: 1.0,
            center: [0.0; 3],
            chart: SchwarzschildChart::SchwarzschildArea,
            lambdas: vec![1e-2, 1e-3, 1e-4],
            r_min: 10.0,
            r_max: 20.0,
            samples: 10,
            rule: SphereRule::default(),
        };
        assert!(newtonian_limit_report(&setup).is_err());
    }
}
