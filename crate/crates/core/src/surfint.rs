//! Localized mass and center of mass as closed-surface integrals of the
//! pseudo-Newtonian potential:
//!
//! ```text
//! m(Σ) = 1/(4πG)  ∫_Σ ∂U/∂ν dσ
//! z(Σ) = 1/(4πGm) ∫_Σ (∂U/∂ν x − U ∂x/∂ν) dσ
//! ```
//!
//! with `ν` the outward γ-unit normal and `dσ` the γ-area measure. The term
//! `∂x/∂ν` is `ν` applied to each coordinate function, i.e. the chart
//! components of `ν`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::charts::{HarmonicFlag, Point};
use crate::convergence::richardson_three;
use crate::error::{GeoError, Result};
use crate::geometry::{surface_geometry_from, LocalGeometry};
use crate::parallel::try_map;
use crate::quadrature::{pairwise_sum, SphereRule};
use crate::statics::PseudoNewtonianSystem;
use crate::surface::ClosedSurface;
use crate::tensor::dot;

/// Scale factors of the surfaces used to extrapolate the center of mass on
/// charts that are only asymptotically harmonic.
pub const EXTRAPOLATION_SCALES: [f64; 3] = [1.0, 2.0, 4.0];

/// Integrand data at one quadrature node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeSample {
    pub theta: f64,
    pub phi: f64,
    pub point: Point,
    /// Quadrature weight times γ-area element.
    pub measure: f64,
    pub potential: f64,
    pub normal_derivative: f64,
    /// Chart components of the γ-unit outward normal.
    pub normal: Point,
    /// Euclidean norm of the coordinate γ-Laplacians.
    pub coordinate_laplacian: f64,
}

/// Evaluate the integrand data at every node of `rule` on `surface`, in node order.
pub fn node_samples(
    p: &PseudoNewtonianSystem,
    surface: &ClosedSurface,
    rule: SphereRule,
) -> Result<Vec<NodeSample>> {
    try_map(&rule.nodes(), |node| {
        let x = surface.map.jet(node.theta, node.phi)?;
        let point = [x[0].value, x[1].value, x[2].value];
        let local = LocalGeometry::at(&p.gamma, &point)?;
        let sg = surface_geometry_from(&x, &local.metric, &local.inverse, node.theta, node.phi)?;
        let u = p.u.eval_scalar_jet(&point)?;
        let lap = local.coordinate_laplacians();
        Ok(NodeSample {
            theta: node.theta,
            phi: node.phi,
            point,
            measure: node.weight * sg.area_element,
            potential: u.value,
            normal_derivative: dot(&sg.unit_normal, &u.gradient),
            normal: sg.unit_normal,
            coordinate_laplacian: dot(&lap, &lap).sqrt(),
        })
    })
}

fn integrate(samples: &[NodeSample], f: impl Fn(&NodeSample) -> f64) -> f64 {
    let terms: Vec<f64> = samples.iter().map(|s| f(s) * s.measure).collect();
    pairwise_sum(&terms)
}

fn flux_of(samples: &[NodeSample]) -> f64 {
    integrate(samples, |s| s.normal_derivative)
}

fn first_moment(samples: &[NodeSample]) -> [f64; 3] {
    std::array::from_fn(|k| {
        integrate(samples, |s| {
            s.normal_derivative * s.point[k] - s.potential * s.normal[k]
        })
    })
}

fn defect_of(samples: &[NodeSample]) -> f64 {
    samples
        .iter()
        .map(|s| s.coordinate_laplacian)
        .fold(0.0, f64::max)
}

/// `∫_Σ ∂U/∂ν dσ`
pub fn surface_flux(
    p: &PseudoNewtonianSystem,
    surface: &ClosedSurface,
    rule: SphereRule,
) -> Result<f64> {
    Ok(flux_of(&node_samples(p, surface, rule)?))
}

/// Sup over the nodes of `|Δ_γ x|`.
pub fn harmonicity_defect(
    p: &PseudoNewtonianSystem,
    surface: &ClosedSurface,
    rule: SphereRule,
) -> Result<f64> {
    Ok(defect_of(&node_samples(p, surface, rule)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Mass,
    CenterOfMass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralReport {
    pub quantity: Quantity,
    /// One entry for mass, three for center of mass.
    pub value: Vec<f64>,
    pub surface: String,
    pub rule: SphereRule,
    pub chart: String,
    pub harmonicity_defect: f64,
    /// Values on the scaled surfaces when the result is extrapolated.
    pub raw: Option<Vec<Vec<f64>>>,
    pub scales: Option<Vec<f64>>,
    pub extrapolated: bool,
    /// Change of the value when the rule is doubled, if checked.
    pub refinement_delta: Option<f64>,
}

impl IntegralReport {
    fn new(
        quantity: Quantity,
        value: Vec<f64>,
        p: &PseudoNewtonianSystem,
        surface: &ClosedSurface,
        rule: SphereRule,
        defect: f64,
    ) -> Self {
        Self {
            quantity,
            value,
            surface: surface.label.clone(),
            rule,
            chart: p.chart.name().to_string(),
            harmonicity_defect: defect,
            raw: None,
            scales: None,
            extrapolated: false,
            refinement_delta: None,
        }
    }

    pub fn scalar(&self) -> f64 {
        self.value[0]
    }

    pub fn vector(&self) -> [f64; 3] {
        [self.value[0], self.value[1], self.value[2]]
    }
}

/// `m(Σ) = (1/4πG) ∫ ∂U/∂ν dσ`
pub fn mass(
    p: &PseudoNewtonianSystem,
    surface: &ClosedSurface,
    rule: SphereRule,
) -> Result<IntegralReport> {
    let samples = node_samples(p, surface, rule)?;
    let m = flux_of(&samples) / (4.0 * PI * p.constants.g);
    Ok(IntegralReport::new(
        Quantity::Mass,
        vec![m],
        p,
        surface,
        rule,
        defect_of(&samples),
    ))
}

/// `z(Σ) = (1/4πGm) ∫ (∂U/∂ν x − U ν) dσ`.
///
/// On exactly harmonic charts this is a single surface integral. On
/// asymptotically harmonic charts the integral is taken over the surface
/// scaled by 1, 2 and 4 about its center and extrapolated in the inverse
/// scale; the raw values are kept in the report.
pub fn center_of_mass(
    p: &PseudoNewtonianSystem,
    surface: &ClosedSurface,
    rule: SphereRule,
    total_mass: f64,
) -> Result<IntegralReport> {
    if total_mass == 0.0 || !total_mass.is_finite() {
        return Err(GeoError::ZeroMass);
    }
    let norm = 4.0 * PI * p.constants.g * total_mass;
    let single = |s: &ClosedSurface| -> Result<([f64; 3], f64)> {
        let samples = node_samples(p, s, rule)?;
        Ok((
            first_moment(&samples).map(|v| v / norm),
            defect_of(&samples),
        ))
    };
    match p.harmonic {
        HarmonicFlag::Unknown => Err(GeoError::NonHarmonicChart(p.chart.name().to_string())),
        HarmonicFlag::Exact => {
            let (z, defect) = single(surface)?;
            Ok(IntegralReport::new(
                Quantity::CenterOfMass,
                z.to_vec(),
                p,
                surface,
                rule,
                defect,
            ))
        }
        HarmonicFlag::Asymptotic => {
            let mut raw = Vec::with_capacity(EXTRAPOLATION_SCALES.len());
            let mut defect = 0.0;
            for (i, &k) in EXTRAPOLATION_SCALES.iter().enumerate() {
                let s = if k == 1.0 {
                    surface.clone()
                } else {
                    surface.scaled(k)
                };
                let (z, d) = single(&s)?;
                if i == 0 {
                    defect = d;
                }
                raw.push(z);
            }
            let z: Vec<f64> = (0..3)
                .map(|k| richardson_three(raw[0][k], raw[1][k], raw[2][k]))
                .collect();
            let mut report =
                IntegralReport::new(Quantity::CenterOfMass, z, p, surface, rule, defect);
            report.raw = Some(raw.iter().map(|v| v.to_vec()).collect());
            report.scales = Some(EXTRAPOLATION_SCALES.to_vec());
            report.extrapolated = true;
            Ok(report)
        }
    }
}

/// Evaluate `f` with `rule` and with the doubled rule; accept the finer
/// value when the two agree within `tolerance` (max over components).
pub fn with_refinement(
    rule: SphereRule,
    tolerance: f64,
    f: impl Fn(SphereRule) -> Result<IntegralReport>,
) -> Result<IntegralReport> {
    let coarse = f(rule)?;
    let fine_rule = rule.doubled();
    let mut fine = f(fine_rule)?;
    let delta = coarse
        .value
        .iter()
        .zip(&fine.value)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if !(delta <= tolerance) {
        return Err(GeoError::RuleTooCoarse {
            n_theta: rule.n_theta,
            n_phi: rule.n_phi,
            delta,
            tolerance,
        });
    }
    fine.refinement_delta = Some(delta);
    Ok(fine)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub masses: Vec<IntegralReport>,
    pub mass_spread: f64,
    pub centers: Option<Vec<IntegralReport>>,
    pub center_spread: Option<f64>,
}

fn spread(values: impl Iterator<Item = Vec<f64>>) -> f64 {
    let values: Vec<Vec<f64>> = values.collect();
    let mut out: f64 = 0.0;
    for a in &values {
        for b in &values {
            for (x, y) in a.iter().zip(b) {
                out = out.max((x - y).abs());
            }
        }
    }
    out
}

/// Mass (and, if `total_mass` is given, center of mass) on each surface and
/// the largest pairwise difference.
pub fn surface_independence_scan(
    p: &PseudoNewtonianSystem,
    surfaces: &[ClosedSurface],
    rule: SphereRule,
    total_mass: Option<f64>,
) -> Result<ScanReport> {
    let masses = surfaces
        .iter()
        .map(|s| mass(p, s, rule))
        .collect::<Result<Vec<_>>>()?;
    let mass_spread = spread(masses.iter().map(|r| r.value.clone()));
    let (centers, center_spread) = match total_mass {
        Some(m) => {
            let c = surfaces
                .iter()
                .map(|s| center_of_mass(p, s, rule, m))
                .collect::<Result<Vec<_>>>()?;
            let sp = spread(c.iter().map(|r| r.value.clone()));
            (Some(c), Some(sp))
        }
        None => (None, None),
    };
    Ok(ScanReport {
        masses,
        mass_spread,
        centers,
        center_spread,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::charts::fields::{FlatMetric, InverseDistance};
    use crate::charts::{Chart, ChartedMetric, ChartedScalar};
    use crate::sampling::Shell;
    use crate::statics::{flat_vacuum, to_pseudo_newtonian, PhysicalConstants};

    fn newtonian_point(g: f64, m: f64, center: Point) -> PseudoNewtonianSystem {
        let chart = Chart::new("euclidean-punctured", HarmonicFlag::Exact, move |p| {
            (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2) + (p[2] - center[2]).powi(2)
                > 1e-12
        });
        PseudoNewtonianSystem {
            gamma: ChartedMetric::new(chart.clone(), Arc::new(FlatMetric::default())),
            u: ChartedScalar::new(
                chart.clone(),
                Arc::new(InverseDistance {
                    center,
                    scale: -g * m,
                }),
            ),
            constants: PhysicalConstants::new(g, 1.0).unwrap(),
            harmonic: HarmonicFlag::Exact,
            chart,
            shell: Shell {
                center,
                r_min: 1.0,
                r_max: 2.0,
            },
        }
    }

    #[test]
    fn flat_vacuum_has_no_flux() {
        let p = to_pseudo_newtonian(&flat_vacuum(PhysicalConstants::geometric())).unwrap();
        let s = ClosedSurface::sphere("s", [0.0; 3], 2.0).unwrap();
        assert_eq!(surface_flux(&p, &s, SphereRule::default()).unwrap(), 0.0);
        assert!(harmonicity_defect(&p, &s, SphereRule::default()).unwrap() < 1e-12);
        assert_eq!(
            center_of_mass(&p, &s, SphereRule::default(), 0.0),
            Err(GeoError::ZeroMass)
        );
    }

    #[test]
    fn gauss_flux_of_point_potential() {
        let g = 2.5;
        let p = newtonian_point(g, 1.0, [0.0; 3]);
        let s = ClosedSurface::sphere("unit", [0.0; 3], 1.0).unwrap();
        let f = surface_flux(&p, &s, SphereRule::default()).unwrap();
        assert!((f - 4.0 * PI * g).abs() < 1e-12);
    }

    #[test]
    fn newtonian_center_of_mass_is_source_position() {
        let c = [0.3, -0.2, 0.5];
        let p = newtonian_point(1.0, 2.0, c);
        for s in [
            ClosedSurface::sphere("s", [0.0; 3], 2.0).unwrap(),
            ClosedSurface::ellipsoid("e", [0.1; 3], [3.0, 2.5, 2.0]).unwrap(),
        ] {
            let z = center_of_mass(&p, &s, SphereRule::new(48, 96), 2.0).unwrap();
            for k in 0..3 {
                assert!(
                    (z.value[k] - c[k]).abs() < 1e-10,
                    "{}: {:?}",
                    s.label,
                    z.value
                );
            }
        }
    }

    #[test]
    fn refinement_detects_too_coarse_rules() {
        let p = newtonian_point(1.0, 1.0, [0.0, 0.0, 1.6]);
        let s = ClosedSurface::sphere("s", [0.0; 3], 2.0).unwrap();
        let r = with_refinement(SphereRule::new(4, 8), 1e-12, |rule| mass(&p, &s, rule));
        assert!(matches!(r, Err(GeoError::RuleTooCoarse { .. })));
        let ok =
            with_refinement(SphereRule::new(64, 128), 1e-6, |rule| mass(&p, &s, rule)).unwrap();
        assert!(ok.refinement_delta.unwrap() <= 1e-6);
        assert_eq!(ok.rule, SphereRule::new(128, 256));
    }

    #[test]
    fn unknown_chart_is_rejected_for_center_of_mass() {
        let mut p = newtonian_point(1.0, 1.0, [0.0; 3]);
        p.harmonic = HarmonicFlag::Unknown;
        let s = ClosedSurface::sphere("s", [0.0; 3], 2.0).unwrap();
        assert!(matches!(
            center_of_mass(&p, &s, SphereRule::default(), 1.0),
            Err(GeoError::NonHarmonicChart(_))
        ));
    }
}
