//! Large-sphere diagnostics of the asymptotic expansions
//!
//! ```text
//! U = −mG/r − mG z·x/r³ + O(r⁻³)
//! γ = (1 − M²/r²) δ + M² x⊗x/r⁴ + O(r⁻³)
//! ```
//!
//! in γ-harmonic coordinates: coefficient fits from Euclidean sphere averages
//! and sup-norm remainders on a sequence of radii.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::charts::Point;
use crate::convergence::{least_squares, loglog_slope};
use crate::error::Result;
use crate::parallel::try_map;
use crate::quadrature::{pairwise_sum, SphereRule};
use crate::statics::PseudoNewtonianSystem;
use crate::surface::direction;
use crate::tensor::Mat3;

/// Radii used by default for decay fits.
pub const DEFAULT_RADII: [f64; 4] = [10.0, 20.0, 40.0, 80.0];

/// Mean of `f` over the Euclidean sphere `|x − center| = radius`.
pub fn sphere_average(
    f: impl Fn(&Point, &Point) -> Result<f64> + Sync,
    center: &Point,
    radius: f64,
    rule: SphereRule,
) -> Result<f64> {
    let terms: Vec<f64> = try_map(&rule.nodes(), |node| {
        let n = direction(node.theta, node.phi);
        let x = std::array::from_fn(|i| center[i] + radius * n[i]);
        Ok(f(&x, &n)? * node.weight * node.theta.sin())
    })?;
    Ok(pairwise_sum(&terms) / (4.0 * PI))
}

fn sphere_sup(
    f: impl Fn(&Point) -> Result<f64> + Sync,
    radius: f64,
    rule: SphereRule,
) -> Result<f64> {
    let values: Vec<f64> = try_map(&rule.nodes(), |node| {
        let n = direction(node.theta, node.phi);
        f(&n.map(|v| v * radius))
    })?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFit {
    pub radii: Vec<f64>,
    /// `m` from `⟨U⟩ = −mG/r + a/r³`.
    pub mass: f64,
    /// `z` from `⟨U n⟩ = −mG z/(3r²) + b/r⁴`.
    pub center: [f64; 3],
    /// `M` from the tangential trace `(2 − tr_T γ)/2 = M²/r² + …`.
    pub geometric_mass: f64,
}

/// Fit the asymptotic coefficients from sphere averages about the origin.
pub fn fit_coefficients(
    p: &PseudoNewtonianSystem,
    radii: &[f64],
    rule: SphereRule,
) -> Result<CoefficientFit> {
    let g = p.constants.g;
    let origin = [0.0; 3];
    let u_avg = radii
        .iter()
        .map(|&r| sphere_average(|x, _| p.u.value(x), &origin, r, rule))
        .collect::<Result<Vec<_>>>()?;
    let c = least_squares(radii, &u_avg, &[&|r| 1.0 / r, &|r| r.powi(-3)])?;
    let mass = -c[0] / g;

    let mut center = [0.0; 3];
    for (k, slot) in center.iter_mut().enumerate() {
        let avg = radii
            .iter()
            .map(|&r| sphere_average(|x, n| Ok(p.u.value(x)? * n[k]), &origin, r, rule))
            .collect::<Result<Vec<_>>>()?;
        let c = least_squares(radii, &avg, &[&|r| r.powi(-2), &|r| r.powi(-4)])?;
        *slot = -3.0 * c[0] / (mass * g);
    }

    let trace = radii
        .iter()
        .map(|&r| {
            sphere_average(
                |x, n| {
                    let gamma = p.gamma.components(x)?;
                    let full: f64 = (0..3).map(|i| gamma[i][i]).sum();
                    let radial = radial_component(&gamma, n);
                    Ok(0.5 * (2.0 - (full - radial)))
                },
                &origin,
                r,
                rule,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let c = least_squares(
        radii,
        &trace,
        &[&|r| r.powi(-2), &|r| r.powi(-3), &|r| r.powi(-4)],
    )?;
    Ok(CoefficientFit {
        radii: radii.to_vec(),
        mass,
        center,
        geometric_mass: c[0].max(0.0).sqrt(),
    })
}

fn radial_component(gamma: &Mat3, n: &Point) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += gamma[i][j] * n[i] * n[j];
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRemainders {
    pub radii: Vec<f64>,
    /// Sup over each sphere of `|U + mG/r + mG z·x/r³|`.
    pub potential: Vec<f64>,
    /// Sup over each sphere of the Frobenius norm of
    /// `γ − (1 − M²/r²)δ − k M² x⊗x/r⁴`.
    pub metric: Vec<f64>,
    /// Log-log slopes; `None` when a remainder vanishes to roundoff.
    pub potential_slope: Option<f64>,
    pub metric_slope: Option<f64>,
}

/// Remainders of the expansions with mass `m`, geometric mass `M`, center
/// `z`, and metric coefficient `k` in front of `M² x⊗x/r⁴`.
pub fn expansion_remainders(
    p: &PseudoNewtonianSystem,
    radii: &[f64],
    rule: SphereRule,
    m: f64,
    geometric_mass: f64,
    center: &Point,
    coefficient: f64,
) -> Result<ExpansionRemainders> {
    let g = p.constants.g;
    let m2 = geometric_mass * geometric_mass;
    let mut potential = Vec::new();
    let mut metric = Vec::new();
    for &r in radii {
        potential.push(sphere_sup(
            |x| {
                let zx = center[0] * x[0] + center[1] * x[1] + center[2] * x[2];
                Ok((p.u.value(x)? + m * g / r + m * g * zx / (r * r * r)).abs())
            },
            r,
            rule,
        )?);
        metric.push(sphere_sup(
            |x| {
                let gamma = p.gamma.components(x)?;
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        let mut model = coefficient * m2 * x[i] * x[j] / r.powi(4);
                        if i == j {
                            model += 1.0 - m2 / (r * r);
                        }
                        s += (gamma[i][j] - model).powi(2);
                    }
                }
                Ok(s.sqrt())
            },
            r,
            rule,
        )?);
    }
    let slope = |v: &[f64]| {
        if v.iter().all(|x| *x > 1e-13) {
            loglog_slope(radii, v).ok()
        } else {
            None
        }
    };
    Ok(ExpansionRemainders {
        radii: radii.to_vec(),
        potential_slope: slope(&potential),
        metric_slope: slope(&metric),
        potential,
        metric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solutions::{schwarzschild_pseudo_newtonian, SchwarzschildChart, SchwarzschildSpec};
    use crate::statics::PhysicalConstants;

    #[test]
    fn sphere_average_of_constant_and_dipole() {
        let rule = SphereRule::default();
        let one = sphere_average(|_, _| Ok(1.0), &[0.0; 3], 3.0, rule).unwrap();
        assert!((one - 1.0).abs() < 1e-14);
        let nz2 = sphere_average(|_, n| Ok(n[2] * n[2]), &[1.0; 3], 2.0, rule).unwrap();
        assert!((nz2 - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn translated_harmonic_schwarzschild_decays_at_third_order() {
        let k = PhysicalConstants::geometric();
        let spec = SchwarzschildSpec::new(1.0, [1.0, 2.0, 3.0], SchwarzschildChart::GammaHarmonic);
        let p = schwarzschild_pseudo_newtonian(&spec, &k).unwrap();
        let rule = SphereRule::new(16, 32);
        let rem = expansion_remainders(&p, &DEFAULT_RADII, rule, 1.0, 1.0, &[1.0, 2.0, 3.0], 1.0)
            .unwrap();
        assert!(rem.potential_slope.unwrap() <= -2.9, "{rem:?}");
        assert!(rem.metric_slope.unwrap() <= -2.9, "{rem:?}");
        // with coefficient 2 in front of M² x⊗x/r⁴ the remainder is only O(r⁻²)
        let centered = SchwarzschildSpec::centered(1.0, SchwarzschildChart::GammaHarmonic);
        let p = schwarzschild_pseudo_newtonian(&centered, &k).unwrap();
        let rem2 =
            expansion_remainders(&p, &DEFAULT_RADII, rule, 1.0, 1.0, &[0.0; 3], 2.0).unwrap();
        assert!((rem2.metric_slope.unwrap() + 2.0).abs() < 0.1, "{rem2:?}");
    }
}
