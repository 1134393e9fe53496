//! One-parameter families of Schwarzschild solutions in `λ = c⁻²`.

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::statics::{PhysicalConstants, PseudoNewtonianSystem};

use super::schwarzschild::{schwarzschild_pseudo_newtonian, SchwarzschildChart, SchwarzschildSpec};

/// The family `λ ↦ (γ_λ, U_λ)` of Schwarzschild systems with `c = λ^(-1/2)`
/// and fixed `G` and Newtonian mass.
#[derive(Clone, Debug)]
pub struct LambdaFamily {
    pub base_newtonian_mass: f64,
    pub g: f64,
    pub center: [f64; 3],
    pub chart_kind: SchwarzschildChart,
    pub members: Vec<LambdaMember>,
}

#[derive(Clone, Debug)]
pub struct LambdaMember {
    pub lambda: f64,
    pub system: PseudoNewtonianSystem,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaFamilySpec {
    pub mass: f64,
    pub lambdas: Vec<f64>,
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default)]
    pub center: [f64; 3],
    #[serde(default = "default_chart")]
    pub chart_kind: SchwarzschildChart,
}

fn default_g() -> f64 {
    1.0
}

fn default_chart() -> SchwarzschildChart {
    SchwarzschildChart::SchwarzschildArea
}

impl LambdaFamilySpec {
    pub fn build(&self) -> Result<LambdaFamily> {
        build(
            self.mass,
            &self.lambdas,
            self.g,
            self.center,
            self.chart_kind,
        )
    }
}

/// Area-chart family: `U_λ + Gm/r` and `γ_λ − δ` are both first order in `λ`.
pub fn lambda_family(m_newtonian: f64, lambdas: &[f64]) -> Result<LambdaFamily> {
    build(
        m_newtonian,
        lambdas,
        1.0,
        [0.0; 3],
        SchwarzschildChart::SchwarzschildArea,
    )
}

pub fn build(
    m_newtonian: f64,
    lambdas: &[f64],
    g: f64,
    center: [f64; 3],
    chart_kind: SchwarzschildChart,
) -> Result<LambdaFamily> {
    if lambdas.is_empty() {
        return Err(GeoError::InvalidSpec(
            "a lambda family needs at least one member".into(),
        ));
    }
    if lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(GeoError::InvalidSpec("lambdas must be positive".into()));
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(GeoError::InvalidSpec(
            "lambdas must decrease strictly".into(),
        ));
    }
    let spec = SchwarzschildSpec::new(m_newtonian, center, chart_kind);
    let members = lambdas
        .iter()
        .map(|&lambda| {
            let constants = PhysicalConstants::from_lambda(lambda, g)?;
            Ok(LambdaMember {
                lambda,
                system: schwarzschild_pseudo_newtonian(&spec, &constants)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(LambdaFamily {
        base_newtonian_mass: m_newtonian,
        g,
        center,
        chart_kind,
        members,
    })
}
