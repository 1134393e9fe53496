//! Schwarzschild slices in isotropic, area-radius and γ-harmonic charts.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::autodiff::Real;
use crate::charts::fields::{diagonal, distance};
use crate::charts::{
    Chart, ChartedMetric, ChartedScalar, HarmonicFlag, MetricExpr, Point, ScalarExpr, ScalarField,
};
use crate::error::{GeoError, Result};
use crate::sampling::Shell;
use crate::statics::{PhysicalConstants, PseudoNewtonianSystem, StaticSystem, LAPSE_MARGIN};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchwarzschildChart {
    /// `N = (1 − M/2ρ)/(1 + M/2ρ)`, `g = (1 + M/2ρ)⁴ δ`.
    Isotropic,
    /// `N = sqrt(1 − 2M/r)`, `g = δ + 2M/(r − 2M) n⊗n`.
    SchwarzschildArea,
    /// Area radius shifted by `M`; coordinates are exactly γ-harmonic.
    GammaHarmonic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwarzschildSpec {
    pub mass_m: f64,
    #[serde(default)]
    pub center: Point,
    pub chart_kind: SchwarzschildChart,
}

impl SchwarzschildSpec {
    pub fn new(mass_m: f64, center: Point, chart_kind: SchwarzschildChart) -> Self {
        Self {
            mass_m,
            center,
            chart_kind,
        }
    }

    pub fn centered(mass_m: f64, chart_kind: SchwarzschildChart) -> Self {
        Self::new(mass_m, [0.0; 3], chart_kind)
    }

    fn validate(&self) -> Result<()> {
        if !(self.mass_m.is_finite() && self.mass_m > 0.0) {
            return Err(GeoError::InvalidSpec(format!(
                "Schwarzschild mass must be positive, got {}",
                self.mass_m
            )));
        }
        if !self.center.iter().all(|c| c.is_finite()) {
            return Err(GeoError::InvalidSpec(
                "Schwarzschild center must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Geometric mass `M = mG/c²`.
    pub fn geometric_mass(&self, constants: &PhysicalConstants) -> f64 {
        self.mass_m * constants.g * constants.lambda
    }

    /// Chart radius of the horizon.
    pub fn horizon_radius(&self, constants: &PhysicalConstants) -> f64 {
        let m = self.geometric_mass(constants);
        match self.chart_kind {
            SchwarzschildChart::Isotropic => 0.5 * m,
            SchwarzschildChart::SchwarzschildArea => 2.0 * m,
            SchwarzschildChart::GammaHarmonic => m,
        }
    }

    /// The shell `3M <= |x − center| <= 10M`.
    pub fn default_shell(&self, constants: &PhysicalConstants) -> Shell {
        let m = self.geometric_mass(constants);
        Shell {
            center: self.center,
            r_min: 3.0 * m,
            r_max: 10.0 * m,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Params {
    m: f64,
    center: Point,
    kind: SchwarzschildChart,
}

#[derive(Clone, Copy, Debug)]
struct Lapse(Params);

impl ScalarExpr for Lapse {
    fn eval<T: Real>(&self, x: &[T; 3]) -> T {
        let Params { m, center, kind } = self.0;
        let r = distance(x, &center);
        match kind {
            SchwarzschildChart::Isotropic => {
                let q = r.recip() * (0.5 * m);
                (T::one() - q) / (T::one() + q)
            }
            SchwarzschildChart::SchwarzschildArea => (T::one() - r.recip() * (2.0 * m)).sqrt(),
            SchwarzschildChart::GammaHarmonic => ((r - m) / (r + m)).sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct SpatialMetric(Params);

impl MetricExpr for SpatialMetric {
    fn eval<T: Real>(&self, x: &[T; 3]) -> [[T; 3]; 3] {
        let Params { m, center, kind } = self.0;
        let y: [T; 3] = std::array::from_fn(|i| x[i] - center[i]);
        let r = distance(x, &center);
        match kind {
            SchwarzschildChart::Isotropic => {
                let psi = r.recip() * (0.5 * m) + 1.0;
                diagonal(psi.powi(4))
            }
            SchwarzschildChart::SchwarzschildArea => {
                let k = (r * r * (r - 2.0 * m)).recip() * (2.0 * m);
                with_radial(T::one(), k, &y)
            }
            SchwarzschildChart::GammaHarmonic => {
                let w = (r + m) / (r - m);
                let a = (T::one() - (r * r).recip() * (m * m)) * w;
                let k = (r * r).square().recip() * (m * m) * w;
                with_radial(a, k, &y)
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Potential {
    p: Params,
    c2: f64,
}

impl ScalarExpr for Potential {
    fn eval<T: Real>(&self, x: &[T; 3]) -> T {
        let Params { m, center, kind } = self.p;
        let r = distance(x, &center);
        let ln_n = match kind {
            SchwarzschildChart::Isotropic => {
                let q = r.recip() * (0.5 * m);
                (-q).ln_1p() - q.ln_1p()
            }
            SchwarzschildChart::SchwarzschildArea => (r.recip() * (-2.0 * m)).ln_1p() * 0.5,
            SchwarzschildChart::GammaHarmonic => {
                let q = r.recip() * m;
                ((-q).ln_1p() - q.ln_1p()) * 0.5
            }
        };
        ln_n * self.c2
    }
}

#[derive(Clone, Copy, Debug)]
struct ConformalMetric(Params);

impl MetricExpr for ConformalMetric {
    fn eval<T: Real>(&self, x: &[T; 3]) -> [[T; 3]; 3] {
        let Params { m, center, kind } = self.0;
        let y: [T; 3] = std::array::from_fn(|i| x[i] - center[i]);
        let r = distance(x, &center);
        match kind {
            SchwarzschildChart::Isotropic => {
                let q = (r * r).recip() * (0.25 * m * m);
                diagonal((T::one() - q).square())
            }
            SchwarzschildChart::SchwarzschildArea => {
                let a = T::one() - r.recip() * (2.0 * m);
                let k = (r * r * r).recip() * (2.0 * m);
                with_radial(a, k, &y)
            }
            SchwarzschildChart::GammaHarmonic => {
                let a = T::one() - (r * r).recip() * (m * m);
                let k = (r * r).square().recip() * (m * m);
                with_radial(a, k, &y)
            }
        }
    }
}

/// `a δ_ij + k y_i y_j`
fn with_radial<T: Real>(a: T, k: T, y: &[T; 3]) -> [[T; 3]; 3] {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let mut v = k * y[i] * y[j];
            if i == j {
                v += a;
            }
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

fn chart_for(spec: &SchwarzschildSpec, params: Params, horizon: f64) -> Chart {
    let (name, flag) = match spec.chart_kind {
        SchwarzschildChart::Isotropic => ("schwarzschild-isotropic", HarmonicFlag::Asymptotic),
        SchwarzschildChart::SchwarzschildArea => ("schwarzschild-area", HarmonicFlag::Unknown),
        SchwarzschildChart::GammaHarmonic => ("schwarzschild-harmonic", HarmonicFlag::Exact),
    };
    let lapse = Lapse(params);
    let center = spec.center;
    Chart::new(name, flag, move |p| {
        let r = distance(p, &center);
        r > horizon && lapse.value(p) >= LAPSE_MARGIN
    })
}

fn params(spec: &SchwarzschildSpec, constants: &PhysicalConstants) -> Params {
    Params {
        m: spec.geometric_mass(constants),
        center: spec.center,
        kind: spec.chart_kind,
    }
}

/// The Schwarzschild slice `(g, N)`.
pub fn schwarzschild(
    spec: &SchwarzschildSpec,
    constants: &PhysicalConstants,
) -> Result<StaticSystem> {
    spec.validate()?;
    let p = params(spec, constants);
    let chart = chart_for(spec, p, spec.horizon_radius(constants));
    Ok(StaticSystem {
        g: ChartedMetric::new(chart.clone(), Arc::new(SpatialMetric(p))),
        n: ChartedScalar::new(chart.clone(), Arc::new(Lapse(p))),
        constants: *constants,
        chart,
        shell: spec.default_shell(constants),
    })
}

/// The pseudo-Newtonian variables `(γ, U)` of the Schwarzschild slice in
/// closed form. Agrees with the transform of [`schwarzschild`] to roundoff,
/// but keeps full relative accuracy of `U + mG/r` for tiny `M`.
pub fn schwarzschild_pseudo_newtonian(
    spec: &SchwarzschildSpec,
    constants: &PhysicalConstants,
) -> Result<PseudoNewtonianSystem> {
    spec.validate()?;
    let p = params(spec, constants);
    let chart = chart_for(spec, p, spec.horizon_radius(constants));
    Ok(PseudoNewtonianSystem {
        gamma: ChartedMetric::new(chart.clone(), Arc::new(ConformalMetric(p))),
        u: ChartedScalar::new(
            chart.clone(),
            Arc::new(Potential {
                p,
                c2: constants.c2(),
            }),
        ),
        constants: *constants,
        harmonic: chart.harmonic(),
        chart,
        shell: spec.default_shell(constants),
    })
}

/// The field `N` alone, for level-set work.
pub fn schwarzschild_lapse(
    spec: &SchwarzschildSpec,
    constants: &PhysicalConstants,
) -> Arc<dyn ScalarField> {
    Arc::new(Lapse(params(spec, constants)))
}
