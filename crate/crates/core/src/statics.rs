//! Geometrostatic systems `(g, N)`, their pseudo-Newtonian form `(γ, U)`,
//! field-equation residuals in both variable sets, and the force field.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::autodiff::{Jet, Real};
use crate::charts::fields::{Constant, FlatMetric};
use crate::charts::{
    Chart, ChartedMetric, ChartedScalar, HarmonicFlag, MetricField, MetricJet, Point, ScalarField,
};
use crate::error::{GeoError, Result};
use crate::geometry::LocalGeometry;
use crate::parallel::try_map;
use crate::quadrature::pairwise_sum;
use crate::sampling::Shell;
use crate::tensor::{frame_norm, mat_vec, Mat3};

/// Smallest lapse admitted in any computational domain.
pub const LAPSE_MARGIN: f64 = 1e-6;

/// Points drawn from a system's shell when a transform checks the lapse sign.
const LAPSE_PROBES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    #[serde(rename = "G")]
    pub g: f64,
    pub c: f64,
    pub lambda: f64,
}

impl PhysicalConstants {
    pub fn new(g: f64, c: f64) -> Result<Self> {
        if !(g.is_finite() && g > 0.0 && c.is_finite() && c > 0.0) {
            return Err(GeoError::InvalidSpec(format!(
                "constants must be positive, got G={g}, c={c}"
            )));
        }
        Ok(Self {
            g,
            c,
            lambda: 1.0 / (c * c),
        })
    }

    /// `G = c = 1`.
    pub fn geometric() -> Self {
        Self {
            g: 1.0,
            c: 1.0,
            lambda: 1.0,
        }
    }

    /// `c = lambda^(-1/2)` with the given `G`. `lambda` is stored exactly.
    pub fn from_lambda(lambda: f64, g: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(GeoError::InvalidSpec(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let mut out = Self::new(g, 1.0 / lambda.sqrt())?;
        out.lambda = lambda;
        Ok(out)
    }

    /// `c²`, taken as `1/lambda` so that families in `lambda` are exact.
    pub fn c2(&self) -> f64 {
        1.0 / self.lambda
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::geometric()
    }
}

/// Spatial metric and lapse of a static space-time `−N²c²dt² + g`.
#[derive(Clone, Debug)]
pub struct StaticSystem {
    pub g: ChartedMetric,
    pub n: ChartedScalar,
    pub constants: PhysicalConstants,
    pub chart: Chart,
    /// Coordinate shell used for default sample sets.
    pub shell: Shell,
}

/// Conformal metric `γ = N²g` and potential `U = c² ln N`.
#[derive(Clone, Debug)]
pub struct PseudoNewtonianSystem {
    pub gamma: ChartedMetric,
    pub u: ChartedScalar,
    pub constants: PhysicalConstants,
    pub chart: Chart,
    pub harmonic: HarmonicFlag,
    pub shell: Shell,
}

impl StaticSystem {
    /// `n` Halton points of the configured shell inside the chart domain.
    pub fn samples(&self, n: usize) -> Result<Vec<Point>> {
        self.shell.halton_points_in(&self.chart, n)
    }

    pub fn lapse(&self, p: &Point) -> Result<f64> {
        self.n.value(p)
    }

    /// Replace the lapse by `k N`, i.e. change the unit of time.
    pub fn rescaled_time(&self, k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(GeoError::InvalidSpec(format!(
                "time rescaling must be positive, got {k}"
            )));
        }
        let field = Arc::new(ScaledScalar {
            inner: self.n.field.clone(),
            factor: k,
        });
        Ok(Self {
            n: ChartedScalar::new(self.chart.clone(), field),
            ..self.clone()
        })
    }
}

impl PseudoNewtonianSystem {
    pub fn samples(&self, n: usize) -> Result<Vec<Point>> {
        self.shell.halton_points_in(&self.chart, n)
    }

    pub fn potential(&self, p: &Point) -> Result<f64> {
        self.u.value(p)
    }
}

struct ScaledScalar {
    inner: Arc<dyn ScalarField>,
    factor: f64,
}

impl ScalarField for ScaledScalar {
    fn value(&self, p: &Point) -> f64 {
        self.factor * self.inner.value(p)
    }
    fn jet(&self, p: &Point) -> Jet<3> {
        self.inner.jet(p) * self.factor
    }
}

/// `c² ln N`
struct LogScaled {
    lapse: Arc<dyn ScalarField>,
    c2: f64,
}

impl ScalarField for LogScaled {
    fn value(&self, p: &Point) -> f64 {
        self.c2 * self.lapse.value(p).ln()
    }
    fn jet(&self, p: &Point) -> Jet<3> {
        self.lapse.jet(p).ln() * self.c2
    }
}

/// `exp(U / c²)`
struct ExpScaled {
    potential: Arc<dyn ScalarField>,
    lambda: f64,
}

impl ScalarField for ExpScaled {
    fn value(&self, p: &Point) -> f64 {
        (self.potential.value(p) * self.lambda).exp()
    }
    fn jet(&self, p: &Point) -> Jet<3> {
        (self.potential.jet(p) * self.lambda).exp()
    }
}

/// `w * m` for a scalar weight `w` and metric `m`.
struct WeightedMetric {
    metric: Arc<dyn MetricField>,
    weight: Arc<dyn ScalarField>,
}

impl MetricField for WeightedMetric {
    fn components(&self, p: &Point) -> Mat3 {
        let w = self.weight.value(p);
        self.metric.components(p).map(|row| row.map(|v| w * v))
    }
    fn jet(&self, p: &Point) -> MetricJet {
        let w = self.weight.jet(p);
        self.metric.jet(p).map(|row| row.map(|v| w * v))
    }
}

/// `N²`
struct Squared(Arc<dyn ScalarField>);

impl ScalarField for Squared {
    fn value(&self, p: &Point) -> f64 {
        self.0.value(p).powi(2)
    }
    fn jet(&self, p: &Point) -> Jet<3> {
        self.0.jet(p).square()
    }
}

/// `exp(−2U/c²)`
struct InverseSquaredLapse {
    potential: Arc<dyn ScalarField>,
    lambda: f64,
}

impl ScalarField for InverseSquaredLapse {
    fn value(&self, p: &Point) -> f64 {
        (self.potential.value(p) * (-2.0 * self.lambda)).exp()
    }
    fn jet(&self, p: &Point) -> Jet<3> {
        (self.potential.jet(p) * (-2.0 * self.lambda)).exp()
    }
}

/// `γ = N²g`, `U = c² ln N`. The resulting chart additionally requires
/// `N >= LAPSE_MARGIN`; a non-positive lapse anywhere on the configured shell
/// is an error.
pub fn to_pseudo_newtonian(s: &StaticSystem) -> Result<PseudoNewtonianSystem> {
    for p in s.shell.halton_points(LAPSE_PROBES) {
        if s.chart.contains(&p) {
            let n = s.n.value(&p)?;
            if n <= 0.0 {
                return Err(GeoError::NonPositiveLapse { point: p, value: n });
            }
        }
    }
    let lapse = s.n.field.clone();
    let guard = lapse.clone();
    let chart = s
        .chart
        .clone()
        .restricted(move |p| guard.value(p) >= LAPSE_MARGIN);
    let gamma = WeightedMetric {
        metric: s.g.field.clone(),
        weight: Arc::new(Squared(lapse.clone())),
    };
    let u = LogScaled {
        lapse,
        c2: s.constants.c2(),
    };
    Ok(PseudoNewtonianSystem {
        gamma: ChartedMetric::new(chart.clone(), Arc::new(gamma)),
        u: ChartedScalar::new(chart.clone(), Arc::new(u)),
        constants: s.constants,
        harmonic: chart.harmonic(),
        chart,
        shell: s.shell,
    })
}

/// `N = exp(U/c²)`, `g = N⁻²γ`.
pub fn from_pseudo_newtonian(p: &PseudoNewtonianSystem) -> StaticSystem {
    let lambda = p.constants.lambda;
    let n = ExpScaled {
        potential: p.u.field.clone(),
        lambda,
    };
    let weight = InverseSquaredLapse {
        potential: p.u.field.clone(),
        lambda,
    };
    let g = WeightedMetric {
        metric: p.gamma.field.clone(),
        weight: Arc::new(weight),
    };
    let chart = p.chart.clone().with_harmonic(p.harmonic);
    StaticSystem {
        g: ChartedMetric::new(chart.clone(), Arc::new(g)),
        n: ChartedScalar::new(chart.clone(), Arc::new(n)),
        constants: p.constants,
        chart,
        shell: p.shell,
    }
}

/// Flat space with unit lapse, on the shell `1 <= |x| <= 10`.
pub fn flat_vacuum(constants: PhysicalConstants) -> StaticSystem {
    let chart = Chart::euclidean().renamed("flat");
    StaticSystem {
        g: ChartedMetric::new(chart.clone(), Arc::new(FlatMetric::default())),
        n: ChartedScalar::new(chart.clone(), Arc::new(Constant(1.0))),
        constants,
        chart,
        shell: Shell {
            center: [0.0; 3],
            r_min: 1.0,
            r_max: 10.0,
        },
    }
}

/// Summary of a pointwise residual over a sample set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub eq_name: String,
    pub chart: String,
    pub sample_points: Vec<Point>,
    pub sup_norm: f64,
    /// Root mean square over the sample points.
    pub l2_norm: f64,
    pub per_point: Option<Vec<f64>>,
}

impl ResidualReport {
    pub fn from_values(eq_name: &str, chart: &str, points: &[Point], values: Vec<f64>) -> Self {
        let sup_norm = values.iter().copied().fold(0.0, f64::max);
        let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
        let l2_norm = if values.is_empty() {
            0.0
        } else {
            (pairwise_sum(&squares) / values.len() as f64).sqrt()
        };
        Self {
            eq_name: eq_name.to_string(),
            chart: chart.to_string(),
            sample_points: points.to_vec(),
            sup_norm,
            l2_norm,
            per_point: Some(values),
        }
    }
}

fn sweep(
    points: &[Point],
    f: impl Fn(&Point) -> Result<(f64, f64)> + Sync,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let pairs: Vec<(f64, f64)> = try_map(points, |p| f(p))?;
    Ok(pairs.into_iter().unzip())
}

/// Pointwise residuals of `N Ric = ∇²N` (frame norm) and `ΔN = 0`.
pub fn static_residual_at(s: &StaticSystem, p: &Point) -> Result<(f64, f64)> {
    let local = LocalGeometry::at(&s.g, p)?;
    let n = s.n.eval_scalar_jet(p)?;
    let ric = local.ricci().ricci;
    let hess = local.covariant_hessian(&n);
    let t: Mat3 =
        std::array::from_fn(|i| std::array::from_fn(|j| n.value * ric[i][j] - hess[i][j]));
    Ok((frame_norm(&t, &local.inverse), local.trace(&hess).abs()))
}

/// Pointwise residuals of `Ric_γ = 2c⁻⁴ dU⊗dU` (frame norm) and `Δ_γ U = 0`.
pub fn conformal_residual_at(p: &PseudoNewtonianSystem, q: &Point) -> Result<(f64, f64)> {
    let local = LocalGeometry::at(&p.gamma, q)?;
    let u = p.u.eval_scalar_jet(q)?;
    let ric = local.ricci().ricci;
    let k = 2.0 * p.constants.lambda * p.constants.lambda;
    let du = u.gradient;
    let t: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| ric[i][j] - k * du[i] * du[j]));
    Ok((frame_norm(&t, &local.inverse), local.laplacian(&u).abs()))
}

pub fn static_residual(
    s: &StaticSystem,
    points: &[Point],
) -> Result<(ResidualReport, ResidualReport)> {
    let (a, b) = sweep(points, |p| static_residual_at(s, p))?;
    let chart = s.chart.name();
    Ok((
        ResidualReport::from_values("N*Ric - Hess(N)", chart, points, a),
        ResidualReport::from_values("Laplacian(N)", chart, points, b),
    ))
}

pub fn conformal_residual(
    p: &PseudoNewtonianSystem,
    points: &[Point],
) -> Result<(ResidualReport, ResidualReport)> {
    let (a, b) = sweep(points, |q| conformal_residual_at(p, q))?;
    let chart = p.chart.name();
    Ok((
        ResidualReport::from_values("Ric_gamma - 2 dU dU / c^4", chart, points, a),
        ResidualReport::from_values("Laplacian_gamma(U)", chart, points, b),
    ))
}

/// `F = −γ⁻¹ dU`, contravariant chart components.
pub fn force_field(p: &PseudoNewtonianSystem, q: &Point) -> Result<Point> {
    let local = LocalGeometry::at(&p.gamma, q)?;
    let du = p.u.eval_scalar_jet(q)?.gradient;
    Ok(mat_vec(&local.inverse, &du).map(|v| -v))
}

/// `U = V` exactly when `N = exp(V/c²)`: builds the static system whose lapse
/// is the exponential of a given potential over a given metric.
pub fn lapse_from_potential(
    g: ChartedMetric,
    potential: Arc<dyn ScalarField>,
    constants: PhysicalConstants,
    shell: Shell,
) -> StaticSystem {
    let chart = g.chart.clone();
    let n = ExpScaled {
        potential,
        lambda: constants.lambda,
    };
    StaticSystem {
        n: ChartedScalar::new(chart.clone(), Arc::new(n)),
        g,
        constants,
        chart,
        shell,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::fields::diagonal;
    use crate::charts::fields::InverseDistance;
    use crate::charts::ScalarExpr;

    fn flat_with_lapse<E: ScalarExpr + 'static>(lapse: E) -> StaticSystem {
        let s = flat_vacuum(PhysicalConstants::geometric());
        StaticSystem {
            n: ChartedScalar::new(s.chart.clone(), Arc::new(lapse)),
            shell: Shell {
                center: [0.0; 3],
                r_min: 3.0,
                r_max: 10.0,
            },
            ..s
        }
    }

    struct OneMinusHalfInverse;
    impl ScalarExpr for OneMinusHalfInverse {
        fn eval<T: Real>(&self, x: &[T; 3]) -> T {
            T::one() - (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt().recip() * 0.5
        }
    }

    #[test]
    fn constants_validation() {
        assert!(PhysicalConstants::new(1.0, 0.0).is_err());
        let k = PhysicalConstants::from_lambda(1e-3, 1.0).unwrap();
        assert_eq!(k.lambda, 1e-3);
        assert!((k.c - 1e-3f64.powf(-0.5)).abs() < 1e-10);
        assert!(PhysicalConstants::from_lambda(-1.0, 1.0).is_err());
    }

    #[test]
    fn flat_vacuum_transform_and_residuals() {
        let s = flat_vacuum(PhysicalConstants::geometric());
        let p = to_pseudo_newtonian(&s).unwrap();
        let q = [1.0, -2.0, 0.5];
        assert_eq!(p.potential(&q).unwrap(), 0.0);
        assert_eq!(p.gamma.components(&q).unwrap(), diagonal(1.0));
        let pts = s.samples(50).unwrap();
        let (a, b) = static_residual(&s, &pts).unwrap();
        assert!(a.sup_norm < 1e-13 && b.sup_norm < 1e-13);
        let (a, b) = conformal_residual(&p, &pts).unwrap();
        assert!(a.sup_norm < 1e-13 && b.sup_norm < 1e-13);
        assert_eq!(force_field(&p, &q).unwrap(), [0.0; 3]);
        let back = from_pseudo_newtonian(&p);
        assert_eq!(back.lapse(&q).unwrap(), 1.0);
    }

    #[test]
    fn flat_metric_with_nontrivial_lapse_is_not_vacuum() {
        let s = flat_with_lapse(OneMinusHalfInverse);
        let pts = s.samples(200).unwrap();
        let (a, b) = static_residual(&s, &pts).unwrap();
        assert!(a.sup_norm > 1e-3, "{}", a.sup_norm);
        // the lapse is flat-harmonic, so only the Ricci equation fails
        assert!(b.sup_norm < 1e-13);
        assert!(
            a.sup_norm
                >= a.per_point
                    .as_ref()
                    .unwrap()
                    .iter()
                    .copied()
                    .fold(0.0, f64::max)
        );
    }

    #[test]
    fn exponential_lapse_gives_back_the_potential() {
        let s = flat_vacuum(PhysicalConstants::new(1.0, 3.0).unwrap());
        let v = Arc::new(InverseDistance {
            center: [0.0; 3],
            scale: -1.0,
        });
        let s = lapse_from_potential(s.g.clone(), v.clone(), s.constants, s.shell);
        let p = to_pseudo_newtonian(&s).unwrap();
        let q = [2.0, 1.0, -3.0];
        let expected = v.value(&q);
        assert!((p.potential(&q).unwrap() - expected).abs() < 1e-15);
        let n = s.lapse(&q).unwrap();
        assert!((n - (expected / 9.0).exp()).abs() < 1e-16);
    }

    #[test]
    fn non_positive_lapse_is_rejected() {
        struct Negative;
        impl ScalarExpr for Negative {
            fn eval<T: Real>(&self, x: &[T; 3]) -> T {
                x[0] * 0.0 - 1.0
            }
        }
        let s = flat_with_lapse(Negative);
        assert!(matches!(
            to_pseudo_newtonian(&s),
            Err(GeoError::NonPositiveLapse { .. })
        ));
    }

    #[test]
    fn time_rescaling_shifts_potential_and_keeps_force() {
        let s = flat_with_lapse(OneMinusHalfInverse);
        let k = 2.5;
        let p1 = to_pseudo_newtonian(&s).unwrap();
        let p2 = to_pseudo_newtonian(&s.rescaled_time(k).unwrap()).unwrap();
        let q = [3.0, 4.0, 1.0];
        let du = p2.potential(&q).unwrap() - p1.potential(&q).unwrap();
        assert!((du - k.ln()).abs() < 1e-14);
        let du1 = p1.u.eval_scalar_jet(&q).unwrap().gradient;
        let du2 = p2.u.eval_scalar_jet(&q).unwrap().gradient;
        let f1 = force_field(&p1, &q).unwrap();
        let f2 = force_field(&p2, &q).unwrap();
        for i in 0..3 {
            assert!((du1[i] - du2[i]).abs() < 1e-12);
            // γ = N²g picks up k², so the raised force scales by 1/k²
            assert!((f1[i] - k * k * f2[i]).abs() < 1e-12);
        }
    }
}
