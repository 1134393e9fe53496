//! Coordinate charts and second-order jets of fields defined on them.
//!
//! A field is written once as a generic expression ([`ScalarExpr`],
//! [`MetricExpr`]) and evaluated through the object-safe [`ScalarField`] /
//! [`MetricField`] traits. Exact derivatives come from [`Jet<3>`]; the
//! central-difference [`finite_difference_jet`] exists only as an independent
//! check.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::autodiff::{Jet, Real};
use crate::error::{GeoError, Result};
use crate::tensor::Mat3;

/// Chart coordinates of a spatial point.
pub type Point = [f64; 3];

/// Value, gradient and Hessian of a scalar in chart coordinates.
pub type Jet2Scalar = Jet<3>;

/// Second-order jets of the six independent metric components (stored as a
/// full symmetric 3x3 array).
pub type MetricJet = [[Jet<3>; 3]; 3];

/// Whether the chart coordinates are harmonic for the conformal metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonicFlag {
    Exact,
    Asymptotic,
    Unknown,
}

type DomainFn = dyn Fn(&Point) -> bool + Send + Sync;

/// A three-dimensional coordinate chart with its valid region.
#[derive(Clone)]
pub struct Chart {
    name: String,
    harmonic: HarmonicFlag,
    domain: Arc<DomainFn>,
}

impl Chart {
    pub fn new(
        name: impl Into<String>,
        harmonic: HarmonicFlag,
        domain: impl Fn(&Point) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            harmonic,
            domain: Arc::new(domain),
        }
    }

    /// All of R^3, with exactly harmonic coordinates for the flat metric.
    pub fn euclidean() -> Self {
        Self::new("euclidean", HarmonicFlag::Exact, |_| true)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        3
    }

    pub fn harmonic(&self) -> HarmonicFlag {
        self.harmonic
    }

    pub fn with_harmonic(mut self, harmonic: HarmonicFlag) -> Self {
        self.harmonic = harmonic;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Intersect the domain with an additional predicate.
    pub fn restricted(self, extra: impl Fn(&Point) -> bool + Send + Sync + 'static) -> Self {
        let base = self.domain;
        Self {
            name: self.name,
            harmonic: self.harmonic,
            domain: Arc::new(move |p| base(p) && extra(p)),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.iter().all(|x| x.is_finite()) && (self.domain)(p)
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(GeoError::OutOfDomain(*p))
        }
    }
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("name", &self.name)
            .field("harmonic", &self.harmonic)
            .finish_non_exhaustive()
    }
}

/// A scalar field written generically over the number type.
pub trait ScalarExpr: Send + Sync {
    fn eval<T: Real>(&self, x: &[T; 3]) -> T;
}

/// A symmetric 2-tensor field written generically over the number type.
pub trait MetricExpr: Send + Sync {
    fn eval<T: Real>(&self, x: &[T; 3]) -> [[T; 3]; 3];
}

/// Object-safe scalar field evaluation.
pub trait ScalarField: Send + Sync {
    fn value(&self, p: &Point) -> f64;
    fn jet(&self, p: &Point) -> Jet<3>;
}

/// Object-safe metric field evaluation.
pub trait MetricField: Send + Sync {
    fn components(&self, p: &Point) -> Mat3;
    fn jet(&self, p: &Point) -> MetricJet;
}

impl<E: ScalarExpr> ScalarField for E {
    fn value(&self, p: &Point) -> f64 {
        self.eval(p)
    }

    fn jet(&self, p: &Point) -> Jet<3> {
        self.eval(&Jet::seed(p))
    }
}

impl<E: MetricExpr> MetricField for E {
    fn components(&self, p: &Point) -> Mat3 {
        self.eval(p)
    }

    fn jet(&self, p: &Point) -> MetricJet {
        self.eval(&Jet::seed(p))
    }
}

/// Metric components with first partials; `partials[k][i][j] = d_k g_ij`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet1Metric {
    pub components: Mat3,
    pub partials: [[[f64; 3]; 3]; 3],
}

impl Jet1Metric {
    pub fn from_jet(jet: &MetricJet) -> Self {
        let components = std::array::from_fn(|i| std::array::from_fn(|j| jet[i][j].value));
        let partials = std::array::from_fn(|k| {
            std::array::from_fn(|i| std::array::from_fn(|j| jet[i][j].gradient[k]))
        });
        Self {
            components,
            partials,
        }
    }
}

/// A scalar field bound to a chart.
#[derive(Clone)]
pub struct ChartedScalar {
    pub chart: Chart,
    pub field: Arc<dyn ScalarField>,
}

impl ChartedScalar {
    pub fn new(chart: Chart, field: Arc<dyn ScalarField>) -> Self {
        Self { chart, field }
    }

    pub fn value(&self, p: &Point) -> Result<f64> {
        self.chart.check(p)?;
        let v = self.field.value(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GeoError::NonFinite(*p))
        }
    }

    /// Value, gradient and Hessian at `p` by forward-mode differentiation.
    pub fn eval_scalar_jet(&self, p: &Point) -> Result<Jet2Scalar> {
        self.chart.check(p)?;
        let jet = self.field.jet(p);
        if jet.is_finite() {
            Ok(jet)
        } else {
            Err(GeoError::NonFinite(*p))
        }
    }
}

impl fmt::Debug for ChartedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartedScalar")
            .field("chart", &self.chart)
            .finish_non_exhaustive()
    }
}

/// A metric field bound to a chart.
#[derive(Clone)]
pub struct ChartedMetric {
    pub chart: Chart,
    pub field: Arc<dyn MetricField>,
}

impl ChartedMetric {
    pub fn new(chart: Chart, field: Arc<dyn MetricField>) -> Self {
        Self { chart, field }
    }

    pub fn components(&self, p: &Point) -> Result<Mat3> {
        self.chart.check(p)?;
        let g = self.field.components(p);
        if g.iter().flatten().all(|v| v.is_finite()) {
            Ok(g)
        } else {
            Err(GeoError::NonFinite(*p))
        }
    }

    /// Components with first and second partials.
    pub fn jet(&self, p: &Point) -> Result<MetricJet> {
        self.chart.check(p)?;
        let jet = self.field.jet(p);
        if jet.iter().flatten().all(|j| j.is_finite()) {
            Ok(jet)
        } else {
            Err(GeoError::NonFinite(*p))
        }
    }

    pub fn jet1(&self, p: &Point) -> Result<Jet1Metric> {
        Ok(Jet1Metric::from_jet(&self.jet(p)?))
    }
}

impl fmt::Debug for ChartedMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartedMetric")
            .field("chart", &self.chart)
            .finish_non_exhaustive()
    }
}

/// Central-difference jet with step `h`; used to cross-check the exact jets.
///
/// The gradient uses the two-point stencil, the Hessian the standard
/// three-point (diagonal) and four-point (mixed) stencils. Every stencil point
/// must lie in the chart domain.
pub fn finite_difference_jet(field: &ChartedScalar, p: &Point, h: f64) -> Result<Jet2Scalar> {
    let at = |offset: [f64; 3]| -> Result<f64> {
        let q = [p[0] + offset[0], p[1] + offset[1], p[2] + offset[2]];
        field.value(&q)
    };
    let e = |i: usize, s: f64| -> [f64; 3] {
        let mut v = [0.0; 3];
        v[i] = s;
        v
    };
    let add = |a: [f64; 3], b: [f64; 3]| [a[0] + b[0], a[1] + b[1], a[2] + b[2]];

    let f0 = at([0.0; 3])?;
    let mut jet = Jet::<3>::constant(f0);
    for i in 0..3 {
        let fp = at(e(i, h))?;
        let fm = at(e(i, -h))?;
        jet.gradient[i] = (fp - fm) / (2.0 * h);
        jet.hessian[i][i] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for i in 0..3 {
        for j in (i + 1)..3 {
            let fpp = at(add(e(i, h), e(j, h)))?;
            let fpm = at(add(e(i, h), e(j, -h)))?;
            let fmp = at(add(e(i, -h), e(j, h)))?;
            let fmm = at(add(e(i, -h), e(j, -h)))?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            jet.hessian[i][j] = v;
            jet.hessian[j][i] = v;
        }
    }
    Ok(jet)
}

/// Simple fields used as building blocks and test fixtures.
pub mod fields {
    use super::*;

    /// A constant scalar.
    #[derive(Clone, Copy, Debug)]
    pub struct Constant(pub f64);

    impl ScalarExpr for Constant {
        fn eval<T: Real>(&self, _x: &[T; 3]) -> T {
            T::cst(self.0)
        }
    }

    /// The `i`-th chart coordinate.
    #[derive(Clone, Copy, Debug)]
    pub struct Coordinate(pub usize);

    impl ScalarExpr for Coordinate {
        fn eval<T: Real>(&self, x: &[T; 3]) -> T {
            x[self.0]
        }
    }

    /// `x^i x^j`.
    #[derive(Clone, Copy, Debug)]
    pub struct CoordinateProduct(pub usize, pub usize);

    impl ScalarExpr for CoordinateProduct {
        fn eval<T: Real>(&self, x: &[T; 3]) -> T {
            x[self.0] * x[self.1]
        }
    }

    /// `scale / |x - center|`.
    #[derive(Clone, Copy, Debug)]
    pub struct InverseDistance {
        pub center: Point,
        pub scale: f64,
    }

    impl ScalarExpr for InverseDistance {
        fn eval<T: Real>(&self, x: &[T; 3]) -> T {
            distance(x, &self.center).recip() * self.scale
        }
    }

    /// `|x - center|^2`.
    #[derive(Clone, Copy, Debug)]
    pub struct SquaredDistance {
        pub center: Point,
    }

    impl ScalarExpr for SquaredDistance {
        fn eval<T: Real>(&self, x: &[T; 3]) -> T {
            squared_distance(x, &self.center)
        }
    }

    /// The Euclidean metric scaled by a positive constant.
    #[derive(Clone, Copy, Debug)]
    pub struct FlatMetric {
        pub scale: f64,
    }

    impl Default for FlatMetric {
        fn default() -> Self {
            Self { scale: 1.0 }
        }
    }

    impl MetricExpr for FlatMetric {
        fn eval<T: Real>(&self, _x: &[T; 3]) -> [[T; 3]; 3] {
            diagonal(T::cst(self.scale))
        }
    }

    /// `|x - c|^2` for generic scalars.
    pub fn squared_distance<T: Real>(x: &[T; 3], c: &Point) -> T {
        let d0 = x[0] - c[0];
        let d1 = x[1] - c[1];
        let d2 = x[2] - c[2];
        d0 * d0 + d1 * d1 + d2 * d2
    }

    pub fn distance<T: Real>(x: &[T; 3], c: &Point) -> T {
        squared_distance(x, c).sqrt()
    }

    pub fn diagonal<T: Real>(d: T) -> [[T; 3]; 3] {
        let z = T::zero();
        [[d, z, z], [z, d, z], [z, z, d]]
    }
}
