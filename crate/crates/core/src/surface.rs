//! Closed surfaces parametrized by polar angle `theta` and azimuth `phi`.
//!
//! Parametrizations are oriented so that `X_theta x X_phi` points outward.
//! Surfaces that arise as a level set `n = n0` of a smooth function also carry
//! that defining function; the constrained dynamics needs it.

use std::fmt;
use std::sync::Arc;

use crate::autodiff::{Jet, Real};
use crate::charts::fields::distance;
use crate::charts::{Point, ScalarExpr, ScalarField};
use crate::error::{GeoError, Result};

/// An embedding of the parameter rectangle, written generically.
pub trait SurfaceExpr: Send + Sync {
    fn eval<T: Real>(&self, theta: T, phi: T) -> [T; 3];
}

/// Object-safe embedding evaluation. Fallible because some surfaces (level
/// sets) are located numerically.
pub trait SurfaceMap: Send + Sync {
    fn point(&self, theta: f64, phi: f64) -> Result<Point>;
    /// Second-order jets of the three embedding components in `(theta, phi)`.
    fn jet(&self, theta: f64, phi: f64) -> Result<[Jet<2>; 3]>;
}

impl<E: SurfaceExpr> SurfaceMap for E {
    fn point(&self, theta: f64, phi: f64) -> Result<Point> {
        Ok(self.eval(theta, phi))
    }

    fn jet(&self, theta: f64, phi: f64) -> Result<[Jet<2>; 3]> {
        let [t, p] = Jet::seed(&[theta, phi]);
        Ok(self.eval(t, p))
    }
}

/// Unit radial direction for polar angle `theta` and azimuth `phi`.
pub fn direction<T: Real>(theta: T, phi: T) -> [T; 3] {
    let st = theta.sin();
    [st * phi.cos(), st * phi.sin(), theta.cos()]
}

/// Radial profile of a star-shaped surface about its center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialProfile {
    /// Constant radius.
    Round,
    /// `R + amplitude * sin(3 theta) cos(2 phi)`.
    Bumpy { amplitude: f64 },
    /// `R + amplitude * cos(theta)`.
    Dipole { amplitude: f64 },
}

/// `center + r(theta, phi) * direction(theta, phi)`.
#[derive(Clone, Copy, Debug)]
pub struct RadialSurface {
    pub center: Point,
    pub radius: f64,
    pub profile: RadialProfile,
}

impl SurfaceExpr for RadialSurface {
    fn eval<T: Real>(&self, theta: T, phi: T) -> [T; 3] {
        let r = match self.profile {
            RadialProfile::Round => T::cst(self.radius),
            RadialProfile::Bumpy { amplitude } => {
                (theta * 3.0).sin() * (phi * 2.0).cos() * amplitude + self.radius
            }
            RadialProfile::Dipole { amplitude } => theta.cos() * amplitude + self.radius,
        };
        let n = direction(theta, phi);
        std::array::from_fn(|i| n[i] * r + self.center[i])
    }
}

/// Axis-aligned ellipsoid with semi-axes `axes`.
#[derive(Clone, Copy, Debug)]
pub struct EllipsoidSurface {
    pub center: Point,
    pub axes: [f64; 3],
}

impl SurfaceExpr for EllipsoidSurface {
    fn eval<T: Real>(&self, theta: T, phi: T) -> [T; 3] {
        let n = direction(theta, phi);
        std::array::from_fn(|i| n[i] * self.axes[i] + self.center[i])
    }
}

/// Defining function of a sphere: `|x - c|`.
#[derive(Clone, Copy, Debug)]
pub struct SphereLevel {
    pub center: Point,
}

impl ScalarExpr for SphereLevel {
    fn eval<T: Real>(&self, x: &[T; 3]) -> T {
        distance(x, &self.center)
    }
}

/// Defining function of an ellipsoid: `sqrt(sum ((x_i - c_i) / a_i)^2)`.
#[derive(Clone, Copy, Debug)]
pub struct EllipsoidLevel {
    pub center: Point,
    pub axes: [f64; 3],
}

impl ScalarExpr for EllipsoidLevel {
    fn eval<T: Real>(&self, x: &[T; 3]) -> T {
        let mut s = T::zero();
        for i in 0..3 {
            let d = (x[i] - self.center[i]) / self.axes[i];
            s += d * d;
        }
        s.sqrt()
    }
}

/// Defining function of the dipole-perturbed sphere:
/// `|y| - amplitude * y_z / |y|` with `y = x - c`.
#[derive(Clone, Copy, Debug)]
pub struct DipoleLevel {
    pub center: Point,
    pub amplitude: f64,
}

impl ScalarExpr for DipoleLevel {
    fn eval<T: Real>(&self, x: &[T; 3]) -> T {
        let r = distance(x, &self.center);
        r - (x[2] - self.center[2]) / r * self.amplitude
    }
}

/// Uniform scaling of another surface about a fixed point.
struct ScaledMap {
    inner: Arc<dyn SurfaceMap>,
    center: Point,
    factor: f64,
}

impl SurfaceMap for ScaledMap {
    fn point(&self, theta: f64, phi: f64) -> Result<Point> {
        let p = self.inner.point(theta, phi)?;
        Ok(std::array::from_fn(|i| {
            self.center[i] + self.factor * (p[i] - self.center[i])
        }))
    }

    fn jet(&self, theta: f64, phi: f64) -> Result<[Jet<2>; 3]> {
        let j = self.inner.jet(theta, phi)?;
        Ok(std::array::from_fn(|i| {
            (j[i] - self.center[i]) * self.factor + self.center[i]
        }))
    }
}

/// A level-function description `n(x) = level` of a surface.
#[derive(Clone)]
pub struct LevelFunction {
    pub field: Arc<dyn ScalarField>,
    pub level: f64,
}

/// A parametrized topological sphere.
#[derive(Clone)]
pub struct ClosedSurface {
    pub label: String,
    pub map: Arc<dyn SurfaceMap>,
    /// Reference point the surface is star-shaped about; used for scaling.
    pub center: Point,
    pub level_function: Option<LevelFunction>,
}

impl fmt::Debug for ClosedSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosedSurface")
            .field("label", &self.label)
            .field("center", &self.center)
            .field("has_level_function", &self.level_function.is_some())
            .finish()
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(GeoError::InvalidSpec(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl ClosedSurface {
    pub fn new(label: impl Into<String>, map: Arc<dyn SurfaceMap>, center: Point) -> Self {
        Self {
            label: label.into(),
            map,
            center,
            level_function: None,
        }
    }

    pub fn with_level_function(mut self, field: Arc<dyn ScalarField>, level: f64) -> Self {
        self.level_function = Some(LevelFunction { field, level });
        self
    }

    pub fn sphere(label: impl Into<String>, center: Point, radius: f64) -> Result<Self> {
        positive("sphere radius", radius)?;
        let map = RadialSurface {
            center,
            radius,
            profile: RadialProfile::Round,
        };
        Ok(Self::new(label, Arc::new(map), center)
            .with_level_function(Arc::new(SphereLevel { center }), radius))
    }

    pub fn ellipsoid(label: impl Into<String>, center: Point, axes: [f64; 3]) -> Result<Self> {
        for a in axes {
            positive("ellipsoid semi-axis", a)?;
        }
        let map = EllipsoidSurface { center, axes };
        Ok(Self::new(label, Arc::new(map), center)
            .with_level_function(Arc::new(EllipsoidLevel { center, axes }), 1.0))
    }

    /// `r = radius + amplitude * sin(3 theta) cos(2 phi)`. The profile is not
    /// smooth at the poles as a function on the sphere, so no level function
    /// is attached.
    pub fn bumpy(
        label: impl Into<String>,
        center: Point,
        radius: f64,
        amplitude: f64,
    ) -> Result<Self> {
        positive("bumpy base radius", radius)?;
        if amplitude.abs() >= radius {
            return Err(GeoError::InvalidSpec(
                "bump amplitude must be smaller than the radius".into(),
            ));
        }
        let map = RadialSurface {
            center,
            radius,
            profile: RadialProfile::Bumpy { amplitude },
        };
        Ok(Self::new(label, Arc::new(map), center))
    }

    /// `r = radius + amplitude * cos(theta)`, a smooth non-spherical
    /// perturbation with a smooth defining function.
    pub fn dipole(
        label: impl Into<String>,
        center: Point,
        radius: f64,
        amplitude: f64,
    ) -> Result<Self> {
        positive("dipole base radius", radius)?;
        if amplitude.abs() >= 0.5 * radius {
            return Err(GeoError::InvalidSpec(
                "dipole amplitude must be below half the radius".into(),
            ));
        }
        let map = RadialSurface {
            center,
            radius,
            profile: RadialProfile::Dipole { amplitude },
        };
        Ok(Self::new(label, Arc::new(map), center)
            .with_level_function(Arc::new(DipoleLevel { center, amplitude }), radius))
    }

    /// The surface scaled by `factor` about its center. The level function
    /// is not carried over.
    pub fn scaled(&self, factor: f64) -> Self {
        let map = ScaledMap {
            inner: self.map.clone(),
            center: self.center,
            factor,
        };
        Self {
            label: format!("{}*{}", self.label, factor),
            map: Arc::new(map),
            center: self.center,
            level_function: None,
        }
    }

    pub fn point(&self, theta: f64, phi: f64) -> Result<Point> {
        self.map.point(theta, phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{cross, dot, sub};

    #[test]
    fn sphere_parametrization_is_outward() {
        let s = ClosedSurface::sphere("s", [1.0, 2.0, 3.0], 2.0).unwrap();
        for &(t, p) in &[(0.3, 0.1), (1.5, 4.0), (2.9, 2.0)] {
            let j = s.map.jet(t, p).unwrap();
            let xt = [j[0].gradient[0], j[1].gradient[0], j[2].gradient[0]];
            let xp = [j[0].gradient[1], j[1].gradient[1], j[2].gradient[1]];
            let x = s.point(t, p).unwrap();
            assert!(dot(&cross(&xt, &xp), &sub(&x, &s.center)) > 0.0);
        }
    }

    #[test]
    fn level_functions_vanish_on_their_surfaces() {
        let surfaces = [
            ClosedSurface::sphere("s", [0.5, 0.0, -1.0], 3.0).unwrap(),
            ClosedSurface::ellipsoid("e", [0.0, 1.0, 0.0], [6.0, 5.0, 4.0]).unwrap(),
            ClosedSurface::dipole("d", [0.0, 0.0, 1.0], 5.0, 0.3).unwrap(),
        ];
        for s in &surfaces {
            let lf = s.level_function.as_ref().unwrap();
            for &(t, p) in &[(0.2, 0.0), (1.0, 1.0), (2.5, 5.5)] {
                let x = s.point(t, p).unwrap();
                assert!((lf.field.value(&x) - lf.level).abs() < 1e-13, "{}", s.label);
            }
        }
    }

    #[test]
    fn scaling_about_center() {
        let s = ClosedSurface::sphere("s", [1.0, 1.0, 1.0], 2.0)
            .unwrap()
            .scaled(2.0);
        let x = s.point(std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        assert!((x[0] - 5.0).abs() < 1e-14);
        assert!(s.level_function.is_none());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(ClosedSurface::sphere("s", [0.0; 3], -1.0).is_err());
        assert!(ClosedSurface::bumpy("b", [0.0; 3], 1.0, 2.0).is_err());
        assert!(ClosedSurface::ellipsoid("e", [0.0; 3], [1.0, 0.0, 1.0]).is_err());
    }
}
