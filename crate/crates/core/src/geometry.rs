//! Connection, curvature and differential operators of a Riemannian 3-metric,
//! and the induced geometry of embedded surfaces.

use crate::autodiff::{Dual, Jet, Real};
use crate::charts::{ChartedMetric, ChartedScalar, MetricJet, Point};
use crate::error::{GeoError, Result};
use crate::surface::SurfaceMap;
use crate::tensor::{checked_inverse, cross, dot, inverse3, mat_vec, norm, Mat3};

pub type Christoffel<T> = [[[T; 3]; 3]; 3];

/// Christoffel symbols of the second kind; `gamma[k][i][j]` is `Γ^k_ij`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConnectionCoefficients {
    pub gamma: Christoffel<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureData {
    pub ricci: Mat3,
    pub scalar: f64,
}

/// `Γ^k_ij = ½ g^kl (∂_i g_jl + ∂_j g_il − ∂_l g_ij)` with `dg[k][i][j] = ∂_k g_ij`.
///
/// Generic so that it can be pushed through dual numbers to obtain `∂Γ`.
pub fn christoffel_from<T: Real>(inv: &[[T; 3]; 3], dg: &[[[T; 3]; 3]; 3]) -> Christoffel<T> {
    let mut out = [[[T::zero(); 3]; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let first: [T; 3] =
                std::array::from_fn(|l| (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]) * 0.5);
            for k in 0..3 {
                let v = inv[k][0] * first[0] + inv[k][1] * first[1] + inv[k][2] * first[2];
                out[k][i][j] = v;
                out[k][j][i] = v;
            }
        }
    }
    out
}

/// Everything about the metric at one point that the operators below need.
#[derive(Clone, Debug)]
pub struct LocalGeometry {
    pub point: Point,
    pub metric: Mat3,
    pub inverse: Mat3,
    /// `partials[k][i][j] = ∂_k g_ij`
    pub partials: [[[f64; 3]; 3]; 3],
    pub christoffel: Christoffel<f64>,
    jet: MetricJet,
}

impl LocalGeometry {
    pub fn at(g: &ChartedMetric, p: &Point) -> Result<Self> {
        let jet = g.jet(p)?;
        Self::from_jet(jet, p)
    }

    pub fn from_jet(jet: MetricJet, p: &Point) -> Result<Self> {
        let metric: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| jet[i][j].value));
        let inverse = checked_inverse(&metric, p)?;
        let partials = std::array::from_fn(|k| {
            std::array::from_fn(|i| std::array::from_fn(|j| jet[i][j].gradient[k]))
        });
        let christoffel = christoffel_from(&inverse, &partials);
        Ok(Self {
            point: *p,
            metric,
            inverse,
            partials,
            christoffel,
            jet,
        })
    }

    /// Ricci tensor by differentiating the Christoffel map with dual numbers.
    pub fn ricci(&self) -> CurvatureData {
        let g: [[Dual<3>; 3]; 3] = std::array::from_fn(|i| {
            std::array::from_fn(|j| Dual::new(self.jet[i][j].value, self.jet[i][j].gradient))
        });
        let dg: [[[Dual<3>; 3]; 3]; 3] = std::array::from_fn(|k| {
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    Dual::new(self.jet[i][j].gradient[k], self.jet[i][j].hessian[k])
                })
            })
        });
        let inv = inverse3(&g);
        let gd = christoffel_from(&inv, &dg);
        let gv = &self.christoffel;

        let mut ricci = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut r = 0.0;
                for k in 0..3 {
                    r += gd[k][i][j].gradient[k] - gd[k][i][k].gradient[j];
                    for l in 0..3 {
                        r += gv[k][k][l] * gv[l][i][j] - gv[k][j][l] * gv[l][i][k];
                    }
                }
                ricci[i][j] = r;
            }
        }
        let scalar = self.trace(&ricci);
        CurvatureData { ricci, scalar }
    }

    /// `g^ij T_ij`
    pub fn trace(&self, t: &Mat3) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.inverse[i][j] * t[i][j];
            }
        }
        s
    }

    /// `∇²f = ∂²f − Γ^k ∂_k f`
    pub fn covariant_hessian(&self, f: &Jet<3>) -> Mat3 {
        let mut h = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let mut v = f.hessian[i][j];
                for k in 0..3 {
                    v -= self.christoffel[k][i][j] * f.gradient[k];
                }
                h[i][j] = v;
                h[j][i] = v;
            }
        }
        h
    }

    pub fn laplacian(&self, f: &Jet<3>) -> f64 {
        self.trace(&self.covariant_hessian(f))
    }

    /// Laplacians of the three coordinate functions: `Δx^k = −g^ij Γ^k_ij`.
    pub fn coordinate_laplacians(&self) -> [f64; 3] {
        std::array::from_fn(|k| -self.trace(&self.christoffel[k]))
    }

    pub fn raise(&self, covector: &Point) -> Point {
        mat_vec(&self.inverse, covector)
    }

    pub fn connection(&self) -> ConnectionCoefficients {
        ConnectionCoefficients {
            gamma: self.christoffel,
        }
    }
}

pub fn christoffel(g: &ChartedMetric, p: &Point) -> Result<ConnectionCoefficients> {
    Ok(LocalGeometry::at(g, p)?.connection())
}

pub fn ricci(g: &ChartedMetric, p: &Point) -> Result<CurvatureData> {
    Ok(LocalGeometry::at(g, p)?.ricci())
}

pub fn hessian(g: &ChartedMetric, f: &ChartedScalar, p: &Point) -> Result<Mat3> {
    let local = LocalGeometry::at(g, p)?;
    Ok(local.covariant_hessian(&f.eval_scalar_jet(p)?))
}

pub fn laplacian(g: &ChartedMetric, f: &ChartedScalar, p: &Point) -> Result<f64> {
    let local = LocalGeometry::at(g, p)?;
    Ok(local.laplacian(&f.eval_scalar_jet(p)?))
}

/// Induced data of a parametrized surface at one parameter point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceGeometry {
    pub theta: f64,
    pub phi: f64,
    pub point: Point,
    /// `∂X/∂theta`, `∂X/∂phi`
    pub tangents: [Point; 2],
    pub induced_metric: [[f64; 2]; 2],
    /// Outward unit normal, contravariant components.
    pub unit_normal: Point,
    /// The same normal with its index lowered.
    pub unit_conormal: Point,
    /// `sqrt(det h)`; includes the `sin(theta)` of the round parametrization.
    pub area_element: f64,
}

/// Induced geometry from a precomputed embedding jet and ambient metric.
pub fn surface_geometry_from(
    x: &[Jet<2>; 3],
    metric: &Mat3,
    inverse: &Mat3,
    theta: f64,
    phi: f64,
) -> Result<SurfaceGeometry> {
    let point = [x[0].value, x[1].value, x[2].value];
    let xt = [x[0].gradient[0], x[1].gradient[0], x[2].gradient[0]];
    let xp = [x[0].gradient[1], x[1].gradient[1], x[2].gradient[1]];
    let n = cross(&xt, &xp);
    if !(norm(&n) > 1e-14 * norm(&xt) * norm(&xp)) {
        return Err(GeoError::DegenerateTangents { theta, phi });
    }
    let raised = mat_vec(inverse, &n);
    let len = dot(&raised, &n).sqrt();
    let unit_normal = raised.map(|v| v / len);
    let unit_conormal = n.map(|v| v / len);

    let gt = mat_vec(metric, &xt);
    let gp = mat_vec(metric, &xp);
    let h_tt = dot(&xt, &gt);
    let h_tp = dot(&xp, &gt);
    let h_pp = dot(&xp, &gp);
    let det = h_tt * h_pp - h_tp * h_tp;
    if !(det > 0.0) {
        return Err(GeoError::DegenerateTangents { theta, phi });
    }
    Ok(SurfaceGeometry {
        theta,
        phi,
        point,
        tangents: [xt, xp],
        induced_metric: [[h_tt, h_tp], [h_tp, h_pp]],
        unit_normal,
        unit_conormal,
        area_element: det.sqrt(),
    })
}

pub fn surface_geometry(
    g: &ChartedMetric,
    embedding: &dyn SurfaceMap,
    theta: f64,
    phi: f64,
) -> Result<SurfaceGeometry> {
    let x = embedding.jet(theta, phi)?;
    let p = [x[0].value, x[1].value, x[2].value];
    let metric = g.components(&p)?;
    let inverse = checked_inverse(&metric, &p)?;
    surface_geometry_from(&x, &metric, &inverse, theta, phi)
}
