//! Test particles confined to a closed surface in a static space-time, and
//! the equipotential characterization of lapse level sets.
//!
//! A particle on `Σ = {n = n₀}` follows the space-time geodesic equations of
//! `−N²c²dt² + g` plus a normal constraint force `λ ∇n`. Its spatial path is a
//! geodesic of the induced 2-metric exactly when `Σ` is a level set of `N`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::{compose, Dual, Jet, Real};
use crate::charts::{ChartedMetric, ChartedScalar, Point, ScalarField};
use crate::error::{GeoError, Result};
use crate::geometry::christoffel_from;
use crate::ode::{integrate, OdeOptions};
use crate::parallel::try_map;
use crate::quadrature::SphereRule;
use crate::statics::StaticSystem;
use crate::surface::{direction, ClosedSurface, SurfaceMap};
use crate::tensor::{checked_inverse, dot, mat_vec, Mat3};

/// Parameters of the radial root search used for level sets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetOptions {
    /// Search interval along each ray.
    pub r_min: f64,
    pub r_max: f64,
    /// Samples per ray for the star-shapedness scan.
    pub scan_samples: usize,
    /// Directions checked during extraction.
    pub check_rule: SphereRule,
}

impl Default for LevelSetOptions {
    fn default() -> Self {
        Self {
            r_min: 1e-3,
            r_max: 1e3,
            scan_samples: 400,
            check_rule: SphereRule::new(8, 16),
        }
    }
}

/// `Σ = {N = n₀}` parametrized as a radial graph over `star_center`.
struct LevelSetMap {
    lapse: ChartedScalar,
    level: f64,
    center: Point,
    options: LevelSetOptions,
    typical_radius: f64,
}

impl LevelSetMap {
    fn ray(&self, d: &Point, r: f64) -> Point {
        std::array::from_fn(|i| self.center[i] + r * d[i])
    }

    /// `N − n₀` along the ray, `None` outside the domain.
    fn residual(&self, d: &Point, r: f64) -> Option<f64> {
        self.lapse
            .value(&self.ray(d, r))
            .ok()
            .map(|n| n - self.level)
    }

    /// Scan the whole search interval and count crossings.
    fn scan(&self, d: &Point) -> Result<(f64, f64)> {
        let n = self.options.scan_samples.max(2);
        let ratio = (self.options.r_max / self.options.r_min).powf(1.0 / (n - 1) as f64);
        let mut prev: Option<(f64, f64)> = None;
        let mut bracket = None;
        let mut crossings = 0;
        for k in 0..n {
            let r = self.options.r_min * ratio.powi(k as i32);
            let Some(f) = self.residual(d, r) else {
                prev = None;
                continue;
            };
            if let Some((r0, f0)) = prev {
                if (f0 < 0.0) != (f < 0.0) {
                    crossings += 1;
                    bracket = Some((r0, r));
                }
            }
            prev = Some((r, f));
        }
        match (crossings, bracket) {
            (1, Some(b)) => Ok(b),
            (0, _) => Err(GeoError::LevelNotFound {
                level: self.level,
                direction: *d,
            }),
            _ => Err(GeoError::NotStarShaped {
                level: self.level,
                direction: *d,
            }),
        }
    }

    /// Bracket the crossing nearest the typical radius by expanding outwards.
    fn local_bracket(&self, d: &Point) -> Result<(f64, f64)> {
        let r0 = self.typical_radius;
        let f0 = self.residual(d, r0);
        let mut step = 0.05 * r0;
        for _ in 0..60 {
            for (a, b) in [(r0, r0 + step), (r0 - step, r0)] {
                if a <= self.options.r_min || b >= self.options.r_max {
                    continue;
                }
                let fa = if a == r0 { f0 } else { self.residual(d, a) };
                let fb = if b == r0 { f0 } else { self.residual(d, b) };
                if let (Some(fa), Some(fb)) = (fa, fb) {
                    if (fa < 0.0) != (fb < 0.0) {
                        return Ok((a, b));
                    }
                }
            }
            step *= 1.6;
        }
        self.scan(d)
    }

    fn root(&self, d: &Point) -> Result<f64> {
        let (mut a, mut b) = self.local_bracket(d)?;
        let fa_neg = self
            .residual(d, a)
            .ok_or(GeoError::OutOfDomain(self.ray(d, a)))?
            < 0.0;
        while b - a > 1e-14 * b {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = self
                .residual(d, m)
                .ok_or(GeoError::OutOfDomain(self.ray(d, m)))?;
            if fm == 0.0 {
                return Ok(m);
            }
            if (fm < 0.0) == fa_neg {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }
}

impl SurfaceMap for LevelSetMap {
    fn point(&self, theta: f64, phi: f64) -> Result<Point> {
        let d = direction(theta, phi);
        Ok(self.ray(&d, self.root(&d)?))
    }

    /// Second-order jet of the embedding via the implicit function theorem:
    /// Newton iterations on jets with the exact radial derivative at the root.
    fn jet(&self, theta: f64, phi: f64) -> Result<[Jet<2>; 3]> {
        let d = direction(theta, phi);
        let r_star = self.root(&d)?;
        let x_star = self.ray(&d, r_star);
        let n = self.lapse.eval_scalar_jet(&x_star)?;
        let slope = dot(&n.gradient, &d);
        if slope == 0.0 {
            return Err(GeoError::NotStarShaped {
                level: self.level,
                direction: d,
            });
        }
        let [t, p] = Jet::<2>::seed(&[theta, phi]);
        let dj = direction(t, p);
        let mut r = Jet::<2>::constant(r_star);
        let embed =
            |r: Jet<2>| -> [Jet<2>; 3] { std::array::from_fn(|i| dj[i] * r + self.center[i]) };
        for _ in 0..4 {
            let f = compose(&n, &embed(r)) - self.level;
            r = r - f * (1.0 / slope);
            r.value = r_star;
        }
        Ok(embed(r))
    }
}

/// The level set `N = n₀`, found along rays from `star_center`.
///
/// Star-shapedness is checked on the directions of `options.check_rule`
/// and the two axis directions.
pub fn extract_level_set(
    s: &StaticSystem,
    level: f64,
    star_center: Point,
    options: LevelSetOptions,
) -> Result<ClosedSurface> {
    if !(options.r_min > 0.0 && options.r_max > options.r_min) {
        return Err(GeoError::InvalidSpec(
            "level-set search interval must satisfy 0 < r_min < r_max".into(),
        ));
    }
    let mut map = LevelSetMap {
        lapse: s.n.clone(),
        level,
        center: star_center,
        options,
        typical_radius: 0.0,
    };
    let mut dirs: Vec<Point> = options
        .check_rule
        .nodes()
        .iter()
        .map(|n| direction(n.theta, n.phi))
        .collect();
    dirs.push([0.0, 0.0, 1.0]);
    dirs.push([0.0, 0.0, -1.0]);
    let scans: Vec<Result<(f64, f64)>> = dirs.par_iter().map(|d| map.scan(d)).collect();
    if let Some(Err(e)) = scans
        .iter()
        .find(|r| matches!(r, Err(GeoError::NotStarShaped { .. })))
    {
        return Err(e.clone());
    }
    let radii = scans
        .into_iter()
        .map(|r| r.map(|(a, b)| 0.5 * (a + b)))
        .collect::<Result<Vec<f64>>>()?;
    map.typical_radius = radii.iter().sum::<f64>() / radii.len() as f64;
    let label = format!("level-set(N={level})");
    Ok(ClosedSurface::new(label, Arc::new(map), star_center)
        .with_level_function(s.n.field.clone(), level))
}

/// `(max − min)/mean` of the radius over the nodes of `rule`.
pub fn sphericity_defect(surface: &ClosedSurface, rule: SphereRule) -> Result<f64> {
    let radii = try_map(&rule.nodes(), |n| {
        let x = surface.point(n.theta, n.phi)?;
        Ok(dot(&sub(&x, &surface.center), &sub(&x, &surface.center)).sqrt())
    })?;
    let max = radii.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = radii.iter().sum::<f64>() / radii.len() as f64;
    Ok((max - min) / mean)
}

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Sup over the nodes of the g-norm of the tangential part of `∇N`.
pub fn tangential_lapse_gradient(
    s: &StaticSystem,
    surface: &ClosedSurface,
    rule: SphereRule,
) -> Result<f64> {
    let values = try_map(&rule.nodes(), |node| {
        let x = surface.map.jet(node.theta, node.phi)?;
        let p = [x[0].value, x[1].value, x[2].value];
        let g = s.g.components(&p)?;
        let dn = s.n.eval_scalar_jet(&p)?.gradient;
        let tangents: [Point; 2] =
            std::array::from_fn(|a| std::array::from_fn(|i| x[i].gradient[a]));
        let h: [[f64; 2]; 2] = std::array::from_fn(|a| {
            std::array::from_fn(|b| dot(&tangents[a], &mat_vec(&g, &tangents[b])))
        });
        let w = [dot(&dn, &tangents[0]), dot(&dn, &tangents[1])];
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if !(det > 0.0) {
            return Err(GeoError::DegenerateTangents {
                theta: node.theta,
                phi: node.phi,
            });
        }
        let norm2 =
            (h[1][1] * w[0] * w[0] - 2.0 * h[0][1] * w[0] * w[1] + h[0][0] * w[1] * w[1]) / det;
        Ok(norm2.max(0.0).sqrt())
    })?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Induced metric of `Σ` at `(θ, φ)` with its first parameter derivatives.
fn induced_metric_dual(
    g: &ChartedMetric,
    surface: &ClosedSurface,
    theta: f64,
    phi: f64,
) -> Result<[[Dual<2>; 2]; 2]> {
    let x = surface.map.jet(theta, phi)?;
    let p = [x[0].value, x[1].value, x[2].value];
    let gj = g.jet(&p)?;
    let gx: [[Dual<2>; 3]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let c = compose(&gj[i][j], &x);
            Dual::new(c.value, c.gradient)
        })
    });
    let tangent: [[Dual<2>; 3]; 2] = std::array::from_fn(|a| {
        std::array::from_fn(|i| Dual::new(x[i].gradient[a], x[i].hessian[a]))
    });
    Ok(std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut h = Dual::<2>::zero();
            for i in 0..3 {
                for j in 0..3 {
                    h += gx[i][j] * tangent[a][i] * tangent[b][j];
                }
            }
            h
        })
    }))
}

/// Initial data of a surface geodesic in parameter space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicInit {
    pub theta: f64,
    pub phi: f64,
    pub dtheta: f64,
    pub dphi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPoint {
    pub arclength: f64,
    pub theta: f64,
    pub phi: f64,
    pub dtheta: f64,
    pub dphi: f64,
    pub point: Point,
    /// `h(q', q')`, identically 1 for an exact arclength parametrization.
    pub speed_squared: f64,
}

fn tight() -> OdeOptions {
    OdeOptions {
        rtol: 1e-12,
        atol: 1e-13,
        initial_step: 1e-3,
        ..OdeOptions::default()
    }
}

/// Geodesic of the metric induced by `g` on `Σ`, sampled at the given
/// increasing arclengths (starting from 0).
pub fn integrate_surface_geodesic(
    g: &ChartedMetric,
    surface: &ClosedSurface,
    init: GeodesicInit,
    arclengths: &[f64],
) -> Result<Vec<GeodesicPoint>> {
    let rhs = |_s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let h = induced_metric_dual(g, surface, y[0], y[1])?;
        let hv = [
            [h[0][0].value, h[0][1].value],
            [h[1][0].value, h[1][1].value],
        ];
        let det = hv[0][0] * hv[1][1] - hv[0][1] * hv[1][0];
        if !(det > 0.0) {
            return Err(GeoError::DegenerateTangents {
                theta: y[0],
                phi: y[1],
            });
        }
        let inv = [
            [hv[1][1] / det, -hv[0][1] / det],
            [-hv[1][0] / det, hv[0][0] / det],
        ];
        let dh = |c: usize, a: usize, b: usize| h[a][b].gradient[c];
        let q = [y[2], y[3]];
        dy[0] = q[0];
        dy[1] = q[1];
        for c in 0..2 {
            let mut acc = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    let mut gamma = 0.0;
                    for d in 0..2 {
                        gamma += 0.5 * inv[c][d] * (dh(a, b, d) + dh(b, a, d) - dh(d, a, b));
                    }
                    acc -= gamma * q[a] * q[b];
                }
            }
            dy[2 + c] = acc;
        }
        Ok(())
    };
    let y0 = [init.theta, init.phi, init.dtheta, init.dphi];
    let states = integrate(rhs, 0.0, &y0, arclengths, &tight(), |_, _| Ok(()))?;
    arclengths
        .iter()
        .zip(states)
        .map(|(&s, y)| {
            let h = induced_metric_dual(g, surface, y[0], y[1])?;
            let q = [y[2], y[3]];
            let mut speed = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    speed += h[a][b].value * q[a] * q[b];
                }
            }
            Ok(GeodesicPoint {
                arclength: s,
                theta: y[0],
                phi: y[1],
                dtheta: y[2],
                dphi: y[3],
                point: surface.point(y[0], y[1])?,
                speed_squared: speed,
            })
        })
        .collect()
}

/// Initial data of a constrained particle: a point of `Σ` in surface
/// parameters, a heading measured from the `φ` direction towards decreasing
/// `θ`, and the g-speed `|dx/dτ|_g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeInit {
    pub theta: f64,
    pub phi: f64,
    pub heading: f64,
    pub speed: f64,
}

struct TangentFrame {
    point: Point,
    /// g-unit tangent in chart components.
    velocity_direction: Point,
    /// The same direction in surface parameters.
    parameter_direction: [f64; 2],
}

fn tangent_frame(
    g: &ChartedMetric,
    surface: &ClosedSurface,
    theta: f64,
    phi: f64,
    heading: f64,
) -> Result<TangentFrame> {
    let x = surface.map.jet(theta, phi)?;
    let point = [x[0].value, x[1].value, x[2].value];
    let gm = g.components(&point)?;
    let xt = [x[0].gradient[0], x[1].gradient[0], x[2].gradient[0]];
    let xp = [x[0].gradient[1], x[1].gradient[1], x[2].gradient[1]];
    let ip = |a: &Point, b: &Point| dot(a, &mat_vec(&gm, b));
    let east = xp.map(|v| v / ip(&xp, &xp).sqrt());
    let k = ip(&xt, &east);
    let south = [
        xt[0] - k * east[0],
        xt[1] - k * east[1],
        xt[2] - k * east[2],
    ];
    let ns = ip(&south, &south).sqrt();
    if !(ns > 0.0) {
        return Err(GeoError::DegenerateTangents { theta, phi });
    }
    let north = south.map(|v| -v / ns);
    let (c, s) = (heading.cos(), heading.sin());
    let u: Point = std::array::from_fn(|i| c * east[i] + s * north[i]);
    let h = [[ip(&xt, &xt), ip(&xt, &xp)], [ip(&xp, &xt), ip(&xp, &xp)]];
    let rhs = [ip(&xt, &u), ip(&xp, &u)];
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let q = [
        (h[1][1] * rhs[0] - h[0][1] * rhs[1]) / det,
        (h[0][0] * rhs[1] - h[1][0] * rhs[0]) / det,
    ];
    Ok(TangentFrame {
        point,
        velocity_direction: u,
        parameter_direction: q,
    })
}

/// One recorded state of a constrained particle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub tau: f64,
    pub t: f64,
    pub x: Point,
    pub velocity: Point,
    /// Normal constraint force `λ |dn|_g`.
    pub sigma: f64,
    /// Induced arclength travelled.
    pub arclength: f64,
    /// Killing energy `N² c² dt/dτ`.
    pub energy: f64,
    /// `n(x) − n₀`
    pub constraint: f64,
    /// `g(ν, dx/dτ)` with `ν` the g-unit normal.
    pub tangency: f64,
}

/// Local dynamical data at a spatial point.
struct Dynamics<'a> {
    s: &'a StaticSystem,
    level: &'a dyn ScalarField,
    c2: f64,
}

struct Accelerations {
    tdd: f64,
    free: Point,
    lambda: f64,
    grad_n: Point,
    dn_norm: f64,
    g: Mat3,
    lapse: f64,
}

impl Dynamics<'_> {
    fn accelerations(&self, x: &Point, tdot: f64, v: &Point) -> Result<Accelerations> {
        let gj = self.s.g.jet(x)?;
        let g: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| gj[i][j].value));
        let inv = checked_inverse(&g, x)?;
        let dg: [[[f64; 3]; 3]; 3] = std::array::from_fn(|k| {
            std::array::from_fn(|i| std::array::from_fn(|j| gj[i][j].gradient[k]))
        });
        let gamma = christoffel_from(&inv, &dg);
        let n = self.s.n.eval_scalar_jet(x)?;
        let grad_lapse = mat_vec(&inv, &n.gradient);
        let tdd = -2.0 * tdot * dot(&n.gradient, v) / n.value;
        let free: Point = std::array::from_fn(|k| {
            let mut a = -n.value * self.c2 * tdot * tdot * grad_lapse[k];
            for i in 0..3 {
                for j in 0..3 {
                    a -= gamma[k][i][j] * v[i] * v[j];
                }
            }
            a
        });
        let f = self.level.jet(x);
        let grad_n = mat_vec(&inv, &f.gradient);
        let dn2 = dot(&f.gradient, &grad_n);
        let mut hvv = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                hvv += f.hessian[i][j] * v[i] * v[j];
            }
        }
        let lambda = -(dot(&f.gradient, &free) + hvv) / dn2;
        Ok(Accelerations {
            tdd,
            free,
            lambda,
            grad_n,
            dn_norm: dn2.sqrt(),
            g,
            lapse: n.value,
        })
    }

    fn project(&self, y: &mut [f64], level: f64) -> Result<()> {
        let mut x = [y[2], y[3], y[4]];
        let mut residual = f64::INFINITY;
        for _ in 0..20 {
            let f = self.level.jet(&x);
            residual = f.value - level;
            if residual.abs() <= 1e-11 * level.abs().max(1e-3) {
                break;
            }
            let g = self.s.g.components(&x)?;
            let inv = checked_inverse(&g, &x)?;
            let grad = mat_vec(&inv, &f.gradient);
            let k = residual / dot(&f.gradient, &grad);
            for i in 0..3 {
                x[i] -= k * grad[i];
            }
        }
        if !(residual.abs() <= 1e-11 * level.abs().max(1e-3)) {
            return Err(GeoError::ConstraintBlowup(residual));
        }
        let f = self.level.jet(&x);
        let g = self.s.g.components(&x)?;
        let inv = checked_inverse(&g, &x)?;
        let grad = mat_vec(&inv, &f.gradient);
        let v = [y[5], y[6], y[7]];
        let k = dot(&f.gradient, &v) / dot(&f.gradient, &grad);
        y[2..5].copy_from_slice(&x);
        for i in 0..3 {
            y[5 + i] = v[i] - k * grad[i];
        }
        Ok(())
    }
}

/// Integrate a particle constrained to `Σ` (which must carry a level
/// function) over proper time `[0, tau_span]`, recording `samples + 1`
/// equally spaced states.
pub fn integrate_constrained_particle(
    s: &StaticSystem,
    surface: &ClosedSurface,
    init: ProbeInit,
    tau_span: f64,
    samples: usize,
) -> Result<Vec<ParticleState>> {
    let lf = surface.level_function.clone().ok_or_else(|| {
        GeoError::InvalidSpec(format!(
            "surface `{}` has no defining function",
            surface.label
        ))
    })?;
    let c2 = s.constants.c2();
    let dynamics = Dynamics {
        s,
        level: lf.field.as_ref(),
        c2,
    };
    let frame = tangent_frame(&s.g, surface, init.theta, init.phi, init.heading)?;
    let x0 = frame.point;
    let v0 = frame.velocity_direction.map(|u| u * init.speed);
    let n0 = s.n.value(&x0)?;
    let g0 = s.g.components(&x0)?;
    let v2 = dot(&v0, &mat_vec(&g0, &v0));
    let tdot0 = (c2 + v2).sqrt() / (n0 * s.constants.c);
    if !(tdot0.is_finite() && n0 > 0.0) {
        return Err(GeoError::NotTimelike(0.0));
    }
    let mut y0 = vec![0.0, tdot0, x0[0], x0[1], x0[2], v0[0], v0[1], v0[2], 0.0];
    dynamics.project(&mut y0, lf.level)?;

    let rhs = |_tau: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let x = [y[2], y[3], y[4]];
        let v = [y[5], y[6], y[7]];
        let a = dynamics.accelerations(&x, y[1], &v)?;
        dy[0] = y[1];
        dy[1] = a.tdd;
        dy[2..5].copy_from_slice(&v);
        for k in 0..3 {
            dy[5 + k] = a.free[k] + a.lambda * a.grad_n[k];
        }
        dy[8] = dot(&v, &mat_vec(&a.g, &v)).sqrt();
        Ok(())
    };
    let n = samples.max(1);
    let times: Vec<f64> = (0..=n).map(|k| tau_span * k as f64 / n as f64).collect();
    let states = integrate(rhs, 0.0, &y0, &times, &tight(), |_, y| {
        dynamics.project(y, lf.level)
    })?;
    times
        .iter()
        .zip(states)
        .map(|(&tau, y)| {
            let x = [y[2], y[3], y[4]];
            let v = [y[5], y[6], y[7]];
            let a = dynamics.accelerations(&x, y[1], &v)?;
            let norm_v = dot(&v, &mat_vec(&a.g, &v));
            if a.lapse * a.lapse * c2 * y[1] * y[1] - norm_v <= 0.0 {
                return Err(GeoError::NotTimelike(tau));
            }
            let f = lf.field.jet(&x);
            Ok(ParticleState {
                tau,
                t: y[0],
                x,
                velocity: v,
                sigma: a.lambda * a.dn_norm,
                arclength: y[8],
                energy: a.lapse * a.lapse * c2 * y[1],
                constraint: f.value - lf.level,
                tangency: dot(&f.gradient, &v) / a.dn_norm,
            })
        })
        .collect()
}

/// Free (unconstrained) spatial acceleration at a particle state, for
/// checking the recorded constraint force.
pub fn free_acceleration(
    s: &StaticSystem,
    state: &ParticleState,
    level_field: &dyn ScalarField,
) -> Result<Point> {
    let tdot = state.energy / (s.n.value(&state.x)?.powi(2) * s.constants.c2());
    let d = Dynamics {
        s,
        level: level_field,
        c2: s.constants.c2(),
    };
    Ok(d.accelerations(&state.x, tdot, &state.velocity)?.free)
}

/// Result of comparing constrained particles with surface geodesics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquipotentialReport {
    pub surface: String,
    /// Max over probes of the sup distance between matched points.
    pub deviation: f64,
    pub per_probe: Vec<f64>,
    /// Sup over `Σ` of the tangential lapse gradient.
    pub tangential_gradient: f64,
    /// Max relative drift of the Killing energy.
    pub energy_drift: f64,
    /// Max `|g(ν, dx/dτ)|` along all trajectories.
    pub tangency_drift: f64,
}

/// Chordal g-distance between two nearby points, metric at the midpoint.
fn chordal_distance(g: &ChartedMetric, a: &Point, b: &Point) -> Result<f64> {
    let mid = std::array::from_fn(|i| 0.5 * (a[i] + b[i]));
    let gm = g.components(&mid).or_else(|_| g.components(a))?;
    let d = sub(a, b);
    Ok(dot(&d, &mat_vec(&gm, &d)).max(0.0).sqrt())
}

/// Deviation of one probe from its matched surface geodesic over the
/// induced arclength `length`, with its trajectory.
pub fn probe_deviation(
    s: &StaticSystem,
    surface: &ClosedSurface,
    probe: ProbeInit,
    length: f64,
    samples: usize,
) -> Result<(f64, Vec<ParticleState>)> {
    let trajectory =
        integrate_constrained_particle(s, surface, probe, length / probe.speed, samples)?;
    let frame = tangent_frame(&s.g, surface, probe.theta, probe.phi, probe.heading)?;
    let init = GeodesicInit {
        theta: probe.theta,
        phi: probe.phi,
        dtheta: frame.parameter_direction[0],
        dphi: frame.parameter_direction[1],
    };
    let lengths: Vec<f64> = trajectory.iter().map(|p| p.arclength).collect();
    let geodesic = integrate_surface_geodesic(&s.g, surface, init, &lengths)?;
    let mut dev: f64 = 0.0;
    for (p, q) in trajectory.iter().zip(&geodesic) {
        dev = dev.max(chordal_distance(&s.g, &p.x, &q.point)?);
    }
    Ok((dev, trajectory))
}

/// Compare each probe's constrained trajectory with the matched geodesic of
/// the induced metric over arclength `length`.
pub fn equipotential_deviation(
    s: &StaticSystem,
    surface: &ClosedSurface,
    probes: &[ProbeInit],
    length: f64,
    rule: SphereRule,
) -> Result<EquipotentialReport> {
    Ok(equipotential_analysis(s, surface, probes, length, 200, rule)?.0)
}

/// [`equipotential_deviation`] together with the recorded trajectories,
/// `samples + 1` states per probe.
pub fn equipotential_analysis(
    s: &StaticSystem,
    surface: &ClosedSurface,
    probes: &[ProbeInit],
    length: f64,
    samples: usize,
    rule: SphereRule,
) -> Result<(EquipotentialReport, Vec<Vec<ParticleState>>)> {
    let results = try_map(probes, |p| probe_deviation(s, surface, *p, length, samples))?;
    let mut energy_drift: f64 = 0.0;
    let mut tangency_drift: f64 = 0.0;
    for (_, traj) in &results {
        let e0 = traj[0].energy;
        for st in traj {
            energy_drift = energy_drift.max(((st.energy - e0) / e0).abs());
            tangency_drift = tangency_drift.max(st.tangency.abs());
        }
    }
    let per_probe: Vec<f64> = results.iter().map(|(d, _)| *d).collect();
    let report = EquipotentialReport {
        surface: surface.label.clone(),
        deviation: per_probe.iter().copied().fold(0.0, f64::max),
        per_probe,
        tangential_gradient: tangential_lapse_gradient(s, surface, rule)?,
        energy_drift,
        tangency_drift,
    };
    Ok((report, results.into_iter().map(|(_, t)| t).collect()))
}

/// A spread of probes away from the parametrization poles.
pub fn default_probes(speed: f64) -> Vec<ProbeInit> {
    vec![
        ProbeInit {
            theta: 1.3,
            phi: 0.4,
            heading: 0.5,
            speed,
        },
        ProbeInit {
            theta: 1.9,
            phi: 2.5,
            heading: -0.3,
            speed,
        },
        ProbeInit {
            theta: 1.1,
            phi: 4.4,
            heading: 0.2,
            speed,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solutions::{schwarzschild, SchwarzschildChart, SchwarzschildSpec};
    use crate::statics::{flat_vacuum, PhysicalConstants};
    use std::f64::consts::PI;

    fn isotropic() -> StaticSystem {
        let spec = SchwarzschildSpec::centered(1.0, SchwarzschildChart::Isotropic);
        schwarzschild(&spec, &PhysicalConstants::geometric()).unwrap()
    }

    fn opts() -> LevelSetOptions {
        LevelSetOptions {
            r_min: 0.6,
            r_max: 200.0,
            ..LevelSetOptions::default()
        }
    }

    #[test]
    fn schwarzschild_level_set_is_a_coordinate_sphere() {
        let s = isotropic();
        let sigma = extract_level_set(&s, 9.0 / 11.0, [0.0; 3], opts()).unwrap();
        for &(t, p) in &[(0.4, 0.2), (1.7, 3.0), (2.8, 5.9)] {
            let x = sigma.point(t, p).unwrap();
            assert!((dot(&x, &x).sqrt() - 5.0).abs() < 1e-12);
            let j = sigma.map.jet(t, p).unwrap();
            let exact = direction(Jet::<2>::seed(&[t, p])[0], Jet::<2>::seed(&[t, p])[1]);
            for i in 0..3 {
                assert!((j[i].gradient[0] - 5.0 * exact[i].gradient[0]).abs() < 1e-10);
                assert!((j[i].hessian[1][1] - 5.0 * exact[i].hessian[1][1]).abs() < 1e-10);
            }
        }
        assert!(sphericity_defect(&sigma, SphereRule::new(6, 12)).unwrap() < 1e-12);
        assert!(tangential_lapse_gradient(&s, &sigma, SphereRule::new(6, 12)).unwrap() < 1e-12);
    }

    #[test]
    fn unattained_level_is_reported() {
        let err = extract_level_set(&isotropic(), 1.5, [0.0; 3], opts()).unwrap_err();
        assert!(matches!(err, GeoError::LevelNotFound { .. }));
    }

    #[test]
    fn great_circle_closes_after_its_circumference() {
        let flat = flat_vacuum(PhysicalConstants::geometric());
        let sphere = ClosedSurface::sphere("s", [0.0; 3], 3.0).unwrap();
        let init = GeodesicInit {
            theta: PI / 2.0,
            phi: 0.0,
            dtheta: 0.0,
            dphi: 1.0 / 3.0,
        };
        let out =
            integrate_surface_geodesic(&flat.g, &sphere, init, &[0.0, 3.0 * PI, 6.0 * PI]).unwrap();
        assert!((out[1].point[0] + 3.0).abs() < 1e-9);
        assert!((out[2].point[0] - 3.0).abs() < 1e-9 && out[2].point[1].abs() < 1e-9);
        assert!(out.iter().all(|p| (p.speed_squared - 1.0).abs() < 1e-10));
    }

    #[test]
    fn particles_on_an_equipotential_follow_geodesics() {
        let s = isotropic();
        let sigma = extract_level_set(&s, 9.0 / 11.0, [0.0; 3], opts()).unwrap();
        let probe = ProbeInit {
            theta: 1.2,
            phi: 0.3,
            heading: 0.4,
            speed: 0.3,
        };
        let (dev, traj) = probe_deviation(&s, &sigma, probe, 8.0, 40).unwrap();
        assert!(dev < 1e-7, "deviation {dev}");
        let e0 = traj[0].energy;
        for st in &traj {
            assert!(((st.energy - e0) / e0).abs() < 1e-8);
            assert!(st.constraint.abs() < 1e-10);
            assert!(st.tangency.abs() < 1e-10);
        }
        assert!((traj.last().unwrap().arclength - 8.0).abs() < 1e-6);
    }

    #[test]
    fn off_center_sphere_is_not_equipotential() {
        let s = isotropic();
        let sphere = ClosedSurface::sphere("off", [1.0, 0.0, 0.0], 5.0).unwrap();
        let probe = ProbeInit {
            theta: 1.2,
            phi: 0.3,
            heading: 0.4,
            speed: 0.3,
        };
        let (dev, _) = probe_deviation(&s, &sphere, probe, 8.0, 40).unwrap();
        assert!(dev > 1e-3, "deviation {dev}");
        assert!(tangential_lapse_gradient(&s, &sphere, SphereRule::new(6, 12)).unwrap() > 1e-3);
    }

    #[test]
    fn constraint_force_balances_free_fall() {
        let s = isotropic();
        let sigma = extract_level_set(&s, 9.0 / 11.0, [0.0; 3], opts()).unwrap();
        let lf = sigma.level_function.clone().unwrap();
        let probe = ProbeInit {
            theta: PI / 2.0,
            phi: 0.0,
            heading: 0.0,
            speed: 0.2,
        };
        let traj = integrate_constrained_particle(&s, &sigma, probe, 1.0, 4).unwrap();
        // a static observer needs no tangential support; the radial support
        // for circular motion is the free-fall acceleration minus the
        // centripetal one along the normal
        let st = traj[2];
        let free = free_acceleration(&s, &st, lf.field.as_ref()).unwrap();
        let g = s.g.components(&st.x).unwrap();
        let inv = checked_inverse(&g, &st.x).unwrap();
        let f = lf.field.jet(&st.x);
        let dn = mat_vec(&inv, &f.gradient);
        let norm = dot(&f.gradient, &dn).sqrt();
        let mut hvv = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                hvv += f.hessian[i][j] * st.velocity[i] * st.velocity[j];
            }
        }
        let expected = -(dot(&f.gradient, &free) + hvv) / norm;
        assert!((st.sigma - expected).abs() < 1e-10 * expected.abs().max(1.0));
        assert!(st.sigma > 0.0);
    }

    #[test]
    fn every_surface_is_equipotential_without_gravity() {
        let flat = flat_vacuum(PhysicalConstants::geometric());
        let dipole = ClosedSurface::dipole("d", [0.0, 0.0, 0.5], 4.0, 0.8).unwrap();
        let report = equipotential_deviation(
            &flat,
            &dipole,
            &default_probes(0.5),
            6.0,
            SphereRule::new(6, 12),
        )
        .unwrap();
        assert!(report.deviation < 1e-8, "{report:?}");
        assert_eq!(report.tangential_gradient, 0.0);
    }

    #[test]
    fn equatorial_orbit_stays_on_the_great_circle() {
        let s = isotropic();
        let sigma = extract_level_set(&s, 9.0 / 11.0, [0.0; 3], opts()).unwrap();
        let probe = ProbeInit {
            theta: PI / 2.0,
            phi: 0.0,
            heading: 0.0,
            speed: 0.4,
        };
        let circumference = 2.0 * PI * 5.0 * 1.1f64.powi(2);
        let traj =
            integrate_constrained_particle(&s, &sigma, probe, circumference / 0.4, 50).unwrap();
        for st in &traj {
            assert!(st.x[2].abs() < 1e-8);
        }
        let end = traj.last().unwrap();
        assert!((end.arclength - circumference).abs() < 1e-8);
        assert!((end.x[0] - 5.0).abs() < 1e-7 && end.x[1].abs() < 1e-7);
    }

    #[test]
    fn ellipsoid_equator_is_a_geodesic() {
        let flat = flat_vacuum(PhysicalConstants::geometric());
        let e = ClosedSurface::ellipsoid("e", [0.0; 3], [3.0, 2.0, 1.5]).unwrap();
        let init = GeodesicInit {
            theta: PI / 2.0,
            phi: 0.0,
            dtheta: 0.0,
            dphi: 0.5,
        };
        let lengths: Vec<f64> = (0..=20).map(|k| k as f64).collect();
        for p in integrate_surface_geodesic(&flat.g, &e, init, &lengths).unwrap() {
            assert!(p.point[2].abs() < 1e-9);
        }
    }

    #[test]
    fn bumpy_geodesic_retraces_when_reversed() {
        let flat = flat_vacuum(PhysicalConstants::geometric());
        let b = ClosedSurface::bumpy("b", [0.0; 3], 5.0, 0.5).unwrap();
        let h = induced_metric_dual(&flat.g, &b, 1.1, 0.7).unwrap();
        let q = [0.3, 0.8];
        let norm = (h[0][0].value * q[0] * q[0]
            + 2.0 * h[0][1].value * q[0] * q[1]
            + h[1][1].value * q[1] * q[1])
            .sqrt();
        let init = GeodesicInit {
            theta: 1.1,
            phi: 0.7,
            dtheta: q[0] / norm,
            dphi: q[1] / norm,
        };
        let forward = integrate_surface_geodesic(&flat.g, &b, init, &[0.0, 6.0]).unwrap();
        let end = forward[1];
        let back = GeodesicInit {
            theta: end.theta,
            phi: end.phi,
            dtheta: -end.dtheta,
            dphi: -end.dphi,
        };
        let returned = integrate_surface_geodesic(&flat.g, &b, back, &[0.0, 6.0]).unwrap();
        let start = b.point(1.1, 0.7).unwrap();
        let d = sub(&returned[1].point, &start);
        assert!(dot(&d, &d).sqrt() < 1e-8);
    }

    #[test]
    fn multiplier_matches_finite_difference_acceleration() {
        let s = isotropic();
        let sigma = ClosedSurface::dipole("d", [0.0; 3], 5.0, 0.4).unwrap();
        let lf = sigma.level_function.clone().unwrap();
        let probe = ProbeInit {
            theta: 1.2,
            phi: 0.5,
            heading: 0.7,
            speed: 0.3,
        };
        let dt = 1e-3;
        let traj = integrate_constrained_particle(&s, &sigma, probe, 2.0, 2000).unwrap();
        for k in [500, 1000, 1500] {
            let st = traj[k];
            let acc: Point = std::array::from_fn(|i| {
                (traj[k + 1].velocity[i] - traj[k - 1].velocity[i]) / (2.0 * dt)
            });
            let free = free_acceleration(&s, &st, lf.field.as_ref()).unwrap();
            let f = lf.field.jet(&st.x);
            let support: Point = std::array::from_fn(|i| acc[i] - free[i]);
            let g = s.g.components(&st.x).unwrap();
            let inv = checked_inverse(&g, &st.x).unwrap();
            let norm = dot(&f.gradient, &mat_vec(&inv, &f.gradient)).sqrt();
            let sigma_fd = dot(&f.gradient, &support) / norm;
            assert!(
                (st.sigma - sigma_fd).abs() < 1e-7,
                "{} vs {}",
                st.sigma,
                sigma_fd
            );
        }
    }

    #[test]
    fn rays_crossing_twice_are_rejected() {
        let err =
            extract_level_set(&isotropic(), 9.0 / 11.0, [20.0, 0.0, 0.0], opts()).unwrap_err();
        assert!(matches!(err, GeoError::NotStarShaped { .. }), "{err:?}");
    }
}
