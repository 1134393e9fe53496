//! Axisymmetric static vacua of Weyl class sourced by rods on the z-axis.
//!
//! With `ρ² = x² + y²` the conformal data are
//!
//! ```text
//! U/c² = ψ = Σ ½ ln((R₊ + R₋ − 2M)/(R₊ + R₋ + 2M)),   R± = sqrt(ρ² + (z − z_c ∓ M)²)
//! γ    = e^{2β}(dρ² + dz²) + ρ² dφ²
//! ```
//!
//! where `β` solves `β_ρ = ρ(ψ_ρ² − ψ_z²)`, `β_z = 2ρ ψ_ρ ψ_z` with `β = 0` on
//! the axis outside the rods. The value of `β` is obtained by line integration;
//! its derivatives come from the first-order system itself.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::autodiff::{Dual, Jet, Real};
use crate::charts::{
    Chart, ChartedMetric, ChartedScalar, HarmonicFlag, MetricField, MetricJet, Point, ScalarField,
};
use crate::error::{GeoError, Result};
use crate::ode::{quad, OdeOptions};
use crate::sampling::Shell;
use crate::statics::{PhysicalConstants, PseudoNewtonianSystem, LAPSE_MARGIN};
use crate::tensor::Mat3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rod {
    pub center_z: f64,
    pub half_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylSpec {
    pub rods: Vec<Rod>,
    /// Radius of the excluded tube around the axis segment spanned by the
    /// rods; defaults to 1e-2 of the smallest gap between rods (or of the
    /// half-length for a single rod).
    #[serde(default)]
    pub tube_radius: Option<f64>,
}

impl WeylSpec {
    pub fn new(rods: Vec<Rod>) -> Self {
        Self {
            rods,
            tube_radius: None,
        }
    }

    /// Rods sorted by center, checked for positivity and disjointness.
    fn sorted_rods(&self) -> Result<Vec<Rod>> {
        if self.rods.is_empty() {
            return Err(GeoError::InvalidSpec(
                "a Weyl system needs at least one rod".into(),
            ));
        }
        for r in &self.rods {
            if !(r.half_length.is_finite() && r.half_length > 0.0 && r.center_z.is_finite()) {
                return Err(GeoError::InvalidSpec(format!("invalid rod {r:?}")));
            }
        }
        let mut rods = self.rods.clone();
        rods.sort_by(|a, b| a.center_z.total_cmp(&b.center_z));
        for w in rods.windows(2) {
            if w[0].center_z + w[0].half_length >= w[1].center_z - w[1].half_length {
                return Err(GeoError::InvalidSpec(format!(
                    "rods {:?} and {:?} overlap",
                    w[0], w[1]
                )));
            }
        }
        if let Some(t) = self.tube_radius {
            if !(t.is_finite() && t > 0.0) {
                return Err(GeoError::InvalidSpec(format!(
                    "tube radius must be positive, got {t}"
                )));
            }
        }
        Ok(rods)
    }

    /// The tube radius in effect.
    pub fn tube(&self) -> Result<f64> {
        let rods = self.sorted_rods()?;
        Ok(self.tube_radius.unwrap_or_else(|| {
            let gap = rods
                .windows(2)
                .map(|w| (w[1].center_z - w[1].half_length) - (w[0].center_z + w[0].half_length))
                .fold(f64::INFINITY, f64::min);
            if gap.is_finite() {
                1e-2 * gap
            } else {
                1e-2 * rods[0].half_length
            }
        }))
    }
}

/// Reference axis point from which `β` is integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BetaReference {
    /// Above the rods for points above or nearer the top, below otherwise.
    Nearest,
    Top,
    Bottom,
}

/// `ψ` as a function of `(ρ², z)`.
fn psi<T: Real>(rods: &[Rod], rho2: T, z: T) -> T {
    let mut out = T::zero();
    for rod in rods {
        let m = rod.half_length;
        let zp = z - (rod.center_z + m);
        let zm = z - (rod.center_z - m);
        let s = (rho2 + zp * zp).sqrt() + (rho2 + zm * zm).sqrt();
        out += ((s - 2.0 * m).ln() - (s + 2.0 * m).ln()) * 0.5;
    }
    out
}

/// Shared state of one Weyl configuration.
pub struct WeylGeometry {
    rods: Vec<Rod>,
    tube: f64,
    z_top: f64,
    z_bottom: f64,
    pad: f64,
    options: OdeOptions,
    cache: RwLock<HashMap<[u64; 2], f64>>,
}

impl std::fmt::Debug for WeylGeometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeylGeometry")
            .field("rods", &self.rods)
            .field("tube", &self.tube)
            .finish_non_exhaustive()
    }
}

impl WeylGeometry {
    pub fn new(spec: &WeylSpec) -> Result<Self> {
        let rods = spec.sorted_rods()?;
        let tube = spec.tube()?;
        let z_top = rods
            .iter()
            .map(|r| r.center_z + r.half_length)
            .fold(f64::NEG_INFINITY, f64::max);
        let z_bottom = rods
            .iter()
            .map(|r| r.center_z - r.half_length)
            .fold(f64::INFINITY, f64::min);
        let pad = 0.5
            * rods
                .iter()
                .map(|r| r.half_length)
                .fold(f64::INFINITY, f64::min);
        let options = OdeOptions {
            rtol: 1e-12,
            atol: 1e-15,
            initial_step: 1e-2,
            ..OdeOptions::default()
        };
        Ok(Self {
            rods,
            tube,
            z_top,
            z_bottom,
            pad,
            options,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn rods(&self) -> &[Rod] {
        &self.rods
    }

    pub fn tube(&self) -> f64 {
        self.tube
    }

    /// Euclidean distance from `p` to the axis segment covering all rods.
    pub fn distance_to_axis_segment(&self, p: &Point) -> f64 {
        let rho2 = p[0] * p[0] + p[1] * p[1];
        let dz = if p[2] > self.z_top {
            p[2] - self.z_top
        } else if p[2] < self.z_bottom {
            self.z_bottom - p[2]
        } else {
            0.0
        };
        (rho2 + dz * dz).sqrt()
    }

    pub fn psi(&self, p: &Point) -> f64 {
        psi(&self.rods, p[0] * p[0] + p[1] * p[1], p[2])
    }

    pub fn psi_jet(&self, p: &Point) -> Jet<3> {
        let [x, y, z] = Jet::seed(p);
        psi(&self.rods, x * x + y * y, z)
    }

    /// `(ψ_ρ, ψ_z)` in the meridian half-plane.
    fn meridian_gradient(&self, rho: f64, z: f64) -> (f64, f64) {
        let r = Dual::<2>::variable(rho, 0);
        let zz = Dual::<2>::variable(z, 1);
        let v = psi(&self.rods, r * r, zz);
        (v.gradient[0], v.gradient[1])
    }

    fn horizontal(&self, rho: f64, z: f64) -> Result<f64> {
        quad(
            |s| {
                let (pr, pz) = self.meridian_gradient(s, z);
                Ok(s * (pr * pr - pz * pz))
            },
            0.0,
            rho,
            &self.options,
        )
    }

    fn vertical(&self, rho: f64, from: f64, to: f64) -> Result<f64> {
        quad(
            |s| {
                let (pr, pz) = self.meridian_gradient(rho, s);
                Ok(2.0 * rho * pr * pz)
            },
            from,
            to,
            &self.options,
        )
    }

    /// `β` at meridian coordinates `(ρ, z)` along the path selected by `reference`.
    pub fn beta_meridian(&self, rho: f64, z: f64, reference: BetaReference) -> Result<f64> {
        let reference = match reference {
            BetaReference::Nearest if z > self.z_top => BetaReference::Top,
            BetaReference::Nearest if z < self.z_bottom => BetaReference::Bottom,
            BetaReference::Nearest if self.z_top - z <= z - self.z_bottom => BetaReference::Top,
            BetaReference::Nearest => BetaReference::Bottom,
            r => r,
        };
        let (direct, z_ref) = match reference {
            BetaReference::Top => (z > self.z_top, self.z_top + self.pad),
            _ => (z < self.z_bottom, self.z_bottom - self.pad),
        };
        if direct {
            return self.horizontal(rho, z);
        }
        if rho < self.tube {
            return Err(GeoError::PathThroughRod([rho, 0.0, z]));
        }
        Ok(self.horizontal(rho, z_ref)? + self.vertical(rho, z_ref, z)?)
    }

    /// `β` at a Cartesian point, memoized.
    pub fn beta(&self, p: &Point) -> Result<f64> {
        let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let key = [rho.to_bits(), p[2].to_bits()];
        if let Some(v) = self.cache.read().expect("beta cache poisoned").get(&key) {
            return Ok(*v);
        }
        let v = self.beta_meridian(rho, p[2], BetaReference::Nearest)?;
        self.cache
            .write()
            .expect("beta cache poisoned")
            .insert(key, v);
        Ok(v)
    }

    /// Value, gradient and Hessian of `β` in Cartesian coordinates.
    pub fn beta_jet(&self, p: &Point) -> Result<Jet<3>> {
        let value = self.beta(p)?;
        let psi = self.psi_jet(p);
        let d: [Dual<3>; 3] = std::array::from_fn(|i| Dual::new(psi.gradient[i], psi.hessian[i]));
        let x = Dual::<3>::variable(p[0], 0);
        let y = Dual::<3>::variable(p[1], 1);
        let a = x * d[0] + y * d[1];
        let rho2 = x * x + y * y;
        let radial = a * a / rho2 - d[2] * d[2];
        let grad = [x * radial, y * radial, a * d[2] * 2.0];
        let mut jet = Jet::<3>::constant(value);
        for i in 0..3 {
            jet.gradient[i] = grad[i].value;
            for j in 0..3 {
                jet.hessian[i][j] = 0.5 * (grad[i].gradient[j] + grad[j].gradient[i]);
            }
        }
        Ok(jet)
    }

    pub fn domain_contains(&self, p: &Point) -> bool {
        self.distance_to_axis_segment(p) >= self.tube && self.psi(p).exp() >= LAPSE_MARGIN
    }
}

/// `γ_ij = δ_ij + (e^{2β} − 1)(x_i x_j/ρ² on the xy-block + δ_i3 δ_j3)`
fn weyl_metric<T: Real>(beta: T, x: T, y: T) -> [[T; 3]; 3] {
    let e = (beta * 2.0).exp_m1();
    let q = e / (x * x + y * y);
    let mut out = [[T::zero(); 3]; 3];
    let xy = [x, y];
    for i in 0..2 {
        for j in i..2 {
            let mut v = q * xy[i] * xy[j];
            if i == j {
                v += T::one();
            }
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out[2][2] = e + 1.0;
    out
}

struct WeylMetric(Arc<WeylGeometry>);

impl MetricField for WeylMetric {
    fn components(&self, p: &Point) -> Mat3 {
        let beta = self.0.beta(p).unwrap_or(f64::NAN);
        weyl_metric(beta, p[0], p[1])
    }

    fn jet(&self, p: &Point) -> MetricJet {
        let beta = self.0.beta_jet(p).unwrap_or(Jet::constant(f64::NAN));
        let [x, y, _] = Jet::seed(p);
        weyl_metric(beta, x, y)
    }
}

struct WeylPotential {
    geometry: Arc<WeylGeometry>,
    c2: f64,
}

impl ScalarField for WeylPotential {
    fn value(&self, p: &Point) -> f64 {
        self.c2 * self.geometry.psi(p)
    }
    fn jet(&self, p: &Point) -> Jet<3> {
        self.geometry.psi_jet(p) * self.c2
    }
}

/// `N = e^ψ`
struct WeylLapse(Arc<WeylGeometry>);

impl ScalarField for WeylLapse {
    fn value(&self, p: &Point) -> f64 {
        self.0.psi(p).exp()
    }
    fn jet(&self, p: &Point) -> Jet<3> {
        self.0.psi_jet(p).exp()
    }
}

/// A Weyl configuration together with its pseudo-Newtonian variables.
#[derive(Clone, Debug)]
pub struct WeylSystem {
    pub geometry: Arc<WeylGeometry>,
    pub constants: PhysicalConstants,
    pub chart: Chart,
}

impl WeylSystem {
    pub fn new(spec: &WeylSpec, constants: &PhysicalConstants) -> Result<Self> {
        let geometry = Arc::new(WeylGeometry::new(spec)?);
        let g = geometry.clone();
        let chart = Chart::new("weyl-cartesian", HarmonicFlag::Asymptotic, move |p| {
            g.domain_contains(p)
        });
        Ok(Self {
            geometry,
            constants: *constants,
            chart,
        })
    }

    /// Physical mass `M c²/G` of each rod, in sorted order.
    pub fn rod_masses(&self) -> Vec<f64> {
        let k = self.constants.c2() / self.constants.g;
        self.geometry
            .rods
            .iter()
            .map(|r| r.half_length * k)
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.rod_masses().iter().sum()
    }

    /// The lapse `N = e^ψ`.
    pub fn lapse(&self) -> ChartedScalar {
        ChartedScalar::new(
            self.chart.clone(),
            Arc::new(WeylLapse(self.geometry.clone())),
        )
    }

    /// Shell from 1.5 to 4 times the largest distance of a rod end from the origin.
    pub fn default_shell(&self) -> Shell {
        let extent = self
            .geometry
            .rods
            .iter()
            .map(|r| r.center_z.abs() + r.half_length)
            .fold(0.0, f64::max);
        Shell {
            center: [0.0; 3],
            r_min: 1.5 * extent,
            r_max: 4.0 * extent,
        }
    }

    pub fn pseudo_newtonian(&self) -> PseudoNewtonianSystem {
        let gamma = ChartedMetric::new(
            self.chart.clone(),
            Arc::new(WeylMetric(self.geometry.clone())),
        );
        let u = WeylPotential {
            geometry: self.geometry.clone(),
            c2: self.constants.c2(),
        };
        PseudoNewtonianSystem {
            gamma,
            u: ChartedScalar::new(self.chart.clone(), Arc::new(u)),
            constants: self.constants,
            chart: self.chart.clone(),
            harmonic: HarmonicFlag::Asymptotic,
            shell: self.default_shell(),
        }
    }
}

/// Pseudo-Newtonian variables of the Weyl configuration `spec`.
pub fn weyl_system(
    spec: &WeylSpec,
    constants: &PhysicalConstants,
) -> Result<PseudoNewtonianSystem> {
    Ok(WeylSystem::new(spec, constants)?.pseudo_newtonian())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rods(list: &[(f64, f64)]) -> WeylSpec {
        WeylSpec::new(
            list.iter()
                .map(|&(center_z, half_length)| Rod {
                    center_z,
                    half_length,
                })
                .collect(),
        )
    }

    /// `e^{2β} = ((R₊ + R₋)² − 4M²)/(4 R₊ R₋)` for a single rod at the origin.
    fn single_rod_e2beta(m: f64, rho: f64, z: f64) -> f64 {
        let rp = (rho * rho + (z - m).powi(2)).sqrt();
        let rm = (rho * rho + (z + m).powi(2)).sqrt();
        ((rp + rm).powi(2) - 4.0 * m * m) / (4.0 * rp * rm)
    }

    #[test]
    fn invalid_specs() {
        assert!(WeylGeometry::new(&rods(&[])).is_err());
        assert!(WeylGeometry::new(&rods(&[(0.0, -1.0)])).is_err());
        assert!(WeylGeometry::new(&rods(&[(0.0, 1.0), (1.5, 1.0)])).is_err());
    }

    #[test]
    fn default_tube_radius() {
        assert_eq!(rods(&[(0.0, 2.0)]).tube().unwrap(), 2e-2);
        assert!((rods(&[(-4.0, 1.0), (4.0, 2.0)]).tube().unwrap() - 5e-2).abs() < 1e-15);
    }

    #[test]
    fn single_rod_beta_matches_closed_form() {
        let m = 1.0;
        let g = WeylGeometry::new(&rods(&[(0.0, m)])).unwrap();
        for &(rho, z) in &[(0.5, 3.0), (2.0, 0.0), (1.0, -0.5), (4.0, -6.0), (0.3, 0.2)] {
            let beta = g.beta(&[rho, 0.0, z]).unwrap();
            let expected = single_rod_e2beta(m, rho, z);
            assert!(((2.0 * beta).exp() - expected).abs() < 1e-8, "({rho}, {z})");
        }
    }

    #[test]
    fn beta_is_path_independent() {
        let g = WeylGeometry::new(&rods(&[(-4.0, 1.0), (4.0, 2.0)])).unwrap();
        for &(rho, z) in &[(1.0, 0.0), (3.0, 5.0), (0.5, -4.0), (2.0, 9.0)] {
            let a = g.beta_meridian(rho, z, BetaReference::Top).unwrap();
            let b = g.beta_meridian(rho, z, BetaReference::Bottom).unwrap();
            assert!((a - b).abs() < 1e-8, "({rho}, {z}): {a} vs {b}");
        }
    }

    #[test]
    fn path_along_the_axis_segment_is_rejected() {
        let g = WeylGeometry::new(&rods(&[(-4.0, 1.0), (4.0, 2.0)])).unwrap();
        let r = g.beta_meridian(1e-3, 0.0, BetaReference::Nearest);
        assert!(matches!(r, Err(GeoError::PathThroughRod(_))));
        assert!(!g.domain_contains(&[0.0, 1e-3, 0.0]));
        assert!(g.domain_contains(&[0.0, 0.0, 7.0]));
    }

    #[test]
    fn beta_gradient_matches_finite_differences_of_beta() {
        let g = WeylGeometry::new(&rods(&[(-4.0, 1.0), (4.0, 2.0)])).unwrap();
        let p = [1.2, -0.7, 1.5];
        let jet = g.beta_jet(&p).unwrap();
        let h = 1e-4;
        for i in 0..3 {
            let mut a = p;
            let mut b = p;
            a[i] += h;
            b[i] -= h;
            let fd = (g.beta(&a).unwrap() - g.beta(&b).unwrap()) / (2.0 * h);
            assert!(
                (fd - jet.gradient[i]).abs() < 1e-6,
                "{i}: {fd} vs {}",
                jet.gradient[i]
            );
        }
    }

    #[test]
    fn memoized_values_are_bit_identical() {
        let g = WeylGeometry::new(&rods(&[(0.0, 1.0)])).unwrap();
        let p = [1.0, 2.0, 3.0];
        assert_eq!(g.beta(&p).unwrap().to_bits(), g.beta(&p).unwrap().to_bits());
    }
}
