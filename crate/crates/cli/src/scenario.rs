//! Scenario files: a TOML description of one system, a set of named
//! surfaces and an ordered list of tasks.
//!
//! ```toml
//! schema_version = 1
//!
//! [constants]
//! G = 1.0
//! c = 1.0
//!
//! [system]
//! kind = "schwarzschild"
//! mass = 1.0
//! chart = "isotropic"
//!
//! [[surfaces]]
//! label = "r5"
//! kind = "sphere"
//! radius = 5.0
//!
//! [[tasks]]
//! kind = "mass"
//! surfaces = ["r5"]
//! expect = { value = 1.0, tol = 1e-10 }
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use geostat::dynamics::ProbeInit;
use geostat::quadrature::SphereRule;
use geostat::solutions::{Rod, SchwarzschildChart};
use geostat::statics::PhysicalConstants;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub constants: Constants,
    pub system: SystemSpec,
    #[serde(default)]
    pub quadrature: Quadrature,
    #[serde(default)]
    pub surfaces: Vec<SurfaceSpec>,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    #[serde(rename = "G", default = "one")]
    pub g: f64,
    #[serde(default = "one")]
    pub c: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for Constants {
    fn default() -> Self {
        Self { g: 1.0, c: 1.0 }
    }
}

impl Constants {
    pub fn physical(&self) -> CliResult<PhysicalConstants> {
        PhysicalConstants::new(self.g, self.c).map_err(|e| CliError::Schema(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrature {
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
    #[serde(default = "default_n_phi")]
    pub n_phi: usize,
}

fn default_n_theta() -> usize {
    32
}

fn default_n_phi() -> usize {
    64
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            n_theta: default_n_theta(),
            n_phi: default_n_phi(),
        }
    }
}

impl Quadrature {
    pub fn rule(&self) -> SphereRule {
        SphereRule::new(self.n_theta, self.n_phi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// Flat space with unit lapse.
    Flat,
    Schwarzschild {
        mass: f64,
        #[serde(default)]
        center: [f64; 3],
        #[serde(default = "default_chart")]
        chart: SchwarzschildChart,
    },
    Weyl {
        rods: Vec<Rod>,
        #[serde(default)]
        tube_radius: Option<f64>,
    },
    LambdaFamily {
        mass: f64,
        lambdas: Vec<f64>,
        #[serde(default)]
        center: [f64; 3],
        #[serde(default = "default_family_chart")]
        chart: SchwarzschildChart,
    },
}

fn default_chart() -> SchwarzschildChart {
    SchwarzschildChart::Isotropic
}

fn default_family_chart() -> SchwarzschildChart {
    SchwarzschildChart::SchwarzschildArea
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub label: String,
    #[serde(flatten)]
    pub shape: Shape,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Sphere {
        #[serde(default)]
        center: [f64; 3],
        radius: f64,
    },
    Ellipsoid {
        #[serde(default)]
        center: [f64; 3],
        axes: [f64; 3],
    },
    Bumpy {
        #[serde(default)]
        center: [f64; 3],
        radius: f64,
        amplitude: f64,
    },
    Dipole {
        #[serde(default)]
        center: [f64; 3],
        radius: f64,
        amplitude: f64,
    },
    /// The lapse level set `N = level`, star-shaped about `star_center`.
    LevelSet {
        level: f64,
        #[serde(default)]
        star_center: [f64; 3],
        #[serde(default)]
        r_min: Option<f64>,
        #[serde(default)]
        r_max: Option<f64>,
    },
}

/// A tolerance assertion on a task's observed values.
///
/// With `value`, each observed value must be within `tol` of it (a scalar
/// applies to every component). Without `value`, observed values are
/// bounded quantities and must be at most `tol`. With `min`, they must be at
/// least `min`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    #[serde(default)]
    pub value: Option<ExpectValue>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub min: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExpectValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    /// Identifier in reports; defaults to `<kind>-<index>`.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub kind: TaskKind,
    /// Per-task JSON report, relative to the output directory.
    #[serde(default)]
    pub output: Option<String>,
    /// Per-task CSV series, relative to the output directory.
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub quadrature: Option<Quadrature>,
    #[serde(default)]
    pub expect: Option<Expect>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskKind {
    /// Static and conformal field-equation residuals at Halton points.
    Residuals {
        #[serde(default = "default_samples")]
        samples: usize,
        /// Shell `[r_min, r_max]` about the system center; the system default otherwise.
        #[serde(default)]
        shell: Option<[f64; 2]>,
    },
    Mass {
        surfaces: Vec<String>,
        /// Accept the doubled rule only if it moves the value by less than this.
        #[serde(default)]
        refine_tolerance: Option<f64>,
    },
    Com {
        surfaces: Vec<String>,
        /// Total mass for the normalization; the system's mass otherwise.
        #[serde(default)]
        total_mass: Option<f64>,
    },
    /// Mass and center of mass on several surfaces and their spread.
    Scan {
        surfaces: Vec<String>,
        #[serde(default)]
        total_mass: Option<f64>,
    },
    NewtonianLimit {
        #[serde(default = "default_limit_shell")]
        shell: [f64; 2],
        #[serde(default = "default_samples")]
        samples: usize,
        /// Lambdas; the family's own otherwise.
        #[serde(default)]
        lambdas: Option<Vec<f64>>,
    },
    Equipotential {
        surfaces: Vec<String>,
        #[serde(default)]
        probes: Option<Vec<ProbeInit>>,
        /// Induced arclength followed by each probe.
        #[serde(default = "default_span")]
        span: f64,
        #[serde(default = "default_probe_speed")]
        speed: f64,
        /// Recorded states per trajectory.
        #[serde(default = "default_trajectory_samples")]
        trajectory_samples: usize,
    },
    /// Sample a surface on a regular `(θ, φ)` grid.
    LevelsetExport {
        surfaces: Vec<String>,
        #[serde(default = "default_grid")]
        n_theta: usize,
        #[serde(default = "default_grid_phi")]
        n_phi: usize,
    },
}

fn default_samples() -> usize {
    1000
}

fn default_limit_shell() -> [f64; 2] {
    [10.0, 20.0]
}

fn default_span() -> f64 {
    5.0
}

fn default_probe_speed() -> f64 {
    0.3
}

fn default_trajectory_samples() -> usize {
    100
}

fn default_grid() -> usize {
    24
}

fn default_grid_phi() -> usize {
    48
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Residuals { .. } => "residuals",
            TaskKind::Mass { .. } => "mass",
            TaskKind::Com { .. } => "com",
            TaskKind::Scan { .. } => "scan",
            TaskKind::NewtonianLimit { .. } => "newtonian-limit",
            TaskKind::Equipotential { .. } => "equipotential",
            TaskKind::LevelsetExport { .. } => "levelset-export",
        }
    }

    pub fn surfaces(&self) -> &[String] {
        match self {
            TaskKind::Mass { surfaces, .. }
            | TaskKind::Com { surfaces, .. }
            | TaskKind::Scan { surfaces, .. }
            | TaskKind::Equipotential { surfaces, .. }
            | TaskKind::LevelsetExport { surfaces, .. } => surfaces,
            TaskKind::Residuals { .. } | TaskKind::NewtonianLimit { .. } => &[],
        }
    }
}

impl TaskSpec {
    pub fn display_name(&self, index: usize) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("{}-{}", self.kind.name(), index))
    }
}

impl Scenario {
    pub fn parse(text: &str) -> CliResult<Self> {
        let scenario: Scenario =
            toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        scenario.check_schema()?;
        Ok(scenario)
    }

    /// Structural checks that need no computation: version, unique labels,
    /// surface references, required task fields and system compatibility.
    pub fn check_schema(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.constants.physical()?;
        let mut labels = BTreeSet::new();
        for s in &self.surfaces {
            if !labels.insert(s.label.as_str()) {
                return Err(CliError::Schema(format!(
                    "surface label `{}` is defined twice",
                    s.label
                )));
            }
        }
        let mut names = BTreeSet::new();
        let family = matches!(self.system, SystemSpec::LambdaFamily { .. });
        for (i, t) in self.tasks.iter().enumerate() {
            let name = t.display_name(i);
            if !names.insert(name.clone()) {
                return Err(CliError::Schema(format!(
                    "task name `{name}` is used twice"
                )));
            }
            let needs_surfaces = !matches!(
                t.kind,
                TaskKind::Residuals { .. } | TaskKind::NewtonianLimit { .. }
            );
            if needs_surfaces && t.kind.surfaces().is_empty() {
                return Err(CliError::Schema(format!("task `{name}` lists no surfaces")));
            }
            for s in t.kind.surfaces() {
                if !labels.contains(s.as_str()) {
                    return Err(CliError::Schema(format!(
                        "task `{name}` references undefined surface `{s}`"
                    )));
                }
            }
            match &t.kind {
                TaskKind::NewtonianLimit { lambdas, .. } => match (&self.system, lambdas) {
                    (SystemSpec::LambdaFamily { .. }, _) | (SystemSpec::Schwarzschild { .. }, Some(_)) => {}
                    _ => {
                        return Err(CliError::Schema(format!(
                            "task `{name}` needs a lambda_family system or a Schwarzschild system with lambdas"
                        )))
                    }
                },
                _ if family => {
                    return Err(CliError::Schema(format!(
                        "task `{name}` needs a single system; a lambda_family only supports newtonian-limit"
                    )))
                }
                _ => {}
            }
            if let Some(q) = &t.quadrature {
                check_rule(q, &name)?;
            }
            if let Some(e) = &t.expect {
                if e.tol.is_none() && e.min.is_none() {
                    return Err(CliError::Schema(format!(
                        "task `{name}`: expect needs `tol` or `min`"
                    )));
                }
            }
        }
        check_rule(&self.quadrature, "quadrature")
    }
}

fn check_rule(q: &Quadrature, context: &str) -> CliResult<()> {
    if q.n_theta == 0 || q.n_phi == 0 {
        return Err(CliError::Schema(format!(
            "{context}: quadrature sizes must be positive"
        )));
    }
    Ok(())
}
