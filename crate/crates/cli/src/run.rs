//! Scenario execution.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use geostat::dynamics::{
    default_probes, equipotential_analysis, extract_level_set, sphericity_defect, LevelSetOptions,
    ParticleState,
};
use geostat::parallel::try_map;
use geostat::quadrature::SphereRule;
use geostat::sampling::Shell;
use geostat::solutions::{
    schwarzschild, schwarzschild_pseudo_newtonian, SchwarzschildSpec, WeylGeometry, WeylSpec,
    WeylSystem,
};
use geostat::statics::{
    conformal_residual, flat_vacuum, from_pseudo_newtonian, static_residual, to_pseudo_newtonian,
    PhysicalConstants, PseudoNewtonianSystem, ResidualReport, StaticSystem,
};
use geostat::surface::ClosedSurface;
use geostat::surfint::{center_of_mass, mass, surface_independence_scan, with_refinement};
use geostat::GeoError;

use crate::csv_out;
use crate::error::{CliError, CliResult};
use crate::newtonian::{newtonian_limit_report, NewtonianLimitSetup};
use crate::report::{
    sha256_hex, to_json, Check, ComResult, EquipotentialResult, GridPoint, LevelsetResult,
    MassResult, ResidualsResult, RunReport, ScenarioInfo, SurfaceGrid, TaskReport, TaskResult,
    TaskStatus, ToolInfo, REPORT_SCHEMA_VERSION,
};
use crate::scenario::{
    Expect, ExpectValue, Scenario, Shape, SurfaceSpec, SystemSpec, TaskKind, TaskSpec,
};

/// Directions sampled when checking that a surface lies in the domain.
const DOMAIN_CHECK_RULE: SphereRule = SphereRule {
    n_theta: 12,
    n_phi: 24,
};

/// A single static system in both sets of variables.
pub struct Single {
    pub s: StaticSystem,
    pub p: PseudoNewtonianSystem,
    pub total_mass: f64,
    /// Rod geometry of Weyl systems, for surface checks.
    pub weyl: Option<Arc<WeylGeometry>>,
}

/// The system of a scenario, ready for computation.
pub enum Built {
    Single(Box<Single>),
    /// λ-families are only used by the Newtonian-limit task.
    Family,
}

pub fn build_system(spec: &SystemSpec, k: &PhysicalConstants) -> CliResult<Built> {
    let schema = |e: GeoError| match e {
        GeoError::InvalidSpec(m) => CliError::Schema(format!("system: {m}")),
        e => CliError::Domain {
            task: "system".into(),
            source: e,
        },
    };
    let single = match spec {
        SystemSpec::Flat => {
            let s = flat_vacuum(*k);
            let p = to_pseudo_newtonian(&s).map_err(schema)?;
            Single {
                s,
                p,
                total_mass: 0.0,
                weyl: None,
            }
        }
        SystemSpec::Schwarzschild {
            mass,
            center,
            chart,
        } => {
            let spec = SchwarzschildSpec::new(*mass, *center, *chart);
            Single {
                s: schwarzschild(&spec, k).map_err(schema)?,
                p: schwarzschild_pseudo_newtonian(&spec, k).map_err(schema)?,
                total_mass: *mass,
                weyl: None,
            }
        }
        SystemSpec::Weyl { rods, tube_radius } => {
            let spec = WeylSpec {
                rods: rods.clone(),
                tube_radius: *tube_radius,
            };
            let w = WeylSystem::new(&spec, k).map_err(schema)?;
            let p = w.pseudo_newtonian();
            Single {
                s: from_pseudo_newtonian(&p),
                p,
                total_mass: w.total_mass(),
                weyl: Some(w.geometry.clone()),
            }
        }
        SystemSpec::LambdaFamily { mass, lambdas, .. } => {
            geostat::solutions::lambda_family(*mass, lambdas).map_err(schema)?;
            return Ok(Built::Family);
        }
    };
    Ok(Built::Single(Box::new(single)))
}

fn describe(spec: &SystemSpec) -> String {
    match spec {
        SystemSpec::Flat => "flat".into(),
        SystemSpec::Schwarzschild { mass, chart, .. } => {
            format!("schwarzschild(m={mass}, chart={chart:?})")
        }
        SystemSpec::Weyl { rods, .. } => format!("weyl({} rods)", rods.len()),
        SystemSpec::LambdaFamily { mass, lambdas, .. } => {
            format!("lambda_family(m={mass}, {} members)", lambdas.len())
        }
    }
}

pub fn build_surface(spec: &SurfaceSpec, system: &Built) -> CliResult<ClosedSurface> {
    let label = spec.label.clone();
    let err = |e: GeoError| CliError::on_surface(&spec.label, e);
    match &spec.shape {
        Shape::Sphere { center, radius } => {
            ClosedSurface::sphere(label, *center, *radius).map_err(err)
        }
        Shape::Ellipsoid { center, axes } => {
            ClosedSurface::ellipsoid(label, *center, *axes).map_err(err)
        }
        Shape::Bumpy {
            center,
            radius,
            amplitude,
        } => ClosedSurface::bumpy(label, *center, *radius, *amplitude).map_err(err),
        Shape::Dipole {
            center,
            radius,
            amplitude,
        } => ClosedSurface::dipole(label, *center, *radius, *amplitude).map_err(err),
        Shape::LevelSet {
            level,
            star_center,
            r_min,
            r_max,
        } => {
            let Built::Single(single) = system else {
                return Err(CliError::Schema(format!(
                    "surface `{label}`: level sets need a single system"
                )));
            };
            let defaults = LevelSetOptions::default();
            let options = LevelSetOptions {
                r_min: r_min.unwrap_or(defaults.r_min),
                r_max: r_max.unwrap_or(defaults.r_max),
                ..defaults
            };
            let mut surface =
                extract_level_set(&single.s, *level, *star_center, options).map_err(err)?;
            surface.label = label;
            Ok(surface)
        }
    }
}

/// Sampled points of `surface` must lie in the chart domain with a finite
/// potential. For Weyl systems the surface, poles included, must also stay
/// clear of the rods; crossing the strut between rods is allowed.
fn check_domain(surface: &ClosedSurface, single: &Single) -> CliResult<()> {
    let fail = |e: GeoError| CliError::on_surface(&surface.label, e);
    for node in DOMAIN_CHECK_RULE.nodes() {
        let x = surface.point(node.theta, node.phi).map_err(fail)?;
        if !single.p.chart.contains(&x) {
            return Err(fail(GeoError::OutOfDomain(x)));
        }
        match single.p.u.value(&x) {
            Ok(u) if u.is_finite() => {}
            Ok(_) => return Err(fail(GeoError::NonFinite(x))),
            Err(e) => return Err(fail(e)),
        }
    }
    if let Some(weyl) = &single.weyl {
        let n = 4 * DOMAIN_CHECK_RULE.n_theta;
        for i in 0..=n {
            let theta = std::f64::consts::PI * i as f64 / n as f64;
            for j in 0..DOMAIN_CHECK_RULE.n_phi {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / DOMAIN_CHECK_RULE.n_phi as f64;
                let x = surface.point(theta, phi).map_err(fail)?;
                let rho = x[0].hypot(x[1]);
                for rod in weyl.rods() {
                    let dz = ((x[2] - rod.center_z).abs() - rod.half_length).max(0.0);
                    if rho.hypot(dz) < weyl.tube() {
                        return Err(fail(GeoError::OutOfDomain(x)));
                    }
                }
            }
        }
    }
    Ok(())
}

/// A scenario with its system and surfaces constructed and checked.
pub struct Prepared {
    pub scenario: Scenario,
    pub system: Built,
    pub constants: PhysicalConstants,
    pub surfaces: BTreeMap<String, ClosedSurface>,
}

/// Schema, reference and domain validation; no task is executed.
pub fn prepare(scenario: Scenario) -> CliResult<Prepared> {
    scenario.check_schema()?;
    let constants = scenario.constants.physical()?;
    let system = build_system(&scenario.system, &constants)?;
    let mut surfaces = BTreeMap::new();
    for spec in &scenario.surfaces {
        let surface = build_surface(spec, &system)?;
        if let Built::Single(single) = &system {
            check_domain(&surface, single)?;
        }
        surfaces.insert(spec.label.clone(), surface);
    }
    Ok(Prepared {
        scenario,
        system,
        constants,
        surfaces,
    })
}

/// Report of one executed task plus an optional CSV series.
pub struct TaskOutput {
    pub report: TaskReport,
    pub csv: String,
}

impl Prepared {
    fn single(&self) -> &Single {
        match &self.system {
            Built::Single(s) => s,
            Built::Family => {
                unreachable!("schema validation keeps single-system tasks off families")
            }
        }
    }

    fn surfaces_of(&self, task: &TaskSpec) -> Vec<&ClosedSurface> {
        task.kind
            .surfaces()
            .iter()
            .map(|l| &self.surfaces[l])
            .collect()
    }

    pub fn run_task(&self, index: usize) -> CliResult<TaskOutput> {
        let task = &self.scenario.tasks[index];
        let name = task.display_name(index);
        let rule = task.quadrature.unwrap_or(self.scenario.quadrature).rule();
        let in_task = |e: GeoError| CliError::in_task(&name, e);
        let mut trajectories: Option<Vec<(String, Vec<Vec<ParticleState>>)>> = None;
        let (result, observed) = match &task.kind {
            TaskKind::Residuals { samples, shell } => {
                let single = self.single();
                let sys_shell = single.s.shell;
                let shell = match shell {
                    Some([a, b]) => Shell::new(sys_shell.center, *a, *b).map_err(in_task)?,
                    None => sys_shell,
                };
                let points = shell
                    .halton_points_in(&single.s.chart, *samples)
                    .map_err(in_task)?;
                let (a, b) = static_residual(&single.s, &points).map_err(in_task)?;
                let (c, d) = conformal_residual(&single.p, &points).map_err(in_task)?;
                let equations: Vec<ResidualReport> = [a, b, c, d]
                    .into_iter()
                    .map(|mut r| {
                        r.sample_points.clear();
                        r.per_point = None;
                        r
                    })
                    .collect();
                let observed = equations.iter().map(|r| r.sup_norm).collect();
                (
                    TaskResult::Residuals(ResidualsResult {
                        samples: points.len(),
                        equations,
                    }),
                    observed,
                )
            }
            TaskKind::Mass {
                refine_tolerance, ..
            } => {
                let p = &self.single().p;
                let reports = self
                    .surfaces_of(task)
                    .into_iter()
                    .map(|s| {
                        let r = match refine_tolerance {
                            Some(tol) => with_refinement(rule, *tol, |r| mass(p, s, r)),
                            None => mass(p, s, rule),
                        };
                        r.map_err(|e| CliError::on_surface(&s.label, e))
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                let observed = reports.iter().map(|r| r.scalar()).collect();
                (TaskResult::Mass(MassResult { reports }), observed)
            }
            TaskKind::Com { total_mass, .. } => {
                let single = self.single();
                let m = total_mass.unwrap_or(single.total_mass);
                let reports = self
                    .surfaces_of(task)
                    .into_iter()
                    .map(|s| {
                        center_of_mass(&single.p, s, rule, m)
                            .map_err(|e| CliError::on_surface(&s.label, e))
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                let observed = reports.iter().flat_map(|r| r.value.clone()).collect();
                (
                    TaskResult::Com(ComResult {
                        total_mass: m,
                        reports,
                    }),
                    observed,
                )
            }
            TaskKind::Scan { total_mass, .. } => {
                let single = self.single();
                let surfaces: Vec<ClosedSurface> =
                    self.surfaces_of(task).into_iter().cloned().collect();
                let m = total_mass.or((single.total_mass != 0.0).then_some(single.total_mass));
                let scan =
                    surface_independence_scan(&single.p, &surfaces, rule, m).map_err(in_task)?;
                let mut observed = vec![scan.mass_spread];
                observed.extend(scan.center_spread);
                (TaskResult::Scan(scan), observed)
            }
            TaskKind::NewtonianLimit {
                shell,
                samples,
                lambdas,
            } => {
                let setup = self.newtonian_setup(shell, *samples, lambdas.as_ref(), rule);
                let report = newtonian_limit_report(&setup).map_err(in_task)?;
                let observed = vec![report.potential_rate, report.metric_rate];
                (TaskResult::NewtonianLimit(report), observed)
            }
            TaskKind::Equipotential {
                probes,
                span,
                speed,
                trajectory_samples,
                ..
            } => {
                let s = &self.single().s;
                let probes = probes.clone().unwrap_or_else(|| default_probes(*speed));
                let mut reports = Vec::new();
                let mut series = Vec::new();
                for surface in self.surfaces_of(task) {
                    let (report, traj) = equipotential_analysis(
                        s,
                        surface,
                        &probes,
                        *span,
                        *trajectory_samples,
                        DOMAIN_CHECK_RULE,
                    )
                    .map_err(|e| CliError::on_surface(&surface.label, e))?;
                    reports.push(report);
                    series.push((surface.label.clone(), traj));
                }
                trajectories = Some(series);
                let observed = reports.iter().map(|r| r.deviation).collect();
                (
                    TaskResult::Equipotential(EquipotentialResult {
                        span: *span,
                        probes,
                        surfaces: reports,
                    }),
                    observed,
                )
            }
            TaskKind::LevelsetExport { n_theta, n_phi, .. } => {
                let grids = self
                    .surfaces_of(task)
                    .into_iter()
                    .map(|s| {
                        surface_grid(s, *n_theta, *n_phi)
                            .map_err(|e| CliError::on_surface(&s.label, e))
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                let observed = grids.iter().filter_map(|g| g.max_level_residual).collect();
                (
                    TaskResult::LevelsetExport(LevelsetResult { surfaces: grids }),
                    observed,
                )
            }
        };
        let check = task.expect.as_ref().map(|e| check(e, observed));
        let status = match &check {
            None => TaskStatus::Unchecked,
            Some(c) if c.passed => TaskStatus::Passed,
            Some(_) => TaskStatus::Failed,
        };
        let report = TaskReport {
            name,
            status,
            check,
            result,
        };
        let csv = match trajectories {
            Some(series) => csv_out::trajectories_csv(&series),
            None => csv_out::task_csv(&report.result),
        };
        Ok(TaskOutput { report, csv })
    }

    fn newtonian_setup(
        &self,
        shell: &[f64; 2],
        samples: usize,
        lambdas: Option<&Vec<f64>>,
        rule: SphereRule,
    ) -> NewtonianLimitSetup {
        let (mass, center, chart, own) = match &self.scenario.system {
            SystemSpec::LambdaFamily {
                mass,
                lambdas,
                center,
                chart,
            } => (*mass, *center, *chart, lambdas.clone()),
            SystemSpec::Schwarzschild {
                mass,
                center,
                chart,
            } => (*mass, *center, *chart, Vec::new()),
            _ => unreachable!("schema validation restricts newtonian-limit systems"),
        };
        NewtonianLimitSetup {
            mass,
            g: self.constants.g,
            center,
            chart,
            lambdas: lambdas.cloned().unwrap_or(own),
            r_min: shell[0],
            r_max: shell[1],
            samples,
            rule,
        }
    }
}

fn surface_grid(s: &ClosedSurface, n_theta: usize, n_phi: usize) -> geostat::Result<SurfaceGrid> {
    if n_theta < 2 || n_phi < 1 {
        return Err(GeoError::InvalidSpec(
            "export grid needs n_theta >= 2 and n_phi >= 1".into(),
        ));
    }
    let params: Vec<(f64, f64)> = (0..n_theta)
        .flat_map(|i| {
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / n_theta as f64;
            (0..n_phi).map(move |j| (theta, 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64))
        })
        .collect();
    let points = try_map(&params, |&(theta, phi)| {
        Ok(GridPoint {
            theta,
            phi,
            x: s.point(theta, phi)?,
        })
    })?;
    let radius = |x: &[f64; 3]| {
        let d: Vec<f64> = (0..3).map(|k| x[k] - s.center[k]).collect();
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    };
    let mean_radius = points.iter().map(|p| radius(&p.x)).sum::<f64>() / points.len() as f64;
    let max_level_residual = s.level_function.as_ref().map(|lf| {
        points
            .iter()
            .map(|p| (lf.field.value(&p.x) - lf.level).abs())
            .fold(0.0, f64::max)
    });
    Ok(SurfaceGrid {
        label: s.label.clone(),
        n_theta,
        n_phi,
        mean_radius,
        sphericity_defect: sphericity_defect(s, SphereRule::new(n_theta, n_phi))?,
        max_level_residual,
        points,
    })
}

/// Evaluate an `expect` block against observed values.
pub fn check(expect: &Expect, observed: Vec<f64>) -> Check {
    let target = |i: usize| match &expect.value {
        None => 0.0,
        Some(ExpectValue::Scalar(v)) => *v,
        Some(ExpectValue::Vector(v)) if v.is_empty() => 0.0,
        Some(ExpectValue::Vector(v)) => v[i % v.len()],
    };
    let max_error = observed
        .iter()
        .enumerate()
        .map(|(i, o)| (o - target(i)).abs())
        .fold(0.0, f64::max);
    let within = expect.tol.is_none_or(|tol| {
        observed
            .iter()
            .enumerate()
            .all(|(i, o)| (o - target(i)).abs() <= tol)
    });
    let above = expect
        .min
        .is_none_or(|min| observed.iter().all(|o| *o >= min));
    let passed = within && above && !observed.is_empty() && observed.iter().all(|o| o.is_finite());
    Check {
        expect: expect.clone(),
        observed,
        max_error,
        passed,
    }
}

/// Where reports go and how large the worker pool is.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Output directory; the scenario's directory by default.
    pub out_dir: Option<PathBuf>,
    /// Summary report path; `<out_dir>/<stem>.report.json` by default.
    pub report_path: Option<PathBuf>,
}

/// Outcome of `run`: the summary report and the first tolerance failure.
pub struct RunOutcome {
    pub report: RunReport,
    pub report_path: PathBuf,
    pub tolerance_failure: Option<CliError>,
}

fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

pub fn read_scenario(path: &Path) -> CliResult<(Scenario, Vec<u8>)> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| CliError::Schema("scenario is not UTF-8".into()))?;
    Ok((Scenario::parse(text)?, bytes))
}

pub fn validate_file(path: &Path) -> CliResult<Prepared> {
    prepare(read_scenario(path)?.0)
}

/// Execute every task in order and write the reports.
pub fn run_file(path: &Path, options: &RunOptions) -> CliResult<RunOutcome> {
    let (scenario, bytes) = read_scenario(path)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scenario")
        .to_string();
    let file = path
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("scenario")
        .to_string();
    let out_dir = options
        .out_dir
        .clone()
        .unwrap_or_else(|| path.parent().map(Path::to_path_buf).unwrap_or_default());
    let system = describe(&scenario.system);
    let prepared = prepare(scenario)?;
    fs::create_dir_all(&out_dir).map_err(io(format!("creating {}", out_dir.display())))?;
    let mut tasks = Vec::new();
    let mut tolerance_failure = None;
    for (i, spec) in prepared.scenario.tasks.iter().enumerate() {
        let out = prepared.run_task(i)?;
        if let Some(name) = &spec.output {
            let p = out_dir.join(name);
            fs::write(&p, to_json(&out.report)).map_err(io(format!("writing {}", p.display())))?;
        }
        if let Some(name) = &spec.csv {
            let p = out_dir.join(name);
            fs::write(&p, &out.csv).map_err(io(format!("writing {}", p.display())))?;
        }
        if out.report.status == TaskStatus::Failed && tolerance_failure.is_none() {
            let c = out
                .report
                .check
                .as_ref()
                .expect("failed tasks carry a check");
            tolerance_failure = Some(CliError::Tolerance(format!(
                "task `{}`: max error {:.3e} (observed {:?})",
                out.report.name, c.max_error, c.observed
            )));
        }
        tasks.push(out.report);
    }
    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool: ToolInfo::current(),
        scenario: ScenarioInfo {
            file,
            sha256: sha256_hex(&bytes),
            system,
        },
        tasks,
    };
    let report_path = options
        .report_path
        .clone()
        .unwrap_or_else(|| out_dir.join(format!("{stem}.report.json")));
    fs::write(&report_path, to_json(&report))
        .map_err(io(format!("writing {}", report_path.display())))?;
    Ok(RunOutcome {
        report,
        report_path,
        tolerance_failure,
    })
}
