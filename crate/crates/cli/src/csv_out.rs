//! CSV series for task results. Column sets are fixed per task kind.

use geostat::dynamics::ParticleState;

use crate::report::{RunReport, TaskResult};

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn write(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory CSV");
    for row in rows {
        w.write_record(&row).expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV output is UTF-8")
}

/// Column names of the CSV for each task kind.
pub fn columns(kind: &str) -> &'static [&'static str] {
    match kind {
        "residuals" => &["equation", "chart", "sup_norm", "l2_norm"],
        "mass" => &[
            "surface",
            "n_theta",
            "n_phi",
            "mass",
            "harmonicity_defect",
            "refinement_delta",
        ],
        "com" => &[
            "surface",
            "x",
            "y",
            "z",
            "harmonicity_defect",
            "extrapolated",
        ],
        "scan" => &["surface", "mass", "x", "y", "z"],
        "newtonian-limit" => &[
            "lambda",
            "potential_error",
            "metric_error",
            "mass",
            "x",
            "y",
            "z",
        ],
        "equipotential" => &[
            "surface",
            "probe",
            "deviation",
            "tangential_gradient",
            "energy_drift",
            "tangency_drift",
        ],
        "levelset-export" => &["surface", "theta", "phi", "x", "y", "z"],
        "trajectory" => &[
            "surface",
            "probe",
            "tau",
            "t",
            "x",
            "y",
            "z",
            "sigma",
            "arclength",
            "energy",
            "constraint",
            "tangency",
        ],
        _ => &[],
    }
}

fn kind_of(result: &TaskResult) -> &'static str {
    match result {
        TaskResult::Residuals(_) => "residuals",
        TaskResult::Mass(_) => "mass",
        TaskResult::Com(_) => "com",
        TaskResult::Scan(_) => "scan",
        TaskResult::NewtonianLimit(_) => "newtonian-limit",
        TaskResult::Equipotential(_) => "equipotential",
        TaskResult::LevelsetExport(_) => "levelset-export",
    }
}

pub fn task_csv(result: &TaskResult) -> String {
    let rows: Vec<Vec<String>> = match result {
        TaskResult::Residuals(r) => r
            .equations
            .iter()
            .map(|e| {
                vec![
                    e.eq_name.clone(),
                    e.chart.clone(),
                    num(e.sup_norm),
                    num(e.l2_norm),
                ]
            })
            .collect(),
        TaskResult::Mass(m) => m
            .reports
            .iter()
            .map(|r| {
                vec![
                    r.surface.clone(),
                    r.rule.n_theta.to_string(),
                    r.rule.n_phi.to_string(),
                    num(r.scalar()),
                    num(r.harmonicity_defect),
                    opt(r.refinement_delta),
                ]
            })
            .collect(),
        TaskResult::Com(c) => c
            .reports
            .iter()
            .map(|r| {
                let z = r.vector();
                vec![
                    r.surface.clone(),
                    num(z[0]),
                    num(z[1]),
                    num(z[2]),
                    num(r.harmonicity_defect),
                    r.extrapolated.to_string(),
                ]
            })
            .collect(),
        TaskResult::Scan(s) => s
            .masses
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let z = s.centers.as_ref().map(|c| c[i].vector());
                let zk = |k: usize| opt(z.map(|z| z[k]));
                vec![m.surface.clone(), num(m.scalar()), zk(0), zk(1), zk(2)]
            })
            .collect(),
        TaskResult::NewtonianLimit(n) => n
            .rows
            .iter()
            .map(|r| {
                vec![
                    num(r.lambda),
                    num(r.potential_error),
                    num(r.metric_error),
                    num(r.mass),
                    num(r.center_of_mass[0]),
                    num(r.center_of_mass[1]),
                    num(r.center_of_mass[2]),
                ]
            })
            .collect(),
        TaskResult::Equipotential(e) => e
            .surfaces
            .iter()
            .flat_map(|s| {
                s.per_probe.iter().enumerate().map(move |(i, d)| {
                    vec![
                        s.surface.clone(),
                        i.to_string(),
                        num(*d),
                        num(s.tangential_gradient),
                        num(s.energy_drift),
                        num(s.tangency_drift),
                    ]
                })
            })
            .collect(),
        TaskResult::LevelsetExport(l) => l
            .surfaces
            .iter()
            .flat_map(|g| {
                g.points.iter().map(move |p| {
                    vec![
                        g.label.clone(),
                        num(p.theta),
                        num(p.phi),
                        num(p.x[0]),
                        num(p.x[1]),
                        num(p.x[2]),
                    ]
                })
            })
            .collect(),
    };
    write(columns(kind_of(result)), rows)
}

/// Trajectory series `(surface, probe, τ, t, x, σ, diagnostics)`.
pub fn trajectories_csv(series: &[(String, Vec<Vec<ParticleState>>)]) -> String {
    let mut rows = Vec::new();
    for (label, probes) in series {
        for (i, traj) in probes.iter().enumerate() {
            for st in traj {
                rows.push(vec![
                    label.clone(),
                    i.to_string(),
                    num(st.tau),
                    num(st.t),
                    num(st.x[0]),
                    num(st.x[1]),
                    num(st.x[2]),
                    num(st.sigma),
                    num(st.arclength),
                    num(st.energy),
                    num(st.constraint),
                    num(st.tangency),
                ]);
            }
        }
    }
    write(columns("trajectory"), rows)
}

/// CSV for the tasks of a run report. Several tasks are separated by a
/// blank line and a `# <task name>` line.
pub fn run_csv(report: &RunReport, task: Option<&str>) -> Option<String> {
    let selected: Vec<_> = report
        .tasks
        .iter()
        .filter(|t| task.is_none_or(|n| t.name == n))
        .collect();
    if task.is_some() && selected.is_empty() {
        return None;
    }
    if selected.len() == 1 {
        return Some(task_csv(&selected[0].result));
    }
    let mut out = String::new();
    for (i, t) in selected.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("# {}\n", t.name));
        out.push_str(&task_csv(&t.result));
    }
    Some(out)
}
