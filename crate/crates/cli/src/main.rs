use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use geostat_cli::csv_out::run_csv;
use geostat_cli::report::{RunReport, TaskReport, TaskStatus};
use geostat_cli::{
    run_file, thread_count, validate_file, with_pool, CliError, CliResult, RunOptions,
};

/// Static space-times in pseudo-Newtonian variables: field-equation
/// residuals, mass and center-of-mass integrals, equipotential tests and
/// Newtonian-limit rates, driven by scenario files.
#[derive(Parser)]
#[command(name = "geostat", version)]
struct Cli {
    /// Worker threads (overrides GEOSTAT_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute every task of a scenario and write its reports.
    Run {
        scenario: PathBuf,
        /// Output directory (default: the scenario's directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Summary report path (default: <out>/<stem>.report.json).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check schema, references and surface domains without running tasks.
    Validate { scenario: PathBuf },
    /// Summarize a JSON report, or convert it to CSV.
    Report {
        json: PathBuf,
        #[arg(long)]
        csv: bool,
        /// Restrict to one task of a run report.
        #[arg(long)]
        task: Option<String>,
    },
}

fn parse_report(path: &PathBuf) -> CliResult<RunReport> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", path.display())))?;
    if let Ok(r) = serde_json::from_str::<RunReport>(&text) {
        return Ok(r);
    }
    let task: TaskReport = serde_json::from_str(&text)
        .map_err(|e| CliError::Schema(format!("{}: not a geostat report: {e}", path.display())))?;
    Ok(RunReport {
        schema_version: geostat_cli::report::REPORT_SCHEMA_VERSION,
        tool: geostat_cli::report::ToolInfo::current(),
        scenario: geostat_cli::report::ScenarioInfo {
            file: String::new(),
            sha256: String::new(),
            system: String::new(),
        },
        tasks: vec![task],
    })
}

fn execute(cli: Cli) -> CliResult<()> {
    let env = std::env::var("GEOSTAT_THREADS").ok();
    let threads = thread_count(cli.threads, env.as_deref())?;
    match cli.command {
        Command::Run {
            scenario,
            out,
            report,
        } => {
            let options = RunOptions {
                out_dir: out,
                report_path: report,
            };
            let outcome = with_pool(threads, || run_file(&scenario, &options))?;
            for t in &outcome.report.tasks {
                let status = match t.status {
                    TaskStatus::Passed => "passed",
                    TaskStatus::Failed => "FAILED",
                    TaskStatus::Unchecked => "done",
                };
                println!("{:<24} {status}", t.name);
            }
            println!("report: {}", outcome.report_path.display());
            match outcome.tolerance_failure {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::Validate { scenario } => {
            let prepared = with_pool(threads, || validate_file(&scenario))?;
            println!(
                "ok: {} surfaces, {} tasks",
                prepared.scenario.surfaces.len(),
                prepared.scenario.tasks.len()
            );
            Ok(())
        }
        Command::Report { json, csv, task } => {
            let report = parse_report(&json)?;
            if csv {
                let text = run_csv(&report, task.as_deref()).ok_or_else(|| {
                    CliError::Schema(format!("no task named `{}`", task.unwrap_or_default()))
                })?;
                print!("{text}");
            } else {
                for t in report
                    .tasks
                    .iter()
                    .filter(|t| task.as_ref().is_none_or(|n| &t.name == n))
                {
                    let err = t
                        .check
                        .as_ref()
                        .map(|c| format!("{:.3e}", c.max_error))
                        .unwrap_or_else(|| "-".into());
                    println!(
                        "{:<24} {:<10} max_error={err}",
                        t.name,
                        format!("{:?}", t.status).to_lowercase()
                    );
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("geostat: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
