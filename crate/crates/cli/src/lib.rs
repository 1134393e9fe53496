//! Scenario-driven batch front end: TOML scenarios in, JSON reports and CSV
//! series out.

pub mod csv_out;
pub mod error;
pub mod newtonian;
pub mod report;
pub mod run;
pub mod scenario;

pub use error::{CliError, CliResult};
pub use run::{run_file, validate_file, RunOptions, RunOutcome};
pub use scenario::Scenario;

/// Worker count from `--threads`, else `GEOSTAT_THREADS`, else `None`
/// (one per core).
pub fn thread_count(flag: Option<usize>, env: Option<&str>) -> CliResult<Option<usize>> {
    if let Some(n) = flag {
        return if n == 0 {
            Err(CliError::Schema("--threads must be positive".into()))
        } else {
            Ok(Some(n))
        };
    }
    match env.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Schema(format!(
                "GEOSTAT_THREADS must be a positive integer, got `{v}`"
            ))),
        },
    }
}

/// Run `f` on a dedicated pool of `threads` workers.
pub fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build().expect("thread pool").install(f)
}
