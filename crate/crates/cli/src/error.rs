use thiserror::Error;

use geostat::GeoError;

/// Failures of a scenario run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("domain error on surface `{surface}`: {source}")]
    SurfaceDomain { surface: String, source: GeoError },
    #[error("domain error in task `{task}`: {source}")]
    Domain { task: String, source: GeoError },
    #[error("tolerance check failed: {0}")]
    Tolerance(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::SurfaceDomain { .. } | CliError::Domain { .. } => 3,
            CliError::Tolerance(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    /// Domain errors caused by an inconsistent specification are schema errors.
    pub(crate) fn in_task(task: &str, source: GeoError) -> Self {
        match source {
            GeoError::InvalidSpec(msg) => CliError::Schema(format!("task `{task}`: {msg}")),
            source => CliError::Domain {
                task: task.to_string(),
                source,
            },
        }
    }

    pub(crate) fn on_surface(surface: &str, source: GeoError) -> Self {
        match source {
            GeoError::InvalidSpec(msg) => CliError::Schema(format!("surface `{surface}`: {msg}")),
            source => CliError::SurfaceDomain {
                surface: surface.to_string(),
                source,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
