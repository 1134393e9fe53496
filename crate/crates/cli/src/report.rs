//! Report documents and their serialization.
//!
//! Every float is written with 17 significant digits so that it parses back
//! to the identical double; non-finite values become `null`.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use geostat::dynamics::{EquipotentialReport, ProbeInit};
use geostat::statics::ResidualReport;
use geostat::surfint::{IntegralReport, ScanReport};

use crate::newtonian::NewtonianLimitReport;
use crate::scenario::Expect;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub scenario: ScenarioInfo,
    pub tasks: Vec<TaskReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self {
            name: "geostat".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    /// File name of the scenario, without directories.
    pub file: String,
    pub sha256: String,
    pub system: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Passed,
    Failed,
    Unchecked,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub name: String,
    pub status: TaskStatus,
    pub check: Option<Check>,
    pub result: TaskResult,
}

/// Outcome of an `expect` assertion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub expect: Expect,
    pub observed: Vec<f64>,
    /// Largest distance to the expected value (or the largest observed
    /// value for bounded quantities).
    pub max_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TaskResult {
    Residuals(ResidualsResult),
    Mass(MassResult),
    Com(ComResult),
    Scan(ScanReport),
    NewtonianLimit(NewtonianLimitReport),
    Equipotential(EquipotentialResult),
    LevelsetExport(LevelsetResult),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualsResult {
    pub samples: usize,
    pub equations: Vec<ResidualReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassResult {
    pub reports: Vec<IntegralReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComResult {
    pub total_mass: f64,
    pub reports: Vec<IntegralReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquipotentialResult {
    pub span: f64,
    pub probes: Vec<ProbeInit>,
    pub surfaces: Vec<EquipotentialReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelsetResult {
    pub surfaces: Vec<SurfaceGrid>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    pub label: String,
    pub n_theta: usize,
    pub n_phi: usize,
    pub mean_radius: f64,
    /// `(max − min)/mean` of the radius about the surface center.
    pub sphericity_defect: f64,
    /// Largest `|n(x) − n₀|` for the surface's defining function, if any.
    pub max_level_residual: Option<f64>,
    pub points: Vec<GridPoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub theta: f64,
    pub phi: f64,
    pub x: [f64; 3],
}

/// Pretty printing with fixed 17-significant-digit floats.
struct Sig17(PrettyFormatter<'static>);

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// JSON text of `value` with 17-digit floats and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("report types serialize infallibly");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_every_bit() {
        let values = vec![
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            1.0,
        ];
        let text = to_json(&values);
        assert!(text.contains("3.3333333333333331e-1"));
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, values);
    }

    #[test]
    fn non_finite_values_become_null() {
        let text = to_json(&vec![f64::NAN, 1.0]);
        assert!(text.contains("null"));
    }

    #[test]
    fn digest_is_lowercase_hex() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
