use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const TOOL_VERSION: &str = concat!("crescent ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSet {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub zero: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub distinct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rank: Option<f64>,
}

/// Parameters of the run that produced an artifact. Holds nothing that
/// varies between identical invocations unless `duration_ms` is requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub tolerances: ToleranceSet,
    pub tool_version: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub duration_ms: Option<f64>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            n: None,
            seed: None,
            tolerances: ToleranceSet::default(),
            tool_version: TOOL_VERSION.to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            duration_ms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub manifest: RunManifest,
    #[serde(flatten)]
    pub body: T,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact types serialize infallibly");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// CSV with the manifest as a leading `#` comment line.
pub fn write_csv(path: &Path, manifest: &RunManifest, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::io(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::io(path, e))?;
    }
    let body = w.into_inner().map_err(|e| CliError::io(path, e.into_error()))?;
    let text = format!(
        "# manifest: {}\n{}",
        serde_json::to_string(manifest).expect("manifest serializes"),
        String::from_utf8(body).expect("csv output is utf-8")
    );
    write_text(path, &text)
}

pub fn display(p: &Path) -> String {
    p.display().to_string()
}

pub fn display_opt(p: &Option<PathBuf>) -> Vec<String> {
    p.iter().map(|p| display(p)).collect()
}
