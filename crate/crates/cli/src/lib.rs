//! Batch experiment runner: JSON config in, report JSON plus CSV tables out.

pub mod commands;
pub mod config;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use commands::{execute, Certificate, Outcome};
pub use config::{Command, RunConfig};
pub use output::{write_atomic, ManifestFile, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Self-contained record of one run; `config` re-runs it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: RunConfig,
    pub results: Value,
    pub certificates: Vec<Certificate>,
    /// CSV files written next to the report.
    pub files: Vec<String>,
    pub wall_clock_ms: u64,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// A finished run with its tables still in memory.
#[derive(Clone, Debug)]
pub struct Run {
    pub report: RunReport,
    pub tables: Vec<Table>,
}

/// Usage problems, as opposed to runs that execute and fail their checks.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    ReplayRefused(String),
    Io(anyhow::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::ReplayRefused(m) => write!(f, "replay refused: {m}"),
            CliError::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Executes the pipeline; errors inside it become itemized failures.
pub fn run(config: &RunConfig) -> Run {
    let start = Instant::now();
    let (outcome, error) = match execute(config) {
        Ok(o) => (o, None),
        Err(e) => (Outcome::default(), Some(format!("{e:#}"))),
    };
    let mut failures: Vec<String> =
        outcome.certificates.iter().filter(|c| !c.holds).map(|c| format!("{}: {}", c.name, c.detail)).collect();
    failures.extend(error);
    let report = RunReport {
        version: VERSION.to_string(),
        config: config.clone(),
        results: outcome.results,
        certificates: outcome.certificates,
        files: outcome.tables.iter().map(|t| t.name.clone()).collect(),
        wall_clock_ms: start.elapsed().as_millis() as u64,
        passed: failures.is_empty(),
        failures,
    };
    Run { report, tables: outcome.tables }
}

/// Writes the tables, their column manifest and the report into `dir`.
pub fn write_run(run: &Run, dir: &Path) -> Result<PathBuf, CliError> {
    let io = |e: anyhow::Error| CliError::Io(e.context(format!("writing to {}", dir.display())));
    fs::create_dir_all(dir).map_err(|e| io(e.into()))?;
    for t in &run.tables {
        write_atomic(&dir.join(&t.name), &t.to_csv().map_err(io)?).map_err(io)?;
    }
    let manifest = serde_json::to_vec_pretty(&output::manifest(&run.tables)).map_err(|e| io(e.into()))?;
    write_atomic(&dir.join(MANIFEST_FILE), &manifest).map_err(io)?;
    let path = dir.join(REPORT_FILE);
    let report = serde_json::to_vec_pretty(&run.report).map_err(|e| io(e.into()))?;
    write_atomic(&path, &report).map_err(io)?;
    Ok(path)
}

/// Fresh run of a stored report, with every difference from the stored one.
#[derive(Clone, Debug)]
pub struct Replay {
    pub run: Run,
    pub mismatches: Vec<String>,
}

impl Replay {
    pub fn identical(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-executes the embedded config and compares results, certificates and
/// the CSV files found next to the report byte for byte.
pub fn replay(path: &Path) -> Result<Replay, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(anyhow::anyhow!("{}: {e}", path.display())))?;
    let stored: Value =
        serde_json::from_str(&text).map_err(|e| CliError::ReplayRefused(format!("not a report: {e}")))?;
    let version = stored
        .get("version")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::ReplayRefused("report has no version stamp".into()))?;
    if version != VERSION {
        return Err(CliError::ReplayRefused(format!("report version {version}, runner version {VERSION}")));
    }
    let config = stored.get("config").ok_or_else(|| CliError::ReplayRefused("report has no embedded config".into()))?;
    let config = RunConfig::from_json(&config.to_string()).map_err(|e| CliError::ReplayRefused(format!("{e:#}")))?;
    let run = run(&config);
    let fresh = serde_json::to_value(&run.report).map_err(|e| CliError::Io(e.into()))?;

    let mut mismatches = Vec::new();
    for key in ["results", "certificates", "files", "failures", "passed"] {
        let (a, b) = (stored.get(key), fresh.get(key));
        if a.map(Value::to_string) != b.map(Value::to_string) {
            mismatches.push(format!("`{key}` differs"));
        }
    }
    let dir = path.parent().unwrap_or(Path::new("."));
    for t in &run.tables {
        let bytes = t.to_csv().map_err(CliError::Io)?;
        match fs::read(dir.join(&t.name)) {
            Ok(old) if old == bytes => {}
            Ok(_) => mismatches.push(format!("{} differs", t.name)),
            Err(_) => mismatches.push(format!("{} is missing", t.name)),
        }
    }
    Ok(Replay { run, mismatches })
}

/// Parses a config file, applying command-line overrides.
pub fn load_config(path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if let Some(obj) = value.as_object_mut() {
        if let Some(s) = seed {
            obj.insert("seed".into(), s.into());
        }
        if let Some(o) = out {
            obj.insert("out".into(), o.to_string_lossy().into_owned().into());
        }
    }
    RunConfig::from_json(&value.to_string()).map_err(|e| CliError::Usage(format!("{e:#}")))
}
