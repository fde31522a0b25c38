use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::table::Table;

pub const SCHEMA: &str = "wgqed-ssh/1";
pub const UNITS: &str = "lengths in λ; energies and rates in γ; times in 1/γ; ħ = 1";

/// A command's result: the primary table plus named side tables.
#[derive(Clone, Debug)]
pub struct Report {
    pub primary: Table,
    pub extras: Vec<Table>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(primary: Table) -> Self {
        Self {
            primary,
            extras: Vec::new(),
            notes: Vec::new(),
        }
    }
}

fn metadata(cfg: &RunConfig, notes: &[String]) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": cfg.command.name(),
        "config": cfg,
        "seed": cfg.seed,
        "units": UNITS,
        "notes": notes,
    })
}

pub fn envelope(cfg: &RunConfig, report: &Report) -> Value {
    let mut tables = vec![report.primary.to_json()];
    tables.extend(report.extras.iter().map(Table::to_json));
    json!({
        "schema": SCHEMA,
        "metadata": metadata(cfg, &report.notes),
        "payload": { "tables": tables },
    })
}

fn csv_comments(cfg: &RunConfig, notes: &[String], table: &str) -> Vec<String> {
    let mut c = vec![
        format!("schema: {SCHEMA}"),
        format!("version: {}", env!("CARGO_PKG_VERSION")),
        format!("command: {}", cfg.command.name()),
        format!("table: {table}"),
        format!("seed: {}", cfg.seed),
        format!("units: {UNITS}"),
    ];
    c.extend(notes.iter().map(|n| format!("note: {n}")));
    c.push(format!(
        "config: {}",
        serde_json::to_string(cfg).expect("config serializes")
    ));
    c
}

/// `run.csv` + `spectrum` → `run.spectrum.csv`.
pub fn side_path(path: &Path, name: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{name}.{ext}"))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(e, path))
}

/// Writes the report and returns the paths written. Without an output path the primary
/// table (or the whole JSON envelope) goes to stdout.
pub fn emit(cfg: &RunConfig, report: &Report) -> Result<Vec<PathBuf>, CliError> {
    match (cfg.format, &cfg.output) {
        (Format::Json, out) => {
            let text = serde_json::to_string_pretty(&envelope(cfg, report))
                .expect("envelope serializes")
                + "\n";
            match out {
                Some(p) => write_file(p, &text).map(|_| vec![p.clone()]),
                None => stdout(&text).map(|_| Vec::new()),
            }
        }
        (Format::Csv, None) => {
            let text = report
                .primary
                .to_csv(&csv_comments(cfg, &report.notes, &report.primary.name));
            stdout(&text).map(|_| Vec::new())
        }
        (Format::Csv, Some(p)) => {
            let mut written = Vec::new();
            let text = report
                .primary
                .to_csv(&csv_comments(cfg, &report.notes, &report.primary.name));
            write_file(p, &text)?;
            written.push(p.clone());
            for t in &report.extras {
                let side = side_path(p, &t.name, "csv");
                write_file(&side, &t.to_csv(&csv_comments(cfg, &report.notes, &t.name)))?;
                written.push(side);
            }
            Ok(written)
        }
    }
}

fn stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))
}

/// A previously written output file: its resolved config and primary table.
pub struct Loaded {
    pub config: RunConfig,
    pub primary: Table,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(e, path))?;
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if v["schema"] != SCHEMA {
            return Err(CliError::Usage(format!(
                "{}: expected schema {SCHEMA}, found {}",
                path.display(),
                v["schema"]
            )));
        }
        let config = serde_json::from_value(v["metadata"]["config"].clone())
            .map_err(|e| CliError::Usage(format!("{}: bad embedded config: {e}", path.display())))?;
        let primary = Table::from_json(&v["payload"]["tables"][0])?;
        return Ok(Loaded { config, primary });
    }
    let line = text
        .lines()
        .find_map(|l| l.strip_prefix("# config: "))
        .ok_or_else(|| CliError::Usage(format!("{}: no embedded config", path.display())))?;
    let config: RunConfig = serde_json::from_str(line)
        .map_err(|e| CliError::Usage(format!("{}: bad embedded config: {e}", path.display())))?;
    let name = text
        .lines()
        .find_map(|l| l.strip_prefix("# table: "))
        .unwrap_or(config.command.name())
        .to_string();
    let primary = Table::from_csv(&name, &text)?;
    Ok(Loaded { config, primary })
}
