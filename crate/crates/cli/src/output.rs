//! Result rows, the text table, and the CSV/JSON artifacts.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use fraclab_core::VerificationReport;
use serde_json::Value;

use crate::error::CliError;

/// A verification row tagged with the group it came from (criterion number,
/// config file, or subcommand).
#[derive(Debug, Clone)]
pub struct Row {
    pub group: String,
    pub report: VerificationReport,
}

/// Plain table written with RFC 4180 quoting.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub records: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), records: vec![] }
    }

    pub fn push(&mut self, record: Vec<String>) {
        self.records.push(record);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let file = File::create(path).map_err(|source| CliError::Write { path: path.into(), source })?;
        let mut w = csv::Writer::from_writer(file);
        let io = |e: csv::Error| CliError::Write { path: path.into(), source: e.into() };
        w.write_record(&self.header).map_err(io)?;
        for r in &self.records {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|source| CliError::Write { path: path.into(), source })
    }
}

/// Float formatting shared by every CSV artifact.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Everything one subcommand produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: String,
    pub rows: Vec<Row>,
    pub csv: Option<Table>,
    /// Extra JSON fields next to `rows`.
    pub extra: BTreeMap<String, Value>,
}

impl Outcome {
    pub fn new(command: &str) -> Self {
        Self { command: command.into(), rows: vec![], csv: None, extra: BTreeMap::new() }
    }

    pub fn push(&mut self, report: VerificationReport) {
        let group = self.command.clone();
        self.rows.push(Row { group, report });
    }

    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.report.pass)
    }

    /// JSON with sorted keys. Wall-clock fields are dropped unless
    /// `timings` is set, so that reruns are byte-identical.
    pub fn to_json(&self, timings: bool) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut v = serde_json::to_value(&r.report).expect("report serializes");
                if let Value::Object(map) = &mut v {
                    map.insert("group".into(), Value::String(r.group.clone()));
                }
                v
            })
            .collect();
        let mut top: serde_json::Map<String, Value> = self.extra.clone().into_iter().collect();
        top.insert("command".into(), Value::String(self.command.clone()));
        top.insert("pass".into(), Value::Bool(self.pass()));
        top.insert("rows".into(), Value::Array(rows));
        let mut v = Value::Object(top);
        if !timings {
            strip_runtime(&mut v);
        }
        v
    }

    /// Human-readable table, one line per row.
    pub fn text(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            s.push_str(&format!("{:<14} {}", r.group, r.report.line()));
            if !r.report.detail.is_empty() {
                s.push_str(&format!("  [{}]", r.report.detail));
            }
            s.push('\n');
        }
        let failed = self.rows.iter().filter(|r| !r.report.pass).count();
        s.push_str(&format!("{} rows, {} failed\n", self.rows.len(), failed));
        s
    }
}

fn strip_runtime(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("runtime");
            map.values_mut().for_each(strip_runtime);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_runtime),
        _ => {}
    }
}

/// Output flags shared by every subcommand.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct OutArgs {
    /// CSV artifact (columns depend on the subcommand).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// JSON report; `-` prints it instead of the text table.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Keep wall-clock fields in the JSON report.
    #[arg(long)]
    pub timings: bool,
}

impl OutArgs {
    pub fn json_to_stdout(&self) -> bool {
        self.json.as_deref() == Some(Path::new("-"))
    }

    /// Fails if an artifact would land in a directory that does not exist.
    pub fn check(&self) -> Result<(), CliError> {
        for path in self.output.iter().chain(self.json.iter().filter(|_| !self.json_to_stdout())) {
            let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
            if !parent.is_dir() {
                return Err(CliError::Invalid(format!("output directory {} does not exist", parent.display())));
            }
        }
        Ok(())
    }

    pub fn write(&self, outcome: &Outcome) -> Result<(), CliError> {
        if let (Some(path), Some(table)) = (&self.output, &outcome.csv) {
            table.write(path)?;
        }
        if let Some(path) = &self.json {
            let mut text = serde_json::to_string_pretty(&outcome.to_json(self.timings)).expect("json");
            text.push('\n');
            if self.json_to_stdout() {
                print!("{text}");
            } else {
                let mut f = File::create(path).map_err(|source| CliError::Write { path: path.clone(), source })?;
                f.write_all(text.as_bytes()).map_err(|source| CliError::Write { path: path.clone(), source })?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_keys_sorted_and_runtime_stripped() {
        let mut o = Outcome::new("x");
        o.push(VerificationReport::compare("id", 1.0, 1.0, 1e-3).with_runtime(2.5));
        let text = serde_json::to_string(&o.to_json(false)).unwrap();
        assert!(!text.contains("runtime"));
        assert!(text.find("\"command\"").unwrap() < text.find("\"pass\"").unwrap());
        assert!(text.find("\"group\"").unwrap() < text.find("\"identity\"").unwrap());
        assert!(serde_json::to_string(&o.to_json(true)).unwrap().contains("\"runtime\":2.5"));
    }

    #[test]
    fn missing_directory_is_rejected() {
        let out = OutArgs { output: Some("/no/such/dir/x.csv".into()), ..Default::default() };
        assert!(out.check().is_err());
        let out = OutArgs { output: Some("here.csv".into()), json: Some("-".into()), timings: false };
        assert!(out.check().is_ok());
    }
}
