//! Report assembly and rendering.
//!
//! JSON reports carry `schema`, `command`, `seed`, `params`, `pass`,
//! `result` and `records`. CSV reports have one line per record; the first
//! three columns are `schema,command,seed`, followed by the record's fields
//! in lexicographic order, nested fields joined with dots.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde_json::{json, Value};

use crate::args::Format;

pub const SCHEMA: &str = "qmacc/1";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qmacc_core::Error),
    #[error("invalid arguments: {0}")]
    Invalid(String),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What a subcommand produced, before rendering.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub params: Value,
    /// Every audited bound in the run held.
    pub pass: bool,
    pub result: Value,
    pub records: Vec<Value>,
}

impl Report {
    pub fn to_json(&self) -> CliResult<String> {
        let doc = json!({
            "schema": SCHEMA,
            "command": self.command,
            "seed": self.seed,
            "params": self.params,
            "pass": self.pass,
            "result": self.result,
            "records": self.records,
        });
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    /// CSV of the records; a report without records gets one line built
    /// from its result.
    pub fn to_csv(&self) -> CliResult<String> {
        let fallback;
        let records: &[Value] = if self.records.is_empty() {
            fallback = [self.result.clone()];
            &fallback
        } else {
            &self.records
        };
        let flat: Vec<BTreeMap<String, String>> = records.iter().map(flatten).collect();
        let mut columns: Vec<String> = Vec::new();
        for row in &flat {
            for k in row.keys() {
                if !columns.contains(k) {
                    columns.push(k.clone());
                }
            }
        }
        columns.sort();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["schema".to_string(), "command".into(), "seed".into()];
        header.extend(columns.iter().cloned());
        w.write_record(&header)?;
        for row in &flat {
            let mut line = vec![SCHEMA.to_string(), self.command.clone(), self.seed.to_string()];
            line.extend(columns.iter().map(|c| row.get(c).cloned().unwrap_or_default()));
            w.write_record(&line)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Invalid(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Invalid(e.to_string()))
    }

    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

fn flatten(v: &Value) -> BTreeMap<String, String> {
    fn go(prefix: &str, v: &Value, out: &mut BTreeMap<String, String>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    go(&key, x, out);
                }
            }
            Value::String(s) => {
                out.insert(prefix.to_string(), s.clone());
            }
            Value::Null => {
                out.insert(prefix.to_string(), String::new());
            }
            other => {
                out.insert(prefix.to_string(), other.to_string());
            }
        }
    }
    let mut out = BTreeMap::new();
    match v {
        Value::Object(_) => go("", v, &mut out),
        other => go("value", other, &mut out),
    }
    out
}

