//! Report envelope and rendering. JSON is canonical; text is a flattened
//! rendering of the same value.

use std::fs;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

pub fn emit(
    format: Format,
    out: Option<&Path>,
    config: Value,
    report: Value,
    passed: bool,
) -> Result<(), CliError> {
    let envelope = json!({
        "tool": "frb",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "passed": passed,
        "report": report,
    });
    let mut body = match format {
        Format::Json => serde_json::to_string_pretty(&envelope)?,
        Format::Text => {
            let mut lines = Vec::new();
            flatten(&envelope, String::new(), &mut lines);
            lines.join("\n")
        }
    };
    body.push('\n');
    match out {
        Some(path) => {
            fs::write(path, body).map_err(|e| CliError(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn flatten(v: &Value, prefix: String, lines: &mut Vec<String>) {
    let join = |key: &str| {
        if prefix.is_empty() {
            key.to_string()
        } else {
            format!("{prefix}.{key}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(x, join(k), lines);
            }
        }
        Value::Array(items) => {
            if let Some(parts) = items.iter().map(scalar).collect::<Option<Vec<_>>>() {
                lines.push(format!("{prefix}: [{}]", parts.join(", ")));
            } else {
                for (i, x) in items.iter().enumerate() {
                    flatten(x, format!("{prefix}[{i}]"), lines);
                }
            }
        }
        _ => lines.push(format!("{prefix}: {}", scalar(v).expect("scalar"))),
    }
}
