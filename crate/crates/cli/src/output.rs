use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::commands::{Outcome, Table};
use crate::spec::Source;
use crate::CliError;

/// Keys come out sorted (serde_json's default map), floats in shortest
/// round-trip form, so identical inputs give identical bytes.
pub fn report(argv: &[String], source: Option<&Source>, spec_name: Option<&str>, outcome: Outcome, timing_ms: Option<f64>) -> String {
    let input = source.map(|s| json!({ "source": s.label, "name": spec_name, "sha256": hex::encode(Sha256::digest(s.text.as_bytes())) }));
    let mut doc = json!({
        "tool": { "name": "ctrl", "version": env!("CARGO_PKG_VERSION") },
        "command": argv,
        "input": input,
        "results": Value::Object(outcome.results),
        "diagnostics": Value::Object(outcome.diagnostics),
    });
    if let Some(ms) = timing_ms {
        doc["timing_ms"] = json!(ms);
    }
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

pub fn csv(t: &Table) -> String {
    let mut s = t.columns.join(",");
    s.push('\n');
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn stem(spec_arg: &str) -> String {
    Path::new(spec_arg).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| spec_arg.to_string())
}

pub fn emit(dest: Option<&Path>, text: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Input(format!("cannot write output: {e}"));
    match dest {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(io)?;
            }
            std::fs::write(p, text).map_err(io)
        }
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(io),
    }
}
