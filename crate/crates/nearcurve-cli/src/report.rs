//! Artifact serialization: CSV with 17-significant-digit numbers and JSON
//! with a reproducibility header.
//!
//! Nothing here writes a timestamp, a hostname, or any other ambient state:
//! identical inputs must produce byte-identical files.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

/// Identity block embedded at the top of every artifact.
#[derive(Clone, Debug, Serialize)]
pub struct ToolStamp {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolStamp {
    pub fn current() -> ToolStamp {
        ToolStamp { name: "nearcurve", version: env!("CARGO_PKG_VERSION") }
    }
}

/// JSON artifact wrapper: tool identity, the effective configuration that
/// produced the payload, then the payload itself.
#[derive(Serialize)]
pub struct Artifact<T: Serialize> {
    pub tool: ToolStamp,
    pub config: serde_json::Value,
    pub report: T,
}

/// 17 significant digits: enough for `f64` round trips, so reruns diff clean.
pub fn sig17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

/// Quote a CSV field only when it needs it.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Assemble a CSV document: `# tool:` and `# config:` comment lines, a header
/// row, then the data rows.
pub fn render_csv(config_line: &str, header: &str, rows: &[String]) -> String {
    let stamp = ToolStamp::current();
    let mut out = String::new();
    out.push_str(&format!("# tool: {} {}\n", stamp.name, stamp.version));
    out.push_str(&format!("# config: {config_line}\n"));
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Serialize a payload with the reproducibility header and write it.
pub fn write_json<T: Serialize>(
    path: &Path,
    config: serde_json::Value,
    report: T,
) -> anyhow::Result<()> {
    let doc = Artifact { tool: ToolStamp::current(), config, report };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    write_text(path, &text)
}
