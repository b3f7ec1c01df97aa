//! Artifact formatting: CSV with a `#` provenance block, JSON with
//! `schema_version` and the same provenance.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::{CliError, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub command: String,
    pub version: String,
    pub config_sha256: String,
    /// The resolved configuration, defaults included.
    pub config: Value,
}

impl Provenance {
    pub fn new(command: &str, resolved: Value) -> Self {
        let canonical = serde_json::to_string(&resolved).expect("json values always serialize");
        let digest = Sha256::digest(canonical.as_bytes());
        Provenance {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            config: resolved,
        }
    }

    fn header(&self) -> String {
        format!(
            "# schroflow {} {}\n# config_sha256 {}\n# config {}\n",
            self.version, self.command, self.config_sha256, self.config
        )
    }
}

/// Shortest round-trip rendering; identical input gives identical bytes.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(prov: &Provenance, columns: &[&str]) -> Self {
        let mut text = prov.header();
        text.push_str(&columns.join(","));
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Pretty JSON document `{schema_version, provenance, ...payload}`.
pub fn json_doc(prov: &Provenance, payload: Value) -> String {
    let mut doc = json!({
        "schema_version": SCHEMA_VERSION,
        "provenance": prov,
    });
    if let (Value::Object(d), Value::Object(p)) = (&mut doc, payload) {
        d.extend(p);
    }
    let mut s = serde_json::to_string_pretty(&doc).expect("json values always serialize");
    s.push('\n');
    s
}

/// Everything a command produces.
#[derive(Debug)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
    /// Flat summary checked by `--expect`.
    pub summary: Value,
    /// Lines printed on stdout.
    pub messages: Vec<String>,
    /// Non-zero exit that still emits the artifacts (e.g. Hardy-invalid spectra).
    pub status: Result<(), CliError>,
}

impl Artifacts {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Config(format!("cannot write to {}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        for (name, body) in &self.files {
            std::fs::write(dir.join(name), body).map_err(io)?;
        }
        Ok(())
    }
}
