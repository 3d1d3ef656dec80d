//! Artifact assembly. Everything written here is a pure function of the
//! command, its resolved arguments and its results.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Format, OutputArgs};
use crate::CliError;

pub const TOOL: &str = "marklab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance block embedded in every artifact. Thread count and output
/// paths are excluded so that artifacts compare byte-for-byte across them.
#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
}

impl Meta {
    pub fn new(command: &str, args: &impl Serialize, seed: Option<u64>) -> Self {
        let config = serde_json::to_value(args).expect("argument structs serialise");
        Meta { tool: TOOL, version: VERSION, command: command.to_string(), config, seed }
    }

    /// `# key: value` lines with config keys in sorted order.
    pub fn csv_header(&self) -> String {
        let mut out = format!("# tool: {} {}\n# command: {}\n", self.tool, self.version, self.command);
        if let Value::Object(map) = &self.config {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for k in keys {
                let v = &map[k];
                let text = match v {
                    Value::String(s) => s.clone(),
                    Value::Null => "none".to_string(),
                    other => other.to_string(),
                };
                out.push_str(&format!("# config.{k}: {text}\n"));
            }
        }
        if let Some(seed) = self.seed {
            out.push_str(&format!("# seed: {seed}\n"));
        }
        out
    }
}

/// A command result in every form it can be emitted in.
pub struct Artifact {
    pub meta: Meta,
    pub result: Value,
    pub csv: Option<String>,
    /// What to print when no `--out` is given.
    pub stdout: Stdout,
    /// Written to stderr before the artifact is emitted.
    pub warnings: Vec<String>,
}

pub enum Stdout {
    Json,
    Csv,
    Text(String),
}

impl Artifact {
    pub fn new(meta: Meta, result: &impl Serialize) -> Self {
        let result = serde_json::to_value(result).expect("results serialise");
        Artifact { meta, result, csv: None, stdout: Stdout::Json, warnings: Vec::new() }
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn warn(mut self, message: impl Into<String>) -> Self {
        self.warnings.push(message.into());
        self
    }

    pub fn printing(mut self, stdout: Stdout) -> Self {
        self.stdout = stdout;
        self
    }

    pub fn json_text(&self) -> String {
        let doc = json!({ "meta": self.meta, "result": self.result });
        let mut s = serde_json::to_string_pretty(&doc).expect("json");
        s.push('\n');
        s
    }

    pub fn csv_text(&self) -> Result<String, CliError> {
        let body = self
            .csv
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("command {} has no CSV form", self.meta.command)))?;
        Ok(format!("{}{}", self.meta.csv_header(), body))
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(self.json_text()),
            Format::Csv => self.csv_text(),
        }
    }

    pub fn emit(&self, output: &OutputArgs, out: &mut dyn Write) -> Result<(), CliError> {
        let text = match (output.out.as_deref(), output.format) {
            (None, Some(f)) | (Some("json" | "csv"), Some(f)) => self.render(f)?,
            (Some("json"), None) => self.render(Format::Json)?,
            (Some("csv"), None) => self.render(Format::Csv)?,
            (None, None) => match &self.stdout {
                Stdout::Json => self.json_text(),
                Stdout::Csv => self.csv_text()?,
                Stdout::Text(t) => t.clone(),
            },
            (Some(path), f) => {
                let format = f.unwrap_or(if path.ends_with(".csv") { Format::Csv } else { Format::Json });
                let text = self.render(format)?;
                std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {path}: {e}")))?;
                return Ok(());
            }
        };
        out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(())
    }
}
