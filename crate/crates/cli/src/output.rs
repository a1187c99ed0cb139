use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use wl_audit::{AuditError, Result};

use crate::config::AuditConfig;

pub const TOOL: &str = "wl-audit";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Md,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Md => "md",
        }
    }
}

/// Writes artifacts into the output directory, each prefixed with the
/// reproducibility header.
pub struct Artifacts {
    dir: PathBuf,
    config_json: String,
    config: serde_json::Value,
    formats: Vec<Format>,
    pub written: Vec<PathBuf>,
}

fn io_err(path: &Path, e: std::io::Error) -> AuditError {
    AuditError::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

impl Artifacts {
    pub fn new(config: &AuditConfig, formats: Vec<Format>) -> Result<Self> {
        let dir = config.out_dir.clone();
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        let value = serde_json::to_value(config).expect("config serializes");
        Ok(Artifacts {
            dir,
            config_json: value.to_string(),
            config: value,
            formats,
            written: Vec::new(),
        })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    fn put(&mut self, file: &str, body: String) -> Result<()> {
        let path = self.dir.join(file);
        fs::write(&path, body).map_err(|e| io_err(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn csv(&mut self, file: &str, body: &str) -> Result<()> {
        if !self.wants(Format::Csv) {
            return Ok(());
        }
        let text = format!("# {TOOL} {VERSION}\n# config: {}\n{body}", self.config_json);
        self.put(file, text)
    }

    pub fn json<T: Serialize>(&mut self, file: &str, result: &T) -> Result<()> {
        if !self.wants(Format::Json) {
            return Ok(());
        }
        let doc = serde_json::json!({
            "tool": TOOL,
            "version": VERSION,
            "config": self.config,
            "result": result,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("result serializes");
        text.push('\n');
        self.put(file, text)
    }

    pub fn md(&mut self, file: &str, body: &str) -> Result<()> {
        if !self.wants(Format::Md) {
            return Ok(());
        }
        let text = format!(
            "<!-- {TOOL} {VERSION} config: {} -->\n\n{body}",
            self.config_json
        );
        self.put(file, text)
    }
}
