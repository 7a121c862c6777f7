//! CSV and JSON writers. Each file carries the resolved configuration.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

use super::config::ExperimentConfig;

/// Formats a real with 17 significant digits.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV table with a fixed column order.
#[derive(Debug, Clone)]
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_reals(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| real(*v)).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `#`-prefixed provenance lines, the header, then the rows.
    pub fn render(&self, cfg: &ExperimentConfig) -> String {
        let mut out = String::new();
        for line in provenance(cfg).lines() {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>, cfg: &ExperimentConfig) -> Result<()> {
        write_text(path, &self.render(cfg))
    }
}

fn provenance(cfg: &ExperimentConfig) -> String {
    format!(
        "lflx {}\n{}",
        env!("CARGO_PKG_VERSION"),
        cfg.to_toml().trim_end()
    )
}

/// Writes `{"config": <cfg>, "version": ..., <body fields>}`.
pub fn write_json(path: impl AsRef<Path>, cfg: &ExperimentConfig, body: &impl Serialize) -> Result<()> {
    let mut value = serde_json::to_value(body).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::InvalidArgument("JSON body must be an object".into()))?;
    obj.insert(
        "config".into(),
        serde_json::to_value(cfg).map_err(|e| Error::InvalidArgument(e.to_string()))?,
    );
    obj.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    let text = serde_json::to_string_pretty(&value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
