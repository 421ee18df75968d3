use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gwrboost::io::write_json;
use serde::Serialize;
use serde_json::Value;

pub const MANIFEST: &str = "manifest.json";

/// Provenance record written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp: String,
    pub config: Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Tracks files written into one output directory.
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// Path for a relative output name; parent directories are created.
    pub fn file(&mut self, name: &str) -> Result<PathBuf> {
        let p = self.root.join(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        self.written.push(name.to_string());
        Ok(p)
    }

    pub fn finish(
        mut self,
        command: &str,
        config: Value,
        seeds: Vec<u64>,
        inputs: Vec<String>,
        warnings: Vec<String>,
    ) -> Result<()> {
        let path = self.file(MANIFEST)?;
        self.written.pop();
        let manifest = RunManifest {
            command: command.to_string(),
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config,
            seeds,
            inputs,
            outputs: self.written,
            warnings,
        };
        write_json(path, &manifest)?;
        Ok(())
    }
}

/// Left-aligned first column, right-aligned value columns.
pub fn aligned_table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width = header.iter().map(|h| h.chars().count()).collect::<Vec<_>>();
    for r in rows {
        for (j, cell) in r.iter().enumerate().take(cols) {
            width[j] = width[j].max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (j, cell) in cells.iter().enumerate() {
            let pad = width[j] - cell.chars().count();
            if j == 0 {
                s.push_str(cell);
                s.push_str(&" ".repeat(pad));
            } else {
                s.push_str("  ");
                s.push_str(&" ".repeat(pad));
                s.push_str(cell);
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(header);
    out.push_str(&"-".repeat(width.iter().sum::<usize>() + 2 * (cols - 1)));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
    }
    out
}

/// Fixed-precision cell for human-readable tables.
pub fn cell(x: f64) -> String {
    if x != 0.0 && (x.abs() >= 1e6 || x.abs() < 1e-3) {
        format!("{x:.4e}")
    } else {
        format!("{x:.4}")
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
