//! Artifact writers. Every file carries the library version and a config hash.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::config_hash;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// JSON wrapper around any result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<C, R> {
    pub tool: String,
    pub version: String,
    pub kind: String,
    pub config_hash: String,
    pub config: C,
    pub result: R,
}

impl<C: Serialize, R: Serialize> Envelope<C, R> {
    pub fn new(kind: &str, config: C, result: R) -> Self {
        Envelope {
            tool: "graphblow".into(),
            version: VERSION.into(),
            kind: kind.into(),
            config_hash: config_hash(&config),
            config,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serializes")
    }
}

/// First line of every CSV artifact.
pub fn csv_header_comment(hash: &str) -> String {
    format!("# graphblow {VERSION} config={hash}\n")
}

/// Render rows as CSV preceded by the provenance comment line.
pub fn render_csv(hash: &str, header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let body = String::from_utf8(w.into_inner().context("flushing CSV")?)?;
    Ok(csv_header_comment(hash) + &body)
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn new(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root).with_context(|| format!("cannot create {}", root.display()))?;
        Ok(OutDir { root })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.path(name);
        let mut f = fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        f.write_all(contents.as_bytes())?;
        Ok(path)
    }
}

/// Shortest round-trip decimal form, so identical runs give identical bytes.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
