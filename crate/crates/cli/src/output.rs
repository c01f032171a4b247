//! Artifact plumbing: output directory resolution and deterministic file
//! writing.  Numbers are written in Rust's shortest round-trip form, so a
//! rerun with the same configuration and seed reproduces every byte.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub const OUT_DIR_ENV: &str = "OHMNET_OUT_DIR";

/// `--out` flag, then `$OHMNET_OUT_DIR`, then the working directory.
pub fn resolve_out_dir(flag: Option<&PathBuf>) -> PathBuf {
    flag.cloned()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).context("serializing report")?;
    text.push('\n');
    write_artifact(dir, name, &text)
}

/// CSV accumulator; commas never occur in vertex names of generated sources,
/// and numeric cells use the shortest round-trip form.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &str) -> Csv {
        Csv { text: format!("{header}\n") }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub fn num(x: f64) -> String {
    if x == 0.0 {
        // drop the sign of negative zero
        return "0".to_string();
    }
    format!("{x}")
}
