//! Report writers. Everything is written with LF endings and deterministic
//! ordering so identical inputs reproduce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use kgtrace_core::{Error, Result};
use serde::Serialize;

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    debug_assert!(!content.contains('\r'));
    fs::write(path, content).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut rendered = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidInput(format!("serializing {}: {e}", path.display())))?;
    rendered.push('\n');
    write_text(path, &rendered)
}

/// Write `<stem>.tsv` and `<stem>.json` side by side; returns the TSV path.
pub fn write_pair<T: Serialize>(
    out_dir: &Path,
    stem: &str,
    tsv: &str,
    value: &T,
) -> Result<PathBuf> {
    let tsv_path = out_dir.join(format!("{stem}.tsv"));
    write_text(&tsv_path, tsv)?;
    write_json(&out_dir.join(format!("{stem}.json")), value)?;
    Ok(tsv_path)
}
