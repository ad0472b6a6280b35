//! Report files and the reproducibility manifest, each written atomically.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Tolerances, SCHEMA_VERSION};
use crate::runner::{Diagnostic, RunOutput};
use crate::svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    CsvSvg,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::CsvSvg => "csv+svg",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub schema_version: u32,
    pub code_version: &'static str,
    pub kind: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub timestamp: String,
    pub threads: usize,
    pub format: &'static str,
    pub files: Vec<String>,
    pub rows: usize,
    pub flagged_rows: usize,
    pub failed_checks: usize,
    pub notes: &'a [String],
    pub diagnostics: &'a [Diagnostic],
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// CSV always, SVG on request, then manifest.json. Returns the files written.
pub fn emit_report(
    dir: &Path,
    cfg: &ExperimentConfig,
    config_bytes: &[u8],
    out: &RunOutput,
    format: Format,
    threads: usize,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in &out.tables {
        let p = dir.join(format!("{}.csv", t.name));
        write_atomic(&p, t.csv.as_bytes())?;
        written.push(p);
    }
    if format == Format::CsvSvg {
        for c in &out.charts {
            let p = dir.join(format!("{}.svg", c.name));
            write_atomic(&p, svg::render(c).as_bytes())?;
            written.push(p);
        }
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION"),
        kind: cfg.experiment.kind(),
        config_sha256: sha256_hex(config_bytes),
        seed: cfg.seed,
        tolerances: cfg.tolerances,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        threads,
        format: format.as_str(),
        files: written
            .iter()
            .filter_map(|p| p.file_name())
            .map(|f| f.to_string_lossy().into_owned())
            .collect(),
        rows: out.tables.iter().map(|t| t.rows).sum(),
        flagged_rows: out.flagged,
        failed_checks: out.failed_checks,
        notes: &out.notes,
        diagnostics: &out.diagnostics,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    let p = dir.join("manifest.json");
    write_atomic(&p, json.as_bytes())?;
    written.push(p);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write_atomic(&p, b"one\n").unwrap();
        write_atomic(&p, b"two\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
