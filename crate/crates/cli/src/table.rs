//! Versioned CSV tables: a `# schema:` line, a `# manifest` line, then a
//! header row and records.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::manifest::{RunManifest, MANIFEST_PREFIX};

pub const GRID_SCHEMA: &str = "twopar.grid/1";
pub const TRACE_SCHEMA: &str = "twopar.trace/1";
pub const BENCH_SCHEMA: &str = "twopar.bench/1";

const SCHEMA_PREFIX: &str = "# schema: ";

/// One row of an all-index sweep. Failed indices carry `NaN` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub i: usize,
    pub j: usize,
    pub lambda: f64,
    pub mu: f64,
    pub error: f64,
    pub half_steps: usize,
    pub converged: bool,
    /// Eigenvalue in the coordinates of the unnormalized problem.
    pub lambda_orig: f64,
    pub mu_orig: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub half_step: usize,
    pub lambda: f64,
    pub index_error: f64,
}

pub fn render<R: Serialize>(schema: &str, manifest: &RunManifest, rows: &[R]) -> Result<String> {
    let mut out = format!("{SCHEMA_PREFIX}{schema}\n{}\n", manifest.to_comment_line()).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for row in rows {
            w.serialize(row).map_err(|e| CliError::Invalid(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    Ok(String::from_utf8(out).expect("csv output is UTF-8"))
}

pub fn write<R: Serialize>(path: &Path, schema: &str, manifest: &RunManifest, rows: &[R]) -> Result<()> {
    let text = render(schema, manifest, rows)?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Parses a table, rejecting any schema other than `schema`.
pub fn parse<R: DeserializeOwned>(text: &str, schema: &str, path: &Path) -> Result<(Option<RunManifest>, Vec<R>)> {
    let parse_err = |message: String| CliError::Parse {
        path: path.to_path_buf(),
        message,
    };
    let first = text.lines().next().unwrap_or_default();
    match first.strip_prefix(SCHEMA_PREFIX) {
        Some(s) if s.trim() == schema => {}
        Some(s) => return Err(parse_err(format!("unsupported schema {:?}, expected {schema:?}", s.trim()))),
        None => return Err(parse_err("missing schema line".into())),
    }
    let manifest = text
        .lines()
        .find_map(|l| l.strip_prefix(MANIFEST_PREFIX))
        .map(serde_json::from_str::<RunManifest>)
        .transpose()
        .map_err(|e| parse_err(format!("manifest: {e}")))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<Vec<R>, _>>()
        .map_err(|e| parse_err(e.to_string()))?;
    Ok((manifest, rows))
}

pub fn read<R: DeserializeOwned>(path: &Path, schema: &str) -> Result<(Option<RunManifest>, Vec<R>)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text, schema, path)
}
