use std::path::Path;

use serde::{Deserialize, Serialize};
use twopar_core::oracle::oracle_solve_all_with_cap;
use twopar_core::IndexPair;

use super::{load_problem, oracle_cap};
use crate::error::{CliError, Result};
use crate::manifest::RunManifest;
use crate::table::{self, GridRow, GRID_SCHEMA};

pub const VERIFY_SCHEMA: &str = "twopar.verify/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub manifest: RunManifest,
    pub n: usize,
    pub m: usize,
    pub indices: usize,
    pub matched: usize,
    /// Indices whose row is missing, non-finite or off by more than the
    /// tolerance.
    pub unmatched: Vec<IndexPair>,
    pub max_dlambda: f64,
    pub max_dmu: f64,
    /// Relative tolerance: `|Δλ| ≤ tol·max(1, |λ|)`, likewise for `μ`.
    pub tolerance: f64,
    /// Whether the oracle assigned every index exactly once.
    pub oracle_bijective: bool,
}

impl VerifyReport {
    pub fn all_matched(&self) -> bool {
        self.unmatched.is_empty()
    }
}

/// Compares a solve-all grid with the Kronecker oracle, index by index.
pub fn cmd_verify(problem: &Path, results: &Path, tolerance: f64) -> Result<VerifyReport> {
    if !(tolerance > 0.0) {
        return Err(CliError::Invalid(format!("tolerance must be positive, got {tolerance}")));
    }
    let cap = oracle_cap()?;
    let params = serde_json::json!({
        "problem": problem.display().to_string(),
        "results": results.display().to_string(),
        "tolerance": tolerance,
        "oracle_cap": cap,
    });
    let mut manifest = RunManifest::new("verify", params, 0);
    let (p, _) = manifest.time("load", || load_problem(problem))?;
    let (_, rows): (_, Vec<GridRow>) = manifest.time("load", || table::read(results, GRID_SCHEMA))?;
    for r in &rows {
        if !p.contains(IndexPair::new(r.i, r.j)) {
            return Err(CliError::Invalid(format!(
                "row ({}, {}) is outside the {}×{} problem",
                r.i,
                r.j,
                p.n(),
                p.m()
            )));
        }
    }
    let spectrum = manifest.time("oracle", || oracle_solve_all_with_cap(&p, cap))?;

    let (mut max_dlambda, mut max_dmu) = (0.0f64, 0.0f64);
    let mut unmatched = Vec::new();
    for idx in IndexPair::all(p.n(), p.m()) {
        let row = rows.iter().find(|r| r.i == idx.i && r.j == idx.j);
        let (Some(row), Some(rec)) = (row, spectrum.get(idx)) else {
            unmatched.push(idx);
            continue;
        };
        let dl = (row.lambda - rec.lambda).abs();
        let dm = (row.mu - rec.mu).abs();
        if !(dl.is_finite() && dm.is_finite()) {
            unmatched.push(idx);
            continue;
        }
        max_dlambda = max_dlambda.max(dl);
        max_dmu = max_dmu.max(dm);
        if dl > tolerance * rec.lambda.abs().max(1.0) || dm > tolerance * rec.mu.abs().max(1.0) {
            unmatched.push(idx);
        }
    }
    let indices = p.n() * p.m();
    Ok(VerifyReport {
        schema: VERIFY_SCHEMA.into(),
        manifest,
        n: p.n(),
        m: p.m(),
        indices,
        matched: indices - unmatched.len(),
        unmatched,
        max_dlambda,
        max_dmu,
        tolerance,
        oracle_bijective: spectrum.is_bijection(),
    })
}
