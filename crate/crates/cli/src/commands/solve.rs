use std::path::Path;

use serde::{Deserialize, Serialize};
use twopar_core::alternating::solve_each;
use twopar_core::problem::recover_eigenvalue;
use twopar_core::{solve_index, IndexPair, RecoveryMap, Solution, SolveOptions, TwoParamProblem};

use super::load_problem;
use crate::error::Result;
use crate::manifest::RunManifest;
use crate::table::{self, GridRow, TraceRow, GRID_SCHEMA, TRACE_SCHEMA};

pub const SOLUTION_SCHEMA: &str = "twopar.solution/1";
pub const SUMMARY_SCHEMA: &str = "twopar.summary/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub schema: String,
    pub manifest: RunManifest,
    pub solution: Solution,
    /// Eigenvalue and vectors in the coordinates of the unnormalized problem.
    pub lambda_orig: f64,
    pub mu_orig: f64,
    pub u_orig: Vec<f64>,
    pub v_orig: Vec<f64>,
}

/// Solves one index. The trace, if requested, has one row per half step.
pub fn cmd_solve(problem: &Path, idx: IndexPair, opts: &SolveOptions, trace: Option<&Path>) -> Result<SolveOutput> {
    let params = serde_json::json!({
        "problem": problem.display().to_string(),
        "index": idx,
        "options": opts,
    });
    let mut manifest = RunManifest::new("solve", params, opts.seed);
    let (p, map) = manifest.time("load", || load_problem(problem))?;
    let solution = manifest.time("solve", || solve_index(&p, idx, opts))?;
    let (lambda_orig, mu_orig) = recover_eigenvalue(&map, (solution.lambda, solution.mu));
    let (u_orig, v_orig) = map.recover_vectors(solution.u.clone(), solution.v.clone());
    if let Some(path) = trace {
        let rows: Vec<TraceRow> = solution
            .trace
            .iter()
            .map(|t| TraceRow {
                half_step: t.half_step,
                lambda: t.lambda,
                index_error: t.index_error,
            })
            .collect();
        table::write(path, TRACE_SCHEMA, &manifest, &rows)?;
    }
    Ok(SolveOutput {
        schema: SOLUTION_SCHEMA.into(),
        manifest,
        solution,
        lambda_orig,
        mu_orig,
        u_orig,
        v_orig,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedIndex {
    pub index: IndexPair,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub schema: String,
    pub manifest: RunManifest,
    pub n: usize,
    pub m: usize,
    pub indices: usize,
    pub converged: usize,
    pub failed: Vec<FailedIndex>,
    pub max_error: f64,
    pub median_error: f64,
    pub wall_seconds: f64,
}

impl SweepSummary {
    pub fn all_converged(&self) -> bool {
        self.converged == self.indices
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<GridRow>,
    /// Per-index outcome, aligned with `rows`.
    pub solutions: Vec<std::result::Result<Solution, String>>,
    pub summary: SweepSummary,
}

/// Solves every index of `p` and builds grid rows, sorted by `(i, j)`.
/// Errors on individual indices are recorded, not propagated.
pub fn sweep(
    p: &TwoParamProblem,
    map: &RecoveryMap,
    opts: &SolveOptions,
    workers: usize,
) -> Result<(Vec<GridRow>, Vec<std::result::Result<Solution, String>>)> {
    let indices: Vec<IndexPair> = IndexPair::all(p.n(), p.m()).collect();
    let outcomes = solve_each(p, &indices, opts, workers)?;
    let mut rows = Vec::with_capacity(indices.len());
    let mut solutions = Vec::with_capacity(indices.len());
    for (idx, outcome) in indices.iter().zip(outcomes) {
        match outcome {
            Ok(s) => {
                let (lambda_orig, mu_orig) = recover_eigenvalue(map, (s.lambda, s.mu));
                rows.push(GridRow {
                    i: idx.i,
                    j: idx.j,
                    lambda: s.lambda,
                    mu: s.mu,
                    error: s.index_error,
                    half_steps: s.half_steps,
                    converged: s.converged,
                    lambda_orig,
                    mu_orig,
                });
                solutions.push(Ok(s));
            }
            Err(e) => {
                log::warn!("index {idx}: {e}");
                rows.push(GridRow {
                    i: idx.i,
                    j: idx.j,
                    lambda: f64::NAN,
                    mu: f64::NAN,
                    error: f64::NAN,
                    half_steps: 0,
                    converged: false,
                    lambda_orig: f64::NAN,
                    mu_orig: f64::NAN,
                });
                solutions.push(Err(e.to_string()));
            }
        }
    }
    Ok((rows, solutions))
}

/// Solves every index with `workers` threads and writes the grid CSV to
/// `out`. The grid content does not depend on `workers`.
pub fn cmd_solve_all(problem: &Path, opts: &SolveOptions, workers: usize, out: Option<&Path>) -> Result<SweepOutput> {
    let params = serde_json::json!({
        "problem": problem.display().to_string(),
        "options": opts,
        "workers": workers,
    });
    let mut manifest = RunManifest::new("solve-all", params, opts.seed);
    let (p, map) = manifest.time("load", || load_problem(problem))?;
    let (rows, solutions) = manifest.time("solve", || sweep(&p, &map, opts, workers))?;

    let failed: Vec<FailedIndex> = rows
        .iter()
        .zip(&solutions)
        .filter(|(r, _)| !r.converged)
        .map(|(r, s)| FailedIndex {
            index: IndexPair::new(r.i, r.j),
            reason: match s {
                Ok(_) => "not converged".into(),
                Err(e) => e.clone(),
            },
        })
        .collect();
    let mut errors: Vec<f64> = rows.iter().map(|r| r.error).filter(|e| e.is_finite()).collect();
    errors.sort_by(f64::total_cmp);
    let median_error = match errors.len() {
        0 => f64::NAN,
        k if k % 2 == 1 => errors[k / 2],
        k => 0.5 * (errors[k / 2 - 1] + errors[k / 2]),
    };
    let max_error = errors.last().copied().unwrap_or(f64::NAN);

    if let Some(path) = out {
        let snapshot = manifest.clone();
        manifest.time("write", || table::write(path, GRID_SCHEMA, &snapshot, &rows))?;
    }
    let wall_seconds = manifest.timings.values().sum();
    let summary = SweepSummary {
        schema: SUMMARY_SCHEMA.into(),
        n: p.n(),
        m: p.m(),
        indices: rows.len(),
        converged: rows.len() - failed.len(),
        failed,
        max_error,
        median_error,
        wall_seconds,
        manifest,
    };
    Ok(SweepOutput {
        rows,
        solutions,
        summary,
    })
}
