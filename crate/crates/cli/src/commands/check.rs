use std::path::Path;

use serde::{Deserialize, Serialize};
use twopar_core::problem::{check_assumptions, AssumptionReport};

use super::load_problem;
use crate::error::Result;
use crate::manifest::RunManifest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub schema: String,
    pub manifest: RunManifest,
    pub ok: bool,
    pub report: AssumptionReport,
}

pub fn cmd_check(problem: &Path, exhaustive_threshold: usize) -> Result<CheckReport> {
    let params = serde_json::json!({
        "problem": problem.display().to_string(),
        "exhaustive_threshold": exhaustive_threshold,
    });
    let mut manifest = RunManifest::new("check", params, 0);
    let (p, _) = manifest.time("load", || load_problem(problem))?;
    let report = manifest.time("check", || check_assumptions(&p, exhaustive_threshold));
    Ok(CheckReport {
        schema: "twopar.check/1".into(),
        manifest,
        ok: report.all_ok(),
        report,
    })
}
