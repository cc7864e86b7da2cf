use std::path::Path;

use serde::{Deserialize, Serialize};
use twopar_core::generators::{builtin_metric, diagonal_variant, random_definite_problem, separable_helmholtz, MetricKind};
use twopar_core::problem::ProblemFile;
use twopar_core::{RecoveryMap, TwoParamProblem};

use crate::error::{CliError, Result};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum GenSpec {
    Random { n: usize, m: usize, seed: u64 },
    Diagonal { n: usize, m: usize, seed: u64 },
    /// Finite-difference Helmholtz problem on an `n × m` interior grid.
    Helmholtz { n: usize, m: usize, metric: MetricKind },
}

impl GenSpec {
    fn seed(&self) -> u64 {
        match *self {
            GenSpec::Random { seed, .. } | GenSpec::Diagonal { seed, .. } => seed,
            GenSpec::Helmholtz { .. } => 0,
        }
    }
}

pub fn generate(spec: &GenSpec) -> Result<(TwoParamProblem, Option<RecoveryMap>)> {
    let dims_ok = |n: usize, m: usize| {
        if n == 0 || m == 0 {
            Err(CliError::Invalid(format!("problem dimensions must be positive, got {n}×{m}")))
        } else {
            Ok(())
        }
    };
    match spec {
        &GenSpec::Random { n, m, seed } => {
            dims_ok(n, m)?;
            Ok((random_definite_problem(n, m, seed), None))
        }
        &GenSpec::Diagonal { n, m, seed } => {
            dims_ok(n, m)?;
            Ok((diagonal_variant(n, m, seed), None))
        }
        GenSpec::Helmholtz { n, m, metric } => {
            let (metric, disc) = builtin_metric(metric, *n, *m)?;
            let (p, map) = separable_helmholtz(&metric, &disc)?;
            Ok((p, Some(map)))
        }
    }
}

/// Generates a problem and writes it as JSON to `out`.
pub fn cmd_gen(spec: &GenSpec, out: &Path) -> Result<ProblemFile> {
    let params = serde_json::to_value(spec).expect("spec serializes");
    let mut manifest = RunManifest::new("gen", params, spec.seed());
    let (problem, map) = manifest.time("generate", || generate(spec))?;
    let mut file = ProblemFile::from_problem(&problem, map);
    file.manifest = Some(manifest.to_json_value());
    file.write(out)?;
    Ok(file)
}
