mod bench;
mod check;
mod gen;
mod solve;
mod verify;

use std::path::Path;

use twopar_core::oracle::DEFAULT_ORACLE_CAP;
use twopar_core::problem::ProblemFile;
use twopar_core::{RecoveryMap, TwoParamProblem};

use crate::error::{CliError, Result};

pub use bench::{cmd_bench, loglog_slope, BenchMode, BenchReport, BenchRow};
pub use check::{cmd_check, CheckReport};
pub use gen::{cmd_gen, generate, GenSpec};
pub use solve::{cmd_solve, cmd_solve_all, sweep, SolveOutput, SweepOutput, SweepSummary};
pub use verify::{cmd_verify, VerifyReport};

/// Environment variable overriding the oracle's bound on `n·m`.
pub const ORACLE_CAP_ENV: &str = "TWOPAR_ORACLE_CAP";

pub fn oracle_cap() -> Result<usize> {
    match std::env::var(ORACLE_CAP_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Invalid(format!("{ORACLE_CAP_ENV}={s:?} is not a count"))),
        Err(_) => Ok(DEFAULT_ORACLE_CAP),
    }
}

pub(crate) fn load_problem(path: &Path) -> Result<(TwoParamProblem, RecoveryMap)> {
    let file = ProblemFile::read(path)?;
    let problem = file.to_problem()?;
    Ok((problem, file.recovery_map.unwrap_or_default()))
}
