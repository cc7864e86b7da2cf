use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use twopar_core::generators::random_definite_problem;
use twopar_core::metrics::index_error;
use twopar_core::oracle::oracle_solve_all_with_cap;
use twopar_core::{solve_all, SolveOptions};

use super::oracle_cap;
use crate::error::{CliError, Result};
use crate::manifest::RunManifest;
use crate::table::{self, BENCH_SCHEMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BenchMode {
    /// Alternating solver over every index.
    AlternatingAll,
    /// Dense Kronecker oracle.
    OracleAll,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub mode: BenchMode,
    pub seed: u64,
    pub wall_seconds: f64,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: String,
    pub manifest: RunManifest,
    pub rows: Vec<BenchRow>,
    /// Log-log slope of wall time against `n` over the two largest sizes.
    pub slopes: Vec<(BenchMode, Option<f64>)>,
}

/// Times all-index solves of random `n × n` problems.
pub fn cmd_bench(
    sizes: &[usize],
    seeds: &[u64],
    modes: &[BenchMode],
    opts: &SolveOptions,
    workers: usize,
    out: Option<&Path>,
) -> Result<BenchReport> {
    if sizes.is_empty() || seeds.is_empty() || modes.is_empty() || sizes.contains(&0) {
        return Err(CliError::Invalid("bench needs positive sizes, seeds and modes".into()));
    }
    let cap = oracle_cap()?;
    let params = serde_json::json!({
        "sizes": sizes,
        "seeds": seeds,
        "modes": modes,
        "options": opts,
        "workers": workers,
        "oracle_cap": cap,
    });
    let mut manifest = RunManifest::new("bench", params, opts.seed);
    let mut rows = Vec::new();
    for &n in sizes {
        for &seed in seeds {
            let p = random_definite_problem(n, n, seed);
            for &mode in modes {
                let start = Instant::now();
                let max_error = match mode {
                    BenchMode::AlternatingAll => solve_all(&p, opts, workers)?
                        .iter()
                        .fold(0.0f64, |acc, s| acc.max(s.index_error)),
                    BenchMode::OracleAll => {
                        let spectrum = oracle_solve_all_with_cap(&p, cap)?;
                        let mut worst = 0.0f64;
                        for r in &spectrum.records {
                            worst = worst.max(index_error(&p, r.lambda, r.mu, r.index)?.value);
                        }
                        worst
                    }
                };
                let wall_seconds = start.elapsed().as_secs_f64();
                log::info!("bench n={n} seed={seed} {mode:?}: {wall_seconds:.3}s, max error {max_error:e}");
                rows.push(BenchRow {
                    n,
                    mode,
                    seed,
                    wall_seconds,
                    max_error,
                });
            }
        }
    }
    *manifest.timings.entry("bench".into()).or_default() += rows.iter().map(|r| r.wall_seconds).sum::<f64>();
    if let Some(path) = out {
        table::write(path, BENCH_SCHEMA, &manifest, &rows)?;
    }
    let slopes = modes.iter().map(|&mode| (mode, loglog_slope(&rows, mode))).collect();
    Ok(BenchReport {
        schema: "twopar.bench-summary/1".into(),
        manifest,
        rows,
        slopes,
    })
}

/// Slope of `log(mean wall time)` against `log n` between the two largest
/// sizes measured for `mode`.
pub fn loglog_slope(rows: &[BenchRow], mode: BenchMode) -> Option<f64> {
    let mut sizes: Vec<usize> = rows.iter().filter(|r| r.mode == mode).map(|r| r.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let [.., n1, n2] = sizes[..] else {
        return None;
    };
    let mean = |n: usize| {
        let t: Vec<f64> = rows
            .iter()
            .filter(|r| r.mode == mode && r.n == n)
            .map(|r| r.wall_seconds)
            .collect();
        t.iter().sum::<f64>() / t.len() as f64
    };
    let (t1, t2) = (mean(n1), mean(n2));
    if !(t1 > 0.0 && t2 > 0.0) {
        return None;
    }
    Some((t2 / t1).ln() / (n2 as f64 / n1 as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn row(n: usize, mode: BenchMode, t: f64) -> BenchRow {
        BenchRow {
            n,
            mode,
            seed: 0,
            wall_seconds: t,
            max_error: 0.0,
        }
    }

    #[test]
    fn slope_uses_the_two_largest_sizes() {
        let rows = vec![
            row(10, BenchMode::OracleAll, 5.0),
            row(20, BenchMode::OracleAll, 1.0),
            row(40, BenchMode::OracleAll, 64.0),
            row(40, BenchMode::AlternatingAll, 1.0),
        ];
        assert_relative_eq!(loglog_slope(&rows, BenchMode::OracleAll).unwrap(), 6.0, epsilon = 1e-12);
        assert_eq!(loglog_slope(&rows, BenchMode::AlternatingAll), None);
    }

    #[test]
    fn slope_averages_over_seeds() {
        let rows = vec![
            row(10, BenchMode::AlternatingAll, 1.0),
            row(10, BenchMode::AlternatingAll, 3.0),
            row(20, BenchMode::AlternatingAll, 8.0),
        ];
        assert_relative_eq!(loglog_slope(&rows, BenchMode::AlternatingAll).unwrap(), 2.0, epsilon = 1e-12);
    }
}
