use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twopar_core::generators::MetricKind;
use twopar_core::problem::DEFAULT_EXHAUSTIVE_THRESHOLD;
use twopar_core::{IndexPair, Init, SolveOptions};
use twopar_cli::{
    cmd_bench, cmd_check, cmd_gen, cmd_solve, cmd_solve_all, cmd_verify, exit, BenchMode, CliError, GenSpec,
};

/// Solver for right-definite two-parameter eigenvalue problems.
#[derive(Parser)]
#[command(name = "twopar", version)]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem file.
    Gen(GenArgs),
    /// Solve a single index.
    Solve {
        problem: PathBuf,
        i: usize,
        j: usize,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the per-half-step trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the solution JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every index; the grid goes to --out, the summary to stdout.
    SolveAll {
        problem: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a solve-all grid with the dense oracle.
    Verify {
        problem: PathBuf,
        results: PathBuf,
        /// Relative tolerance on λ and μ.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time all-index solves of random problems.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [10, 20, 40])]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0])]
        seeds: Vec<u64>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [BenchMode::AlternatingAll, BenchMode::OracleAll])]
        modes: Vec<BenchMode>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Write the timing CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report whether a problem satisfies the definiteness assumptions.
    Check {
        problem: PathBuf,
        /// Assemble Δ0 densely up to this n·m, probe it above.
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_THRESHOLD)]
        exhaustive_threshold: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Random,
    Diagonal,
    Helmholtz,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricName {
    Rectangle,
    HalfEllipse,
    SquaredMap,
    ExpMap,
    CoshMap,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: GenKind,
    #[arg(short)]
    n: usize,
    /// Defaults to n.
    #[arg(short)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "half-ellipse")]
    metric: MetricName,
    /// Domain a,b,c,d of (a, b) × (c, d); only the x interval is used by
    /// the cosh map.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    domain: Option<Vec<f64>>,
    /// Focal distance of the half ellipse.
    #[arg(long, default_value_t = 1.0)]
    focal: f64,
    /// Radial extent of the half ellipse in elliptic coordinates.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Constant of the exponential map.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

impl GenArgs {
    fn spec(&self) -> GenSpec {
        let n = self.n;
        let m = self.m.unwrap_or(n);
        let seed = self.seed;
        match self.kind {
            GenKind::Random => GenSpec::Random { n, m, seed },
            GenKind::Diagonal => GenSpec::Diagonal { n, m, seed },
            GenKind::Helmholtz => GenSpec::Helmholtz {
                n,
                m,
                metric: self.metric(),
            },
        }
    }

    fn metric(&self) -> MetricKind {
        let dom = |default: [f64; 4]| match self.domain.as_deref() {
            Some(&[a, b, c, d]) => [a, b, c, d],
            _ => default,
        };
        match self.metric {
            MetricName::Rectangle => {
                let [a, b, c, d] = dom([0.0, 1.0, 0.0, 1.0]);
                MetricKind::Rectangle { a, b, c, d }
            }
            MetricName::HalfEllipse => MetricKind::HalfEllipse {
                c: self.focal,
                r: self.radius,
            },
            MetricName::SquaredMap => {
                let [a, b, c, d] = dom([1.0, 2.0, 1.0, 2.0]);
                MetricKind::SquaredMap { a, b, c, d }
            }
            MetricName::ExpMap => {
                let [a, b, c, d] = dom([0.0, 1.0, 0.0, PI]);
                MetricKind::ExpMap {
                    a,
                    b,
                    c,
                    d,
                    kappa: self.kappa,
                }
            }
            MetricName::CoshMap => {
                let [a, b, ..] = dom([0.0, 1.0, 0.0, PI]);
                MetricKind::CoshMap { a, b }
            }
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    tol_lambda: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol_residual: f64,
    #[arg(long, default_value_t = 25)]
    max_sweeps: usize,
    /// Random restarts after a non-converged attempt.
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    /// Start from the all-ones vector instead of a random one.
    #[arg(long)]
    ones: bool,
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            max_sweeps: self.max_sweeps,
            tol_lambda: self.tol_lambda,
            tol_residual: self.tol_residual,
            seed: self.seed,
            init: if self.ones { Init::Ones } else { Init::RandomSphere },
            restarts: self.restarts,
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    // a closed pipe on stdout is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn emit<T: serde::Serialize>(value: &T, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
            std::fs::write(path, text).map_err(|e| CliError::io(path, e))
        }
        None => {
            print_json(value);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Gen(args) => {
            let file = cmd_gen(&args.spec(), &args.out)?;
            eprintln!("wrote {} ({}×{})", args.out.display(), file.n, file.m);
            Ok(exit::OK)
        }
        Command::Solve {
            problem,
            i,
            j,
            solver,
            trace,
            out,
        } => {
            let output = cmd_solve(&problem, IndexPair::new(i, j), &solver.options(), trace.as_deref())?;
            emit(&output, out.as_ref())?;
            Ok(if output.solution.converged { exit::OK } else { exit::NOT_CONVERGED })
        }
        Command::SolveAll {
            problem,
            solver,
            workers,
            out,
        } => {
            let output = cmd_solve_all(&problem, &solver.options(), workers, Some(&out))?;
            print_json(&output.summary);
            Ok(if output.summary.all_converged() { exit::OK } else { exit::NOT_CONVERGED })
        }
        Command::Verify {
            problem,
            results,
            tol,
            out,
        } => {
            let report = cmd_verify(&problem, &results, tol)?;
            emit(&report, out.as_ref())?;
            Ok(if report.all_matched() { exit::OK } else { exit::FAILURE })
        }
        Command::Bench {
            sizes,
            seeds,
            modes,
            solver,
            workers,
            out,
        } => {
            let report = cmd_bench(&sizes, &seeds, &modes, &solver.options(), workers, out.as_deref())?;
            print_json(&report);
            Ok(exit::OK)
        }
        Command::Check {
            problem,
            exhaustive_threshold,
        } => {
            let report = cmd_check(&problem, exhaustive_threshold)?;
            print_json(&report);
            Ok(if report.ok { exit::OK } else { exit::INVALID_INPUT })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(exit::INVALID_INPUT as u8);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
