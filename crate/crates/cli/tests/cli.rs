use std::path::Path;
use std::process::Command;

use approx::assert_relative_eq;
use twopar_cli::table::{self, GridRow, GRID_SCHEMA};
use twopar_cli::{cmd_bench, cmd_check, cmd_gen, cmd_solve, cmd_solve_all, cmd_verify, generate, BenchMode, GenSpec};
use twopar_core::generators::MetricKind;
use twopar_core::metrics::index_error;
use twopar_core::problem::ProblemFile;
use twopar_core::{IndexPair, SolveOptions, SymMatrix, TwoParamProblem};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twopar"))
}

fn diag(d: &[f64]) -> SymMatrix {
    SymMatrix::from_diagonal(d).unwrap()
}

fn write_problem(dir: &Path, name: &str, p: &TwoParamProblem) -> std::path::PathBuf {
    let path = dir.join(name);
    ProblemFile::from_problem(p, None).write(&path).unwrap();
    path
}

fn scalar_fixture(dir: &Path) -> std::path::PathBuf {
    let s = |x: f64| SymMatrix::new(1, vec![x]).unwrap();
    let p = TwoParamProblem::from_matrices([s(5.0), s(-3.0), s(-1.0)], [s(-3.0), s(1.0), s(1.0)], "scalar").unwrap();
    write_problem(dir, "scalar.json", &p)
}

fn diagonal_fixture(dir: &Path) -> (std::path::PathBuf, TwoParamProblem) {
    let p = TwoParamProblem::from_matrices(
        [diag(&[1.0, 2.0]), diag(&[-2.0, -3.0]), diag(&[-1.0, -2.0])],
        [diag(&[0.0, 1.0]), diag(&[1.0, 1.0]), diag(&[1.0, 1.0])],
        "diagonal",
    )
    .unwrap();
    (write_problem(dir, "diag.json", &p), p)
}

/// Eigenvalues of a diagonal problem: one 2×2 linear system per pair of
/// diagonal positions, solved by Cramer's rule.
fn diagonal_spectrum(p: &TwoParamProblem) -> Vec<(f64, f64)> {
    let (e1, e2) = (p.first(), p.second());
    let mut out = Vec::new();
    for k in 0..p.n() {
        for l in 0..p.m() {
            let (a1, b1, c1) = (e1.a()[(k, k)], e1.b()[(k, k)], e1.c()[(k, k)]);
            let (a2, b2, c2) = (e2.a()[(l, l)], e2.b()[(l, l)], e2.c()[(l, l)]);
            let det = b1 * c2 - c1 * b2;
            out.push(((-a1 * c2 + c1 * a2) / det, (-b1 * a2 + a1 * b2) / det));
        }
    }
    out
}

#[test]
fn gen_random_loads_back_equal() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    let spec = GenSpec::Random { n: 10, m: 10, seed: 0 };
    cmd_gen(&spec, &out).unwrap();
    let back = ProblemFile::read(&out).unwrap();
    assert!(back.manifest.is_some());
    let (expected, _) = generate(&spec).unwrap();
    assert_eq!(back.to_problem().unwrap().first().a(), expected.first().a());
    assert_eq!(back.to_problem().unwrap().second().c(), expected.second().c());
}

#[test]
fn gen_diagonal_has_negative_identity_c1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    cmd_gen(&GenSpec::Diagonal { n: 6, m: 6, seed: 1 }, &out).unwrap();
    let p = ProblemFile::read(&out).unwrap().to_problem().unwrap();
    assert_eq!(p.first().c(), &SymMatrix::identity(6).scaled(-1.0));
}

#[test]
fn gen_half_ellipse_passes_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.json");
    let spec = GenSpec::Helmholtz {
        n: 100,
        m: 100,
        metric: MetricKind::HalfEllipse { c: 1.0, r: 1.0 },
    };
    let file = cmd_gen(&spec, &out).unwrap();
    assert!(file.recovery_map.is_some());
    let report = cmd_check(&out, 4096).unwrap();
    assert!(report.ok, "{:?}", report.report);
}

#[test]
fn solve_scalar_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let problem = scalar_fixture(dir.path());
    let trace = dir.path().join("t.csv");
    let out = cmd_solve(&problem, IndexPair::new(1, 1), &SolveOptions::default(), Some(&trace)).unwrap();
    assert!(out.solution.converged);
    assert_relative_eq!(out.solution.lambda, 1.0, epsilon = 1e-12);
    assert_relative_eq!(out.solution.mu, 2.0, epsilon = 1e-12);
    assert_eq!((out.lambda_orig, out.mu_orig), (out.solution.lambda, out.solution.mu));

    let (manifest, rows): (_, Vec<table::TraceRow>) = table::read(&trace, table::TRACE_SCHEMA).unwrap();
    assert_eq!(manifest.unwrap().command, "solve");
    assert_eq!(rows.len(), out.solution.half_steps);
}

#[test]
fn solve_all_diagonal_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let (problem, p) = diagonal_fixture(dir.path());
    let grid = dir.path().join("g.csv");
    let out = cmd_solve_all(&problem, &SolveOptions::default(), 2, Some(&grid)).unwrap();
    assert!(out.summary.all_converged());
    let (_, rows): (_, Vec<GridRow>) = table::read(&grid, GRID_SCHEMA).unwrap();
    assert_eq!(rows.len(), 4);
    let mut expected = diagonal_spectrum(&p);
    for r in &rows {
        let pos = expected
            .iter()
            .position(|&(l, m)| (l - r.lambda).abs() < 1e-10 && (m - r.mu).abs() < 1e-10)
            .unwrap_or_else(|| panic!("row {r:?} not in the spectrum"));
        expected.remove(pos);
        let e = index_error(&p, r.lambda, r.mu, IndexPair::new(r.i, r.j)).unwrap();
        assert!(e.value < 1e-12);
    }
    assert!(expected.is_empty());
}

fn without_manifest(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("# manifest"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn grid_is_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.json");
    cmd_gen(&GenSpec::Random { n: 7, m: 5, seed: 11 }, &problem).unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    cmd_solve_all(&problem, &SolveOptions::default(), 1, Some(&a)).unwrap();
    cmd_solve_all(&problem, &SolveOptions::default(), 8, Some(&b)).unwrap();
    assert_eq!(without_manifest(&a), without_manifest(&b));
}

#[test]
fn verify_matches_and_detects_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let (problem, _) = diagonal_fixture(dir.path());
    let grid = dir.path().join("g.csv");
    cmd_solve_all(&problem, &SolveOptions::default(), 1, Some(&grid)).unwrap();
    let report = cmd_verify(&problem, &grid, 1e-8).unwrap();
    assert!(report.all_matched() && report.oracle_bijective);
    assert!(report.max_dlambda <= 1e-10 && report.max_dmu <= 1e-10);

    let (manifest, mut rows): (_, Vec<GridRow>) = table::read(&grid, GRID_SCHEMA).unwrap();
    rows[2].lambda += 1e-3;
    let bad = dir.path().join("bad.csv");
    table::write(&bad, GRID_SCHEMA, &manifest.unwrap(), &rows).unwrap();
    let report = cmd_verify(&problem, &bad, 1e-8).unwrap();
    assert_eq!(report.unmatched, vec![IndexPair::new(rows[2].i, rows[2].j)]);
    assert_eq!(report.matched, 3);
}

#[test]
fn verify_random_six() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.json");
    cmd_gen(&GenSpec::Random { n: 6, m: 6, seed: 5 }, &problem).unwrap();
    let grid = dir.path().join("g.csv");
    cmd_solve_all(&problem, &SolveOptions::default(), 1, Some(&grid)).unwrap();
    let report = cmd_verify(&problem, &grid, 1e-8).unwrap();
    assert_eq!(report.matched, 36);
}

#[test]
fn bench_rows_and_slopes() {
    let report = cmd_bench(
        &[10, 20, 40],
        &[0],
        &[BenchMode::AlternatingAll, BenchMode::OracleAll],
        &SolveOptions::default(),
        1,
        None,
    )
    .unwrap();
    assert_eq!(report.rows.len(), 6);
    for r in &report.rows {
        assert!(r.max_error <= 1e-7, "{r:?}");
    }
    let slope = |mode| report.slopes.iter().find(|s| s.0 == mode).unwrap().1.unwrap();
    assert!(slope(BenchMode::AlternatingAll) <= slope(BenchMode::OracleAll));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.json");
    let ok = bin().args(["gen", "random", "-n", "6", "--seed", "2", "--out"]).arg(&problem).status().unwrap();
    assert_eq!(ok.code(), Some(0));

    let status = bin()
        .args(["solve"])
        .arg(&problem)
        .args(["2", "2", "--max-sweeps", "1", "--restarts", "0"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));

    let status = bin().args(["solve"]).arg(&problem).args(["7", "1"]).output().unwrap().status;
    assert_eq!(status.code(), Some(3));

    let status = bin().args(["solve", "--no-such-flag"]).output().unwrap().status;
    assert_eq!(status.code(), Some(3));

    let grid = dir.path().join("g.csv");
    let status = bin().arg("solve-all").arg(&problem).arg("--out").arg(&grid).output().unwrap().status;
    assert_eq!(status.code(), Some(0));
    let status = bin()
        .arg("verify")
        .arg(&problem)
        .arg(&grid)
        .env("TWOPAR_ORACLE_CAP", "10")
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(4));
}

#[test]
fn solve_all_summary_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let (problem, _) = diagonal_fixture(dir.path());
    let grid = dir.path().join("g.csv");
    let out = bin().arg("solve-all").arg(&problem).arg("--out").arg(&grid).output().unwrap();
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["schema"], "twopar.summary/1");
    assert_eq!(summary["indices"], 4);
    assert!(summary["max_error"].as_f64().unwrap() < 1e-12);
}
