//! Alternating index-targeted solver.
//!
//! Starting from `u0`, each half step fixes one factor and takes the `j`-th
//! (resp. `i`-th) smallest eigenpair of a symmetric-definite pencil in the
//! other factor. `μ` follows from the second equation's quadratic forms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{canonical_sign, lu_solve, norm, normalize, sym_definite_gep_kth, SymMatrix};
use crate::metrics::index_error;
use crate::problem::{IndexPair, TwoParamProblem};
use crate::random::{index_seed, unit_vector};

/// `(xᵀAx, xᵀBx, xᵀCx)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn quadratic_forms(x: &[f64], a: &SymMatrix, b: &SymMatrix, c: &SymMatrix) -> Result<QuadraticForms> {
    if x.len() != a.order() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for matrices of order {}",
            x.len(),
            a.order()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidVector("non-finite entry".into()));
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidVector("zero vector".into()));
    }
    Ok(QuadraticForms {
        a: a.quad_form(x),
        b: b.quad_form(x),
        c: c.quad_form(x),
    })
}

fn unit(mut x: Vec<f64>) -> Vec<f64> {
    normalize(&mut x);
    x
}

/// One step of shifted inverse iteration `(L − λR) y = R x` on the unreduced
/// pencil, followed by the Rayleigh quotient of `y`. Kept only if the
/// residual `‖(L − λR) y‖` decreases.
const POLISH_STEPS: usize = 1;

fn polish(lhs: &SymMatrix, rhs: &SymMatrix, lambda: f64, x: Vec<f64>) -> (f64, Vec<f64>) {
    let residual = |l: f64, y: &[f64]| {
        let ly = lhs.matvec(y);
        let ry = rhs.matvec(y);
        norm(&ly.iter().zip(&ry).map(|(a, b)| a - l * b).collect::<Vec<_>>())
    };
    let (mut lambda, mut x) = (lambda, unit(x));
    let mut r = residual(lambda, &x);
    for _ in 0..POLISH_STEPS {
        let shifted = SymMatrix::linear_combination(&[(1.0, lhs), (-lambda, rhs)]).into_matrix();
        let Ok(y) = lu_solve(shifted, rhs.matvec(&x)) else {
            break;
        };
        if !y.iter().all(|v| v.is_finite()) || norm(&y) == 0.0 {
            break;
        }
        let mut y = unit(y);
        canonical_sign(&mut y);
        let refined = lhs.quad_form(&y) / rhs.quad_form(&y);
        let r_new = residual(refined, &y);
        if r_new >= r {
            break;
        }
        (lambda, x, r) = (refined, y, r_new);
    }
    (lambda, x)
}

/// Fixes `u` and returns the `j`-th smallest eigenpair of
/// `(a1 C2 − c1 A2) v = λ (c1 B2 − b1 C2) v`, with `v` of unit norm.
pub fn step_v(p: &TwoParamProblem, u: &[f64], j: usize) -> Result<(f64, Vec<f64>)> {
    let f1 = p.first().forms(u)?;
    let e2 = p.second();
    let lhs = SymMatrix::linear_combination(&[(f1.a, e2.c()), (-f1.c, e2.a())]);
    let rhs = SymMatrix::linear_combination(&[(f1.c, e2.b()), (-f1.b, e2.c())]);
    let (lambda, v) = sym_definite_gep_kth(&lhs, &rhs, j)?;
    Ok(polish(&lhs, &rhs, lambda, v))
}

/// Fixes `v` and returns the `i`-th smallest eigenpair of
/// `(c2 A1 − a2 C1) u = λ (b2 C1 − c2 B1) u`, with `u` of unit norm.
pub fn step_u(p: &TwoParamProblem, v: &[f64], i: usize) -> Result<(f64, Vec<f64>)> {
    let f2 = p.second().forms(v)?;
    let e1 = p.first();
    let lhs = SymMatrix::linear_combination(&[(f2.c, e1.a()), (-f2.a, e1.c())]);
    let rhs = SymMatrix::linear_combination(&[(f2.b, e1.c()), (-f2.c, e1.b())]);
    let (lambda, u) = sym_definite_gep_kth(&lhs, &rhs, i)?;
    Ok(polish(&lhs, &rhs, lambda, u))
}

/// `μ = −(a + λb)/c`
pub fn mu_from(lambda: f64, f: &QuadraticForms) -> Result<f64> {
    if f.c == 0.0 {
        return Err(Error::DegenerateForm("c = 0 when computing μ".into()));
    }
    Ok(-(f.a + lambda * f.b) / f.c)
}

/// Starting vector for the first attempt. Restarts always draw from the
/// sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    RandomSphere,
    Ones,
    Given(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_sweeps: usize,
    pub tol_lambda: f64,
    pub tol_residual: f64,
    pub seed: u64,
    pub init: Init,
    pub restarts: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_sweeps: 25,
            tol_lambda: 1e-12,
            tol_residual: 1e-10,
            seed: 0,
            init: Init::RandomSphere,
            restarts: 5,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(Error::InvalidOption("max_sweeps must be at least 1".into()));
        }
        if !(self.tol_lambda > 0.0) || !(self.tol_residual > 0.0) {
            return Err(Error::InvalidOption("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// State after one half step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Number of sub-eigenproblems solved so far in this attempt.
    pub half_step: usize,
    pub lambda: f64,
    pub mu: f64,
    pub index_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub index: IndexPair,
    pub lambda: f64,
    pub mu: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub index_error: f64,
    pub half_steps: usize,
    pub sweeps_used: usize,
    /// Number of restarts performed after the first attempt.
    pub restarts_used: usize,
    /// Trace of the returned attempt.
    pub trace: Vec<TraceEntry>,
    pub converged: bool,
}

/// Multiple of `ε·(‖A1 + λB1 + μC1‖ + ‖A2 + λB2 + μC2‖)` below which the
/// index error is rounding noise.
const NOISE_FLOOR_FACTOR: f64 = 16.0;

/// Residual threshold actually used at `(λ, μ)`: `tol_residual`, raised to
/// the rounding level of the two pencils when that is larger.
pub fn effective_residual_tol(p: &TwoParamProblem, lambda: f64, mu: f64, tol_residual: f64) -> f64 {
    let scale = p.first().scale(lambda, mu) + p.second().scale(lambda, mu);
    tol_residual.max(NOISE_FLOOR_FACTOR * f64::EPSILON * scale)
}

fn initial_vector(n: usize, init: &Init, seed: u64) -> Result<Vec<f64>> {
    match init {
        Init::RandomSphere => Ok(unit_vector(&mut ChaCha8Rng::seed_from_u64(seed), n)),
        Init::Ones => Ok(unit(vec![1.0; n])),
        Init::Given(u) => {
            if u.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "initial vector has length {}, expected {n}",
                    u.len()
                )));
            }
            if u.iter().any(|x| !x.is_finite()) || u.iter().all(|&x| x == 0.0) {
                return Err(Error::InvalidVector("initial vector must be finite and nonzero".into()));
            }
            Ok(unit(u.clone()))
        }
    }
}

fn attempt(p: &TwoParamProblem, idx: IndexPair, opts: &SolveOptions, mut u: Vec<f64>) -> Result<Solution> {
    let mut v = Vec::new();
    let mut trace = Vec::new();
    let mut previous: Option<f64> = None;
    let mut previous_step = f64::INFINITY;
    let (mut lambda, mut mu, mut err) = (f64::NAN, f64::NAN, f64::INFINITY);
    let mut converged = false;
    let mut half = 0;
    'sweeps: for _ in 0..opts.max_sweeps {
        for update_v in [true, false] {
            half += 1;
            if update_v {
                let (l, x) = step_v(p, &u, idx.j)?;
                lambda = l;
                v = x;
            } else {
                let (l, x) = step_u(p, &v, idx.i)?;
                lambda = l;
                u = x;
            }
            mu = mu_from(lambda, &p.second().forms(&v)?)?;
            err = index_error(p, lambda, mu, idx)?.value;
            trace.push(TraceEntry {
                half_step: half,
                lambda,
                mu,
                index_error: err,
            });
            if let Some(prev) = previous {
                let step = (lambda - prev).abs();
                let settled = step <= opts.tol_lambda * lambda.abs().max(1.0) || step >= previous_step;
                if settled && err <= effective_residual_tol(p, lambda, mu, opts.tol_residual) {
                    converged = true;
                    break 'sweeps;
                }
                previous_step = step;
            }
            previous = Some(lambda);
        }
    }
    Ok(Solution {
        index: idx,
        lambda,
        mu,
        u,
        v,
        index_error: err,
        half_steps: half,
        sweeps_used: half.div_ceil(2),
        restarts_used: 0,
        trace,
        converged,
    })
}

/// Runs the alternating iteration for index `idx`.
///
/// The problem is expected to satisfy `C1 ≺ 0`, `C2 ≻ 0`, `Δ0 ≻ 0`; a
/// violation surfaces as an error from the sub-eigenproblems. If an attempt
/// does not converge within `max_sweeps`, up to `restarts` further attempts
/// are made from seeded random vectors, and the attempt with the smallest
/// final index error is returned with `converged = false`.
pub fn solve_index(p: &TwoParamProblem, idx: IndexPair, opts: &SolveOptions) -> Result<Solution> {
    opts.validate()?;
    p.check_index(idx)?;
    let u0 = initial_vector(p.n(), &opts.init, index_seed(opts.seed, idx.i, idx.j, 0))?;
    let mut best = attempt(p, idx, opts, u0)?;
    for restart in 1..=opts.restarts {
        if best.converged {
            break;
        }
        log::debug!("index {idx}: restart {restart}");
        let u0 = initial_vector(p.n(), &Init::RandomSphere, index_seed(opts.seed, idx.i, idx.j, restart))?;
        let mut next = attempt(p, idx, opts, u0)?;
        next.restarts_used = restart;
        if next.converged || next.index_error < best.index_error {
            best = next;
        } else {
            best.restarts_used = restart;
        }
    }
    if !best.converged {
        log::warn!(
            "index {idx}: no convergence after {} restarts (index error {:.3e})",
            best.restarts_used,
            best.index_error
        );
    }
    Ok(best)
}

/// Solves the given indices on a pool of `workers` threads, keeping the
/// outcome of each index separately. Results are in the order of `indices`
/// and do not depend on `workers`.
pub fn solve_each(
    p: &TwoParamProblem,
    indices: &[IndexPair],
    opts: &SolveOptions,
    workers: usize,
) -> Result<Vec<Result<Solution>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidOption(format!("thread pool: {e}")))?;
    Ok(pool.install(|| indices.par_iter().map(|&idx| solve_index(p, idx, opts)).collect()))
}

/// As [`solve_each`], failing on the first index that errors.
pub fn solve_indices(
    p: &TwoParamProblem,
    indices: &[IndexPair],
    opts: &SolveOptions,
    workers: usize,
) -> Result<Vec<Solution>> {
    solve_each(p, indices, opts, workers)?.into_iter().collect()
}

/// Solves every index, sorted by `(i, j)`.
pub fn solve_all(p: &TwoParamProblem, opts: &SolveOptions, workers: usize) -> Result<Vec<Solution>> {
    let indices: Vec<IndexPair> = IndexPair::all(p.n(), p.m()).collect();
    solve_indices(p, &indices, opts, workers)
}
