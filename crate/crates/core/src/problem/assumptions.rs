use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TwoParamProblem;
use crate::linalg::{sym_extreme_eigenvalues, sym_kth_eigenpair, SymMatrix};
use crate::random::unit_vector;

/// Largest `n·m` for which `Δ0` is assembled and checked densely.
pub const DEFAULT_EXHAUSTIVE_THRESHOLD: usize = 4096;

/// Relative margin separating a definite spectrum from zero.
pub(crate) const DEFINITENESS_TOL: f64 = 1e-12;

/// Extreme eigenvalues of a symmetric matrix and whether they have the sign
/// the assumption requires.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Definiteness {
    pub ok: bool,
    pub min: f64,
    pub max: f64,
}

impl Definiteness {
    pub(crate) fn positive(min: f64, max: f64) -> Self {
        let scale = min.abs().max(max.abs());
        Definiteness {
            ok: min > DEFINITENESS_TOL * scale && min > 0.0,
            min,
            max,
        }
    }

    pub(crate) fn negative(min: f64, max: f64) -> Self {
        let scale = min.abs().max(max.abs());
        Definiteness {
            ok: max < -DEFINITENESS_TOL * scale && max < 0.0,
            min,
            max,
        }
    }

    pub(crate) fn of(m: &SymMatrix, positive: bool) -> Self {
        match sym_extreme_eigenvalues(m) {
            Ok((min, max)) if positive => Self::positive(min, max),
            Ok((min, max)) => Self::negative(min, max),
            Err(_) => Definiteness {
                ok: false,
                min: f64::NAN,
                max: f64::NAN,
            },
        }
    }
}

/// Outcome of checking symmetry and the definiteness assumptions
/// (`C1 ≺ 0`, `C2 ≻ 0`, `Δ0 = C1⊗B2 − B1⊗C2 ≻ 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// Exact symmetry of `A1, B1, C1, A2, B2, C2`.
    pub symmetric_ok: [bool; 6],
    pub c1_negdef: Definiteness,
    pub c2_posdef: Definiteness,
    pub delta0_posdef: Definiteness,
    /// `false` when `Δ0` was probed with rank-one forms instead of assembled.
    pub checked_exhaustively: bool,
}

impl AssumptionReport {
    pub fn all_ok(&self) -> bool {
        self.symmetric_ok.iter().all(|&s| s)
            && self.c1_negdef.ok
            && self.c2_posdef.ok
            && self.delta0_posdef.ok
    }
}

fn exactly_symmetric(m: &SymMatrix) -> bool {
    let n = m.order();
    (0..n).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]))
}

/// Checks the assumptions. `Δ0` is assembled when `n·m ≤ exhaustive_threshold`,
/// otherwise its extremes are estimated from rank-one quadratic forms.
pub fn check_assumptions(p: &TwoParamProblem, exhaustive_threshold: usize) -> AssumptionReport {
    let (e1, e2) = (p.first(), p.second());
    let symmetric_ok = [e1.a(), e1.b(), e1.c(), e2.a(), e2.b(), e2.c()].map(exactly_symmetric);
    let c1_negdef = Definiteness::of(e1.c(), false);
    let c2_posdef = Definiteness::of(e2.c(), true);
    let (delta0_posdef, checked_exhaustively) = delta0_definiteness(p, exhaustive_threshold);
    AssumptionReport {
        symmetric_ok,
        c1_negdef,
        c2_posdef,
        delta0_posdef,
        checked_exhaustively,
    }
}

pub(crate) fn delta0_definiteness(p: &TwoParamProblem, exhaustive_threshold: usize) -> (Definiteness, bool) {
    if p.n() * p.m() <= exhaustive_threshold {
        (Definiteness::of(&p.delta0(), true), true)
    } else {
        log::warn!(
            "n·m = {} exceeds {}; Δ0 definiteness estimated from rank-one forms",
            p.n() * p.m(),
            exhaustive_threshold
        );
        let (min, max) = delta0_rank_one_extremes(p, 3, 4, 0x5eed);
        (Definiteness::positive(min, max), false)
    }
}

/// Smallest and largest value of `(u⊗v)ᵀ Δ0 (u⊗v)` over unit `u, v` found by
/// alternating minimization (maximization) from `starts` random starts.
///
/// Every value is attained by a unit rank-one vector, so the returned minimum
/// bounds the smallest eigenvalue of `Δ0` from above.
pub fn delta0_rank_one_extremes(p: &TwoParamProblem, starts: usize, sweeps: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (e1, e2) = (p.first(), p.second());
    let mut best_min = f64::INFINITY;
    let mut best_max = f64::NEG_INFINITY;
    for _ in 0..starts {
        let u0 = unit_vector(&mut rng, p.n());
        let v0 = unit_vector(&mut rng, p.m());
        for maximize in [false, true] {
            let (mut u, mut v) = (u0.clone(), v0.clone());
            let mut value = match p.delta0_form(&u, &v) {
                Ok(x) => x,
                Err(_) => continue,
            };
            for _ in 0..sweeps {
                // for fixed u the form is vᵀ (c1(u) B2 − b1(u) C2) v
                let f1 = match e1.forms(&u) {
                    Ok(f) => f,
                    Err(_) => break,
                };
                let mv = SymMatrix::linear_combination(&[(f1.c, e2.b()), (-f1.b, e2.c())]);
                let k = if maximize { p.m() } else { 1 };
                if let Ok((val, vv)) = sym_kth_eigenpair(&mv, k) {
                    v = vv;
                    value = val;
                }
                // for fixed v: uᵀ (b2(v) C1 − c2(v) B1) u
                let f2 = match e2.forms(&v) {
                    Ok(f) => f,
                    Err(_) => break,
                };
                let mu = SymMatrix::linear_combination(&[(f2.b, e1.c()), (-f2.c, e1.b())]);
                let k = if maximize { p.n() } else { 1 };
                if let Ok((val, uu)) = sym_kth_eigenpair(&mu, k) {
                    u = uu;
                    value = val;
                }
            }
            if maximize {
                best_max = best_max.max(value);
            } else {
                best_min = best_min.min(value);
            }
        }
    }
    (best_min, best_max)
}
