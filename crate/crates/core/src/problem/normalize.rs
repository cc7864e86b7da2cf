use serde::{Deserialize, Serialize};

use super::assumptions::{check_assumptions, delta0_definiteness, Definiteness, DEFAULT_EXHAUSTIVE_THRESHOLD, DEFINITENESS_TOL};
use super::TwoParamProblem;
use crate::error::{Error, Result};
use crate::linalg::{sym_definite_gep_kth, sym_extreme_eigenvalues, sym_kth_eigenpair};

/// Affine map from the eigenvalues of a transformed problem back to the
/// original ones: `λ = b1 λ̃ + c1 μ̃`, `μ = b2 λ̃ + c2 μ̃`.
///
/// The coefficients already contain every sign flip. `lambda_sign`,
/// `mu_sign` and `swap` record which flips and whether the equations were
/// exchanged; the latter only affects which factor is `u` and which is `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryMap {
    pub b1: f64,
    pub b2: f64,
    pub c1: f64,
    pub c2: f64,
    pub lambda_sign: f64,
    #[serde(default = "one")]
    pub mu_sign: f64,
    pub swap: bool,
}

fn one() -> f64 {
    1.0
}

impl Default for RecoveryMap {
    fn default() -> Self {
        RecoveryMap::identity()
    }
}

impl RecoveryMap {
    pub fn identity() -> Self {
        RecoveryMap {
            b1: 1.0,
            b2: 0.0,
            c1: 0.0,
            c2: 1.0,
            lambda_sign: 1.0,
            mu_sign: 1.0,
            swap: false,
        }
    }

    /// Map for the substitution `(λ, μ)ᵀ = T (λ̃, μ̃)ᵀ`.
    pub fn from_matrix(t: [[f64; 2]; 2]) -> Self {
        RecoveryMap {
            b1: t[0][0],
            c1: t[0][1],
            b2: t[1][0],
            c2: t[1][1],
            ..RecoveryMap::identity()
        }
    }

    pub fn negate_lambda() -> Self {
        RecoveryMap {
            b1: -1.0,
            lambda_sign: -1.0,
            ..RecoveryMap::identity()
        }
    }

    pub fn negate_mu() -> Self {
        RecoveryMap {
            c2: -1.0,
            mu_sign: -1.0,
            ..RecoveryMap::identity()
        }
    }

    pub fn swap_equations() -> Self {
        RecoveryMap {
            swap: true,
            ..RecoveryMap::identity()
        }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.b1, self.c1], [self.b2, self.c2]]
    }

    pub fn determinant(&self) -> f64 {
        self.b1 * self.c2 - self.c1 * self.b2
    }

    /// Rejects maps whose 2×2 matrix is numerically singular.
    pub fn validate(&self) -> Result<()> {
        let scale = [self.b1, self.b2, self.c1, self.c2]
            .iter()
            .fold(0.0f64, |acc, x| acc.max(x.abs()));
        if !(self.determinant().abs() > 1e-12 * scale * scale) {
            return Err(Error::Format(format!(
                "recovery map is singular (det = {})",
                self.determinant()
            )));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        *self == RecoveryMap::identity()
    }

    /// The map of `self` followed by `next`: if `P' = self(P)` and
    /// `P'' = next(P')`, the result recovers eigenvalues of `P` from `P''`.
    pub fn then(&self, next: &RecoveryMap) -> RecoveryMap {
        let a = self.matrix();
        let b = next.matrix();
        let mut t = [[0.0; 2]; 2];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        RecoveryMap {
            lambda_sign: self.lambda_sign * next.lambda_sign,
            mu_sign: self.mu_sign * next.mu_sign,
            swap: self.swap ^ next.swap,
            ..RecoveryMap::from_matrix(t)
        }
    }

    pub fn apply(&self, (lambda, mu): (f64, f64)) -> (f64, f64) {
        (
            self.b1 * lambda + self.c1 * mu,
            self.b2 * lambda + self.c2 * mu,
        )
    }

    /// Orders the eigenvector factors as in the original problem.
    pub fn recover_vectors(&self, u: Vec<f64>, v: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
        if self.swap {
            (v, u)
        } else {
            (u, v)
        }
    }

    /// Applies the transformation this map undoes: first the equation swap,
    /// then the parameter substitution.
    pub fn transform(&self, p: &TwoParamProblem) -> TwoParamProblem {
        let p = if self.swap { p.swapped() } else { p.clone() };
        p.substituted(&self.matrix())
    }
}

pub fn recover_eigenvalue(map: &RecoveryMap, lm: (f64, f64)) -> (f64, f64) {
    map.apply(lm)
}

/// Sign-only normalizations tried before the general shifts, in order:
/// `(swap, negate λ, negate μ)`.
const SIGN_CANDIDATES: [(bool, bool, bool); 8] = [
    (false, false, false),
    (true, false, false),
    (false, true, false),
    (false, false, true),
    (true, true, false),
    (true, false, true),
    (false, true, true),
    (true, true, true),
];

fn sign_map(swap: bool, negate_lambda: bool, negate_mu: bool) -> RecoveryMap {
    let mut map = if swap {
        RecoveryMap::swap_equations()
    } else {
        RecoveryMap::identity()
    };
    if negate_lambda {
        map = map.then(&RecoveryMap::negate_lambda());
    }
    if negate_mu {
        map = map.then(&RecoveryMap::negate_mu());
    }
    map
}

fn c_signs_ok(p: &TwoParamProblem) -> bool {
    Definiteness::of(p.first().c(), false).ok && Definiteness::of(p.second().c(), true).ok
}

/// Transforms a right-definite problem so that `C1 ≺ 0`, `C2 ≻ 0` and
/// `Δ0 ≻ 0`, returning the transformed problem and the map recovering the
/// original eigenvalues.
///
/// Pure sign changes (equation swap, `λ`/`μ` negation) are tried first. If
/// none suffices, `B` is shifted by a multiple of `C` so that `B1 ≺ 0`, and
/// then `C` by a multiple of `B` using the minimal ratio
/// `ρ = min uᵀC1u / uᵀB1u` with margin `ε = 1e-2·max(1, |ρ|)`; `ε` is reduced
/// tenfold while the shifted `C2` fails to be definite.
pub fn make_definite(p: &TwoParamProblem) -> Result<(TwoParamProblem, RecoveryMap)> {
    let threshold = DEFAULT_EXHAUSTIVE_THRESHOLD;
    let (delta0, _) = delta0_definiteness(p, threshold);
    let delta0_positive = delta0.ok;
    let delta0_negative = Definiteness::negative(delta0.min, delta0.max).ok;
    if !delta0_positive && !delta0_negative {
        return Err(Error::NotRightDefinite(format!(
            "Δ0 has eigenvalues of both signs (min {:.3e}, max {:.3e})",
            delta0.min, delta0.max
        )));
    }

    for (swap, nl, nm) in SIGN_CANDIDATES {
        // each of the three operations flips the sign of Δ0
        let flips = swap as u8 + nl as u8 + nm as u8;
        if (flips % 2 == 0) != delta0_positive {
            continue;
        }
        let map = sign_map(swap, nl, nm);
        let q = map.transform(p);
        if c_signs_ok(&q) {
            return Ok((q, map));
        }
    }

    let mut map = if delta0_negative {
        RecoveryMap::swap_equations()
    } else {
        RecoveryMap::identity()
    };
    let mut q = map.transform(p);

    // B-shift: B ← B − (b2(v)/c2(v)) C makes B1 definite.
    if !Definiteness::of(q.first().b(), false).ok {
        let (cmin, cmax) = sym_extreme_eigenvalues(q.second().c())?;
        let scale = cmin.abs().max(cmax.abs());
        if cmax <= DEFINITENESS_TOL * scale && cmin >= -DEFINITENESS_TOL * scale {
            // C2 vanishes, so Δ0 = C1⊗B2 and C1 is definite: move it to the
            // second equation. The swap and the λ negation cancel on Δ0.
            log::warn!("C2 is numerically zero; exchanging the equations before shifting");
            let step = RecoveryMap::swap_equations().then(&RecoveryMap::negate_lambda());
            q = step.transform(&q);
            map = map.then(&step);
        }
        let (cmin, cmax) = sym_extreme_eigenvalues(q.second().c())?;
        let k = if cmax > -cmin { q.m() } else { 1 };
        if cmax <= 0.0 && cmin >= 0.0 {
            return Err(Error::NotRightDefinite("C1 and C2 both vanish".into()));
        }
        if cmax < 0.0 {
            log::warn!("C2 is negative semidefinite; shifting along its most negative direction");
        }
        let (_, v) = sym_kth_eigenpair(q.second().c(), k)?;
        let f2 = q.second().forms(&v)?;
        let t = f2.b / f2.c;
        let mut step = RecoveryMap::from_matrix([[1.0, 0.0], [-t, 1.0]]);
        if f2.c < 0.0 {
            // B1 came out positive definite
            step = step.then(&RecoveryMap::negate_lambda()).then(&RecoveryMap::negate_mu());
        }
        q = step.transform(&q);
        map = map.then(&step);
        if !Definiteness::of(q.first().b(), false).ok {
            return Err(Error::NotRightDefinite(
                "could not make B1 negative definite".into(),
            ));
        }
    }

    // C-shift: C ← C − (ρ − ε) B.
    if !c_signs_ok(&q) {
        let n = q.n();
        let minus_b1 = q.first().b().scaled(-1.0);
        let (sigma_max, _) = sym_definite_gep_kth(q.first().c(), &minus_b1, n)?;
        let rho = -sigma_max;
        let mut eps = 1e-2 * rho.abs().max(1.0);
        let mut accepted = None;
        for _ in 0..12 {
            let s = rho - eps;
            let step = RecoveryMap::from_matrix([[1.0, -s], [0.0, 1.0]]);
            let candidate = step.transform(&q);
            if c_signs_ok(&candidate) {
                accepted = Some((candidate, step));
                break;
            }
            eps /= 10.0;
        }
        let (candidate, step) = accepted.ok_or_else(|| {
            Error::NotRightDefinite("no shift margin makes C1 and C2 definite".into())
        })?;
        q = candidate;
        map = map.then(&step);
    }

    let report = check_assumptions(&q, threshold);
    if !report.all_ok() {
        return Err(Error::NotRightDefinite(format!(
            "normalized problem still violates the assumptions: {report:?}"
        )));
    }
    Ok((q, map))
}
