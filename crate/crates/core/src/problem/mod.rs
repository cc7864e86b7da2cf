//! Problem container, assumption checks, sign normalization and the problem
//! file format.

mod assumptions;
mod io;
mod normalize;

pub use assumptions::{check_assumptions, AssumptionReport, Definiteness, DEFAULT_EXHAUSTIVE_THRESHOLD};
pub use io::{ProblemFile, PROBLEM_SCHEMA};
pub use normalize::{make_definite, recover_eigenvalue, RecoveryMap};

use serde::{Deserialize, Serialize};

use crate::alternating::{quadratic_forms, QuadraticForms};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// Target index `(i, j)`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexPair {
    pub i: usize,
    pub j: usize,
}

impl IndexPair {
    pub fn new(i: usize, j: usize) -> Self {
        IndexPair { i, j }
    }

    /// Every index of an `n × m` problem in row-major order.
    pub fn all(n: usize, m: usize) -> impl Iterator<Item = IndexPair> {
        (1..=n).flat_map(move |i| (1..=m).map(move |j| IndexPair { i, j }))
    }
}

impl std::fmt::Display for IndexPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// One equation `(A + λB + μC) x = 0` of a two-parameter problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Pencil {
    a: SymMatrix,
    b: SymMatrix,
    c: SymMatrix,
}

impl Pencil {
    pub fn new(a: SymMatrix, b: SymMatrix, c: SymMatrix) -> Result<Self> {
        let n = a.order();
        if b.order() != n || c.order() != n {
            return Err(Error::DimensionMismatch(format!(
                "pencil matrices have orders {}, {}, {}",
                n,
                b.order(),
                c.order()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidMatrix("empty pencil".into()));
        }
        Ok(Pencil { a, b, c })
    }

    pub fn order(&self) -> usize {
        self.a.order()
    }

    pub fn a(&self) -> &SymMatrix {
        &self.a
    }

    pub fn b(&self) -> &SymMatrix {
        &self.b
    }

    pub fn c(&self) -> &SymMatrix {
        &self.c
    }

    /// `A + λB + μC`
    pub fn at(&self, lambda: f64, mu: f64) -> SymMatrix {
        SymMatrix::linear_combination(&[(1.0, &self.a), (lambda, &self.b), (mu, &self.c)])
    }

    pub fn forms(&self, x: &[f64]) -> Result<QuadraticForms> {
        quadratic_forms(x, &self.a, &self.b, &self.c)
    }

    /// `‖A‖_F + |λ|‖B‖_F + |μ|‖C‖_F`, the natural size of `A + λB + μC`.
    pub fn scale(&self, lambda: f64, mu: f64) -> f64 {
        self.a.frobenius_norm()
            + lambda.abs() * self.b.frobenius_norm()
            + mu.abs() * self.c.frobenius_norm()
    }

    /// Replaces `(B, C)` by `(t11 B + t21 C, t12 B + t22 C)`.
    pub(crate) fn substitute(&self, t: &[[f64; 2]; 2]) -> Pencil {
        Pencil {
            a: self.a.clone(),
            b: SymMatrix::linear_combination(&[(t[0][0], &self.b), (t[1][0], &self.c)]),
            c: SymMatrix::linear_combination(&[(t[0][1], &self.b), (t[1][1], &self.c)]),
        }
    }
}

/// Right-definite two-parameter eigenvalue problem
///
/// ```text
/// (A1 + λ B1 + μ C1) u = 0
/// (A2 + λ B2 + μ C2) v = 0
/// ```
///
/// with `A1, B1, C1` of order `n` and `A2, B2, C2` of order `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoParamProblem {
    first: Pencil,
    second: Pencil,
    pub label: String,
}

impl TwoParamProblem {
    pub fn new(first: Pencil, second: Pencil, label: impl Into<String>) -> Self {
        TwoParamProblem {
            first,
            second,
            label: label.into(),
        }
    }

    /// Builds a problem from the six matrices.
    pub fn from_matrices(
        [a1, b1, c1]: [SymMatrix; 3],
        [a2, b2, c2]: [SymMatrix; 3],
        label: impl Into<String>,
    ) -> Result<Self> {
        Ok(Self::new(Pencil::new(a1, b1, c1)?, Pencil::new(a2, b2, c2)?, label))
    }

    pub fn first(&self) -> &Pencil {
        &self.first
    }

    pub fn second(&self) -> &Pencil {
        &self.second
    }

    pub fn n(&self) -> usize {
        self.first.order()
    }

    pub fn m(&self) -> usize {
        self.second.order()
    }

    pub fn contains(&self, idx: IndexPair) -> bool {
        (1..=self.n()).contains(&idx.i) && (1..=self.m()).contains(&idx.j)
    }

    pub(crate) fn check_index(&self, idx: IndexPair) -> Result<()> {
        if !(1..=self.n()).contains(&idx.i) {
            return Err(Error::IndexOutOfRange {
                index: idx.i,
                order: self.n(),
            });
        }
        if !(1..=self.m()).contains(&idx.j) {
            return Err(Error::IndexOutOfRange {
                index: idx.j,
                order: self.m(),
            });
        }
        Ok(())
    }

    /// The operator determinant `Δ0 = C1⊗B2 − B1⊗C2` as a dense matrix.
    pub fn delta0(&self) -> SymMatrix {
        let left = SymMatrix::kron(self.first.c(), self.second.b());
        let right = SymMatrix::kron(self.first.b(), self.second.c());
        SymMatrix::linear_combination(&[(1.0, &left), (-1.0, &right)])
    }

    /// `(u⊗v)ᵀ Δ0 (u⊗v) = c1(u) b2(v) − b1(u) c2(v)` without assembling `Δ0`.
    pub fn delta0_form(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let f1 = self.first.forms(u)?;
        let f2 = self.second.forms(v)?;
        Ok(f1.c * f2.b - f1.b * f2.c)
    }

    /// Exchanges the two equations.
    pub fn swapped(&self) -> TwoParamProblem {
        TwoParamProblem {
            first: self.second.clone(),
            second: self.first.clone(),
            label: self.label.clone(),
        }
    }

    /// Applies the parameter substitution `(λ, μ)ᵀ = T (λ̃, μ̃)ᵀ` to both
    /// equations, returning the problem in the new parameters.
    pub fn substituted(&self, t: &[[f64; 2]; 2]) -> TwoParamProblem {
        TwoParamProblem {
            first: self.first.substitute(t),
            second: self.second.substitute(t),
            label: self.label.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn scalar_problem() -> TwoParamProblem {
        let s = |x: f64| SymMatrix::new(1, vec![x]).unwrap();
        TwoParamProblem::from_matrices([s(5.0), s(-3.0), s(-1.0)], [s(-3.0), s(1.0), s(1.0)], "scalar")
            .unwrap()
    }

    #[test]
    fn delta0_of_scalar_problem() {
        let p = scalar_problem();
        assert_eq!(p.delta0().as_slice(), &[2.0]);
        assert_eq!(p.delta0_form(&[1.0], &[1.0]).unwrap(), 2.0);
    }

    #[test]
    fn substitution_rescales_delta0_by_determinant() {
        let p = scalar_problem();
        let t = [[2.0, 1.0], [0.5, 3.0]];
        let q = p.substituted(&t);
        let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
        assert!((q.delta0()[(0, 0)] - det * 2.0).abs() < 1e-14);
        // swapping the equations flips the sign
        assert_eq!(p.swapped().delta0().as_slice(), &[-2.0]);
    }

    #[test]
    fn index_bounds() {
        let p = scalar_problem();
        assert!(p.contains(IndexPair::new(1, 1)));
        assert!(!p.contains(IndexPair::new(2, 1)));
        assert!(matches!(
            p.check_index(IndexPair::new(1, 0)),
            Err(Error::IndexOutOfRange { index: 0, order: 1 })
        ));
        assert_eq!(IndexPair::all(2, 3).count(), 6);
    }

    #[test]
    fn mismatched_orders_are_rejected() {
        let err = Pencil::new(SymMatrix::identity(2), SymMatrix::identity(3), SymMatrix::identity(2));
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }
}
