//! Error measures and convergence diagnostics.

use serde::{Deserialize, Serialize};

use crate::alternating::QuadraticForms;
use crate::error::{Error, Result};
use crate::linalg::sym_kth_eigenvalue;
use crate::problem::{IndexPair, TwoParamProblem};

/// `|e1| + |e2|` where `e1` is the `i`-th smallest eigenvalue of
/// `A1 + λB1 + μC1` and `e2` the `j`-th smallest of `A2 + λB2 + μC2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexError {
    pub value: f64,
    pub parts: (f64, f64),
}

/// Evaluates the index error at `(λ, μ)`. Each part costs one dense
/// tridiagonal reduction, `O(n³)`.
pub fn index_error(p: &TwoParamProblem, lambda: f64, mu: f64, idx: IndexPair) -> Result<IndexError> {
    p.check_index(idx)?;
    let e1 = sym_kth_eigenvalue(&p.first().at(lambda, mu), idx.i)?;
    let e2 = sym_kth_eigenvalue(&p.second().at(lambda, mu), idx.j)?;
    Ok(IndexError {
        value: e1.abs() + e2.abs(),
        parts: (e1, e2),
    })
}

/// Rayleigh quotient `⟨X, M1 X⟩ / ⟨X, −M0 X⟩` at `X = u⊗v`, from the
/// quadratic forms: `(a1c2 − c1a2) / (c1b2 − b1c2)`.
pub fn rayleigh(p: &TwoParamProblem, u: &[f64], v: &[f64]) -> Result<f64> {
    let f1 = p.first().forms(u)?;
    let f2 = p.second().forms(v)?;
    let den = f1.c * f2.b - f1.b * f2.c;
    if !(den > 0.0) {
        return Err(Error::DegenerateForm(format!(
            "Rayleigh denominator c1·b2 − b1·c2 = {den:e} is not positive"
        )));
    }
    Ok((f1.a * f2.c - f1.c * f2.a) / den)
}

/// Slope `μ'(λ) = −b/c` of the eigencurve through the current iterate.
pub fn tangent_slope(forms: &QuadraticForms) -> Result<f64> {
    if forms.c == 0.0 {
        return Err(Error::DegenerateForm("c = 0 in tangent slope".into()));
    }
    Ok(-forms.b / forms.c)
}

/// Points at or above this value are outside the asymptotic regime.
const ORDER_WINDOW: f64 = 1e-2;

/// Errors within this factor of the smallest error in a trace are treated
/// as the rounding floor.
const FLOOR_FACTOR: f64 = 100.0;

/// Fitted convergence order: least-squares slope of `log e_{k+1}` against
/// `log e_k` over consecutive errors below `1e-2`.
///
/// Requires at least four errors below `1e-2`. Pairs touching the rounding
/// floor of the trace (within a factor 100 of its smallest entry) are left
/// out, as are zero entries.
pub fn convergence_order(errors: &[f64]) -> Result<f64> {
    let qualifying = errors.iter().filter(|&&e| e > 0.0 && e < ORDER_WINDOW).count();
    if qualifying < 4 {
        return Err(Error::NotEnoughData(format!(
            "need at least 4 errors below {ORDER_WINDOW:e}, got {qualifying}"
        )));
    }
    let floor = FLOOR_FACTOR
        * errors
            .iter()
            .filter(|&&e| e > 0.0)
            .fold(f64::INFINITY, |acc, &e| acc.min(e));
    let pairs: Vec<(f64, f64)> = errors
        .windows(2)
        .filter(|w| w[0] < ORDER_WINDOW && w[0] > floor && w[1] > floor)
        .map(|w| (w[0].ln(), w[1].ln()))
        .collect();
    if pairs.len() < 2 {
        return Err(Error::NotEnoughData(format!(
            "need at least 2 pairs above the rounding floor, got {}",
            pairs.len()
        )));
    }
    let k = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::NotEnoughData("all errors are equal".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;
    use approx::assert_relative_eq;

    fn diag(d: &[f64]) -> SymMatrix {
        SymMatrix::from_diagonal(d).unwrap()
    }

    fn diagonal_problem() -> TwoParamProblem {
        TwoParamProblem::from_matrices(
            [diag(&[1.0, 2.0]), diag(&[-2.0, -3.0]), diag(&[-1.0, -2.0])],
            [diag(&[0.0, 1.0]), diag(&[1.0, 1.0]), diag(&[1.0, 1.0])],
            "diag",
        )
        .unwrap()
    }

    #[test]
    fn index_error_examples() {
        let p = diagonal_problem();
        let e = index_error(&p, 1.0, -1.0, IndexPair::new(1, 1)).unwrap();
        assert!(e.value < 1e-14);
        let e = index_error(&p, 1.0, -1.0, IndexPair::new(2, 1)).unwrap();
        assert_relative_eq!(e.value, 1.0, epsilon = 1e-14);
        assert_relative_eq!(e.parts.0, 1.0, epsilon = 1e-14);
        assert!(e.parts.1.abs() < 1e-14);
        assert!(index_error(&p, 1.0, -1.0, IndexPair::new(3, 1)).is_err());
    }

    #[test]
    fn index_error_is_lipschitz() {
        let p = diagonal_problem();
        let base = index_error(&p, 1.3, -0.7, IndexPair::new(1, 2)).unwrap().value;
        let d = 1e-6;
        let bound = (p.first().b().frobenius_norm() + p.first().c().frobenius_norm()
            + p.second().b().frobenius_norm()
            + p.second().c().frobenius_norm())
            * d;
        for (dl, dm) in [(d, 0.0), (0.0, d), (-d, d)] {
            let moved = index_error(&p, 1.3 + dl, -0.7 + dm, IndexPair::new(1, 2)).unwrap().value;
            assert!((moved - base).abs() <= bound * 1.01);
        }
    }

    #[test]
    fn rayleigh_examples() {
        let s = |x: f64| SymMatrix::new(1, vec![x]).unwrap();
        let p = TwoParamProblem::from_matrices([s(5.0), s(-3.0), s(-1.0)], [s(-3.0), s(1.0), s(1.0)], "")
            .unwrap();
        assert_relative_eq!(rayleigh(&p, &[1.0], &[1.0]).unwrap(), 1.0);
        assert_relative_eq!(rayleigh(&p, &[-2.5], &[0.1]).unwrap(), 1.0);

        let q = diagonal_problem();
        let r1 = rayleigh(&q, &[0.3, -1.2], &[2.0, 0.5]).unwrap();
        let r2 = rayleigh(&q, &[-0.6, 2.4], &[0.2, 0.05]).unwrap();
        assert_relative_eq!(r1, r2, max_relative = 1e-14);
    }

    #[test]
    fn rayleigh_rejects_bad_sign() {
        let s = |x: f64| SymMatrix::new(1, vec![x]).unwrap();
        let p = TwoParamProblem::from_matrices([s(5.0), s(-3.0), s(-1.0)], [s(-3.0), s(1.0), s(1.0)], "")
            .unwrap()
            .swapped();
        assert!(matches!(rayleigh(&p, &[1.0], &[1.0]), Err(Error::DegenerateForm(_))));
    }

    #[test]
    fn tangent_slope_examples() {
        let f = QuadraticForms { a: 7.0, b: -2.0, c: -1.0 };
        assert_eq!(tangent_slope(&f).unwrap(), -2.0);
        let f = QuadraticForms { a: 1.0, b: 0.0, c: 3.0 };
        assert_eq!(tangent_slope(&f).unwrap(), 0.0);
        let f = QuadraticForms { a: 1.0, b: 1.0, c: 0.0 };
        assert!(matches!(tangent_slope(&f), Err(Error::DegenerateForm(_))));
    }

    #[test]
    fn synthetic_orders() {
        let quadratic: Vec<f64> = (1..=5).map(|k| 10f64.powf(-(2f64.powi(k)))).collect();
        assert_relative_eq!(convergence_order(&quadratic).unwrap(), 2.0, epsilon = 1e-9);
        let linear: Vec<f64> = (1..=8).map(|k| 10f64.powi(-k)).collect();
        assert_relative_eq!(convergence_order(&linear).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn rounding_floor_is_ignored() {
        let errors = [3.0, 6e-3, 3.6e-5, 1.3e-9, 1.1e-14, 9.8e-15, 1.2e-14];
        let order = convergence_order(&errors).unwrap();
        let expected = (1.3e-9f64.ln() - 3.6e-5f64.ln()) / (3.6e-5f64.ln() - 6e-3f64.ln());
        assert_relative_eq!(order, expected, max_relative = 1e-12);
    }

    #[test]
    fn short_traces_are_rejected() {
        assert!(matches!(
            convergence_order(&[1.0, 1e-3, 1e-6]),
            Err(Error::NotEnoughData(_))
        ));
    }
}
