use super::matrix::{axpy, canonical_sign, dot, Matrix, SymMatrix};
use super::tridiag::tridiagonalize;
use crate::error::{Error, Result};

/// Relative pivot tolerance of the Cholesky factorization.
pub const CHOLESKY_PIVOT_TOL: f64 = 1e-12;

/// Eigenvalues in ascending order with eigenvectors as columns.
///
/// For generalized problems the columns are `B`-orthonormal.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_finite(a: &SymMatrix) -> Result<()> {
    if a.as_slice().iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidMatrix("non-finite entry".into()))
    }
}

fn check_index(k: usize, order: usize) -> Result<()> {
    if k == 0 || k > order {
        Err(Error::IndexOutOfRange { index: k, order })
    } else {
        Ok(())
    }
}

/// Full symmetric eigendecomposition (Householder + implicit QL).
pub fn sym_eig(a: &SymMatrix) -> Result<EigenDecomposition> {
    check_finite(a)?;
    let red = tridiagonalize(a, true);
    let (values, rows) = red.tri.eigen_with(red.q_transpose())?;
    let n = a.order();
    let mut vectors = rows.transpose();
    for k in 0..n {
        let mut col = vectors.column(k);
        canonical_sign(&mut col);
        for (i, x) in col.into_iter().enumerate() {
            vectors[(i, k)] = x;
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// All eigenvalues, ascending, without eigenvectors.
pub fn sym_eigvals(a: &SymMatrix) -> Result<Vec<f64>> {
    check_finite(a)?;
    tridiagonalize(a, false).tri.eigenvalues()
}

/// The `k`-th smallest eigenvalue (1-based).
pub fn sym_kth_eigenvalue(a: &SymMatrix, k: usize) -> Result<f64> {
    check_finite(a)?;
    check_index(k, a.order())?;
    Ok(tridiagonalize(a, false).tri.kth_eigenvalue(k))
}

/// Smallest and largest eigenvalue.
pub fn sym_extreme_eigenvalues(a: &SymMatrix) -> Result<(f64, f64)> {
    check_finite(a)?;
    if a.order() == 0 {
        return Err(Error::InvalidMatrix("empty matrix".into()));
    }
    let tri = tridiagonalize(a, false).tri;
    Ok((tri.kth_eigenvalue(1), tri.kth_eigenvalue(a.order())))
}

/// The `k`-th smallest eigenpair (1-based) with a unit, sign-normalized vector.
pub fn sym_kth_eigenpair(a: &SymMatrix, k: usize) -> Result<(f64, Vec<f64>)> {
    check_finite(a)?;
    check_index(k, a.order())?;
    let red = tridiagonalize(a, true);
    let lambda = red.tri.kth_eigenvalue(k);
    let mut y = red.tri.inverse_iteration(lambda);
    red.apply_q(&mut y);
    canonical_sign(&mut y);
    Ok((lambda, y))
}

/// Lower-triangular Cholesky factor `B = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Fails with [`Error::NotPositiveDefinite`] when a pivot drops below
    /// `1e-12` times the largest diagonal entry.
    pub fn new(b: &SymMatrix) -> Result<Self> {
        check_finite(b)?;
        let n = b.order();
        let max_diag = (0..n).fold(0.0f64, |acc, i| acc.max(b[(i, i)].abs()));
        let tol = CHOLESKY_PIVOT_TOL * max_diag;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let pivot = b[(j, j)] - dot(&l.row(j)[..j], &l.row(j)[..j]);
            if !(pivot > tol && pivot > 0.0) {
                return Err(Error::NotPositiveDefinite { row: j, pivot });
            }
            let ljj = pivot.sqrt();
            l[(j, j)] = ljj;
            for i in j + 1..n {
                let s = dot(&l.row(i)[..j], &l.row(j)[..j]);
                l[(i, j)] = (b[(i, j)] - s) / ljj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    fn order(&self) -> usize {
        self.l.nrows()
    }

    /// Solves `L X = M` in place, row by row.
    fn forward_rows(&self, m: &mut Matrix) {
        let n = self.order();
        let cols = m.ncols();
        for i in 0..n {
            let (done, rest) = m.as_mut_slice().split_at_mut(i * cols);
            let row = &mut rest[..cols];
            let li = self.l.row(i);
            for k in 0..i {
                let lik = li[k];
                if lik != 0.0 {
                    axpy(-lik, &done[k * cols..(k + 1) * cols], row);
                }
            }
            let d = li[i];
            row.iter_mut().for_each(|x| *x /= d);
        }
    }

    /// `L⁻¹ A L⁻ᵀ`
    pub fn reduce(&self, a: &SymMatrix) -> SymMatrix {
        let mut w = a.as_matrix().clone();
        self.forward_rows(&mut w);
        let mut c = w.transpose();
        self.forward_rows(&mut c);
        SymMatrix::symmetrize(c)
    }

    /// `x ← L⁻ᵀ x`
    pub fn back_substitute(&self, x: &mut [f64]) {
        let n = self.order();
        for i in (0..n).rev() {
            x[i] /= self.l[(i, i)];
            let xi = x[i];
            let li = self.l.row(i);
            for k in 0..i {
                x[k] -= li[k] * xi;
            }
        }
    }
}

fn check_pair(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.order() != b.order() {
        return Err(Error::DimensionMismatch(format!(
            "pencil orders {} and {} differ",
            a.order(),
            b.order()
        )));
    }
    check_finite(a)
}

/// The `k`-th smallest eigenpair of `A x = λ B x` for positive definite `B`.
///
/// The eigenvector satisfies `xᵀ B x = 1` and has its largest-magnitude
/// component positive.
pub fn sym_definite_gep_kth(a: &SymMatrix, b: &SymMatrix, k: usize) -> Result<(f64, Vec<f64>)> {
    check_pair(a, b)?;
    check_index(k, a.order())?;
    let chol = Cholesky::new(b)?;
    let reduced = chol.reduce(a);
    let red = tridiagonalize(&reduced, true);
    let lambda = red.tri.kth_eigenvalue(k);
    let mut y = red.tri.inverse_iteration(lambda);
    red.apply_q(&mut y);
    chol.back_substitute(&mut y);
    // restore exact B-normalization lost to rounding
    let scale = b.quad_form(&y).sqrt();
    y.iter_mut().for_each(|x| *x /= scale);
    canonical_sign(&mut y);
    Ok((lambda, y))
}

/// All eigenpairs of `A x = λ B x`, ascending, `B`-orthonormal.
pub fn sym_definite_gep_full(a: &SymMatrix, b: &SymMatrix) -> Result<EigenDecomposition> {
    check_pair(a, b)?;
    let chol = Cholesky::new(b)?;
    let reduced = chol.reduce(a);
    let red = tridiagonalize(&reduced, true);
    let (values, mut rows) = red.tri.eigen_with(red.q_transpose())?;
    let n = a.order();
    for k in 0..n {
        let row = rows.row_mut(k);
        chol.back_substitute(row);
        canonical_sign(row);
    }
    Ok(EigenDecomposition {
        values,
        vectors: rows.transpose(),
    })
}
