use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Matrix {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Matrix::zeros(order, order);
        for i in 0..order {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(nrows: usize, ncols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {nrows}x{ncols} matrix, got {}",
                nrows * ncols,
                data.len()
            )));
        }
        Ok(Matrix { nrows, ncols, data })
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Matrix { nrows, ncols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let ncols = columns.len();
        let nrows = columns.first().map_or(0, Vec::len);
        Matrix::from_fn(nrows, ncols, |i, j| columns[j][i])
    }

    /// Outer product `x yᵀ`.
    pub fn outer(x: &[f64], y: &[f64]) -> Self {
        Matrix::from_fn(x.len(), y.len(), |i, j| x[i] * y[j])
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        (0..self.nrows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `xᵀ M` for a row vector `x`.
    pub fn vecmat(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "vecmat dimension mismatch");
        let mut out = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            axpy(xi, self.row(i), &mut out);
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.ncols, other.nrows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            let (lhs, orow) = (self.row(i), &mut out.data[i * other.ncols..(i + 1) * other.ncols]);
            for (k, &aik) in lhs.iter().enumerate() {
                if aik != 0.0 {
                    axpy(aik, other.row(k), orow);
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.ncols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.nrows, self.ncols)?;
        for i in 0..self.nrows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Square symmetric matrix with finite entries.
///
/// Construction averages the input with its transpose, so the stored entries
/// are exactly symmetric.
#[derive(Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(order: usize, data: Vec<f64>) -> Result<Self> {
        let m = Matrix::from_row_major(order, order, data)?;
        Self::from_matrix(m)
    }

    pub fn from_matrix(m: Matrix) -> Result<Self> {
        if m.nrows != m.ncols {
            return Err(Error::InvalidMatrix(format!(
                "expected a square matrix, got {}x{}",
                m.nrows, m.ncols
            )));
        }
        if let Some(pos) = m.data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos / m.ncols,
                pos % m.ncols
            )));
        }
        Ok(Self::symmetrize(m))
    }

    /// Largest relative asymmetry `max|a_ij - a_ji| / max|a_ij|` of a square matrix.
    pub fn asymmetry(m: &Matrix) -> f64 {
        let n = m.nrows;
        let scale = m.data.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        worst / scale
    }

    pub(crate) fn symmetrize(mut m: Matrix) -> Self {
        let n = m.nrows;
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = avg;
                m[(j, i)] = avg;
            }
        }
        SymMatrix(m)
    }

    pub fn from_fn(order: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::from_matrix(Matrix::from_fn(order, order, f))
    }

    pub fn zeros(order: usize) -> Self {
        SymMatrix(Matrix::zeros(order, order))
    }

    pub fn identity(order: usize) -> Self {
        SymMatrix(Matrix::identity(order))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// Symmetric tridiagonal matrix with constant bands.
    pub fn tridiagonal(order: usize, sub: f64, diag: f64) -> Result<Self> {
        Self::from_fn(order, |i, j| {
            if i == j {
                diag
            } else if i.abs_diff(j) == 1 {
                sub
            } else {
                0.0
            }
        })
    }

    pub fn order(&self) -> usize {
        self.0.nrows
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.order()).map(|i| self[(i, i)]).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.0.matvec(x)
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.order(), "quadratic form dimension mismatch");
        x.iter()
            .enumerate()
            .map(|(i, &xi)| xi * dot(self.row(i), x))
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    /// `Σ coeff_k · M_k` over matrices of equal order.
    pub fn linear_combination(terms: &[(f64, &SymMatrix)]) -> SymMatrix {
        let order = terms.first().map_or(0, |(_, m)| m.order());
        let mut out = vec![0.0; order * order];
        for (coeff, m) in terms {
            assert_eq!(m.order(), order, "linear combination order mismatch");
            if *coeff != 0.0 {
                axpy(*coeff, m.as_slice(), &mut out);
            }
        }
        SymMatrix(Matrix {
            nrows: order,
            ncols: order,
            data: out,
        })
    }

    pub fn scaled(&self, alpha: f64) -> SymMatrix {
        SymMatrix::linear_combination(&[(alpha, self)])
    }

    /// Kronecker product; entry `(p·m + q, r·m + s)` equals `a[p,r]·b[q,s]`.
    pub fn kron(a: &SymMatrix, b: &SymMatrix) -> SymMatrix {
        let (n, m) = (a.order(), b.order());
        let nm = n * m;
        let mut data = vec![0.0; nm * nm];
        for p in 0..n {
            for q in 0..m {
                let row = &mut data[(p * m + q) * nm..(p * m + q + 1) * nm];
                for r in 0..n {
                    let apr = a[(p, r)];
                    if apr == 0.0 {
                        continue;
                    }
                    let brow = b.row(q);
                    for (dst, &bqs) in row[r * m..(r + 1) * m].iter_mut().zip(brow) {
                        *dst = apr * bqs;
                    }
                }
            }
        }
        SymMatrix(Matrix {
            nrows: nm,
            ncols: nm,
            data,
        })
    }

    /// `Qᵀ A Q` for a square `Q`.
    pub fn congruence(&self, q: &Matrix) -> SymMatrix {
        let aq = self.0.matmul(q);
        SymMatrix::symmetrize(q.transpose().matmul(&aq))
    }

    /// `S D Sᵀ` with `D = diag(d)`.
    pub fn scaled_gram(s: &Matrix, d: &[f64]) -> SymMatrix {
        assert_eq!(s.ncols(), d.len(), "scaled gram dimension mismatch");
        let n = s.nrows();
        let mut sd = s.clone();
        for i in 0..n {
            for (x, &dk) in sd.row_mut(i).iter_mut().zip(d) {
                *x *= dk;
            }
        }
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = dot(sd.row(i), s.row(j));
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        SymMatrix(out)
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sym")?;
        self.0.fmt(f)
    }
}

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    // four accumulators so the loop vectorizes
    let mut acc = [0.0f64; 4];
    let chunks = x.len() / 4;
    for k in 0..chunks {
        let b = 4 * k;
        acc[0] += x[b] * y[b];
        acc[1] += x[b + 1] * y[b + 1];
        acc[2] += x[b + 2] * y[b + 2];
        acc[3] += x[b + 3] * y[b + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..x.len() {
        s += x[k] * y[k];
    }
    s
}

/// `y += alpha x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Scales `x` to unit Euclidean norm. Returns the original norm.
pub fn normalize(x: &mut [f64]) -> f64 {
    let nrm = norm(x);
    if nrm > 0.0 {
        x.iter_mut().for_each(|v| *v /= nrm);
    }
    nrm
}

/// Flips the sign of `x` so that its largest-magnitude entry is positive.
///
/// Entries within a relative `1e-12` of the largest magnitude count as ties;
/// the lowest index among them decides.
pub fn canonical_sign(x: &mut [f64]) {
    let max = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if max == 0.0 {
        return;
    }
    let threshold = max * (1.0 - 1e-12);
    if let Some(lead) = x.iter().find(|v| v.abs() >= threshold) {
        if *lead < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}
