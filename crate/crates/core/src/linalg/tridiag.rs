//! Householder reduction to symmetric tridiagonal form and the tridiagonal
//! eigen-kernels built on it: implicit QL, Sturm bisection and inverse
//! iteration.

use super::matrix::{axpy, dot, normalize, Matrix, SymMatrix};
use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;
const MAX_QL_ITERATIONS: usize = 60;

/// Symmetric tridiagonal matrix: `diag[i] = T[i,i]`, `off[i] = T[i+1,i]`.
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// `A = Q T Qᵀ` with `Q = H_0 H_1 ⋯`; reflector `k` acts on indices `k+1..n`.
pub(crate) struct Reduction {
    pub tri: Tridiagonal,
    reflectors: Vec<(Vec<f64>, f64)>,
}

/// Reduces `a` to tridiagonal form. Only the lower triangle of the working
/// copy is updated, giving `4/3 n³` flops.
pub(crate) fn tridiagonalize(a: &SymMatrix, keep_reflectors: bool) -> Reduction {
    let n = a.order();
    let mut w = a.as_slice().to_vec();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut reflectors = Vec::new();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let r = n - k - 1;
        let base = k + 1;
        diag[k] = w[k * n + k];
        let mut v: Vec<f64> = (0..r).map(|i| w[(base + i) * n + k]).collect();
        let tail = dot(&v[1..], &v[1..]);
        if tail == 0.0 {
            off[k] = v[0];
            if keep_reflectors {
                reflectors.push((Vec::new(), 0.0));
            }
            continue;
        }
        let xnorm = (v[0] * v[0] + tail).sqrt();
        let alpha = if v[0] >= 0.0 { -xnorm } else { xnorm };
        v[0] -= alpha;
        let beta = 2.0 / dot(&v, &v);
        off[k] = alpha;

        // p = beta * A22 v using the lower triangle only
        let p = &mut p[..r];
        p.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..r {
            let row = &w[(base + i) * n + base..(base + i) * n + base + i + 1];
            p[i] += dot(&row[..=i], &v[..=i]);
            axpy(v[i], &row[..i], &mut p[..i]);
        }
        p.iter_mut().for_each(|x| *x *= beta);
        let kappa = 0.5 * beta * dot(p, &v);
        let q = &mut q[..r];
        for i in 0..r {
            q[i] = p[i] - kappa * v[i];
        }
        // A22 -= v qᵀ + q vᵀ (lower triangle)
        for i in 0..r {
            let (vi, qi) = (v[i], q[i]);
            let row = &mut w[(base + i) * n + base..(base + i) * n + base + i + 1];
            for ((x, &qj), &vj) in row.iter_mut().zip(q[..=i].iter()).zip(v[..=i].iter()) {
                *x -= vi * qj + qi * vj;
            }
        }
        if keep_reflectors {
            reflectors.push((v, beta));
        }
    }
    if n >= 2 {
        diag[n - 2] = w[(n - 2) * n + n - 2];
        off[n - 2] = w[(n - 1) * n + n - 2];
    }
    if n >= 1 {
        diag[n - 1] = w[(n - 1) * n + n - 1];
    }
    Reduction {
        tri: Tridiagonal { diag, off },
        reflectors,
    }
}

impl Reduction {
    /// `y ← Q y`
    pub fn apply_q(&self, y: &mut [f64]) {
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if v.is_empty() {
                continue;
            }
            let tail = &mut y[k + 1..];
            let s = beta * dot(v, tail);
            axpy(-s, v, tail);
        }
    }

    /// Returns `Qᵀ`, whose rows are the columns of `Q`.
    pub fn q_transpose(&self) -> Matrix {
        let n = self.tri.diag.len();
        let mut m = Matrix::identity(n);
        let mut s = vec![0.0; n];
        for (k, (v, beta)) in self.reflectors.iter().enumerate() {
            if v.is_empty() {
                continue;
            }
            // rows k+1.. of M ← H_k applied from the left
            s.iter_mut().for_each(|x| *x = 0.0);
            for (i, &vi) in v.iter().enumerate() {
                axpy(vi, m.row(k + 1 + i), &mut s);
            }
            for (i, &vi) in v.iter().enumerate() {
                axpy(-beta * vi, &s, m.row_mut(k + 1 + i));
            }
        }
        m
    }
}

impl Tridiagonal {
    pub fn order(&self) -> usize {
        self.diag.len()
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        implicit_ql(&mut d, &mut e, None)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// Eigenvalues ascending with eigenvectors of `A = Q T Qᵀ` as the rows of
    /// the returned matrix, given `zt = Qᵀ`.
    pub fn eigen_with(&self, mut zt: Matrix) -> Result<(Vec<f64>, Matrix)> {
        let n = self.order();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        implicit_ql(&mut d, &mut e, Some(&mut zt))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
        let values = order.iter().map(|&k| d[k]).collect();
        let mut rows = Matrix::zeros(n, zt.ncols());
        for (dst, &src) in order.iter().enumerate() {
            rows.row_mut(dst).copy_from_slice(zt.row(src));
        }
        Ok((values, rows))
    }

    fn pivmin(&self) -> f64 {
        let emax = self.off.iter().fold(1.0f64, |acc, x| acc.max(x * x));
        f64::MIN_POSITIVE * emax
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.order();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut radius = 0.0;
            if i > 0 {
                radius += self.off[i - 1].abs();
            }
            if i + 1 < n {
                radius += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (1-based) by bisection.
    pub fn kth_eigenvalue(&self, k: usize) -> f64 {
        let n = self.order();
        debug_assert!(k >= 1 && k <= n);
        let pivmin = self.pivmin();
        let (lo0, hi0) = self.gershgorin();
        let pad = 2.0 * EPS * lo0.abs().max(hi0.abs()) + 2.0 * pivmin;
        let (mut lo, mut hi) = (lo0 - pad, hi0 + pad);
        for _ in 0..256 {
            let width = hi - lo;
            if width <= 2.0 * EPS * lo.abs().max(hi.abs()) + pivmin {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if count_below(&self.diag, &self.off, mid, pivmin) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Unit eigenvector of `T` for the eigenvalue `lambda` by inverse iteration.
    pub fn inverse_iteration(&self, lambda: f64) -> Vec<f64> {
        let n = self.order();
        if n == 1 {
            return vec![1.0];
        }
        let tnorm = self
            .diag
            .iter()
            .chain(self.off.iter())
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        let tiny = EPS * tnorm;

        // LU with partial pivoting of T - lambda I
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];
        let mut dk = self.diag[0] - lambda;
        let mut ck = self.off[0];
        for k in 0..n - 1 {
            let sub = self.off[k];
            let nd = self.diag[k + 1] - lambda;
            let nc = if k + 1 < n - 1 { self.off[k + 1] } else { 0.0 };
            if dk.abs() >= sub.abs() {
                u0[k] = dk;
                u1[k] = ck;
                let l = if dk == 0.0 { 0.0 } else { sub / dk };
                mult[k] = l;
                dk = nd - l * ck;
                ck = nc;
            } else {
                swapped[k] = true;
                u0[k] = sub;
                u1[k] = nd;
                u2[k] = nc;
                let l = dk / sub;
                mult[k] = l;
                dk = ck - l * nd;
                ck = -l * nc;
            }
        }
        u0[n - 1] = dk;
        for x in u0.iter_mut() {
            if x.abs() < tiny {
                *x = if *x < 0.0 { -tiny } else { tiny };
            }
        }

        // deterministic start vector with no special structure
        let mut y: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64 * 0.618_033_988_749_895).fract() - 0.5))
            .collect();
        for _ in 0..3 {
            for k in 0..n - 1 {
                if swapped[k] {
                    y.swap(k, k + 1);
                }
                y[k + 1] -= mult[k] * y[k];
            }
            y[n - 1] /= u0[n - 1];
            y[n - 2] = (y[n - 2] - u1[n - 2] * y[n - 1]) / u0[n - 2];
            for k in (0..n.saturating_sub(2)).rev() {
                y[k] = (y[k] - u1[k] * y[k + 1] - u2[k] * y[k + 2]) / u0[k];
            }
            normalize(&mut y);
        }
        y
    }
}

fn count_below(d: &[f64], e: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q.abs() <= pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q.abs() <= pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Implicit-shift QL on `(d, e)` with `e[i] = T[i+1,i]` and `e[n-1] = 0`.
/// When `zt` is given, its rows `i, i+1` receive every plane rotation.
fn implicit_ql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut Matrix>) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= EPS * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::InvalidMatrix(
                    "tridiagonal QL iteration did not converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = zt.as_deref_mut() {
                    let cols = z.ncols();
                    let (head, tail) = z.as_mut_slice().split_at_mut((i + 1) * cols);
                    let zi = &mut head[i * cols..];
                    let zi1 = &mut tail[..cols];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(diag: &[f64], off: &[f64]) -> Tridiagonal {
        Tridiagonal {
            diag: diag.to_vec(),
            off: off.to_vec(),
        }
    }

    #[test]
    fn second_difference_spectrum() {
        // tridiag(-1, 2, -1) has eigenvalues 2 - 2cos(kπ/(n+1))
        let n = 7;
        let t = tri(&vec![2.0; n], &vec![-1.0; n - 1]);
        let values = t.eigenvalues().unwrap();
        for (k, v) in values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13, "{v} vs {exact}");
            assert!((t.kth_eigenvalue(k + 1) - exact).abs() < 1e-13);
        }
        assert_eq!(count_below(&t.diag, &t.off, values[3] + 1e-9, t.pivmin()), 4);
    }

    #[test]
    fn inverse_iteration_residual() {
        let t = tri(&[4.0, 1.0, 3.0, -2.0, 0.5], &[1.0, 0.3, 2.0, 0.7]);
        for k in 1..=5 {
            let lambda = t.kth_eigenvalue(k);
            let y = t.inverse_iteration(lambda);
            let n = 5;
            let mut res = 0.0f64;
            for i in 0..n {
                let mut ti = t.diag[i] * y[i] - lambda * y[i];
                if i > 0 {
                    ti += t.off[i - 1] * y[i - 1];
                }
                if i + 1 < n {
                    ti += t.off[i] * y[i + 1];
                }
                res = res.max(ti.abs());
            }
            assert!(res < 1e-13, "residual {res} for k={k}");
        }
    }

    #[test]
    fn reduction_preserves_spectrum_and_q_is_orthogonal() {
        let a = SymMatrix::from_fn(6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0 + (i + j) as f64 * 0.1)
            .unwrap();
        let red = tridiagonalize(&a, true);
        let qt = red.q_transpose();
        let qtq = qt.matmul(&qt.transpose());
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[(i, j)] - expect).abs() < 1e-14);
            }
        }
        // Qᵀ A Q is the tridiagonal matrix
        let t = a.congruence(&qt.transpose());
        for i in 0..6 {
            assert!((t[(i, i)] - red.tri.diag[i]).abs() < 1e-13);
            if i + 1 < 6 {
                assert!((t[(i + 1, i)] - red.tri.off[i]).abs() < 1e-13);
            }
            for j in i + 2..6 {
                assert!(t[(j, i)].abs() < 1e-13);
            }
        }
        // apply_q agrees with the explicit Q
        let y = vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.5];
        let mut qy = y.clone();
        red.apply_q(&mut qy);
        let explicit = qt.transpose().matvec(&y);
        for (a, b) in qy.iter().zip(&explicit) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
