use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Solves `A x = b` for a general square `A` by LU with partial pivoting.
pub fn lu_solve(mut a: Matrix, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} system with right-hand side of length {}",
            n,
            a.ncols(),
            b.len()
        )));
    }
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| a[(x, k)].abs().total_cmp(&a[(y, k)].abs()))
            .unwrap_or(k);
        if a[(p, k)] == 0.0 || !a[(p, k)].is_finite() {
            return Err(Error::InvalidMatrix(format!("singular system at column {k}")));
        }
        if p != k {
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = t;
            }
            b.swap(k, p);
        }
        let pivot = a[(k, k)];
        let (upper, lower) = a.as_mut_slice().split_at_mut((k + 1) * n);
        let row_k = &upper[k * n..];
        for (r, row) in lower.chunks_exact_mut(n).enumerate() {
            let f = row[k] / pivot;
            if f != 0.0 {
                row[k] = f;
                for j in k + 1..n {
                    row[j] -= f * row_k[j];
                }
                b[k + 1 + r] -= f * b[k];
            }
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[(k, j)] * b[j];
        }
        b[k] = s / a[(k, k)];
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        let a = Matrix::from_row_major(3, 3, vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0]).unwrap();
        let x = [1.0, -2.0, 0.5];
        let b = a.matvec(&x);
        let y = lu_solve(a, b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(lu_solve(a, vec![1.0, 1.0]).is_err());
    }
}
