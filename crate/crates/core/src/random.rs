//! Seeded random sampling shared by the solver and the generators.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{normalize, Matrix};

/// Uniformly distributed point on the unit sphere in `R^n`.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if normalize(&mut x) > 0.0 {
            return x;
        }
    }
}

/// Matrix with independent standard Gaussian entries, drawn row by row.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, nrows: usize, ncols: usize) -> Matrix {
    Matrix::from_fn(nrows, ncols, |_, _| rng.sample(StandardNormal))
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for index `(i, j)` of a sweep: `base XOR hash(i, j)`, further mixed
/// with the restart counter.
pub fn index_seed(base: u64, i: usize, j: usize, restart: usize) -> u64 {
    let key = ((i as u64) << 32) ^ (j as u64);
    let seed = base ^ mix64(key);
    if restart == 0 {
        seed
    } else {
        seed ^ mix64(0xa5a5_0000_0000_0000 ^ restart as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_vector_has_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = unit_vector(&mut rng, 17);
        assert!((crate::linalg::norm(&x) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn index_seeds_differ() {
        let a = index_seed(0, 1, 2, 0);
        assert_ne!(a, index_seed(0, 2, 1, 0));
        assert_ne!(a, index_seed(0, 1, 2, 1));
        assert_eq!(a, index_seed(0, 1, 2, 0));
    }
}
