//! Reference solver through the dense Kronecker operator determinants
//!
//! ```text
//! M0 = B1⊗C2 − C1⊗B2,  M1 = A1⊗C2 − C1⊗A2,  M2 = B1⊗A2 − A1⊗B2
//! ```
//!
//! Every eigenpair satisfies `M1 X = λ (−M0) X` and `M2 X = μ (−M0) X` with a
//! rank-one `X = u vᵀ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    canonical_sign, dot, lu_solve, norm, normalize, sym_definite_gep_full, sym_eig, sym_eigvals, Matrix, SymMatrix,
};
use crate::problem::{IndexPair, TwoParamProblem};

/// Default bound on `n·m`, the order of the operators.
pub const DEFAULT_ORACLE_CAP: usize = 40_000;

/// Relative eigenvalue gap below which eigenvectors are treated as one cluster.
const CLUSTER_GAP: f64 = 1e-8;

/// Records whose rank-one residual exceeds this are flagged.
pub const RANK_ONE_FLAG: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct KroneckerOperators {
    pub m0: SymMatrix,
    pub m1: SymMatrix,
    pub m2: SymMatrix,
}

fn check_cap(p: &TwoParamProblem, cap: usize) -> Result<()> {
    let order = p.n() * p.m();
    if order > cap {
        return Err(Error::TooLarge { order, cap });
    }
    Ok(())
}

fn kron_difference(a: &SymMatrix, b: &SymMatrix, c: &SymMatrix, d: &SymMatrix) -> SymMatrix {
    let left = SymMatrix::kron(a, b);
    let right = SymMatrix::kron(c, d);
    SymMatrix::linear_combination(&[(1.0, &left), (-1.0, &right)])
}

pub fn build_operators(p: &TwoParamProblem) -> Result<KroneckerOperators> {
    build_operators_with_cap(p, DEFAULT_ORACLE_CAP)
}

pub fn build_operators_with_cap(p: &TwoParamProblem, cap: usize) -> Result<KroneckerOperators> {
    check_cap(p, cap)?;
    let (e1, e2) = (p.first(), p.second());
    Ok(KroneckerOperators {
        m0: kron_difference(e1.b(), e2.c(), e1.c(), e2.b()),
        m1: kron_difference(e1.a(), e2.c(), e1.c(), e2.a()),
        m2: kron_difference(e1.b(), e2.a(), e1.a(), e2.b()),
    })
}

/// One two-parameter eigenpair from the reference solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub lambda: f64,
    pub mu: f64,
    /// Eigenvector reshaped to `n × m`, row-major, `‖X‖_F = 1`.
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub index: IndexPair,
    pub index_defect: f64,
    pub rank_one_residual: f64,
    /// Rank-one extraction residual above [`RANK_ONE_FLAG`].
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpectrum {
    pub n: usize,
    pub m: usize,
    /// Sorted by ascending `λ`.
    pub records: Vec<OracleRecord>,
}

impl OracleSpectrum {
    pub fn get(&self, idx: IndexPair) -> Option<&OracleRecord> {
        self.records.iter().find(|r| r.index == idx)
    }

    /// Whether the assigned indices cover `{1..n} × {1..m}` exactly once.
    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.n * self.m];
        for r in &self.records {
            let IndexPair { i, j } = r.index;
            if i == 0 || j == 0 || i > self.n || j > self.m {
                return false;
            }
            let k = (i - 1) * self.m + (j - 1);
            if seen[k] {
                return false;
            }
            seen[k] = true;
        }
        seen.iter().all(|&s| s)
    }
}

pub fn oracle_solve_all(p: &TwoParamProblem) -> Result<OracleSpectrum> {
    oracle_solve_all_with_cap(p, DEFAULT_ORACLE_CAP)
}

/// Solves the full problem through the operator determinants.
///
/// Eigenvalues of `M1 X = λ (−M0) X` closer than `1e-8` relative are grouped
/// and `M2` is diagonalized inside each group, so that multiple `λ` with
/// distinct `μ` still yield rank-one eigenvectors.
pub fn oracle_solve_all_with_cap(p: &TwoParamProblem, cap: usize) -> Result<OracleSpectrum> {
    let ops = build_operators_with_cap(p, cap)?;
    let (n, m) = (p.n(), p.m());
    let neg_m0 = ops.m0.scaled(-1.0);
    // if Δ0 = −M0 is negative definite, solve (−M1) X = λ M0 X instead
    let gep = match sym_definite_gep_full(&ops.m1, &neg_m0) {
        Ok(g) => g,
        Err(Error::NotPositiveDefinite { .. }) => sym_definite_gep_full(&ops.m1.scaled(-1.0), &ops.m0)
            .map_err(|_| Error::NotRightDefinite("Δ0 is not definite".into()))?,
        Err(e) => return Err(e),
    };
    let values = &gep.values;
    let nm = values.len();
    let spread = values.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));

    let mut records = Vec::with_capacity(nm);
    let mut start = 0;
    while start < nm {
        let mut end = start + 1;
        while end < nm && values[end] - values[end - 1] < CLUSTER_GAP * spread {
            end += 1;
        }
        let mut vectors: Vec<Vec<f64>> = (start..end).map(|k| gep.vector(k)).collect();
        if end - start > 1 {
            vectors = split_cluster(&vectors, &ops.m2)?;
        }
        for x in vectors {
            records.push(make_record(p, &ops, x, n, m)?);
        }
        start = end;
    }
    records.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.mu.total_cmp(&b.mu)));
    Ok(OracleSpectrum { n, m, records })
}

/// Rotates a `(−M0)`-orthonormal basis of a cluster into eigenvectors of the
/// projected `M2`.
fn split_cluster(vectors: &[Vec<f64>], m2: &SymMatrix) -> Result<Vec<Vec<f64>>> {
    let k = vectors.len();
    let images: Vec<Vec<f64>> = vectors.iter().map(|x| m2.matvec(x)).collect();
    let projected = SymMatrix::from_fn(k, |a, b| dot(&vectors[a], &images[b]))?;
    let rot = sym_eig(&projected)?;
    Ok((0..k)
        .map(|c| {
            let mut w = vec![0.0; vectors[0].len()];
            for (a, x) in vectors.iter().enumerate() {
                let q = rot.vectors[(a, c)];
                w.iter_mut().zip(x).for_each(|(wi, xi)| *wi += q * xi);
            }
            w
        })
        .collect())
}

fn make_record(p: &TwoParamProblem, ops: &KroneckerOperators, mut x: Vec<f64>, n: usize, m: usize) -> Result<OracleRecord> {
    let scale = norm(&x);
    x.iter_mut().for_each(|e| *e /= scale);
    canonical_sign(&mut x);
    let m0x = ops.m0.quad_form(&x);
    let lambda = -ops.m1.quad_form(&x) / m0x;
    let mu = -ops.m2.quad_form(&x) / m0x;
    let xm = Matrix::from_row_major(n, m, x)?;
    let (u, v, rank_one_residual) = rank_one_factor(&xm);
    let mut pair = EigenPair { u, v, lambda, mu };
    if rank_one_residual <= RANK_ONE_FLAG {
        pair = refine(p, pair);
    }
    let (index, index_defect) = index_of(p, pair.lambda, pair.mu)?;
    let x = Matrix::outer(&pair.u, &pair.v).into_vec();
    Ok(OracleRecord {
        lambda: pair.lambda,
        mu: pair.mu,
        x,
        u: pair.u,
        v: pair.v,
        index,
        index_defect,
        rank_one_residual,
        flagged: rank_one_residual > RANK_ONE_FLAG,
    })
}

#[derive(Debug, Clone)]
struct EigenPair {
    u: Vec<f64>,
    v: Vec<f64>,
    lambda: f64,
    mu: f64,
}

/// `‖W1 u‖/‖W1‖ + ‖W2 v‖/‖W2‖` for unit `u`, `v`.
fn relative_residual(p: &TwoParamProblem, e: &EigenPair) -> f64 {
    let (e1, e2) = (p.first(), p.second());
    norm(&e1.at(e.lambda, e.mu).matvec(&e.u)) / e1.scale(e.lambda, e.mu)
        + norm(&e2.at(e.lambda, e.mu).matvec(&e.v)) / e2.scale(e.lambda, e.mu)
}

/// Newton steps on `W1(λ, μ) u = 0`, `W2(λ, μ) v = 0`, `u0ᵀu = v0ᵀv = 1`,
/// kept only while the relative residual decreases.
fn refine(p: &TwoParamProblem, mut current: EigenPair) -> EigenPair {
    let (n, m) = (p.n(), p.m());
    let size = n + m + 2;
    let mut best = relative_residual(p, &current);
    for _ in 0..3 {
        let (e1, e2) = (p.first(), p.second());
        let w1 = e1.at(current.lambda, current.mu);
        let w2 = e2.at(current.lambda, current.mu);
        let columns = [
            (e1.b().matvec(&current.u), e2.b().matvec(&current.v)),
            (e1.c().matvec(&current.u), e2.c().matvec(&current.v)),
        ];
        let mut jac = Matrix::zeros(size, size);
        for i in 0..n {
            jac.row_mut(i)[..n].copy_from_slice(w1.row(i));
            jac[(i, n + m)] = columns[0].0[i];
            jac[(i, n + m + 1)] = columns[1].0[i];
            jac[(n + m, i)] = current.u[i];
        }
        for j in 0..m {
            jac.row_mut(n + j)[n..n + m].copy_from_slice(w2.row(j));
            jac[(n + j, n + m)] = columns[0].1[j];
            jac[(n + j, n + m + 1)] = columns[1].1[j];
            jac[(n + m + 1, n + j)] = current.v[j];
        }
        let mut rhs: Vec<f64> = w1.matvec(&current.u).into_iter().chain(w2.matvec(&current.v)).map(|r| -r).collect();
        rhs.extend([0.0, 0.0]);
        let Ok(delta) = lu_solve(jac, rhs) else { break };
        let mut next = EigenPair {
            u: current.u.iter().zip(&delta[..n]).map(|(a, d)| a + d).collect(),
            v: current.v.iter().zip(&delta[n..n + m]).map(|(a, d)| a + d).collect(),
            lambda: current.lambda + delta[n + m],
            mu: current.mu + delta[n + m + 1],
        };
        normalize(&mut next.u);
        normalize(&mut next.v);
        canonical_sign(&mut next.u);
        canonical_sign(&mut next.v);
        let r = relative_residual(p, &next);
        if !(r < best) {
            break;
        }
        best = r;
        current = next;
    }
    current
}

/// Best rank-one approximation `σ u vᵀ` of `X` by alternating power
/// iteration. Returns unit `u`, `v` (sign-normalized on `u`, `σ ≥ 0`) and
/// `‖X − σ u vᵀ‖_F / ‖X‖_F`. A zero matrix yields `e1, e1` and residual 0.
pub fn rank_one_factor(x: &Matrix) -> (Vec<f64>, Vec<f64>, f64) {
    let (n, m) = (x.nrows(), x.ncols());
    let total = x.frobenius_norm();
    let e1 = |k: usize| {
        let mut e = vec![0.0; k];
        if k > 0 {
            e[0] = 1.0;
        }
        e
    };
    if total == 0.0 {
        return (e1(n), e1(m), 0.0);
    }
    let start = (0..n)
        .max_by(|&a, &b| norm(x.row(a)).total_cmp(&norm(x.row(b))))
        .unwrap_or(0);
    let mut v = x.row(start).to_vec();
    let mut u = vec![0.0; n];
    let mut sigma = 0.0;
    for _ in 0..20 {
        u = x.matvec(&v);
        let nu = norm(&u);
        u.iter_mut().for_each(|e| *e /= nu);
        v = x.vecmat(&u);
        let next = norm(&v);
        v.iter_mut().for_each(|e| *e /= next);
        let stagnated = (next - sigma).abs() <= 1e-15 * next;
        sigma = next;
        if stagnated {
            break;
        }
    }
    let mut flipped = u.clone();
    canonical_sign(&mut flipped);
    if flipped != u {
        u = flipped;
        v.iter_mut().for_each(|e| *e = -*e);
    }
    let mut residual = 0.0;
    for i in 0..n {
        for j in 0..m {
            residual += (x[(i, j)] - sigma * u[i] * v[j]).powi(2);
        }
    }
    (u, v, residual.sqrt() / total)
}

/// Position of the zero eigenvalue of each pencil at `(λ, μ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexCluster {
    /// Index as counted by [`index_of`].
    pub first: IndexPair,
    /// Number of eigenvalues within the zero tolerance, per pencil.
    pub multiplicity: (usize, usize),
    pub defect: f64,
}

impl IndexCluster {
    /// Whether `idx` labels one of the numerically zero eigenvalues. For a
    /// simple eigenvalue this is `idx == first`.
    pub fn contains(&self, idx: IndexPair) -> bool {
        let within = |k: usize, first: usize, mult: usize| k >= first && k < first + mult.max(1);
        within(idx.i, self.first.i, self.multiplicity.0) && within(idx.j, self.first.j, self.multiplicity.1)
    }

    pub fn is_multiple(&self) -> bool {
        self.multiplicity.0 > 1 || self.multiplicity.1 > 1
    }
}

fn zero_position(eigs: &[f64], tol: f64) -> (usize, usize, f64) {
    let below = eigs.iter().filter(|&&e| e < -tol).count();
    let near = eigs.iter().filter(|&&e| e.abs() <= tol).count();
    let defect = eigs.iter().fold(f64::INFINITY, |acc, e| acc.min(e.abs()));
    ((below + 1).min(eigs.len()), near, defect)
}

/// Like [`index_of`], also counting the eigenvalues of each pencil within
/// the zero tolerance.
pub fn index_cluster(p: &TwoParamProblem, lambda: f64, mu: f64) -> Result<IndexCluster> {
    let e1 = sym_eigvals(&p.first().at(lambda, mu))?;
    let e2 = sym_eigvals(&p.second().at(lambda, mu))?;
    let (i, k1, d1) = zero_position(&e1, 1e-8 * p.first().scale(lambda, mu));
    let (j, k2, d2) = zero_position(&e2, 1e-8 * p.second().scale(lambda, mu));
    Ok(IndexCluster {
        first: IndexPair::new(i, j),
        multiplicity: (k1, k2),
        defect: d1 + d2,
    })
}

/// Index of `(λ, μ)`: `i = 1 + #{eigenvalues of A1 + λB1 + μC1 below −tol}`
/// with `tol = 1e-8·(‖A1‖ + |λ|‖B1‖ + |μ|‖C1‖)`, likewise `j`. The defect is
/// the sum over both pencils of the eigenvalue closest to zero.
pub fn index_of(p: &TwoParamProblem, lambda: f64, mu: f64) -> Result<(IndexPair, f64)> {
    let c = index_cluster(p, lambda, mu)?;
    Ok((c.first, c.defect))
}
