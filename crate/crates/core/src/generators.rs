//! Test problems: a random right-definite ensemble and finite-difference
//! discretizations of separable Helmholtz problems.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};
use crate::problem::{RecoveryMap, TwoParamProblem};
use crate::random::gaussian_matrix;

fn symmetric_gaussian(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    // (G + Gᵀ)/2
    SymMatrix::symmetrize(gaussian_matrix(rng, n, n))
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Random right-definite problem: `A1, A2` symmetric Gaussian,
/// `B_k = S_k Diag(b_k) S_kᵀ`, `C1 = −S1S1ᵀ`, `C2 = S2S2ᵀ` with Gaussian
/// `S_k`, `b1 ~ U(−0.5, 0.5)` and `b2 ~ U(−1.5, −0.5)`.
pub fn random_definite_problem(n: usize, m: usize, seed: u64) -> TwoParamProblem {
    assert!(n >= 1 && m >= 1, "problem dimensions must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a1 = symmetric_gaussian(&mut rng, n);
    let a2 = symmetric_gaussian(&mut rng, m);
    let s1 = gaussian_matrix(&mut rng, n, n);
    let s2 = gaussian_matrix(&mut rng, m, m);
    let b1 = uniform(&mut rng, n, -0.5, 0.5);
    let b2 = uniform(&mut rng, m, -1.5, -0.5);
    assemble(a1, a2, Some((&s1, &s2)), &b1, &b2, format!("random n={n} m={m} seed={seed}"))
}

/// As [`random_definite_problem`] with `S1 = S2 = I`, so `B` and `C` are
/// diagonal.
pub fn diagonal_variant(n: usize, m: usize, seed: u64) -> TwoParamProblem {
    assert!(n >= 1 && m >= 1, "problem dimensions must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a1 = symmetric_gaussian(&mut rng, n);
    let a2 = symmetric_gaussian(&mut rng, m);
    let b1 = uniform(&mut rng, n, -0.5, 0.5);
    let b2 = uniform(&mut rng, m, -1.5, -0.5);
    assemble(a1, a2, None, &b1, &b2, format!("diagonal n={n} m={m} seed={seed}"))
}

fn assemble(
    a1: SymMatrix,
    a2: SymMatrix,
    s: Option<(&Matrix, &Matrix)>,
    b1: &[f64],
    b2: &[f64],
    label: String,
) -> TwoParamProblem {
    let (n, m) = (b1.len(), b2.len());
    let gram = |s: Option<&Matrix>, d: &[f64]| match s {
        Some(s) => SymMatrix::scaled_gram(s, d),
        None => SymMatrix::from_diagonal(d).expect("finite diagonal"),
    };
    let (s1, s2) = match s {
        Some((s1, s2)) => (Some(s1), Some(s2)),
        None => (None, None),
    };
    TwoParamProblem::from_matrices(
        [a1, gram(s1, b1), gram(s1, &vec![-1.0; n])],
        [a2, gram(s2, b2), gram(s2, &vec![1.0; m])],
        label,
    )
    .expect("orders agree by construction")
}

/// Uniform grid with Dirichlet boundary: `n` interior nodes on `(a, b)` and
/// `m` on `(c, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub n: usize,
    pub m: usize,
    pub h1: f64,
    pub h2: f64,
}

impl Discretization {
    pub fn new(n: usize, m: usize, domain: [f64; 4]) -> Result<Self> {
        let [a, b, c, d] = domain;
        if n == 0 || m == 0 {
            return Err(Error::InvalidOption("grid sizes must be positive".into()));
        }
        if !(b > a) || !(d > c) || !domain.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidOption(format!("invalid domain {domain:?}")));
        }
        Ok(Discretization {
            n,
            m,
            h1: (b - a) / (n + 1) as f64,
            h2: (d - c) / (m + 1) as f64,
        })
    }
}

/// Conformal factor `g(x, y) = g1(x) + g2(y)` sampled on the interior nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableMetric {
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    /// `(a, b, c, d)` for the domain `(a, b) × (c, d)`.
    pub domain: [f64; 4],
    pub map_label: String,
}

impl SeparableMetric {
    /// Samples `g1` at `a + k h1` and `g2` at `c + l h2` for `k = 1..=n`,
    /// `l = 1..=m`.
    pub fn sample(
        domain: [f64; 4],
        n: usize,
        m: usize,
        g1: impl Fn(f64) -> f64,
        g2: impl Fn(f64) -> f64,
        map_label: impl Into<String>,
    ) -> Result<(Self, Discretization)> {
        let disc = Discretization::new(n, m, domain)?;
        let g1: Vec<f64> = (1..=n).map(|k| g1(domain[0] + k as f64 * disc.h1)).collect();
        let g2: Vec<f64> = (1..=m).map(|l| g2(domain[2] + l as f64 * disc.h2)).collect();
        let metric = SeparableMetric {
            g1,
            g2,
            domain,
            map_label: map_label.into(),
        };
        metric.validate()?;
        Ok((metric, disc))
    }

    pub fn validate(&self) -> Result<()> {
        for (component, samples) in [("g1", &self.g1), ("g2", &self.g2)] {
            if let Some(node) = samples.iter().position(|&g| !(g > 0.0) || !g.is_finite()) {
                return Err(Error::InvalidMetric {
                    component,
                    node: node + 1,
                    value: samples[node],
                });
            }
        }
        Ok(())
    }
}

/// Built-in separable metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum MetricKind {
    /// `g1 = g2 = 1/2` on `(a, b) × (c, d)`: the plain Laplacian.
    Rectangle { a: f64, b: f64, c: f64, d: f64 },
    /// Elliptic coordinates: `c² sinh²(r)` on `(0, R)`, `c² sin²(φ)` on `(0, π)`.
    HalfEllipse { c: f64, r: f64 },
    /// `z ↦ z²`: `4x²` on `(a, b)`, `4y²` on `(c, d)`.
    SquaredMap { a: f64, b: f64, c: f64, d: f64 },
    /// `z ↦ eᶻ`: `e^{2x} − κ` on `(a, b)`, `κ` on `(c, d)`; `κ` defaults to
    /// `e^{2a}/2`.
    ExpMap {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        kappa: Option<f64>,
    },
    /// `z ↦ cosh z`: `sinh²(x)` on `(a, b)`, `sin²(y)` on `(0, π)`.
    CoshMap { a: f64, b: f64 },
}

impl MetricKind {
    pub fn unit_square() -> Self {
        MetricKind::Rectangle {
            a: 0.0,
            b: 1.0,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn domain(&self) -> [f64; 4] {
        match *self {
            MetricKind::Rectangle { a, b, c, d }
            | MetricKind::SquaredMap { a, b, c, d }
            | MetricKind::ExpMap { a, b, c, d, .. } => [a, b, c, d],
            MetricKind::HalfEllipse { r, .. } => [0.0, r, 0.0, PI],
            MetricKind::CoshMap { a, b } => [a, b, 0.0, PI],
        }
    }

    pub fn label(&self) -> String {
        match *self {
            MetricKind::Rectangle { a, b, c, d } => format!("rectangle({a},{b})x({c},{d})"),
            MetricKind::HalfEllipse { c, r } => format!("half_ellipse(c={c},R={r})"),
            MetricKind::SquaredMap { a, b, c, d } => format!("squared_map({a},{b})x({c},{d})"),
            MetricKind::ExpMap { a, b, c, d, kappa } => {
                format!("exp_map({a},{b})x({c},{d},kappa={})", self.kappa(a, kappa))
            }
            MetricKind::CoshMap { a, b } => format!("cosh_map({a},{b})"),
        }
    }

    fn kappa(&self, a: f64, kappa: Option<f64>) -> f64 {
        kappa.unwrap_or_else(|| (2.0 * a).exp() / 2.0)
    }
}

/// Samples a built-in metric on an `n × m` interior grid.
pub fn builtin_metric(kind: &MetricKind, n: usize, m: usize) -> Result<(SeparableMetric, Discretization)> {
    let domain = kind.domain();
    let label = kind.label();
    match *kind {
        MetricKind::Rectangle { .. } => SeparableMetric::sample(domain, n, m, |_| 0.5, |_| 0.5, label),
        MetricKind::HalfEllipse { c, .. } => SeparableMetric::sample(
            domain,
            n,
            m,
            |r| (c * r.sinh()).powi(2),
            |phi| (c * phi.sin()).powi(2),
            label,
        ),
        MetricKind::SquaredMap { .. } => {
            SeparableMetric::sample(domain, n, m, |x| 4.0 * x * x, |y| 4.0 * y * y, label)
        }
        MetricKind::ExpMap { a, kappa, .. } => {
            let kappa = kind.kappa(a, kappa);
            SeparableMetric::sample(domain, n, m, |x| (2.0 * x).exp() - kappa, |_| kappa, label)
        }
        MetricKind::CoshMap { .. } => {
            SeparableMetric::sample(domain, n, m, |x| x.sinh().powi(2), |y| y.sin().powi(2), label)
        }
    }
}

/// `tridiag(1, −2, 1)/h²`
fn second_difference(n: usize, h: f64) -> SymMatrix {
    let s = 1.0 / (h * h);
    SymMatrix::tridiagonal(n, s, -2.0 * s).expect("finite mesh width")
}

/// Central-difference discretization of
///
/// ```text
/// v''(x) + λ g1(x) v(x) + μ v(x) = 0
/// w''(y) + λ g2(y) w(y) − μ w(y) = 0
/// ```
///
/// with Dirichlet boundary conditions. The raw pencils `(L_x, Diag g1, I)`
/// and `(L_y, Diag g2, −I)` are exchanged and `λ` is negated, which yields
/// `C1 = −I`, `C2 = I` and `Δ0 = I⊗Diag(g1) + Diag(g2)⊗I`. The returned map
/// recovers the original `(λ, μ) = (−λ̃, μ̃)`; the first equation of the
/// returned problem is the `y` equation of order `m`.
pub fn separable_helmholtz(metric: &SeparableMetric, disc: &Discretization) -> Result<(TwoParamProblem, RecoveryMap)> {
    metric.validate()?;
    if metric.g1.len() != disc.n || metric.g2.len() != disc.m {
        return Err(Error::DimensionMismatch(format!(
            "metric sampled on {}×{} nodes, grid has {}×{}",
            metric.g1.len(),
            metric.g2.len(),
            disc.n,
            disc.m
        )));
    }
    let (n, m) = (disc.n, disc.m);
    let raw = TwoParamProblem::from_matrices(
        [
            second_difference(n, disc.h1),
            SymMatrix::from_diagonal(&metric.g1)?,
            SymMatrix::identity(n),
        ],
        [
            second_difference(m, disc.h2),
            SymMatrix::from_diagonal(&metric.g2)?,
            SymMatrix::identity(m).scaled(-1.0),
        ],
        format!("helmholtz {} n={n} m={m}", metric.map_label),
    )?;
    let map = RecoveryMap::swap_equations().then(&RecoveryMap::negate_lambda());
    Ok((map.transform(&raw), map))
}

/// Eigenvalues `4/h² sin²(kπ/(2(n+1)))`, `k = 1..=n`, of `−tridiag(1, −2, 1)/h²`
/// with `h = 1/(n+1)` scaled to the interval length.
pub fn dirichlet_laplacian_eigenvalue(k: usize, n: usize, length: f64) -> f64 {
    let h = length / (n + 1) as f64;
    4.0 / (h * h) * (k as f64 * PI / (2.0 * (n + 1) as f64)).sin().powi(2)
}
