//! Alternating index-targeted solver for right-definite two-parameter
//! eigenvalue problems
//!
//! ```text
//! (A1 + λ B1 + μ C1) u = 0
//! (A2 + λ B2 + μ C2) v = 0
//! ```
//!
//! together with a dense Kronecker-operator reference solver, problem
//! generators and error metrics.

pub mod alternating;
pub mod error;
pub mod generators;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod problem;
pub mod random;

pub use alternating::{solve_all, solve_index, Init, QuadraticForms, Solution, SolveOptions, TraceEntry};
pub use error::{Error, Result};
pub use linalg::{EigenDecomposition, Matrix, SymMatrix};
pub use metrics::IndexError;
pub use problem::{IndexPair, Pencil, RecoveryMap, TwoParamProblem};
