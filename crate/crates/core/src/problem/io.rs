use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Pencil, RecoveryMap, TwoParamProblem};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};

pub const PROBLEM_SCHEMA: &str = "twopar.problem/1";

/// Largest relative asymmetry accepted when loading a matrix.
const SYMMETRY_TOL: f64 = 1e-12;

/// On-disk JSON form of a problem. Matrices are flat row-major arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub schema: String,
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub label: String,
    #[serde(rename = "A1")]
    pub a1: Vec<f64>,
    #[serde(rename = "B1")]
    pub b1: Vec<f64>,
    #[serde(rename = "C1")]
    pub c1: Vec<f64>,
    #[serde(rename = "A2")]
    pub a2: Vec<f64>,
    #[serde(rename = "B2")]
    pub b2: Vec<f64>,
    #[serde(rename = "C2")]
    pub c2: Vec<f64>,
    /// Maps eigenvalues of this problem back to the problem it was derived from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery_map: Option<RecoveryMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<serde_json::Value>,
}

fn load_matrix(name: &str, order: usize, data: &[f64]) -> Result<SymMatrix> {
    if data.len() != order * order {
        return Err(Error::Format(format!(
            "{name}: expected {} entries, found {}",
            order * order,
            data.len()
        )));
    }
    let m = Matrix::from_row_major(order, order, data.to_vec())
        .map_err(|e| Error::Format(format!("{name}: {e}")))?;
    if !m.is_finite() {
        return Err(Error::Format(format!("{name}: non-finite entry")));
    }
    let asym = SymMatrix::asymmetry(&m);
    if asym > SYMMETRY_TOL {
        return Err(Error::Format(format!(
            "{name} is not symmetric (relative asymmetry {asym:.3e})"
        )));
    }
    SymMatrix::from_matrix(m).map_err(|e| Error::Format(format!("{name}: {e}")))
}

impl ProblemFile {
    pub fn from_problem(p: &TwoParamProblem, recovery_map: Option<RecoveryMap>) -> Self {
        let flat = |s: &SymMatrix| s.as_slice().to_vec();
        let (e1, e2) = (p.first(), p.second());
        ProblemFile {
            schema: PROBLEM_SCHEMA.to_string(),
            n: p.n(),
            m: p.m(),
            label: p.label.clone(),
            a1: flat(e1.a()),
            b1: flat(e1.b()),
            c1: flat(e1.c()),
            a2: flat(e2.a()),
            b2: flat(e2.b()),
            c2: flat(e2.c()),
            recovery_map,
            manifest: None,
        }
    }

    /// Validates the schema, sizes and symmetry and builds the problem.
    pub fn to_problem(&self) -> Result<TwoParamProblem> {
        if self.schema != PROBLEM_SCHEMA {
            return Err(Error::Format(format!(
                "unsupported problem schema {:?} (expected {PROBLEM_SCHEMA:?})",
                self.schema
            )));
        }
        if self.n == 0 || self.m == 0 {
            return Err(Error::Format("problem dimensions must be positive".into()));
        }
        if let Some(map) = &self.recovery_map {
            map.validate()?;
        }
        let first = Pencil::new(
            load_matrix("A1", self.n, &self.a1)?,
            load_matrix("B1", self.n, &self.b1)?,
            load_matrix("C1", self.n, &self.c1)?,
        )?;
        let second = Pencil::new(
            load_matrix("A2", self.m, &self.a2)?,
            load_matrix("B2", self.m, &self.b2)?,
            load_matrix("C2", self.m, &self.c2)?,
        )?;
        Ok(TwoParamProblem::new(first, second, self.label.clone()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("problem file serializes")
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string())
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TwoParamProblem {
        let a = SymMatrix::new(2, vec![0.1, 0.3, 0.3, -1.0 / 3.0]).unwrap();
        let i = SymMatrix::identity(2);
        TwoParamProblem::from_matrices([a.clone(), i.clone(), i.scaled(-1.0)], [a, i.scaled(-1.0), i], "s")
            .unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let p = sample();
        let map = RecoveryMap::negate_lambda();
        let file = ProblemFile::from_problem(&p, Some(map));
        let back = ProblemFile::from_json_str(&file.to_json_string()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_problem().unwrap(), p);
        assert_eq!(back.recovery_map, Some(map));
    }

    #[test]
    fn unknown_schema_is_rejected() {
        let mut file = ProblemFile::from_problem(&sample(), None);
        file.schema = "twopar.problem/2".into();
        assert!(matches!(file.to_problem(), Err(Error::Format(_))));
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let mut file = ProblemFile::from_problem(&sample(), None);
        file.a2[1] += 1e-6;
        assert!(matches!(file.to_problem(), Err(Error::Format(_))));
        // within tolerance is accepted and symmetrized
        let mut file = ProblemFile::from_problem(&sample(), None);
        file.a2[1] *= 1.0 + 1e-15;
        let p = file.to_problem().unwrap();
        assert_eq!(p.second().a()[(0, 1)], p.second().a()[(1, 0)]);
    }

    #[test]
    fn wrong_length_is_rejected() {
        let mut file = ProblemFile::from_problem(&sample(), None);
        file.c1.pop();
        assert!(matches!(file.to_problem(), Err(Error::Format(_))));
    }
}
