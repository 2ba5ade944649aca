//! Problem documents read with `--input`.

use serde::Deserialize;
use so_orbit::io::{json_error, MatrixJson};
use so_orbit::{Group, JointKind, Matrix, OrbitError, Result, Rotation};

/// Every field is optional; each command picks what it needs.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    #[serde(rename = "A")]
    pub a: Option<MatrixJson>,
    #[serde(rename = "P")]
    pub p: Option<Vec<MatrixJson>>,
    #[serde(rename = "U")]
    pub u: Option<MatrixJson>,
    #[serde(rename = "V")]
    pub v: Option<MatrixJson>,
    pub group: Option<Group>,
    pub joint: Option<JointDoc>,
    pub d: Option<Vec<f64>>,
    pub s: Option<Vec<f64>>,
    pub det_sign: Option<i8>,
    /// Query point for `ellipse`.
    pub y: Option<Vec<f64>>,
    /// Coordinate pair for `ellipse` / `degenerate` on two maps.
    pub rows: Option<[usize; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDoc {
    pub kind: JointKind,
    #[serde(rename = "A")]
    pub a: Vec<MatrixJson>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<MatrixJson>>,
}

fn missing(field: &str) -> OrbitError {
    OrbitError::Parse(format!("input document has no \"{field}\" field"))
}

impl Problem {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(json_error)
    }

    pub fn a(&self) -> Result<Matrix> {
        self.a.as_ref().ok_or_else(|| missing("A"))?.to_matrix()
    }

    pub fn ps(&self) -> Result<Vec<Matrix>> {
        self.p.as_ref().ok_or_else(|| missing("P"))?.iter().map(MatrixJson::to_matrix).collect()
    }

    /// The first `k` coefficient matrices, erroring when fewer are given.
    pub fn ps_at_least(&self, k: usize) -> Result<Vec<Matrix>> {
        let ps = self.ps()?;
        if ps.len() < k {
            return Err(OrbitError::Dimension {
                context: "input P",
                expected: format!("at least {k} matrices"),
                found: ps.len().to_string(),
            });
        }
        Ok(ps)
    }

    pub fn rotation(&self, field: &str) -> Result<Rotation> {
        let m = match field {
            "U" => self.u.as_ref(),
            _ => self.v.as_ref(),
        };
        Rotation::new(m.ok_or_else(|| missing(field))?.to_matrix()?)
    }

    pub fn group(&self) -> Group {
        self.group.unwrap_or_default()
    }
}
