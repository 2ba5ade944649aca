//! File formats: JSON matrices and linear maps, CSV point clouds.
//!
//! A matrix is `{"rows": n, "cols": n, "data": [[row], [row], ...]}` and a
//! linear map is `{"P": [matrix, ...]}`. CSV output is comma separated with
//! a header row and LF line endings.

use crate::error::{dim_err, OrbitError, Result};
use crate::linalg::{check_finite, Matrix};
use crate::orbit::{LinearMapSpec, PointCloud};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<Matrix> {
        if self.data.len() != self.rows {
            return Err(dim_err("matrix JSON", format!("{} rows", self.rows), format!("{} rows", self.data.len())));
        }
        if let Some(r) = self.data.iter().find(|r| r.len() != self.cols) {
            return Err(dim_err("matrix JSON", format!("{} columns", self.cols), format!("{} columns", r.len())));
        }
        let m = Matrix::from_fn(self.rows, self.cols, |i, j| self.data[i][j]);
        check_finite(&m)?;
        Ok(m)
    }
}

impl From<&Matrix> for MatrixJson {
    fn from(m: &Matrix) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }
}

/// `serialize_with` adapter writing a matrix in the document layout.
pub fn serialize_matrix<S: serde::Serializer>(m: &Matrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from(m).serialize(s)
}

pub fn serialize_vector<S: serde::Serializer>(v: &nalgebra::DVector<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.as_slice().serialize(s)
}

pub fn serialize_matrices<S: serde::Serializer>(ms: &[Matrix], s: S) -> std::result::Result<S::Ok, S::Error> {
    ms.iter().map(MatrixJson::from).collect::<Vec<_>>().serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMapJson {
    #[serde(rename = "P")]
    pub p: Vec<MatrixJson>,
}

impl LinearMapJson {
    pub fn to_map(&self) -> Result<LinearMapSpec> {
        LinearMapSpec::new(self.p.iter().map(MatrixJson::to_matrix).collect::<Result<_>>()?)
    }
}

impl From<&LinearMapSpec> for LinearMapJson {
    fn from(l: &LinearMapSpec) -> Self {
        Self {
            p: l.coefficients().iter().map(MatrixJson::from).collect(),
        }
    }
}

/// Parses a matrix document; parse errors carry line and column.
pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let doc: MatrixJson = serde_json::from_str(text).map_err(json_error)?;
    doc.to_matrix()
}

pub fn parse_linear_map(text: &str) -> Result<LinearMapSpec> {
    let doc: LinearMapJson = serde_json::from_str(text).map_err(json_error)?;
    doc.to_map()
}

pub fn json_error(e: serde_json::Error) -> OrbitError {
    OrbitError::Parse(format!("{} (line {}, column {})", e, e.line(), e.column()))
}

/// `x1,...,xl` header followed by one point per line.
pub fn point_cloud_csv(cloud: &PointCloud) -> String {
    let mut out = String::new();
    let header: Vec<String> = (1..=cloud.dim).map(|i| format!("x{i}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for p in &cloud.points {
        let row: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Inverse of [`point_cloud_csv`].
pub fn parse_point_cloud_csv(text: &str) -> Result<PointCloud> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| OrbitError::Parse("empty CSV".into()))?;
    let dim = header.split(',').count();
    let mut points = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|t| t.parse::<f64>().map_err(|e| OrbitError::Parse(format!("line {}: {e}", k + 2))))
            .collect::<Result<_>>()?;
        if vals.len() != dim {
            return Err(dim_err("point cloud CSV", dim, vals.len()));
        }
        points.push(nalgebra::DVector::from_vec(vals));
    }
    Ok(PointCloud { dim, points, seeds: vec![] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matrix_document() {
        let m = parse_matrix(r#"{"rows": 2, "cols": 2, "data": [[1, 2], [3, 4.5]]}"#).unwrap();
        assert_eq!(m[(1, 0)], 3.0);
        assert_eq!(m[(1, 1)], 4.5);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_matrix("{\"rows\": 2,\n \"cols\": }").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn ragged_rows_name_both_shapes() {
        let err = parse_matrix(r#"{"rows": 2, "cols": 2, "data": [[1, 2], [3]]}"#).unwrap_err();
        assert!(matches!(err, OrbitError::Dimension { .. }));
    }

    #[test]
    fn linear_map_document() {
        let l = parse_linear_map(
            r#"{"P": [{"rows": 2, "cols": 2, "data": [[1,0],[0,0]]}, {"rows": 2, "cols": 2, "data": [[0,0],[1,0]]}]}"#,
        )
        .unwrap();
        assert_eq!(l.ell(), 2);
        let text = serde_json::to_string(&LinearMapJson::from(&l)).unwrap();
        assert_eq!(parse_linear_map(&text).unwrap(), l);
    }

    #[test]
    fn mixed_sizes_rejected() {
        let err = parse_linear_map(
            r#"{"P": [{"rows": 2, "cols": 2, "data": [[1,0],[0,0]]}, {"rows": 1, "cols": 1, "data": [[0]]}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("2x2") && err.to_string().contains("1x1"));
    }

    #[test]
    fn csv_header() {
        let cloud = PointCloud {
            dim: 3,
            points: vec![nalgebra::DVector::from_vec(vec![1.0, -0.5, 2.0])],
            seeds: vec![1],
        };
        assert_eq!(point_cloud_csv(&cloud), "x1,x2,x3\n1,-0.5,2\n");
    }

    proptest! {
        #[test]
        fn matrix_json_round_trip(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
            let mut state = seed;
            let m = Matrix::from_fn(rows, cols, |_, _| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 * 200.0 - 100.0
            });
            let text = serde_json::to_string(&MatrixJson::from(&m)).unwrap();
            prop_assert_eq!(parse_matrix(&text).unwrap(), m);
        }

        #[test]
        fn csv_round_trip(vals in proptest::collection::vec(-1e6f64..1e6, 0..40)) {
            let points: Vec<_> = vals.chunks_exact(2).map(|c| nalgebra::DVector::from_vec(c.to_vec())).collect();
            let cloud = PointCloud { dim: 2, points, seeds: vec![] };
            let back = parse_point_cloud_csv(&point_cloud_csv(&cloud)).unwrap();
            prop_assert_eq!(back.points, cloud.points);
        }
    }
}
