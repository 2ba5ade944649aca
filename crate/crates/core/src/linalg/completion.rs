use super::{Matrix, Rotation};
use crate::error::{dim_err, OrbitError, Result};
use crate::tolerance::Tolerances;
use nalgebra::DVector;

/// Extends `k` orthonormal columns to a rotation whose first `k` columns are
/// exactly the inputs. Free columns come from Gram-Schmidt against the
/// standard basis (largest residual first); the last free column is negated
/// when needed to make the determinant `+1`.
pub fn complete_to_rotation(n: usize, columns: &[DVector<f64>]) -> Result<Rotation> {
    let k = columns.len();
    if k > n {
        return Err(dim_err("complete_to_rotation", format!("at most {n} columns"), k));
    }
    if let Some(c) = columns.iter().find(|c| c.len() != n) {
        return Err(dim_err("complete_to_rotation", format!("vectors of length {n}"), c.len()));
    }
    let tol = Tolerances::global().matrix;
    let mut worst = 0.0_f64;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((columns[i].dot(&columns[j]) - target).abs());
        }
    }
    if worst > tol {
        return Err(OrbitError::NotOrthonormal(worst));
    }

    let mut basis: Vec<DVector<f64>> = columns.to_vec();
    while basis.len() < n {
        let mut best: Option<(f64, DVector<f64>)> = None;
        for e in 0..n {
            let mut v = DVector::zeros(n);
            v[e] = 1.0;
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for b in &basis {
                    let d = b.dot(&v);
                    v -= b * d;
                }
            }
            let norm = v.norm();
            if best.as_ref().is_none_or(|(bn, _)| norm > *bn + 1e-12) {
                best = Some((norm, v));
            }
        }
        let (norm, v) = best.expect("n > 0");
        basis.push(v / norm);
    }

    let mut m = Matrix::from_columns(&basis);
    if m.determinant() < 0.0 {
        if k == n {
            return Err(OrbitError::DeterminantObstruction);
        }
        m.column_mut(n - 1).neg_mut();
    }
    Ok(Rotation::from_trusted(m))
}
