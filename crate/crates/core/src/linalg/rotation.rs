use super::{check_finite, check_square, orthogonality_residual, Matrix};
use crate::error::{OrbitError, Result};
use crate::tolerance::Tolerances;

/// A special orthogonal matrix: `m m^t = I`, `det m = +1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation(Matrix);

impl serde::Serialize for Rotation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::io::serialize_matrix(&self.0, s)
    }
}

impl Rotation {
    /// Validates orthogonality and orientation against the global matrix tolerance.
    pub fn new(m: Matrix) -> Result<Self> {
        check_square(&m, "Rotation::new")?;
        check_finite(&m)?;
        let tol = Tolerances::global().matrix;
        let orth = orthogonality_residual(&m);
        let det = if orth <= tol { m.determinant() } else { f64::NAN };
        if orth <= tol && (det - 1.0).abs() <= tol {
            Ok(Self(m))
        } else {
            Err(OrbitError::NotRotation { orth, det })
        }
    }

    /// Wraps a matrix the caller has constructed as a rotation.
    pub(crate) fn from_trusted(m: Matrix) -> Self {
        debug_assert!(orthogonality_residual(&m) < 1e-8, "not orthogonal");
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn compose(&self, other: &Rotation) -> Self {
        Self(&self.0 * &other.0)
    }

    /// Orthogonality residual `max |m m^t - I|`.
    pub fn residual(&self) -> f64 {
        orthogonality_residual(&self.0)
    }
}

impl AsRef<Matrix> for Rotation {
    fn as_ref(&self) -> &Matrix {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_reflection() {
        let mut m = Matrix::identity(3, 3);
        m[(2, 2)] = -1.0;
        assert!(matches!(Rotation::new(m), Err(OrbitError::NotRotation { .. })));
    }

    #[test]
    fn rejects_non_orthogonal_and_non_square() {
        assert!(Rotation::new(Matrix::from_element(2, 2, 1.0)).is_err());
        assert!(matches!(
            Rotation::new(Matrix::zeros(2, 3)),
            Err(OrbitError::Dimension { .. })
        ));
    }

    #[test]
    fn accepts_planar_rotation() {
        let r = Rotation::new(super::super::planar(0.3)).unwrap();
        assert_eq!(r.n(), 2);
        assert!(r.residual() < 1e-15);
    }
}
