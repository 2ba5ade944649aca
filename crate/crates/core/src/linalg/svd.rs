use super::{check_finite, check_square, Matrix, Rotation};
use crate::error::Result;
use nalgebra::DVector;

/// `A = u * diag(s) * v^t` with both factors in `SO_n`. The orientation of
/// `A` is carried by the sign of the last entry of `s`.
#[derive(Debug, Clone)]
pub struct SignedSvd {
    pub u: Rotation,
    pub v: Rotation,
    pub s: Vec<f64>,
}

impl SignedSvd {
    pub fn reconstruct(&self) -> Matrix {
        let sigma = Matrix::from_diagonal(&DVector::from_column_slice(&self.s));
        self.u.matrix() * sigma * self.v.matrix().transpose()
    }

    /// `diag(s)`.
    pub fn sigma(&self) -> Matrix {
        Matrix::from_diagonal(&DVector::from_column_slice(&self.s))
    }

    /// Sign of the determinant implied by the factorisation (`0` for singular input).
    pub fn det_sign(&self) -> i8 {
        match self.s.last() {
            Some(x) if *x > 0.0 => 1,
            Some(x) if *x < 0.0 => -1,
            _ => 0,
        }
    }
}

/// Signed singular value decomposition.
///
/// Starts from the standard SVD with descending singular values. If
/// `det(u) < 0` the last column of `u` and `s_n` are negated; then if
/// `det(v) < 0` the last column of `v` and `s_n` are negated again.
pub fn signed_svd(a: &Matrix) -> Result<SignedSvd> {
    let n = check_square(a, "signed_svd")?;
    check_finite(a)?;
    let svd = a.clone().svd(true, true);
    let u0 = svd.u.expect("u requested");
    let vt0 = svd.v_t.expect("v_t requested");
    let sv = &svd.singular_values;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));

    let mut u = Matrix::zeros(n, n);
    let mut v = Matrix::zeros(n, n);
    let mut s = vec![0.0; n];
    for (k, &i) in order.iter().enumerate() {
        u.set_column(k, &u0.column(i));
        v.set_column(k, &vt0.row(i).transpose());
        s[k] = sv[i];
    }

    if u.determinant() < 0.0 {
        let mut c = u.column_mut(n - 1);
        c.neg_mut();
        s[n - 1] = -s[n - 1];
    }
    if v.determinant() < 0.0 {
        let mut c = v.column_mut(n - 1);
        c.neg_mut();
        s[n - 1] = -s[n - 1];
    }
    Ok(SignedSvd {
        u: Rotation::from_trusted(u),
        v: Rotation::from_trusted(v),
        s,
    })
}
