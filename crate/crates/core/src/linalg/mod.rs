//! Dense real linear algebra specialised to rotation groups.

mod completion;
mod geodesic;
mod haar;
mod rotation;
mod svd;

pub use completion::complete_to_rotation;
pub use geodesic::{geodesic, skew_log, RotationPath};
pub use haar::{haar_orthogonal, haar_rotation};
pub use rotation::Rotation;
pub use svd::{signed_svd, SignedSvd};

use crate::error::{dim_err, shape, OrbitError, Result};
use nalgebra::DMatrix;

/// Dense real matrix, the universal carrier.
pub type Matrix = DMatrix<f64>;

/// Rejects NaN and infinite entries.
pub fn check_finite(m: &Matrix) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(OrbitError::NonFinite)
    }
}

pub fn check_square(m: &Matrix, context: &'static str) -> Result<usize> {
    if m.nrows() == m.ncols() && m.nrows() > 0 {
        Ok(m.nrows())
    } else {
        Err(dim_err(context, "square n x n with n >= 1", shape(m)))
    }
}

pub fn check_same_shape(a: &Matrix, b: &Matrix, context: &'static str) -> Result<()> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(dim_err(context, shape(a), shape(b)))
    }
}

/// `tr(a * b)` without forming the product.
pub fn trace_product(a: &Matrix, b: &Matrix) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Largest absolute entry.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// `max |m m^t - I|`.
pub fn orthogonality_residual(m: &Matrix) -> f64 {
    let n = m.nrows();
    max_abs(&(m * m.transpose() - Matrix::identity(n, n)))
}

/// Identity of size `n` with `block` written at the rows/columns in `idx`.
pub fn embed(n: usize, idx: &[usize], block: &Matrix) -> Matrix {
    debug_assert_eq!(block.nrows(), idx.len());
    let mut out = Matrix::identity(n, n);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            out[(i, j)] = block[(a, b)];
        }
    }
    out
}

/// Block diagonal matrix from square blocks.
pub fn block_diag(blocks: &[Matrix]) -> Matrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Matrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

/// `diag(-1, 1, ..., 1)`, the fixed reflection used to move between the
/// two cosets of `O_n`.
pub fn first_reflection(n: usize) -> Matrix {
    let mut d = Matrix::identity(n, n);
    d[(0, 0)] = -1.0;
    d
}

/// Planar rotation `R(theta) = [[cos, sin], [-sin, cos]]`.
pub fn planar(theta: f64) -> Matrix {
    let (s, c) = theta.sin_cos();
    Matrix::from_row_slice(2, 2, &[c, s, -s, c])
}

/// Identity of size `n` with `R(theta)` acting on rows/columns `i`, `j`.
pub fn givens(n: usize, i: usize, j: usize, theta: f64) -> Matrix {
    embed(n, &[i, j], &planar(theta))
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Sign convention with `sign(0) = +1`.
pub fn sign_or_one(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}
