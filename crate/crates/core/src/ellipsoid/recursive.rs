use crate::error::{dim_err, OrbitError, Result};
use crate::linalg::{check_square, planar, Matrix, Rotation};
use nalgebra::DVector;

/// `R(theta_1, ..., theta_k)` in `SO_{2^k}`.
#[derive(Debug, Clone)]
pub struct RecursiveRotation {
    pub angles: Vec<f64>,
    pub rotation: Rotation,
}

/// Builds `R(theta_1) = [[cos, sin], [-sin, cos]]` and
/// `R(theta_1..theta_k) = [[cos t_k I, sin t_k R'], [-sin t_k R'^t, cos t_k I]]`
/// with `R' = R(theta_1..theta_{k-1})`.
pub fn recursive_rotation(angles: &[f64]) -> Result<RecursiveRotation> {
    if angles.is_empty() {
        return Err(OrbitError::Precondition("recursive rotation needs at least one angle".into()));
    }
    Ok(RecursiveRotation {
        angles: angles.to_vec(),
        rotation: Rotation::from_trusted(build(angles)),
    })
}

pub(crate) fn build(angles: &[f64]) -> Matrix {
    match angles.split_last() {
        None => Matrix::identity(1, 1),
        Some((&t, [])) => planar(t),
        Some((&t, rest)) => {
            let inner = build(rest);
            let half = inner.nrows();
            let (s, c) = t.sin_cos();
            let mut out = Matrix::zeros(2 * half, 2 * half);
            for i in 0..half {
                out[(i, i)] = c;
                out[(half + i, half + i)] = c;
            }
            out.view_mut((0, half), (half, half)).copy_from(&(&inner * s));
            out.view_mut((half, 0), (half, half)).copy_from(&(inner.transpose() * -s));
            out
        }
    }
}

/// `(cos t_{l-1}, sin t_{l-1} cos t_{l-2}, ..., sin t_{l-1} ... sin t_1)`:
/// a unit vector of length `angles.len() + 1`.
pub fn spherical(angles: &[f64]) -> DVector<f64> {
    let k = angles.len();
    let mut out = DVector::zeros(k + 1);
    let mut prod = 1.0;
    for i in 0..k {
        let t = angles[k - 1 - i];
        out[i] = prod * t.cos();
        prod *= t.sin();
    }
    out[k] = prod;
    out
}

/// Angles `theta` with `spherical(theta) = z / |z|`.
pub fn inverse_spherical(z: &DVector<f64>) -> Vec<f64> {
    let l = z.len();
    let k = l.saturating_sub(1);
    let mut angles = vec![0.0; k];
    for i in 0..k {
        angles[k - 1 - i] = if i + 1 == k {
            z[k].atan2(z[k - 1])
        } else {
            z.rows(i + 1, l - i - 1).norm().atan2(z[i])
        };
    }
    angles
}

/// Coefficients `a` with `tr(R(theta) A) = a . spherical(theta)` for every
/// `theta`. Computed from the block split `A = [[A1, A2], [A3, A4]]`: the
/// head is `tr(A1 + A4)` and the tail is the coefficient vector of `A3 - A2^t`.
pub fn spherical_coeffs(a: &Matrix) -> Result<DVector<f64>> {
    let n = check_square(a, "spherical_coeffs")?;
    if n < 2 || !n.is_power_of_two() {
        return Err(dim_err("spherical_coeffs", "size 2^(l-1) with l >= 2", n));
    }
    Ok(coeffs(a))
}

pub(crate) fn coeffs(a: &Matrix) -> DVector<f64> {
    let n = a.nrows();
    if n == 1 {
        return DVector::from_element(1, a[(0, 0)]);
    }
    let h = n / 2;
    let head = a.view((0, 0), (h, h)).trace() + a.view((h, h), (h, h)).trace();
    let tail = coeffs(&(a.view((h, 0), (h, h)) - a.view((0, h), (h, h)).transpose()));
    let mut out = DVector::zeros(tail.len() + 1);
    out[0] = head;
    out.rows_mut(1, tail.len()).copy_from(&tail);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, orthogonality_residual, trace_product};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn base_cases() {
        let r0 = recursive_rotation(&[0.0]).unwrap();
        assert_eq!(r0.rotation.matrix(), &Matrix::identity(2, 2));
        let r = recursive_rotation(&[FRAC_PI_2]).unwrap();
        let expect = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(max_abs(&(r.rotation.matrix() - expect)) < 1e-16);
        assert!(recursive_rotation(&[]).is_err());
    }

    #[test]
    fn random_recursive_rotations_are_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 1..=4 {
            for _ in 0..20 {
                let angles: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
                let r = recursive_rotation(&angles).unwrap();
                let m = r.rotation.matrix();
                assert_eq!(m.nrows(), 1 << k);
                assert!(orthogonality_residual(m) <= 1e-12);
                assert!((m.determinant() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn planar_coefficients() {
        assert_eq!(spherical_coeffs(&Matrix::identity(2, 2)).unwrap().as_slice(), &[2.0, 0.0]);
        let j = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert_eq!(spherical_coeffs(&j).unwrap().as_slice(), &[0.0, 2.0]);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(spherical_coeffs(&Matrix::identity(3, 3)).is_err());
        assert!(spherical_coeffs(&Matrix::identity(1, 1)).is_err());
    }

    #[test]
    fn trace_identity_on_angle_grid() {
        // Oracle: build R(theta) explicitly and take the trace directly.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for l in [2usize, 3, 4] {
            let n = 1 << (l - 1);
            for _ in 0..5 {
                let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
                let c = spherical_coeffs(&a).unwrap();
                let mut worst = 0.0_f64;
                for _ in 0..1000 {
                    let angles: Vec<f64> = (0..l - 1).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
                    let direct = trace_product(&build(&angles), &a);
                    worst = worst.max((direct - c.dot(&spherical(&angles))).abs());
                }
                assert!(worst <= 1e-10, "l={l}: {worst}");
            }
        }
    }

    #[test]
    fn inverse_spherical_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for l in 2..=6 {
            for _ in 0..100 {
                let z = DVector::from_fn(l, |_, _| rng.random_range(-1.0..1.0));
                let z = &z / z.norm();
                let back = spherical(&inverse_spherical(&z));
                assert!((back - &z).amax() < 1e-12);
            }
        }
        // poles and axis-aligned vectors
        for l in 2..=4 {
            for i in 0..l {
                for sgn in [1.0, -1.0] {
                    let mut z = DVector::zeros(l);
                    z[i] = sgn;
                    assert!((spherical(&inverse_spherical(&z)) - &z).amax() < 1e-15);
                }
            }
        }
    }
}
