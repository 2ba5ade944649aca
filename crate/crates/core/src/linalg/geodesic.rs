use super::{haar_rotation, max_abs, Matrix, Rotation};
use crate::error::{dim_err, OrbitError, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Distance of the spectrum of `(R + R^t)/2` from `-1` below which the
/// principal logarithm is treated as undefined.
const HALF_TURN_GUARD: f64 = 1e-6;

/// Seed of the deterministic stream used for detour rotations.
const DETOUR_SEED: u64 = 0x005e_ed0f_d370;

/// Piecewise geodesic `f(s) = start_i * exp(t * K_i)` over equal sub-intervals of `[0, 1]`.
#[derive(Debug, Clone)]
pub struct RotationPath {
    segments: Vec<(Rotation, Matrix)>,
    end: Rotation,
}

impl RotationPath {
    pub fn constant(r: Rotation) -> Self {
        let n = r.n();
        Self {
            segments: vec![(r.clone(), Matrix::zeros(n, n))],
            end: r,
        }
    }

    pub fn start(&self) -> &Rotation {
        &self.segments[0].0
    }

    pub fn end(&self) -> &Rotation {
        &self.end
    }

    /// Generator of the first segment.
    pub fn generator(&self) -> &Matrix {
        &self.segments[0].1
    }

    pub fn segments(&self) -> usize {
        self.segments.len()
    }

    pub fn at(&self, s: f64) -> Rotation {
        if s <= 0.0 {
            return self.segments[0].0.clone();
        }
        if s >= 1.0 {
            return self.end.clone();
        }
        let m = self.segments.len();
        let t = s * m as f64;
        let idx = (t.floor() as usize).min(m - 1);
        let local = t - idx as f64;
        let (start, k) = &self.segments[idx];
        Rotation::from_trusted(start.matrix() * (k * local).exp())
    }
}

/// Principal logarithm of a rotation as a skew-symmetric matrix, or `None`
/// when the rotation has (numerically) an eigenvalue `-1`.
///
/// With `C = (R + R^t)/2` and `S = (R - R^t)/2` commuting, `log R = S g(C)`
/// where `g(cos phi) = phi / sin phi`.
pub fn skew_log(r: &Matrix) -> Option<Matrix> {
    let n = r.nrows();
    let c = (r + r.transpose()) * 0.5;
    let s = (r - r.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&x| x < -1.0 + HALF_TURN_GUARD) {
        return None;
    }
    let g = eig.eigenvalues.map(|x| {
        let x = x.clamp(-1.0, 1.0);
        let phi = x.acos();
        if phi < 1e-4 {
            1.0 + phi * phi / 6.0
        } else {
            phi / phi.sin()
        }
    });
    let gm = &eig.eigenvectors * Matrix::from_diagonal(&g) * eig.eigenvectors.transpose();
    let k = &s * gm;
    let k = (&k - k.transpose()) * 0.5;
    let back = k.exp();
    if max_abs(&(back - r)) <= 1e-11 * (n as f64).max(1.0) {
        Some(k)
    } else {
        None
    }
}

/// Continuous path in `SO_n` from `from` to `to`.
///
/// Uses the principal logarithm of `from^t to`. When that is undefined the
/// path detours through a Haar-sampled intermediate rotation drawn from a
/// fixed-seed stream, so the result is deterministic.
pub fn geodesic(from: &Rotation, to: &Rotation) -> Result<RotationPath> {
    if from.n() != to.n() {
        return Err(dim_err("geodesic", format!("SO_{}", from.n()), format!("SO_{}", to.n())));
    }
    let rel = from.matrix().transpose() * to.matrix();
    if let Some(k) = skew_log(&rel) {
        return Ok(RotationPath {
            segments: vec![(from.clone(), k)],
            end: to.clone(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DETOUR_SEED);
    for _ in 0..32 {
        let mid = haar_rotation(from.n(), &mut rng);
        let k1 = skew_log(&(from.matrix().transpose() * mid.matrix()));
        let k2 = skew_log(&(mid.matrix().transpose() * to.matrix()));
        if let (Some(k1), Some(k2)) = (k1, k2) {
            return Ok(RotationPath {
                segments: vec![(from.clone(), k1), (mid, k2)],
                end: to.clone(),
            });
        }
    }
    Err(OrbitError::Numerical("no detour rotation found for geodesic".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{orthogonality_residual, planar};
    use rand::SeedableRng;

    #[test]
    fn constant_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_rotation(4, &mut rng);
        let p = geodesic(&u, &u).unwrap();
        assert!(max_abs(p.generator()) < 1e-14);
        assert!(max_abs(&(p.at(0.37).matrix() - u.matrix())) < 1e-14);
    }

    #[test]
    fn planar_midpoint() {
        let to = Rotation::new(planar(std::f64::consts::FRAC_PI_2)).unwrap();
        let p = geodesic(&Rotation::identity(2), &to).unwrap();
        let mid = p.at(0.5);
        assert!(max_abs(&(mid.matrix() - planar(std::f64::consts::FRAC_PI_4))) < 1e-12);
    }

    #[test]
    fn random_paths_stay_on_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = haar_rotation(4, &mut rng);
            let b = haar_rotation(4, &mut rng);
            let p = geodesic(&a, &b).unwrap();
            assert!(max_abs(&((p.start().matrix() * p.generator().exp()) - b.matrix())) <= 1e-10 || p.segments() == 2);
            for i in 0..=100 {
                let f = p.at(i as f64 / 100.0);
                assert!(orthogonality_residual(f.matrix()) <= 1e-10);
                assert!((f.matrix().determinant() - 1.0).abs() <= 1e-10);
            }
            assert!(max_abs(&(p.at(1.0 - 1e-15).matrix() - b.matrix())) <= 1e-10);
        }
    }

    #[test]
    fn half_turn_detours() {
        // diag(-1,-1,1) has a double eigenvalue -1.
        let mut m = Matrix::identity(3, 3);
        m[(0, 0)] = -1.0;
        m[(1, 1)] = -1.0;
        let to = Rotation::new(m).unwrap();
        let p = geodesic(&Rotation::identity(3), &to).unwrap();
        assert_eq!(p.segments(), 2);
        for i in 0..=100 {
            assert!(p.at(i as f64 / 100.0).residual() <= 1e-10);
        }
        assert!(max_abs(&(p.at(0.999_999_999).matrix() - to.matrix())) < 1e-7);
        // continuity at the junction
        let l = p.at(0.5 - 1e-12);
        let r = p.at(0.5 + 1e-12);
        assert!(max_abs(&(l.matrix() - r.matrix())) < 1e-9);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(geodesic(&Rotation::identity(2), &Rotation::identity(3)).is_err());
    }
}
