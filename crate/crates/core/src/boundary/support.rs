use super::maxtrace::{argmax_frames, max_trace};
use crate::error::{dim_err, shape, OrbitError, Result};
use crate::geometry::{halfplane_region, Point, Polygon};
use crate::linalg::{check_square, trace_product, Matrix};
use rayon::prelude::*;
use serde::Serialize;

/// Support value of the image in direction `(cos t, sin t)`.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct SupportSample {
    pub angle: f64,
    pub direction: Point,
    pub value: f64,
    pub touching: Point,
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportBoundary {
    pub samples: Vec<SupportSample>,
    pub region: Polygon,
}

impl SupportBoundary {
    /// `min_t (r_t - <dir_t, x>)`: positive strictly inside the region.
    pub fn margin(&self, x: Point) -> f64 {
        self.samples
            .iter()
            .map(|s| s.value - (s.direction[0] * x[0] + s.direction[1] * x[1]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest amount by which `x` exceeds a support value.
    pub fn violation(&self, x: Point) -> f64 {
        (-self.margin(x)).max(0.0)
    }
}

pub const DEFAULT_GRID: usize = 720;

/// Exact support values of `{ (tr(P X), tr(Q X)) : X in O(A) }` on a
/// uniform grid of directions, the touching points of the maximising
/// frames, and the convex region cut out by the supporting half-planes.
pub fn support_boundary(p: &Matrix, q: &Matrix, a: &Matrix, grid: usize) -> Result<SupportBoundary> {
    let n = check_square(a, "support_boundary")?;
    for m in [p, q] {
        if m.shape() != a.shape() {
            return Err(dim_err("support_boundary", shape(a), shape(m)));
        }
    }
    if n < 2 {
        return Err(OrbitError::Precondition(format!("support boundary needs n >= 2, got n = {n}")));
    }
    if grid < 8 {
        return Err(OrbitError::Precondition(format!("support grid needs at least 8 directions, got {grid}")));
    }
    let samples: Vec<SupportSample> = (0..grid)
        .into_par_iter()
        .map(|k| -> Result<SupportSample> {
            let angle = std::f64::consts::TAU * k as f64 / grid as f64;
            let (s, c) = angle.sin_cos();
            let rotated = p * c + q * s;
            let value = max_trace(&rotated, a)?;
            let (u, v) = argmax_frames(&rotated, a)?;
            let w = u.matrix() * a * v.matrix();
            Ok(SupportSample {
                angle,
                direction: [c, s],
                value,
                touching: [trace_product(p, &w), trace_product(q, &w)],
            })
        })
        .collect::<Result<_>>()?;
    let region = halfplane_region(&samples.iter().map(|s| (s.angle, s.value)).collect::<Vec<_>>());
    Ok(SupportBoundary { samples, region })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::tests::unit;
    use crate::orbit::{sample_image, LinearMapSpec, OrbitSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_circle_support() {
        let b = support_boundary(&unit(2, 0, 0), &unit(2, 1, 0), &Matrix::identity(2, 2), 64).unwrap();
        for s in &b.samples {
            assert!((s.value - 1.0).abs() < 1e-12);
            assert!((s.touching[0].hypot(s.touching[1]) - 1.0).abs() < 1e-12);
            assert!((s.direction[0] * s.touching[0] + s.direction[1] * s.touching[1] - s.value).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_matrix_gives_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let p = Matrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let q = Matrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let b = support_boundary(&p, &q, &Matrix::zeros(3, 3), 32).unwrap();
        assert!(b.samples.iter().all(|s| s.value == 0.0));
        assert!(b.region.diameter() < 1e-12);
    }

    #[test]
    fn samples_lie_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let p = Matrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let q = Matrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let a = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let b = support_boundary(&p, &q, &a, DEFAULT_GRID).unwrap();
        let cloud = sample_image(&LinearMapSpec::new(vec![p, q]).unwrap(), &OrbitSpec::special(a).unwrap(), 20_000, 3).unwrap();
        let worst = cloud.planar().iter().map(|&x| b.violation(x)).fold(0.0, f64::max);
        assert!(worst <= 1e-8, "{worst}");
    }

    #[test]
    fn preconditions() {
        let i = Matrix::identity(2, 2);
        assert!(support_boundary(&i, &i, &i, 4).is_err());
        assert!(support_boundary(&Matrix::identity(1, 1), &Matrix::identity(1, 1), &Matrix::identity(1, 1), 16).is_err());
        assert!(support_boundary(&i, &Matrix::identity(3, 3), &i, 16).is_err());
    }
}
