use super::support::{support_boundary, SupportBoundary};
use crate::error::{dim_err, shape, OrbitError, Result};
use crate::geometry::{convex_hull, Point};
use crate::linalg::{check_square, signed_svd, Matrix};
use crate::orbit::{sample_image, LinearMapSpec, OrbitSpec};
use crate::tolerance::Tolerances;
use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

/// Stability of the sampled image under a small separation of tied
/// singular values.
#[derive(Debug, Clone, Serialize)]
pub struct DriftReport {
    pub delta: f64,
    pub drift: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub n: usize,
    pub samples: usize,
    pub grid: usize,
    pub seed: u64,
    pub max_support_violation: f64,
    /// Samples exceeding some support value by more than the boundary tolerance.
    pub violations: usize,
    pub hull_to_region: f64,
    pub region_to_hull: f64,
    pub region_diameter: f64,
    /// `region_to_hull / region_diameter`.
    pub relative_gap: f64,
    pub hull_vertices: usize,
    pub region_vertices: usize,
    pub tied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftReport>,
    pub tolerances: Tolerances,
}

pub const DRIFT_DELTA: f64 = 1e-6;

fn tied(s: &[f64], tol: &Tolerances) -> bool {
    let scale = s[0].abs().max(1.0);
    s.windows(2).any(|w| (w[0].abs() - w[1].abs()).abs() <= tol.tie_gap * scale)
}

/// `A` with singular values pushed apart by `delta (n-1-i)/(n-1)`.
fn separate(a: &Matrix, delta: f64) -> Result<Matrix> {
    let n = a.nrows();
    let f = signed_svd(a)?;
    let s: Vec<f64> = f
        .s
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let bump = if n > 1 { delta * (n - 1 - i) as f64 / (n - 1) as f64 } else { 0.0 };
            crate::linalg::sign_or_one(x) * (x.abs() + bump)
        })
        .collect();
    Ok(f.u.matrix() * Matrix::from_diagonal(&DVector::from_vec(s)) * f.v.matrix().transpose())
}

/// Compares the exact support region of `{(tr(P X), tr(Q X)) : X in O(A)}`
/// with the convex hull of a Haar sample of the image.
pub fn convexity_check(p: &Matrix, q: &Matrix, a: &Matrix, samples: usize, seed: u64, grid: usize) -> Result<ConvexityReport> {
    let n = check_square(a, "convexity_check")?;
    for m in [p, q] {
        if m.shape() != a.shape() {
            return Err(dim_err("convexity_check", shape(a), shape(m)));
        }
    }
    if n < 3 {
        return Err(OrbitError::Precondition(format!("convexity check needs n >= 3, got n = {n}")));
    }
    let tol = Tolerances::global();
    let boundary: SupportBoundary = support_boundary(p, q, a, grid)?;
    let l = LinearMapSpec::new(vec![p.clone(), q.clone()])?;
    let cloud = sample_image(&l, &OrbitSpec::special(a.clone())?, samples, seed)?;
    let pts: Vec<Point> = cloud.planar();

    let excess: Vec<f64> = pts.par_iter().map(|&x| boundary.violation(x)).collect();
    let max_support_violation = excess.iter().copied().fold(0.0, f64::max);
    let violations = excess.iter().filter(|&&e| e > tol.boundary).count();

    let hull = convex_hull(&pts);
    let region = &boundary.region;
    let hull_to_region = hull.excess_over(region);
    let region_to_hull = region.excess_over(&hull);
    let region_diameter = region.diameter();
    let relative_gap = if region_diameter > tol.boundary {
        region_to_hull / region_diameter
    } else if region_to_hull <= tol.boundary {
        0.0
    } else {
        f64::INFINITY
    };

    let sv = crate::linalg::singular_values(a);
    let is_tied = tied(&sv, &tol);
    let drift = if is_tied {
        let moved = separate(a, DRIFT_DELTA)?;
        let other = sample_image(&l, &OrbitSpec::special(moved)?, samples, seed)?;
        let drift = cloud.points.iter().zip(&other.points).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let bound = 10.0 * DRIFT_DELTA * (p.norm() + q.norm());
        Some(DriftReport { delta: DRIFT_DELTA, drift, bound, pass: drift <= bound })
    } else {
        None
    };
    Ok(ConvexityReport {
        n,
        samples,
        grid,
        seed,
        max_support_violation,
        violations,
        hull_to_region,
        region_to_hull,
        region_diameter,
        relative_gap,
        hull_vertices: hull.vertices.len(),
        region_vertices: region.vertices.len(),
        tied: is_tied,
        drift,
        tolerances: tol,
    })
}
