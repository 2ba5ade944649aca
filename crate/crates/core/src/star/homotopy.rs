use crate::ellipsoid::{inverse_spherical, GapEval, Membership, MembershipResult};
use crate::ellipsoid::EllipsoidCurve;
use crate::error::{OrbitError, Result};
use crate::linalg::{geodesic, givens, trace_product, Matrix, Rotation, RotationPath};
use crate::tolerance::Tolerances;
use nalgebra::DVector;
use serde::Serialize;

/// A continuous family of ellipses indexed by frames, together with the
/// rotation realising each ellipse point.
pub trait EllipseFamily {
    type Frame: Clone;
    type Path;

    fn curve(&self, frame: &Self::Frame) -> EllipsoidCurve;
    fn path(&self, from: &Self::Frame, to: &Self::Frame) -> Result<Self::Path>;
    fn along(&self, path: &Self::Path, s: f64) -> Self::Frame;
    fn witness(&self, frame: &Self::Frame, angles: &[f64]) -> Rotation;
    /// Image of a witness, recomputed from the coefficient matrices.
    fn evaluate(&self, witness: &Rotation) -> DVector<f64>;
}

/// `E(U)` for a fixed coordinate pair, frames in `SO_n`.
#[derive(Debug, Clone)]
pub struct RowPairFamily {
    pub p: Matrix,
    pub q: Matrix,
    pub rows: (usize, usize),
}

impl EllipseFamily for RowPairFamily {
    type Frame = Rotation;
    type Path = RotationPath;

    fn curve(&self, frame: &Rotation) -> EllipsoidCurve {
        crate::ellipsoid::curve_eu(&self.p, &self.q, frame.matrix(), self.rows)
    }

    fn path(&self, from: &Rotation, to: &Rotation) -> Result<RotationPath> {
        geodesic(from, to)
    }

    fn along(&self, path: &RotationPath, s: f64) -> Rotation {
        path.at(s)
    }

    fn witness(&self, frame: &Rotation, angles: &[f64]) -> Rotation {
        let n = frame.n();
        Rotation::from_trusted(frame.matrix() * givens(n, self.rows.0, self.rows.1, angles[0]))
    }

    fn evaluate(&self, w: &Rotation) -> DVector<f64> {
        DVector::from_vec(vec![trace_product(&self.p, w.matrix()), trace_product(&self.q, w.matrix())])
    }
}

/// `E(U, V)` for `N x N` coefficient matrices, frames in `SO_N x SO_N`.
#[derive(Debug, Clone)]
pub struct BlockFamily {
    pub mats: Vec<Matrix>,
}

impl EllipseFamily for BlockFamily {
    type Frame = (Rotation, Rotation);
    type Path = (RotationPath, RotationPath);

    fn curve(&self, (u, v): &Self::Frame) -> EllipsoidCurve {
        crate::ellipsoid::curve_euv(&self.mats, u.matrix(), v.matrix())
    }

    fn path(&self, from: &Self::Frame, to: &Self::Frame) -> Result<Self::Path> {
        Ok((geodesic(&from.0, &to.0)?, geodesic(&from.1, &to.1)?))
    }

    fn along(&self, path: &Self::Path, s: f64) -> Self::Frame {
        (path.0.at(s), path.1.at(s))
    }

    fn witness(&self, (u, v): &Self::Frame, angles: &[f64]) -> Rotation {
        crate::ellipsoid::ellipsoid_witness(u, v, angles)
    }

    fn evaluate(&self, w: &Rotation) -> DVector<f64> {
        DVector::from_iterator(self.mats.len(), self.mats.iter().map(|m| trace_product(m, w.matrix())))
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum HomotopyEnd {
    /// The target was already on the starting curve.
    Start,
    /// Found by bisection on the frame path.
    Crossing,
    /// The target lies on the degenerate terminal curve.
    Degenerate,
}

#[derive(Debug, Clone)]
pub struct HomotopyOutcome {
    pub witness: Rotation,
    pub angles: Vec<f64>,
    pub s: f64,
    pub iterations: usize,
    pub end: HomotopyEnd,
    pub achieved: DVector<f64>,
    pub residual: f64,
}

/// Finds a frame on the path from `start` to `degenerate` whose curve
/// passes through `y`, and returns the rotation realising `y` there.
///
/// `y` must lie inside or on the starting curve. The terminal curve has
/// empty interior, so `g(s) = |T_s^{-1}(y - c_s)| - 1` changes sign (a
/// degenerate curve missing `y` counts as `g = +inf`).
pub fn homotopy_realize<F: EllipseFamily>(
    family: &F,
    y: &DVector<f64>,
    start: &F::Frame,
    degenerate: &F::Frame,
) -> Result<HomotopyOutcome> {
    let tol = Tolerances::global();
    let finish = |frame: &F::Frame, angles: Vec<f64>, s: f64, iterations: usize, end: HomotopyEnd| {
        let witness = family.witness(frame, &angles);
        let achieved = family.evaluate(&witness);
        let residual = (&achieved - y).norm();
        HomotopyOutcome { witness, angles, s, iterations, end, achieved, residual }
    };

    match family.curve(start).gap(y, &tol) {
        GapEval::Finite { gap, z } => {
            if gap > 0.0 {
                if gap <= tol.boundary {
                    return Ok(finish(start, inverse_spherical(&z), 0.0, 0, HomotopyEnd::Start));
                }
                return Err(OrbitError::Precondition(format!(
                    "target lies outside the starting ellipse (q - 1 = {gap:.3e})"
                )));
            }
            if gap.abs() <= tol.homotopy_gap {
                return Ok(finish(start, inverse_spherical(&z), 0.0, 0, HomotopyEnd::Start));
            }
        }
        GapEval::Degenerate(m) => {
            return match m.witness {
                Some(angles) => Ok(finish(start, angles, 0.0, 0, HomotopyEnd::Start)),
                None => Err(OrbitError::Precondition(
                    "target is not on the degenerate starting ellipse".into(),
                )),
            };
        }
    }

    match family.curve(degenerate).gap(y, &tol) {
        GapEval::Degenerate(MembershipResult { witness: Some(angles), .. }) => {
            return Ok(finish(degenerate, angles, 1.0, 0, HomotopyEnd::Degenerate));
        }
        GapEval::Degenerate(_) => {}
        GapEval::Finite { gap, .. } => {
            if gap < 0.0 {
                return Err(OrbitError::Numerical(format!(
                    "terminal frame is not degenerate (g = {gap:.3e})"
                )));
            }
        }
    }

    let path = family.path(start, degenerate)?;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    // best finite evaluation seen, for the collapsed-bracket fallback
    let mut best: Option<(f64, f64, DVector<f64>)> = None;
    let mut iterations = 0;
    while iterations < tol.max_bisection {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let frame = family.along(&path, mid);
        match family.curve(&frame).gap(y, &tol) {
            GapEval::Finite { gap, z } => {
                if gap.abs() <= tol.homotopy_gap {
                    return Ok(finish(&frame, inverse_spherical(&z), mid, iterations, HomotopyEnd::Crossing));
                }
                if best.as_ref().is_none_or(|b| gap.abs() < b.1.abs()) {
                    best = Some((mid, gap, z));
                }
                if gap < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            GapEval::Degenerate(m) => match (m.classification, m.witness) {
                (Membership::OnDegenerateSpan, Some(angles)) => {
                    return Ok(finish(&frame, angles, mid, iterations, HomotopyEnd::Crossing));
                }
                _ => hi = mid,
            },
        }
    }
    if let Some((s, _, z)) = best {
        let frame = family.along(&path, s);
        let out = finish(&frame, inverse_spherical(&z), s, iterations, HomotopyEnd::Crossing);
        if out.residual <= tol.certificate {
            return Ok(out);
        }
        return Err(OrbitError::Numerical(format!(
            "homotopy bisection stalled at s = {s:.6} with residual {:.3e}",
            out.residual
        )));
    }
    Err(OrbitError::Numerical("homotopy bisection found no crossing".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellipsoid::{degenerate_u0, degenerate_uv};
    use crate::linalg::haar_rotation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn row_pair_inside_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in [3usize, 4, 6] {
            for _ in 0..20 {
                let p = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
                let q = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
                let fam = RowPairFamily { p: p.clone(), q, rows: (0, 1) };
                let u = haar_rotation(n, &mut rng);
                let e = fam.curve(&u);
                let eps = rng.random_range(0.0..1.0);
                let y = &e.shape * DVector::from_vec(vec![eps, 0.0]) + &e.center;
                let u0 = degenerate_u0(&p).unwrap().u0;
                let out = homotopy_realize(&fam, &y, &u, &u0).unwrap();
                assert!(out.residual <= 1e-8, "{}", out.residual);
                assert!((0.0..=1.0).contains(&out.s));
            }
        }
    }

    #[test]
    fn block_inside_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for l in [3usize, 4] {
            let n = 1 << (l - 1);
            for _ in 0..10 {
                let mats: Vec<Matrix> = (0..l).map(|_| Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))).collect();
                let fam = BlockFamily { mats: mats.clone() };
                let id = (Rotation::identity(n), Rotation::identity(n));
                let eps = rng.random_range(0.0..1.0);
                let y = DVector::from_iterator(l, mats.iter().map(|m| eps * m.trace()));
                let deg = degenerate_uv(&mats[0]).unwrap();
                let out = homotopy_realize(&fam, &y, &id, &deg).unwrap();
                assert!(out.residual <= 1e-8, "{}", out.residual);
            }
        }
    }

    #[test]
    fn outside_start_is_rejected() {
        let fam = RowPairFamily { p: Matrix::identity(3, 3), q: Matrix::zeros(3, 3), rows: (0, 1) };
        let u = Rotation::identity(3);
        let y = DVector::from_vec(vec![10.0, 0.0]);
        let u0 = degenerate_u0(&fam.p).unwrap().u0;
        assert!(matches!(homotopy_realize(&fam, &y, &u, &u0), Err(OrbitError::Precondition(_))));
    }

    #[test]
    fn boundary_target_finishes_at_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let p = Matrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
        let q = Matrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
        let fam = RowPairFamily { p: p.clone(), q, rows: (0, 1) };
        let u = haar_rotation(4, &mut rng);
        let y = fam.evaluate(&u);
        let out = homotopy_realize(&fam, &y, &u, &degenerate_u0(&p).unwrap().u0).unwrap();
        assert_eq!(out.end, HomotopyEnd::Start);
        assert!(out.residual < 1e-12);
    }
}
