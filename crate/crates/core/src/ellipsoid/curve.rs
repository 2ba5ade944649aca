use super::recursive::{build, coeffs, inverse_spherical, spherical};
use crate::error::{dim_err, shape, OrbitError, Result};
use crate::linalg::{givens, Matrix, Rotation};
use crate::tolerance::Tolerances;
use nalgebra::DVector;
use serde::Serialize;

/// The set `{ T z + c : |z| = 1 }` in `R^l`.
#[derive(Debug, Clone, Serialize)]
pub struct EllipsoidCurve {
    #[serde(serialize_with = "crate::io::serialize_matrix")]
    pub shape: Matrix,
    #[serde(serialize_with = "crate::io::serialize_vector")]
    pub center: DVector<f64>,
}

impl EllipsoidCurve {
    pub fn ell(&self) -> usize {
        self.center.len()
    }

    /// Point at spherical angles.
    pub fn point(&self, angles: &[f64]) -> DVector<f64> {
        &self.shape * spherical(angles) + &self.center
    }

    pub fn singular_values(&self) -> Vec<f64> {
        crate::linalg::singular_values(&self.shape)
    }

    pub fn is_degenerate(&self, tol: &Tolerances) -> bool {
        let s = self.singular_values();
        let top = s[0];
        top == 0.0 || *s.last().unwrap() <= tol.rank * top
    }

    /// `g = |T^{-1}(y - c)| - 1` when `T` is invertible at rank tolerance;
    /// the full membership analysis otherwise.
    pub fn gap(&self, y: &DVector<f64>, tol: &Tolerances) -> GapEval {
        if self.is_degenerate(tol) {
            return GapEval::Degenerate(degenerate_membership(self, y, tol));
        }
        match self.shape.clone().lu().solve(&(y - &self.center)) {
            Some(z) if z.iter().all(|x| x.is_finite()) => GapEval::Finite { gap: z.norm() - 1.0, z },
            _ => GapEval::Degenerate(degenerate_membership(self, y, tol)),
        }
    }
}

#[derive(Debug, Clone)]
pub enum GapEval {
    Finite { gap: f64, z: DVector<f64> },
    Degenerate(MembershipResult),
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
    OnDegenerateSpan,
    OffDegenerateSpan,
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipResult {
    pub classification: Membership,
    /// Spherical angles reproducing the query, when one exists.
    pub witness: Option<Vec<f64>>,
    pub residual: f64,
    /// `|T^{-1}(y - c)|`, or the norm of the least-squares preimage for a
    /// degenerate shape.
    pub q: f64,
}

pub fn membership(curve: &EllipsoidCurve, y: &DVector<f64>) -> Result<MembershipResult> {
    if y.len() != curve.ell() {
        return Err(dim_err("membership", curve.ell(), y.len()));
    }
    if !y.iter().all(|x| x.is_finite()) {
        return Err(OrbitError::NonFinite);
    }
    let tol = Tolerances::global();
    Ok(match curve.gap(y, &tol) {
        GapEval::Degenerate(m) => m,
        GapEval::Finite { gap, z } => {
            let q = gap + 1.0;
            let angles = if q > 0.0 { inverse_spherical(&z) } else { vec![0.0; curve.ell() - 1] };
            let residual = (curve.point(&angles) - y).norm();
            if gap.abs() <= tol.boundary && residual <= tol.boundary {
                MembershipResult { classification: Membership::Boundary, witness: Some(angles), residual, q }
            } else {
                let classification = if q < 1.0 { Membership::Inside } else { Membership::Outside };
                MembershipResult { classification, witness: None, residual, q }
            }
        }
    })
}

fn degenerate_membership(curve: &EllipsoidCurve, y: &DVector<f64>, tol: &Tolerances) -> MembershipResult {
    let l = curve.ell();
    let svd = curve.shape.clone().svd(true, true);
    let (w, zt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let s = &svd.singular_values;
    let top = s.max();
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let rank = order.iter().filter(|&&i| top > 0.0 && s[i] > tol.rank * top).count();
    let d = y - &curve.center;
    let scale = 1.0 + top + d.norm();

    let mut off_span = 0.0_f64;
    let mut z0 = DVector::zeros(l);
    for (k, &i) in order.iter().enumerate() {
        let proj = w.column(i).dot(&d);
        if k < rank {
            z0 += zt.row(i).transpose() * (proj / s[i]);
        } else {
            off_span = off_span.max(proj.abs());
        }
    }
    let q = z0.norm();
    if off_span > tol.boundary * scale {
        return MembershipResult {
            classification: Membership::OffDegenerateSpan,
            witness: None,
            residual: off_span,
            q,
        };
    }
    if q > 1.0 + tol.boundary {
        return MembershipResult { classification: Membership::Outside, witness: None, residual: off_span, q };
    }
    let null = zt.row(order[rank.min(l - 1)]).transpose();
    let lift = (1.0 - q * q).max(0.0).sqrt();
    let mut z = z0 + null * lift;
    let zn = z.norm();
    if zn > 0.0 {
        z /= zn;
    }
    let angles = inverse_spherical(&z);
    let residual = (curve.point(&angles) - y).norm();
    MembershipResult { classification: Membership::OnDegenerateSpan, witness: Some(angles), residual, q }
}

/// `E(U, V)` for `N x N` coefficient matrices with `N = 2^(l-1)`: row `i`
/// of the shape is the coefficient vector of `U P_i V`, the centre is zero.
pub fn ellipsoid_euv(ps: &[Matrix], u: &Rotation, v: &Rotation) -> Result<EllipsoidCurve> {
    let l = ps.len();
    if l < 2 {
        return Err(dim_err("ellipsoid_euv", "at least 2 coefficient matrices", l));
    }
    let n = 1usize << (l - 1);
    for p in ps {
        if p.shape() != (n, n) {
            return Err(dim_err("ellipsoid_euv", format!("{n}x{n}"), shape(p)));
        }
    }
    if u.n() != n || v.n() != n {
        return Err(dim_err("ellipsoid_euv", format!("frames of size {n}"), format!("{} and {}", u.n(), v.n())));
    }
    Ok(euv_unchecked(ps, u.matrix(), v.matrix()))
}

pub(crate) fn euv_unchecked(ps: &[Matrix], u: &Matrix, v: &Matrix) -> EllipsoidCurve {
    let l = ps.len();
    let mut t = Matrix::zeros(l, l);
    for (i, p) in ps.iter().enumerate() {
        t.row_mut(i).copy_from(&coeffs(&(u * p * v)).transpose());
    }
    EllipsoidCurve { shape: t, center: DVector::zeros(l) }
}

/// The rotation `V R(theta) U` realising a point of `E(U, V)`.
pub fn ellipsoid_witness(u: &Rotation, v: &Rotation, angles: &[f64]) -> Rotation {
    Rotation::from_trusted(v.matrix() * build(angles) * u.matrix())
}

/// `E(U)` for the first two rows.
pub fn ellipse_eu(p: &Matrix, q: &Matrix, u: &Rotation) -> Result<EllipsoidCurve> {
    ellipse_eu_rows(p, q, u, (0, 1))
}

/// The ellipse `{ (tr(P U T), tr(Q U T)) }` where `T` ranges over planar
/// rotations acting on the coordinate pair `rows`.
pub fn ellipse_eu_rows(p: &Matrix, q: &Matrix, u: &Rotation, rows: (usize, usize)) -> Result<EllipsoidCurve> {
    let n = u.n();
    for m in [p, q] {
        if m.shape() != (n, n) {
            return Err(dim_err("ellipse_eu", format!("{n}x{n}"), shape(m)));
        }
    }
    let (i, j) = rows;
    if i == j || i >= n || j >= n {
        return Err(OrbitError::Precondition(format!("invalid row pair ({i}, {j}) for n = {n}")));
    }
    Ok(eu_unchecked(p, q, u.matrix(), rows))
}

pub(crate) fn eu_unchecked(p: &Matrix, q: &Matrix, u: &Matrix, (i, j): (usize, usize)) -> EllipsoidCurve {
    let n = u.nrows();
    let mut t = Matrix::zeros(2, 2);
    let mut c = DVector::zeros(2);
    for (k, m) in [p, q].into_iter().enumerate() {
        // row r of M dotted with column r of U
        let dot = |r: usize, col: usize| -> f64 { (0..n).map(|a| m[(r, a)] * u[(a, col)]).sum() };
        t[(k, 0)] = dot(i, i) + dot(j, j);
        t[(k, 1)] = dot(j, i) - dot(i, j);
        c[k] = (0..n).filter(|&r| r != i && r != j).map(|r| dot(r, r)).sum();
    }
    EllipsoidCurve { shape: t, center: c }
}

/// `U T_theta`, the rotation realising the ellipse point at `theta`.
pub fn ellipse_witness(u: &Rotation, rows: (usize, usize), theta: f64) -> Rotation {
    Rotation::from_trusted(u.matrix() * givens(u.n(), rows.0, rows.1, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_rotation, trace_product};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn unit_circle() -> EllipsoidCurve {
        EllipsoidCurve { shape: Matrix::identity(2, 2), center: DVector::zeros(2) }
    }

    #[test]
    fn unit_circle_classification() {
        let e = unit_circle();
        let on = membership(&e, &DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert_eq!(on.classification, Membership::Boundary);
        assert!(on.witness.unwrap()[0].abs() < 1e-15);
        let inside = membership(&e, &DVector::from_vec(vec![0.5, 0.0])).unwrap();
        assert_eq!(inside.classification, Membership::Inside);
        assert!((inside.q - 0.5).abs() < 1e-15);
        let outside = membership(&e, &DVector::from_vec(vec![2.0, 0.0])).unwrap();
        assert_eq!(outside.classification, Membership::Outside);
    }

    #[test]
    fn degenerate_segment() {
        let e = EllipsoidCurve { shape: Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]), center: DVector::zeros(2) };
        let on = membership(&e, &DVector::from_vec(vec![0.3, 0.0])).unwrap();
        assert_eq!(on.classification, Membership::OnDegenerateSpan);
        assert!(on.residual < 1e-14);
        let off = membership(&e, &DVector::from_vec(vec![0.3, 0.1])).unwrap();
        assert_eq!(off.classification, Membership::OffDegenerateSpan);
        let beyond = membership(&e, &DVector::from_vec(vec![1.5, 0.0])).unwrap();
        assert_eq!(beyond.classification, Membership::Outside);
        let zero = EllipsoidCurve { shape: Matrix::zeros(2, 2), center: DVector::from_vec(vec![1.0, 2.0]) };
        let at = membership(&zero, &DVector::from_vec(vec![1.0, 2.0])).unwrap();
        assert_eq!(at.classification, Membership::OnDegenerateSpan);
    }

    #[test]
    fn boundary_witnesses_reproduce_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for l in 2..=4 {
            for _ in 0..200 {
                let e = EllipsoidCurve {
                    shape: Matrix::from_fn(l, l, |_, _| rng.random_range(-2.0..2.0)),
                    center: DVector::from_fn(l, |_, _| rng.random_range(-1.0..1.0)),
                };
                let angles: Vec<f64> = (0..l - 1).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
                let y = e.point(&angles);
                let m = membership(&e, &y).unwrap();
                if m.classification == Membership::Boundary {
                    assert!((e.point(m.witness.as_ref().unwrap()) - &y).norm() <= 1e-8);
                } else {
                    // ill-conditioned shapes may miss the band but never invert the side
                    assert!((m.q - 1.0).abs() < 1e-6, "{:?}", m);
                }
            }
        }
    }

    #[test]
    fn euv_matches_direct_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for l in [2usize, 3, 4] {
            let n = 1 << (l - 1);
            let ps: Vec<Matrix> = (0..l).map(|_| Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))).collect();
            let u = haar_rotation(n, &mut rng);
            let v = haar_rotation(n, &mut rng);
            let e = ellipsoid_euv(&ps, &u, &v).unwrap();
            for _ in 0..50 {
                let angles: Vec<f64> = (0..l - 1).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
                let x = ellipsoid_witness(&u, &v, &angles);
                let direct = DVector::from_iterator(l, ps.iter().map(|p| trace_product(p, x.matrix())));
                assert!((direct - e.point(&angles)).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn eu_matches_direct_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in [2usize, 3, 5] {
            let p = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let q = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let u = haar_rotation(n, &mut rng);
            for rows in [(0, 1), (n - 1, 0)] {
                let e = ellipse_eu_rows(&p, &q, &u, rows).unwrap();
                for _ in 0..50 {
                    let t = rng.random_range(0.0..2.0 * PI);
                    let w = ellipse_witness(&u, rows, t);
                    let direct = DVector::from_vec(vec![trace_product(&p, w.matrix()), trace_product(&q, w.matrix())]);
                    assert!((direct - e.point(&[t])).amax() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let u = Rotation::identity(3);
        let p = Matrix::identity(3, 3);
        assert!(ellipse_eu_rows(&p, &p, &u, (1, 1)).is_err());
        assert!(ellipse_eu(&Matrix::identity(2, 2), &p, &u).is_err());
        let u2 = Rotation::identity(2);
        assert!(ellipsoid_euv(&[Matrix::identity(2, 2)], &u2, &u2).is_err());
        assert!(ellipsoid_euv(&[p.clone(), p.clone(), p], &u2, &u2).is_err());
        let e = unit_circle();
        assert!(membership(&e, &DVector::from_vec(vec![1.0])).is_err());
    }
}
