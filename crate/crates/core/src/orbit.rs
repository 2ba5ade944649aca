//! Orbits `O(A)`, joint orbits, linear maps `L(X) = (tr(P_1 X), ..., tr(P_l X))`
//! and Monte Carlo sampling of image sets.
//!
//! Image sets are never materialised. Membership claims are carried either
//! by explicit rotations (certificates) or by sampled evidence.

use crate::error::{dim_err, shape, OrbitError, Result};
use crate::linalg::{
    check_finite, check_same_shape, check_square, first_reflection, haar_rotation, trace_product,
    Matrix, Rotation,
};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Matrices per independently seeded sampling chunk.
pub const SAMPLE_CHUNK: usize = 4096;

/// Linear map `X -> (tr(P_1 X), ..., tr(P_l X))`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMapSpec {
    ps: Vec<Matrix>,
}

impl LinearMapSpec {
    pub fn new(ps: Vec<Matrix>) -> Result<Self> {
        let first = ps
            .first()
            .ok_or_else(|| OrbitError::Precondition("a linear map needs at least one coefficient matrix".into()))?;
        check_square(first, "LinearMapSpec")?;
        for p in &ps {
            check_same_shape(first, p, "LinearMapSpec")?;
            check_finite(p)?;
        }
        Ok(Self { ps })
    }

    pub fn ell(&self) -> usize {
        self.ps.len()
    }

    pub fn n(&self) -> usize {
        self.ps[0].nrows()
    }

    pub fn coefficients(&self) -> &[Matrix] {
        &self.ps
    }

    /// Sum of Frobenius norms, a bound on `|L(X)|` per unit `|X|_F`.
    pub fn frobenius_sum(&self) -> f64 {
        self.ps.iter().map(|p| p.norm()).sum()
    }

    pub fn apply(&self, x: &Matrix) -> Result<DVector<f64>> {
        if x.shape() != self.ps[0].shape() {
            return Err(dim_err("apply_map", shape(&self.ps[0]), shape(x)));
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &Matrix) -> DVector<f64> {
        DVector::from_iterator(self.ps.len(), self.ps.iter().map(|p| trace_product(p, x)))
    }
}

/// `L(X)`; component `i` is `tr(P_i X)`.
pub fn apply_map(l: &LinearMapSpec, x: &Matrix) -> Result<DVector<f64>> {
    l.apply(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Group {
    #[default]
    #[serde(rename = "SO")]
    Special,
    #[serde(rename = "O")]
    Orthogonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSpec {
    pub a: Matrix,
    pub group: Group,
}

impl OrbitSpec {
    pub fn new(a: Matrix, group: Group) -> Result<Self> {
        check_square(&a, "OrbitSpec")?;
        check_finite(&a)?;
        Ok(Self { a, group })
    }

    pub fn special(a: Matrix) -> Result<Self> {
        Self::new(a, Group::Special)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JointKind {
    /// `(A_1 V, ..., A_m V)`
    O1,
    /// `(U A_1, ..., U A_m)`
    O2,
    /// `(U A_1 V, ..., U A_m V)`
    O3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointOrbitSpec {
    pub mats: Vec<Matrix>,
    pub kind: JointKind,
    pub group: Group,
}

impl JointOrbitSpec {
    pub fn new(mats: Vec<Matrix>, kind: JointKind, group: Group) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| OrbitError::Precondition("joint orbit needs at least one matrix".into()))?;
        check_square(first, "JointOrbitSpec")?;
        for m in &mats {
            check_same_shape(first, m, "JointOrbitSpec")?;
            check_finite(m)?;
        }
        Ok(Self { mats, kind, group })
    }

    pub fn n(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn m(&self) -> usize {
        self.mats.len()
    }
}

/// Linear map on `m`-tuples of matrices:
/// component `j` is `tr(sum_i P^(j)_i X_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointLinearMap {
    rows: Vec<Vec<Matrix>>,
}

impl JointLinearMap {
    pub fn new(rows: Vec<Vec<Matrix>>) -> Result<Self> {
        let first = rows
            .first()
            .and_then(|r| r.first())
            .ok_or_else(|| OrbitError::Precondition("joint map needs coefficients".into()))?;
        check_square(first, "JointLinearMap")?;
        let m = rows[0].len();
        for r in &rows {
            if r.len() != m {
                return Err(dim_err("JointLinearMap", format!("{m} matrices per component"), r.len()));
            }
            for p in r {
                check_same_shape(first, p, "JointLinearMap")?;
                check_finite(p)?;
            }
        }
        Ok(Self { rows })
    }

    pub fn ell(&self) -> usize {
        self.rows.len()
    }

    pub fn m(&self) -> usize {
        self.rows[0].len()
    }

    pub fn n(&self) -> usize {
        self.rows[0][0].nrows()
    }

    pub fn rows(&self) -> &[Vec<Matrix>] {
        &self.rows
    }

    pub fn apply(&self, xs: &[Matrix]) -> Result<DVector<f64>> {
        if xs.len() != self.m() {
            return Err(dim_err("JointLinearMap::apply", self.m(), xs.len()));
        }
        for x in xs {
            check_same_shape(&self.rows[0][0], x, "JointLinearMap::apply")?;
        }
        Ok(DVector::from_iterator(
            self.ell(),
            self.rows
                .iter()
                .map(|r| r.iter().zip(xs).map(|(p, x)| trace_product(p, x)).sum::<f64>()),
        ))
    }

    fn check_against(&self, joint: &JointOrbitSpec) -> Result<()> {
        if joint.m() != self.m() {
            return Err(dim_err("joint map vs orbit", format!("{} matrices", self.m()), joint.m()));
        }
        check_same_shape(&self.rows[0][0], &joint.mats[0], "joint map vs orbit")
    }
}

/// Finite point set in `R^l` with the seed that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub dim: usize,
    pub points: Vec<DVector<f64>>,
    pub seeds: Vec<u64>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(x, y)` pairs of a planar cloud.
    pub fn planar(&self) -> Vec<[f64; 2]> {
        self.points.iter().map(|p| [p[0], p[1]]).collect()
    }
}

/// `U A V`. Singular values and the determinant sign are those of `A`.
pub fn orbit_point(a: &Matrix, u: &Rotation, v: &Rotation) -> Result<Matrix> {
    check_square(a, "orbit_point")?;
    if u.n() != a.nrows() || v.n() != a.nrows() {
        return Err(dim_err(
            "orbit_point",
            format!("rotations of size {}", a.nrows()),
            format!("U {}x{}, V {}x{}", u.n(), u.n(), v.n(), v.n()),
        ));
    }
    Ok(u.matrix() * a * v.matrix())
}

/// A pair of frames for the orbit: independent Haar rotations, or for
/// `O_n` Haar orthogonal matrices sharing a determinant (the first column
/// of both is negated on a fair coin).
pub fn draw_frames(n: usize, group: Group, rng: &mut impl Rng) -> (Matrix, Matrix) {
    let u = haar_rotation(n, rng).into_matrix();
    let v = haar_rotation(n, rng).into_matrix();
    match group {
        Group::Special => (u, v),
        Group::Orthogonal => {
            if rng.random_bool(0.5) {
                let d = first_reflection(n);
                (u * &d, v * d)
            } else {
                (u, v)
            }
        }
    }
}

/// Monte Carlo sample of `L(O(A))`.
///
/// Work is split into chunks of [`SAMPLE_CHUNK`] draws; chunk `c` uses the
/// ChaCha8 stream `c` of `seed`, so output is independent of thread count.
pub fn sample_image(l: &LinearMapSpec, orbit: &OrbitSpec, count: usize, seed: u64) -> Result<PointCloud> {
    check_same_shape(&l.coefficients()[0], &orbit.a, "sample_image")?;
    let n = orbit.n();
    let chunks = count.div_ceil(SAMPLE_CHUNK);
    let points: Vec<DVector<f64>> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = SAMPLE_CHUNK.min(count - c * SAMPLE_CHUNK);
            (0..len)
                .map(|_| {
                    let (u, v) = draw_frames(n, orbit.group, &mut rng);
                    l.apply_unchecked(&(u * &orbit.a * v))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(PointCloud {
        dim: l.ell(),
        points,
        seeds: vec![seed],
    })
}

/// Collapses a joint map over `O1`/`O2` joint orbits into an ordinary map on `SO_n`:
/// `O1` gives `Q_j = sum_i P^(j)_i A_i`, `O2` gives `Q_j = sum_i A_i P^(j)_i`.
pub fn reduce_joint(map: &JointLinearMap, mats: &[Matrix], kind: JointKind) -> Result<LinearMapSpec> {
    if mats.len() != map.m() {
        return Err(dim_err("reduce_joint", format!("{} matrices", map.m()), mats.len()));
    }
    for a in mats {
        check_same_shape(&map.rows[0][0], a, "reduce_joint")?;
    }
    let n = map.n();
    let qs = map
        .rows
        .iter()
        .map(|row| {
            row.iter().zip(mats).fold(Matrix::zeros(n, n), |acc, (p, a)| match kind {
                JointKind::O1 => acc + p * a,
                JointKind::O2 => acc + a * p,
                JointKind::O3 => acc,
            })
        })
        .collect();
    match kind {
        JointKind::O3 => Err(OrbitError::Unsupported(
            "O3 joint orbits reduce per frame U; use star_check_joint".into(),
        )),
        _ => LinearMapSpec::new(qs),
    }
}

/// Image point of a joint orbit element for frames `(U, V)`; the unused
/// frame is ignored for `O1`/`O2`.
pub fn joint_point(map: &JointLinearMap, joint: &JointOrbitSpec, u: &Matrix, v: &Matrix) -> Result<DVector<f64>> {
    map.check_against(joint)?;
    let xs: Vec<Matrix> = joint
        .mats
        .iter()
        .map(|a| match joint.kind {
            JointKind::O1 => a * v,
            JointKind::O2 => u * a,
            JointKind::O3 => u * a * v,
        })
        .collect();
    map.apply(&xs)
}
