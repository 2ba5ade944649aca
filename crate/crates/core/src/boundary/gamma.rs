use super::maxtrace::max_trace;
use crate::error::{dim_err, shape, OrbitError, Result};
use crate::linalg::{
    block_diag, check_square, geodesic, haar_rotation, sign_or_one, signed_svd, singular_values, Matrix, Rotation,
    RotationPath,
};
use crate::tolerance::Tolerances;
use nalgebra::DVector;
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum GammaCase {
    /// `p_k > 0`: maximisers are `U A U^t` with block diagonal `U`.
    Positive,
    /// `p_k = 0`: the last block is `U A_k V` with free `U`, `V`.
    ZeroLast,
}

/// Grouped diagonal `P = p_1 I_{n_1} + ... + p_k I_{n_k}` with
/// `p_1 > ... > p_k >= 0`, and a base matrix `A` in signed-diagonal form
/// `a_1 > ... > a_{n-1} > |a_n| >= 0`.
#[derive(Debug, Clone, Serialize)]
pub struct MaximizerStructure {
    pub sizes: Vec<usize>,
    pub values: Vec<f64>,
    pub case: GammaCase,
    pub a: Vec<f64>,
}

fn ordering_gap(a: &[f64]) -> f64 {
    let n = a.len();
    let scale = a[0].abs().max(1.0);
    (0..n.saturating_sub(1))
        .map(|i| {
            let next = if i + 1 == n - 1 { a[i + 1].abs() } else { a[i + 1] };
            (a[i] - next) / scale
        })
        .fold(f64::INFINITY, f64::min)
}

/// Rejects `A` that is not signed-diagonal with strictly separated values.
fn check_normal_form(a: &[f64], tol: &Tolerances) -> Result<()> {
    if a.is_empty() {
        return Err(dim_err("MaximizerStructure", "n >= 1", 0));
    }
    if a[..a.len() - 1].iter().any(|&x| x < 0.0) {
        return Err(OrbitError::Precondition("A must be in signed-diagonal form (only the last entry may be negative)".into()));
    }
    let gap = ordering_gap(a);
    if a.len() > 1 && gap < tol.tie_gap {
        return Err(OrbitError::TiedSingularValues { gap });
    }
    Ok(())
}

impl MaximizerStructure {
    pub fn new(sizes: Vec<usize>, values: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        let tol = Tolerances::global();
        if sizes.is_empty() || sizes.len() != values.len() || sizes.contains(&0) {
            return Err(OrbitError::Precondition("block sizes and values must be non-empty, positive and paired".into()));
        }
        let n: usize = sizes.iter().sum();
        if n != a.len() {
            return Err(dim_err("MaximizerStructure", format!("block sizes summing to {}", a.len()), n));
        }
        if values.iter().any(|v| !v.is_finite()) || a.iter().any(|v| !v.is_finite()) {
            return Err(OrbitError::NonFinite);
        }
        if values.windows(2).any(|w| w[0] <= w[1]) || *values.last().unwrap() < 0.0 {
            return Err(OrbitError::Precondition("block values must satisfy p_1 > ... > p_k >= 0".into()));
        }
        check_normal_form(&a, &tol)?;
        let case = if *values.last().unwrap() == 0.0 { GammaCase::ZeroLast } else { GammaCase::Positive };
        Ok(Self { sizes, values, case, a })
    }

    /// Groups a nonnegative descending diagonal; entries closer than the
    /// tie tolerance (relative to the largest) share a block.
    pub fn from_diagonals(p: &[f64], a: &[f64]) -> Result<Self> {
        let tol = Tolerances::global();
        if p.len() != a.len() {
            return Err(dim_err("MaximizerStructure", a.len(), p.len()));
        }
        let scale = p.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        let mut sizes: Vec<usize> = Vec::new();
        let mut groups: Vec<Vec<f64>> = Vec::new();
        for &x in p {
            match groups.last_mut() {
                Some(g) if (g[0] - x).abs() <= tol.tie_gap * scale => {
                    g.push(x);
                    *sizes.last_mut().unwrap() += 1;
                }
                _ => {
                    groups.push(vec![x]);
                    sizes.push(1);
                }
            }
        }
        let values = groups
            .iter()
            .map(|g| {
                let v = g.iter().sum::<f64>() / g.len() as f64;
                if v.abs() <= tol.tie_gap * scale { 0.0 } else { v }
            })
            .collect();
        Self::new(sizes, values, a.to_vec())
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn offsets(&self) -> Vec<usize> {
        self.sizes.iter().scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        }).collect()
    }

    pub fn p_matrix(&self) -> Matrix {
        let d: Vec<f64> = self.sizes.iter().zip(&self.values).flat_map(|(&s, &v)| std::iter::repeat_n(v, s)).collect();
        Matrix::from_diagonal(&DVector::from_vec(d))
    }

    pub fn a_matrix(&self) -> Matrix {
        Matrix::from_diagonal(&DVector::from_column_slice(&self.a))
    }

    /// Frobenius norm of everything outside the diagonal blocks.
    pub fn off_block_norm(&self, b: &Matrix) -> f64 {
        let offs = self.offsets();
        let block_of = |i: usize| offs.iter().rposition(|&o| o <= i).unwrap();
        let mut acc = 0.0;
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                if block_of(i) != block_of(j) {
                    acc += b[(i, j)] * b[(i, j)];
                }
            }
        }
        acc.sqrt()
    }
}

/// Frames of one maximiser: a rotation per block (the left factor), and
/// for the `p_k = 0` case an independent right factor for the last block.
#[derive(Debug, Clone)]
pub struct GammaFrames {
    pub blocks: Vec<Rotation>,
    pub last_right: Option<Rotation>,
}

impl GammaFrames {
    pub fn left(&self) -> Matrix {
        block_diag(&self.blocks.iter().map(|r| r.matrix().clone()).collect::<Vec<_>>())
    }

    pub fn right(&self) -> Matrix {
        let k = self.blocks.len();
        let mut parts: Vec<Matrix> = self.blocks.iter().map(|r| r.matrix().transpose()).collect();
        if let Some(v) = &self.last_right {
            parts[k - 1] = v.matrix().clone();
        }
        block_diag(&parts)
    }

    pub fn matrix(&self, s: &MaximizerStructure) -> Matrix {
        self.left() * s.a_matrix() * self.right()
    }
}

/// Random maximiser frames. Block factors are drawn from `SO_{n_i}`; an
/// orthogonal block factor of determinant `-1` gives the same matrix after
/// a column sign change, since the blocks of `A` are diagonal.
pub fn gamma_sample_frames(s: &MaximizerStructure, count: usize, rng: &mut impl Rng) -> Vec<GammaFrames> {
    (0..count)
        .map(|_| {
            let blocks: Vec<Rotation> = s.sizes.iter().map(|&m| haar_rotation(m, rng)).collect();
            let last_right = match s.case {
                GammaCase::Positive => None,
                GammaCase::ZeroLast => Some(haar_rotation(*s.sizes.last().unwrap(), rng)),
            };
            GammaFrames { blocks, last_right }
        })
        .collect()
}

/// Random elements of `Gamma_P(A)`, the maximisers of `tr(P B)` over `O(A)`.
pub fn gamma_sample(s: &MaximizerStructure, count: usize, rng: &mut impl Rng) -> Vec<Matrix> {
    gamma_sample_frames(s, count, rng).iter().map(|f| f.matrix(s)).collect()
}

/// Blockwise geodesic between two maximisers; every point is a maximiser.
pub struct GammaPath {
    structure: MaximizerStructure,
    blocks: Vec<RotationPath>,
    last_right: Option<RotationPath>,
}

impl GammaPath {
    pub fn new(s: &MaximizerStructure, from: &GammaFrames, to: &GammaFrames) -> Result<Self> {
        let blocks = from.blocks.iter().zip(&to.blocks).map(|(a, b)| geodesic(a, b)).collect::<Result<_>>()?;
        let last_right = match (&from.last_right, &to.last_right) {
            (Some(a), Some(b)) => Some(geodesic(a, b)?),
            _ => None,
        };
        Ok(Self { structure: s.clone(), blocks, last_right })
    }

    pub fn at(&self, t: f64) -> Matrix {
        GammaFrames {
            blocks: self.blocks.iter().map(|p| p.at(t)).collect(),
            last_right: self.last_right.as_ref().map(|p| p.at(t)),
        }
        .matrix(&self.structure)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaReport {
    pub singular_value_error: f64,
    pub det_sign_ok: bool,
    pub in_orbit: bool,
    pub max_trace: f64,
    pub trace: f64,
    pub trace_gap: f64,
    pub off_block_norm: f64,
    pub pass: bool,
}

/// Checks orbit membership, maximality of `tr(P B)` and the block
/// structure of `B`.
pub fn gamma_verify(b: &Matrix, p: &Matrix, a: &Matrix, s: &MaximizerStructure) -> Result<GammaReport> {
    let n = check_square(b, "gamma_verify")?;
    for m in [p, a] {
        if m.shape() != b.shape() {
            return Err(dim_err("gamma_verify", shape(b), shape(m)));
        }
    }
    if s.n() != n {
        return Err(dim_err("gamma_verify", format!("structure of size {n}"), s.n()));
    }
    let tol = Tolerances::global();
    let (sb, sa) = (singular_values(b), singular_values(a));
    let scale = sa[0].max(1.0);
    let singular_value_error = sb.iter().zip(&sa).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let (db, da) = (b.determinant(), a.determinant());
    let det_sign_ok = sign_or_one(db) == sign_or_one(da) || (da.abs() <= tol.rank * scale.powi(n as i32) && db.abs() <= 1e-8 * scale.powi(n as i32));
    let in_orbit = singular_value_error <= tol.certificate * scale && det_sign_ok;
    let r = max_trace(p, a)?;
    let trace = crate::linalg::trace_product(p, b);
    let trace_gap = r - trace;
    let off_block_norm = s.off_block_norm(b);
    let pass = in_orbit && trace_gap.abs() <= tol.certificate * (1.0 + r.abs()) && off_block_norm <= 1e-6;
    Ok(GammaReport { singular_value_error, det_sign_ok, in_orbit, max_trace: r, trace, trace_gap, off_block_norm, pass })
}

/// `B = (W + X1) A (W^t + X2)` (direct sums) for `B` in `O(A)` whose
/// leading `k x k` trace equals `a_1 + ... + a_k`.
#[derive(Debug, Clone, Serialize)]
pub struct BlockFactors {
    pub w: Rotation,
    pub x1: Rotation,
    pub x2: Rotation,
    /// `|B_11 - W A_1 W^t|`.
    pub consistency: f64,
    /// `|(W + X1) A (W^t + X2) - B|`.
    pub reconstruction: f64,
}

pub fn block_decompose(b: &Matrix, a: &Matrix, k: usize) -> Result<BlockFactors> {
    let n = check_square(b, "block_decompose")?;
    if a.shape() != b.shape() {
        return Err(dim_err("block_decompose", shape(b), shape(a)));
    }
    if k == 0 || k >= n {
        return Err(OrbitError::Precondition(format!("block size must satisfy 1 <= k < n, got k = {k}, n = {n}")));
    }
    let tol = Tolerances::global();
    let ad: Vec<f64> = a.diagonal().iter().copied().collect();
    let off = a.clone() - Matrix::from_diagonal(&a.diagonal());
    if off.amax() > tol.matrix {
        return Err(OrbitError::Precondition("A must be diagonal".into()));
    }
    check_normal_form(&ad, &tol)?;
    let tk_a: f64 = ad[..k].iter().sum();
    let tk_b = b.view((0, 0), (k, k)).trace();
    if (tk_b - tk_a).abs() > tol.certificate * (1.0 + tk_a.abs()) {
        return Err(OrbitError::Precondition(format!(
            "leading trace {tk_b:.12} differs from {tk_a:.12}"
        )));
    }
    let sb = singular_values(b);
    let sv_err = sb.iter().zip(ad.iter().map(|x| x.abs())).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    if sv_err > tol.certificate * ad[0].abs().max(1.0) {
        return Err(OrbitError::Precondition(format!("B is not in O(A): singular values differ by {sv_err:.3e}")));
    }

    let b11 = b.view((0, 0), (k, k)).into_owned();
    let sym = (&b11 + b11.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut w = Matrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
    if w.determinant() < 0.0 {
        let col = -w.column(k - 1);
        w.set_column(k - 1, &col);
    }
    let a1 = Matrix::from_diagonal(&DVector::from_column_slice(&ad[..k]));
    let consistency = (&b11 - &w * &a1 * w.transpose()).norm();

    let b22 = b.view((k, k), (n - k, n - k)).into_owned();
    let svd = signed_svd(&b22)?;
    let (x1, x2) = (svd.u, svd.v.transpose());
    let left = block_diag(&[w.clone(), x1.matrix().clone()]);
    let right = block_diag(&[w.transpose(), x2.matrix().clone()]);
    let reconstruction = (&left * a * &right - b).norm();
    if reconstruction > 1e-6 * ad[0].abs().max(1.0) {
        return Err(OrbitError::Structural(format!("block factors reconstruct B only to {reconstruction:.3e}")));
    }
    Ok(BlockFactors { w: Rotation::from_trusted(w), x1, x2, consistency, reconstruction })
}

/// Maximisers for general `P` and `A`, obtained from the diagonal case
/// through signed SVDs.
#[derive(Debug, Clone)]
pub struct GammaTransport {
    pub structure: MaximizerStructure,
    /// `B = left * B_0 * right` for `B_0` a maximiser of the diagonal problem.
    pub left: Matrix,
    pub right: Matrix,
}

impl GammaTransport {
    pub fn new(p: &Matrix, a: &Matrix) -> Result<Self> {
        let n = check_square(p, "gamma transport")?;
        if a.shape() != p.shape() {
            return Err(dim_err("gamma transport", shape(p), shape(a)));
        }
        let (fp, fa) = (signed_svd(p)?, signed_svd(a)?);
        let mut sa = fa.s.clone();
        let mut right_fix = Matrix::identity(n, n);
        let mut sp = fp.s.clone();
        if sp[n - 1] < 0.0 {
            // tr(S_P B) = tr(S+ B D) with D = diag(1, ..., 1, -1)
            sp[n - 1] = -sp[n - 1];
            sa[n - 1] = -sa[n - 1];
            right_fix[(n - 1, n - 1)] = -1.0;
        }
        let structure = MaximizerStructure::from_diagonals(&sp, &sa)?;
        // O(S_A) = O(A); B in Gamma_P(A) iff V_P^t B U_P in Gamma_{S_P}(S_A)
        Ok(Self { structure, left: fp.v.matrix().clone(), right: right_fix * fp.u.matrix().transpose() })
    }

    pub fn apply(&self, b0: &Matrix) -> Matrix {
        &self.left * b0 * &self.right
    }

    pub fn sample(&self, count: usize, rng: &mut impl Rng) -> Vec<Matrix> {
        gamma_sample(&self.structure, count, rng).iter().map(|b| self.apply(b)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_rotation, trace_product};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(d: &[f64]) -> Matrix {
        Matrix::from_diagonal(&DVector::from_column_slice(d))
    }

    #[test]
    fn single_block_is_conjugation() {
        let s = MaximizerStructure::new(vec![3], vec![2.0], vec![3.0, 2.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for b in gamma_sample(&s, 20, &mut rng) {
            assert!((trace_product(&s.p_matrix(), &b) - 12.0).abs() < 1e-12);
            assert!(gamma_verify(&b, &s.p_matrix(), &s.a_matrix(), &s).unwrap().pass);
        }
    }

    #[test]
    fn all_singleton_blocks_fix_a() {
        let s = MaximizerStructure::new(vec![1, 1, 1], vec![3.0, 2.0, 1.0], vec![3.0, 2.0, -0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        for b in gamma_sample(&s, 5, &mut rng) {
            assert!((b - s.a_matrix()).amax() < 1e-15);
        }
    }

    #[test]
    fn zero_last_block_is_free() {
        let s = MaximizerStructure::new(vec![2, 2], vec![1.0, 0.0], vec![4.0, 3.0, 2.0, 1.0]).unwrap();
        assert_eq!(s.case, GammaCase::ZeroLast);
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let bs = gamma_sample(&s, 10, &mut rng);
        let traces: Vec<f64> = bs.iter().map(|b| b.view((2, 2), (2, 2)).trace()).collect();
        assert!(traces.iter().any(|t| (t - traces[0]).abs() > 1e-3));
        for b in &bs {
            let r = gamma_verify(b, &s.p_matrix(), &s.a_matrix(), &s).unwrap();
            assert!(r.pass && r.trace_gap.abs() < 1e-12);
        }
    }

    #[test]
    fn verify_rejects_non_maximisers() {
        let s = MaximizerStructure::new(vec![2, 1, 1], vec![3.0, 1.0, 0.0], vec![4.0, 3.0, 2.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        let (u, v) = (haar_rotation(4, &mut rng), haar_rotation(4, &mut rng));
        let b = u.matrix() * s.a_matrix() * v.matrix();
        let r = gamma_verify(&b, &s.p_matrix(), &s.a_matrix(), &s).unwrap();
        assert!(r.in_orbit && r.trace_gap > 1e-3 && !r.pass);
        let mut pert = s.a_matrix();
        pert[(0, 3)] = 1e-3;
        let r = gamma_verify(&pert, &s.p_matrix(), &s.a_matrix(), &s).unwrap();
        assert!(!r.pass && (!r.in_orbit || r.off_block_norm > 1e-6));
    }

    #[test]
    fn ties_are_rejected() {
        assert!(matches!(
            MaximizerStructure::new(vec![3], vec![1.0], vec![2.0, 2.0, 1.0]),
            Err(OrbitError::TiedSingularValues { .. })
        ));
        assert!(MaximizerStructure::new(vec![3], vec![1.0], vec![3.0, 2.0, -2.0]).is_err());
        assert!(MaximizerStructure::new(vec![2, 1], vec![1.0, 1.0], vec![3.0, 2.0, 1.0]).is_err());
        assert!(MaximizerStructure::new(vec![2, 2], vec![1.0, 0.5], vec![3.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn paths_stay_maximising() {
        let s = MaximizerStructure::new(vec![2, 1, 1], vec![3.0, 1.0, 0.0], vec![4.0, 3.0, 2.0, 1.0]).unwrap();
        let (p, a) = (s.p_matrix(), s.a_matrix());
        let r = max_trace(&p, &a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(75);
        let fs = gamma_sample_frames(&s, 6, &mut rng);
        for pair in fs.windows(2) {
            let path = GammaPath::new(&s, &pair[0], &pair[1]).unwrap();
            assert!((path.at(0.0) - pair[0].matrix(&s)).amax() < 1e-12);
            assert!((path.at(1.0) - pair[1].matrix(&s)).amax() < 1e-12);
            for i in 0..=100 {
                assert!((trace_product(&p, &path.at(i as f64 / 100.0)) - r).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn block_decompose_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(76);
        let a = diag(&[5.0, 3.0, 2.0, -1.0]);
        for k in 1..4 {
            let w = haar_rotation(k, &mut rng).into_matrix();
            let x1 = haar_rotation(4 - k, &mut rng).into_matrix();
            let x2 = haar_rotation(4 - k, &mut rng).into_matrix();
            let b = block_diag(&[w.clone(), x1]) * &a * block_diag(&[w.transpose(), x2]);
            let f = block_decompose(&b, &a, k).unwrap();
            assert!(f.reconstruction <= 1e-10 && f.consistency <= 1e-10, "{k}: {f:?}");
        }
        let f = block_decompose(&a, &a, 2).unwrap();
        assert!(f.reconstruction < 1e-14);
    }

    #[test]
    fn block_decompose_rejects_small_leading_trace() {
        let a = diag(&[5.0, 3.0, 2.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let b = haar_rotation(4, &mut rng).matrix() * &a * haar_rotation(4, &mut rng).matrix();
        assert!(b.view((0, 0), (2, 2)).trace() < 7.9);
        assert!(matches!(block_decompose(&b, &a, 2), Err(OrbitError::Precondition(_))));
    }

    #[test]
    fn transport_to_general_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        for flip in [false, true] {
            let s0 = diag(&[3.0, 3.0, 1.0, if flip { -0.5 } else { 0.5 }]);
            let (u, v) = (haar_rotation(4, &mut rng), haar_rotation(4, &mut rng));
            let p = u.matrix() * s0 * v.matrix();
            let a = haar_rotation(4, &mut rng).matrix() * diag(&[4.0, 2.0, 1.5, 0.25]) * haar_rotation(4, &mut rng).matrix();
            let t = GammaTransport::new(&p, &a).unwrap();
            assert_eq!(t.structure.sizes, vec![2, 1, 1]);
            let r = max_trace(&p, &a).unwrap();
            for b in t.sample(10, &mut rng) {
                assert!((trace_product(&p, &b) - r).abs() <= 1e-10);
                let sv: Vec<f64> = singular_values(&b);
                assert!((sv[3] - 0.25).abs() < 1e-10);
                assert!(b.determinant() > 0.0);
            }
        }
    }
}
