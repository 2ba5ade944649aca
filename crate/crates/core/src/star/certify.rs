use super::homotopy::{homotopy_realize, BlockFamily, RowPairFamily};
use crate::ellipsoid::{degenerate_u0_rows, degenerate_uv};
use crate::error::{dim_err, shape, OrbitError, Result};
use crate::linalg::{check_square, embed, first_reflection, orthogonality_residual, trace_product, Matrix, Rotation};
use crate::orbit::LinearMapSpec;
use crate::tolerance::Tolerances;
use nalgebra::DVector;
use serde::Serialize;

/// One homotopy in a certification chain.
#[derive(Debug, Clone, Serialize)]
pub struct HomotopyStep {
    pub rows: Vec<usize>,
    pub s: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A single matrix `X` with `L(X)` equal to the target.
    Single {
        #[serde(serialize_with = "crate::io::serialize_matrix")]
        x: Matrix,
    },
    /// Frames `(U, V)` with `L(U A V)` equal to the target.
    Frames {
        #[serde(serialize_with = "crate::io::serialize_matrix")]
        u: Matrix,
        #[serde(serialize_with = "crate::io::serialize_matrix")]
        v: Matrix,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    #[serde(serialize_with = "crate::io::serialize_vector")]
    pub target: DVector<f64>,
    pub witness: Witness,
    /// Image of the witness, recomputed from scratch.
    #[serde(serialize_with = "crate::io::serialize_vector")]
    pub achieved: DVector<f64>,
    pub residual: f64,
    pub steps: Vec<HomotopyStep>,
}

impl Certificate {
    pub fn accepted(&self, tol: &Tolerances) -> bool {
        self.residual <= tol.certificate
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Block size used by the chain: `2` for two maps, `2^(l-1)` otherwise.
fn block_size(l: usize, n: usize) -> Result<usize> {
    match l {
        2 if n >= 3 => Ok(2),
        l if l >= 3 && l < usize::BITS as usize && n >= 1 << (l - 1) => Ok(1 << (l - 1)),
        _ => Err(OrbitError::Precondition(format!(
            "certification needs l = 2 with n >= 3, or l >= 3 with n >= 2^(l-1); got l = {l}, n = {n}"
        ))),
    }
}

/// An orthogonal `X` with `tr(M_i X) = alpha tr(M_i X0)` for every `i`.
///
/// Every block-row subset of size `b` is scaled once by
/// `eps = alpha^(1/K)`, `K = C(n-1, b-1)`, so each row ends up scaled by
/// `alpha`. Each scaling is undone by one homotopy, taken in lexicographic
/// subset order. `X0` may have determinant `-1`; the chain then runs on
/// `D M_i` and `X0 D` with `D = diag(-1, 1, ..., 1)`.
pub fn realize_scaled(ms: &[Matrix], x0: &Matrix, alpha: f64) -> Result<(Matrix, Vec<HomotopyStep>)> {
    let l = ms.len();
    let n = check_square(x0, "realize_scaled")?;
    for m in ms {
        if m.shape() != (n, n) {
            return Err(dim_err("realize_scaled", format!("{n}x{n}"), shape(m)));
        }
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(OrbitError::Precondition(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let b = block_size(l, n)?;
    if orthogonality_residual(x0) > Tolerances::global().matrix {
        return Err(OrbitError::NotOrthonormal(orthogonality_residual(x0)));
    }
    let reflect = x0.determinant() < 0.0;
    let (ms, start): (Vec<Matrix>, Matrix) = if reflect {
        let d = first_reflection(n);
        (ms.iter().map(|m| &d * m).collect(), x0 * d)
    } else {
        (ms.to_vec(), x0.clone())
    };
    if alpha == 1.0 {
        return Ok((x0.clone(), Vec::new()));
    }
    let subs = subsets(n, b);
    let eps = alpha.powf(1.0 / binomial(n - 1, b - 1) as f64);

    // bases[j] has every subset after j already scaled
    let mut bases = vec![ms.clone(); subs.len()];
    for j in (0..subs.len().saturating_sub(1)).rev() {
        let mut next = bases[j + 1].clone();
        for m in &mut next {
            for &r in &subs[j + 1] {
                m.row_mut(r).scale_mut(eps);
            }
        }
        bases[j] = next;
    }

    let mut x = Rotation::from_trusted(start);
    let mut steps = Vec::with_capacity(subs.len());
    for (sub, base) in subs.iter().zip(&bases) {
        let (next, step) = if b == 2 {
            row_pair_step(base, &x, (sub[0], sub[1]), eps)?
        } else {
            block_step(base, &x, sub, eps)?
        };
        x = next;
        steps.push(step);
    }
    let mut out = x.into_matrix();
    if reflect {
        out *= first_reflection(n);
    }
    Ok((out, steps))
}

/// `X'` with `tr(C X') = tr(D C X)`, `D` scaling rows `(i, j)` by `eps`.
fn row_pair_step(base: &[Matrix], x: &Rotation, rows: (usize, usize), eps: f64) -> Result<(Rotation, HomotopyStep)> {
    let fam = RowPairFamily { p: base[0].clone(), q: base[1].clone(), rows };
    let e = crate::ellipsoid::curve_eu(&fam.p, &fam.q, x.matrix(), rows);
    let y = &e.shape * DVector::from_vec(vec![eps, 0.0]) + &e.center;
    let u0 = degenerate_u0_rows(&fam.p, rows)?.u0;
    let out = homotopy_realize(&fam, &y, x, &u0)?;
    let step = HomotopyStep { rows: vec![rows.0, rows.1], s: out.s, iterations: out.iterations, residual: out.residual };
    Ok((out.witness, step))
}

/// Same for a block of `2^(l-1)` rows: the homotopy runs in `SO_N` on the
/// compressed matrices `C_i[S, :] X[:, S]`.
fn block_step(base: &[Matrix], x: &Rotation, sub: &[usize], eps: f64) -> Result<(Rotation, HomotopyStep)> {
    let n = x.n();
    let k = sub.len();
    let xm = x.matrix();
    let mats: Vec<Matrix> = base
        .iter()
        .map(|c| Matrix::from_fn(k, k, |a, bb| (0..n).map(|t| c[(sub[a], t)] * xm[(t, sub[bb])]).sum()))
        .collect();
    let y = DVector::from_iterator(mats.len(), mats.iter().map(|m| eps * m.trace()));
    let deg = degenerate_uv(&mats[0])?;
    let fam = BlockFamily { mats };
    let id = (Rotation::identity(k), Rotation::identity(k));
    let out = homotopy_realize(&fam, &y, &id, &deg)?;
    let next = Rotation::from_trusted(xm * embed(n, sub, out.witness.matrix()));
    let step = HomotopyStep { rows: sub.to_vec(), s: out.s, iterations: out.iterations, residual: out.residual };
    Ok((next, step))
}

/// Certificate for `alpha L(U A V)` with `U, V` in `SO_n`.
pub fn certify_scaled_point(l: &LinearMapSpec, a: &Matrix, u: &Rotation, v: &Rotation, alpha: f64) -> Result<Certificate> {
    certify_scaled_frames(l, a, u.matrix(), v.matrix(), alpha)
}

/// Certificate for `alpha L(U A V)` with orthogonal frames; `U` is kept and
/// `V` is replaced.
pub fn certify_scaled_frames(l: &LinearMapSpec, a: &Matrix, u: &Matrix, v: &Matrix, alpha: f64) -> Result<Certificate> {
    let n = l.n();
    for m in [a, u, v] {
        if m.shape() != (n, n) {
            return Err(dim_err("certify_scaled_point", format!("{n}x{n}"), shape(m)));
        }
    }
    let ua = u * a;
    let ms: Vec<Matrix> = l.coefficients().iter().map(|p| p * &ua).collect();
    let target = DVector::from_iterator(ms.len(), ms.iter().map(|m| trace_product(m, v))) * alpha;
    let (v2, steps) = realize_scaled(&ms, v, alpha)?;
    let achieved = l.apply_unchecked(&(u * a * &v2));
    let residual = (&achieved - &target).norm();
    Ok(Certificate { target, witness: Witness::Frames { u: u.clone(), v: v2 }, achieved, residual, steps })
}

/// Realises the point of `L(SO_n)` obtained from `U` after scaling rows
/// `(i, j)` of both coefficient matrices by `eps`.
pub fn certify_row_scaling(p: &Matrix, q: &Matrix, rows: (usize, usize), eps: f64, u: &Rotation) -> Result<Certificate> {
    let n = u.n();
    for m in [p, q] {
        if m.shape() != (n, n) {
            return Err(dim_err("certify_row_scaling", format!("{n}x{n}"), shape(m)));
        }
    }
    if n < 3 {
        return Err(OrbitError::Precondition(format!("row scaling needs n >= 3, got n = {n}")));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(OrbitError::Precondition(format!("eps must lie in [0, 1], got {eps}")));
    }
    let (x, step) = row_pair_step(&[p.clone(), q.clone()], u, rows, eps)?;
    let mut ds = [p.clone(), q.clone()];
    for m in &mut ds {
        m.row_mut(rows.0).scale_mut(eps);
        m.row_mut(rows.1).scale_mut(eps);
    }
    let target = DVector::from_vec(vec![trace_product(&ds[0], u.matrix()), trace_product(&ds[1], u.matrix())]);
    let achieved = DVector::from_vec(vec![trace_product(p, x.matrix()), trace_product(q, x.matrix())]);
    let residual = (&achieved - &target).norm();
    Ok(Certificate { target, witness: Witness::Single { x: x.into_matrix() }, achieved, residual, steps: vec![step] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_rotation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn subset_enumeration() {
        assert_eq!(subsets(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(subsets(6, 4).len(), 15);
        assert_eq!(binomial(7, 3), 35);
    }

    #[test]
    fn scaling_composition_reaches_alpha() {
        // each row lies in C(n-1, b-1) of the subsets
        for (n, b) in [(3usize, 2usize), (5, 2), (8, 4), (9, 4)] {
            let k = binomial(n - 1, b - 1);
            let eps = 0.3f64.powf(1.0 / k as f64);
            let mut d = vec![1.0; n];
            for s in subsets(n, b) {
                for r in s {
                    d[r] *= eps;
                }
            }
            assert!(d.iter().all(|x| (x - 0.3).abs() < 1e-14), "{n} {b}: {d:?}");
        }
    }

    #[test]
    fn two_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in [3usize, 4, 5] {
            let l = LinearMapSpec::new((0..2).map(|_| Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))).collect()).unwrap();
            let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            for alpha in [0.0, 0.25, 0.9, 1.0] {
                let u = haar_rotation(n, &mut rng);
                let v = haar_rotation(n, &mut rng);
                let c = certify_scaled_point(&l, &a, &u, &v, alpha).unwrap();
                assert!(c.residual <= 1e-8, "n={n} alpha={alpha}: {}", c.residual);
                let Witness::Frames { v: v2, .. } = &c.witness else { panic!() };
                assert!(Rotation::new(v2.clone()).is_ok());
            }
        }
    }

    #[test]
    fn three_and_four_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for (ell, n) in [(3usize, 4usize), (3, 5), (4, 8)] {
            let l = LinearMapSpec::new((0..ell).map(|_| Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))).collect()).unwrap();
            let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let u = haar_rotation(n, &mut rng);
            let v = haar_rotation(n, &mut rng);
            let c = certify_scaled_point(&l, &a, &u, &v, 0.5).unwrap();
            assert!(c.residual <= 1e-8, "l={ell} n={n}: {}", c.residual);
        }
    }

    #[test]
    fn reflected_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let n = 4;
        let l = LinearMapSpec::new((0..2).map(|_| Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))).collect()).unwrap();
        let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let d = first_reflection(n);
        let u = haar_rotation(n, &mut rng).into_matrix() * &d;
        let v = haar_rotation(n, &mut rng).into_matrix() * &d;
        let c = certify_scaled_frames(&l, &a, &u, &v, 0.4).unwrap();
        assert!(c.residual <= 1e-8);
        let Witness::Frames { v: v2, .. } = &c.witness else { panic!() };
        assert!((v2.determinant() + 1.0).abs() < 1e-10);
    }

    #[test]
    fn preconditions() {
        let l = LinearMapSpec::new(vec![Matrix::identity(2, 2); 2]).unwrap();
        let r = Rotation::identity(2);
        assert!(matches!(
            certify_scaled_point(&l, &Matrix::identity(2, 2), &r, &r, 0.5),
            Err(OrbitError::Precondition(_))
        ));
        let l3 = LinearMapSpec::new(vec![Matrix::identity(3, 3); 3]).unwrap();
        let r3 = Rotation::identity(3);
        assert!(certify_scaled_point(&l3, &Matrix::identity(3, 3), &r3, &r3, 0.5).is_err());
        let l2 = LinearMapSpec::new(vec![Matrix::identity(3, 3); 2]).unwrap();
        assert!(certify_scaled_point(&l2, &Matrix::identity(3, 3), &r3, &r3, 1.5).is_err());
    }

    #[test]
    fn row_scaling_inclusion() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..20 {
            let n = rng.random_range(3..7);
            let p = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let q = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let u = haar_rotation(n, &mut rng);
            let eps = rng.random_range(0.0..1.0);
            let c = certify_row_scaling(&p, &q, (0, n - 1), eps, &u).unwrap();
            assert!(c.residual <= 1e-8);
        }
    }
}
