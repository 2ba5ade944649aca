use crate::error::{dim_err, shape, OrbitError, Result};
use crate::linalg::{block_diag, check_square, complete_to_rotation, signed_svd, Matrix, Rotation};
use crate::tolerance::Tolerances;
use nalgebra::DVector;
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum U0Branch {
    /// Both rows vanish; the identity already works.
    Zero,
    /// Reduced rows are orthogonal or parallel; explicit formula.
    Explicit,
    /// Bisection on the reduced angle, optionally polished by the closed form.
    Bisection,
    Closed,
}

/// A rotation `U0` making `E(U0)` degenerate for the selected row pair.
#[derive(Debug, Clone, Serialize)]
pub struct U0Construction {
    pub u0: Rotation,
    pub rows: (usize, usize),
    /// The two rows were exchanged because the second one was longer.
    pub swapped: bool,
    pub branch: U0Branch,
    pub iterations: usize,
    /// Largest of `|p_i.u_j|`, `|p_j.u_i|`, `|p_i.u_i + p_j.u_j|`.
    pub residual: f64,
}

/// `degenerate_u0_rows` for the first two rows of `P`.
pub fn degenerate_u0(p: &Matrix) -> Result<U0Construction> {
    degenerate_u0_rows(p, (0, 1))
}

/// Orthonormal `u_i, u_j` (placed as columns `i`, `j` of a rotation) with
/// `p_i.u_j = p_j.u_i = p_i.u_i + p_j.u_j = 0`, where `p_i`, `p_j` are rows
/// of `P`. The first row of the shape of `E(U0)` then vanishes.
pub fn degenerate_u0_rows(p: &Matrix, rows: (usize, usize)) -> Result<U0Construction> {
    let n = check_square(p, "degenerate_u0")?;
    if n < 3 {
        return Err(OrbitError::Precondition(format!("degenerate frame needs n >= 3, got n = {n}")));
    }
    let (ri, rj) = rows;
    if ri == rj || ri >= n || rj >= n {
        return Err(OrbitError::Precondition(format!("invalid row pair ({ri}, {rj}) for n = {n}")));
    }
    let tol = Tolerances::global();
    let mut p1: DVector<f64> = p.row(ri).transpose();
    let mut p2: DVector<f64> = p.row(rj).transpose();
    let (n1, n2) = (p1.norm(), p2.norm());
    if n1 == 0.0 && n2 == 0.0 {
        return Ok(U0Construction {
            u0: Rotation::identity(n),
            rows,
            swapped: false,
            branch: U0Branch::Zero,
            iterations: 0,
            residual: 0.0,
        });
    }
    let swapped = n2 > n1;
    if swapped {
        std::mem::swap(&mut p1, &mut p2);
    }
    let len = p1.norm();
    let q1 = &p1 / len;
    let p2s = &p2 / len;
    let a = p2s.dot(&q1);
    let mut r = &p2s - &q1 * a;
    let b = r.norm();
    let q2 = if b > 1e-300 {
        r /= b;
        r
    } else {
        any_orthogonal(&q1)
    };
    let basis = complete_to_rotation(n, &[q1, q2])?;

    let mut v1 = DVector::zeros(n);
    let mut v2 = DVector::zeros(n);
    let (branch, iterations);
    if a.abs() * b <= 1e-15 {
        let b = b.min(1.0);
        v1[0] = -b;
        v1[2] = (1.0 - b * b).sqrt();
        v2[1] = 1.0;
        branch = U0Branch::Explicit;
        iterations = 0;
    } else {
        let f = |t: f64| {
            let (s, c) = t.sin_cos();
            b * c - b * s / (b * b * s * s + a * a).sqrt()
        };
        let (mut lo, mut hi) = (0.0_f64, std::f64::consts::PI);
        let mut it = 0;
        while hi - lo > tol.bisection && it < tol.max_bisection {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            it += 1;
        }
        let bisected = 0.5 * (lo + hi);
        let closed = closed_form_angle(a, b);
        let theta = if f(closed).abs() < f(bisected).abs() { closed } else { bisected };
        branch = if theta == closed { U0Branch::Closed } else { U0Branch::Bisection };
        iterations = it;
        let (s, c) = theta.sin_cos();
        let w = (b * b * s * s + a * a).sqrt();
        v2[1] = c;
        v2[2] = s;
        v1[0] = -b * s / w;
        v1[1] = a * s / w;
        v1[2] = -a * c / w;
    }
    let mut u1 = basis.matrix() * v1;
    let mut u2 = basis.matrix() * v2;
    if swapped {
        std::mem::swap(&mut u1, &mut u2);
    }
    let u0 = place_columns(n, rows, &u1, &u2)?;
    let (pi, pj): (DVector<f64>, DVector<f64>) = (p.row(ri).transpose(), p.row(rj).transpose());
    let residual = [pi.dot(&u2), pj.dot(&u1), pi.dot(&u1) + pj.dot(&u2)]
        .iter()
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    Ok(U0Construction { u0, rows, swapped, branch, iterations, residual })
}

/// Root of `b cos t = b sin t / sqrt(b^2 sin^2 t + a^2)` in `(0, pi/2)`.
fn closed_form_angle(a: f64, b: f64) -> f64 {
    let (a2, b2) = (a * a, b * b);
    let d = 1.0 + a2 - b2;
    let x = 2.0 * a2 / (d + (d * d + 4.0 * a2 * b2).sqrt());
    let e = 1.0 + a2 + b2;
    let y = 2.0 / (e + (e * e - 4.0 * b2).max(0.0).sqrt());
    x.max(0.0).sqrt().atan2(y.max(0.0).sqrt())
}

fn any_orthogonal(q: &DVector<f64>) -> DVector<f64> {
    let k = q.iamin();
    let mut e = DVector::zeros(q.len());
    e[k] = 1.0;
    let r = &e - q * q[k];
    let nr = r.norm();
    r / nr
}

/// A rotation whose columns `i`, `j` are `u1`, `u2`.
fn place_columns(n: usize, (i, j): (usize, usize), u1: &DVector<f64>, u2: &DVector<f64>) -> Result<Rotation> {
    let full = complete_to_rotation(n, &[u1.clone(), u2.clone()])?;
    let f = full.matrix();
    let mut out = Matrix::zeros(n, n);
    out.set_column(i, &f.column(0));
    out.set_column(j, &f.column(1));
    let mut next = 2;
    let mut last_free = 0;
    for c in 0..n {
        if c != i && c != j {
            out.set_column(c, &f.column(next));
            next += 1;
            last_free = c;
        }
    }
    if out.determinant() < 0.0 {
        let col = -out.column(last_free);
        out.set_column(last_free, &col);
    }
    Ok(Rotation::from_trusted(out))
}

/// `(U, V)` in `SO_N` with `tr(R(theta) U P1 V) = 0` for every `theta`:
/// `U P1 V = Sigma J` where `J = diag([[0, -1], [1, 0]], ...)`.
pub fn degenerate_uv(p1: &Matrix) -> Result<(Rotation, Rotation)> {
    let n = check_square(p1, "degenerate_uv")?;
    if n < 4 || !n.is_power_of_two() {
        return Err(dim_err("degenerate_uv", "size 2^(l-1) with l >= 3", shape(p1)));
    }
    let svd = signed_svd(p1)?;
    let j = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let jj = block_diag(&vec![j; n / 2]);
    Ok((
        svd.u.transpose(),
        Rotation::from_trusted(svd.v.matrix() * jj),
    ))
}
