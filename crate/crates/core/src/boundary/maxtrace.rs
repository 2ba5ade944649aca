use crate::error::{dim_err, shape, Result};
use crate::linalg::{check_finite, check_square, sign_or_one, signed_svd, singular_values, Matrix, Rotation};

fn check_pair(p: &Matrix, a: &Matrix, ctx: &'static str) -> Result<usize> {
    let n = check_square(p, ctx)?;
    if a.shape() != p.shape() {
        return Err(dim_err(ctx, shape(p), shape(a)));
    }
    check_finite(p)?;
    check_finite(a)?;
    Ok(n)
}

/// `r(P, A) = max { tr(P U A V) : U, V in SO_n }`
/// `= sum_{i<n} s_i(A) s_i(P) + sign(det(A P)) s_n(A) s_n(P)`, with `sign(0) = +1`
/// (the last term vanishes then anyway).
pub fn max_trace(p: &Matrix, a: &Matrix) -> Result<f64> {
    let n = check_pair(p, a, "max_trace")?;
    let (sp, sa) = (singular_values(p), singular_values(a));
    let sign = sign_or_one(a.determinant()) * sign_or_one(p.determinant());
    let head: f64 = (0..n - 1).map(|i| sp[i] * sa[i]).sum();
    Ok(head + sign * sp[n - 1] * sa[n - 1])
}

/// Frames attaining [`max_trace`]: with signed SVDs `P = U_P S_P V_P^t` and
/// `A = U_A S_A V_A^t`, `U = V_P U_A^t` and `V = V_A U_P^t` give
/// `tr(P U A V) = tr(S_P S_A)`.
pub fn argmax_frames(p: &Matrix, a: &Matrix) -> Result<(Rotation, Rotation)> {
    check_pair(p, a, "argmax_frames")?;
    let (fp, fa) = (signed_svd(p)?, signed_svd(a)?);
    let u = fp.v.compose(&fa.u.transpose());
    let v = fa.v.compose(&fp.u.transpose());
    Ok((u, v))
}
