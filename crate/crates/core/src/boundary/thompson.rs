use crate::error::{dim_err, OrbitError, Result};
use crate::tolerance::Tolerances;
use serde::{Deserialize, Serialize};

/// Is `d` a diagonal of some matrix with singular values `s` and the
/// given determinant sign?
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagonalHullQuery {
    pub d: Vec<f64>,
    pub s: Vec<f64>,
    pub det_sign: i8,
}

impl DiagonalHullQuery {
    pub fn new(d: Vec<f64>, s: Vec<f64>, det_sign: i8) -> Result<Self> {
        if d.len() != s.len() || d.is_empty() {
            return Err(dim_err("DiagonalHullQuery", format!("d of length {}", s.len()), d.len()));
        }
        if s.windows(2).any(|w| w[0] < w[1]) || s.iter().any(|&x| x < 0.0) {
            return Err(OrbitError::Precondition("singular values must be sorted descending and nonnegative".into()));
        }
        if !matches!(det_sign, -1..=1) {
            return Err(OrbitError::Precondition(format!("det_sign must be -1, 0 or 1, got {det_sign}")));
        }
        if d.iter().chain(&s).any(|x| !x.is_finite()) {
            return Err(OrbitError::NonFinite);
        }
        Ok(Self { d, s, det_sign })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ThompsonResult {
    pub member: bool,
    /// Convex weights on vertices, for members.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<(Vec<f64>, f64)>>,
    /// `(w, b)` with `w . v <= b` for every vertex and `w . d > b`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separator: Option<(Vec<f64>, f64)>,
    pub vertices: usize,
    pub lp_iterations: usize,
}

pub const MAX_N: usize = 7;

/// Signed permutations of `s` with an even number of minus signs
/// (`det_sign = 1`), odd (`-1`), or either (`0`).
pub fn thompson_vertices(s: &[f64], det_sign: i8) -> Result<Vec<Vec<f64>>> {
    let n = s.len();
    if n > MAX_N {
        return Err(OrbitError::TooLarge { n, max: MAX_N });
    }
    let mut perms: Vec<Vec<usize>> = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    heap_permutations(n, &mut idx, &mut perms);
    let mut out = Vec::new();
    for perm in &perms {
        for mask in 0u32..(1 << n) {
            let odd = mask.count_ones() % 2 == 1;
            let keep = match det_sign {
                1 => !odd,
                -1 => odd,
                _ => true,
            };
            if keep {
                out.push((0..n).map(|i| if mask >> i & 1 == 1 { -s[perm[i]] } else { s[perm[i]] }).collect());
            }
        }
    }
    Ok(out)
}

fn heap_permutations(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(a.clone());
        return;
    }
    for i in 0..k {
        heap_permutations(k - 1, a, out);
        if k.is_multiple_of(2) {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Decides membership of `d` in the convex hull of the vertex set by a
/// Phase-I simplex over convex weights. The LP dual supplies a separating
/// functional for non-members.
pub fn thompson_membership(q: &DiagonalHullQuery) -> Result<ThompsonResult> {
    let tol = Tolerances::global();
    let n = q.d.len();
    let verts = thompson_vertices(&q.s, q.det_sign)?;
    let scale = q.s.first().copied().unwrap_or(0.0).max(q.d.iter().fold(0.0_f64, |m, x| m.max(x.abs()))).max(1.0);
    let feas = 1e-9 * scale;

    // cheap separators: coordinate functionals
    for i in 0..n {
        for sgn in [1.0, -1.0] {
            let mut w = vec![0.0; n];
            w[i] = sgn;
            let b = verts.iter().map(|v| dot(&w, v)).fold(f64::NEG_INFINITY, f64::max);
            if dot(&w, &q.d) > b + feas {
                return Ok(ThompsonResult {
                    member: false,
                    weights: None,
                    separator: Some((w, b)),
                    vertices: verts.len(),
                    lp_iterations: 0,
                });
            }
        }
    }

    let lp = phase_one(&verts, &q.d, tol.max_bisection * 50);
    if lp.objective <= feas {
        let weights: Vec<(Vec<f64>, f64)> = lp
            .basis
            .iter()
            .zip(&lp.values)
            .filter(|(&j, &x)| j < verts.len() && x > 0.0)
            .map(|(&j, &x)| (verts[j].clone(), x))
            .collect();
        Ok(ThompsonResult { member: true, weights: Some(weights), separator: None, vertices: verts.len(), lp_iterations: lp.iterations })
    } else {
        let w: Vec<f64> = lp.dual[..n].to_vec();
        let b = verts.iter().map(|v| dot(&w, v)).fold(f64::NEG_INFINITY, f64::max);
        if dot(&w, &q.d) <= b {
            return Err(OrbitError::Numerical("simplex dual does not separate the query".into()));
        }
        Ok(ThompsonResult { member: false, weights: None, separator: Some((w, b)), vertices: verts.len(), lp_iterations: lp.iterations })
    }
}

struct PhaseOne {
    objective: f64,
    basis: Vec<usize>,
    values: Vec<f64>,
    /// Duals in the original (unflipped) row space.
    dual: Vec<f64>,
    iterations: usize,
}

/// min sum(a) s.t. sum_j x_j [v_j; 1] + F a = [d; 1], x, a >= 0, where `F`
/// flips rows with negative right-hand side. Revised simplex with an
/// explicit basis inverse (m = n + 1 rows); Bland's rule throughout.
fn phase_one(verts: &[Vec<f64>], d: &[f64], max_iter: usize) -> PhaseOne {
    let n = d.len();
    let m = n + 1;
    let nv = verts.len();
    let flip: Vec<f64> = (0..m).map(|i| if i < n && d[i] < 0.0 { -1.0 } else { 1.0 }).collect();
    let col = |j: usize| -> Vec<f64> {
        if j < nv {
            (0..m).map(|i| flip[i] * if i < n { verts[j][i] } else { 1.0 }).collect()
        } else {
            (0..m).map(|i| if i == j - nv { 1.0 } else { 0.0 }).collect()
        }
    };
    let cost = |j: usize| if j < nv { 0.0 } else { 1.0 };
    let mut basis: Vec<usize> = (nv..nv + m).collect();
    let mut binv = vec![vec![0.0; m]; m];
    for (i, row) in binv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut x: Vec<f64> = (0..m).map(|i| flip[i] * if i < n { d[i] } else { 1.0 }).collect();
    let mut iterations = 0;
    let mut y = vec![0.0; m];
    loop {
        // y^t = c_B^t B^{-1}
        for (k, yk) in y.iter_mut().enumerate() {
            *yk = (0..m).map(|i| cost(basis[i]) * binv[i][k]).sum();
        }
        if iterations >= max_iter {
            break;
        }
        let entering = (0..nv).find(|&j| {
            let c = col(j);
            -dot(&y, &c) < -1e-12
        });
        let Some(j) = entering else { break };
        let c = col(j);
        let u: Vec<f64> = (0..m).map(|i| dot(&binv[i], &c)).collect();
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if u[i] > 1e-12 {
                let ratio = x[i] / u[i];
                match leave {
                    Some((li, lr)) if ratio > lr + 1e-15 || (ratio >= lr - 1e-15 && basis[i] > basis[li]) => {}
                    _ => leave = Some((i, ratio)),
                }
            }
        }
        let Some((r, _)) = leave else { break };
        let piv = u[r];
        let theta = x[r] / piv;
        for i in 0..m {
            if i != r {
                x[i] -= theta * u[i];
            }
        }
        x[r] = theta;
        let pivot_row: Vec<f64> = binv[r].iter().map(|v| v / piv).collect();
        for i in 0..m {
            if i != r {
                let f = u[i];
                for k in 0..m {
                    binv[i][k] -= f * pivot_row[k];
                }
            }
        }
        binv[r] = pivot_row;
        basis[r] = j;
        iterations += 1;
    }
    let objective = (0..m).map(|i| cost(basis[i]) * x[i]).sum();
    let dual = (0..m).map(|i| y[i] * flip[i]).collect();
    PhaseOne { objective, basis, values: x, dual, iterations }
}
