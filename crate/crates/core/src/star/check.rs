use super::certify::{certify_scaled_frames, realize_scaled, Certificate, Witness};
use crate::error::{dim_err, Result};
use crate::linalg::{haar_orthogonal, haar_rotation, Matrix};
use crate::orbit::{draw_frames, joint_point, reduce_joint, Group, JointKind, JointLinearMap, JointOrbitSpec, LinearMapSpec, OrbitSpec};
use crate::tolerance::Tolerances;
use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct StarEntry {
    pub target_index: usize,
    pub alpha: f64,
    pub target: Vec<f64>,
    pub residual: f64,
    /// Total bisection iterations over the chain.
    pub iterations: usize,
    pub steps: usize,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StarReport {
    pub n: usize,
    pub ell: usize,
    pub group: Group,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint: Option<JointKind>,
    pub num_targets: usize,
    pub alphas: Vec<f64>,
    pub tolerances: Tolerances,
    pub entries: Vec<StarEntry>,
    pub max_residual: f64,
    /// Indices into `entries` of rejected certificates.
    pub failures: Vec<usize>,
}

impl StarReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Drops witnesses to keep reports small.
    pub fn without_witnesses(mut self) -> Self {
        for e in &mut self.entries {
            e.witness = None;
        }
        self
    }
}

fn entry(target_index: usize, alpha: f64, target: DVector<f64>, cert: Result<Certificate>, tol: &Tolerances) -> StarEntry {
    match cert {
        Ok(c) => StarEntry {
            target_index,
            alpha,
            target: c.target.as_slice().to_vec(),
            residual: c.residual,
            iterations: c.steps.iter().map(|s| s.iterations).sum(),
            steps: c.steps.len(),
            accepted: c.accepted(tol),
            witness: Some(c.witness),
            error: None,
        },
        Err(e) => StarEntry {
            target_index,
            alpha,
            target: target.as_slice().to_vec(),
            residual: f64::INFINITY,
            iterations: 0,
            steps: 0,
            accepted: false,
            witness: None,
            error: Some(e.to_string()),
        },
    }
}

struct Batch<'a> {
    n: usize,
    ell: usize,
    group: Group,
    joint: Option<JointKind>,
    num_targets: usize,
    alphas: &'a [f64],
}

impl Batch<'_> {
    /// Runs `certify(target, alpha)` over the grid in parallel; entries are
    /// ordered by target then alpha.
    fn run<F>(&self, certify: F) -> StarReport
    where
        F: Fn(usize, f64) -> (DVector<f64>, Result<Certificate>) + Sync,
    {
        let tol = Tolerances::global();
        let na = self.alphas.len();
        let entries: Vec<StarEntry> = (0..self.num_targets * na)
            .into_par_iter()
            .map(|k| {
                let (t, alpha) = (k / na, self.alphas[k % na]);
                let (target, cert) = certify(t, alpha);
                entry(t, alpha, target, cert, &tol)
            })
            .collect();
        let max_residual = entries.iter().fold(0.0_f64, |m, e| m.max(e.residual));
        let failures = entries.iter().enumerate().filter(|(_, e)| !e.accepted).map(|(i, _)| i).collect();
        StarReport {
            n: self.n,
            ell: self.ell,
            group: self.group,
            joint: self.joint,
            num_targets: self.num_targets,
            alphas: self.alphas.to_vec(),
            tolerances: tol,
            entries,
            max_residual,
            failures,
        }
    }
}

/// Certifies `alpha L(U A V)` for `num_targets` random frame pairs and each
/// `alpha` in the grid. Frames are drawn sequentially from `rng` before any
/// work starts, so the report does not depend on the thread count.
pub fn star_check(
    l: &LinearMapSpec,
    orbit: &OrbitSpec,
    num_targets: usize,
    alphas: &[f64],
    rng: &mut impl Rng,
) -> Result<StarReport> {
    let n = orbit.n();
    if l.n() != n {
        return Err(dim_err("star_check", format!("maps of size {n}"), l.n()));
    }
    let frames: Vec<(Matrix, Matrix)> = (0..num_targets).map(|_| draw_frames(n, orbit.group, rng)).collect();
    let batch = Batch { n, ell: l.ell(), group: orbit.group, joint: None, num_targets, alphas };
    Ok(batch.run(|t, alpha| {
        let (u, v) = &frames[t];
        let target = l.apply_unchecked(&(u * &orbit.a * v)) * alpha;
        (target, certify_scaled_frames(l, &orbit.a, u, v, alpha))
    }))
}

/// Star check for joint orbits.
///
/// `O1`/`O2` collapse to an ordinary map on a single group element `X`
/// (`A_i X` resp. `X A_i`). `O3` freezes `U` per target and certifies the
/// `V`-side scaling of `M_j = sum_i P^(j)_i U A_i`; with one matrix this
/// is exactly [`star_check`].
pub fn star_check_joint(
    map: &JointLinearMap,
    joint: &JointOrbitSpec,
    num_targets: usize,
    alphas: &[f64],
    rng: &mut impl Rng,
) -> Result<StarReport> {
    let n = joint.n();
    // validates shapes
    joint_point(map, joint, &Matrix::identity(n, n), &Matrix::identity(n, n))?;
    let batch = Batch { n, ell: map.ell(), group: joint.group, joint: Some(joint.kind), num_targets, alphas };
    match joint.kind {
        JointKind::O1 | JointKind::O2 => {
            let q = reduce_joint(map, &joint.mats, joint.kind)?;
            let xs: Vec<Matrix> = (0..num_targets)
                .map(|_| match joint.group {
                    Group::Special => haar_rotation(n, rng).into_matrix(),
                    Group::Orthogonal => haar_orthogonal(n, rng),
                })
                .collect();
            Ok(batch.run(|t, alpha| {
                let x = &xs[t];
                let target = q.apply_unchecked(x) * alpha;
                let cert = realize_scaled(q.coefficients(), x, alpha).map(|(x2, steps)| {
                    let achieved = q.apply_unchecked(&x2);
                    let residual = (&achieved - &target).norm();
                    Certificate { target: target.clone(), witness: Witness::Single { x: x2 }, achieved, residual, steps }
                });
                (target, cert)
            }))
        }
        JointKind::O3 => {
            let frames: Vec<(Matrix, Matrix)> = (0..num_targets).map(|_| draw_frames(n, joint.group, rng)).collect();
            Ok(batch.run(|t, alpha| {
                let (u, v) = &frames[t];
                let uas: Vec<Matrix> = joint.mats.iter().map(|a| u * a).collect();
                let ms: Vec<Matrix> = map
                    .rows()
                    .iter()
                    .map(|row| row.iter().zip(&uas).fold(Matrix::zeros(n, n), |acc, (p, ua)| acc + p * ua))
                    .collect();
                let target = DVector::from_iterator(ms.len(), ms.iter().map(|m| crate::linalg::trace_product(m, v))) * alpha;
                let cert = realize_scaled(&ms, v, alpha).and_then(|(v2, steps)| {
                    let achieved = joint_point(map, joint, u, &v2)?;
                    let residual = (&achieved - &target).norm();
                    Ok(Certificate {
                        target: target.clone(),
                        witness: Witness::Frames { u: u.clone(), v: v2 },
                        achieved,
                        residual,
                        steps,
                    })
                });
                (target, cert)
            }))
        }
    }
}
