use crate::error::{OrbitError, Result};
use crate::linalg::{givens, haar_rotation, trace_product, Matrix};
use crate::tolerance::Tolerances;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CounterexampleKind {
    /// Three maps on `SO_n` with a non-convex image.
    Ell3,
    /// A joint orbit `{(U A_1 V, U A_2 V)}` with a non-convex image.
    Joint,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CounterexampleConfig {
    pub starts: usize,
    pub threshold: f64,
    /// Sweeps stop once the distance improves by less than this.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self { starts: 256, threshold: 1e-3, tolerance: 1e-9, max_sweeps: 500 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub kind: CounterexampleKind,
    pub n: usize,
    pub m: usize,
    pub ell: usize,
    pub endpoints: [Vec<f64>; 2],
    pub expected: [Vec<f64>; 2],
    pub endpoints_exact: bool,
    pub midpoint: Vec<f64>,
    pub distance: f64,
    /// Distance reached by each start, in start order.
    pub start_distances: Vec<f64>,
    pub config: CounterexampleConfig,
    pub tolerances: Tolerances,
    pub pass: bool,
}

fn unit(n: usize, i: usize, j: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    m[(i, j)] = 1.0;
    m
}

/// Map coefficients `rows[j][i]` acting on `(U A_i V)_i`; the `Ell3` case
/// is a single matrix `A = I` with `U` free and `V = I`.
struct Problem {
    n: usize,
    mats: Vec<Matrix>,
    rows: Vec<Vec<Matrix>>,
    /// Whether the right factor is optimised as well.
    two_sided: bool,
}

impl Problem {
    fn eval(&self, u: &Matrix, v: &Matrix) -> DVector<f64> {
        let xs: Vec<Matrix> = self.mats.iter().map(|a| u * a * v).collect();
        DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|row| row.iter().zip(&xs).map(|(p, x)| trace_product(p, x)).sum()),
        )
    }

    /// `C_j` with `L_j(G U, V) = tr(G C_j)` (left) or `L_j(U, V G) = tr(G C_j)` (right).
    fn coefficient_mats(&self, u: &Matrix, v: &Matrix, left: bool) -> Vec<Matrix> {
        let n = self.n;
        let avs: Vec<Matrix> = self.mats.iter().map(|a| a * v).collect();
        self.rows
            .iter()
            .map(|row| {
                row.iter().zip(&avs).fold(Matrix::zeros(n, n), |acc, (p, av)| {
                    if left {
                        acc + u * av * p
                    } else {
                        acc + p * u * av
                    }
                })
            })
            .collect()
    }
}

fn ell3_problem(n: usize, ell: usize) -> Problem {
    let mut base = Matrix::zeros(n, n);
    for i in 0..n - 2 {
        base[(i, i)] = 1.0;
    }
    let mut rows = vec![vec![Matrix::zeros(n, n)]; ell];
    rows[0][0] = base.clone();
    rows[1][0] = &base + unit(n, n - 2, n - 2);
    rows[2][0] = &base + unit(n, n - 2, n - 1);
    Problem { n, mats: vec![Matrix::identity(n, n)], rows, two_sided: false }
}

fn joint_problem(n: usize, m: usize, ell: usize) -> Problem {
    let (a1, a2) = (unit(n, 0, 0), unit(n, 1, 1));
    let mut mats = vec![Matrix::zeros(n, n); m];
    mats[0] = a1.clone();
    mats[1] = a2.clone();
    let mut rows = vec![vec![Matrix::zeros(n, n); m]; ell];
    rows[0][0] = a1.clone();
    rows[0][1] = a2.clone();
    rows[1][0] = a2;
    rows[1][1] = -a1;
    Problem { n, mats, rows, two_sided: true }
}

fn embed3(n: usize, top: [f64; 9]) -> Matrix {
    let mut m = Matrix::identity(n, n);
    m.view_mut((0, 0), (3, 3)).copy_from(&Matrix::from_row_slice(3, 3, &top));
    m
}

/// Minimises `sum_k (a_k cos t + b_k sin t + c_k)^2` on a 64-point grid
/// refined by golden-section search.
fn minimise_trig(a: &[f64], b: &[f64], c: &[f64]) -> (f64, f64) {
    let f = |t: f64| {
        let (s, co) = t.sin_cos();
        a.iter().zip(b).zip(c).map(|((x, y), z)| (x * co + y * s + z).powi(2)).sum::<f64>()
    };
    const GRID: usize = 64;
    let h = std::f64::consts::TAU / GRID as f64;
    let (mut best_t, mut best_f) = (0.0, f(0.0));
    for k in 1..GRID {
        let t = k as f64 * h;
        let v = f(t);
        if v < best_f {
            best_t = t;
            best_f = v;
        }
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (best_t - h, best_t + h);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let (t, v) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    if v < best_f {
        (t, v)
    } else {
        (best_t, best_f)
    }
}

/// Coordinate descent of `|L(U, V) - target|` over planar rotations.
fn descend(pr: &Problem, target: &DVector<f64>, mut u: Matrix, mut v: Matrix, cfg: &CounterexampleConfig) -> f64 {
    let n = pr.n;
    let mut dist = (pr.eval(&u, &v) - target).norm();
    for _ in 0..cfg.max_sweeps {
        let before = dist;
        let sides: &[bool] = if pr.two_sided { &[true, false] } else { &[true] };
        for &left in sides {
            for i in 0..n {
                for j in i + 1..n {
                    let cs = pr.coefficient_mats(&u, &v, left);
                    let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
                    for (k, cm) in cs.iter().enumerate() {
                        let alpha = cm[(i, i)] + cm[(j, j)];
                        a.push(alpha);
                        b.push(cm[(j, i)] - cm[(i, j)]);
                        c.push(cm.trace() - alpha - target[k]);
                    }
                    let (t, val) = minimise_trig(&a, &b, &c);
                    if val.sqrt() < dist {
                        let g = givens(n, i, j, t);
                        if left {
                            u = g * u;
                        } else {
                            v *= g;
                        }
                        dist = (pr.eval(&u, &v) - target).norm();
                    }
                }
            }
        }
        if before - dist < cfg.tolerance {
            break;
        }
    }
    dist
}

/// Reproduces the two image points of a non-convex example exactly and
/// lower-bounds the distance from their midpoint to the image by
/// multistart local minimisation.
pub fn counterexample_report(
    kind: CounterexampleKind,
    n: usize,
    m: usize,
    ell: usize,
    config: CounterexampleConfig,
    rng: &mut impl Rng,
) -> Result<CounterexampleReport> {
    let (pr, frames, expected) = match kind {
        CounterexampleKind::Ell3 => {
            if n < 2 || ell < 3 {
                return Err(OrbitError::Precondition(format!("ell3 needs n >= 2 and l >= 3, got n = {n}, l = {ell}")));
            }
            let id = Matrix::identity(n, n);
            let mut turn = id.clone();
            turn[(n - 2, n - 2)] = 0.0;
            turn[(n - 1, n - 1)] = 0.0;
            turn[(n - 2, n - 1)] = -1.0;
            turn[(n - 1, n - 2)] = 1.0;
            let k = (n - 2) as f64;
            let mut e1 = vec![0.0; ell];
            let mut e2 = vec![0.0; ell];
            e1[..3].copy_from_slice(&[k, k + 1.0, k]);
            e2[..3].copy_from_slice(&[k, k, k + 1.0]);
            (ell3_problem(n, ell), [(id.clone(), id.clone()), (turn, id)], [e1, e2])
        }
        CounterexampleKind::Joint => {
            if n < 3 || m < 2 || ell < 2 {
                return Err(OrbitError::Precondition(format!(
                    "joint needs n >= 3, m >= 2, l >= 2, got n = {n}, m = {m}, l = {ell}"
                )));
            }
            let id = Matrix::identity(n, n);
            let u = embed3(n, [0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
            let v = embed3(n, [0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
            let mut e1 = vec![0.0; ell];
            let mut e2 = vec![0.0; ell];
            e1[0] = 2.0;
            e2[1] = 2.0;
            (joint_problem(n, m, ell), [(id.clone(), id), (u, v)], [e1, e2])
        }
    };
    let endpoints = frames.map(|(u, v)| pr.eval(&u, &v).as_slice().to_vec());
    let endpoints_exact = endpoints == expected;
    let mid = DVector::from_iterator(ell, (0..ell).map(|i| 0.5 * (endpoints[0][i] + endpoints[1][i])));

    let seeds: Vec<u64> = (0..config.starts).map(|_| rng.random()).collect();
    let start_distances: Vec<f64> = seeds
        .par_iter()
        .map(|&s| {
            let mut r = ChaCha8Rng::seed_from_u64(s);
            let u = haar_rotation(n, &mut r).into_matrix();
            let v = if pr.two_sided { haar_rotation(n, &mut r).into_matrix() } else { Matrix::identity(n, n) };
            descend(&pr, &mid, u, v, &config)
        })
        .collect();
    let distance = start_distances.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(CounterexampleReport {
        kind,
        n,
        m,
        ell,
        endpoints,
        expected,
        endpoints_exact,
        midpoint: mid.as_slice().to_vec(),
        distance,
        start_distances,
        config,
        tolerances: Tolerances::global(),
        pass: endpoints_exact && distance > config.threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> CounterexampleConfig {
        CounterexampleConfig { starts: 32, ..Default::default() }
    }

    #[test]
    fn ell3_endpoints() {
        for n in 2..=4 {
            let r = counterexample_report(CounterexampleKind::Ell3, n, 1, 3, quick(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
            assert!(r.endpoints_exact, "{:?}", r.endpoints);
            assert!(r.distance > 1e-3, "n={n}: {}", r.distance);
        }
        let r = counterexample_report(CounterexampleKind::Ell3, 3, 1, 3, quick(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(r.endpoints, [vec![1.0, 2.0, 1.0], vec![1.0, 1.0, 2.0]]);
    }

    #[test]
    fn joint_endpoints() {
        let r = counterexample_report(CounterexampleKind::Joint, 3, 2, 2, quick(), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(r.endpoints, [vec![2.0, 0.0], vec![0.0, 2.0]]);
        assert!(r.pass, "{}", r.distance);
    }

    #[test]
    fn descent_reaches_attainable_points() {
        // the endpoints themselves are at distance zero
        let pr = ell3_problem(3, 3);
        let target = DVector::from_vec(vec![1.0, 2.0, 1.0]);
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let best = (0..8)
            .map(|_| descend(&pr, &target, haar_rotation(3, &mut r).into_matrix(), Matrix::identity(3, 3), &quick()))
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-6, "{best}");
    }

    #[test]
    fn trig_minimiser() {
        let (t, v) = minimise_trig(&[1.0], &[0.0], &[0.0]);
        assert!(v < 1e-20 && ((t - std::f64::consts::FRAC_PI_2).abs() < 1e-8 || (t - 1.5 * std::f64::consts::PI).abs() < 1e-8));
    }

    #[test]
    fn preconditions() {
        let mut r = ChaCha8Rng::seed_from_u64(4);
        assert!(counterexample_report(CounterexampleKind::Ell3, 3, 1, 2, quick(), &mut r).is_err());
        assert!(counterexample_report(CounterexampleKind::Joint, 2, 2, 2, quick(), &mut r).is_err());
        assert!(counterexample_report(CounterexampleKind::Joint, 3, 1, 2, quick(), &mut r).is_err());
    }
}
