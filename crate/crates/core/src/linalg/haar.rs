use super::{Matrix, Rotation};
use rand::Rng;
use rand_distr::StandardNormal;

/// Haar-distributed element of `O_n`: QR of a Gaussian matrix with the
/// triangular factor's diagonal made positive.
pub fn haar_orthogonal(n: usize, rng: &mut impl Rng) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Haar-distributed rotation. Orthogonal draws with `det = -1` have their
/// first column negated, which maps that coset onto `SO_n` preserving
/// Haar measure.
pub fn haar_rotation(n: usize, rng: &mut impl Rng) -> Rotation {
    let mut q = haar_orthogonal(n, rng);
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Rotation::from_trusted(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic_under_seed() {
        let a = haar_rotation(3, &mut ChaCha8Rng::seed_from_u64(42));
        let b = haar_rotation(3, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }

    #[test]
    fn invariants_across_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..10_000 {
            let n = 2 + i % 7;
            let r = haar_rotation(n, &mut rng);
            assert!(r.residual() <= 1e-12);
            assert!((r.matrix().determinant() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn entry_means_vanish() {
        // Haar measure is invariant under negating any row, so every entry has mean 0.
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let draws = 10_000;
        let mut acc = Matrix::zeros(3, 3);
        for _ in 0..draws {
            acc += haar_rotation(3, &mut rng).matrix();
        }
        acc /= draws as f64;
        assert!(acc.iter().all(|x| x.abs() < 0.05), "{acc}");
    }

    #[test]
    fn second_moments_match_haar() {
        // E[u_ij^2] = 1/n under Haar measure.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws = 20_000;
        let mut acc = Matrix::zeros(4, 4);
        for _ in 0..draws {
            acc += haar_rotation(4, &mut rng).matrix().map(|x| x * x);
        }
        acc /= draws as f64;
        assert!(acc.iter().all(|x| (x - 0.25).abs() < 0.02), "{acc}");
    }

    #[test]
    fn trivial_group() {
        let r = haar_rotation(1, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(r.matrix()[(0, 0)], 1.0);
    }
}
