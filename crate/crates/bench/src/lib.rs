//! Seeded fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use so_orbit::linalg::haar_rotation;
use so_orbit::{LinearMapSpec, Matrix, Rotation};

pub struct Instance {
    pub a: Matrix,
    pub map: LinearMapSpec,
    pub u: Rotation,
    pub v: Rotation,
}

pub fn random_matrix(n: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))
}

/// `ell` coefficient matrices, an orbit matrix and two frames of size `n`.
pub fn instance(n: usize, ell: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_matrix(n, &mut rng);
    let map = LinearMapSpec::new((0..ell).map(|_| random_matrix(n, &mut rng)).collect()).expect("square maps");
    let (u, v) = (haar_rotation(n, &mut rng), haar_rotation(n, &mut rng));
    Instance { a, map, u, v }
}
