//! Fixtures shared by the benchmarks.

use enflo_core::{GridFunction, LpSpace, TorusDomain, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_grid(n: usize, m: usize, dim: usize, seed: u64) -> GridFunction {
    let domain = TorusDomain::new(n, m).expect("valid torus");
    let space = LpSpace::real(dim, 2.0).expect("valid space");
    GridFunction::random_gaussian(domain, space, &mut ChaCha8Rng::seed_from_u64(seed)).expect("grid fits")
}

pub fn random_tuple(space: &LpSpace, n: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Vector::new((0..space.storage_len()).map(|_| rng.random_range(-1.0..1.0)).collect()))
        .collect()
}
