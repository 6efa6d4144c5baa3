use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::geom::Point;

/// `n` independent uniform points in the unit square.
pub fn gen_uniform(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    uniform_points(&mut rng, n)
}

pub(crate) fn uniform_points(rng: &mut impl Rng, n: usize) -> Vec<Point> {
    (0..n).map(|_| Point::new(rng.random(), rng.random())).collect()
}

/// A Poisson(`intensity`) number of uniform points in the unit square.
pub fn gen_poisson(intensity: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = if intensity > 0.0 {
        Poisson::new(intensity).map_or(0, |d| d.sample(&mut rng) as usize)
    } else {
        0
    };
    uniform_points(&mut rng, count)
}

/// Mixes a base seed with a trial index so that parallel workers own
/// independent streams.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
