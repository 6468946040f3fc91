//! Seeded random markets. Every trial gets its own ChaCha stream, so
//! results do not depend on how trials are scheduled across threads.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::market::{CardinalMarket, Matrix, OrdinalMarket};
use crate::rational::{frac, Rational};

/// Denominator of generated utilities.
pub const DENOMINATOR: i64 = 1000;
/// Generated utilities lie in `[-BOUND, BOUND]`.
pub const BOUND: i64 = 2;

pub fn rng_for(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn entry<R: Rng>(rng: &mut R) -> Rational {
    frac(rng.gen_range(-BOUND * DENOMINATOR..=BOUND * DENOMINATOR), DENOMINATOR)
}

fn matrix<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    (0..n).map(|_| (0..n).map(|_| entry(rng)).collect()).collect()
}

/// Utilities `k / 1000` with `k` uniform, so ties are possible.
pub fn random_market<R: Rng>(n: usize, rng: &mut R) -> CardinalMarket {
    CardinalMarket::new(matrix(n, rng), matrix(n, rng)).expect("square")
}

/// As [`random_market`], redrawn until no agent has a tie.
pub fn random_strict_market<R: Rng>(n: usize, rng: &mut R) -> CardinalMarket {
    loop {
        let m = random_market(n, rng);
        if m.is_strict() {
            return m;
        }
    }
}

/// Uniformly random strict preference lists.
pub fn random_ordinal_market<R: Rng>(n: usize, rng: &mut R) -> OrdinalMarket {
    let mut list = || {
        let mut l: Vec<usize> = (0..n).collect();
        l.shuffle(rng);
        l
    };
    let men = (0..n).map(|_| list()).collect();
    let women = (0..n).map(|_| list()).collect();
    OrdinalMarket::new(men, women).expect("permutations")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let a = random_market(3, &mut rng_for(7, 4));
        let b = random_market(3, &mut rng_for(7, 4));
        let c = random_market(3, &mut rng_for(7, 5));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
