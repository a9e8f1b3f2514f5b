use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Allocation, AllocationMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RoundingStrategy {
    Floor,
    Ceil,
    /// Show user `x` with probability `d_x`, independently, from a seeded stream.
    BernoulliSeeded(u64),
}

/// Realize a fractional allocation as a binary one.
///
/// Integral entries are preserved under every strategy. For
/// [`RoundingStrategy::BernoulliSeeded`] one uniform is drawn per user (in
/// index order) regardless of its value, so the same seed always consumes the
/// same stream.
pub fn round_allocation(frac: &Allocation, strategy: RoundingStrategy) -> Allocation {
    let bits: Vec<bool> = match strategy {
        RoundingStrategy::Floor => frac.decisions().iter().map(|&d| d >= 1.0).collect(),
        RoundingStrategy::Ceil => frac.decisions().iter().map(|&d| d > 0.0).collect(),
        RoundingStrategy::BernoulliSeeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            frac.decisions()
                .iter()
                .map(|&d| rng.random::<f64>() < d)
                .collect()
        }
    };
    let out = Allocation::from_bits(&bits);
    debug_assert_eq!(out.mode(), AllocationMode::Binary);
    out
}
