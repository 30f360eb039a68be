//! Random-number plumbing shared by the construction modules.

use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Per-site generator. Sites get their own stream so that the output does
/// not depend on the order in which sites are processed.
pub type SiteRng = ChaCha8Rng;

/// Draws `n` child seeds from `rng`, in order.
pub(crate) fn child_seeds<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> Vec<u64> {
    (0..n).map(|_| rng.next_u64()).collect()
}

pub(crate) fn site_rng(seed: u64) -> SiteRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Index drawn with probability proportional to `weights`, or `None` when no
/// weight is positive. Weights must be finite and nonnegative.
pub(crate) fn draw_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let dist = WeightedIndex::new(weights.iter().copied()).ok()?;
    Some(dist.sample(rng))
}

/// `count` i.i.d. indices proportional to `weights`.
pub(crate) fn draw_many<R: Rng + ?Sized>(
    weights: &[f64],
    count: usize,
    rng: &mut R,
) -> Option<Vec<usize>> {
    if count == 0 {
        return Some(Vec::new());
    }
    let dist = WeightedIndex::new(weights.iter().copied()).ok()?;
    Some((0..count).map(|_| dist.sample(rng)).collect())
}
