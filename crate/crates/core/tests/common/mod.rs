#![allow(dead_code)]

use dcoreset_core::{Point, WeightedPointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pt(c: &[f64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

pub fn unit(rows: &[Vec<f64>]) -> WeightedPointSet {
    WeightedPointSet::unit(rows.iter().map(|r| pt(r)).collect()).unwrap()
}

/// Gaussian blobs around `centers` standard-normal centers in R^dim.
pub fn mixture(centers: usize, dim: usize, per_center: usize, spread: f64, rng: &mut impl Rng) -> WeightedPointSet {
    let mus: Vec<Vec<f64>> =
        (0..centers).map(|_| (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).collect();
    let mut pts = Vec::with_capacity(centers * per_center);
    for mu in &mus {
        for _ in 0..per_center {
            pts.push(pt(&mu.iter().map(|m| m + spread * rng.sample::<f64, _>(StandardNormal)).collect::<Vec<_>>()));
        }
    }
    WeightedPointSet::unit(pts).unwrap()
}
