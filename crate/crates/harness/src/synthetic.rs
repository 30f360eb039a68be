//! Gaussian-mixture test data.

use dcoreset_core::{Centers, Point, WeightedPointSet};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{HarnessError, Result};

/// Parameters of the synthetic mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub k_true: usize,
    pub dim: usize,
    pub per_center: usize,
    /// Standard deviation of every coordinate around its center.
    pub spread: f64,
}

impl Default for SyntheticSpec {
    /// Desk-scale setting: 5 centers in R^10, 400 points each, unit spread.
    fn default() -> Self {
        SyntheticSpec { k_true: 5, dim: 10, per_center: 400, spread: 1.0 }
    }
}

/// `k_true` centers drawn from the standard Gaussian in R^dim, then
/// `per_center` points around each, `center + N(0, spread^2 I)`. Points come
/// grouped by center. Returns the data and the true centers.
pub fn gen_synthetic<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R) -> Result<(WeightedPointSet, Centers)> {
    if spec.k_true == 0 || spec.dim == 0 || spec.per_center == 0 {
        return Err(HarnessError::InvalidConfig("k_true, dim and per_center must be positive".into()));
    }
    if !(spec.spread >= 0.0 && spec.spread.is_finite()) {
        return Err(HarnessError::InvalidConfig("spread must be a nonnegative number".into()));
    }
    let gauss = |rng: &mut R| rng.sample::<f64, _>(StandardNormal);
    let centers: Vec<Point> = (0..spec.k_true)
        .map(|_| Point::new((0..spec.dim).map(|_| gauss(rng)).collect()))
        .collect::<Result<_, _>>()?;
    let mut points = Vec::with_capacity(spec.k_true * spec.per_center);
    for c in &centers {
        for _ in 0..spec.per_center {
            points.push(Point::new(c.iter().map(|m| m + spec.spread * gauss(rng)).collect())?);
        }
    }
    Ok((WeightedPointSet::unit(points)?, Centers::new(centers)?))
}
