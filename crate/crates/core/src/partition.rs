//! Distributing a global dataset over the sites of a network.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::{sq_dist, WeightedPointSet};
use crate::network::Topology;
use crate::sampling::draw_index;
use crate::{Error, Result};

const NONEMPTY_ATTEMPTS: usize = 1000;
const BANDWIDTH_SUBSAMPLE: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartitionScheme {
    /// Every point picks a site uniformly.
    Uniform,
    /// Every site gets a random anchor point from the data; a point goes to
    /// site `i` with probability proportional to
    /// `exp(-|p - anchor_i|^2 / (2 * bandwidth^2))`.
    SimilarityBased { bandwidth: f64 },
    /// Every site gets a weight `|N(0, 1)|`; points go to sites in
    /// proportion to those weights.
    Weighted,
    /// Points go to sites in proportion to the site's degree.
    DegreeBased,
}

impl PartitionScheme {
    pub fn name(&self) -> &'static str {
        match self {
            PartitionScheme::Uniform => "uniform",
            PartitionScheme::SimilarityBased { .. } => "similarity",
            PartitionScheme::Weighted => "weighted",
            PartitionScheme::DegreeBased => "degree",
        }
    }
}

/// Splits `set` by site labels, keeping the input order within each site.
pub fn split(set: &WeightedPointSet, labels: &[usize], n: usize) -> Result<Vec<WeightedPointSet>> {
    if labels.len() != set.len() {
        return Err(Error::invalid("one label per point required"));
    }
    let mut sites = vec![WeightedPointSet::empty(); n];
    for ((p, w), &l) in set.iter().zip(labels) {
        let site = sites.get_mut(l).ok_or(Error::invalid("label out of range"))?;
        site.push(p.clone(), w)?;
    }
    Ok(sites)
}

/// Site label for every point. The whole draw (including anchors or site
/// weights) is repeated until every site receives at least one point.
pub fn assign<R: Rng + ?Sized>(
    set: &WeightedPointSet,
    n: usize,
    scheme: &PartitionScheme,
    topology: Option<&Topology>,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::EmptyInput);
    }
    if n < 2 {
        return Err(Error::invalid("partitioning needs at least two sites"));
    }
    match scheme {
        PartitionScheme::SimilarityBased { bandwidth } if !(*bandwidth > 0.0 && bandwidth.is_finite()) => {
            return Err(Error::invalid("bandwidth must be positive"));
        }
        PartitionScheme::DegreeBased => match topology {
            None => return Err(Error::invalid("degree-based partition needs a topology")),
            Some(g) if g.n() != n => return Err(Error::invalid("topology size differs from site count")),
            _ => {}
        },
        _ => {}
    }

    for _ in 0..NONEMPTY_ATTEMPTS {
        let labels = match *scheme {
            PartitionScheme::Uniform => (0..set.len()).map(|_| rng.random_range(0..n)).collect(),
            PartitionScheme::Weighted => {
                let weights: Vec<f64> = (0..n).map(|_| libm::fabs(rng.sample::<f64, _>(StandardNormal))).collect();
                draw_by_site_weights(set.len(), &weights, rng)?
            }
            PartitionScheme::DegreeBased => {
                let g = topology.expect("checked above");
                let weights: Vec<f64> = g.degrees().into_iter().map(|d| d as f64).collect();
                draw_by_site_weights(set.len(), &weights, rng)?
            }
            PartitionScheme::SimilarityBased { bandwidth } => similarity_labels(set, n, bandwidth, rng)?,
        };
        if all_sites_used(&labels, n) {
            return Ok(labels);
        }
    }
    Err(Error::RetryExhausted { what: "partition with every site nonempty", attempts: NONEMPTY_ATTEMPTS })
}

pub fn partition<R: Rng + ?Sized>(
    set: &WeightedPointSet,
    n: usize,
    scheme: &PartitionScheme,
    topology: Option<&Topology>,
    rng: &mut R,
) -> Result<Vec<WeightedPointSet>> {
    let labels = assign(set, n, scheme, topology, rng)?;
    split(set, &labels, n)
}

/// Multinomial split with fixed site weights (retried until no site is
/// empty).
pub fn partition_by_site_weights<R: Rng + ?Sized>(
    set: &WeightedPointSet,
    site_weights: &[f64],
    rng: &mut R,
) -> Result<Vec<WeightedPointSet>> {
    let n = site_weights.len();
    for _ in 0..NONEMPTY_ATTEMPTS {
        let labels = draw_by_site_weights(set.len(), site_weights, rng)?;
        if all_sites_used(&labels, n) {
            return split(set, &labels, n);
        }
    }
    Err(Error::RetryExhausted { what: "partition with every site nonempty", attempts: NONEMPTY_ATTEMPTS })
}

fn all_sites_used(labels: &[usize], n: usize) -> bool {
    let mut used = vec![false; n];
    labels.iter().for_each(|&l| used[l] = true);
    used.into_iter().all(|u| u)
}

fn draw_by_site_weights<R: Rng + ?Sized>(count: usize, weights: &[f64], rng: &mut R) -> Result<Vec<usize>> {
    crate::sampling::draw_many(weights, count, rng).ok_or(Error::invalid("site weights must be nonnegative with a positive sum"))
}

fn similarity_labels<R: Rng + ?Sized>(
    set: &WeightedPointSet,
    n: usize,
    bandwidth: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let anchors: Vec<usize> = (0..n).map(|_| rng.random_range(0..set.len())).collect();
    let scale = 2.0 * bandwidth * bandwidth;
    let mut logits = vec![0.0; n];
    let mut probs = vec![0.0; n];
    let mut labels = Vec::with_capacity(set.len());
    for p in set.points() {
        for (l, &a) in logits.iter_mut().zip(&anchors) {
            *l = -sq_dist(p, &set.points()[a]) / scale;
        }
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (q, l) in probs.iter_mut().zip(&logits) {
            *q = libm::exp(l - top);
        }
        labels.push(draw_index(&probs, rng).ok_or(Error::NonFinite("similarity weights"))?);
    }
    Ok(labels)
}

/// Median pairwise distance over a uniform subsample of at most 500 points.
/// Falls back to 1.0 when all sampled points coincide.
pub fn median_heuristic_bandwidth<R: Rng + ?Sized>(set: &WeightedPointSet, rng: &mut R) -> Result<f64> {
    if set.len() < 2 {
        return Ok(1.0);
    }
    let picked = rand::seq::index::sample(rng, set.len(), set.len().min(BANDWIDTH_SUBSAMPLE));
    let pts: Vec<&[f64]> = picked.iter().map(|i| &set.points()[i][..]).collect();
    let mut dists = Vec::with_capacity(pts.len() * (pts.len() - 1) / 2);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            dists.push(libm::sqrt(sq_dist(pts[i], pts[j])));
        }
    }
    dists.sort_by(f64::total_cmp);
    let mid = dists.len() / 2;
    let median = if dists.len() % 2 == 0 { (dists[mid - 1] + dists[mid]) / 2.0 } else { dists[mid] };
    Ok(if median > 0.0 { median } else { 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line(n: usize) -> WeightedPointSet {
        WeightedPointSet::unit((0..n).map(|i| Point::new(vec![i as f64]).unwrap()).collect()).unwrap()
    }

    #[test]
    fn uniform_two_sites_is_balanced() {
        let data = line(10_000);
        let mut good = 0;
        for s in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let sites = partition(&data, 2, &PartitionScheme::Uniform, None, &mut rng).unwrap();
            if sites[0].len().abs_diff(5000) <= 300 {
                good += 1;
            }
        }
        assert!(good >= 99, "{good}");
    }

    #[test]
    fn fixed_site_weights_split_proportionally() {
        let data = line(10_000);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sites = partition_by_site_weights(&data, &[1.0, 3.0], &mut rng).unwrap();
        let share = sites[1].len() as f64 / 10_000.0;
        assert!((share - 0.75).abs() <= 0.05, "{share}");
    }

    #[test]
    fn degree_based_hub_share() {
        let g = Topology::star(6).unwrap();
        let data = line(10_000);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sites = partition(&data, 6, &PartitionScheme::DegreeBased, Some(&g), &mut rng).unwrap();
        // hub degree 5 out of total degree 10
        let share = sites[0].len() as f64 / 10_000.0;
        assert!((share - 0.5).abs() <= 0.05, "{share}");
        assert!(partition(&data, 6, &PartitionScheme::DegreeBased, None, &mut rng).is_err());
    }

    #[test]
    fn similarity_partition_is_local() {
        // Two far-apart blobs and a tiny bandwidth: each site takes whole blobs.
        let mut pts = Vec::new();
        for i in 0..50 {
            pts.push(Point::new(vec![i as f64 * 1e-3]).unwrap());
            pts.push(Point::new(vec![100.0 + i as f64 * 1e-3]).unwrap());
        }
        let data = WeightedPointSet::unit(pts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sites = partition(&data, 2, &PartitionScheme::SimilarityBased { bandwidth: 1.0 }, None, &mut rng).unwrap();
        for s in &sites {
            let lo = s.points().iter().filter(|p| p[0] < 50.0).count();
            assert!(lo == 0 || lo == s.len());
        }
    }

    #[test]
    fn every_site_nonempty_and_order_kept() {
        let data = line(40);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sites = partition(&data, 8, &PartitionScheme::Weighted, None, &mut rng).unwrap();
        assert!(sites.iter().all(|s| !s.is_empty()));
        for s in &sites {
            assert!(s.points().windows(2).all(|w| w[0][0] < w[1][0]));
        }
    }

    #[test]
    fn impossible_partition_exhausts_retries() {
        let data = line(1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            partition(&data, 2, &PartitionScheme::Uniform, None, &mut rng),
            Err(Error::RetryExhausted { .. })
        ));
    }

    #[test]
    fn median_bandwidth_of_collinear_triple() {
        let data = WeightedPointSet::unit(vec![
            Point::new(vec![0.0]).unwrap(),
            Point::new(vec![1.0]).unwrap(),
            Point::new(vec![3.0]).unwrap(),
        ])
        .unwrap();
        // pairwise distances 1, 2, 3
        let h = median_heuristic_bandwidth(&data, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(h, 2.0);
    }
}
