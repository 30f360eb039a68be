//! Local constant-approximation solvers on weighted point sets.
//!
//! Seeding is D^e sampling (k-means++ for the k-means objective, the
//! distance-proportional analogue for k-median). Refinement alternates
//! closest-center assignment with a center update: the weighted centroid for
//! k-means and Weiszfeld iterations toward the weighted geometric median for
//! k-median.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::geometry::{cost_unchecked, nearest_sq, sq_dist, Centers, Objective, Point, WeightedPointSet};
use crate::sampling::draw_index;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// Upper bound on assignment/update rounds.
    pub max_iters: usize,
    /// Stop once the relative cost improvement of a round drops below this.
    pub rel_tol: f64,
    /// Weiszfeld steps per k-median center update.
    pub weiszfeld_iters: usize,
    /// Additive guard in the Weiszfeld denominators.
    pub weiszfeld_eps: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams { max_iters: 100, rel_tol: 1e-4, weiszfeld_iters: 50, weiszfeld_eps: 1e-10 }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.weiszfeld_iters == 0 {
            return Err(Error::invalid("solver iteration counts must be positive"));
        }
        if !(self.rel_tol > 0.0) || !(self.weiszfeld_eps > 0.0) {
            return Err(Error::invalid("solver tolerances must be positive"));
        }
        Ok(())
    }
}

fn check_nonnegative(set: &WeightedPointSet) -> Result<()> {
    if set.has_negative_weight() {
        Err(Error::NegativeWeight)
    } else {
        Ok(())
    }
}

/// D^e seeding. Always returns exactly `k` centers drawn from the input; when
/// fewer than `k` distinct positive-weight points exist the last chosen
/// center is repeated.
pub fn seed<R: Rng + ?Sized>(
    set: &WeightedPointSet,
    k: usize,
    obj: Objective,
    rng: &mut R,
) -> Result<Centers> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if set.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_nonnegative(set)?;
    if !(set.total_weight() > 0.0) {
        return Err(Error::ZeroTotalWeight);
    }

    let points = set.points();
    let weights = set.weights();
    let first = draw_index(weights, rng).ok_or(Error::ZeroTotalWeight)?;
    let mut chosen: Vec<Point> = Vec::with_capacity(k);
    chosen.push(points[first].clone());

    let mut min_sq: Vec<f64> = points.iter().map(|p| sq_dist(p, &chosen[0])).collect();
    let mut scores = vec![0.0; points.len()];
    while chosen.len() < k {
        for ((s, &w), &d) in scores.iter_mut().zip(weights).zip(&min_sq) {
            *s = w * obj.cost_from_sq(d);
        }
        let next = match draw_index(&scores, rng) {
            Some(i) => points[i].clone(),
            // every positive-weight point is already a center
            None => chosen[chosen.len() - 1].clone(),
        };
        for (m, p) in min_sq.iter_mut().zip(points) {
            *m = m.min(sq_dist(p, &next));
        }
        chosen.push(next);
    }
    Centers::new(chosen)
}

/// Assigns every point to its closest center and returns the total cost.
fn assign(set: &WeightedPointSet, centers: &[Point], obj: Objective, labels: &mut [usize]) -> f64 {
    let mut total = 0.0;
    for ((p, w), label) in set.iter().zip(labels.iter_mut()) {
        let (i, sq) = nearest_sq(p, centers);
        *label = i;
        total += w * obj.cost_from_sq(sq);
    }
    total
}

/// Weighted centroid of the members of one cluster.
fn centroid(set: &WeightedPointSet, labels: &[usize], cluster: usize, dim: usize) -> Option<Vec<f64>> {
    let mut acc = vec![0.0; dim];
    let mut mass = 0.0;
    for ((p, w), &l) in set.iter().zip(labels) {
        if l == cluster && w > 0.0 {
            for (a, x) in acc.iter_mut().zip(p.iter()) {
                *a += w * x;
            }
            mass += w;
        }
    }
    if mass > 0.0 {
        acc.iter_mut().for_each(|a| *a /= mass);
        Some(acc)
    } else {
        None
    }
}

/// Weiszfeld iterations for the weighted geometric median of one cluster,
/// started from `start`.
fn weiszfeld(
    set: &WeightedPointSet,
    labels: &[usize],
    cluster: usize,
    start: &[f64],
    params: &SolverParams,
) -> Option<Vec<f64>> {
    let members: Vec<(&Point, f64)> = set
        .iter()
        .zip(labels)
        .filter(|((_, w), &l)| l == cluster && *w > 0.0)
        .map(|(pw, _)| pw)
        .collect();
    if members.is_empty() {
        return None;
    }
    let dim = start.len();
    let mut y = start.to_vec();
    let mut num = vec![0.0; dim];
    for _ in 0..params.weiszfeld_iters {
        num.iter_mut().for_each(|v| *v = 0.0);
        let mut den = 0.0;
        for (p, w) in &members {
            let c = w / (libm::sqrt(sq_dist(p, &y)) + params.weiszfeld_eps);
            for (n, x) in num.iter_mut().zip(p.iter()) {
                *n += c * x;
            }
            den += c;
        }
        let next: Vec<f64> = num.iter().map(|n| n / den).collect();
        let step = libm::sqrt(sq_dist(&next, &y));
        let scale = 1.0 + libm::sqrt(y.iter().map(|v| v * v).sum::<f64>());
        y = next;
        if step <= 1e-12 * scale {
            break;
        }
    }
    Some(y)
}

/// One center-update step. Clusters without mass are re-seeded at the point
/// with the largest weighted cost contribution (lowest index on ties).
fn update_centers(
    set: &WeightedPointSet,
    labels: &[usize],
    current: &Centers,
    obj: Objective,
    params: &SolverParams,
) -> Centers {
    let dim = current.dim();
    let mut next = current.clone();
    let mut empty = Vec::new();
    for (j, c) in next.points_mut().iter_mut().enumerate() {
        let updated = match obj {
            Objective::KMeans => centroid(set, labels, j, dim),
            Objective::KMedian => weiszfeld(set, labels, j, c, params),
        };
        match updated {
            Some(coords) if coords.iter().all(|v| v.is_finite()) => *c = Point::from_raw(coords),
            Some(_) => {}
            None => empty.push(j),
        }
    }
    if !empty.is_empty() {
        let mut contrib: Vec<f64> = set
            .iter()
            .zip(labels)
            .map(|((p, w), &l)| w * obj.cost_from_sq(sq_dist(p, &current[l])))
            .collect();
        for j in empty {
            let mut best: Option<(usize, f64)> = None;
            for (i, &v) in contrib.iter().enumerate() {
                if v > 0.0 && best.is_none_or(|(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
            if let Some((i, _)) = best {
                next.points_mut()[j] = set.points()[i].clone();
                contrib[i] = f64::NEG_INFINITY;
            }
        }
    }
    next
}

/// Weighted Lloyd-style refinement; see [`refine_traced`].
pub fn refine(
    set: &WeightedPointSet,
    initial: &Centers,
    obj: Objective,
    params: &SolverParams,
) -> Result<Centers> {
    refine_traced(set, initial, obj, params).map(|(c, _)| c)
}

/// Refinement that also reports the cost after every accepted round,
/// starting with the cost of `initial`. A round whose cost would exceed the
/// previous one is rejected and ends the run, so the trace never increases.
pub fn refine_traced(
    set: &WeightedPointSet,
    initial: &Centers,
    obj: Objective,
    params: &SolverParams,
) -> Result<(Centers, Vec<f64>)> {
    params.validate()?;
    check_nonnegative(set)?;
    if let Some(dim) = set.dim() {
        if dim != initial.dim() {
            return Err(Error::DimensionMismatch { expected: initial.dim(), got: dim });
        }
    }
    let mut centers = initial.clone();
    let mut labels = vec![0; set.len()];
    let mut scratch = vec![0; set.len()];
    let mut current = assign(set, &centers, obj, &mut labels);
    let mut trace = vec![current];

    for _ in 0..params.max_iters {
        if current <= 0.0 {
            break;
        }
        let candidate = update_centers(set, &labels, &centers, obj, params);
        let next = assign(set, &candidate, obj, &mut scratch);
        if next > current {
            break;
        }
        let improvement = (current - next) / current;
        centers = candidate;
        core::mem::swap(&mut labels, &mut scratch);
        current = next;
        trace.push(current);
        if improvement < params.rel_tol {
            break;
        }
    }
    Ok((centers, trace))
}

/// Constant-approximation local solution: seeding followed by refinement.
///
/// Negative-weight entries (which only occur when the input is itself a
/// coreset) are left out of both steps and of the reported cost, so the
/// returned cost is the cost of the positive part and is never negative.
pub fn local_approximation<R: Rng + ?Sized>(
    set: &WeightedPointSet,
    k: usize,
    obj: Objective,
    rng: &mut R,
    params: &SolverParams,
) -> Result<(Centers, f64)> {
    if set.is_empty() {
        return Err(Error::EmptyInput);
    }
    let positive;
    let data = if set.has_negative_weight() {
        positive = set.positive_part();
        &positive
    } else {
        set
    };
    let start = seed(data, k, obj, rng)?;
    let centers = refine(data, &start, obj, params)?;
    let cost = cost_unchecked(data, &centers, obj).max(0.0);
    Ok((centers, cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cost;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pts(coords: &[&[f64]]) -> WeightedPointSet {
        WeightedPointSet::unit(coords.iter().map(|c| Point::new(c.to_vec()).unwrap()).collect()).unwrap()
    }

    fn centers(coords: &[&[f64]]) -> Centers {
        Centers::new(coords.iter().map(|c| Point::new(c.to_vec()).unwrap()).collect()).unwrap()
    }

    #[test]
    fn seed_single_point() {
        let p = pts(&[&[1.0, 2.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = seed(&p, 1, Objective::KMeans, &mut rng).unwrap();
        assert_eq!(c.as_slice(), p.points());
    }

    #[test]
    fn seed_exhausts_distinct_points() {
        let p = pts(&[&[0.0], &[1.0], &[5.0]]);
        for s in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let c = seed(&p, 3, Objective::KMeans, &mut rng).unwrap();
            let mut got: Vec<f64> = c.iter().map(|q| q[0]).collect();
            got.sort_by(f64::total_cmp);
            assert_eq!(got, vec![0.0, 1.0, 5.0]);
        }
    }

    #[test]
    fn seed_pads_by_repetition() {
        let p = pts(&[&[3.0], &[3.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = seed(&p, 4, Objective::KMedian, &mut rng).unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|q| q[0] == 3.0));
    }

    #[test]
    fn seed_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(seed(&WeightedPointSet::empty(), 1, Objective::KMeans, &mut rng), Err(Error::EmptyInput));
        let zero = WeightedPointSet::new(vec![Point::new(vec![1.0]).unwrap()], vec![0.0]).unwrap();
        assert_eq!(seed(&zero, 1, Objective::KMeans, &mut rng), Err(Error::ZeroTotalWeight));
        let neg = WeightedPointSet::new(vec![Point::new(vec![1.0]).unwrap()], vec![-1.0]).unwrap();
        assert_eq!(seed(&neg, 1, Objective::KMeans, &mut rng), Err(Error::NegativeWeight));
        assert!(seed(&pts(&[&[1.0]]), 0, Objective::KMeans, &mut rng).is_err());
    }

    #[test]
    fn refine_centroid_fixed_point() {
        let p = pts(&[&[0.0, 0.0], &[2.0, 0.0]]);
        let out = refine(&p, &centers(&[&[1.0, 0.0]]), Objective::KMeans, &SolverParams::default()).unwrap();
        assert_eq!(out, centers(&[&[1.0, 0.0]]));
    }

    #[test]
    fn refine_two_clusters() {
        let p = pts(&[&[0.0, 0.0], &[2.0, 0.0], &[10.0, 0.0], &[12.0, 0.0]]);
        let x0 = centers(&[&[0.0, 0.0], &[10.0, 0.0]]);
        let out = refine(&p, &x0, Objective::KMeans, &SolverParams::default()).unwrap();
        assert_eq!(out, centers(&[&[1.0, 0.0], &[11.0, 0.0]]));
    }

    #[test]
    fn refine_collinear_median() {
        let p = pts(&[&[0.0, 0.0], &[1.0, 0.0], &[5.0, 0.0]]);
        let x0 = centers(&[&[2.0, 0.0]]);
        let out = refine(&p, &x0, Objective::KMedian, &SolverParams::default()).unwrap();
        assert!(libm::sqrt(sq_dist(&out[0], &[1.0, 0.0])) <= 1e-6, "{:?}", out);
    }

    #[test]
    fn refine_repairs_empty_cluster() {
        let p = pts(&[&[0.0], &[1.0], &[10.0]]);
        // second center attracts nothing
        let x0 = centers(&[&[0.5], &[100.0]]);
        let out = refine(&p, &x0, Objective::KMeans, &SolverParams::default()).unwrap();
        let c = cost(&p, &out, Objective::KMeans).unwrap();
        assert!(c <= 0.5 + 1e-12, "cost {c}");
    }

    #[test]
    fn refine_rejects_negative_weights() {
        let p = WeightedPointSet::new(vec![Point::new(vec![1.0]).unwrap()], vec![-1.0]).unwrap();
        assert_eq!(
            refine(&p, &centers(&[&[0.0]]), Objective::KMeans, &SolverParams::default()),
            Err(Error::NegativeWeight)
        );
    }

    #[test]
    fn local_approximation_examples() {
        let params = SolverParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = pts(&[&[0.0, 0.0], &[4.0, 1.0]]);
        let (b, c) = local_approximation(&p, 2, Objective::KMeans, &mut rng, &params).unwrap();
        assert_eq!(c, 0.0);
        assert_eq!(b.len(), 2);

        let p = pts(&[&[7.0, 7.0][..]; 10]);
        let (_, c) = local_approximation(&p, 1, Objective::KMedian, &mut rng, &params).unwrap();
        assert_eq!(c, 0.0);

        // Optimum over all 2-partitions of these four points is 1.0.
        let p = pts(&[&[0.0, 0.0], &[0.0, 1.0], &[9.0, 0.0], &[9.0, 1.0]]);
        for s in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let (_, c) = local_approximation(&p, 2, Objective::KMeans, &mut rng, &params).unwrap();
            assert!((c - 1.0).abs() <= 1e-9, "seed {s}: {c}");
        }
    }

    #[test]
    fn solver_is_deterministic_in_seed() {
        let p = pts(&[&[0.0], &[1.0], &[3.0], &[8.0], &[9.0], &[20.0]]);
        let run = |s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            local_approximation(&p, 2, Objective::KMedian, &mut rng, &SolverParams::default()).unwrap()
        };
        assert_eq!(run(11), run(11));
    }
}
