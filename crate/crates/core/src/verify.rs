//! Executable oracles: empirical coreset error, exact optima on tiny inputs,
//! an unbiasedness check for the sampling round, and a randomized check of
//! the geometric bound used in the k-means analysis.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::coreset::{local_cost, sampling_round, SamplingPlan};
use crate::geometry::{cost_unchecked, nearest_sq, sq_dist, Centers, Objective, Point, WeightedPointSet};
use crate::sampling::{child_seeds, site_rng};
use crate::{Error, Result};

/// Largest input accepted by [`brute_force_optimal`].
pub const BRUTE_FORCE_LIMIT: usize = 12;

const DEGENERATE_COST: f64 = 1e-12;
const MEDIAN_ITERS: usize = 200;
const MEDIAN_STEP_TOL: f64 = 1e-12;

/// Largest relative cost error of `coreset` against `data` over a random
/// family of `num_center_sets` candidate solutions of size `k`.
///
/// The first half of the candidates are `k` points drawn from `data`, the
/// second half the same draws moved by Gaussian noise with the average
/// per-coordinate standard deviation of `data`. Candidates on which the true
/// cost is (numerically) zero are skipped.
pub fn check_coreset<R: Rng + ?Sized>(
    coreset: &WeightedPointSet,
    data: &WeightedPointSet,
    obj: Objective,
    num_center_sets: usize,
    k: usize,
    rng: &mut R,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    if k == 0 || num_center_sets == 0 {
        return Err(Error::invalid("k and the number of candidate sets must be positive"));
    }
    let dim = data.dim().expect("nonempty");
    if let Some(cd) = coreset.dim() {
        if cd != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: cd });
        }
    }
    let spread = coordinate_std(data);

    let drawn = num_center_sets.div_ceil(2);
    let mut candidates: Vec<Vec<Point>> = Vec::with_capacity(num_center_sets);
    for _ in 0..drawn {
        candidates.push((0..k).map(|_| data.points()[rng.random_range(0..data.len())].clone()).collect());
    }
    for i in 0..num_center_sets - drawn {
        let moved = candidates[i]
            .iter()
            .map(|c| Point::from_raw(c.iter().map(|v| v + spread * rng.sample::<f64, _>(StandardNormal)).collect()))
            .collect();
        candidates.push(moved);
    }

    let mut worst: Option<f64> = None;
    for x in &candidates {
        let truth = cost_unchecked(data, x, obj);
        if truth < DEGENERATE_COST {
            continue;
        }
        let err = libm::fabs(cost_unchecked(coreset, x, obj) - truth) / truth;
        worst = Some(worst.map_or(err, |w| w.max(err)));
    }
    worst.ok_or(Error::AllCandidatesDegenerate)
}

fn coordinate_std(data: &WeightedPointSet) -> f64 {
    let dim = data.dim().unwrap_or(0);
    let n = data.len() as f64;
    let mut mean = vec![0.0; dim];
    for p in data.points() {
        mean.iter_mut().zip(p.iter()).for_each(|(m, v)| *m += v / n);
    }
    let var = data.points().iter().map(|p| sq_dist(p, &mean)).sum::<f64>() / (n * dim as f64);
    libm::sqrt(var)
}

/// Exact optimum of a weighted clustering instance with at most
/// [`BRUTE_FORCE_LIMIT`] points, over every split into at most `k` groups.
///
/// Per group the optimal center is the weighted centroid (k-means) or the
/// weighted geometric median (k-median). The median is found by Weiszfeld
/// iteration and compared against every input point of the group, which also
/// covers the collinear case where the optimum sits on a data point.
pub fn brute_force_optimal(set: &WeightedPointSet, k: usize, obj: Objective) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptyInput);
    }
    if set.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { limit: BRUTE_FORCE_LIMIT, got: set.len() });
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if set.has_negative_weight() {
        return Err(Error::NegativeWeight);
    }
    let n = set.len();
    let full = (1usize << n) - 1;

    let mut group = vec![0.0; full + 1];
    let mut members = Vec::with_capacity(n);
    for (mask, slot) in group.iter_mut().enumerate().skip(1) {
        members.clear();
        members.extend((0..n).filter(|i| mask >> i & 1 == 1));
        *slot = group_cost(set, &members, obj);
    }

    // After round j, best[mask] is the optimum over splits of `mask` into at
    // most j + 1 groups. The group holding the lowest member is enumerated
    // explicitly.
    let mut best = group.clone();
    for _ in 1..k.min(n) {
        let prev = best.clone();
        for mask in 1..=full {
            let low = mask & mask.wrapping_neg();
            let rest = mask ^ low;
            let mut sub = rest;
            loop {
                let first = sub | low;
                if first != mask {
                    let v = group[first] + prev[mask ^ first];
                    if v < best[mask] {
                        best[mask] = v;
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
    }
    Ok(best[full])
}

fn group_cost(set: &WeightedPointSet, members: &[usize], obj: Objective) -> f64 {
    let pts = set.points();
    let w = set.weights();
    let dim = pts[members[0]].dim();
    let total: f64 = members.iter().map(|&i| w[i]).sum();
    let at = |c: &[f64]| -> f64 { members.iter().map(|&i| w[i] * obj.cost_from_sq(sq_dist(&pts[i], c))).sum() };

    let mut centroid = vec![0.0; dim];
    if total > 0.0 {
        for &i in members {
            centroid.iter_mut().zip(pts[i].iter()).for_each(|(c, v)| *c += w[i] * v / total);
        }
    } else {
        centroid.copy_from_slice(&pts[members[0]]);
    }
    match obj {
        Objective::KMeans => at(&centroid),
        Objective::KMedian => {
            let y = weiszfeld(pts, w, members, centroid);
            members.iter().map(|&i| at(&pts[i])).fold(at(&y), f64::min)
        }
    }
}

fn weiszfeld(pts: &[Point], w: &[f64], members: &[usize], mut y: Vec<f64>) -> Vec<f64> {
    let mut next = vec![0.0; y.len()];
    for _ in 0..MEDIAN_ITERS {
        next.iter_mut().for_each(|v| *v = 0.0);
        let mut denom = 0.0;
        for &i in members {
            let d = libm::sqrt(sq_dist(&pts[i], &y));
            if d == 0.0 || w[i] == 0.0 {
                continue;
            }
            let c = w[i] / d;
            denom += c;
            next.iter_mut().zip(pts[i].iter()).for_each(|(n, v)| *n += c * v);
        }
        if denom == 0.0 {
            break;
        }
        next.iter_mut().for_each(|v| *v /= denom);
        let step = libm::sqrt(sq_dist(&next, &y));
        core::mem::swap(&mut y, &mut next);
        if step <= MEDIAN_STEP_TOL {
            break;
        }
    }
    y
}

/// Outcome of [`check_unbiased`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnbiasedReport {
    pub mean: f64,
    pub stderr: f64,
    /// Cost of the input at the probe centers.
    pub truth: f64,
    pub reps: usize,
    pub passed: bool,
}

/// Repeats the sampling round `reps` times with fresh randomness, holding the
/// local solutions fixed, and compares the mean coreset cost at `x` with the
/// true cost. Passes when the gap is within three standard errors (or within
/// rounding of zero when the coreset is deterministic).
#[allow(clippy::too_many_arguments)]
pub fn check_unbiased<R: Rng + ?Sized>(
    sites: &[WeightedPointSet],
    local_solutions: &[Centers],
    x: &Centers,
    t: usize,
    obj: Objective,
    reps: usize,
    rng: &mut R,
) -> Result<UnbiasedReport> {
    if reps < 2 {
        return Err(Error::invalid("at least two repetitions are needed for a standard error"));
    }
    if sites.len() != local_solutions.len() {
        return Err(Error::invalid("one local solution per site required"));
    }
    let costs = sites
        .iter()
        .zip(local_solutions)
        .map(|(s, b)| local_cost(s, b, obj))
        .collect::<Result<Vec<_>>>()?;
    let plan = SamplingPlan::new(costs, t)?;
    let truth: f64 = sites.iter().map(|s| cost_unchecked(s, x, obj)).sum();

    let mut values = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut rngs: Vec<_> = child_seeds(rng, sites.len()).into_iter().map(site_rng).collect();
        let portions = sampling_round(sites, local_solutions, &plan, obj, &mut rngs)?;
        let v: f64 = portions
            .iter()
            .map(|p| cost_unchecked(&p.sampled, x, obj) + cost_unchecked(&p.centers, x, obj))
            .sum();
        values.push(v);
    }
    let r = reps as f64;
    let mean = values.iter().sum::<f64>() / r;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0);
    let stderr = libm::sqrt(var / r);
    let gap = libm::fabs(mean - truth);
    let passed = gap <= 3.0 * stderr || gap <= 1e-9 * truth.max(1.0);
    Ok(UnbiasedReport { mean, stderr, truth, reps, passed })
}

/// One evaluation of the bound relating `|d(p,X)^2 - d(b,X)^2|` to
/// `min(d(p,X)^2, d(b,X)^2)` when `p` and `b` are close compared to `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct TechBoundCase {
    pub p: Vec<f64>,
    pub b: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub eps: f64,
    /// `d(p,b)^2 / eps <= |d(p,X)^2 - d(b,X)^2|`.
    pub hypothesis: bool,
    /// `|d(p,X)^2 - d(b,X)^2|`.
    pub gap: f64,
    /// `8 * eps * min(d(p,X)^2, d(b,X)^2)`.
    pub bound: f64,
}

impl TechBoundCase {
    pub fn evaluate(p: &[f64], b: &[f64], x: &[Point], eps: f64) -> Result<Self> {
        let Some(first) = x.first() else {
            return Err(Error::EmptyCenters);
        };
        if p.len() != b.len() || p.len() != first.dim() {
            return Err(Error::DimensionMismatch { expected: p.len(), got: first.dim().min(b.len()) });
        }
        if !(eps > 0.0) {
            return Err(Error::invalid("eps must be positive"));
        }
        let dp = nearest_sq(p, x).1;
        let db = nearest_sq(b, x).1;
        let gap = libm::fabs(dp - db);
        Ok(TechBoundCase {
            p: p.to_vec(),
            b: b.to_vec(),
            x: x.iter().map(|c| c.to_vec()).collect(),
            eps,
            hypothesis: sq_dist(p, b) / eps <= gap,
            gap,
            bound: 8.0 * eps * dp.min(db),
        })
    }

    pub fn conclusion_holds(&self) -> bool {
        self.gap <= self.bound
    }
}

/// Outcome of [`check_tech_bound`].
#[derive(Debug, Clone, PartialEq)]
pub struct TechBoundReport {
    pub trials: usize,
    /// Trials in which the hypothesis held and the conclusion was checked.
    pub checked: usize,
    /// First trial whose conclusion failed, if any.
    pub violation: Option<TechBoundCase>,
    /// `bound - gap` on the hand-built case where `d(p,b)` equals
    /// `eps * (d(p,X) + d(b,X))`.
    pub boundary_slack: f64,
}

impl TechBoundReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none() && self.boundary_slack >= 0.0
    }
}

/// Random trials in R^3 with `eps` in (0, 0.05]. Every trial places `b` at a
/// random distance of up to `2 * eps * d(p, X)` from `p`, so a sizeable share
/// of trials meets the hypothesis.
pub fn check_tech_bound<R: Rng + ?Sized>(trials: usize, rng: &mut R) -> Result<TechBoundReport> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    const DIM: usize = 3;
    let gauss = |rng: &mut R, scale: f64| -> Vec<f64> {
        (0..DIM).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
    };
    let mut checked = 0;
    let mut violation = None;
    for _ in 0..trials {
        let eps = 0.05 * (1.0 - rng.random::<f64>());
        let size = rng.random_range(1..=4);
        let x: Vec<Point> = (0..size).map(|_| Point::from_raw(gauss(rng, 10.0))).collect();
        let p = gauss(rng, 10.0);
        let reach = libm::sqrt(nearest_sq(&p, &x).1) * 2.0 * eps * rng.random::<f64>();
        let dir = gauss(rng, 1.0);
        let norm = libm::sqrt(dir.iter().map(|v| v * v).sum::<f64>()).max(f64::MIN_POSITIVE);
        let b: Vec<f64> = p.iter().zip(&dir).map(|(a, u)| a + reach * u / norm).collect();

        let case = TechBoundCase::evaluate(&p, &b, &x, eps)?;
        if case.hypothesis {
            checked += 1;
            if !case.conclusion_holds() && violation.is_none() {
                violation = Some(case);
            }
        }
    }
    let edge = boundary_case(0.05, 1.0)?;
    Ok(TechBoundReport { trials, checked, violation, boundary_slack: edge.bound - edge.gap })
}

/// X = {0} on the line, p = a, b = a + delta with
/// `delta = eps * (d(p,X) + d(b,X))`.
pub fn boundary_case(eps: f64, a: f64) -> Result<TechBoundCase> {
    let delta = 2.0 * eps * a / (1.0 - eps);
    TechBoundCase::evaluate(&[a], &[a + delta], &[Point::new(vec![0.0])?], eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coreset::sample_portion;
    use crate::solvers::{local_approximation, SolverParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(rows: &[&[f64]]) -> WeightedPointSet {
        WeightedPointSet::unit(rows.iter().map(|r| Point::new(r.to_vec()).unwrap()).collect()).unwrap()
    }

    fn centers(rows: &[&[f64]]) -> Centers {
        Centers::new(rows.iter().map(|r| Point::new(r.to_vec()).unwrap()).collect()).unwrap()
    }

    fn cloud(n: usize, seed: u64) -> WeightedPointSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..n)
            .map(|_| Point::new((0..2).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).unwrap())
            .collect();
        WeightedPointSet::unit(pts).unwrap()
    }

    #[test]
    fn data_as_its_own_coreset_has_zero_error() {
        let p = cloud(60, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(check_coreset(&p, &p, Objective::KMeans, 20, 3, &mut rng).unwrap(), 0.0);
    }

    #[test]
    fn perturbed_weight_is_detected() {
        let p = set(&[&[0.0], &[1.0]]);
        let mut doubled = p.clone();
        doubled.weights_mut()[1] = 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(check_coreset(&doubled, &p, Objective::KMeans, 10, 1, &mut rng).unwrap() > 0.0);
    }

    #[test]
    fn all_degenerate_candidates_error() {
        let p = set(&[&[1.0, 1.0][..]; 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // zero spread: perturbed candidates coincide with the data too
        assert_eq!(check_coreset(&p, &p, Objective::KMeans, 6, 1, &mut rng), Err(Error::AllCandidatesDegenerate));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_optimal(&set(&[&[0.0, 0.0], &[5.0, 1.0]]), 2, Objective::KMeans).unwrap(), 0.0);
        let four = set(&[&[0.0, 0.0], &[2.0, 0.0], &[10.0, 0.0], &[12.0, 0.0]]);
        assert!((brute_force_optimal(&four, 2, Objective::KMeans).unwrap() - 4.0).abs() < 1e-12);
        let three = set(&[&[0.0, 0.0], &[1.0, 0.0], &[5.0, 0.0]]);
        assert!((brute_force_optimal(&three, 1, Objective::KMedian).unwrap() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn brute_force_rejects_large_or_negative_input() {
        assert!(matches!(brute_force_optimal(&cloud(13, 0), 2, Objective::KMeans), Err(Error::TooLarge { .. })));
        let mut s = cloud(3, 0);
        s.weights_mut()[0] = -1.0;
        assert_eq!(brute_force_optimal(&s, 2, Objective::KMeans), Err(Error::NegativeWeight));
    }

    #[test]
    fn brute_force_triangle_median() {
        // Equilateral triangle: the median is the centroid, cost 3 * circumradius.
        let h = libm::sqrt(3.0) / 2.0;
        let tri = set(&[&[0.0, 0.0], &[1.0, 0.0], &[0.5, h]]);
        let r = 1.0 / libm::sqrt(3.0);
        assert!((brute_force_optimal(&tri, 1, Objective::KMedian).unwrap() - 3.0 * r).abs() < 1e-9);
    }

    #[test]
    fn unbiased_zero_samples_is_exact() {
        let p = cloud(30, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (b, _) = local_approximation(&p, 3, Objective::KMeans, &mut rng, &SolverParams::default()).unwrap();
        let x = centers(&[&[0.5, 0.5], &[-1.0, 2.0]]);
        let r = check_unbiased(core::slice::from_ref(&p), core::slice::from_ref(&b), &x, 0, Objective::KMeans, 10, &mut rng).unwrap();
        assert!(r.stderr < 1e-12);
        let only = sample_portion(0, &p, &b, 0, 0.0, 0, Objective::KMeans, &mut rng).unwrap();
        assert!(only.sampled.is_empty());
        assert!((r.mean - cost_unchecked(&only.centers, &x, Objective::KMeans)).abs() < 1e-9);
    }

    #[test]
    fn unbiased_single_point() {
        let p = set(&[&[3.0, 4.0]]);
        let b = centers(&[&[0.0, 0.0]]);
        let x = centers(&[&[1.0, 1.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = check_unbiased(&[p], &[b], &x, 5, Objective::KMedian, 20, &mut rng).unwrap();
        assert!((r.mean - r.truth).abs() < 1e-9, "{r:?}");
        assert!(r.passed);
    }

    #[test]
    fn unbiased_fifty_points() {
        for obj in [Objective::KMeans, Objective::KMedian] {
            let p = cloud(50, 9);
            let mut rng = ChaCha8Rng::seed_from_u64(10);
            let (b, _) = local_approximation(&p, 3, obj, &mut rng, &SolverParams::default()).unwrap();
            let x = centers(&[&[1.0, 0.0], &[-1.0, 1.0]]);
            let r = check_unbiased(&[p], &[b], &x, 20, obj, 500, &mut rng).unwrap();
            assert!(r.passed, "{obj:?} {r:?}");
        }
    }

    #[test]
    fn tech_bound_coincident_points() {
        let x = [Point::new(vec![1.0, 2.0, 3.0]).unwrap()];
        let c = TechBoundCase::evaluate(&[0.0; 3], &[0.0; 3], &x, 0.01).unwrap();
        assert!(c.hypothesis && c.conclusion_holds());
    }

    #[test]
    fn tech_bound_boundary_has_slack() {
        let c = boundary_case(0.05, 1.0).unwrap();
        let d_pb = (c.b[0] - c.p[0]).abs();
        assert!((d_pb - 0.05 * (c.p[0] + c.b[0])).abs() < 1e-12);
        assert!(c.conclusion_holds());
        assert!(c.bound - c.gap > 0.1 * c.bound);
    }

    #[test]
    fn tech_bound_random_trials() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = check_tech_bound(20_000, &mut rng).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.checked > 1000, "{}", r.checked);
    }
}
