//! Distributed coreset construction from local approximate solutions.
//!
//! Round 1: every site solves its own data approximately and the local costs
//! are shared through a [`CostExchange`]. Round 2: every site draws its share
//! `t_i` of the `t` samples, i.i.d. with probability proportional to
//! `m_p = 2 * w(p) * d(p, B_i)^e`, gives each draw the weight
//! `sum_all(m) / (t * m_q)`, and attaches its local centers weighted by the
//! input mass they serve minus the sampled weight that landed in their cell.
//!
//! The center weights make the total coreset weight equal the input weight
//! exactly. The analysis of the sampling step uses `m_p = d(p, B_i)^e`; the
//! factor 2 cancels in both the draw probabilities and the weights.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::geometry::{nearest_sq, Centers, Objective, WeightedPointSet};
use crate::network::{CommLedger, CostExchange, NoExchange};
use crate::sampling::{child_seeds, draw_many, site_rng, SiteRng};
use crate::solvers::{local_approximation, SolverParams};
use crate::{Error, Result};

/// The share of the coreset held by one site: sampled points (positive
/// weights) plus the site's local centers (weights of either sign).
#[derive(Debug, Clone, PartialEq)]
pub struct CoresetPortion {
    pub site_id: usize,
    pub sampled: WeightedPointSet,
    pub centers: WeightedPointSet,
}

impl CoresetPortion {
    /// Number of points this portion puts on the wire.
    pub fn len(&self) -> usize {
        self.sampled.len() + self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn total_weight(&self) -> f64 {
        self.sampled.total_weight() + self.centers.total_weight()
    }

    /// Sampled points followed by centers, as one weighted set.
    pub fn to_point_set(&self) -> Result<WeightedPointSet> {
        let mut out = self.sampled.clone();
        out.extend_from(&self.centers)?;
        Ok(out)
    }
}

/// Union of several portions as one weighted set.
pub fn union(portions: &[CoresetPortion]) -> Result<WeightedPointSet> {
    let mut out = WeightedPointSet::empty();
    for p in portions {
        out.extend_from(&p.sampled)?;
        out.extend_from(&p.centers)?;
    }
    Ok(out)
}

/// Local costs and the resulting per-site sample counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub local_costs: Vec<f64>,
    pub total_cost: f64,
    pub t: usize,
    pub allocation: Vec<usize>,
    /// Every local cost was zero; the local centers alone represent the data.
    pub zero_cost_fallback: bool,
}

impl SamplingPlan {
    pub fn new(local_costs: Vec<f64>, t: usize) -> Result<Self> {
        let (allocation, zero_cost_fallback) = match allocate(&local_costs, t) {
            Ok(a) => (a, false),
            Err(Error::AllLocalCostsZero) => (vec![0; local_costs.len()], true),
            Err(e) => return Err(e),
        };
        Ok(SamplingPlan { total_cost: local_costs.iter().sum(), local_costs, t, allocation, zero_cost_fallback })
    }

    /// Total sampling mass over all sites, `sum_i sum_{z in P_i} m_z`.
    pub fn global_m_sum(&self) -> f64 {
        2.0 * self.total_cost
    }
}

/// `m_p = 2 * w(p) * d(p, B)^e` for every point. Nonpositive weights get
/// `m_p = 0`, so such entries are never sampled.
pub fn sampling_weights(set: &WeightedPointSet, centers: &Centers, obj: Objective) -> Result<Vec<f64>> {
    if let Some(dim) = set.dim() {
        if dim != centers.dim() {
            return Err(Error::DimensionMismatch { expected: centers.dim(), got: dim });
        }
    }
    Ok(set
        .iter()
        .map(|(p, w)| 2.0 * w.max(0.0) * obj.cost_from_sq(nearest_sq(p, centers).1))
        .collect())
}

/// Cost of the positive part of `set` at `centers`; half the sampling mass.
pub fn local_cost(set: &WeightedPointSet, centers: &Centers, obj: Objective) -> Result<f64> {
    Ok(sampling_weights(set, centers, obj)?.iter().sum::<f64>() / 2.0)
}

/// Largest-remainder apportionment of `t` in proportion to `costs`.
///
/// The counts sum to `t`, zero-cost sites get nothing, and remainder ties go
/// to the lowest index.
pub fn allocate(costs: &[f64], t: usize) -> Result<Vec<usize>> {
    if costs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::invalid("local costs must be finite and nonnegative"));
    }
    let total: f64 = costs.iter().sum();
    if total <= 0.0 {
        return Err(Error::AllLocalCostsZero);
    }
    let tf = t as f64;
    let mut counts = Vec::with_capacity(costs.len());
    let mut remainders = Vec::with_capacity(costs.len());
    for (i, &c) in costs.iter().enumerate() {
        let quota = tf * c / total;
        let whole = (libm::floor(quota) as usize).min(t);
        counts.push(whole);
        if c > 0.0 {
            remainders.push((i, quota - whole as f64));
        }
    }
    let assigned: usize = counts.iter().sum();
    let left = t.saturating_sub(assigned);
    remainders.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for &(i, _) in remainders.iter().cycle().take(left) {
        counts[i] += 1;
    }
    debug_assert_eq!(counts.iter().sum::<usize>(), t);
    Ok(counts)
}

/// Round 2 on one site: draw `t_i` samples and weight samples and centers.
///
/// `global_m_sum` is the sampling mass summed over all sites and `t` the
/// global sample count; each draw `q` gets weight `global_m_sum / (t * m_q)`.
/// Centers whose cell received no input point are omitted (their weight is
/// zero).
#[allow(clippy::too_many_arguments)]
pub fn sample_portion<R: Rng + ?Sized>(
    site_id: usize,
    set: &WeightedPointSet,
    centers: &Centers,
    t_i: usize,
    global_m_sum: f64,
    t: usize,
    obj: Objective,
    rng: &mut R,
) -> Result<CoresetPortion> {
    let m = sampling_weights(set, centers, obj)?;
    let local_sum: f64 = m.iter().sum();
    if t_i > 0 && !(local_sum > 0.0) {
        return Err(Error::InconsistentPlan { site: site_id, samples: t_i });
    }
    if t_i > 0 && (t == 0 || !(global_m_sum > 0.0) || !global_m_sum.is_finite()) {
        return Err(Error::invalid("global sampling mass and t must be positive when sampling"));
    }

    let labels: Vec<usize> = set.points().iter().map(|p| nearest_sq(p, centers).0).collect();
    let mut mass = vec![0.0; centers.len()];
    let mut served = vec![false; centers.len()];
    for (&l, &w) in labels.iter().zip(set.weights()) {
        mass[l] += w;
        served[l] = true;
    }

    let draws = draw_many(&m, t_i, rng).ok_or(Error::InconsistentPlan { site: site_id, samples: t_i })?;
    let mut sampled = WeightedPointSet::empty();
    let tf = t as f64;
    for q in draws {
        let w = global_m_sum / (tf * m[q]);
        mass[labels[q]] -= w;
        sampled.push(set.points()[q].clone(), w)?;
    }

    let mut weighted_centers = WeightedPointSet::empty();
    for ((b, w), s) in centers.iter().zip(mass).zip(served) {
        if s {
            weighted_centers.push(b.clone(), w)?;
        }
    }
    Ok(CoresetPortion { site_id, sampled, centers: weighted_centers })
}

/// A site's own coreset of `t` samples, built as if it were alone: local
/// solution on `rng`, then sampling against its own mass.
pub(crate) fn standalone_portion(
    site_id: usize,
    set: &WeightedPointSet,
    k: usize,
    t: usize,
    obj: Objective,
    rng: &mut SiteRng,
    params: &SolverParams,
) -> Result<CoresetPortion> {
    let (b, _) = local_approximation(set, k, obj, rng, params)?;
    let plan = SamplingPlan::new(vec![local_cost(set, &b, obj)?], t)?;
    sample_portion(site_id, set, &b, plan.allocation[0], plan.global_m_sum(), t, obj, rng)
}

/// Output of [`build_distributed_coreset`].
#[derive(Debug, Clone, PartialEq)]
pub struct DistributedCoreset {
    pub portions: Vec<CoresetPortion>,
    pub ledger: CommLedger,
    pub plan: SamplingPlan,
    pub local_solutions: Vec<Centers>,
}

impl DistributedCoreset {
    pub fn union(&self) -> Result<WeightedPointSet> {
        union(&self.portions)
    }

    /// Samples drawn per site (centers excluded).
    pub fn sample_counts(&self) -> Vec<usize> {
        self.portions.iter().map(|p| p.sampled.len()).collect()
    }
}

/// Runs the sampling round for fixed local solutions and a fixed plan.
/// Site `i` draws from `rngs[i]`.
pub fn sampling_round<R: Rng>(
    sites: &[WeightedPointSet],
    local_solutions: &[Centers],
    plan: &SamplingPlan,
    obj: Objective,
    rngs: &mut [R],
) -> Result<Vec<CoresetPortion>> {
    if sites.len() != local_solutions.len() || sites.len() != rngs.len() || sites.len() != plan.allocation.len() {
        return Err(Error::invalid("sites, local solutions, plan and rngs must have equal length"));
    }
    let global = plan.global_m_sum();
    sites
        .iter()
        .zip(local_solutions)
        .zip(&plan.allocation)
        .zip(rngs.iter_mut())
        .enumerate()
        .map(|(i, (((set, b), &t_i), rng))| sample_portion(i, set, b, t_i, global, plan.t, obj, rng))
        .collect()
}

/// Builds a coreset whose portions stay on the sites that own the data.
///
/// One seed per site is drawn from `rng` up front; each site runs both of its
/// rounds on its own stream, so the result does not depend on site order.
/// Local costs are shared through `exchange`, which charges the ledger.
pub fn build_distributed_coreset<R: Rng + ?Sized, C: CostExchange + ?Sized>(
    sites: &[WeightedPointSet],
    k: usize,
    t: usize,
    obj: Objective,
    rng: &mut R,
    params: &SolverParams,
    exchange: &mut C,
) -> Result<DistributedCoreset> {
    if sites.is_empty() {
        return Err(Error::EmptyInput);
    }
    if sites.iter().any(WeightedPointSet::is_empty) {
        return Err(Error::invalid("every site must hold at least one point"));
    }
    let mut rngs: Vec<_> = child_seeds(rng, sites.len()).into_iter().map(site_rng).collect();

    let mut local_solutions = Vec::with_capacity(sites.len());
    let mut costs = Vec::with_capacity(sites.len());
    for (set, site_rng) in sites.iter().zip(rngs.iter_mut()) {
        let (b, _) = local_approximation(set, k, obj, site_rng, params)?;
        costs.push(local_cost(set, &b, obj)?);
        local_solutions.push(b);
    }

    let mut ledger = CommLedger::default();
    let shared = exchange.exchange(&costs, &mut ledger)?;
    let plan = SamplingPlan::new(shared, t)?;
    let portions = sampling_round(sites, &local_solutions, &plan, obj, &mut rngs)?;
    Ok(DistributedCoreset { portions, ledger, plan, local_solutions })
}

/// Single-site sensitivity-sampling coreset on weighted input; identical to
/// the one-site distributed construction under the same seed.
pub fn build_centralized_coreset<R: Rng + ?Sized>(
    set: &WeightedPointSet,
    k: usize,
    t: usize,
    obj: Objective,
    rng: &mut R,
    params: &SolverParams,
) -> Result<CoresetPortion> {
    let built = build_distributed_coreset(core::slice::from_ref(set), k, t, obj, rng, params, &mut NoExchange)?;
    Ok(built.portions.into_iter().next().expect("one site in, one portion out"))
}
