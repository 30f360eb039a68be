//! Comparison methods: COMBINE (union of independent local coresets) and
//! the tree merge of Zhang et al. (every tree node summarizes its own data
//! together with its children's coresets and passes the result up).

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::coreset::{local_cost, sample_portion, standalone_portion, CoresetPortion, SamplingPlan};
use crate::geometry::{Objective, WeightedPointSet};
use crate::network::{CommLedger, RootedTree, Unit};
use crate::sampling::{child_seeds, site_rng};
use crate::solvers::{local_approximation, SolverParams};
use crate::{Error, Result};

/// Equal split of `t_total` over `n` sites, remainder to the lowest indices.
pub fn equal_shares(t_total: usize, n: usize) -> Vec<usize> {
    let (base, rem) = (t_total / n, t_total % n);
    (0..n).map(|i| base + usize::from(i < rem)).collect()
}

/// Every site builds its own coreset with an equal share of `t_total`
/// samples; the union of the portions is the global coreset. Sites whose
/// local cost is zero are already summarized exactly by their centers, so
/// the shares are split over the remaining sites only.
///
/// Site streams are derived from `rng` exactly as in the distributed
/// construction, so under a common seed both methods start from the same
/// local solutions.
pub fn combine<R: Rng + ?Sized>(
    sites: &[WeightedPointSet],
    k: usize,
    t_total: usize,
    obj: Objective,
    rng: &mut R,
    params: &SolverParams,
) -> Result<Vec<CoresetPortion>> {
    if sites.is_empty() {
        return Err(Error::EmptyInput);
    }
    if t_total < sites.len() {
        return Err(Error::invalid("COMBINE needs at least one sample per site"));
    }
    let mut rngs: Vec<_> = child_seeds(rng, sites.len()).into_iter().map(site_rng).collect();
    let mut solved = Vec::with_capacity(sites.len());
    for (set, r) in sites.iter().zip(rngs.iter_mut()) {
        let (b, _) = local_approximation(set, k, obj, r, params)?;
        let c = local_cost(set, &b, obj)?;
        solved.push((b, c));
    }
    let active = solved.iter().filter(|(_, c)| *c > 0.0).count();
    let mut shares = equal_shares(t_total, active.max(1)).into_iter();
    sites
        .iter()
        .zip(solved)
        .zip(rngs.iter_mut())
        .enumerate()
        .map(|(i, ((set, (b, c)), r))| {
            let share = if c > 0.0 { shares.next().unwrap_or(0) } else { 0 };
            let plan = SamplingPlan::new(vec![c], share)?;
            sample_portion(i, set, &b, plan.allocation[0], plan.global_m_sum(), share, obj, r)
        })
        .collect()
}

/// Tree merge in post-order. Each node unions its raw data with the
/// coresets received from its children, builds a coreset of `t_node`
/// samples on that weighted union, and sends it to its parent (one hop,
/// charged as point-units). Returns the root's coreset.
///
/// Child coresets can carry negative center weights. Those entries cannot be
/// sampled but stay in the union, so their mass lands on the center that
/// serves them and every merge conserves total weight.
#[allow(clippy::too_many_arguments)]
pub fn zhang_tree_merge<R: Rng + ?Sized>(
    tree: &RootedTree,
    sites: &[WeightedPointSet],
    k: usize,
    t_node: usize,
    obj: Objective,
    rng: &mut R,
    params: &SolverParams,
    ledger: &mut CommLedger,
) -> Result<CoresetPortion> {
    if sites.len() != tree.n() {
        return Err(Error::invalid("one dataset per tree node required"));
    }
    if t_node == 0 {
        return Err(Error::invalid("t_node must be at least 1"));
    }
    let seeds = child_seeds(rng, sites.len());
    let mut inbox: Vec<WeightedPointSet> = sites.to_vec();
    for node in tree.post_order() {
        let merged = core::mem::take(&mut inbox[node]);
        let portion = standalone_portion(node, &merged, k, t_node, obj, &mut site_rng(seeds[node]), params)?;
        match tree.parent(node) {
            Some(parent) => {
                ledger.charge(node, parent, Unit::Points, portion.len() as u64);
                let summary = portion.to_point_set()?;
                for (p, w) in summary.iter() {
                    if w != 0.0 {
                        inbox[parent].push(p.clone(), w)?;
                    }
                }
            }
            None => return Ok(portion),
        }
    }
    unreachable!("post-order always ends at the root")
}
