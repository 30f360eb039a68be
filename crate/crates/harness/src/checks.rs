//! The oracle table printed by `dcoreset verify`.

use dcoreset_core::coreset::{build_distributed_coreset, local_cost};
use dcoreset_core::network::{flood, gen_topology, CommLedger, CostExchange, FloodExchange, Topology, TopologyParams, Unit};
use dcoreset_core::partition::{partition, PartitionScheme};
use dcoreset_core::solvers::{local_approximation, refine, seed, SolverParams};
use dcoreset_core::verify::{brute_force_optimal, check_coreset, check_tech_bound, check_unbiased};
use dcoreset_core::{cost, Centers, Objective, Point, WeightedPointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::synthetic::{gen_synthetic, SyntheticSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed, detail }
}

fn unit(rows: &[&[f64]]) -> Result<WeightedPointSet> {
    let pts = rows.iter().map(|r| Point::new(r.to_vec())).collect::<Result<Vec<_>, _>>()?;
    Ok(WeightedPointSet::unit(pts)?)
}

/// Runs every check with randomness derived from `master`.
pub fn run_checks(master: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    let params = SolverParams::default();
    let mut out = Vec::new();

    let four = unit(&[&[0.0, 0.0], &[2.0, 0.0], &[10.0, 0.0], &[12.0, 0.0]])?;
    let three = unit(&[&[0.0, 0.0], &[1.0, 0.0], &[5.0, 0.0]])?;
    let a = brute_force_optimal(&four, 2, Objective::KMeans)?;
    let b = brute_force_optimal(&three, 1, Objective::KMedian)?;
    out.push(outcome(
        "brute-force examples",
        (a - 4.0).abs() < 1e-9 && (b - 5.0).abs() < 1e-9,
        format!("k-means 4-point = {a}, k-median collinear triple = {b}"),
    ));

    let mut violations = 0;
    for obj in [Objective::KMeans, Objective::KMedian] {
        for _ in 0..100 {
            let n = rng.random_range(2..=10);
            let pts = (0..n)
                .map(|_| Point::new(vec![rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)]))
                .collect::<Result<Vec<_>, _>>()?;
            let set = WeightedPointSet::unit(pts)?;
            let k = rng.random_range(1..=3);
            let start = seed(&set, k, obj, &mut rng)?;
            let solved = cost(&set, &refine(&set, &start, obj, &params)?, obj)?;
            if brute_force_optimal(&set, k, obj)? > solved * (1.0 + 1e-9) + 1e-12 {
                violations += 1;
            }
        }
    }
    out.push(outcome("oracle dominance", violations == 0, format!("{violations} violations in 200 instances")));

    let tech = check_tech_bound(100_000, &mut rng)?;
    out.push(outcome(
        "geometric bound",
        tech.passed(),
        format!("{} of {} trials met the hypothesis, boundary slack {:.3e}", tech.checked, tech.trials, tech.boundary_slack),
    ));

    for obj in [Objective::KMeans, Objective::KMedian] {
        let pts = (0..50)
            .map(|_| Point::new(vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]))
            .collect::<Result<Vec<_>, _>>()?;
        let set = WeightedPointSet::unit(pts)?;
        let (b, _) = local_approximation(&set, 3, obj, &mut rng, &params)?;
        let x = Centers::new(vec![Point::new(vec![1.0, -1.0])?, Point::new(vec![-2.0, 0.5])?])?;
        let r = check_unbiased(&[set], &[b], &x, 20, obj, 500, &mut rng)?;
        out.push(outcome(
            if obj == Objective::KMeans { "unbiased (k-means)" } else { "unbiased (k-median)" },
            r.passed,
            format!("mean {:.4} vs truth {:.4}, stderr {:.4}", r.mean, r.truth, r.stderr),
        ));
    }

    let graphs = [
        ("ER(10, 0.3)", gen_topology(10, &TopologyParams::Random { p: 0.3 }, &mut rng)?),
        ("grid 3x3", Topology::grid(3, 3)?),
        ("K5", Topology::complete(5)?),
    ];
    let mut flood_ok = true;
    let mut detail = Vec::new();
    for (name, g) in &graphs {
        let sizes: Vec<u64> = (0..g.n()).map(|_| rng.random_range(1..40)).collect();
        let mut ledger = CommLedger::default();
        flood(g, &sizes, Unit::Points, &mut ledger)?;
        let expect = 2 * g.m() as u64 * sizes.iter().sum::<u64>();
        let mut scalars = CommLedger::default();
        FloodExchange(g).exchange(&vec![1.0; g.n()], &mut scalars)?;
        flood_ok &= ledger.point_units == expect && scalars.scalar_units == 2 * (g.m() * g.n()) as u64;
        detail.push(format!("{name}: {} = {expect}", ledger.point_units));
    }
    out.push(outcome("flooding closed form", flood_ok, detail.join("; ")));

    let spec = SyntheticSpec { k_true: 5, dim: 10, per_center: 400, spread: 1.0 };
    let (data, _) = gen_synthetic(&spec, &mut rng)?;
    let sites = partition(&data, 4, &PartitionScheme::Uniform, None, &mut rng)?;
    let g = Topology::complete(4)?;
    let built = build_distributed_coreset(&sites, 5, 2000, Objective::KMeans, &mut rng, &params, &mut FloodExchange(&g))?;
    let core = built.union()?;
    let drift = (core.total_weight() - data.total_weight()).abs() / data.total_weight();
    out.push(outcome("weight conservation", drift <= 1e-6, format!("relative drift {drift:.2e}")));
    let err = check_coreset(&core, &data, Objective::KMeans, 100, 5, &mut rng)?;
    out.push(outcome("coreset quality (t = 2000)", err <= 0.15, format!("max relative error {err:.4}")));
    let costs: f64 = sites
        .iter()
        .zip(&built.local_solutions)
        .map(|(s, b)| local_cost(s, b, Objective::KMeans))
        .sum::<std::result::Result<f64, _>>()?;
    out.push(outcome(
        "plan matches local costs",
        (costs - built.plan.total_cost).abs() <= 1e-9 * costs,
        format!("sum of local costs {costs:.3}"),
    ));
    Ok(out)
}

/// Fixed-width table, one line per check.
pub fn format_table(rows: &[CheckOutcome]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    rows.iter()
        .map(|r| format!("{:<width$}  {}  {}\n", r.name, if r.passed { "PASS" } else { "FAIL" }, r.detail))
        .collect()
}
