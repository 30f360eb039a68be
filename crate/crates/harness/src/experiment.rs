//! Experiment orchestration: per repetition, build the network and the
//! partition, run the chosen method, charge its traffic and score the
//! resulting coreset against the full data.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use dcoreset_core::baselines::{combine, zhang_tree_merge};
use dcoreset_core::coreset::{build_distributed_coreset, union, CoresetPortion};
use dcoreset_core::network::{
    flood, gen_topology, spanning_tree, tree_upcast, CommLedger, FloodExchange, RootedTree, Topology, TopologyParams,
    TreeExchange, Unit,
};
use dcoreset_core::partition::{median_heuristic_bandwidth, partition, PartitionScheme};
use dcoreset_core::solvers::{refine, seed, SolverParams};
use dcoreset_core::{cost, Centers, Objective, WeightedPointSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{CommMode, ExperimentConfig, Method, PartitionChoice, TopologyChoice};
use crate::error::{io_err, HarnessError, Result};
use crate::io::{load_dataset, read_edge_list};
use crate::synthetic::gen_synthetic;

pub const CSV_COLUMNS: [&str; 11] = [
    "method", "objective", "k", "topology", "partition", "t", "rep", "point_units", "scalar_units", "cost_ratio", "status",
];

/// Independent random streams derived from the master seed.
#[derive(Debug, Clone, Copy)]
enum Stream {
    Data,
    Setup,
    Build,
    Global,
    Coreset,
}

/// Generator for `stream` of the master `seed`, keyed by repetition and
/// sweep index. Streams never overlap, so the output is independent of the
/// order in which repetitions run.
fn stream_rng(seed: u64, stream: Stream, rep: usize, sweep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 56) | ((sweep as u64) << 28) | rep as u64);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: Method,
    pub objective: Objective,
    pub k: usize,
    pub topology: String,
    pub partition: String,
    pub t: usize,
    pub rep: usize,
    pub point_units: u64,
    pub scalar_units: u64,
    /// `None` when the row failed.
    pub cost_ratio: Option<f64>,
    /// `ok`, or the error that stopped this row.
    pub status: String,
    /// Not persisted, so that result files are reproducible byte for byte.
    pub wall_time: Duration,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// The global dataset plus everything derived from it once per run.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub points: WeightedPointSet,
    /// Generating centers, for synthetic data.
    pub true_centers: Option<Centers>,
    /// Kernel width used by the similarity partition (if that scheme runs).
    pub bandwidth: Option<f64>,
}

pub fn prepare_data(cfg: &ExperimentConfig) -> Result<Dataset> {
    let seed = cfg.seed.ok_or_else(|| HarnessError::InvalidConfig("a seed is required".into()))?;
    let mut rng = stream_rng(seed, Stream::Data, 0, 0);
    let (points, true_centers) = match &cfg.data {
        Some(path) => (load_dataset(path)?, None),
        None => {
            let (p, c) = gen_synthetic(&cfg.synthetic, &mut rng)?;
            (p, Some(c))
        }
    };
    let bandwidth = match cfg.partition {
        PartitionChoice::Similarity => Some(match cfg.bandwidth {
            Some(b) => b,
            None => median_heuristic_bandwidth(&points, &mut rng)?,
        }),
        _ => None,
    };
    Ok(Dataset { points, true_centers, bandwidth })
}

/// Network, tree and site datasets of one repetition. Every method and
/// every sweep value of the repetition sees the same setup.
#[derive(Debug, Clone)]
pub struct RepSetup {
    pub topology: Topology,
    pub tree: Option<RootedTree>,
    pub sites: Vec<WeightedPointSet>,
}

pub fn setup_repetition(cfg: &ExperimentConfig, data: &Dataset, rep: usize) -> Result<RepSetup> {
    let seed = cfg.seed.ok_or_else(|| HarnessError::InvalidConfig("a seed is required".into()))?;
    let mut rng = stream_rng(seed, Stream::Setup, rep, 0);
    let topology = match cfg.topology {
        TopologyChoice::Random => gen_topology(cfg.sites, &TopologyParams::Random { p: cfg.edge_p }, &mut rng)?,
        TopologyChoice::Grid => {
            gen_topology(cfg.rows * cfg.cols, &TopologyParams::Grid { rows: cfg.rows, cols: cfg.cols }, &mut rng)?
        }
        TopologyChoice::Preferential => {
            gen_topology(cfg.sites, &TopologyParams::Preferential { attach: cfg.attach }, &mut rng)?
        }
        TopologyChoice::File => read_edge_list(cfg.topology_file.as_ref().expect("validated"))?,
    };
    let tree = match cfg.mode {
        CommMode::TreeUpcast => Some(spanning_tree(&topology, &mut rng)?),
        CommMode::GraphFlood => None,
    };
    let scheme = match cfg.partition {
        PartitionChoice::Uniform => PartitionScheme::Uniform,
        PartitionChoice::Weighted => PartitionScheme::Weighted,
        PartitionChoice::Degree => PartitionScheme::DegreeBased,
        PartitionChoice::Similarity => {
            PartitionScheme::SimilarityBased { bandwidth: data.bandwidth.expect("set for similarity partitions") }
        }
    };
    let sites = partition(&data.points, topology.n(), &scheme, Some(&topology), &mut rng)?;
    Ok(RepSetup { topology, tree, sites })
}

/// Coreset of one method at sweep value `value`, with the traffic it took to
/// make the coreset available (all portions at every site for graph
/// flooding, everything at the root for tree modes).
pub fn run_method(
    cfg: &ExperimentConfig,
    setup: &RepSetup,
    value: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(WeightedPointSet, CommLedger)> {
    let mut ledger = CommLedger::default();
    let (k, obj, params) = (cfg.k, cfg.objective, &cfg.solver);
    let portions: Vec<CoresetPortion> = match cfg.method {
        Method::Distributed => match (&cfg.mode, &setup.tree) {
            (CommMode::GraphFlood, _) => {
                let mut exchange = FloodExchange(&setup.topology);
                let built = build_distributed_coreset(&setup.sites, k, value, obj, rng, params, &mut exchange)?;
                ledger.absorb(&built.ledger);
                built.portions
            }
            (CommMode::TreeUpcast, Some(tree)) => {
                let mut exchange = TreeExchange(tree);
                let built = build_distributed_coreset(&setup.sites, k, value, obj, rng, params, &mut exchange)?;
                ledger.absorb(&built.ledger);
                built.portions
            }
            (CommMode::TreeUpcast, None) => unreachable!("tree built for tree mode"),
        },
        Method::Combine => combine(&setup.sites, k, value, obj, rng, params)?,
        Method::Zhang => {
            let tree = setup.tree.as_ref().ok_or_else(|| HarnessError::InvalidConfig("zhang needs tree mode".into()))?;
            let root = zhang_tree_merge(tree, &setup.sites, k, value, obj, rng, params, &mut ledger)?;
            return Ok((root.to_point_set()?, ledger));
        }
    };
    let sizes: Vec<u64> = portions.iter().map(|p| p.len() as u64).collect();
    match (&cfg.mode, &setup.tree) {
        (CommMode::GraphFlood, _) => {
            flood(&setup.topology, &sizes, Unit::Points, &mut ledger)?;
        }
        (CommMode::TreeUpcast, Some(tree)) => {
            tree_upcast(tree, &sizes, Unit::Points, &mut ledger)?;
        }
        (CommMode::TreeUpcast, None) => unreachable!("tree built for tree mode"),
    }
    Ok((union(&portions)?, ledger))
}

/// Solution computed on the data: seeding followed by refinement.
pub fn solve(set: &WeightedPointSet, k: usize, obj: Objective, rng: &mut ChaCha8Rng, params: &SolverParams) -> Result<Centers> {
    let start = seed(set, k, obj, rng)?;
    Ok(refine(set, &start, obj, params)?)
}

/// Solution computed on a signed coreset. Seeding and refinement only see
/// the positive-weight entries.
pub fn solve_on_coreset(
    coreset: &WeightedPointSet,
    k: usize,
    obj: Objective,
    rng: &mut ChaCha8Rng,
    params: &SolverParams,
) -> Result<Centers> {
    let positive = coreset.positive_part();
    if positive.is_empty() || !(coreset.total_weight() > 0.0) {
        return Err(HarnessError::Core(dcoreset_core::Error::ZeroTotalWeight));
    }
    solve(&positive, k, obj, rng, params)
}

/// `cost(P, X_c) / cost(P, X_g)` where `X_c` is solved on the coreset and
/// `X_g` on `data`, both with the same solver.
pub fn evaluate(
    coreset: &WeightedPointSet,
    data: &WeightedPointSet,
    k: usize,
    obj: Objective,
    rng: &mut ChaCha8Rng,
    params: &SolverParams,
) -> Result<f64> {
    let xc = solve_on_coreset(coreset, k, obj, rng, params)?;
    let xg = solve(data, k, obj, rng, params)?;
    ratio(cost(data, &xc, obj)?, cost(data, &xg, obj)?)
}

fn ratio(num: f64, den: f64) -> Result<f64> {
    if den > 0.0 {
        Ok(num / den)
    } else if num <= 0.0 {
        Ok(1.0)
    } else {
        Err(HarnessError::Evaluation("global solution has zero cost".into()))
    }
}

fn run_repetition(cfg: &ExperimentConfig, data: &Dataset, rep: usize) -> Vec<ResultRow> {
    let seed = cfg.seed.expect("checked by run_experiment");
    let setup = setup_repetition(cfg, data, rep);
    let topology = match &setup {
        Ok(s) => s.topology.kind().name().to_string(),
        Err(_) => cfg.topology.name().to_string(),
    };
    let global = setup.as_ref().map_err(|e| e.to_string()).and_then(|_| {
        let mut rng = stream_rng(seed, Stream::Global, rep, 0);
        let xg = solve(&data.points, cfg.k, cfg.objective, &mut rng, &cfg.solver).map_err(|e| e.to_string())?;
        cost(&data.points, &xg, cfg.objective).map_err(|e| e.to_string())
    });

    cfg.sweep
        .iter()
        .enumerate()
        .map(|(si, &value)| {
            let started = Instant::now();
            let mut row = ResultRow {
                method: cfg.method,
                objective: cfg.objective,
                k: cfg.k,
                topology: topology.clone(),
                partition: cfg.partition.name().to_string(),
                t: value,
                rep,
                point_units: 0,
                scalar_units: 0,
                cost_ratio: None,
                status: String::new(),
                wall_time: Duration::ZERO,
            };
            let outcome = match (&setup, &global) {
                (Ok(setup), Ok(global_cost)) => {
                    let mut build_rng = stream_rng(seed, Stream::Build, rep, 0);
                    run_method(cfg, setup, value, &mut build_rng).and_then(|(coreset, ledger)| {
                        row.point_units = ledger.point_units;
                        row.scalar_units = ledger.scalar_units;
                        let mut rng = stream_rng(seed, Stream::Coreset, rep, si);
                        let xc = solve_on_coreset(&coreset, cfg.k, cfg.objective, &mut rng, &cfg.solver)?;
                        ratio(cost(&data.points, &xc, cfg.objective)?, *global_cost)
                    })
                }
                (Err(e), _) => Err(HarnessError::Evaluation(format!("setup failed: {e}"))),
                (_, Err(e)) => Err(HarnessError::Evaluation(format!("global solve failed: {e}"))),
            };
            match outcome {
                Ok(r) => {
                    row.cost_ratio = Some(r);
                    row.status = "ok".into();
                }
                Err(e) => row.status = format!("error: {e}"),
            }
            row.wall_time = started.elapsed();
            row
        })
        .collect()
}

/// Runs every sweep value for every repetition. Repetitions run in parallel;
/// rows come back ordered by (sweep index, repetition). A failing stage
/// marks its row and the run continues.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    if cfg.seed.is_none() {
        return Err(HarnessError::InvalidConfig("a seed is required".into()));
    }
    let data = prepare_data(cfg)?;
    run_on(cfg, &data)
}

/// [`run_experiment`] on an already prepared dataset.
pub fn run_on(cfg: &ExperimentConfig, data: &Dataset) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    if cfg.seed.is_none() {
        return Err(HarnessError::InvalidConfig("a seed is required".into()));
    }
    let per_rep: Vec<Vec<ResultRow>> =
        (0..cfg.repetitions).into_par_iter().map(|rep| run_repetition(cfg, data, rep)).collect();
    let mut rows = Vec::with_capacity(cfg.repetitions * cfg.sweep.len());
    for si in 0..cfg.sweep.len() {
        rows.extend(per_rep.iter().map(|r| r[si].clone()));
    }
    Ok(rows)
}

pub fn write_results(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.method.name().to_string(),
            r.objective.name().to_string(),
            r.k.to_string(),
            r.topology.clone(),
            r.partition.clone(),
            r.t.to_string(),
            r.rep.to_string(),
            r.point_units.to_string(),
            r.scalar_units.to_string(),
            r.cost_ratio.map_or(String::new(), |v| v.to_string()),
            r.status.clone(),
        ])?;
    }
    w.flush().map_err(io_err(path))
}

/// Path of the metadata file that accompanies a results file.
pub fn metadata_path(results: &Path) -> PathBuf {
    let mut name = results.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

/// `key = value` block describing a run: the full configuration, the
/// resolved bandwidth, the data size and the unit conventions.
pub fn metadata(cfg: &ExperimentConfig, data: &Dataset) -> String {
    let mut out = String::from("# dcoreset run metadata\n");
    for (k, v) in cfg.to_kv() {
        out.push_str(&format!("{k} = {v}\n"));
    }
    out.push_str(&format!("points = {}\n", data.points.len()));
    out.push_str(&format!("dimension = {}\n", data.points.dim().unwrap_or(0)));
    if let Some(b) = data.bandwidth {
        out.push_str(&format!("resolved_bandwidth = {b}\n"));
    }
    out.push_str("point_unit = one point with its weight\n");
    out.push_str("scalar_unit = one standalone real; 1 scalar-unit = 1/(d+1) point-units\n");
    out
}

/// Runs the experiment and writes the results CSV plus `<out>.meta`.
pub fn run_and_persist(cfg: &ExperimentConfig, out: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let out = out.as_ref();
    cfg.validate()?;
    if cfg.seed.is_none() {
        return Err(HarnessError::InvalidConfig("a seed is required".into()));
    }
    let data = prepare_data(cfg)?;
    let rows = run_on(cfg, &data)?;
    write_results(out, &rows)?;
    let meta = metadata_path(out);
    std::fs::write(&meta, metadata(cfg, &data)).map_err(io_err(meta))?;
    Ok(rows)
}
