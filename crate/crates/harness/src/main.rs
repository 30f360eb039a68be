use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dcoreset::checks::{format_table, run_checks};
use dcoreset::config::ExperimentConfig;
use dcoreset::experiment::{metadata_path, run_and_persist};
use dcoreset::io::{write_dataset, write_edge_list};
use dcoreset::report::{aggregate, read_records, write_aggregate, write_svg};
use dcoreset::synthetic::{gen_synthetic, SyntheticSpec};
use dcoreset_core::network::{gen_topology, TopologyParams};
use dcoreset_core::WeightedPointSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "dcoreset", version, about = "Distributed coreset clustering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic Gaussian mixture as headerless CSV.
    GenData(GenData),
    /// Write a random, grid or preferential-attachment graph as an edge list.
    GenTopology(GenTopology),
    /// Run an experiment and write the results CSV plus `<out>.meta`.
    Run(Run),
    /// Run the oracle checks and print a pass/fail table.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Aggregate a results CSV per sweep point, optionally with an SVG chart.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenData {
    #[arg(long, default_value_t = 5)]
    k_true: usize,
    #[arg(long, default_value_t = 10)]
    dim: usize,
    #[arg(long, default_value_t = 400)]
    per_center: usize,
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the generating centers here.
    #[arg(long)]
    centers_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Random,
    Grid,
    Preferential,
}

#[derive(Args)]
struct GenTopology {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 25)]
    sites: usize,
    #[arg(long, default_value_t = 0.3)]
    edge_p: f64,
    #[arg(long, default_value_t = 5)]
    rows: usize,
    #[arg(long, default_value_t = 5)]
    cols: usize,
    #[arg(long, default_value_t = 2)]
    attach: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Every flag overrides the key of the same name (dashes for underscores)
/// from `--config`.
#[derive(Args)]
struct Run {
    /// Flat `key = value` file; flags given here take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Dataset CSV, or `synthetic`.
    #[arg(long)]
    data: Option<String>,
    #[arg(long)]
    k_true: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    per_center: Option<String>,
    #[arg(long)]
    spread: Option<String>,
    /// kmeans or kmedian.
    #[arg(long)]
    objective: Option<String>,
    #[arg(long)]
    k: Option<String>,
    /// random, grid, preferential or file.
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    sites: Option<String>,
    #[arg(long)]
    edge_p: Option<String>,
    #[arg(long)]
    rows: Option<String>,
    #[arg(long)]
    cols: Option<String>,
    #[arg(long)]
    attach: Option<String>,
    #[arg(long)]
    topology_file: Option<String>,
    /// uniform, similarity, weighted or degree.
    #[arg(long)]
    partition: Option<String>,
    /// Similarity kernel width, or `auto` for the median heuristic.
    #[arg(long)]
    bandwidth: Option<String>,
    /// distributed, combine or zhang.
    #[arg(long)]
    method: Option<String>,
    /// graph-flood or tree-upcast.
    #[arg(long)]
    mode: Option<String>,
    /// Comma-separated t values (t_node for zhang).
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long)]
    repetitions: Option<String>,
    #[arg(long)]
    max_iters: Option<String>,
    #[arg(long)]
    rel_tol: Option<String>,
    #[arg(long)]
    weiszfeld_iters: Option<String>,
    #[arg(long)]
    weiszfeld_eps: Option<String>,
}

impl Run {
    fn overrides(&self) -> Vec<(&'static str, &String)> {
        [
            ("data", &self.data),
            ("k_true", &self.k_true),
            ("dim", &self.dim),
            ("per_center", &self.per_center),
            ("spread", &self.spread),
            ("objective", &self.objective),
            ("k", &self.k),
            ("topology", &self.topology),
            ("sites", &self.sites),
            ("edge_p", &self.edge_p),
            ("rows", &self.rows),
            ("cols", &self.cols),
            ("attach", &self.attach),
            ("topology_file", &self.topology_file),
            ("partition", &self.partition),
            ("bandwidth", &self.bandwidth),
            ("method", &self.method),
            ("mode", &self.mode),
            ("sweep", &self.sweep),
            ("repetitions", &self.repetitions),
            ("max_iters", &self.max_iters),
            ("rel_tol", &self.rel_tol),
            ("weiszfeld_iters", &self.weiszfeld_iters),
            ("weiszfeld_eps", &self.weiszfeld_eps),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
        .collect()
    }
}

fn run(args: &Run) -> anyhow::Result<()> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_kv_str(&text)?
        }
        None => ExperimentConfig::default(),
    };
    for (key, value) in args.overrides() {
        cfg.set(key, value).map_err(anyhow::Error::msg).with_context(|| format!("--{}", key.replace('_', "-")))?;
    }
    cfg.seed = Some(args.seed);
    let rows = run_and_persist(&cfg, &args.out)?;
    let failed = rows.iter().filter(|r| !r.is_ok()).count();
    eprintln!(
        "wrote {} rows to {} ({} failed); metadata in {}",
        rows.len(),
        args.out.display(),
        failed,
        metadata_path(&args.out).display()
    );
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::GenData(a) => {
            let spec = SyntheticSpec { k_true: a.k_true, dim: a.dim, per_center: a.per_center, spread: a.spread };
            let (data, centers) = gen_synthetic(&spec, &mut ChaCha8Rng::seed_from_u64(a.seed))?;
            write_dataset(&a.out, &data)?;
            if let Some(path) = &a.centers_out {
                write_dataset(path, &WeightedPointSet::unit(centers.into_points())?)?;
            }
        }
        Command::GenTopology(a) => {
            let (n, params) = match a.kind {
                Kind::Random => (a.sites, TopologyParams::Random { p: a.edge_p }),
                Kind::Grid => (a.rows * a.cols, TopologyParams::Grid { rows: a.rows, cols: a.cols }),
                Kind::Preferential => (a.sites, TopologyParams::Preferential { attach: a.attach }),
            };
            let g = gen_topology(n, &params, &mut ChaCha8Rng::seed_from_u64(a.seed))?;
            write_edge_list(&a.out, &g)?;
        }
        Command::Run(a) => run(&a)?,
        Command::Verify { seed } => {
            let rows = run_checks(seed)?;
            print!("{}", format_table(&rows));
            if rows.iter().any(|r| !r.passed) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Report { input, out, svg } => {
            let agg = aggregate(&read_records(&input)?);
            if agg.is_empty() {
                bail!("{} has no rows", input.display());
            }
            write_aggregate(&out, &agg)?;
            if let Some(path) = svg {
                write_svg(path, &agg)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
