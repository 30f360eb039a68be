//! Experiment configuration as flat `key = value` text.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! errors. The same keys are accepted from the command line, and
//! [`ExperimentConfig::to_kv`] writes them back in a fixed order.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use dcoreset_core::solvers::SolverParams;
use dcoreset_core::Objective;

use crate::error::{HarnessError, Result};
use crate::synthetic::SyntheticSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyChoice {
    Random,
    Grid,
    Preferential,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionChoice {
    Uniform,
    Similarity,
    Weighted,
    Degree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Distributed,
    Combine,
    Zhang,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommMode {
    GraphFlood,
    TreeUpcast,
}

macro_rules! names {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn name(self) -> &'static str {
                match self { $(Self::$variant => $name),+ }
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($name => Ok(Self::$variant),)+
                    _ => Err(format!("`{s}` is not one of: {}", [$($name),+].join(", "))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
    };
}

names!(TopologyChoice { Random => "random", Grid => "grid", Preferential => "preferential", File => "file" });
names!(PartitionChoice { Uniform => "uniform", Similarity => "similarity", Weighted => "weighted", Degree => "degree" });
names!(Method { Distributed => "distributed", Combine => "combine", Zhang => "zhang" });
names!(CommMode { GraphFlood => "graph-flood", TreeUpcast => "tree-upcast" });

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Dataset file; `None` means synthetic data.
    pub data: Option<PathBuf>,
    pub synthetic: SyntheticSpec,
    pub objective: Objective,
    pub k: usize,
    pub topology: TopologyChoice,
    /// Site count for random and preferential graphs.
    pub sites: usize,
    pub edge_p: f64,
    pub rows: usize,
    pub cols: usize,
    pub attach: usize,
    pub topology_file: Option<PathBuf>,
    pub partition: PartitionChoice,
    /// Similarity-partition kernel width; `None` picks the median heuristic.
    pub bandwidth: Option<f64>,
    pub method: Method,
    pub mode: CommMode,
    /// Values of `t` (or `t_node` for the tree merge), one sweep point each.
    pub sweep: Vec<usize>,
    pub repetitions: usize,
    pub seed: Option<u64>,
    pub solver: SolverParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data: None,
            synthetic: SyntheticSpec::default(),
            objective: Objective::KMeans,
            k: 5,
            topology: TopologyChoice::Random,
            sites: 25,
            edge_p: 0.3,
            rows: 5,
            cols: 5,
            attach: 2,
            topology_file: None,
            partition: PartitionChoice::Uniform,
            bandwidth: None,
            method: Method::Distributed,
            mode: CommMode::GraphFlood,
            sweep: vec![500],
            repetitions: 10,
            seed: None,
            solver: SolverParams::default(),
        }
    }
}

pub const KEYS: &[&str] = &[
    "data", "k_true", "dim", "per_center", "spread", "objective", "k", "topology", "sites", "edge_p", "rows", "cols",
    "attach", "topology_file", "partition", "bandwidth", "method", "mode", "sweep", "repetitions", "seed", "max_iters",
    "rel_tol", "weiszfeld_iters", "weiszfeld_eps",
];

fn parse<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("bad value for `{key}`: {e}"))
}

impl ExperimentConfig {
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config { line: i + 1, msg: "expected `key = value`".into() })?;
            cfg.set(key.trim(), value.trim()).map_err(|msg| HarnessError::Config { line: i + 1, msg })?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "data" => self.data = (value != "synthetic").then(|| PathBuf::from(value)),
            "k_true" => self.synthetic.k_true = parse(key, value)?,
            "dim" => self.synthetic.dim = parse(key, value)?,
            "per_center" => self.synthetic.per_center = parse(key, value)?,
            "spread" => self.synthetic.spread = parse(key, value)?,
            "objective" => self.objective = value.parse().map_err(|e: dcoreset_core::Error| e.to_string())?,
            "k" => self.k = parse(key, value)?,
            "topology" => self.topology = parse(key, value)?,
            "sites" => self.sites = parse(key, value)?,
            "edge_p" => self.edge_p = parse(key, value)?,
            "rows" => self.rows = parse(key, value)?,
            "cols" => self.cols = parse(key, value)?,
            "attach" => self.attach = parse(key, value)?,
            "topology_file" => self.topology_file = Some(PathBuf::from(value)),
            "partition" => self.partition = parse(key, value)?,
            "bandwidth" => self.bandwidth = if value == "auto" { None } else { Some(parse(key, value)?) },
            "method" => self.method = parse(key, value)?,
            "mode" => self.mode = parse(key, value)?,
            "sweep" => {
                self.sweep = value.split(',').map(|v| parse(key, v.trim())).collect::<std::result::Result<_, _>>()?
            }
            "repetitions" => self.repetitions = parse(key, value)?,
            "seed" => self.seed = Some(parse(key, value)?),
            "max_iters" => self.solver.max_iters = parse(key, value)?,
            "rel_tol" => self.solver.rel_tol = parse(key, value)?,
            "weiszfeld_iters" => self.solver.weiszfeld_iters = parse(key, value)?,
            "weiszfeld_eps" => self.solver.weiszfeld_eps = parse(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Number of sites implied by the topology settings. For edge-list
    /// files this is only known after reading the file.
    pub fn site_count(&self) -> Option<usize> {
        match self.topology {
            TopologyChoice::Random | TopologyChoice::Preferential => Some(self.sites),
            TopologyChoice::Grid => Some(self.rows * self.cols),
            TopologyChoice::File => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(HarnessError::InvalidConfig(msg.into()));
        if self.sweep.is_empty() {
            return bad("sweep must list at least one value");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1");
        }
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.method == Method::Zhang && self.mode != CommMode::TreeUpcast {
            return bad("the zhang method runs on a spanning tree; use mode = tree-upcast");
        }
        if self.topology == TopologyChoice::File && self.topology_file.is_none() {
            return bad("topology = file needs topology_file");
        }
        if let Some(b) = self.bandwidth {
            if !(b > 0.0 && b.is_finite()) {
                return bad("bandwidth must be positive");
            }
        }
        self.solver.validate()?;
        Ok(())
    }

    /// Every key with its current value, in [`KEYS`] order. `seed` is
    /// omitted when unset.
    pub fn to_kv(&self) -> Vec<(&'static str, String)> {
        let s = &self.synthetic;
        let data = self.data.as_ref().map_or("synthetic".into(), |p| p.display().to_string());
        let sweep = self.sweep.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut out = vec![
            ("data", data),
            ("k_true", s.k_true.to_string()),
            ("dim", s.dim.to_string()),
            ("per_center", s.per_center.to_string()),
            ("spread", s.spread.to_string()),
            ("objective", self.objective.name().into()),
            ("k", self.k.to_string()),
            ("topology", self.topology.to_string()),
            ("sites", self.sites.to_string()),
            ("edge_p", self.edge_p.to_string()),
            ("rows", self.rows.to_string()),
            ("cols", self.cols.to_string()),
            ("attach", self.attach.to_string()),
            ("topology_file", self.topology_file.as_ref().map_or(String::new(), |p| p.display().to_string())),
            ("partition", self.partition.to_string()),
            ("bandwidth", self.bandwidth.map_or("auto".into(), |b| b.to_string())),
            ("method", self.method.to_string()),
            ("mode", self.mode.to_string()),
            ("sweep", sweep),
            ("repetitions", self.repetitions.to_string()),
        ];
        if let Some(seed) = self.seed {
            out.push(("seed", seed.to_string()));
        }
        out.extend([
            ("max_iters", self.solver.max_iters.to_string()),
            ("rel_tol", self.solver.rel_tol.to_string()),
            ("weiszfeld_iters", self.solver.weiszfeld_iters.to_string()),
            ("weiszfeld_eps", self.solver.weiszfeld_eps.to_string()),
        ]);
        out.retain(|(k, v)| !(*k == "topology_file" && v.is_empty()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_key_values() {
        let cfg = ExperimentConfig::from_kv_str(
            "# grid run\nobjective = kmedian\nk=3\ntopology = grid\nrows=3\ncols = 4\n\nmethod=zhang\nmode=tree-upcast\nsweep = 100, 200,400\nseed=9\n",
        )
        .unwrap();
        assert_eq!(cfg.objective, Objective::KMedian);
        assert_eq!(cfg.site_count(), Some(12));
        assert_eq!(cfg.sweep, vec![100, 200, 400]);
        assert_eq!(cfg.seed, Some(9));
        cfg.validate().unwrap();
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = ExperimentConfig::from_kv_str("k = 2\ncolour = blue\n").unwrap_err();
        assert!(matches!(err, HarnessError::Config { line: 2, .. }), "{err}");
        let err = ExperimentConfig::from_kv_str("k = two\n").unwrap_err();
        assert!(matches!(err, HarnessError::Config { line: 1, .. }), "{err}");
        assert!(ExperimentConfig::from_kv_str("just words").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig { sweep: vec![], ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg.sweep = vec![10];
        cfg.method = Method::Zhang;
        assert!(cfg.validate().is_err());
        cfg.mode = CommMode::TreeUpcast;
        cfg.validate().unwrap();
        cfg.repetitions = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn kv_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("bandwidth", "2.5").unwrap();
        cfg.set("seed", "77").unwrap();
        cfg.set("data", "points.csv").unwrap();
        let text: String = cfg.to_kv().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        assert_eq!(ExperimentConfig::from_kv_str(&text).unwrap(), cfg);
        assert!(cfg.to_kv().iter().all(|(k, _)| KEYS.contains(k)));
    }
}
