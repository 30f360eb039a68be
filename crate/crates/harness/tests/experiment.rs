use std::process::Command;

use dcoreset::config::{CommMode, ExperimentConfig, Method, PartitionChoice, TopologyChoice};
use dcoreset::experiment::{
    evaluate, metadata_path, prepare_data, run_and_persist, run_experiment, run_method, setup_repetition, CSV_COLUMNS,
};
use dcoreset::report::{aggregate, read_records};
use dcoreset::synthetic::SyntheticSpec;
use dcoreset_core::solvers::SolverParams;
use dcoreset_core::Objective;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small() -> ExperimentConfig {
    ExperimentConfig {
        synthetic: SyntheticSpec { k_true: 3, dim: 4, per_center: 100, spread: 0.5 },
        k: 3,
        sites: 6,
        sweep: vec![60],
        repetitions: 2,
        seed: Some(11),
        ..Default::default()
    }
}

#[test]
fn fixed_seed_gives_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { repetitions: 1, ..small() };
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    run_and_persist(&cfg, &a).unwrap();
    run_and_persist(&cfg, &b).unwrap();
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let header = String::from_utf8(bytes).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, CSV_COLUMNS.join(","));
    let meta = std::fs::read_to_string(metadata_path(&a)).unwrap();
    for key in ["seed = 11", "max_iters = 100", "scalar_unit", "point_unit"] {
        assert!(meta.contains(key), "{key} missing from\n{meta}");
    }
}

#[test]
fn sweep_times_repetitions_rows_in_order() {
    let cfg = ExperimentConfig { sweep: vec![30, 60, 120], repetitions: 10, ..small() };
    let rows = run_experiment(&cfg).unwrap();
    assert_eq!(rows.len(), 30);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!((r.t, r.rep), (cfg.sweep[i / 10], i % 10));
        assert!(r.is_ok(), "{}", r.status);
        assert!(r.cost_ratio.unwrap() > 0.0);
    }
}

#[test]
fn stage_errors_land_in_the_status_column() {
    // COMBINE needs one sample per site; t = 2 on 6 sites fails, t = 60 works.
    let cfg = ExperimentConfig { method: Method::Combine, sweep: vec![2, 60], ..small() };
    let rows = run_experiment(&cfg).unwrap();
    assert!(rows[..2].iter().all(|r| r.status.starts_with("error") && r.cost_ratio.is_none()));
    assert!(rows[2..].iter().all(|r| r.is_ok()));
}

#[test]
fn missing_seed_is_refused() {
    let cfg = ExperimentConfig { seed: None, ..small() };
    assert!(run_experiment(&cfg).is_err());
}

#[test]
fn self_comparison_centers_on_one() {
    let cfg = small();
    let data = prepare_data(&cfg).unwrap();
    let mut ratios: Vec<f64> = (0..10)
        .map(|s| {
            evaluate(&data.points, &data.points, 3, Objective::KMeans, &mut ChaCha8Rng::seed_from_u64(s), &SolverParams::default())
                .unwrap()
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    let median = (ratios[4] + ratios[5]) / 2.0;
    assert!((0.95..=1.05).contains(&median), "{median}");
}

#[test]
fn full_sample_coreset_is_close_to_the_data() {
    let cfg = small();
    let data = prepare_data(&cfg).unwrap();
    let setup = setup_repetition(&cfg, &data, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (core, _) = run_method(&cfg, &setup, data.points.len(), &mut rng).unwrap();
    let r = evaluate(&core, &data.points, 3, Objective::KMeans, &mut rng, &SolverParams::default()).unwrap();
    assert!(r <= 1.1, "{r}");
}

#[test]
fn flood_mode_charges_two_m_per_point() {
    let cfg = small();
    let data = prepare_data(&cfg).unwrap();
    let setup = setup_repetition(&cfg, &data, 0).unwrap();
    let (core, ledger) = run_method(&cfg, &setup, 80, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let m = setup.topology.m() as u64;
    assert_eq!(ledger.point_units, 2 * m * core.len() as u64);
    assert_eq!(ledger.scalar_units, 2 * m * setup.topology.n() as u64);
}

#[test]
fn every_method_and_mode_runs() {
    for (method, mode, topology, partition) in [
        (Method::Distributed, CommMode::TreeUpcast, TopologyChoice::Grid, PartitionChoice::Similarity),
        (Method::Combine, CommMode::TreeUpcast, TopologyChoice::Preferential, PartitionChoice::Degree),
        (Method::Zhang, CommMode::TreeUpcast, TopologyChoice::Grid, PartitionChoice::Weighted),
    ] {
        let cfg = ExperimentConfig { method, mode, topology, partition, rows: 2, cols: 3, ..small() };
        let rows = run_experiment(&cfg).unwrap();
        assert!(rows.iter().all(|r| r.is_ok()), "{method:?}: {:?}", rows[0].status);
    }
}

#[test]
fn cli_end_to_end() {
    let exe = env!("CARGO_BIN_EXE_dcoreset");
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let ok = |args: &[&str]| {
        let out = Command::new(exe).args(args).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out
    };
    let data = p("data.csv");
    let graph = p("graph.txt");
    let results = p("results.csv");
    ok(&["gen-data", "--k-true", "3", "--dim", "2", "--per-center", "50", "--seed", "4", "--out", data.to_str().unwrap()]);
    ok(&["gen-topology", "--kind", "grid", "--rows", "2", "--cols", "2", "--out", graph.to_str().unwrap()]);
    assert!(std::fs::read_to_string(&graph).unwrap().starts_with("4 4\n"));
    std::fs::write(p("run.cfg"), "k = 3\nrepetitions = 2\nsweep = 20,40\n").unwrap();
    ok(&[
        "run", "--config", p("run.cfg").to_str().unwrap(), "--seed", "5", "--out", results.to_str().unwrap(),
        "--data", data.to_str().unwrap(), "--topology", "file", "--topology-file", graph.to_str().unwrap(),
    ]);
    let records = read_records(&results).unwrap();
    assert_eq!(records.len(), 4);
    assert!(records.iter().all(|r| r.topology == "custom" && r.cost_ratio.is_some()));
    ok(&["report", "--input", results.to_str().unwrap(), "--out", p("agg.csv").to_str().unwrap(), "--svg",
         p("chart.svg").to_str().unwrap()]);
    assert_eq!(aggregate(&records).len(), 2);
    assert!(std::fs::read_to_string(p("chart.svg")).unwrap().contains("<polyline"));

    let missing_seed = Command::new(exe).args(["run", "--out", results.to_str().unwrap()]).output().unwrap();
    assert!(!missing_seed.status.success());
}
