use lflx::experiment::cli::main_with;
use lflx::experiment::snapshot::{SnapshotFile, DIVERGENCE_WARNING};
use lflx::experiment::{self, load_snapshot, save_snapshot, ExperimentConfig};
use lflx::grid::Grid;
use lflx::synthetic;
use lflx::RealSamples;

#[test]
fn bundled_configs_round_trip_through_toml() {
    let cfg = ExperimentConfig::taylor_green();
    cfg.validate().unwrap();
    let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(again.to_toml(), cfg.to_toml());
}

#[test]
fn unknown_keys_are_config_errors() {
    let text = format!("{}\n[bogus]\nx = 1\n", ExperimentConfig::taylor_green().to_toml());
    assert!(matches!(ExperimentConfig::from_toml(&text), Err(lflx::Error::Config(_))));
}

#[test]
fn cli_exit_codes() {
    assert_eq!(main_with(["lflx", "--quiet", "nonsense"]), 2);
    assert_eq!(main_with(["lflx", "--quiet", "--config", "/nonexistent/x.toml", "simulate"]), 2);
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::taylor_green();
    cfg.solver.dt = 0.5;
    cfg.solver.t_end = 1.0;
    cfg.solver.snapshot_stride = 1;
    cfg.solver.nu = 1e-3;
    cfg.output.dir = dir.path().join("out");
    let unstable = dir.path().join("unstable.toml");
    std::fs::write(&unstable, cfg.to_toml()).unwrap();
    assert_eq!(main_with(["lflx", "--quiet", "--config", unstable.to_str().unwrap(), "simulate"]), 1);
    assert_eq!(main_with(["lflx", "--quiet", "check"]), 0);
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[solver]\nnu = -1\n").unwrap();
    assert_eq!(main_with(["lflx", "--quiet", "--config", bad.to_str().unwrap(), "simulate"]), 2);
}

#[test]
fn simulate_writes_taylor_green_matching_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::taylor_green();
    cfg.solver.grid = Grid::new(2, 32).unwrap();
    cfg.output.dir = dir.path().to_path_buf();
    let summary = experiment::simulate(&cfg).unwrap();
    assert!((summary.final_time - cfg.solver.t_end).abs() < 1e-12);
    assert!(dir.path().join("budget.csv").exists());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("simulate.json")).unwrap())
            .unwrap();
    assert!(json.get("config").is_some());

    let last = load_snapshot(summary.snapshots.last().unwrap()).unwrap();
    let g = cfg.solver.grid;
    let decay = (-2.0 * cfg.solver.nu * last.file.t).exp();
    let exact = synthetic::taylor_green(&g).scale(decay).to_real();
    let err = last
        .file
        .velocity
        .values()
        .iter()
        .zip(exact.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-8, "{err}");
    assert!(!last.divergence_warning);
}

#[test]
fn compressible_snapshot_raises_the_divergence_warning() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(2, 16).unwrap();
    // (sin x, 0) plus a solenoidal part; divergence cos x is O(1)
    let velocity = RealSamples::from_fn(g, 2, |x, c| match c {
        0 => x[0].sin() + x[1].sin(),
        _ => 0.0,
    });
    let file = SnapshotFile {
        nu: 0.1,
        t: 0.0,
        velocity,
        pressure: None,
    };
    let path = dir.path().join("bad.lflx");
    save_snapshot(&path, &file).unwrap();
    let loaded = load_snapshot(&path).unwrap();
    assert!(loaded.divergence > 1e-6);
    assert!(loaded.divergence > DIVERGENCE_WARNING);
    assert!(loaded.divergence_warning);
}

#[test]
fn corrupted_snapshots_are_rejected() {
    let g = Grid::new(2, 8).unwrap();
    let file = SnapshotFile {
        nu: 0.1,
        t: 1.0,
        velocity: synthetic::shear(&g).to_real(),
        pressure: None,
    };
    let bytes = file.to_bytes();
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(SnapshotFile::from_bytes(&bad), Err(lflx::Error::BadMagic(_))));
    assert!(matches!(
        SnapshotFile::from_bytes(&bytes[..bytes.len() - 8]),
        Err(lflx::Error::Truncated { .. })
    ));
    let back = SnapshotFile::from_bytes(&bytes).unwrap();
    assert_eq!(back.velocity.values(), file.velocity.values());
}
