use aspir8::experiment::{simulate, snapshot_file_name, MANIFEST_FILE};
use aspir8::{run_experiment, ExperimentConfig, RunSummary, Side, Snapshot};

fn small_suction() -> ExperimentConfig {
    ExperimentConfig {
        n_cells: 60,
        w_suction: -10000.0,
        ..ExperimentConfig::suction()
    }
}

#[test]
fn written_snapshots_read_back_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_suction();
    let summary = run_experiment(&config, dir.path()).unwrap();
    let (snapshots, _) = simulate(&config).unwrap();

    assert_eq!(summary.snapshots.len(), snapshots.len());
    for (i, (entry, snap)) in summary.snapshots.iter().zip(&snapshots).enumerate() {
        assert_eq!(entry.file, snapshot_file_name(i));
        let file = std::fs::File::open(dir.path().join(&entry.file)).unwrap();
        let back = Snapshot::read_csv(file).unwrap();
        assert_eq!(&back, snap);
        assert_eq!(back.t, entry.t);
    }
}

#[test]
fn manifest_describes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_suction();
    run_experiment(&config, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    let summary: RunSummary = serde_json::from_str(&text).unwrap();

    assert_eq!(summary.config, config);
    assert_eq!(summary.final_time, config.t_end);
    assert_eq!(summary.steps, summary.lambda_history.len());
    assert_eq!(summary.steps, summary.dt_history.len());
    let elapsed: f64 = summary.dt_history.iter().sum();
    assert!((elapsed - config.t_end).abs() < 1e-12);
    assert!(summary.lambda_history.iter().all(|&l| l >= 10000.0));
}

#[test]
fn gross_columns_follow_the_device() {
    let (snapshots, summary) = simulate(&small_suction()).unwrap();
    for row in snapshots.iter().flat_map(|s| &s.rows) {
        match row.side {
            Side::Catheterized => {
                let w = row.w.unwrap();
                assert_eq!(row.q_gross, row.q_net + summary.catheter_area * w);
                assert_eq!(row.a_gross, row.a + summary.catheter_area);
            }
            Side::Free => {
                assert!(row.w.is_none());
                assert_eq!(row.q_gross, row.q_net);
                assert_eq!(row.a_gross, row.a);
            }
        }
    }
}
