//! Golden-file pin of the CSV schema and the exact bytes a pinned seed
//! produces for the small smoke preset (d = 2, beta = 3, N = 64, K = 50).

use heavytail_cli::{runner, scenario};

#[test]
fn smoke_preset_reproduces_golden_csvs() {
    let mut spec = scenario::preset("smoke-small").expect("preset exists");
    let out = std::env::temp_dir().join(format!("heavytail-golden-{}", std::process::id()));
    spec.experiment.out = out.display().to_string();
    let artifacts = runner::run(&spec, 3).expect("smoke run succeeds");

    let snapshots = std::fs::read(&artifacts.snapshots_csv).unwrap();
    let metrics = std::fs::read(&artifacts.metrics_csv).unwrap();
    let _ = std::fs::remove_dir_all(&out);

    assert_eq!(
        snapshots,
        include_bytes!("golden/snapshots.csv"),
        "snapshots.csv drifted from the golden file"
    );
    assert_eq!(
        metrics,
        include_bytes!("golden/metrics.csv"),
        "metrics.csv drifted from the golden file"
    );
}
