use ordgeo::pipeline::{run_pipeline, ExperimentConfig, MANIFEST_FILE};
use ordgeo::Error;

const VALIDATION_2D: &str = r#"{
  "schema": 1,
  "model": {"model": "minkowski", "dimension": 2, "extent": 0.5, "time": [0, 1]},
  "sprinkle": {"density": 2000, "seed": 1},
  "stages": [
    {"stage": "sprinkle"},
    {"stage": "sigma", "source": "reconstructed"},
    {"stage": "compare", "min_count": 100}
  ]
}"#;

#[test]
fn full_2d_validation_pipeline_reports_small_median_error() {
    let cfg = ExperimentConfig::from_json(VALIDATION_2D).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = run_pipeline(&cfg, dir.path()).unwrap();
    let files: Vec<&str> = m.outputs.iter().map(|o| o.file.as_str()).collect();
    assert_eq!(files, ["space.oms.json", "sigma.lormat", "sigma_compare.csv", "sigma_compare.json"]);
    let csv = std::fs::read_to_string(dir.path().join("sigma_compare.csv")).unwrap();
    assert!(csv.starts_with("p_id,q_id,count,value,reference,rel_error,provenance\n"));
    let stats: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("sigma_compare.json")).unwrap()).unwrap();
    let median = stats["median"].as_f64().unwrap();
    assert!(median <= 0.10, "median relative error {median}");
    assert!(stats["n_pairs"].as_u64().unwrap() > 1000);
}

#[test]
fn manifest_hashes_match_files() {
    let cfg = ExperimentConfig::from_json(&VALIDATION_2D.replace("2000", "200")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = run_pipeline(&cfg, dir.path()).unwrap();
    for o in &m.outputs {
        let bytes = std::fs::read(dir.path().join(&o.file)).unwrap();
        assert_eq!(ordgeo::pipeline::sha256_hex(&bytes), o.sha256);
    }
    let text = std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    assert!(!text.contains("thread"));
    assert_eq!(m.config_sha256, ordgeo::pipeline::sha256_hex(cfg.canonical_json().as_bytes()));
}

#[test]
fn schema_and_range_violations_name_their_path() {
    let cases = [
        (VALIDATION_2D.replace("\"schema\": 1", "\"schema\": 7"), "schema", "7"),
        (VALIDATION_2D.replace("\"min_count\": 100", "\"min_count\": -1"), "stages[2]", "-1"),
        (VALIDATION_2D.replace("\"density\": 2000", "\"density\": 0"), "sprinkle.density", "0"),
        (VALIDATION_2D.replace("\"source\": \"reconstructed\"", "\"source\": \"guess\""), "stages[1]", "guess"),
    ];
    for (text, want, value) in cases {
        match ExperimentConfig::from_json(&text) {
            Err(Error::Config { path, message }) => {
                assert_eq!(path, want);
                assert!(message.contains(value), "{message}");
            }
            other => panic!("{want}: {other:?}"),
        }
    }
}
