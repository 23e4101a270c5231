use std::path::{Path, PathBuf};

use obprm::cli::{summary_csv, write_report, SUMMARY_HEADER};
use obprm::montecarlo::{run_experiment, ExperimentConfig, ExperimentReport};
use obprm::Error;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

const SMALL: &str = r#"{
  "obstacles": ["square.json", "rectangle.json", "plus.json"],
  "delta": 1,
  "rays": 50,
  "ray_length": "auto",
  "replications": 4,
  "drop_trials": 2000,
  "seed": 7
}"#;

fn small() -> ExperimentConfig {
    ExperimentConfig::parse(SMALL, &fixtures()).unwrap()
}

fn in_pool(threads: usize, cfg: &ExperimentConfig) -> ExperimentReport {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| run_experiment(cfg)).unwrap()
}

#[test]
fn report_round_trips_and_echoes_config() {
    let report = run_experiment(&small()).unwrap();
    let json = report.to_json();
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["seed"], 7);
    assert_eq!(value["obstacles"].as_array().unwrap().len(), 3);
    assert!(value.get("timestamps").is_none());
    assert_eq!(report.config.get(), SMALL.trim());
    let echoed: ExperimentConfig = serde_json::from_value(value["config"].clone()).unwrap();
    assert_eq!(echoed.obstacles, small().obstacles);
    assert_eq!(echoed.seed, 7);
    let names: Vec<&str> = report.obstacles.iter().map(|o| o.name.as_str()).collect();
    assert_eq!(names, ["square", "rectangle", "plus"]);
    for (i, o) in report.obstacles.iter().enumerate() {
        assert_eq!(o.index, i);
        assert_eq!(o.obprm.trials, 200);
        assert_eq!(o.drop.trials, 2000);
        assert!(o.obprm.ci_low <= o.obprm.point_estimate && o.obprm.point_estimate <= o.obprm.ci_high);
        assert!(o.drop_acceptance_rate > 0.0 && o.drop_acceptance_rate <= 1.0);
    }
    assert_eq!(report.obstacles[0].volume, 64.0);
    assert_eq!(report.obstacles[0].surface, 32.0);
}

#[test]
fn summary_csv_has_exact_header_and_parses() {
    let report = run_experiment(&small()).unwrap();
    let text = summary_csv(&report).unwrap();
    assert_eq!(text.lines().next(), Some(SUMMARY_HEADER));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 3);
    for (row, o) in rows.iter().zip(&report.obstacles) {
        assert_eq!(&row[0], o.name);
        assert_eq!(row[6].parse::<f64>().unwrap(), o.obprm.point_estimate);
        let (lo, hi) = row[9].split_once(';').unwrap();
        assert_eq!(lo.parse::<f64>().unwrap(), o.drop.ci_low);
        assert_eq!(hi.parse::<f64>().unwrap(), o.drop.ci_high);
    }

    let dir = tempfile::tempdir().unwrap();
    let (json, csv_path) = write_report(&report, &dir.path().join("nested")).unwrap();
    assert_eq!(std::fs::read_to_string(json).unwrap(), report.to_json());
    assert_eq!(std::fs::read_to_string(csv_path).unwrap(), text);
}

#[test]
fn deterministic_across_thread_counts() {
    let cfg = small();
    assert_eq!(in_pool(1, &cfg).to_json(), in_pool(4, &cfg).to_json());
}

#[test]
fn seed_changes_results() {
    let other = ExperimentConfig::parse(&SMALL.replace("\"seed\": 7", "\"seed\": 8"), &fixtures()).unwrap();
    let (a, b) = (run_experiment(&small()).unwrap(), run_experiment(&other).unwrap());
    assert_ne!(a.obstacles[0].drop_seed, b.obstacles[0].drop_seed);
    assert_ne!(a.to_json(), b.to_json());
}

#[test]
fn invalid_configs_are_rejected() {
    let dir = fixtures();
    let empty = SMALL.replace(r#"["square.json", "rectangle.json", "plus.json"]"#, "[]");
    assert!(ExperimentConfig::parse(&empty, &dir).is_err());
    for (from, to) in [
        ("\"delta\": 1", "\"delta\": 0"),
        ("\"rays\": 50", "\"rays\": 0"),
        ("\"seed\": 7", "\"seed\": 7, \"extra\": 1"),
    ] {
        assert!(ExperimentConfig::parse(&SMALL.replace(from, to), &dir).is_err(), "{to}");
    }
    assert!(ExperimentConfig::parse(&SMALL.replace("\"auto\"", "0.5"), &dir).is_err());
    assert!(ExperimentConfig::parse(&SMALL.replace("\"auto\"", "4.5"), &dir).is_ok());
}

#[test]
fn bad_obstacle_error_names_index() {
    let cfg = ExperimentConfig::parse(&SMALL.replace("rectangle.json", "missing.json"), &fixtures()).unwrap();
    match run_experiment(&cfg) {
        Err(Error::Obstacle { index, .. }) => assert_eq!(index, 1),
        other => panic!("unexpected {other:?}"),
    }
    let msg = run_experiment(&cfg).unwrap_err().to_string();
    assert!(msg.contains('1'), "{msg}");
}

#[test]
fn load_resolves_paths_relative_to_config() {
    let cfg = ExperimentConfig::load(&fixtures().join("experiment.json")).unwrap();
    assert_eq!(cfg.obstacles.len(), 3);
    assert!(cfg.obstacle_path(0).exists());
    assert!(matches!(
        ExperimentConfig::load(Path::new("/no/such/config.json")),
        Err(Error::File { .. })
    ));
}
