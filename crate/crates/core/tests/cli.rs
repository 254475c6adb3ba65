use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topic-dynamics"))
        .args(args)
        .output()
        .unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL_FIXTURE: &str = r#"{
  "start_date": "2021-01-01",
  "groups": [
    {"prefix": "b", "count": 6, "shift_range": 10,
     "spec": {"kind": "burst", "center": 50, "width": 4, "length": 100, "total_mass": 2000, "noise": 0.05, "seed": 1}},
    {"prefix": "u", "count": 6,
     "spec": {"kind": "uniform", "length": 100, "total_mass": 2000, "noise": 0.05, "seed": 50}}
  ]
}"#;

#[test]
fn emitted_fixture_csv_runs_like_the_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("fixture.json");
    fs::write(&spec, SMALL_FIXTURE).unwrap();
    let csv = dir.path().join("counts.csv");

    let out = cli(&["--fixtures", arg(&spec), "--emit-csv", arg(&csv)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("topic_id,date,count\n"));
    assert_eq!(text.lines().count(), 1 + 12 * 100);

    let from_csv = dir.path().join("a");
    let from_fixture = dir.path().join("b");
    let out = cli(&["--input", arg(&csv), "--out", arg(&from_csv), "--threads", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = cli(&["--fixtures", arg(&spec), "--out", arg(&from_fixture)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["distance_matrix.csv", "clusters.csv", "ephemerality.csv", "curves.csv"] {
        assert_eq!(
            fs::read(from_csv.join(name)).unwrap(),
            fs::read(from_fixture.join(name)).unwrap(),
            "{name}"
        );
    }
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(from_fixture.join("run_report.json")).unwrap()).unwrap();
    assert!(report["adjusted_rand_index"].as_f64().is_some());
}

#[test]
fn options_reach_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    fs::write(
        &input,
        "topic_id,date,count\na,2020-08-15,3\na,2020-08-16,1\nb,2020-08-16,4\nb,2020-08-17,2\nc,2020-08-15,1\nc,2020-08-17,1\nd,2020-09-30,5\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = cli(&[
        "--input", arg(&input),
        "--from", "2020-08-15", "--to", "2020-08-17",
        "--smooth-window", "1", "--metric", "hda", "--alignment", "max",
        "--min-cluster-size", "2", "--core-k", "1",
        "--mass-threshold", "0.7", "--trim", "0.05", "--e4-orientation", "flipped",
        "--pair", "c", "a",
        "--out", arg(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    let config = &manifest["config"];
    assert_eq!(config["metric"], "hda");
    assert_eq!(config["alignment"], "max-peak");
    assert_eq!(config["ephemerality"]["orientation"], "flipped");
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(out_dir.join("run_report.json")).unwrap()).unwrap();
    assert_eq!(report["excluded_topics"], serde_json::json!(["d"]));
    assert_eq!(report["out_of_range_rows"], 1);
    assert_eq!(report["pair"]["a"], "c");
    let pair = fs::read_to_string(out_dir.join("aligned_pair.csv")).unwrap();
    assert!(pair.starts_with("position,c,a\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");

    let negative = dir.path().join("neg.csv");
    fs::write(&negative, "topic_id,date,count\nt1,2020-08-15,-2\n").unwrap();
    let out = cli(&["--input", arg(&negative), "--out", arg(&out_dir)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));

    let single = dir.path().join("one.csv");
    fs::write(&single, "topic_id,date,count\nt1,2020-08-15,2\nt1,2020-08-16,1\n").unwrap();
    let out = cli(&["--input", arg(&single), "--out", arg(&out_dir)]);
    assert_eq!(out.status.code(), Some(3));

    let missing = dir.path().join("missing.csv");
    let out = cli(&["--input", arg(&missing), "--out", arg(&out_dir)]);
    assert_eq!(out.status.code(), Some(4));

    let out = cli(&["--input", arg(&single), "--metric", "euclid"]);
    assert_eq!(out.status.code(), Some(2));
}
