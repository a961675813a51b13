use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

const MINIMAL: &str = r#"
sizes = [10]
instances_per_size = 1
realizations_per_instance = 1
horizon = 100
seed = 3

[[variants]]
selection = "excl"
scheduler = "lgs"

[[variants]]
selection = "maxu"
scheduler = "lgs-mimo"
"#;

fn spbp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spbp")).args(args).output().expect("run spbp")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn minimal_run_is_quick_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.toml");
    fs::write(&config, MINIMAL).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));

    let started = Instant::now();
    let out = spbp(&["run", "--config", s(&config), "--out", s(&a)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(started.elapsed().as_secs_f64() < 5.0);
    assert!(spbp(&["run", "--config", s(&config), "--out", s(&b), "--jobs", "2"]).status.success());

    for file in ["flows.csv", "aggregate.csv", "manifest.toml"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    let flows = fs::read_to_string(a.join("flows.csv")).unwrap();
    assert!(flows.starts_with(
        "instance_id,seed,variant,scheduler,flow_src,flow_dst,kind,lambda,throughput,\
         mean_latency,delivery_ratio,trip_length,composite_latency"
    ));
    // 0.4·10 flows under two variants.
    assert_eq!(flows.lines().count(), 1 + 2 * 4);

    let summary = spbp(&["summarize", "--dir", s(&a)]);
    assert!(summary.status.success());
    let table = String::from_utf8(summary.stdout).unwrap();
    assert!(table.contains("maxu-sp_rbar-lgs-mimo") && table.contains("± —"));
}

#[test]
fn seed_and_quick_flags_reach_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.toml");
    fs::write(&config, MINIMAL.replace("horizon = 100", "horizon = 5000")).unwrap();
    let out = dir.path().join("o");
    let r = spbp(&["run", "--config", s(&config), "--out", s(&out), "--quick", "--seed", "11"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let manifest = fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("horizon = 200"));
    assert!(manifest.contains("instances_per_size = 2"));
    assert!(manifest.contains("seed = 11"));
    assert!(manifest.contains(&format!("version = \"{}\"", env!("CARGO_PKG_VERSION"))));
}

#[test]
fn invalid_scheduler_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.toml");
    fs::write(&config, MINIMAL.replace("\"lgs-mimo\"", "\"lgs-quantum\"")).unwrap();
    let out = spbp(&["run", "--config", s(&config), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lgs-quantum"), "{err}");
}

#[test]
fn missing_output_directory_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.toml");
    fs::write(&config, MINIMAL).unwrap();
    assert_eq!(spbp(&["run", "--config", s(&config)]).status.code(), Some(2));
}

const HEADER: &str = "size,lambda,variant,instance_id,group,stat,flows,throughput,mean_latency,delivery_ratio,trip_length,composite_latency\n";

#[test]
fn summarize_empty_csv_prints_header_only() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("aggregate.csv"), HEADER).unwrap();
    let out = spbp(&["summarize", "--dir", s(dir.path())]);
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.lines().count(), 1);
    assert!(table.contains("throughput") && table.contains("variant"));
}

#[test]
fn summarize_confidence_interval_by_hand() {
    // Throughputs 1..5: mean 3, sample variance 2.5, so the half-width is
    // 1.96 · sqrt(2.5 / 5) = 1.386.
    let dir = tempfile::tempdir().unwrap();
    let mut csv = HEADER.to_string();
    for (i, t) in [1.0, 2.0, 3.0, 4.0, 5.0].iter().enumerate() {
        csv.push_str(&format!("30,,v,30-{i}-0,all,mean,4,{t},10,1,3,12\n"));
    }
    fs::write(dir.path().join("aggregate.csv"), csv).unwrap();
    let out = spbp(&["summarize", "--dir", s(dir.path())]);
    let table = String::from_utf8(out.stdout).unwrap();
    let row = table.lines().nth(1).unwrap();
    assert!(row.contains("3.000 ± 1.386"), "{row}");
    assert!(row.contains("10.000 ± 0.000"), "{row}");
}

#[test]
fn summarize_missing_csv_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = spbp(&["summarize", "--dir", s(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("aggregate.csv"));
}

#[test]
fn inspect_exports_network_conflicts_and_bias() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.toml");
    fs::write(&config, MINIMAL).unwrap();
    let out = dir.path().join("inspect");
    let r = spbp(&["inspect", "--config", s(&config), "--size", "12", "--variant", "1", "--out", s(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let edges = fs::read_to_string(out.join("network.txt")).unwrap();
    for line in edges.lines().filter(|l| !l.starts_with('#')) {
        assert_eq!(line.split_whitespace().count(), 4, "{line}");
    }
    assert!(!fs::read_to_string(out.join("conflicts.txt")).unwrap().is_empty());
    assert_eq!(fs::read_to_string(out.join("bias.csv")).unwrap().lines().count(), 13);
}
