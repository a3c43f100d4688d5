//! End-to-end tests of the `vbqc` binary: determinism, schema stability,
//! the resource guard, and the exact-mode arithmetic.

use std::path::Path;
use std::process::Command;

use vbqc_cli::report::{ResultRecord, CSV_COLUMNS};

fn vbqc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vbqc"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const HONEST_CHAIN: &str = r#"
experiment_id = "honest-chain"
m = 1
q = 0.5
trials = 400
seed = 11

[graph]
preset = "chain"
v1_count = 3

[input]
preset = "one"

[pattern]
angles = []

[strategy]
name = "honest"
"#;

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.toml", HONEST_CHAIN);
    for format in ["json", "csv"] {
        let out_a = dir.path().join(format!("a.{format}"));
        let out_b = dir.path().join(format!("b.{format}"));
        for out in [&out_a, &out_b] {
            let status = vbqc()
                .args(["run", "--config"])
                .arg(&cfg)
                .args(["--format", format, "--out"])
                .arg(out)
                .status()
                .unwrap();
            assert!(status.success());
        }
        let a = std::fs::read(&out_a).unwrap();
        let b = std::fs::read(&out_b).unwrap();
        assert_eq!(a, b, "{format} records must be byte-identical");
    }
}

#[test]
fn json_record_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.toml", HONEST_CHAIN);
    let out = dir.path().join("r.json");
    let status = vbqc()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--format", "json", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let record: ResultRecord = serde_json::from_str(&text).unwrap();
    let again: ResultRecord = serde_json::from_str(&serde_json::to_string(&record).unwrap()).unwrap();
    assert_eq!(record, again);
    assert_eq!(record.experiment_id, "honest-chain");
    assert!(record.trials == 400);
    assert_eq!(
        record.compute_trials + record.stab_trials + record.input_trials,
        record.trials
    );
    assert!((0.0..=1.0).contains(&record.p_acc));
}

#[test]
fn csv_header_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.toml", HONEST_CHAIN);
    let out = dir.path().join("r.csv");
    let status = vbqc()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--format", "csv", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, CSV_COLUMNS.join(","));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn oversized_configs_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "big.toml",
        r#"
m = 1
q = 0.5

[graph]
preset = "chain"
v1_count = 11

[input]
preset = "one"

[strategy]
name = "honest"
"#,
    );
    let output = vbqc().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("12-qubit"), "guard message, got: {stderr}");
}

#[test]
fn exact_mode_matches_branch_arithmetic() {
    // honest chain, identity program on |1⟩: the compute oracle gives 2/3,
    // both tests pass with probability 1, so p_acc = q·(2/3) + (1 − q).
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.toml", HONEST_CHAIN);
    let out = dir.path().join("r.json");
    let status = vbqc()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--mode", "exact", "--format", "json", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let record: ResultRecord =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let expected = 0.5 * (2.0 / 3.0) + 0.5;
    assert!((record.p_acc - expected).abs() < 1e-10);
    assert!((record.p_gpass.unwrap() - 1.0).abs() < 1e-10);
    assert!((record.p_psipass.unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(record.se_acc, 0.0);
}

#[test]
fn replace_input_record_sits_below_beta1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "replace.toml",
        r#"
experiment_id = "replace-zero"
m = 1
q = 0.3
trials = 4000
seed = 5

[graph]
preset = "chain"
v1_count = 3

[input]
preset = "one"

[strategy]
name = "replace_zero"
"#,
    );
    let out = dir.path().join("r.json");
    let status = vbqc()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--mode", "exact", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let record: ResultRecord =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(record.p_psipass.unwrap() < 1.0);
    assert!(
        record.p_acc < record.beta1,
        "p_acc {} must sit below β₁ {} at the measured ε {}",
        record.p_acc,
        record.beta1,
        record.epsilon
    );
}

#[test]
fn trace_file_lists_every_trial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.toml", HONEST_CHAIN);
    let out = dir.path().join("r.json");
    let trace = dir.path().join("trials.csv");
    let status = vbqc()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--trials", "50", "--out"])
        .arg(&out)
        .arg("--trace")
        .arg(&trace)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "trial,branch,accepted,secret_digest");
    assert_eq!(lines.count(), 50);
}

#[test]
fn sweep_emits_one_record_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.toml", HONEST_CHAIN);
    let out = dir.path().join("sweep.csv");
    let status = vbqc()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args([
            "--axis", "q", "--values", "0,0.5,1", "--trials", "200", "--format", "csv", "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 4, "header plus three records");
}

#[test]
fn verify_bounds_exits_cleanly() {
    let status = vbqc().args(["verify-bounds", "--seed", "9"]).status().unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn twirl_check_exits_cleanly() {
    let status = vbqc().args(["twirl-check", "--seed", "10"]).status().unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn exact_q_sweep_is_affine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.toml", HONEST_CHAIN);
    let out = dir.path().join("sweep.json");
    let status = vbqc()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--axis", "q", "--values", "0,0.5,1", "--mode", "exact", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let records: Vec<ResultRecord> =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(records.len(), 3);
    // p_acc(q) = q·(2/3) + (1 − q): midpoint sits exactly between the ends
    let mid = (records[0].p_acc + records[2].p_acc) / 2.0;
    assert!((records[1].p_acc - mid).abs() < 1e-10);
}

#[test]
fn epsilon_sweep_flags_the_gap_crossover() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.toml", HONEST_CHAIN);
    let out = dir.path().join("sweep.json");
    let output = vbqc()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args([
            "--axis", "epsilon", "--values", "0.0001,0.001,0.01", "--mode", "exact", "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("gap crossover"),
        "crossover flag missing from: {stderr}"
    );
    let records: Vec<ResultRecord> =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(records[0].gap.is_some());
    assert!(records[2].gap.is_none(), "no verifiable gap at ε = 0.01");
}
