use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::tempdir;

fn supwave(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supwave"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SUPWAVE_OUTPUT_DIR")
        .output()
        .expect("supwave binary runs")
}

fn stderr_records(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stderr).lines().filter_map(|l| serde_json::from_str(l).ok()).collect()
}

#[test]
fn zero_data_evolves_to_zero_energy() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("zero.toml"), "p = 4\nresolution = 8\nT = 0.05\n[data]\nkind = \"profile\"\namplitude = 0.0\n").unwrap();
    let out = supwave(&["--config", "zero.toml", "--output-dir", "out", "evolve"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("out/evolve.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    assert_eq!(lines.next(), Some("t,kinetic,gradient,potential,total,v_l2p,z_l2p,sum_l2p"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert!(rows.len() >= 2);
    assert!(rows.iter().all(|r| r[1..].iter().all(|&x| x == 0.0)));
    assert!(dir.path().join("out/evolve_final.swf").exists());
}

#[test]
fn config_errors_exit_with_code_two_and_a_record() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "p = 4\nresolution = 30\n").unwrap();
    let out = supwave(&["--config", "bad.toml", "lp-check"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let rec = &stderr_records(&out)[0];
    assert_eq!(rec["record"], "error");
    assert_eq!(rec["kind"], "config");
    assert_eq!(rec["issues"][0]["line"], 2);

    let out = supwave(&["lp-check"], dir.path());
    assert_eq!(out.status.code(), Some(2), "missing p is a configuration error");
}

#[test]
fn io_failures_exit_with_code_four() {
    let dir = tempdir().unwrap();
    let out = supwave(&["--config", "missing.toml", "lp-check"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr_records(&out)[0]["kind"], "io");

    fs::write(dir.path().join("blocker"), "not a directory").unwrap();
    let out = supwave(&["--p", "4", "--output-dir", "blocker/sub", "lp-check"], dir.path());
    assert_eq!(out.status.code(), Some(4));

    fs::write(dir.path().join("f.toml"), "p = 4\n[data]\nkind = \"file\"\npath = \"nowhere.swf\"\n").unwrap();
    let out = supwave(&["--config", "f.toml", "--output-dir", "o", "randomize"], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn degenerate_tail_warns_and_succeeds() {
    let dir = tempdir().unwrap();
    let out = supwave(&["--p", "4", "--resolution", "8", "--samples", "1", "--output-dir", "o", "tail"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let recs = stderr_records(&out);
    assert!(recs.iter().any(|r| r["record"] == "warning" && r["message"].as_str().unwrap().contains("degenerate")));
    let text = fs::read_to_string(dir.path().join("o/tail.ndjson")).unwrap();
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["record"], "summary");
    assert!(last["fit"].is_null());
}

#[test]
fn lp_check_passes_on_defaults() {
    let dir = tempdir().unwrap();
    let out = supwave(&["--p", "4", "--output-dir", "o", "lp-check"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("o/lp_check.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 20 * (4 + 8 + 2));
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn randomized_snapshot_feeds_back_as_file_data() {
    let dir = tempdir().unwrap();
    let out = supwave(&["--p", "4", "--resolution", "8", "--samples", "2", "--seed", "5", "--output-dir", "a", "randomize", "--sample", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("a/randomize.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 2);
    fs::write(dir.path().join("a/run.toml"), "p = 4\nresolution = 8\nT = 0.05\n[data]\nkind = \"file\"\npath = \"randomized_1.swf\"\n").unwrap();
    let out = supwave(&["--config", "a/run.toml", "--output-dir", "b", "evolve", "--deterministic"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("b/evolve.csv")).unwrap();
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!(last[4] > 0.0);
}

#[test]
fn output_dir_precedence_is_flag_then_env_then_config() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "p = 4\nresolution = 8\nsamples = 1\noutput_dir = \"from_config\"\n").unwrap();
    let run = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_supwave"));
        cmd.args(["--config", "c.toml"]).args(extra).arg("randomize").current_dir(dir.path()).env_remove("SUPWAVE_OUTPUT_DIR");
        if let Some(v) = env {
            cmd.env("SUPWAVE_OUTPUT_DIR", v);
        }
        assert_eq!(cmd.output().unwrap().status.code(), Some(0));
    };
    run(&[], None);
    assert!(dir.path().join("from_config/randomize.csv").exists());
    run(&[], Some("from_env"));
    assert!(dir.path().join("from_env/randomize.csv").exists());
    run(&["--output-dir", "from_flag"], Some("from_env2"));
    assert!(dir.path().join("from_flag/randomize.csv").exists());
    assert!(!dir.path().join("from_env2").exists());
}

#[test]
fn flags_override_config_keys() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "p = 4\nresolution = 8\nsamples = 1\nseed = 1\n").unwrap();
    let out = supwave(&["--config", "c.toml", "--seed", "77", "--samples", "3", "--output-dir", "o", "randomize"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("o/randomize.csv")).unwrap();
    assert!(text.lines().next().unwrap().contains("seed=77"));
    assert_eq!(text.lines().count(), 2 + 3);
}
