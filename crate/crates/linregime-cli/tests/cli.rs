use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_linregime"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn simulate_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one.conf");
    std::fs::write(&cfg, "d = 6\nN = 12\nn = 40\nn_test = 50\n").unwrap();
    let out = dir.path().join("one.csv");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "model,target,d,N,p,n,lambda,seed,train_mse,test_mse,R0,normalized_risk,elapsed_s");
    assert_eq!(lines.len(), 2);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("smoke.conf");
    let mut outputs = Vec::new();
    for threads in ["1", "1", "4"] {
        let out = dir.path().join(format!("run{}.csv", outputs.len()));
        let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success());
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let other = dir.path().join("other.csv");
    run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", other.to_str().unwrap(), "--seed", "99"]);
    assert_ne!(std::fs::read(other).unwrap(), outputs[0]);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "model = rf\nwidth = 3\n").unwrap();
    let o = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    let o = run(&["simulate", "--config", dir.path().join("missing.conf").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["theorem-check", "nonsense"]).status.code(), Some(2));
}

#[test]
fn spectrum_and_gram_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.conf");
    std::fs::write(&cfg, "d = 10\nmax_degree = 4\nN = 10\nrepetitions = 2\n").unwrap();
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let s = String::from_utf8(o.stdout).unwrap();
    assert_eq!(s.lines().next(), Some("d,k,xi,B,xi_times_B"));
    assert_eq!(s.lines().count(), 6);
    let o = run(&["gram", "--config", cfg.to_str().unwrap()]);
    let s = String::from_utf8(o.stdout).unwrap();
    assert_eq!(s.lines().next(), Some("d,k,N,seed,opnorm_deviation"));
    assert_eq!(s.lines().count(), 3);
}

#[test]
fn theorem_checks_report_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("i.conf");
    std::fs::write(&cfg, "d = 12\nn = 100\nlambda = 0\nrepetitions = 2\n").unwrap();
    let o = run(&["theorem-check", "interpolator_bound", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("interpolator_bound: PASS"));

    let o = run(&["theorem-check", "gram_concentration"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));

    // a concentration claim that cannot hold when N is far above d^k
    let bad = dir.path().join("g.conf");
    std::fs::write(&bad, "d = 10\nN = 300\ndegree = 1\nd_grid = 10, 20\nrepetitions = 1\n").unwrap();
    let o = run(&["theorem-check", "gram_concentration", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn shipped_configs_parse() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let p = entry.unwrap().path();
        let name = p.file_name().unwrap().to_str().unwrap().to_string();
        if name.starts_with("check_") {
            continue;
        }
        linregime::experiment::ExperimentConfig::from_file(&p).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
