use std::process::{Command, Output};

use combgame::experiments::{read_csv, SUMMARY_HEADER, TRACE_HEADER};
use combgame::learners::LearnerKind;

fn combgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_combgame"))
        .args(args)
        .env_remove("COMBGAME_WORKERS")
        .output()
        .expect("spawn combgame")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_writes_one_row_per_learner() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let o = combgame(&[
        "run", "--d", "5", "--k", "3", "--learner", "lloo,uniform", "--runs", "4", "--seed", "2", "--workers", "2",
        "--out", path.to_str().unwrap(),
    ]);
    stdout(&o);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), SUMMARY_HEADER);
    let rows = read_csv(&path).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0].learner, rows[1].learner), (LearnerKind::Lloo, LearnerKind::Uniform));
    assert!(rows.iter().all(|r| r.runs == 4 && r.d == 5 && r.scenario == "uniform-matroid-d5-k3"));
}

#[test]
fn run_is_reproducible_across_worker_counts() {
    let base = ["run", "--scenario", "grid-network", "--n-s", "4", "--learner", "ofw", "--runs", "6", "--seed", "5"];
    let strip = |s: String| -> Vec<String> {
        // Drop the timing column before comparing.
        s.lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(11);
                f.join(",")
            })
            .collect()
    };
    let one = strip(stdout(&combgame(&[&base[..], &["--workers", "1"]].concat())));
    let three = strip(stdout(&combgame(&[&base[..], &["--workers", "3"]].concat())));
    assert_eq!(one, three);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        format!(
            "learners = [\"adahedge\"]\nruns = 3\nseed = 1\nworkers = 1\ndelta = 0.05\nout = {:?}\n\n[scenario]\nkind = \"uniform-matroid\"\nd = 10\nk = 2\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    stdout(&combgame(&["run", "--config", cfg.to_str().unwrap(), "--d", "5"]));
    let rows = read_csv(&out).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0].learner, rows[0].d, rows[0].runs, rows[0].delta), (LearnerKind::AdaHedge, 5, 3, 0.05));
}

#[test]
fn workers_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_combgame"))
        .args(["run", "--runs", "2", "--learner", "uniform"])
        .env("COMBGAME_WORKERS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 2);
}

#[test]
fn complexity_reports_value_and_bound() {
    let text = stdout(&combgame(&["complexity", "--d", "5", "--k", "3", "--max-iter", "5000"]));
    let value: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("complexity "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 0.0025).abs() < 1e-5, "{text}");
    assert!(text.contains("lower bound on E[tau] at delta = 0.1"));
}

#[test]
fn trace_ends_with_stopping_round() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let o = combgame(&[
        "trace", "--scenario", "line-network", "--n-n", "2", "--n-l", "2", "--learner", "lloo", "--seed", "4", "--out",
        path.to_str().unwrap(),
    ]);
    stdout(&o);
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], TRACE_HEADER);
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    assert_eq!(last[1], "");
    let stat: f64 = last[2].parse().unwrap();
    let beta: f64 = last[3].parse().unwrap();
    assert!(stat > beta);
    assert!(String::from_utf8_lossy(&o.stderr).contains("stopped at t = "));
}

#[test]
fn bad_input_fails_cleanly() {
    let o = combgame(&["run", "--learner", "nope"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown learner"));
    let o = combgame(&["run", "--scenario", "line-network", "--n-n", "2"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("needs n_l"));
    let o = combgame(&["run", "--config", "/nonexistent/run.toml"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/run.toml"));
}
