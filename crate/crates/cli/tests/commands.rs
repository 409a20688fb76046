use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dalab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dalab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ce_reports_builtin_and_explicit_profiles() {
    let o = dalab(&["ce", "--treatment", "symmetric"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("weak CE prices:   48.00 .. 52.00"), "{text}");
    assert!(text.contains("strict CE prices: 49.00 .. 51.00"), "{text}");
    assert!(text.contains("quantity: 3"), "{text}");

    let o = dalab(&["ce", "--buyers", "10, 8", "--sellers", "2, 4"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("quantity: 2"));
}

#[test]
fn shift_commands() {
    let o = dalab(&["shift", "validate", "symmetric_to_low"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let o = dalab(&["shift", "apply", "symmetric_to_low"]);
    assert!(stdout(&o).contains("matches treatment low_values: true"));
    let o = dalab(&["shift", "fuzz", "--cases", "50", "--direction", "up", "--seed", "9"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0 moved the equilibrium set"));
}

#[test]
fn invalid_shift_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("shift.cfg");
    fs::write(
        &cfg,
        "[shift lift]\nfrom = symmetric\ndirection = down\np_star = 50\neps_minus = 2\neps_plus = 2\n\
         buyer_map = 12:12, 32:32, 52:52, 72:72, 92:92\nseller_map = 8:8, 28:60, 48:48, 68:68, 88:88\n",
    )
    .unwrap();
    let o = dalab(&["shift", "validate", "lift", "--config", path(&cfg)]);
    assert!(!o.status.success());
    assert!(stdout(&o).contains("seller map: invalid"), "{}", stdout(&o));
}

#[test]
fn simulate_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let logs = dir.path().join("logs");
    let out = dir.path().join("out");
    let o = dalab(&["simulate", "--out-dir", path(&logs), "--seed", "4"]);
    assert!(o.status.success());
    for n in 1..=6 {
        assert!(logs.join(format!("session{n}_offers.csv")).exists());
        assert!(logs.join(format!("session{n}_trades.csv")).exists());
    }
    let first = fs::read(logs.join("session1_offers.csv")).unwrap();
    assert!(first.starts_with(b"# tick_size=100; rng=chacha8; seed=4\n"));

    let o = dalab(&["analyze", path(&logs), "--out-dir", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("Marshallian paths:"));
    assert!(text.contains("kind=welch"));
    for f in ["summary.csv", "paths.csv", "trajectories.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }

    // Same seed, same bytes.
    let again = dir.path().join("again");
    assert!(dalab(&["simulate", "--out-dir", path(&again), "--seed", "4", "--parallel-sessions", "1"])
        .status
        .success());
    assert_eq!(fs::read(again.join("session1_offers.csv")).unwrap(), first);
}

#[test]
fn zero_round_session_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zero.cfg");
    fs::write(&cfg, "[session 7]\ntreatments = symmetric:0\n").unwrap();
    let logs = dir.path().join("logs");
    assert!(dalab(&["simulate", "--config", path(&cfg), "--out-dir", path(&logs)]).status.success());
    let text = fs::read_to_string(logs.join("session7_trades.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    let o = dalab(&["analyze", path(&logs)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("empty log"));
}

#[test]
fn malformed_config_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "[session 1]\ntreatments = symmetric:2\nqueue = perhaps\n").unwrap();
    let o = dalab(&["simulate", "--config", path(&cfg), "--out-dir", path(dir.path())]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn replicate_zi_small_run() {
    let o = dalab(&["replicate-zi", "--offers", "100000", "--treatment", "low_values", "--seed", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("offers: 100000"), "{text}");
    let mean: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("mean price: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((30.0..40.0).contains(&mean), "{mean}");
}

#[test]
fn analyze_missing_path_fails() {
    let o = dalab(&["analyze", "/nonexistent/dir"]);
    assert!(!o.status.success());
}
