use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn phcsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phcsim")).args(args).output().unwrap()
}

fn table1() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs/table1.cfg")
        .display()
        .to_string()
}

fn small_run(out: &Path, extra: &[&str]) -> Output {
    let out = out.display().to_string();
    let mut args = vec!["run", &table1()[..], "--reps", "2", "--horizon", "4", "--warmup", "2", "--out", &out[..]]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    phcsim(&refs)
}

#[test]
fn validate_passes_by_default() {
    let out = phcsim(&["validate", "--pk-customers", "200000"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("residual approximation"));
    for station in ["ncd", "doc", "lab", "pharmacy"] {
        assert!(text.lines().any(|l| l.starts_with(station)), "{station}");
    }
    assert!(!text.contains("FAIL"));
}

#[test]
fn validate_fails_under_a_sabotaged_tolerance() {
    let out = phcsim(&["validate", "--pk-customers", "20000", "--pk-tolerance", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL] M/G/1"));
    let out = phcsim(&["validate", "--pk-customers", "20000", "--gap-ratio", "0.01"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn run_writes_report_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.log");
    let out = small_run(dir.path(), &["--trace", &trace.display().to_string()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "outcome,none.mean,none.sd,predicted.mean,predicted.sd,oracle.mean,oracle.sd"
    );
    assert!(csv.lines().any(|l| l.starts_with("delta.los,")));
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("Disparity across facilities"));
    assert!(summary.contains("With predicted LOS"));
    let trace = fs::read_to_string(trace).unwrap();
    assert!(trace.starts_with("# policy none"));
    assert!(trace.lines().nth(1).unwrap().split('\t').count() == 6);
}

#[test]
fn no_diversion_reports_zero_beta() {
    let dir = tempfile::tempdir().unwrap();
    let out = small_run(dir.path(), &["--policy", "none"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let beta = csv.lines().find(|l| l.starts_with("beta,")).unwrap();
    assert_eq!(beta, "beta,0.0000,0.0000");
}

#[test]
fn same_seed_gives_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(small_run(a.path(), &["--seed", "5", "--jobs", "1"]).status.success());
    assert!(small_run(b.path(), &["--seed", "5", "--jobs", "2"]).status.success());
    let ra = fs::read(a.path().join("report.csv")).unwrap();
    let rb = fs::read(b.path().join("report.csv")).unwrap();
    assert_eq!(ra, rb);
    let c = tempfile::tempdir().unwrap();
    assert!(small_run(c.path(), &["--seed", "6"]).status.success());
    assert_ne!(ra, fs::read(c.path().join("report.csv")).unwrap());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().display().to_string();
    let out = phcsim(&["run", &table1(), "--horizon", "4", "--warmup", "4", "--out", &out_dir]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warmup_days"));
    let out = small_run(dir.path(), &["--set", "PHC9.p_lab=0.2"]);
    assert_eq!(out.status.code(), Some(2));
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "[scenario]\nreplications = -3\n").unwrap();
    let out = phcsim(&["run", &bad.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("replications") && err.contains("travel"), "{err}");
}

#[test]
fn io_errors_exit_with_four() {
    let out = phcsim(&["run", "/nonexistent/scenario.cfg"]);
    assert_eq!(out.status.code(), Some(4));
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = small_run(&blocker.join("sub"), &[]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn set_overrides_reach_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = small_run(dir.path(), &["--policy", "none", "--set", "PHC2.interarrival=9"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let delta = csv.lines().find(|l| l.starts_with("delta.los,")).unwrap();
    let value: f64 = delta.split(',').nth(1).unwrap().parse().unwrap();
    assert!(value < 50.0, "{delta}");
}
