use std::fs;
use std::process::{Command, Output};

fn bravo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bravo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_converges_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let o = bravo(&["solve", "--problem", "logbarrier", "--out", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("converged after"), "{text}");
    let csv = fs::read_to_string(&trace).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iter,f,grad_norm,time,energy,restarted,looped"));
    assert!(lines.count() > 10);
}

#[test]
fn iteration_cap_exits_with_two() {
    let o = bravo(&["solve", "--problem", "illcond", "--max-iters", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("not converged within 3"));
}

#[test]
fn configuration_errors_exit_with_three() {
    let cases: &[&[&str]] = &[
        &["solve", "--family", "expo", "--eta", "0"],
        &["solve", "--family", "expo", "--p", "4"],
        &["solve", "--problem", "nosuch"],
        &["solve", "--pring", "2", "--loop", "mult:0.8"],
        &["solve", "--loop", "sub:0.5"],
        &["solve", "--delta", "-1"],
        &["solve", "--q0", "1,2,3"],
        &["sweep", "--axis", "C:1:0:3", "--out", "/dev/null"],
        &["sweep", "--axis", "h:1e-3:1:3", "--axis", "h:1e-3:1:3", "--out", "/dev/null"],
        &["rate-check", "--family", "expo2poly"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = bravo(args);
        assert_eq!(o.status.code(), Some(3), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn help_exits_cleanly() {
    let o = bravo(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("rate-check"));
}

#[test]
fn adaptive_family_runs_without_looping() {
    let o = bravo(&["solve", "--problem", "entropy", "--integrator", "htvi", "--pring", "2", "--h", "1e-3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("looping      off"));
}

#[test]
fn sweep_writes_grid_and_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    let svg = dir.path().join("grid.svg");
    let o = bravo(&[
        "sweep",
        "--problem",
        "logbarrier",
        "--axis",
        "C:1e-3:1e2:6",
        "--axis",
        "h:1e-3:0.5:5",
        "--max-iters",
        "2000",
        "--threads",
        "2",
        "--out",
        grid.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&grid).unwrap();
    assert_eq!(csv.lines().count(), 1 + 30);
    assert!(csv.starts_with("C,h,status,iters,final_error,restarts,loops"));
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    assert!(stdout(&o).contains("best"));
}

#[test]
fn compare_writes_one_trace_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let o = bravo(&[
        "compare",
        "--problem",
        "illcond",
        "--baseline-h",
        "0.005",
        "--method",
        "nag,bravo",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["bravo.csv", "nag.csv"]);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("nag") && l.contains("converged")), "{text}");
}

#[test]
fn rate_check_prints_csv() {
    let o = bravo(&["rate-check", "--problem", "illcond", "--p", "6", "--C", "1e-3", "--t-end", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,error"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 1.0);
    assert!(first[1] > 0.0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("envelope slope"));
}
