//! End-to-end tests of the `qsurf` binary: artifact contents, exit codes,
//! and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qsurf"))
}

/// Fresh scratch directory per test invocation.
fn scratch(tag: &str) -> PathBuf {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!(
        "qsurf-cli-{}-{tag}-{}",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_disk_reports_gauss_flux() {
    let dir = scratch("solve-disk");
    let out_dir = dir.join("o");
    let out = run(&[
        "solve",
        "preset=disk",
        "radius=3",
        "a=1",
        "n=129",
        "solver_tol=1e-6",
        &format!("out_dir={}", out_dir.display()),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = json(&out_dir.join("solve_summary.json"));
    let flux = summary["gauss_flux"].as_f64().unwrap();
    assert!(
        (flux - 2.0).abs() < 1e-3,
        "Gauss flux should be 2a = 2, got {flux}"
    );
    let csv = std::fs::read_to_string(out_dir.join("flux_profile.csv")).unwrap();
    assert!(csv.starts_with("x,y,nx,ny,weight,flux,g"));
    assert_eq!(csv.lines().count(), 1 + 256, "one row per boundary node");
}

#[test]
fn solve_stadium_lists_two_type_one_arcs() {
    let dir = scratch("solve-stadium");
    let out_dir = dir.join("o");
    let out = run(&[
        "solve",
        "preset=stadium",
        "radius=1",
        "a=1",
        "n=129",
        "solver_tol=1e-3",
        &format!("out_dir={}", out_dir.display()),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = json(&out_dir.join("solve_summary.json"));
    let type_one = summary["arcs"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|a| a["arc_type"] == "I")
        .count();
    assert_eq!(type_one, 2, "stadium caps are two Type I arcs");
}

#[test]
fn malformed_polyline_exits_2_with_line_number() {
    let dir = scratch("bad-polyline");
    let path = dir.join("bad.txt");
    std::fs::write(&path, "# header\n0.0 1.0 -1.0\n0.5 oops -1.0\n").unwrap();
    let out = run(&["solve", &format!("boundary={}", path.display())]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "diagnostic names the line: {err}");
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = scratch("bad-config");
    let path = dir.join("run.cfg");
    std::fs::write(&path, "a = 4.0\nbogus_key = 1\n").unwrap();
    let out = run(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus_key"));
}

#[test]
fn config_file_with_overrides_drives_minimize() {
    let dir = scratch("config");
    let out_dir = dir.join("o");
    let cfg = dir.join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "# reproducible run\na = 1.5\nk = 1.0\nn = 65\nout_dir = {}\n",
            out_dir.display()
        ),
    )
    .unwrap();
    // Override a upward: 4.0 > 2k, so the run must now converge instead of
    // collapsing; this proves the override wins over the file.
    let out = bin()
        .args(["minimize", "--config", cfg.to_str().unwrap(), "a=4.0"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = json(&out_dir.join("minimize_result.json"));
    assert_eq!(summary["status"], "converged");
    assert_eq!(summary["a"].as_f64(), Some(4.0));
    assert_eq!(summary["verification"]["all_pass"], true);
}

#[test]
fn minimize_collapse_is_a_valid_outcome_exit_zero() {
    let dir = scratch("collapse");
    let out_dir = dir.join("o");
    let out = run(&[
        "minimize",
        "a=1.5",
        "k=1",
        "n=65",
        &format!("out_dir={}", out_dir.display()),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "collapse is scientific, not an error"
    );
    let summary = json(&out_dir.join("minimize_result.json"));
    assert_eq!(summary["status"], "collapsed-onto-c");
}

#[test]
fn minimize_max_iter_one_writes_partial_artifacts() {
    let dir = scratch("partial");
    let out_dir = dir.join("o");
    let out = run(&[
        "minimize",
        "a=4",
        "n=65",
        "max_iter=1",
        &format!("out_dir={}", out_dir.display()),
    ]);
    assert!(out.status.success());
    let summary = json(&out_dir.join("minimize_result.json"));
    assert_eq!(summary["status"], "max-iterations");
    for name in ["boundary.txt", "flux_residual.csv"] {
        assert!(out_dir.join(name).exists(), "missing artifact {name}");
    }
}

#[test]
fn minimize_boundary_artifact_round_trips_through_check() {
    let dir = scratch("roundtrip");
    let out_dir = dir.join("o");
    let out = run(&[
        "minimize",
        "a=4",
        "n=65",
        &format!("out_dir={}", out_dir.display()),
    ]);
    assert!(out.status.success());
    let boundary = out_dir.join("boundary.txt");
    let out = run(&["check", "--boundary", boundary.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("gnp = passed"));
}

#[test]
fn sweep_workers_produce_byte_identical_csv() {
    let dir = scratch("determinism");
    let (o1, o4) = (dir.join("w1"), dir.join("w4"));
    for (out_dir, workers) in [(&o1, "1"), (&o4, "4")] {
        let out = run(&[
            "sweep",
            "ratios=1.2,4.0",
            "n=65",
            "bracket_width=4",
            &format!("workers={workers}"),
            &format!("out_dir={}", out_dir.display()),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let text = stdout(&out);
        assert!(text.contains("bracket = ["), "bracket printed: {text}");
    }
    let csv1 = std::fs::read(o1.join("sweep.csv")).unwrap();
    let csv4 = std::fs::read(o4.join("sweep.csv")).unwrap();
    assert_eq!(csv1, csv4, "worker count must not change the CSV");
}

#[test]
fn sweep_single_ratio_flags_missing_bracket() {
    let dir = scratch("nobracket");
    let out_dir = dir.join("o");
    let out = run(&[
        "sweep",
        "ratios=4.0",
        "n=65",
        &format!("out_dir={}", out_dir.display()),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("bracket-not-found"));
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2, "header plus the single entry");
}

#[test]
fn check_ellipse_reports_gnp_failure_with_violations() {
    let out = run(&["check", "preset=ellipse", "semi_x=2", "semi_y=1", "n=129"]);
    assert!(out.status.success(), "a failed check is still a clean run");
    let text = stdout(&out);
    assert!(text.contains("gnp = failed"));
    assert!(text.contains("violation:"), "violations listed: {text}");
}

#[test]
fn check_offset_disk_reports_s_near_half() {
    let out = run(&["check", "preset=disk", "center_x=0.5", "radius=2", "n=129"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("gnp = passed"));
    let range = text
        .lines()
        .find(|l| l.starts_with("s_range"))
        .expect("s range printed");
    // Both ends of the reported range sit at s = 0.5 for a disk centered
    // at (0.5, 0).
    for token in range
        .trim_start_matches("s_range = [")
        .trim_end_matches(']')
        .split(", ")
    {
        let v: f64 = token.parse().unwrap();
        assert!((v - 0.5).abs() < 1e-6, "s should be 0.5, got {v}");
    }
}

#[test]
fn check_steiner_preserves_area_and_symmetrizes() {
    let dir = scratch("steiner");
    let out_dir = dir.join("o");
    let out = run(&[
        "check",
        "--steiner",
        "1.0",
        "preset=disk",
        "center_x=0.3",
        "radius=2",
        "n=129",
        &format!("out_dir={}", out_dir.display()),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let grab = |key: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with(key))
            .and_then(|l| l.split(" = ").nth(1))
            .and_then(|v| v.parse().ok())
            .unwrap_or_else(|| panic!("{key} printed"))
    };
    let before = grab("area_before");
    let after = grab("area_after");
    assert!(
        (before - after).abs() <= 1e-12 * before,
        "area drifted: {before} vs {after}"
    );
    // The written boundary is mirror-symmetric line by line.
    let sym = std::fs::read_to_string(out_dir.join("steiner.txt")).unwrap();
    for line in sym.lines().filter(|l| !l.starts_with('#')) {
        let mut it = line.split_whitespace();
        let _x: f64 = it.next().unwrap().parse().unwrap();
        let phi1: f64 = it.next().unwrap().parse().unwrap();
        let phi2: f64 = it.next().unwrap().parse().unwrap();
        assert!((phi1 + phi2).abs() < 1e-15, "slice off axis: {line}");
    }
}
