use std::path::Path;
use std::process::{Command, Output};

fn topopump(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topopump"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

const AREA: &str = r#"
[chain]
family = "interfaced-ssh"
sites = 15

[schedule]
kind = "ctap-gaussian"
duration = 400
t2 = 1.0
omega_max = 0.9
"#;

#[test]
fn preset_run_writes_csv_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let out = topopump(
        &["evolve", "--config", "fig3", "--out", "res", "--plot"],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in ["fig3.csv", "fig3.meta.toml", "fig3.svg"] {
        assert!(dir.path().join("res").join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("res/fig3.csv")).unwrap();
    assert!(csv.starts_with("time,p_1,p_2,"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("area.toml"), AREA).unwrap();
    let out = topopump(
        &[
            "area-report",
            "--config",
            "area.toml",
            "--out",
            ".",
            "--dt",
            "0.05",
            "--workers",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("area-report.csv")).unwrap();
    assert!(csv
        .starts_with("sites,duration,width,delay,pulse_area,threshold_ratio,edge_truncation\n15,"));
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        AREA.replace("sites = 15", "sites = 14"),
    )
    .unwrap();
    let out = topopump(&["area-report", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("chain.sites"));

    // preset declares a different experiment
    let out = topopump(&["evolve", "--config", "fig2"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    let out = topopump(&["area-report", "--config", "area.toml"], dir.path());
    assert_eq!(out.status.code(), Some(3), "missing file is I/O");

    std::fs::write(dir.path().join("ok.toml"), AREA).unwrap();
    let out = topopump(
        &["area-report", "--config", "ok.toml", "--dt=-1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerics.dt"));
}

#[test]
fn unknown_experiment_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = topopump(&["bogus", "--config", "fig2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ok.toml"), AREA).unwrap();
    std::fs::write(dir.path().join("blocker"), "not a directory").unwrap();
    let out = topopump(
        &["area-report", "--config", "ok.toml", "--out", "blocker/sub"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn failed_convergence_guard_exits_2() {
    // a step far too large for the dynamics changes P when halved
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("coarse.toml"),
        format!("{AREA}\n[sweep]\ndurations = [20, 40]\n"),
    )
    .unwrap();
    let out = topopump(
        &["sweep-time", "--config", "coarse.toml", "--dt", "5"],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("out/sweep-time.csv").exists());
    let meta = std::fs::read_to_string(dir.path().join("out/sweep-time.meta.toml")).unwrap();
    assert!(meta.contains("converged = false"));
}
