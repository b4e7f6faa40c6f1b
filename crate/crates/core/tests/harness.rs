use topopump::harness::{execute, presets, Experiment, RunConfig};

const SMALL_CTAP: &str = r#"
[chain]
family = "interfaced-ssh"
sites = 7

[schedule]
kind = "ctap-gaussian"
duration = 200
t2 = 1.0
omega_max = 0.9
width = 40
delay = 15

[sweep]
durations = [60, 120]
sizes = [3, 7, 11]

[numerics]
grid_points = 21
samples = 11
workers = 2
"#;

fn small() -> RunConfig {
    RunConfig::from_toml(SMALL_CTAP).unwrap()
}

fn golden_headers() -> Vec<(String, String)> {
    include_str!("golden/headers.csv")
        .lines()
        .map(|l| {
            let (name, header) = l.split_once(',').unwrap();
            (name.to_string(), header.to_string())
        })
        .collect()
}

#[test]
fn headers_match_golden_file() {
    let config = small();
    for (name, header) in golden_headers() {
        let (experiment, suffix) = match name.split_once('_') {
            Some((e, s)) => (e.parse::<Experiment>().unwrap(), s.to_string()),
            None => (name.parse::<Experiment>().unwrap(), String::new()),
        };
        let report = execute(&config, experiment).unwrap();
        let table = report.table_named(&suffix).unwrap();
        assert_eq!(table.header.join(","), header, "{name}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let config = small();
    for e in [
        Experiment::Spectrum,
        Experiment::SweepTime,
        Experiment::SweepSize,
        Experiment::ReducedCompare,
    ] {
        let a = execute(&config, e).unwrap();
        let b = execute(&config, e).unwrap();
        for ((_, x), (_, y)) in a.tables.iter().zip(&b.tables) {
            assert_eq!(x.to_csv_string(), y.to_csv_string(), "{e}");
        }
    }
}

#[test]
fn worker_count_does_not_change_rows() {
    let mut one = small();
    one.numerics.workers = Some(1);
    let mut three = small();
    three.numerics.workers = Some(3);
    let a = execute(&one, Experiment::SweepSize).unwrap();
    let b = execute(&three, Experiment::SweepSize).unwrap();
    assert_eq!(a.table().to_csv_string(), b.table().to_csv_string());
}

#[test]
fn sweep_size_area_shrinks_with_length() {
    let report = execute(&small(), Experiment::SweepSize).unwrap();
    let sites = report.table().column("sites").unwrap();
    assert_eq!(sites, vec![3.0, 7.0, 11.0]);
    let area = report.table().column("pulse_area").unwrap();
    assert!(area.windows(2).all(|w| w[1] < w[0]), "{area:?}");
    for p in report.table().column("transfer_probability").unwrap() {
        assert!((0.0..=1.0 + 1e-10).contains(&p));
    }
    assert_eq!(report.meta.converged, Some(true));
}

#[test]
fn three_site_chain_is_limited_by_window_truncation() {
    // T = 400 with w = 3T/10: the window cuts the pulses at ~10% of their
    // peak, so the three-site chain does not start in its dark state
    let mut config = RunConfig::from_toml(presets::preset("fig5").unwrap()).unwrap();
    config.sweep.sizes = Some(vec![3, 31]);
    let report = execute(&config, Experiment::SweepSize).unwrap();
    let p = report.table().column("transfer_probability").unwrap();
    assert!(p[0] > 0.5 && p[0] < 0.8, "{p:?}");
    assert!(p[1] > 0.95);
}

#[test]
fn spectrum_flags_three_in_gap_states() {
    let report = execute(&small(), Experiment::Spectrum).unwrap();
    let t = report.table();
    let col = t.column_index("in_gap_states").unwrap();
    for row in &t.rows {
        assert_eq!(row[col].to_string(), "3;4;5");
    }
}

#[test]
fn area_report_single_row() {
    let mut config = RunConfig::from_toml(presets::preset("fig2").unwrap()).unwrap();
    config.experiment = None;
    let report = execute(&config, Experiment::AreaReport).unwrap();
    assert_eq!(report.table().rows.len(), 1);
    let ratio = report.table().column("threshold_ratio").unwrap()[0];
    assert!(ratio > 1.0);
}

#[test]
fn evolve_fig3_ends_on_the_right_edge() {
    let config = RunConfig::from_toml(presets::preset("fig3").unwrap()).unwrap();
    let report = execute(&config, Experiment::Evolve).unwrap();
    let last = report.table().rows.last().unwrap();
    assert!(last[31].as_real().unwrap() > 0.9);
    assert!(last[1].as_real().unwrap() < 0.1);
    assert_eq!(report.table().rows.len(), 801);
}

#[test]
fn write_emits_csv_meta_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let report = execute(&small(), Experiment::ReducedCompare).unwrap();
    let files = report.write(dir.path(), true).unwrap();
    let names: Vec<String> = files
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        [
            "reduced-compare.csv",
            "reduced-compare_amplitudes.csv",
            "reduced-compare.meta.toml",
            "reduced-compare.svg",
            "reduced-compare_amplitudes.svg",
        ]
    );
    let meta = std::fs::read_to_string(dir.path().join("reduced-compare.meta.toml")).unwrap();
    assert!(meta.contains("wall_time_seconds"));
    let csv = std::fs::read_to_string(dir.path().join("reduced-compare.csv")).unwrap();
    assert!(!csv.contains("wall"));
}

#[test]
fn odd_chain_spectrum_keeps_a_zero_mode() {
    let config = RunConfig::from_toml(presets::preset("fig8b").unwrap()).unwrap();
    let report = execute(&config, Experiment::Spectrum).unwrap();
    let t = report.table();
    let zero = t.column_index("e_16").unwrap();
    for row in &t.rows {
        assert!(row[zero].as_real().unwrap().abs() < 1e-12);
    }
}
