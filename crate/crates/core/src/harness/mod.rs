//! Configuration-driven experiments, CSV emission and plots.
//!
//! Every experiment maps a [`RunConfig`] to a [`Report`]: one or more tables,
//! optional plots and a metadata record. Tables are deterministic; wall-clock
//! timings live only in the metadata sidecar.

mod config;
mod experiments;
mod plot;
pub mod presets;
mod table;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::{
    ChainSection, NumericsSection, OutputSection, Range, RunConfig, ScheduleSection, SweepSection,
    DEFAULT_GRID_POINTS,
};
pub use experiments::{
    first_crossing, run_area_report, run_evolve, run_reduced_compare, run_spectrum, run_sweep_size,
    run_sweep_time, sustained_crossing, SweepRecord, CONVERGENCE_TOLERANCE, TRANSFER_THRESHOLD,
};
pub use plot::{PlotSpec, Series};
pub use table::{format_real, Cell, Table};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum,
    Evolve,
    SweepTime,
    SweepSize,
    ReducedCompare,
    AreaReport,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Spectrum,
        Experiment::Evolve,
        Experiment::SweepTime,
        Experiment::SweepSize,
        Experiment::ReducedCompare,
        Experiment::AreaReport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Evolve => "evolve",
            Experiment::SweepTime => "sweep-time",
            Experiment::SweepSize => "sweep-size",
            Experiment::ReducedCompare => "reduced-compare",
            Experiment::AreaReport => "area-report",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(#[from] Error),

    #[error("sweep did not converge: halving dt changed P by {delta:.3e}")]
    NotConverged { delta: f64 },

    #[error("I/O error on {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl HarnessError {
    /// Process exit code: 1 config, 2 numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => 1,
            HarnessError::Numerical(e) => match e {
                Error::InvalidChain(_)
                | Error::FamilyMismatch { .. }
                | Error::InvalidCouplings(_)
                | Error::InvalidSchedule(_)
                | Error::InvalidGrid(_) => 1,
                _ => 2,
            },
            HarnessError::NotConverged { .. } => 2,
            HarnessError::Io { .. } => 3,
        }
    }

    fn io(path: &Path, e: impl fmt::Display) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

/// Everything about a run that is not part of the CSV contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub experiment: Experiment,
    pub family: crate::lattice::Family,
    pub sites: usize,
    /// Step size of the reference run (absent when nothing is integrated).
    pub dt: Option<f64>,
    pub workers: usize,
    pub rows: usize,
    pub wall_time_seconds: f64,
    /// Half-step convergence guard (sweeps only).
    pub converged: Option<bool>,
    pub convergence_delta: Option<f64>,
    pub max_norm_drift: Option<f64>,
    /// Headline numbers of the run, e.g. the 0.9 crossing of a sweep.
    pub summary: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub name: String,
    /// `(suffix, table)`; the first table has an empty suffix.
    pub tables: Vec<(String, Table)>,
    pub plots: Vec<PlotSpec>,
    pub meta: RunMeta,
}

impl Report {
    pub fn table(&self) -> &Table {
        &self.tables[0].1
    }

    pub fn table_named(&self, suffix: &str) -> Option<&Table> {
        self.tables
            .iter()
            .find(|(s, _)| s == suffix)
            .map(|(_, t)| t)
    }

    fn file_name(&self, suffix: &str, ext: &str) -> String {
        if suffix.is_empty() {
            format!("{}.{ext}", self.name)
        } else {
            format!("{}_{suffix}.{ext}", self.name)
        }
    }

    /// Writes the CSV tables, the `.meta.toml` sidecar and (if asked) SVG
    /// plots into `dir`. Returns the paths written.
    pub fn write(&self, dir: &Path, plots: bool) -> Result<Vec<PathBuf>, HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let mut written = Vec::new();
        for (suffix, table) in &self.tables {
            let path = dir.join(self.file_name(suffix, "csv"));
            let file = std::fs::File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
            table
                .write_csv(std::io::BufWriter::new(file))
                .map_err(|e| HarnessError::io(&path, e))?;
            written.push(path);
        }
        let meta_path = dir.join(format!("{}.meta.toml", self.name));
        let text = toml::to_string(&self.meta).map_err(|e| HarnessError::io(&meta_path, e))?;
        std::fs::write(&meta_path, text).map_err(|e| HarnessError::io(&meta_path, e))?;
        written.push(meta_path);
        if plots {
            for p in &self.plots {
                let path = dir.join(self.file_name(&p.suffix, "svg"));
                p.render(&path).map_err(|e| HarnessError::io(&path, e))?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

/// Validates `config` for `experiment` and runs it.
pub fn execute(config: &RunConfig, experiment: Experiment) -> Result<Report, HarnessError> {
    config.validate(experiment)?;
    let started = std::time::Instant::now();
    let mut report = match experiment {
        Experiment::Spectrum => run_spectrum(config),
        Experiment::Evolve => run_evolve(config),
        Experiment::SweepTime => run_sweep_time(config),
        Experiment::SweepSize => run_sweep_size(config),
        Experiment::ReducedCompare => run_reduced_compare(config),
        Experiment::AreaReport => run_area_report(config),
    }?;
    report.meta.wall_time_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Loads a config from a file, or from the shipped presets when `source`
/// names one and no such file exists.
pub fn load_config(source: &Path) -> Result<RunConfig, HarnessError> {
    if !source.exists() {
        if let Some(text) = source.to_str().and_then(presets::preset) {
            return RunConfig::from_toml(text);
        }
    }
    let text = std::fs::read_to_string(source).map_err(|e| HarnessError::io(source, e))?;
    RunConfig::from_toml(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("nope".parse::<Experiment>().is_err());
    }

    #[test]
    fn exit_codes() {
        let c = HarnessError::Config {
            path: "x".into(),
            message: "y".into(),
        };
        assert_eq!(c.exit_code(), 1);
        assert_eq!(
            HarnessError::Numerical(Error::NoConvergence(3)).exit_code(),
            2
        );
        assert_eq!(
            HarnessError::Numerical(Error::InvalidSchedule("x".into())).exit_code(),
            1
        );
        assert_eq!(HarnessError::NotConverged { delta: 1.0 }.exit_code(), 2);
        let io = HarnessError::io(Path::new("/x"), "denied");
        assert_eq!(io.exit_code(), 3);
    }

    #[test]
    fn missing_file_is_io_error() {
        let e = load_config(Path::new("/definitely/not/here.toml")).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn preset_names_resolve() {
        let c = load_config(Path::new("fig3")).unwrap();
        assert_eq!(c.chain.sites, 31);
    }
}
