//! TOML run configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{Experiment, HarnessError};
use crate::lattice::{ChainSpec, Family};
use crate::protocols::{CtapPulse, Schedule, ScheduleKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// When present, must agree with the experiment requested on the command line.
    pub experiment: Option<Experiment>,
    pub chain: ChainSection,
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub family: Family,
    pub sites: usize,
}

/// Protocol parameters. Which keys are required depends on `kind`:
/// `ctap-gaussian` needs `duration`, `t2`, `omega_max` and optionally
/// `width` and `delay` (both or neither; absent means `w = 3T/10`, `δ = w/3`);
/// `rice-mele-loop` needs `duration` (the period), `t0` and `delta`;
/// `half-cycle-cosine` needs `duration` and `t0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub kind: ScheduleKind,
    pub duration: Option<f64>,
    pub t2: Option<f64>,
    pub omega_max: Option<f64>,
    pub width: Option<f64>,
    pub delay: Option<f64>,
    pub t0: Option<f64>,
    pub delta: Option<f64>,
}

/// Inclusive arithmetic range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub durations: Option<Vec<f64>>,
    pub duration_range: Option<Range>,
    pub sizes: Option<Vec<usize>>,
    /// Rice-Mele staggered-potential amplitudes; one curve per value.
    pub deltas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    pub dt: Option<f64>,
    /// Trajectory samples for `evolve` and `reduced-compare`.
    pub samples: Option<usize>,
    pub workers: Option<usize>,
    /// Times in the spectrum grid (window endpoints included).
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    /// Base file name; defaults to the experiment name.
    pub name: Option<String>,
    #[serde(default)]
    pub plot: bool,
}

pub const DEFAULT_GRID_POINTS: usize = 401;

fn config_error(path: &str, message: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        path: path.into(),
        message: message.into(),
    }
}

fn require(path: &str, value: Option<f64>) -> Result<f64, HarnessError> {
    let v = value.ok_or_else(|| config_error(path, "missing"))?;
    if !v.is_finite() {
        return Err(config_error(path, format!("must be finite, got {v}")));
    }
    Ok(v)
}

fn positive(path: &str, value: Option<f64>) -> Result<f64, HarnessError> {
    let v = require(path, value)?;
    if v <= 0.0 {
        return Err(config_error(path, format!("must be positive, got {v}")));
    }
    Ok(v)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let location = e
                .span()
                .map(|s| {
                    let line = text[..s.start].lines().count().max(1);
                    format!("line {line}")
                })
                .unwrap_or_else(|| "document".into());
            config_error(&location, message)
        })
    }

    /// Checks every cross-field constraint the chosen experiment relies on.
    pub fn validate(&self, experiment: Experiment) -> Result<(), HarnessError> {
        if let Some(declared) = self.experiment {
            if declared != experiment {
                return Err(config_error(
                    "experiment",
                    format!("config is for `{declared}`, requested `{experiment}`"),
                ));
            }
        }
        self.chain_spec(self.chain.sites)?;
        if self.schedule.kind.family() != self.chain.family {
            return Err(config_error(
                "schedule.kind",
                format!(
                    "{:?} drives the {} chain, not {}",
                    self.schedule.kind,
                    self.schedule.kind.family(),
                    self.chain.family
                ),
            ));
        }
        self.check_schedule_keys()?;

        let n = &self.numerics;
        if let Some(dt) = n.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(config_error(
                    "numerics.dt",
                    format!("must be positive, got {dt}"),
                ));
            }
        }
        if n.samples.is_some_and(|s| s < 2) {
            return Err(config_error("numerics.samples", "need at least 2"));
        }
        if n.workers == Some(0) {
            return Err(config_error("numerics.workers", "must be at least 1"));
        }
        if n.grid_points.is_some_and(|g| g < 2) {
            return Err(config_error("numerics.grid_points", "need at least 2"));
        }
        if let Some(name) = &self.output.name {
            if name.is_empty() || name.contains(['/', '\\']) {
                return Err(config_error("output.name", "must be a plain file stem"));
            }
        }

        match experiment {
            Experiment::SweepTime => {
                let durations = self.durations()?;
                for (i, d) in durations.iter().enumerate() {
                    positive(&format!("sweep.durations[{i}]"), Some(*d))?;
                }
                if let Some(deltas) = &self.sweep.deltas {
                    if self.schedule.kind != ScheduleKind::RiceMeleLoop {
                        return Err(config_error(
                            "sweep.deltas",
                            "only meaningful for rice-mele-loop",
                        ));
                    }
                    if deltas.is_empty() {
                        return Err(config_error("sweep.deltas", "empty list"));
                    }
                }
                for (i, &d) in self.deltas().iter().enumerate() {
                    self.schedule_for(durations[0], d)
                        .map_err(|e| config_error(&format!("sweep.deltas[{i}]"), e.to_string()))?;
                }
            }
            Experiment::SweepSize => {
                let sizes = self
                    .sweep
                    .sizes
                    .as_ref()
                    .ok_or_else(|| config_error("sweep.sizes", "missing"))?;
                if sizes.is_empty() {
                    return Err(config_error("sweep.sizes", "empty list"));
                }
                for (i, &s) in sizes.iter().enumerate() {
                    self.chain_spec(s).map_err(|e| match e {
                        HarnessError::Config { message, .. } => {
                            config_error(&format!("sweep.sizes[{i}]"), message)
                        }
                        other => other,
                    })?;
                }
            }
            Experiment::ReducedCompare | Experiment::AreaReport => {
                if self.chain.family != Family::InterfacedSsh {
                    return Err(config_error(
                        "chain.family",
                        format!("{experiment} needs the interfaced-ssh chain"),
                    ));
                }
            }
            Experiment::Spectrum | Experiment::Evolve => {}
        }
        Ok(())
    }

    fn check_schedule_keys(&self) -> Result<(), HarnessError> {
        let s = &self.schedule;
        let unused = |name: &str, v: Option<f64>| {
            if v.is_some() {
                Err(config_error(
                    &format!("schedule.{name}"),
                    format!("not used by {:?}", s.kind),
                ))
            } else {
                Ok(())
            }
        };
        match s.kind {
            ScheduleKind::CtapGaussian => {
                unused("t0", s.t0)?;
                unused("delta", s.delta)?;
                let t2 = positive("schedule.t2", s.t2)?;
                let om = positive("schedule.omega_max", s.omega_max)?;
                if om >= t2 {
                    return Err(config_error(
                        "schedule.omega_max",
                        format!("must be below schedule.t2 = {t2}, got {om}"),
                    ));
                }
                match (s.width, s.delay) {
                    (Some(_), Some(_)) => {
                        positive("schedule.width", s.width)?;
                        let d = require("schedule.delay", s.delay)?;
                        if d < 0.0 {
                            return Err(config_error("schedule.delay", "must be non-negative"));
                        }
                    }
                    (None, None) => {}
                    (Some(_), None) => {
                        return Err(config_error("schedule.delay", "required when width is set"))
                    }
                    (None, Some(_)) => {
                        return Err(config_error("schedule.width", "required when delay is set"))
                    }
                }
            }
            ScheduleKind::RiceMeleLoop => {
                for (name, v) in [
                    ("t2", s.t2),
                    ("omega_max", s.omega_max),
                    ("width", s.width),
                    ("delay", s.delay),
                ] {
                    unused(name, v)?;
                }
                positive("schedule.t0", s.t0)?;
                require("schedule.delta", s.delta)?;
            }
            ScheduleKind::HalfCycleCosine => {
                for (name, v) in [
                    ("t2", s.t2),
                    ("omega_max", s.omega_max),
                    ("width", s.width),
                    ("delay", s.delay),
                    ("delta", s.delta),
                ] {
                    unused(name, v)?;
                }
                positive("schedule.t0", s.t0)?;
            }
        }
        positive("schedule.duration", s.duration)?;
        Ok(())
    }

    pub fn chain_spec(&self, sites: usize) -> Result<ChainSpec, HarnessError> {
        ChainSpec::from_sites(self.chain.family, sites)
            .map_err(|e| config_error("chain.sites", e.to_string()))
    }

    /// The schedule as written, at the configured duration.
    pub fn schedule(&self) -> Result<Schedule, HarnessError> {
        let s = &self.schedule;
        self.schedule_for(
            positive("schedule.duration", s.duration)?,
            s.delta.unwrap_or(0.0),
        )
    }

    /// Schedule with the duration (and, for Rice-Mele, `delta`) replaced.
    pub fn schedule_for(&self, duration: f64, delta: f64) -> Result<Schedule, HarnessError> {
        let s = &self.schedule;
        let built = match s.kind {
            ScheduleKind::CtapGaussian => {
                let t2 = positive("schedule.t2", s.t2)?;
                let om = positive("schedule.omega_max", s.omega_max)?;
                match (s.width, s.delay) {
                    (Some(width), Some(delay)) => Schedule::ctap(
                        CtapPulse {
                            t2,
                            omega_max: om,
                            width,
                            delay,
                        },
                        duration,
                    ),
                    _ => Schedule::ctap_scaled(duration, om, t2),
                }
            }
            ScheduleKind::RiceMeleLoop => {
                Schedule::rice_mele(positive("schedule.t0", s.t0)?, delta, duration)
            }
            ScheduleKind::HalfCycleCosine => {
                Schedule::half_cycle(positive("schedule.t0", s.t0)?, duration)
            }
        };
        built.map_err(|e| config_error("schedule", e.to_string()))
    }

    /// Sweep durations, ascending as written.
    pub fn durations(&self) -> Result<Vec<f64>, HarnessError> {
        let values = match (&self.sweep.durations, &self.sweep.duration_range) {
            (Some(_), Some(_)) => {
                return Err(config_error(
                    "sweep",
                    "give either durations or duration_range, not both",
                ))
            }
            (Some(list), None) => list.clone(),
            (None, Some(r)) => {
                if !(r.step > 0.0) || r.stop < r.start {
                    return Err(config_error(
                        "sweep.duration_range",
                        "need step > 0 and stop >= start",
                    ));
                }
                r.values()
            }
            (None, None) => return Err(config_error("sweep.durations", "missing")),
        };
        if values.is_empty() {
            return Err(config_error("sweep.durations", "empty list"));
        }
        Ok(values)
    }

    /// Staggered-potential values to sweep; a single entry outside Rice-Mele.
    pub fn deltas(&self) -> Vec<f64> {
        match &self.sweep.deltas {
            Some(d) => d.clone(),
            None => vec![self.schedule.delta.unwrap_or(0.0)],
        }
    }

    pub fn grid_points(&self) -> usize {
        self.numerics.grid_points.unwrap_or(DEFAULT_GRID_POINTS)
    }

    pub fn samples(&self) -> usize {
        self.numerics
            .samples
            .unwrap_or(crate::evolution::DEFAULT_SAMPLES)
    }

    pub fn workers(&self) -> usize {
        self.numerics.workers.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CTAP: &str = r#"
[chain]
family = "interfaced-ssh"
sites = 31

[schedule]
kind = "ctap-gaussian"
duration = 800
t2 = 1.0
omega_max = 0.9
width = 150
delay = 50
"#;

    fn path_of(e: HarnessError) -> String {
        match e {
            HarnessError::Config { path, .. } => path,
            other => panic!("not a config error: {other}"),
        }
    }

    #[test]
    fn parses_minimal_ctap() {
        let c = RunConfig::from_toml(CTAP).unwrap();
        c.validate(Experiment::Evolve).unwrap();
        assert!(
            matches!(c.schedule().unwrap(), Schedule::Ctap { duration, .. } if duration == 800.0)
        );
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let text = CTAP.replace("t2 = 1.0", "t2 = 1.0\ntypo = 3");
        let e = RunConfig::from_toml(&text).unwrap_err();
        assert!(path_of(e).starts_with("line"));
    }

    #[test]
    fn omega_above_t2_names_the_field() {
        let text = CTAP.replace("omega_max = 0.9", "omega_max = 1.2");
        let c = RunConfig::from_toml(&text).unwrap();
        assert_eq!(
            path_of(c.validate(Experiment::Evolve).unwrap_err()),
            "schedule.omega_max"
        );
    }

    #[test]
    fn even_site_count_is_rejected() {
        let c = RunConfig::from_toml(&CTAP.replace("sites = 31", "sites = 30")).unwrap();
        assert_eq!(
            path_of(c.validate(Experiment::Evolve).unwrap_err()),
            "chain.sites"
        );
    }

    #[test]
    fn family_must_match_schedule() {
        let c = RunConfig::from_toml(&CTAP.replace("interfaced-ssh", "odd-ssh")).unwrap();
        assert_eq!(
            path_of(c.validate(Experiment::Evolve).unwrap_err()),
            "schedule.kind"
        );
    }

    #[test]
    fn declared_experiment_must_agree() {
        let c = RunConfig::from_toml(&format!("experiment = \"spectrum\"\n{CTAP}")).unwrap();
        c.validate(Experiment::Spectrum).unwrap();
        assert_eq!(
            path_of(c.validate(Experiment::Evolve).unwrap_err()),
            "experiment"
        );
    }

    #[test]
    fn sweep_needs_durations() {
        let c = RunConfig::from_toml(CTAP).unwrap();
        assert_eq!(
            path_of(c.validate(Experiment::SweepTime).unwrap_err()),
            "sweep.durations"
        );
        let text =
            format!("{CTAP}\n[sweep]\nduration_range = {{ start = 40, stop = 120, step = 40 }}\n");
        let c = RunConfig::from_toml(&text).unwrap();
        c.validate(Experiment::SweepTime).unwrap();
        assert_eq!(c.durations().unwrap(), vec![40.0, 80.0, 120.0]);
    }

    #[test]
    fn bad_size_is_indexed() {
        let text = format!("{CTAP}\n[sweep]\nsizes = [15, 17]\n");
        let c = RunConfig::from_toml(&text).unwrap();
        assert_eq!(
            path_of(c.validate(Experiment::SweepSize).unwrap_err()),
            "sweep.sizes[1]"
        );
    }

    #[test]
    fn width_without_delay() {
        let text = CTAP.replace("delay = 50\n", "");
        let c = RunConfig::from_toml(&text).unwrap();
        assert_eq!(
            path_of(c.validate(Experiment::Evolve).unwrap_err()),
            "schedule.delay"
        );
    }

    #[test]
    fn scaled_rule_when_shape_omitted() {
        let text = CTAP
            .replace("width = 150\n", "")
            .replace("delay = 50\n", "");
        let c = RunConfig::from_toml(&text).unwrap();
        c.validate(Experiment::Evolve).unwrap();
        let Schedule::Ctap { pulse, .. } = c.schedule_for(400.0, 0.0).unwrap() else {
            panic!()
        };
        assert_eq!((pulse.width, pulse.delay), (120.0, 40.0));
    }

    #[test]
    fn stray_keys_for_kind() {
        let text = r#"
[chain]
family = "odd-ssh"
sites = 31
[schedule]
kind = "half-cycle-cosine"
duration = 800
t0 = 0.5
delta = 0.3
"#;
        let c = RunConfig::from_toml(text).unwrap();
        assert_eq!(
            path_of(c.validate(Experiment::Evolve).unwrap_err()),
            "schedule.delta"
        );
    }

    #[test]
    fn range_is_inclusive_and_robust_to_rounding() {
        let r = Range {
            start: 0.1,
            stop: 0.3,
            step: 0.1,
        };
        assert_eq!(r.values().len(), 3);
    }
}
