use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::RunConfig;
use super::plot::{PlotSpec, Series};
use super::table::{Cell, Table};
use super::{Experiment, HarnessError, Report, RunMeta};
use crate::evolution::{evolve, transfer_run, TimeGrid, WaveFunction};
use crate::lattice::ChainSpec;
use crate::protocols::{pulse_area, Schedule};
use crate::reduced::{compare_projections, compare_reduced_vs_exact, EnergyComparison};
use crate::spectra::instantaneous_spectrum;

/// Transfer probability that counts as a successful pump.
pub const TRANSFER_THRESHOLD: f64 = 0.9;
/// Largest change in the final probability tolerated when `dt` is halved.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-4;

/// One point of a transfer sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    /// Interaction time or site count, whichever is swept.
    pub parameter: f64,
    pub staggered_potential: Option<f64>,
    pub transfer_probability: f64,
    pub area: Option<f64>,
    pub norm_drift: f64,
    pub step_size: f64,
    pub wall_time: f64,
}

/// Smallest swept value whose transfer probability reaches `threshold`.
pub fn first_crossing(records: &[SweepRecord], threshold: f64) -> Option<f64> {
    records
        .iter()
        .find(|r| r.transfer_probability >= threshold)
        .map(|r| r.parameter)
}

/// Smallest swept value from which the probability stays at or above
/// `threshold` through the end of the sweep.
pub fn sustained_crossing(records: &[SweepRecord], threshold: f64) -> Option<f64> {
    let tail = records
        .iter()
        .rev()
        .take_while(|r| r.transfer_probability >= threshold)
        .count();
    (tail > 0).then(|| records[records.len() - tail].parameter)
}

fn linspace(start: f64, end: f64, points: usize) -> Vec<f64> {
    let step = (end - start) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                end
            } else {
                start + i as f64 * step
            }
        })
        .collect()
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config {
            path: "numerics.workers".into(),
            message: e.to_string(),
        })
}

fn output_name(config: &RunConfig, experiment: Experiment) -> String {
    config
        .output
        .name
        .clone()
        .unwrap_or_else(|| experiment.name().to_string())
}

fn meta(config: &RunConfig, experiment: Experiment, sites: usize, rows: usize) -> RunMeta {
    RunMeta {
        experiment,
        family: config.chain.family,
        sites,
        dt: None,
        workers: config.workers(),
        rows,
        wall_time_seconds: 0.0,
        converged: None,
        convergence_delta: None,
        max_norm_drift: None,
        summary: BTreeMap::new(),
    }
}

fn transfer_point(
    spec: &ChainSpec,
    schedule: &Schedule,
    dt: Option<f64>,
    parameter: f64,
    staggered_potential: Option<f64>,
) -> Result<SweepRecord, HarnessError> {
    let started = std::time::Instant::now();
    let run = transfer_run(spec, schedule, dt)?;
    let area = match schedule {
        Schedule::Ctap { pulse, .. } => Some(pulse_area(pulse, spec)?.area),
        _ => None,
    };
    Ok(SweepRecord {
        parameter,
        staggered_potential,
        transfer_probability: run.final_probability(spec.target_site()),
        area,
        norm_drift: run.norm_drift,
        step_size: run.step_size,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

/// Reruns one point at half the step and reports `|ΔP|`.
fn convergence_guard(
    spec: &ChainSpec,
    schedule: &Schedule,
    reference: &SweepRecord,
) -> Result<f64, HarnessError> {
    let half = transfer_run(spec, schedule, Some(0.5 * reference.step_size))?;
    Ok((half.final_probability(spec.target_site()) - reference.transfer_probability).abs())
}

fn apply_guard(meta: &mut RunMeta, delta: f64) {
    meta.converged = Some(delta <= CONVERGENCE_TOLERANCE);
    meta.convergence_delta = Some(delta);
}

fn sweep_meta(meta: &mut RunMeta, records: &[SweepRecord]) {
    meta.dt = records.first().map(|r| r.step_size);
    meta.max_norm_drift = Some(records.iter().map(|r| r.norm_drift).fold(0.0, f64::max));
}

/// Transfer probability against interaction time.
///
/// Columns: `duration, staggered_potential, transfer_probability, pulse_area,
/// norm_drift`. Rows run over `sweep.deltas` (outer) and durations (inner).
pub fn run_sweep_time(config: &RunConfig) -> Result<Report, HarnessError> {
    let spec = config.chain_spec(config.chain.sites)?;
    let durations = config.durations()?;
    let deltas = config.deltas();
    let rice_mele = config.sweep.deltas.is_some() || config.schedule.delta.is_some();

    let points: Vec<(f64, f64)> = deltas
        .iter()
        .flat_map(|&d| durations.iter().map(move |&t| (d, t)))
        .collect();
    let schedules = points
        .iter()
        .map(|&(d, t)| config.schedule_for(t, d))
        .collect::<Result<Vec<_>, _>>()?;
    let dt = config.numerics.dt;
    let records: Vec<SweepRecord> = pool(config.workers())?.install(|| {
        points
            .par_iter()
            .zip(&schedules)
            .map(|(&(d, t), s)| transfer_point(&spec, s, dt, t, rice_mele.then_some(d)))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut table = Table::new([
        "duration",
        "staggered_potential",
        "transfer_probability",
        "pulse_area",
        "norm_drift",
    ]);
    for r in &records {
        table.push(vec![
            Cell::Real(r.parameter),
            Cell::real(r.staggered_potential),
            Cell::Real(r.transfer_probability),
            Cell::real(r.area),
            Cell::Real(r.norm_drift),
        ]);
    }

    let mut m = meta(config, Experiment::SweepTime, spec.sites(), records.len());
    sweep_meta(&mut m, &records);
    // guard at the longest interaction time of the first curve
    let longest = (0..durations.len())
        .max_by(|&a, &b| durations[a].total_cmp(&durations[b]))
        .expect("durations are non-empty");
    apply_guard(
        &mut m,
        convergence_guard(&spec, &schedules[longest], &records[longest])?,
    );

    let mut series = Vec::new();
    for (k, &d) in deltas.iter().enumerate() {
        let curve = &records[k * durations.len()..(k + 1) * durations.len()];
        let tag = if rice_mele {
            format!("[delta={d}]")
        } else {
            String::new()
        };
        if let Some(t) = first_crossing(curve, TRANSFER_THRESHOLD) {
            m.summary.insert(format!("threshold_crossing{tag}"), t);
        }
        if let Some(t) = sustained_crossing(curve, TRANSFER_THRESHOLD) {
            m.summary.insert(format!("sustained_crossing{tag}"), t);
        }
        series.push(Series {
            label: if rice_mele {
                format!("δ = {d}")
            } else {
                "P".into()
            },
            points: curve
                .iter()
                .map(|r| (r.parameter, r.transfer_probability))
                .collect(),
        });
    }

    Ok(Report {
        name: output_name(config, Experiment::SweepTime),
        tables: vec![(String::new(), table)],
        plots: vec![PlotSpec {
            suffix: String::new(),
            title: "Transfer probability versus interaction time".into(),
            x_label: "T".into(),
            y_label: "P".into(),
            series,
        }],
        meta: m,
    })
}

/// Transfer probability against chain length at fixed interaction time.
///
/// Columns: `sites, transfer_probability, pulse_area, norm_drift`.
pub fn run_sweep_size(config: &RunConfig) -> Result<Report, HarnessError> {
    let sizes = config.sweep.sizes.clone().unwrap_or_default();
    let specs = sizes
        .iter()
        .map(|&s| config.chain_spec(s))
        .collect::<Result<Vec<_>, _>>()?;
    let schedule = config.schedule()?;
    let dt = config.numerics.dt;
    let records: Vec<SweepRecord> = pool(config.workers())?.install(|| {
        specs
            .par_iter()
            .map(|spec| transfer_point(spec, &schedule, dt, spec.sites() as f64, None))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut table = Table::new(["sites", "transfer_probability", "pulse_area", "norm_drift"]);
    for (spec, r) in specs.iter().zip(&records) {
        table.push(vec![
            Cell::Int(spec.sites()),
            Cell::Real(r.transfer_probability),
            Cell::real(r.area),
            Cell::Real(r.norm_drift),
        ]);
    }

    let largest = (0..specs.len())
        .max_by_key(|&i| specs[i].sites())
        .expect("sizes are non-empty");
    let mut m = meta(
        config,
        Experiment::SweepSize,
        specs[largest].sites(),
        records.len(),
    );
    sweep_meta(&mut m, &records);
    apply_guard(
        &mut m,
        convergence_guard(&specs[largest], &schedule, &records[largest])?,
    );

    Ok(Report {
        name: output_name(config, Experiment::SweepSize),
        tables: vec![(String::new(), table)],
        plots: vec![PlotSpec {
            suffix: String::new(),
            title: "Transfer probability versus chain length".into(),
            x_label: "sites".into(),
            y_label: "P".into(),
            series: vec![Series {
                label: "P".into(),
                points: records
                    .iter()
                    .map(|r| (r.parameter, r.transfer_probability))
                    .collect(),
            }],
        }],
        meta: m,
    })
}

/// Instantaneous spectrum on `numerics.grid_points` times across the window.
///
/// Columns: `time, phase, e_1 .. e_d, in_gap_states, band_edge_distance`,
/// where `in_gap_states` lists 1-based energy indices joined by `;`.
pub fn run_spectrum(config: &RunConfig) -> Result<Report, HarnessError> {
    let spec = config.chain_spec(config.chain.sites)?;
    let schedule = config.schedule()?;
    let (start, end) = schedule.window();
    let times = linspace(start, end, config.grid_points());
    let series = instantaneous_spectrum(&spec, &schedule, &times)?;
    let dim = spec.sites();

    let mut header = vec!["time".to_string(), "phase".to_string()];
    header.extend((1..=dim).map(|i| format!("e_{i}")));
    header.push("in_gap_states".into());
    header.push("band_edge_distance".into());
    let mut table = Table::new(header);
    let mut min_edge = f64::INFINITY;
    for (k, slice) in series.slices.iter().enumerate() {
        let edge = slice.band_edge_distance()?;
        min_edge = min_edge.min(edge);
        let mut row = vec![Cell::Real(slice.time), Cell::real(series.phases[k])];
        row.extend(slice.energies.iter().map(|&e| Cell::Real(e)));
        let labels: Vec<String> = slice.in_gap.iter().map(|i| (i + 1).to_string()).collect();
        row.push(Cell::Text(labels.join(";")));
        row.push(Cell::Real(edge));
        table.push(row);
    }

    let mut m = meta(config, Experiment::Spectrum, dim, times.len());
    m.summary.insert("min_band_edge_distance".into(), min_edge);
    m.summary
        .insert("min_tracking_overlap".into(), series.min_tracking_overlap);

    let x: Vec<f64> = match schedule {
        Schedule::Ctap { .. } => times.clone(),
        _ => series
            .phases
            .iter()
            .map(|p| p.unwrap_or(f64::NAN))
            .collect(),
    };
    let plot_series = (0..dim)
        .map(|i| Series {
            label: format!("e_{}", i + 1),
            points: x
                .iter()
                .zip(&series.slices)
                .map(|(&t, s)| (t, s.energies[i]))
                .collect(),
        })
        .collect();

    Ok(Report {
        name: output_name(config, Experiment::Spectrum),
        tables: vec![(String::new(), table)],
        plots: vec![PlotSpec {
            suffix: String::new(),
            title: "Instantaneous spectrum".into(),
            x_label: if matches!(schedule, Schedule::Ctap { .. }) {
                "t"
            } else {
                "θ"
            }
            .into(),
            y_label: "E".into(),
            series: plot_series,
        }],
        meta: m,
    })
}

/// Site occupations from a left-edge start.
///
/// Columns: `time, p_1 .. p_d`.
pub fn run_evolve(config: &RunConfig) -> Result<Report, HarnessError> {
    let spec = config.chain_spec(config.chain.sites)?;
    let schedule = config.schedule()?;
    let grid = TimeGrid::for_schedule(&schedule, config.numerics.dt, config.samples())?;
    let initial = WaveFunction::localized(spec.sites(), 0, grid.start());
    let result = evolve(&spec, &schedule, &initial, &grid)?;
    let dim = spec.sites();

    let mut header = vec!["time".to_string()];
    header.extend((1..=dim).map(|i| format!("p_{i}")));
    let mut table = Table::new(header);
    for s in &result.trajectory {
        let mut row = vec![Cell::Real(s.time)];
        row.extend(s.probabilities.iter().map(|&p| Cell::Real(p)));
        table.push(row);
    }

    let mut m = meta(config, Experiment::Evolve, dim, result.trajectory.len());
    m.dt = Some(result.step_size);
    m.max_norm_drift = Some(result.norm_drift);
    m.summary
        .insert("final_p_first".into(), result.final_probability(0));
    m.summary.insert(
        "final_p_last".into(),
        result.final_probability(spec.target_site()),
    );

    let curve = |site: usize| Series {
        label: format!("P_{}", site + 1),
        points: result
            .trajectory
            .iter()
            .map(|s| (s.time, s.probabilities[site]))
            .collect(),
    };
    Ok(Report {
        name: output_name(config, Experiment::Evolve),
        tables: vec![(String::new(), table)],
        plots: vec![PlotSpec {
            suffix: String::new(),
            title: "Edge occupations".into(),
            x_label: "t".into(),
            y_label: "P".into(),
            series: vec![curve(0), curve(spec.target_site())],
        }],
        meta: m,
    })
}

/// Exact against reduced in-gap energies, plus full-state projections.
///
/// Main table columns: `time, exact_minus, exact_zero, exact_plus,
/// reduced_minus, reduced_zero, reduced_plus, band_edge_distance,
/// discrepancy`. The `amplitudes` table has `time, reduced_p_l, reduced_p_c,
/// reduced_p_r, projected_p_l, projected_p_c, projected_p_r,
/// amplitude_deviation`.
pub fn run_reduced_compare(config: &RunConfig) -> Result<Report, HarnessError> {
    let spec = config.chain_spec(config.chain.sites)?;
    let schedule = config.schedule()?;
    let (start, end) = schedule.window();
    let times = linspace(start, end, config.grid_points());
    let energies = compare_reduced_vs_exact(&spec, &schedule, &times)?;

    let mut table = Table::new([
        "time",
        "exact_minus",
        "exact_zero",
        "exact_plus",
        "reduced_minus",
        "reduced_zero",
        "reduced_plus",
        "band_edge_distance",
        "discrepancy",
    ]);
    for c in &energies {
        let mut row = vec![Cell::Real(c.time)];
        row.extend(c.exact.iter().chain(&c.reduced).map(|&e| Cell::Real(e)));
        row.push(Cell::Real(c.band_edge_distance));
        row.push(Cell::Real(c.discrepancy()));
        table.push(row);
    }

    let grid = TimeGrid::for_schedule(&schedule, config.numerics.dt, config.samples())?;
    let projections = compare_projections(&spec, &schedule, &grid)?;
    let mut amplitudes = Table::new([
        "time",
        "reduced_p_l",
        "reduced_p_c",
        "reduced_p_r",
        "projected_p_l",
        "projected_p_c",
        "projected_p_r",
        "amplitude_deviation",
    ]);
    for (k, &t) in projections.times.iter().enumerate() {
        let (r, p) = (projections.reduced[k], projections.projected[k]);
        let mut row = vec![Cell::Real(t)];
        row.extend(r.iter().chain(&p).map(|a| Cell::Real(a.norm_sqr())));
        let dev = r
            .iter()
            .zip(&p)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        row.push(Cell::Real(dev));
        amplitudes.push(row);
    }

    let mut m = meta(
        config,
        Experiment::ReducedCompare,
        spec.sites(),
        energies.len(),
    );
    m.dt = Some(grid.step().abs());
    let worst = energies
        .iter()
        .map(EnergyComparison::discrepancy)
        .fold(0.0, f64::max);
    let min_edge = energies
        .iter()
        .map(|c| c.band_edge_distance)
        .fold(f64::INFINITY, f64::min);
    m.summary.insert("max_energy_discrepancy".into(), worst);
    m.summary.insert("min_band_edge_distance".into(), min_edge);
    m.summary.insert(
        "max_amplitude_deviation".into(),
        projections.max_amplitude_deviation(),
    );
    m.summary.insert(
        "max_probability_deviation".into(),
        projections.max_probability_deviation(),
    );

    let energy_series = |name: &str, pick: fn(&EnergyComparison) -> f64| Series {
        label: name.into(),
        points: energies.iter().map(|c| (c.time, pick(c))).collect(),
    };
    let prob_series = |name: &str, col: usize, reduced: bool| Series {
        label: name.into(),
        points: projections
            .times
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                let a = if reduced {
                    projections.reduced[k]
                } else {
                    projections.projected[k]
                };
                (t, a[col].norm_sqr())
            })
            .collect(),
    };
    Ok(Report {
        name: output_name(config, Experiment::ReducedCompare),
        tables: vec![(String::new(), table), ("amplitudes".into(), amplitudes)],
        plots: vec![
            PlotSpec {
                suffix: String::new(),
                title: "In-gap energies: exact and three-level".into(),
                x_label: "t".into(),
                y_label: "E".into(),
                series: vec![
                    energy_series("exact −", |c| c.exact[0]),
                    energy_series("exact 0", |c| c.exact[1]),
                    energy_series("exact +", |c| c.exact[2]),
                    energy_series("reduced −", |c| c.reduced[0]),
                    energy_series("reduced +", |c| c.reduced[2]),
                ],
            },
            PlotSpec {
                suffix: "amplitudes".into(),
                title: "Edge-state occupations".into(),
                x_label: "t".into(),
                y_label: "probability".into(),
                series: vec![
                    prob_series("|a_L|² reduced", 0, true),
                    prob_series("|a_R|² reduced", 2, true),
                    prob_series("|⟨L|ψ⟩|²", 0, false),
                    prob_series("|⟨R|ψ⟩|²", 2, false),
                ],
            },
        ],
        meta: m,
    })
}

/// Pulse area of the configured CTAP schedule.
///
/// Columns: `sites, duration, width, delay, pulse_area, threshold_ratio,
/// edge_truncation`.
pub fn run_area_report(config: &RunConfig) -> Result<Report, HarnessError> {
    let spec = config.chain_spec(config.chain.sites)?;
    let schedule = config.schedule()?;
    let Schedule::Ctap { pulse, duration } = schedule else {
        return Err(HarnessError::Config {
            path: "schedule.kind".into(),
            message: "area-report needs ctap-gaussian".into(),
        });
    };
    let area = pulse_area(&pulse, &spec)?;
    let mut table = Table::new([
        "sites",
        "duration",
        "width",
        "delay",
        "pulse_area",
        "threshold_ratio",
        "edge_truncation",
    ]);
    table.push(vec![
        Cell::Int(spec.sites()),
        Cell::Real(duration),
        Cell::Real(pulse.width),
        Cell::Real(pulse.delay),
        Cell::Real(area.area),
        Cell::Real(area.threshold_ratio),
        Cell::real(schedule.edge_truncation()),
    ]);
    let mut m = meta(config, Experiment::AreaReport, spec.sites(), 1);
    m.summary.insert("pulse_area".into(), area.area);
    m.summary
        .insert("threshold_ratio".into(), area.threshold_ratio);
    Ok(Report {
        name: output_name(config, Experiment::AreaReport),
        tables: vec![(String::new(), table)],
        plots: Vec::new(),
        meta: m,
    })
}
