//! Time-dependent Schrödinger integration, `i ∂ψ/∂t = H(t) ψ`.
//!
//! Each step applies the exact exponential of the midpoint Hamiltonian,
//! `ψ ← exp(-i H(t + Δt/2) Δt) ψ`, computed from the eigendecomposition of the
//! instantaneous tridiagonal matrix. The propagator is unitary up to the
//! eigensolver's orthogonality, and second order in `Δt`.

use num_complex::Complex64;

use crate::eigen::Workspace;
use crate::error::{Error, Result};
use crate::lattice::{ChainSpec, HamiltonianMatrix};
use crate::protocols::Schedule;

const NORM_TOLERANCE: f64 = 1e-10;

/// Number of observable samples recorded per run unless overridden.
pub const DEFAULT_SAMPLES: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    amps: Vec<Complex64>,
    time: f64,
}

impl WaveFunction {
    /// Unit excitation on one site (0-based).
    pub fn localized(dim: usize, site: usize, time: f64) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[site] = Complex64::new(1.0, 0.0);
        Self { amps, time }
    }

    pub fn new(amps: Vec<Complex64>, time: f64) -> Result<Self> {
        let norm = norm(&amps);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amps, time })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    pub fn probability(&self, site: usize) -> f64 {
        self.amps[site].norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨v|ψ⟩` for a real vector `v`.
    pub fn project(&self, v: &[f64]) -> Complex64 {
        self.amps.iter().zip(v).map(|(a, x)| a * x).sum()
    }
}

fn norm(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Uniform integration grid with observables recorded every `sample_every` steps.
///
/// `end < start` is allowed and integrates backwards in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    start: f64,
    end: f64,
    steps: usize,
    sample_every: usize,
}

impl TimeGrid {
    /// Grid with step at most `max_dt` and `samples` evenly spaced sample
    /// times, both endpoints included.
    pub fn new(start: f64, end: f64, max_dt: f64, samples: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || start == end {
            return Err(Error::InvalidGrid(format!(
                "grid endpoints must be finite and distinct (got {start}, {end})"
            )));
        }
        if !(max_dt > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "step must be positive, got {max_dt}"
            )));
        }
        if samples < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 samples, got {samples}"
            )));
        }
        let intervals = samples - 1;
        let span = (end - start).abs();
        let per = ((span / (max_dt * intervals as f64)).ceil() as usize).max(1);
        Ok(Self {
            start,
            end,
            steps: intervals * per,
            sample_every: per,
        })
    }

    /// Grid over a schedule's window with the default sample count.
    pub fn for_schedule(schedule: &Schedule, dt: Option<f64>, samples: usize) -> Result<Self> {
        let (start, end) = schedule.window();
        Self::new(
            start,
            end,
            dt.unwrap_or_else(|| default_dt(schedule)),
            samples,
        )
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Signed step.
    pub fn step(&self) -> f64 {
        (self.end - self.start) / self.steps as f64
    }

    pub fn time_at(&self, k: usize) -> f64 {
        if k == self.steps {
            self.end
        } else {
            self.start + (self.end - self.start) * (k as f64 / self.steps as f64)
        }
    }

    pub fn sample_times(&self) -> Vec<f64> {
        (0..=self.steps)
            .step_by(self.sample_every)
            .map(|k| self.time_at(k))
            .collect()
    }

    /// Same points traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        Self {
            start: self.end,
            end: self.start,
            ..*self
        }
    }

    /// Same sample times, step halved.
    pub fn refined(&self) -> Self {
        Self {
            steps: 2 * self.steps,
            sample_every: 2 * self.sample_every,
            ..*self
        }
    }
}

/// Default step: `0.1` over the hopping scale, clamped to `‖H‖ Δt ≤ 0.25`.
pub fn default_dt(schedule: &Schedule) -> f64 {
    (0.1 / schedule.hopping_scale()).min(0.25 / schedule.norm_bound())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub trajectory: Vec<Sample>,
    pub final_state: WaveFunction,
    /// Largest `|‖ψ‖ - 1|` seen over all steps.
    pub norm_drift: f64,
    pub step_size: f64,
}

impl EvolutionResult {
    pub fn final_probability(&self, site: usize) -> f64 {
        self.final_state.probability(site)
    }
}

/// Exact-exponential stepper over a generic Hamiltonian trajectory.
///
/// `on_sample` sees the state at every sample time, including the start.
/// Returns the final amplitudes and the norm drift.
pub fn propagate<H, S>(
    initial: &[Complex64],
    grid: &TimeGrid,
    mut hamiltonian_at: H,
    mut on_sample: S,
) -> Result<(Vec<Complex64>, f64)>
where
    H: FnMut(f64) -> Result<HamiltonianMatrix>,
    S: FnMut(f64, &[Complex64]) -> Result<()>,
{
    let dim = initial.len();
    let mut psi = initial.to_vec();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); dim];
    let mut ws = Workspace::new(dim);
    let dt = grid.step();
    let mut drift = (norm(&psi) - 1.0).abs();

    on_sample(grid.start, &psi)?;
    for k in 0..grid.steps {
        let t0 = grid.time_at(k);
        let h = hamiltonian_at(t0 + 0.5 * dt)?;
        if h.dim() != dim {
            return Err(Error::InvalidChain(format!(
                "Hamiltonian of dimension {} applied to state of dimension {dim}",
                h.dim()
            )));
        }
        ws.decompose(h.diagonal(), h.superdiagonal())?;

        for (j, c) in coeffs.iter_mut().enumerate() {
            let v = ws.vector(j);
            let overlap: Complex64 = v.iter().zip(&psi).map(|(x, a)| a * x).sum();
            let (s, co) = (-ws.values()[j] * dt).sin_cos();
            *c = overlap * Complex64::new(co, s);
        }
        psi.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        for (j, c) in coeffs.iter().enumerate() {
            for (a, x) in psi.iter_mut().zip(ws.vector(j)) {
                *a += c * x;
            }
        }

        drift = drift.max((norm(&psi) - 1.0).abs());
        if (k + 1) % grid.sample_every == 0 {
            on_sample(grid.time_at(k + 1), &psi)?;
        }
    }
    Ok((psi, drift))
}

/// Integrates the chain driven by `schedule` from `initial` across `grid`.
pub fn evolve(
    spec: &ChainSpec,
    schedule: &Schedule,
    initial: &WaveFunction,
    grid: &TimeGrid,
) -> Result<EvolutionResult> {
    schedule.check_family(spec)?;
    if initial.dim() != spec.sites() {
        return Err(Error::InvalidChain(format!(
            "initial state has {} sites, chain has {}",
            initial.dim(),
            spec.sites()
        )));
    }
    let n0 = initial.norm();
    if (n0 - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized(n0));
    }
    if (initial.time() - grid.start()).abs() > 1e-9 * grid.start().abs().max(1.0) {
        return Err(Error::InvalidGrid(format!(
            "initial state at t = {} but grid starts at {}",
            initial.time(),
            grid.start()
        )));
    }

    let mut trajectory = Vec::new();
    let (amps, norm_drift) = propagate(
        initial.amplitudes(),
        grid,
        |t| schedule.hamiltonian(spec, t),
        |t, psi| {
            trajectory.push(Sample {
                time: t,
                probabilities: psi.iter().map(|a| a.norm_sqr()).collect(),
            });
            Ok(())
        },
    )?;

    Ok(EvolutionResult {
        trajectory,
        final_state: WaveFunction {
            amps,
            time: grid.end(),
        },
        norm_drift,
        step_size: grid.step().abs(),
    })
}

/// Runs the protocol from a site-1 excitation and returns the full result,
/// recording only the endpoints.
pub fn transfer_run(
    spec: &ChainSpec,
    schedule: &Schedule,
    dt: Option<f64>,
) -> Result<EvolutionResult> {
    let grid = TimeGrid::for_schedule(schedule, dt, 2)?;
    let initial = WaveFunction::localized(spec.sites(), 0, grid.start());
    evolve(spec, schedule, &initial, &grid)
}

/// Final occupation of the right edge site after the protocol, starting from
/// the left edge site.
pub fn transfer_probability(spec: &ChainSpec, schedule: &Schedule, dt: Option<f64>) -> Result<f64> {
    Ok(transfer_run(spec, schedule, dt)?.final_probability(spec.target_site()))
}
