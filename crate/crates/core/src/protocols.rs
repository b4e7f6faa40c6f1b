//! Time-dependent coupling schedules and the adiabatic area integral.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ChainSpec, CouplingSnapshot, Family, HamiltonianMatrix};
use crate::topostates::closed_form_rates;

/// Gaussian pulse pair driving the interfaced chain.
///
/// `t1(t) = Ω_m exp(-(t - δ/2)²/w²)` and `t1'(t) = Ω_m exp(-(t + δ/2)²/w²)`,
/// so the right-side coupling `t1'` peaks first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CtapPulse {
    pub t2: f64,
    pub omega_max: f64,
    pub width: f64,
    pub delay: f64,
}

impl CtapPulse {
    /// Pulse shape tied to the interaction time: `w = 3T/10`, `δ = w/3`.
    pub fn scaled(duration: f64, omega_max: f64, t2: f64) -> Self {
        let width = 0.3 * duration;
        Self {
            t2,
            omega_max,
            width,
            delay: width / 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t2 > 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "t2 must be positive, got {}",
                self.t2
            )));
        }
        if !(self.omega_max > 0.0 && self.omega_max < self.t2) {
            return Err(Error::InvalidSchedule(format!(
                "peak coupling must satisfy 0 < omega_max < t2 (got {} with t2 = {})",
                self.omega_max, self.t2
            )));
        }
        if !(self.width > 0.0) || !(self.delay >= 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "width must be positive and delay non-negative (got {}, {})",
                self.width, self.delay
            )));
        }
        Ok(())
    }

    fn envelope(&self, t: f64) -> f64 {
        self.omega_max * (-(t / self.width).powi(2)).exp()
    }
}

pub fn ctap_couplings(t: f64, pulse: &CtapPulse) -> CouplingSnapshot {
    CouplingSnapshot::interfaced(
        pulse.envelope(t - 0.5 * pulse.delay),
        pulse.t2,
        pulse.envelope(t + 0.5 * pulse.delay),
    )
}

/// Elliptic loop around the Rice-Mele gap-closing point, one cycle per `period`.
pub fn rice_mele_couplings(t: f64, t0: f64, delta: f64, period: f64) -> CouplingSnapshot {
    let phase = 2.0 * PI * t / period;
    let (s, c) = phase.sin_cos();
    CouplingSnapshot::rice_mele(t0 * (1.0 - c), t0 * (1.0 + c), delta * s)
}

/// Half-cycle SSH modulation, defined on `[0, duration]` only.
pub fn half_cycle_couplings(t: f64, t0: f64, duration: f64) -> Result<CouplingSnapshot> {
    if !(0.0..=duration).contains(&t) {
        return Err(Error::OutsideWindow {
            time: t,
            start: 0.0,
            end: duration,
        });
    }
    let c = (PI * t / duration).cos();
    Ok(CouplingSnapshot::ssh(t0 * (1.0 - c), t0 * (1.0 + c)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    CtapGaussian,
    RiceMeleLoop,
    HalfCycleCosine,
}

impl ScheduleKind {
    /// The chain family this protocol drives.
    pub fn family(self) -> Family {
        match self {
            Self::CtapGaussian => Family::InterfacedSsh,
            Self::RiceMeleLoop => Family::RiceMele,
            Self::HalfCycleCosine => Family::OddSsh,
        }
    }
}

/// One protocol instance: coupling trajectories over a finite time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// Runs over `[-duration/2, duration/2]`, centred on the pulse crossing.
    Ctap { pulse: CtapPulse, duration: f64 },
    /// Runs over `[0, period]`.
    RiceMeleLoop { t0: f64, delta: f64, period: f64 },
    /// Runs over `[0, duration]`.
    HalfCycle { t0: f64, duration: f64 },
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSchedule(format!(
            "{name} must be positive, got {value}"
        )))
    }
}

impl Schedule {
    pub fn ctap(pulse: CtapPulse, duration: f64) -> Result<Self> {
        pulse.validate()?;
        positive("duration", duration)?;
        Ok(Self::Ctap { pulse, duration })
    }

    /// CTAP schedule with the pulse shape scaled to the interaction time.
    pub fn ctap_scaled(duration: f64, omega_max: f64, t2: f64) -> Result<Self> {
        Self::ctap(CtapPulse::scaled(duration, omega_max, t2), duration)
    }

    pub fn rice_mele(t0: f64, delta: f64, period: f64) -> Result<Self> {
        positive("t0", t0)?;
        positive("period", period)?;
        if !delta.is_finite() {
            return Err(Error::InvalidSchedule(format!(
                "delta must be finite, got {delta}"
            )));
        }
        Ok(Self::RiceMeleLoop { t0, delta, period })
    }

    pub fn half_cycle(t0: f64, duration: f64) -> Result<Self> {
        positive("t0", t0)?;
        positive("duration", duration)?;
        Ok(Self::HalfCycle { t0, duration })
    }

    pub fn kind(&self) -> ScheduleKind {
        match self {
            Self::Ctap { .. } => ScheduleKind::CtapGaussian,
            Self::RiceMeleLoop { .. } => ScheduleKind::RiceMeleLoop,
            Self::HalfCycle { .. } => ScheduleKind::HalfCycleCosine,
        }
    }

    /// The chain family this protocol drives.
    pub fn family(&self) -> Family {
        self.kind().family()
    }

    /// Interaction time `T`.
    pub fn duration(&self) -> f64 {
        match *self {
            Self::Ctap { duration, .. } | Self::HalfCycle { duration, .. } => duration,
            Self::RiceMeleLoop { period, .. } => period,
        }
    }

    pub fn window(&self) -> (f64, f64) {
        match *self {
            Self::Ctap { duration, .. } => (-0.5 * duration, 0.5 * duration),
            _ => (0.0, self.duration()),
        }
    }

    /// Dimensionless protocol phase: `Ωt` for Rice-Mele, `πt/T` for the half cycle.
    pub fn phase(&self, t: f64) -> Option<f64> {
        match *self {
            Self::Ctap { .. } => None,
            Self::RiceMeleLoop { period, .. } => Some(2.0 * PI * t / period),
            Self::HalfCycle { duration, .. } => Some(PI * t / duration),
        }
    }

    pub fn couplings(&self, t: f64) -> Result<CouplingSnapshot> {
        match *self {
            Self::Ctap { ref pulse, .. } => Ok(ctap_couplings(t, pulse)),
            Self::RiceMeleLoop { t0, delta, period } => {
                Ok(rice_mele_couplings(t, t0, delta, period))
            }
            Self::HalfCycle { t0, duration } => half_cycle_couplings(t, t0, duration),
        }
    }

    /// Largest hopping amplitude reached by the protocol.
    pub fn hopping_scale(&self) -> f64 {
        match *self {
            Self::Ctap { ref pulse, .. } => pulse.t2,
            Self::RiceMeleLoop { t0, .. } | Self::HalfCycle { t0, .. } => 2.0 * t0,
        }
    }

    /// Upper bound on `‖H(t)‖` over the whole protocol.
    pub fn norm_bound(&self) -> f64 {
        match *self {
            Self::Ctap { ref pulse, .. } => 2.0 * pulse.t2.max(pulse.omega_max),
            Self::RiceMeleLoop { t0, delta, .. } => 4.0 * t0 + delta.abs(),
            Self::HalfCycle { t0, .. } => 4.0 * t0,
        }
    }

    pub fn hamiltonian(&self, spec: &ChainSpec, t: f64) -> Result<HamiltonianMatrix> {
        self.check_family(spec)?;
        Ok(spec.hamiltonian(&self.couplings(t)?))
    }

    pub fn check_family(&self, spec: &ChainSpec) -> Result<()> {
        if spec.family() == self.family() {
            Ok(())
        } else {
            Err(Error::FamilyMismatch {
                expected: self.family(),
                found: spec.family(),
            })
        }
    }

    /// Coupling at the window edges relative to its peak (CTAP only).
    ///
    /// The Gaussian tails are cut off by the finite window; this is the size of
    /// the larger of the two cut-off couplings over `Ω_m`.
    pub fn edge_truncation(&self) -> Option<f64> {
        match *self {
            Self::Ctap {
                ref pulse,
                duration,
            } => {
                let (start, end) = (-0.5 * duration, 0.5 * duration);
                let edges = [ctap_couplings(start, pulse), ctap_couplings(end, pulse)];
                let worst = edges
                    .iter()
                    .flat_map(|c| [c.t1, c.t1_prime])
                    .fold(0.0, f64::max);
                Some(worst / pulse.omega_max)
            }
            _ => None,
        }
    }
}

/// Global adiabaticity measure of a CTAP pulse on a given chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticityReport {
    /// `∫ sqrt(Ω_L² + Ω_R²) dt` over the whole pulse.
    pub area: f64,
    /// `area / (π/2)`; transfer is adiabatic when this is large.
    pub threshold_ratio: f64,
}

/// Pulse area `∫ sqrt(Ω_L(t)² + Ω_R(t)²) dt`.
///
/// The integral runs over the full pulse (not the evolution window), cut where
/// the integrand drops below `1e-14` of its peak.
pub fn pulse_area(pulse: &CtapPulse, spec: &ChainSpec) -> Result<AdiabaticityReport> {
    pulse.validate()?;
    let integrand = |t: f64| -> Result<f64> {
        Ok(closed_form_rates(spec, &ctap_couplings(t, pulse))?.magnitude())
    };

    // the integrand is symmetric in t; its peak lies within the pulse span
    let span = pulse.delay + 2.0 * pulse.width;
    let coarse = 400;
    let mut peak = 0.0_f64;
    for i in 0..=coarse {
        let t = -span + 2.0 * span * i as f64 / coarse as f64;
        peak = peak.max(integrand(t)?);
    }
    if peak == 0.0 {
        return Ok(AdiabaticityReport {
            area: 0.0,
            threshold_ratio: 0.0,
        });
    }

    let floor = 1e-14 * peak;
    let step = 0.25 * pulse.width;
    let mut edge = 0.5 * pulse.delay;
    while integrand(edge)? > floor || integrand(-edge)? > floor {
        edge += step;
    }

    let area = simpson_converged(integrand, -edge, edge)?;
    Ok(AdiabaticityReport {
        area,
        threshold_ratio: area / FRAC_PI_2,
    })
}

fn simpson(f: &impl Fn(f64) -> Result<f64>, a: f64, b: f64, intervals: usize) -> Result<f64> {
    let h = (b - a) / intervals as f64;
    let mut sum = f(a)? + f(b)?;
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * i as f64)?;
    }
    Ok(sum * h / 3.0)
}

fn simpson_converged(f: impl Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let mut intervals = 256;
    let mut previous = simpson(&f, a, b, intervals)?;
    loop {
        intervals *= 2;
        let current = simpson(&f, a, b, intervals)?;
        if (current - previous).abs() <= 1e-12 * current.abs() || intervals >= 1 << 20 {
            return Ok(current);
        }
        previous = current;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> CtapPulse {
        CtapPulse {
            t2: 1.0,
            omega_max: 0.9,
            width: 150.0,
            delay: 50.0,
        }
    }

    #[test]
    fn crossing_point_has_equal_couplings() {
        let p = fig2();
        let c = ctap_couplings(0.0, &p);
        assert_eq!(c.t1, c.t1_prime);
        let expect = 0.9 * (-(50.0_f64 * 50.0) / (4.0 * 150.0 * 150.0)).exp();
        assert!((c.t1 - expect).abs() < 1e-15);
    }

    #[test]
    fn early_pulse_is_t1_prime() {
        let p = fig2();
        let c = ctap_couplings(-25.0, &p);
        assert_eq!(c.t1_prime, 0.9);
        let expect = 0.9 * (-(50.0_f64 / 150.0).powi(2)).exp();
        assert!((c.t1 - expect).abs() < 1e-15);
        assert!(c.t1 < c.t1_prime);
    }

    #[test]
    fn fig2_peak_stays_below_t2() {
        let p = fig2();
        let max = (-4000..=4000)
            .map(|i| ctap_couplings(i as f64 * 0.1, &p).t1)
            .fold(0.0, f64::max);
        assert!((max - 0.9).abs() < 1e-12);
        assert!(max < p.t2);
    }

    #[test]
    fn ctap_mirror_symmetry() {
        let p = fig2();
        for i in -50..=50 {
            let t = 7.3 * i as f64;
            assert_eq!(ctap_couplings(t, &p).t1, ctap_couplings(-t, &p).t1_prime);
        }
    }

    #[test]
    fn scaled_pulse_rule() {
        let p = CtapPulse::scaled(400.0, 0.9, 1.0);
        assert!((p.width - 120.0).abs() < 1e-12);
        assert!((p.delay - 40.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_pulses_rejected() {
        assert!(Schedule::ctap(
            CtapPulse {
                omega_max: 1.0,
                ..fig2()
            },
            800.0
        )
        .is_err());
        assert!(Schedule::ctap(
            CtapPulse {
                omega_max: 0.0,
                ..fig2()
            },
            800.0
        )
        .is_err());
        assert!(Schedule::ctap(
            CtapPulse {
                width: 0.0,
                ..fig2()
            },
            800.0
        )
        .is_err());
        assert!(Schedule::ctap(fig2(), -1.0).is_err());
        assert!(Schedule::rice_mele(0.5, 0.3, 0.0).is_err());
        assert!(Schedule::half_cycle(0.0, 10.0).is_err());
    }

    #[test]
    fn rice_mele_special_points() {
        let c = rice_mele_couplings(0.0, 0.5, 0.3, 100.0);
        assert_eq!((c.t1, c.t2, c.delta), (0.0, 1.0, 0.0));
        let c = rice_mele_couplings(25.0, 0.5, 0.3, 100.0);
        assert!((c.t1 - 0.5).abs() < 1e-15 && (c.t2 - 0.5).abs() < 1e-15);
        assert!((c.delta - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rice_mele_maxima_and_ellipse() {
        let (t0, d, period) = (0.5, 0.3, 1000.0);
        let mut max_t1 = 0.0_f64;
        let mut max_t2 = 0.0_f64;
        for i in 0..=1000 {
            let t = i as f64;
            let c = rice_mele_couplings(t, t0, d, period);
            max_t1 = max_t1.max(c.t1);
            max_t2 = max_t2.max(c.t2);
            let ellipse = ((c.t2 - c.t1) / (2.0 * t0)).powi(2) + (c.delta / d).powi(2);
            assert!((ellipse - 1.0).abs() < 1e-12);
        }
        assert!((max_t1 - 1.0).abs() < 1e-12);
        assert!((max_t2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_cycle_special_points() {
        let c = half_cycle_couplings(0.0, 0.5, 800.0).unwrap();
        assert_eq!((c.t1, c.t2), (0.0, 1.0));
        let c = half_cycle_couplings(800.0, 0.5, 800.0).unwrap();
        assert!((c.t1 - 1.0).abs() < 1e-15 && c.t2.abs() < 1e-15);
        let c = half_cycle_couplings(400.0, 0.5, 800.0).unwrap();
        assert!((c.t1 - 0.5).abs() < 1e-15 && (c.t2 - 0.5).abs() < 1e-15);
        assert!(half_cycle_couplings(-1.0, 0.5, 800.0).is_err());
        assert!(half_cycle_couplings(800.5, 0.5, 800.0).is_err());
    }

    #[test]
    fn schedule_windows() {
        let s = Schedule::ctap(fig2(), 800.0).unwrap();
        assert_eq!(s.window(), (-400.0, 400.0));
        assert_eq!(s.family(), Family::InterfacedSsh);
        let s = Schedule::rice_mele(0.5, 0.3, 1600.0).unwrap();
        assert_eq!(s.window(), (0.0, 1600.0));
        let s = Schedule::half_cycle(0.5, 800.0).unwrap();
        assert_eq!(s.window(), (0.0, 800.0));
        assert!(s
            .hamiltonian(&ChainSpec::rice_mele(4).unwrap(), 1.0)
            .is_err());
    }

    #[test]
    fn couplings_bounded_by_maxima() {
        let s = Schedule::ctap(fig2(), 800.0).unwrap();
        let r = Schedule::rice_mele(0.5, 0.3, 1000.0).unwrap();
        let h = Schedule::half_cycle(0.5, 1000.0).unwrap();
        for i in 0..=1000 {
            let t = i as f64;
            let c = s.couplings(t - 500.0).unwrap();
            assert!(c.t1 <= 0.9 && c.t1_prime <= 0.9 && c.t1 >= 0.0);
            for c in [r.couplings(t).unwrap(), h.couplings(t).unwrap()] {
                assert!(c.t1 <= 1.0 + 1e-15 && c.t2 <= 1.0 + 1e-15);
                assert!(c.t1 >= 0.0 && c.t2 >= -1e-15);
            }
        }
    }

    #[test]
    fn area_vanishes_with_peak_coupling() {
        let spec = ChainSpec::interfaced_ssh(4).unwrap();
        let mut prev = f64::INFINITY;
        for om in [0.5, 0.1, 0.01, 0.001] {
            let r = pulse_area(
                &CtapPulse {
                    omega_max: om,
                    ..fig2()
                },
                &spec,
            )
            .unwrap();
            assert!(r.area < prev);
            prev = r.area;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn area_decreases_when_chain_doubles() {
        let p = fig2();
        let a8 = pulse_area(&p, &ChainSpec::interfaced_ssh(8).unwrap()).unwrap();
        let a16 = pulse_area(&p, &ChainSpec::interfaced_ssh(16).unwrap()).unwrap();
        assert!(a16.area < a8.area);
    }

    #[test]
    fn fig2_area_is_well_above_threshold() {
        let r = pulse_area(&fig2(), &ChainSpec::interfaced_ssh(16).unwrap()).unwrap();
        assert!(r.threshold_ratio > 1.0, "{r:?}");
        assert!((r.threshold_ratio - r.area / FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn area_matches_brute_force_quadrature() {
        // trapezoid rule over a generous fixed window as an independent check
        let p = fig2();
        let spec = ChainSpec::interfaced_ssh(8).unwrap();
        let h = 0.05;
        let brute: f64 = (-20000i32..=20000)
            .map(|i| {
                let t = i as f64 * h;
                let w = if i.abs() == 20000 { 0.5 } else { 1.0 };
                w * h
                    * closed_form_rates(&spec, &ctap_couplings(t, &p))
                        .unwrap()
                        .magnitude()
            })
            .sum();
        let r = pulse_area(&p, &spec).unwrap();
        assert!(
            (r.area - brute).abs() < 1e-8 * brute,
            "{} vs {brute}",
            r.area
        );
    }
}
