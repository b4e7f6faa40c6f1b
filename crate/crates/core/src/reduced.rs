//! Three-level CTAP model in the basis of the analytic states `|L⟩, |C⟩, |R⟩`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{propagate, TimeGrid, WaveFunction};
use crate::lattice::{ChainSpec, Family, HamiltonianMatrix};
use crate::protocols::Schedule;
use crate::spectra::SpectrumSlice;
use crate::topostates::{analytic_states, closed_form_rates, OverlapRates, TopoStateSet};

const NORM_TOLERANCE: f64 = 1e-10;

/// Amplitudes on `|L⟩, |C⟩, |R⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub a_l: Complex64,
    pub a_c: Complex64,
    pub a_r: Complex64,
    pub time: f64,
}

impl ReducedState {
    pub fn new(a_l: Complex64, a_c: Complex64, a_r: Complex64, time: f64) -> Result<Self> {
        let s = Self {
            a_l,
            a_c,
            a_r,
            time,
        };
        let n = s.norm();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(n));
        }
        Ok(s)
    }

    /// All weight on `|L⟩`.
    pub fn left(time: f64) -> Self {
        Self::from_array([1.0.into(), 0.0.into(), 0.0.into()], time)
    }

    fn from_array(a: [Complex64; 3], time: f64) -> Self {
        Self {
            a_l: a[0],
            a_c: a[1],
            a_r: a[2],
            time,
        }
    }

    pub fn amplitudes(&self) -> [Complex64; 3] {
        [self.a_l, self.a_c, self.a_r]
    }

    pub fn probabilities(&self) -> [f64; 3] {
        self.amplitudes().map(|a| a.norm_sqr())
    }

    pub fn norm(&self) -> f64 {
        self.probabilities().iter().sum::<f64>().sqrt()
    }
}

/// Eigensystem of the reduced Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSpectrum {
    pub e0: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub dark: [f64; 3],
    pub bright_plus: [f64; 3],
    pub bright_minus: [f64; 3],
}

/// `[[0, Ω_L, 0], [Ω_L, 0, Ω_R], [0, Ω_R, 0]]`.
pub fn reduced_hamiltonian(omega_l: f64, omega_r: f64) -> [[f64; 3]; 3] {
    [
        [0.0, omega_l, 0.0],
        [omega_l, 0.0, omega_r],
        [0.0, omega_r, 0.0],
    ]
}

fn reduced_matrix(rates: OverlapRates) -> HamiltonianMatrix {
    HamiltonianMatrix::from_bands(vec![0.0; 3], vec![rates.left, rates.right])
        .expect("three-site bands are consistent")
}

/// Energies `0, ±√(Ω_L² + Ω_R²)` with the dark and bright states.
pub fn reduced_spectrum(omega_l: f64, omega_r: f64) -> Result<ReducedSpectrum> {
    let rabi = omega_l.hypot(omega_r);
    if rabi == 0.0 {
        return Err(Error::Degenerate { dimension: 3 });
    }
    let bright = |e: f64| {
        let n = (rabi * rabi + e * e).sqrt();
        [omega_l / n, e / n, omega_r / n]
    };
    Ok(ReducedSpectrum {
        e0: 0.0,
        e_plus: rabi,
        e_minus: -rabi,
        dark: [omega_r / rabi, 0.0, -omega_l / rabi],
        bright_plus: bright(rabi),
        bright_minus: bright(-rabi),
    })
}

/// Reduced dynamics along an arbitrary rate trajectory.
pub fn evolve_reduced_with<F>(
    mut rates_at: F,
    initial: &ReducedState,
    grid: &TimeGrid,
) -> Result<Vec<ReducedState>>
where
    F: FnMut(f64) -> Result<OverlapRates>,
{
    let n = initial.norm();
    if (n - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized(n));
    }
    let mut trajectory = Vec::new();
    propagate(
        &initial.amplitudes(),
        grid,
        |t| Ok(reduced_matrix(rates_at(t)?)),
        |t, psi| {
            trajectory.push(ReducedState::from_array([psi[0], psi[1], psi[2]], t));
            Ok(())
        },
    )?;
    Ok(trajectory)
}

/// Reduced dynamics with the rates of the interfaced chain under `schedule`.
pub fn evolve_reduced(
    spec: &ChainSpec,
    schedule: &Schedule,
    initial: &ReducedState,
    grid: &TimeGrid,
) -> Result<Vec<ReducedState>> {
    require_interfaced(spec)?;
    schedule.check_family(spec)?;
    evolve_reduced_with(
        |t| closed_form_rates(spec, &schedule.couplings(t)?),
        initial,
        grid,
    )
}

fn require_interfaced(spec: &ChainSpec) -> Result<()> {
    if spec.family() != Family::InterfacedSsh {
        return Err(Error::FamilyMismatch {
            expected: Family::InterfacedSsh,
            found: spec.family(),
        });
    }
    Ok(())
}

/// Exact in-gap energies against the reduced prediction at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyComparison {
    pub time: f64,
    /// Exact in-gap energies, ascending.
    pub exact: [f64; 3],
    /// `(−√(Ω_L² + Ω_R²), 0, +√(Ω_L² + Ω_R²))`.
    pub reduced: [f64; 3],
    pub band_edge_distance: f64,
}

impl EnergyComparison {
    pub fn discrepancy(&self) -> f64 {
        self.exact
            .iter()
            .zip(&self.reduced)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Pairs the three exact in-gap energies with the reduced ones at each time.
pub fn compare_reduced_vs_exact(
    spec: &ChainSpec,
    schedule: &Schedule,
    grid: &[f64],
) -> Result<Vec<EnergyComparison>> {
    require_interfaced(spec)?;
    schedule.check_family(spec)?;
    grid.iter()
        .map(|&t| {
            let c = schedule.couplings(t)?;
            let slice = SpectrumSlice::from_matrix(t, &spec.hamiltonian(&c))?;
            if slice.in_gap.len() != 3 {
                return Err(Error::InGapCount {
                    time: t,
                    expected: 3,
                    found: slice.in_gap.len(),
                });
            }
            let e = slice.in_gap_energies();
            let rabi = closed_form_rates(spec, &c)?.magnitude();
            Ok(EnergyComparison {
                time: t,
                exact: [e[0], e[1], e[2]],
                reduced: [-rabi, 0.0, rabi],
                band_edge_distance: slice.band_edge_distance()?,
            })
        })
        .collect()
}

/// `(⟨L|ψ⟩, ⟨C|ψ⟩, ⟨R|ψ⟩)`.
pub fn project_onto_basis(states: &TopoStateSet, psi: &WaveFunction) -> [Complex64; 3] {
    [
        psi.project(&states.left),
        psi.project(&states.center),
        psi.project(&states.right),
    ]
}

/// Full and reduced amplitudes sampled on the same grid.
#[derive(Debug, Clone)]
pub struct ProjectionComparison {
    pub times: Vec<f64>,
    pub reduced: Vec<[Complex64; 3]>,
    pub projected: Vec<[Complex64; 3]>,
}

impl ProjectionComparison {
    /// Largest `|a_reduced − a_projected|` over times and components.
    pub fn max_amplitude_deviation(&self) -> f64 {
        self.max_over(|a, b| (a - b).norm())
    }

    /// Largest `||a_reduced|² − |a_projected|²|` over times and components.
    pub fn max_probability_deviation(&self) -> f64 {
        self.max_over(|a, b| (a.norm_sqr() - b.norm_sqr()).abs())
    }

    fn max_over(&self, f: impl Fn(Complex64, Complex64) -> f64) -> f64 {
        self.reduced
            .iter()
            .zip(&self.projected)
            .flat_map(|(r, p)| r.iter().zip(p).map(|(a, b)| f(*a, *b)))
            .fold(0.0, f64::max)
    }
}

/// Evolves the full chain from site 1 and the reduced model from `|L⟩`, and
/// projects the full state onto the instantaneous analytic basis.
pub fn compare_projections(
    spec: &ChainSpec,
    schedule: &Schedule,
    grid: &TimeGrid,
) -> Result<ProjectionComparison> {
    require_interfaced(spec)?;
    schedule.check_family(spec)?;
    let reduced = evolve_reduced(spec, schedule, &ReducedState::left(grid.start()), grid)?;

    let initial = WaveFunction::localized(spec.sites(), 0, grid.start());
    let mut times = Vec::new();
    let mut projected = Vec::new();
    propagate(
        initial.amplitudes(),
        grid,
        |t| schedule.hamiltonian(spec, t),
        |t, psi| {
            let states = analytic_states(spec, &schedule.couplings(t)?)?;
            let wf = WaveFunction::new(psi.to_vec(), t)?;
            times.push(t);
            projected.push(project_onto_basis(&states, &wf));
            Ok(())
        },
    )?;
    Ok(ProjectionComparison {
        times,
        reduced: reduced.iter().map(ReducedState::amplitudes).collect(),
        projected,
    })
}

/// `m[a][b] = ⟨a|∂_t b⟩` over the basis `L, C, R`, by central differences.
///
/// These are the couplings the reduced model neglects.
pub fn basis_derivative_overlaps(
    spec: &ChainSpec,
    schedule: &Schedule,
    t: f64,
    h: f64,
) -> Result<[[f64; 3]; 3]> {
    require_interfaced(spec)?;
    let at = |s: f64| analytic_states(spec, &schedule.couplings(s)?);
    let (here, ahead, behind) = (at(t)?, at(t + h)?, at(t - h)?);
    let basis = |s: &TopoStateSet| [s.left.clone(), s.center.clone(), s.right.clone()];
    let (b0, b1, b2) = (basis(&here), basis(&ahead), basis(&behind));
    let mut m = [[0.0; 3]; 3];
    for (a, row) in m.iter_mut().enumerate() {
        for (b, out) in row.iter_mut().enumerate() {
            *out = b0[a]
                .iter()
                .zip(b1[b].iter().zip(&b2[b]))
                .map(|(x, (p, q))| x * (p - q) / (2.0 * h))
                .sum();
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::CtapPulse;

    fn fig2() -> Schedule {
        Schedule::ctap(
            CtapPulse {
                t2: 1.0,
                omega_max: 0.9,
                width: 150.0,
                delay: 50.0,
            },
            800.0,
        )
        .unwrap()
    }

    fn apply(h: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = (0..3).map(|j| h[i][j] * v[j]).sum();
        }
        out
    }

    #[test]
    fn hamiltonian_layout() {
        assert_eq!(reduced_hamiltonian(0.0, 0.0), [[0.0; 3]; 3]);
        let h = reduced_hamiltonian(3.0, 4.0);
        assert_eq!(h[0][1], 3.0);
        assert_eq!(h[2][1], 4.0);
        assert_eq!(h[0][2], 0.0);
    }

    #[test]
    fn three_four_five() {
        let s = reduced_spectrum(3.0, 4.0).unwrap();
        assert_eq!((s.e_minus, s.e0, s.e_plus), (-5.0, 0.0, 5.0));
        assert!((s.dark[0] - 0.8).abs() < 1e-15);
        assert_eq!(s.dark[1], 0.0);
        assert!((s.dark[2] + 0.6).abs() < 1e-15);
        let h = reduced_hamiltonian(3.0, 4.0);
        for (v, e) in [(s.bright_plus, 5.0), (s.bright_minus, -5.0)] {
            let hv = apply(&h, &v);
            for i in 0..3 {
                assert!((hv[i] - e * v[i]).abs() < 1e-14);
            }
            let n: f64 = v.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn equal_rates_dark_state() {
        let s = reduced_spectrum(0.3, 0.3).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.dark[0] - r).abs() < 1e-15 && (s.dark[2] + r).abs() < 1e-15);
    }

    #[test]
    fn dark_state_limits() {
        let early = reduced_spectrum(1e-12, 1.0).unwrap().dark;
        assert!((early[0] - 1.0).abs() < 1e-12);
        let late = reduced_spectrum(1.0, 1e-12).unwrap().dark;
        assert!((late[2] + 1.0).abs() < 1e-12);
        assert_eq!(
            reduced_spectrum(0.0, 0.0),
            Err(Error::Degenerate { dimension: 3 })
        );
    }

    #[test]
    fn rabi_between_center_and_left() {
        let omega = 0.37;
        let grid = TimeGrid::new(0.0, 20.0, 0.05, 41).unwrap();
        let start = ReducedState::new(0.0.into(), 1.0.into(), 0.0.into(), 0.0).unwrap();
        let traj = evolve_reduced_with(
            |_| {
                Ok(OverlapRates {
                    left: omega,
                    right: 0.0,
                })
            },
            &start,
            &grid,
        )
        .unwrap();
        for s in &traj {
            let want = (omega * s.time).cos().powi(2);
            assert!((s.probabilities()[1] - want).abs() < 1e-12);
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rates_freeze_the_state() {
        let grid = TimeGrid::new(0.0, 5.0, 0.1, 3).unwrap();
        let start =
            ReducedState::new(0.6.into(), 0.0.into(), Complex64::new(0.0, 0.8), 0.0).unwrap();
        let traj = evolve_reduced_with(
            |_| {
                Ok(OverlapRates {
                    left: 0.0,
                    right: 0.0,
                })
            },
            &start,
            &grid,
        )
        .unwrap();
        assert_eq!(traj.last().unwrap().amplitudes(), start.amplitudes());
    }

    #[test]
    fn rejects_unnormalized_start() {
        assert!(ReducedState::new(1.0.into(), 1.0.into(), 0.0.into(), 0.0).is_err());
    }

    #[test]
    fn fig3_reduced_transfer() {
        let spec = ChainSpec::interfaced_ssh(16).unwrap();
        let s = fig2();
        let grid = TimeGrid::for_schedule(&s, None, 81).unwrap();
        let traj = evolve_reduced(&spec, &s, &ReducedState::left(grid.start()), &grid).unwrap();
        let last = traj.last().unwrap();
        assert!(last.probabilities()[2] > 0.9);
        let peak_c = traj
            .iter()
            .map(|r| r.probabilities()[1])
            .fold(0.0, f64::max);
        assert!(peak_c < 0.1, "{peak_c}");
        for r in &traj {
            assert!((r.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn energy_discrepancy_grows_for_short_chains() {
        let s = fig2();
        let grid: Vec<f64> = (0..=32).map(|i| -400.0 + 25.0 * i as f64).collect();
        let worst = |n| {
            compare_reduced_vs_exact(&ChainSpec::interfaced_ssh(n).unwrap(), &s, &grid)
                .unwrap()
                .iter()
                .map(EnergyComparison::discrepancy)
                .fold(0.0, f64::max)
        };
        let (long, short) = (worst(16), worst(8));
        assert!(short > long, "{short} vs {long}");
    }

    #[test]
    fn energy_comparison_at_flat_band_edge() {
        let spec = ChainSpec::interfaced_ssh(16).unwrap();
        let c = compare_reduced_vs_exact(&spec, &fig2(), &[-400.0]).unwrap();
        assert!(c[0].discrepancy() < 1e-12);
        assert!(c[0].exact.iter().all(|e| e.abs() < 1e-12));
    }

    #[test]
    fn comparison_requires_interfaced_chain() {
        let spec = ChainSpec::odd_ssh(16).unwrap();
        assert!(compare_reduced_vs_exact(&spec, &fig2(), &[0.0]).is_err());
    }

    #[test]
    fn basis_overlaps_vanish_where_expected() {
        let spec = ChainSpec::interfaced_ssh(16).unwrap();
        let s = fig2();
        let states = analytic_states(&spec, &s.couplings(0.0).unwrap()).unwrap();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        assert_eq!(dot(&states.left, &states.center), 0.0);
        assert_eq!(dot(&states.right, &states.center), 0.0);

        for t in [-100.0, 0.0, 100.0] {
            let m = basis_derivative_overlaps(&spec, &s, t, 1e-3).unwrap();
            // disjoint supports decouple every pair; normalization keeps the
            // diagonal at zero
            for a in 0..3 {
                for b in 0..3 {
                    if a == b {
                        assert!(m[a][a].abs() < 1e-8, "t = {t}: {m:?}");
                    } else {
                        assert_eq!(m[a][b], 0.0);
                    }
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn apply(h: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
            let mut out = [0.0; 3];
            for i in 0..3 {
                out[i] = (0..3).map(|j| h[i][j] * v[j]).sum();
            }
            out
        }

        proptest! {
            #[test]
            fn eigenpairs_satisfy_reduced_hamiltonian(
                l in -2.0f64..2.0, r in -2.0f64..2.0,
            ) {
                prop_assume!(l.hypot(r) > 1e-6);
                let h = reduced_hamiltonian(l, r);
                let s = reduced_spectrum(l, r).unwrap();
                for (e, v) in [(s.e0, s.dark), (s.e_plus, s.bright_plus), (s.e_minus, s.bright_minus)] {
                    let hv = apply(&h, &v);
                    let n: f64 = v.iter().map(|x| x * x).sum();
                    prop_assert!((n - 1.0).abs() < 1e-12);
                    for k in 0..3 {
                        prop_assert!((hv[k] - e * v[k]).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
