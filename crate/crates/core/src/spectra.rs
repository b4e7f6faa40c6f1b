//! Instantaneous spectra along a schedule, state tracking and localization.

use crate::eigen::{eigh, Eigen};
use crate::error::{Error, Result};
use crate::lattice::{ChainSpec, HamiltonianMatrix};
use crate::protocols::Schedule;

/// Energies closer than this (relative to `‖H‖`) are treated as degenerate.
const DEGENERACY_TOLERANCE: f64 = 1e-9;
/// Adjacent-grid overlap below which tracking is declared lost.
const MIN_TRACKING_OVERLAP: f64 = 0.5;

/// Inverse participation ratio `Σ |c_n|⁴` of a normalized vector.
pub fn ipr(v: &[f64]) -> f64 {
    v.iter().map(|x| x.powi(4)).sum()
}

/// One time slice of a spectrum.
#[derive(Debug, Clone)]
pub struct SpectrumSlice {
    pub time: f64,
    pub energies: Vec<f64>,
    /// Phase-fixed eigenvectors, same order as `energies`.
    pub eigen: Eigen,
    pub ipr: Vec<f64>,
    /// Indices (into `energies`) of states inside the bulk gap.
    pub in_gap: Vec<usize>,
}

impl SpectrumSlice {
    pub fn from_matrix(time: f64, h: &HamiltonianMatrix) -> Result<Self> {
        let mut eigen = eigh(h)?;
        eigen.fix_phases();
        let energies = eigen.values().to_vec();
        let ipr = eigen.vectors().map(ipr).collect();
        let in_gap = classify_in_gap(&energies);
        Ok(Self {
            time,
            energies,
            eigen,
            ipr,
            in_gap,
        })
    }

    /// Distance from `E = 0` to the nearest bulk state.
    pub fn band_edge_distance(&self) -> Result<f64> {
        gap_width(&self.energies, &self.in_gap)
    }

    /// In-gap energies, ascending.
    pub fn in_gap_energies(&self) -> Vec<f64> {
        self.in_gap.iter().map(|&i| self.energies[i]).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumSeries {
    pub times: Vec<f64>,
    /// Protocol phase per time, when the schedule defines one.
    pub phases: Vec<Option<f64>>,
    pub slices: Vec<SpectrumSlice>,
    /// `tracked_states[k][label]` is the index at time `k` of the state that
    /// carries `label` (its index at the first time).
    pub tracked_states: Vec<Vec<usize>>,
    /// Largest degenerate cluster per time (1 = non-degenerate).
    pub degeneracy: Vec<usize>,
    /// Smallest matched overlap encountered while tracking.
    pub min_tracking_overlap: f64,
}

impl SpectrumSeries {
    pub fn energies(&self, k: usize) -> &[f64] {
        &self.slices[k].energies
    }

    pub fn ingap_indices(&self, k: usize) -> &[usize] {
        &self.slices[k].in_gap
    }

    pub fn localization(&self, k: usize) -> &[f64] {
        &self.slices[k].ipr
    }

    /// Energy gap between sorted states `index` and `index - 1` at every time.
    pub fn level_spacing(&self, index: usize) -> Vec<f64> {
        self.slices
            .iter()
            .map(|s| s.energies[index] - s.energies[index - 1])
            .collect()
    }
}

/// Eigendecomposes `H(t)` at each grid time and tracks states across the grid.
pub fn instantaneous_spectrum(
    spec: &ChainSpec,
    schedule: &Schedule,
    grid: &[f64],
) -> Result<SpectrumSeries> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty time grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid(
            "time grid must be strictly increasing".into(),
        ));
    }
    let slices = grid
        .iter()
        .map(|&t| SpectrumSlice::from_matrix(t, &schedule.hamiltonian(spec, t)?))
        .collect::<Result<Vec<_>>>()?;

    let dim = spec.sites();
    let clusters: Vec<Vec<usize>> = slices.iter().map(degenerate_clusters).collect();
    let degeneracy = clusters
        .iter()
        .map(|c| c.iter().copied().max().unwrap_or(1))
        .collect();

    let mut tracked_states = vec![(0..dim).collect::<Vec<_>>()];
    let mut min_overlap = 1.0_f64;
    for k in 1..slices.len() {
        let (prev, next) = (&slices[k - 1], &slices[k]);
        let assignment = match_states(prev, &clusters[k - 1], next, &clusters[k]);
        let mut labels = vec![0; dim];
        for (label, &old_index) in tracked_states[k - 1].iter().enumerate() {
            let (new_index, overlap) = assignment[old_index];
            if overlap < MIN_TRACKING_OVERLAP {
                return Err(Error::Tracking {
                    time: next.time,
                    overlap,
                });
            }
            min_overlap = min_overlap.min(overlap);
            labels[label] = new_index;
        }
        tracked_states.push(labels);
    }

    Ok(SpectrumSeries {
        times: grid.to_vec(),
        phases: grid.iter().map(|&t| schedule.phase(t)).collect(),
        slices,
        tracked_states,
        degeneracy,
        min_tracking_overlap: min_overlap,
    })
}

/// For each state, the size of the degenerate cluster it belongs to.
fn degenerate_clusters(slice: &SpectrumSlice) -> Vec<usize> {
    let e = &slice.energies;
    let scale = e.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let tol = DEGENERACY_TOLERANCE * scale;
    let mut sizes = vec![1; e.len()];
    let mut start = 0;
    for i in 1..=e.len() {
        if i == e.len() || e[i] - e[i - 1] > tol {
            for s in &mut sizes[start..i] {
                *s = i - start;
            }
            start = i;
        }
    }
    sizes
}

fn cluster_range(slice: &SpectrumSlice, sizes: &[usize], index: usize) -> std::ops::Range<usize> {
    let e = &slice.energies;
    let scale = e.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let tol = DEGENERACY_TOLERANCE * scale;
    let mut lo = index;
    while lo > 0 && e[lo] - e[lo - 1] <= tol {
        lo -= 1;
    }
    lo..lo + sizes[lo]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Norm of the projection of `v` onto the span of states `range` of `slice`.
fn subspace_overlap(v: &[f64], slice: &SpectrumSlice, range: std::ops::Range<usize>) -> f64 {
    range
        .map(|j| dot(v, slice.eigen.vector(j)).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Greedy maximal-overlap assignment from `prev` to `next`.
///
/// States in degenerate clusters are compared through the norm of their
/// projection onto the other side's cluster, so arbitrary rotations inside a
/// degenerate subspace do not break tracking.
fn match_states(
    prev: &SpectrumSlice,
    prev_sizes: &[usize],
    next: &SpectrumSlice,
    next_sizes: &[usize],
) -> Vec<(usize, f64)> {
    let n = prev.energies.len();
    let mut overlap = vec![vec![0.0; n]; n];
    for (i, row) in overlap.iter_mut().enumerate() {
        let vi = prev.eigen.vector(i);
        for (j, o) in row.iter_mut().enumerate() {
            let vj = next.eigen.vector(j);
            let mut value = dot(vi, vj).abs();
            if next_sizes[j] > 1 {
                value = value.max(subspace_overlap(
                    vi,
                    next,
                    cluster_range(next, next_sizes, j),
                ));
            }
            if prev_sizes[i] > 1 {
                value = value.max(subspace_overlap(
                    vj,
                    prev,
                    cluster_range(prev, prev_sizes, i),
                ));
            }
            *o = value;
        }
    }

    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    pairs.sort_by(|a, b| {
        overlap[b.0][b.1]
            .total_cmp(&overlap[a.0][a.1])
            .then(a.0.abs_diff(a.1).cmp(&b.0.abs_diff(b.1)))
    });
    let mut assignment = vec![(usize::MAX, 0.0); n];
    let mut taken = vec![false; n];
    let mut remaining = n;
    for (i, j) in pairs {
        if remaining == 0 {
            break;
        }
        if assignment[i].0 == usize::MAX && !taken[j] {
            assignment[i] = (j, overlap[i][j]);
            taken[j] = true;
            remaining -= 1;
        }
    }
    assignment
}

/// Indices of in-gap states, ascending in energy.
///
/// The states closest to `E = 0` are in-gap when a clear spectral gap
/// separates them from the rest: sorting `|E|`, the largest jump among the
/// lowest half of the spectrum must exceed three times the mean level
/// spacing of the band above it. A gapless uniform chain gives a ratio near
/// `π/2` and so has no in-gap states.
pub fn classify_in_gap(energies: &[f64]) -> Vec<usize> {
    let n = energies.len();
    if n < 4 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| energies[a].abs().total_cmp(&energies[b].abs()));
    let mag: Vec<f64> = order.iter().map(|&i| energies[i].abs()).collect();

    let k_max = n / 2;
    let (count, jump) =
        (1..=k_max)
            .map(|k| (k, mag[k] - mag[k - 1]))
            .fold(
                (0, 0.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
    if count == 0 || jump <= 0.0 {
        return Vec::new();
    }
    let mean_spacing = (mag[n - 1] - mag[count]) / (n - 1 - count) as f64;
    if jump <= 3.0 * mean_spacing {
        return Vec::new();
    }
    let mut in_gap = order[..count].to_vec();
    in_gap.sort_unstable();
    in_gap
}

/// Distance from `E = 0` to the nearest state not flagged in-gap.
///
/// For the Rice-Mele chain this approaches `sqrt((t2 - t1)² + Δ²)`, which is
/// half the full gap between the two bands.
pub fn gap_width(energies: &[f64], in_gap: &[usize]) -> Result<f64> {
    if energies.len() < 4 {
        return Err(Error::SpectrumTooSmall(energies.len()));
    }
    Ok(energies
        .iter()
        .enumerate()
        .filter(|(i, _)| !in_gap.contains(i))
        .map(|(_, e)| e.abs())
        .fold(f64::INFINITY, f64::min))
}

/// Zero-energy eigenvector of an odd-dimensional chiral chain.
#[derive(Debug, Clone, PartialEq)]
pub enum DarkState {
    /// The unique zero mode, normalized, largest component positive.
    Unique(Vec<f64>),
    /// The zero-energy subspace has this dimension; no canonical vector.
    Degenerate { dimension: usize },
}

/// Zero mode of `H(t)` for the interfaced chain.
pub fn dark_state_profile(spec: &ChainSpec, schedule: &Schedule, t: f64) -> Result<DarkState> {
    let h = schedule.hamiltonian(spec, t)?;
    if !spec.family().is_chiral() || h.dim() % 2 == 0 {
        return Err(Error::InvalidChain(format!(
            "zero modes are guaranteed only for odd chiral chains, got {}",
            spec.family()
        )));
    }
    chiral_zero_mode(&h)
}

/// Kernel of an odd-dimensional zero-diagonal tridiagonal matrix.
///
/// The kernel lives on the odd sites (1-based). Writing `b_j`, `c_j` for the
/// bonds left and right of even site `2j`, the kernel condition is
/// `b_j x_j + c_j x_{j+1} = 0`, solved by forward (all `c_j ≠ 0`) or backward
/// (all `b_j ≠ 0`) substitution. If neither works the kernel is degenerate
/// and its dimension is counted from the spectrum.
pub fn chiral_zero_mode(h: &HamiltonianMatrix) -> Result<DarkState> {
    let dim = h.dim();
    let bonds = h.superdiagonal();
    let m = dim / 2;
    let left: Vec<f64> = (0..m).map(|j| bonds[2 * j]).collect();
    let right: Vec<f64> = (0..m).map(|j| bonds[2 * j + 1]).collect();

    let mut odd = vec![0.0; m + 1];
    if right.iter().all(|&c| c != 0.0) {
        odd[0] = 1.0;
        for j in 0..m {
            odd[j + 1] = -left[j] / right[j] * odd[j];
        }
    } else if left.iter().all(|&b| b != 0.0) {
        odd[m] = 1.0;
        for j in (0..m).rev() {
            odd[j] = -right[j] / left[j] * odd[j + 1];
        }
    } else {
        let values = crate::eigen::eigvalsh(h)?;
        let tol = 1e-12 * h.norm_bound().max(1.0);
        let dimension = values.iter().filter(|e| e.abs() <= tol).count();
        return Ok(DarkState::Degenerate { dimension });
    }

    let norm = odd.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut v = vec![0.0; dim];
    for (j, x) in odd.iter().enumerate() {
        v[2 * j] = x / norm;
    }
    let pivot = v
        .iter()
        .copied()
        .fold(0.0_f64, |b, x| if x.abs() > b.abs() { x } else { b });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(DarkState::Unique(v))
}
