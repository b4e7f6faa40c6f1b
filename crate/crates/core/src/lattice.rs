//! Nearest-neighbour hopping matrices for the three chain families.
//!
//! Sites are labelled `1..=dim` in the guide and in every external interface;
//! internally all indices are 0-based. A [`HamiltonianMatrix`] keeps only the
//! diagonal and the superdiagonal; the dense view is available on request.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which Hamiltonian a chain realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Two SSH chains of opposite dimerization joined at site `N`; `2N - 1` sites.
    InterfacedSsh,
    /// Dimerized chain with staggered potential `±Δ`; `2N` sites.
    RiceMele,
    /// SSH chain with an odd number `2N - 1` of sites.
    OddSsh,
}

impl Family {
    /// Zero diagonal, bipartite hopping.
    pub fn is_chiral(self) -> bool {
        !matches!(self, Family::RiceMele)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::InterfacedSsh => "interfaced-ssh",
            Family::RiceMele => "rice-mele",
            Family::OddSsh => "odd-ssh",
        })
    }
}

/// Chain family plus the half-size parameter `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainSpec {
    family: Family,
    n_half: usize,
}

impl ChainSpec {
    pub fn new(family: Family, n_half: usize) -> Result<Self> {
        if n_half < 2 {
            return Err(Error::InvalidChain(format!(
                "N must be at least 2, got {n_half}"
            )));
        }
        if family == Family::InterfacedSsh && !n_half.is_multiple_of(2) {
            return Err(Error::InvalidChain(format!(
                "interfaced SSH chain needs even N, got {n_half}"
            )));
        }
        Ok(Self { family, n_half })
    }

    pub fn interfaced_ssh(n_half: usize) -> Result<Self> {
        Self::new(Family::InterfacedSsh, n_half)
    }

    pub fn rice_mele(n_half: usize) -> Result<Self> {
        Self::new(Family::RiceMele, n_half)
    }

    pub fn odd_ssh(n_half: usize) -> Result<Self> {
        Self::new(Family::OddSsh, n_half)
    }

    /// Builds the spec from a total site count (`2N - 1` or `2N`).
    pub fn from_sites(family: Family, sites: usize) -> Result<Self> {
        let n_half = match family {
            Family::RiceMele if sites.is_multiple_of(2) => sites / 2,
            Family::InterfacedSsh | Family::OddSsh if sites % 2 == 1 => sites.div_ceil(2),
            _ => {
                return Err(Error::InvalidChain(format!(
                    "{family} chain cannot have {sites} sites"
                )))
            }
        };
        Self::new(family, n_half)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n_half(&self) -> usize {
        self.n_half
    }

    pub fn sites(&self) -> usize {
        match self.family {
            Family::RiceMele => 2 * self.n_half,
            Family::InterfacedSsh | Family::OddSsh => 2 * self.n_half - 1,
        }
    }

    /// 0-based index of the right edge site, the target of every transfer protocol.
    pub fn target_site(&self) -> usize {
        self.sites() - 1
    }

    /// Builds the matrix of this chain for the given couplings.
    pub fn hamiltonian(&self, c: &CouplingSnapshot) -> HamiltonianMatrix {
        match self.family {
            Family::InterfacedSsh => interfaced_bonds(self.n_half, c),
            Family::RiceMele => rice_mele_bonds(self.n_half, c),
            Family::OddSsh => odd_bonds(self.n_half, c),
        }
    }

    fn expect(&self, family: Family) -> Result<()> {
        if self.family == family {
            Ok(())
        } else {
            Err(Error::FamilyMismatch {
                expected: family,
                found: self.family,
            })
        }
    }
}

/// Instantaneous coupling values. Fields a family does not use are ignored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CouplingSnapshot {
    pub t1: f64,
    pub t2: f64,
    /// Right-chain weak hopping (interfaced chain only).
    pub t1_prime: f64,
    /// Staggered potential (Rice-Mele only).
    pub delta: f64,
}

impl CouplingSnapshot {
    pub fn ssh(t1: f64, t2: f64) -> Self {
        Self {
            t1,
            t2,
            ..Self::default()
        }
    }

    pub fn interfaced(t1: f64, t2: f64, t1_prime: f64) -> Self {
        Self {
            t1,
            t2,
            t1_prime,
            delta: 0.0,
        }
    }

    pub fn rice_mele(t1: f64, t2: f64, delta: f64) -> Self {
        Self {
            t1,
            t2,
            t1_prime: 0.0,
            delta,
        }
    }

    /// Multiplies every field by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            t1: alpha * self.t1,
            t2: alpha * self.t2,
            t1_prime: alpha * self.t1_prime,
            delta: alpha * self.delta,
        }
    }
}

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl HamiltonianMatrix {
    /// `offdiag[k]` couples sites `k` and `k + 1`.
    pub fn from_bands(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || offdiag.len() + 1 != diag.len() {
            return Err(Error::InvalidChain(format!(
                "band lengths {} and {} do not form a tridiagonal matrix",
                diag.len(),
                offdiag.len()
            )));
        }
        Ok(Self { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn superdiagonal(&self) -> &[f64] {
        &self.offdiag
    }

    /// Entry `(i, j)`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.offdiag[i.min(j)],
            _ => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Gershgorin bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let left = if i > 0 {
                    self.offdiag[i - 1].abs()
                } else {
                    0.0
                };
                let right = if i + 1 < n {
                    self.offdiag[i].abs()
                } else {
                    0.0
                };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(v.len(), n, "vector length does not match matrix dimension");
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc += self.offdiag[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    pub fn apply_complex(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(v.len(), n, "vector length does not match matrix dimension");
        (0..n)
            .map(|i| {
                let mut acc = v[i] * self.diag[i];
                if i > 0 {
                    acc += v[i - 1] * self.offdiag[i - 1];
                }
                if i + 1 < n {
                    acc += v[i + 1] * self.offdiag[i];
                }
                acc
            })
            .collect()
    }

    /// `⟨u|H|v⟩` for real vectors.
    pub fn matrix_element(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(self.apply(v)).map(|(a, b)| a * b).sum()
    }

    /// `S H S` with the sublattice parity `S = diag(+1, -1, +1, ...)`.
    pub fn sublattice_conjugate(&self) -> Self {
        Self {
            diag: self.diag.clone(),
            offdiag: self.offdiag.iter().map(|x| -x).collect(),
        }
    }
}

/// Applies the sublattice parity `S = diag(+1, -1, +1, ...)` to a vector.
pub fn sublattice_flip(v: &[f64]) -> Vec<f64> {
    v.iter()
        .enumerate()
        .map(|(i, x)| if i % 2 == 0 { *x } else { -x })
        .collect()
}

/// Interfaced double-SSH chain of `2N - 1` sites.
///
/// The left block (sites `1..=N`) alternates `t1, t2, ..., t1`; the interface
/// bond `N → N+1` is `t1'`; the right block alternates `t2, t1', ..., t1'`.
pub fn build_interfaced_ssh(spec: &ChainSpec, c: &CouplingSnapshot) -> Result<HamiltonianMatrix> {
    spec.expect(Family::InterfacedSsh)?;
    Ok(interfaced_bonds(spec.n_half, c))
}

/// Rice-Mele chain of `2N` sites: diagonal `+Δ, -Δ, ...`, bonds `t1, t2, ..., t1`.
pub fn build_rice_mele(spec: &ChainSpec, c: &CouplingSnapshot) -> Result<HamiltonianMatrix> {
    spec.expect(Family::RiceMele)?;
    Ok(rice_mele_bonds(spec.n_half, c))
}

/// SSH chain of `2N - 1` sites with bonds `t1, t2, ..., t1, t2`.
pub fn build_odd_ssh(spec: &ChainSpec, c: &CouplingSnapshot) -> Result<HamiltonianMatrix> {
    spec.expect(Family::OddSsh)?;
    Ok(odd_bonds(spec.n_half, c))
}

fn interfaced_bonds(n: usize, c: &CouplingSnapshot) -> HamiltonianMatrix {
    let dim = 2 * n - 1;
    // bond k couples 1-based sites k and k+1
    let offdiag = (1..dim)
        .map(|k| match (k < n, k % 2 == 1) {
            (true, true) => c.t1,
            (true, false) => c.t2,
            (false, true) => c.t2,
            (false, false) => c.t1_prime,
        })
        .collect();
    HamiltonianMatrix {
        diag: vec![0.0; dim],
        offdiag,
    }
}

fn rice_mele_bonds(n: usize, c: &CouplingSnapshot) -> HamiltonianMatrix {
    let dim = 2 * n;
    let diag = (0..dim)
        .map(|i| if i % 2 == 0 { c.delta } else { -c.delta })
        .collect();
    let offdiag = (1..dim)
        .map(|k| if k % 2 == 1 { c.t1 } else { c.t2 })
        .collect();
    HamiltonianMatrix { diag, offdiag }
}

fn odd_bonds(n: usize, c: &CouplingSnapshot) -> HamiltonianMatrix {
    let dim = 2 * n - 1;
    let offdiag = (1..dim)
        .map(|k| if k % 2 == 1 { c.t1 } else { c.t2 })
        .collect();
    HamiltonianMatrix {
        diag: vec![0.0; dim],
        offdiag,
    }
}
