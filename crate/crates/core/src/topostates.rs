//! Analytic edge and interface states of the interfaced double-SSH chain.
//!
//! With `X = -t1/t2` and `Y = -t1'/t2` the three nearly-degenerate zero modes are
//!
//! * `|L⟩`: amplitude `X^k` on site `1 + 2k` (left block, odd sites),
//! * `|R⟩`: amplitude `Y^k` on site `2N - 1 - 2k` (right block, odd sites),
//! * `|C⟩`: `X^k` on site `N - 2k` and `Y^k` on site `N + 2k` (even sites).
//!
//! Each pattern is annihilated by `H` everywhere except at one boundary site,
//! which is where the couplings `Ω_L = ⟨L|H|C⟩` and `Ω_R = ⟨R|H|C⟩` come from.

use crate::error::{Error, Result};
use crate::lattice::{ChainSpec, CouplingSnapshot, Family};

const NORM_TOLERANCE: f64 = 1e-10;
const RATE_TOLERANCE: f64 = 1e-10;

/// Normalization constants of the three states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub left: f64,
    pub right: f64,
    pub center: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopoStateSet {
    pub left: Vec<f64>,
    pub center: Vec<f64>,
    pub right: Vec<f64>,
    pub x_ratio: f64,
    pub y_ratio: f64,
    pub norms: Norms,
}

/// The couplings of the reduced three-level model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapRates {
    /// `Ω_L = ⟨L|H|C⟩`
    pub left: f64,
    /// `Ω_R = ⟨R|H|C⟩`
    pub right: f64,
}

impl OverlapRates {
    /// `sqrt(Ω_L² + Ω_R²)`, the bright-state energy.
    pub fn magnitude(&self) -> f64 {
        self.left.hypot(self.right)
    }
}

/// `base^k` by repeated multiplication, so negative bases keep exact signs.
pub(crate) fn int_pow(base: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, _| acc * base)
}

fn check_couplings(spec: &ChainSpec, c: &CouplingSnapshot) -> Result<()> {
    if spec.family() != Family::InterfacedSsh {
        return Err(Error::FamilyMismatch {
            expected: Family::InterfacedSsh,
            found: spec.family(),
        });
    }
    if !(c.t2 > 0.0) {
        return Err(Error::InvalidCouplings(format!(
            "t2 must be positive, got {}",
            c.t2
        )));
    }
    if c.t1.abs() >= c.t2 || c.t1_prime.abs() >= c.t2 {
        return Err(Error::InvalidCouplings(format!(
            "edge states need |t1|, |t1'| < t2 (t1 = {}, t1' = {}, t2 = {})",
            c.t1, c.t1_prime, c.t2
        )));
    }
    Ok(())
}

/// Geometric sum `1 + r² + r⁴ + ... + r^(n-2)` for even `n`, i.e. `(r^n - 1)/(r² - 1)`.
fn closed_norm_sum(r: f64, n: usize) -> f64 {
    (int_pow(r, n) - 1.0) / (r * r - 1.0)
}

/// Closed-form normalization constants.
pub fn norm_constants(n_half: usize, x: f64, y: f64) -> Norms {
    let sx = closed_norm_sum(x, n_half);
    let sy = closed_norm_sum(y, n_half);
    Norms {
        left: sx.recip().sqrt(),
        right: sy.recip().sqrt(),
        center: (sx + sy - 1.0).recip().sqrt(),
    }
}

/// Builds `|L⟩`, `|C⟩`, `|R⟩` for the given couplings.
///
/// The closed-form norms are cross-checked against direct vector
/// normalization; a mismatch beyond `1e-10` is reported as
/// [`Error::Consistency`].
pub fn analytic_states(spec: &ChainSpec, c: &CouplingSnapshot) -> Result<TopoStateSet> {
    check_couplings(spec, c)?;
    let n = spec.n_half();
    let dim = spec.sites();
    let x = -c.t1 / c.t2;
    let y = -c.t1_prime / c.t2;
    let norms = norm_constants(n, x, y);

    let mut left = vec![0.0; dim];
    let mut right = vec![0.0; dim];
    let mut center = vec![0.0; dim];
    let (mut px, mut py) = (1.0, 1.0);
    for k in 0..n / 2 {
        left[2 * k] = norms.left * px;
        right[dim - 1 - 2 * k] = norms.right * py;
        center[n - 1 - 2 * k] = norms.center * px;
        if k > 0 {
            center[n - 1 + 2 * k] = norms.center * py;
        }
        px *= x;
        py *= y;
    }

    for (name, v) in [("left", &left), ("center", &center), ("right", &right)] {
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Consistency(format!(
                "{name} state has norm {norm} after closed-form normalization"
            )));
        }
    }

    Ok(TopoStateSet {
        left,
        center,
        right,
        x_ratio: x,
        y_ratio: y,
        norms,
    })
}

/// Closed forms `Ω_L = N_L N_C t1 X^(N/2-1)` and `Ω_R = N_R N_C t1' Y^(N/2-1)`.
///
/// This is the cheap path used inside integrators; it builds no vectors.
pub fn closed_form_rates(spec: &ChainSpec, c: &CouplingSnapshot) -> Result<OverlapRates> {
    check_couplings(spec, c)?;
    let n = spec.n_half();
    let x = -c.t1 / c.t2;
    let y = -c.t1_prime / c.t2;
    let norms = norm_constants(n, x, y);
    Ok(OverlapRates {
        left: norms.left * norms.center * c.t1 * int_pow(x, n / 2 - 1),
        right: norms.right * norms.center * c.t1_prime * int_pow(y, n / 2 - 1),
    })
}

/// Overlap rates from the closed forms, verified against the direct quadratic
/// forms `⟨L|H|C⟩` and `⟨R|H|C⟩` to `1e-10` relative.
pub fn overlap_rates(
    states: &TopoStateSet,
    c: &CouplingSnapshot,
    spec: &ChainSpec,
) -> Result<OverlapRates> {
    let closed = closed_form_rates(spec, c)?;
    let direct = direct_rates(states, c, spec)?;
    for (name, a, b) in [
        ("Omega_L", closed.left, direct.left),
        ("Omega_R", closed.right, direct.right),
    ] {
        if (a - b).abs() > RATE_TOLERANCE * a.abs().max(b.abs()) {
            return Err(Error::Consistency(format!(
                "{name}: closed form {a:e} disagrees with <.|H|C> = {b:e}"
            )));
        }
    }
    Ok(closed)
}

/// `⟨L|H|C⟩` and `⟨R|H|C⟩` by explicit matrix-vector products.
pub fn direct_rates(
    states: &TopoStateSet,
    c: &CouplingSnapshot,
    spec: &ChainSpec,
) -> Result<OverlapRates> {
    check_couplings(spec, c)?;
    if states.left.len() != spec.sites() {
        return Err(Error::InvalidChain(format!(
            "state set has {} sites, chain has {}",
            states.left.len(),
            spec.sites()
        )));
    }
    let h = spec.hamiltonian(c);
    let hc = h.apply(&states.center);
    let dot = |u: &[f64]| u.iter().zip(&hc).map(|(a, b)| a * b).sum::<f64>();
    Ok(OverlapRates {
        left: dot(&states.left),
        right: dot(&states.right),
    })
}
