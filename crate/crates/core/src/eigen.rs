//! Symmetric tridiagonal eigensolver (implicit QL with Wilkinson-style shifts).
//!
//! This follows the classic `tql2` procedure of Bowdler, Martin, Reinsch and
//! Wilkinson, operating directly on the two bands so the matrix never needs a
//! Householder reduction.

use crate::error::{Error, Result};
use crate::lattice::HamiltonianMatrix;

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    dim: usize,
    values: Vec<f64>,
    // eigenvector k occupies vectors[k * dim..(k + 1) * dim]
    vectors: Vec<f64>,
}

impl Eigen {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.vectors.chunks_exact(self.dim)
    }

    /// Flips each eigenvector so its largest-magnitude component is positive.
    pub fn fix_phases(&mut self) {
        for v in self.vectors.chunks_exact_mut(self.dim) {
            let pivot =
                v.iter().copied().fold(
                    0.0_f64,
                    |best, x| if x.abs() > best.abs() { x } else { best },
                );
            if pivot < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
    }
}

/// Full eigendecomposition of `h`, eigenvalues ascending.
pub fn eigh(h: &HamiltonianMatrix) -> Result<Eigen> {
    let mut ws = Workspace::new(h.dim());
    ws.decompose(h.diagonal(), h.superdiagonal())?;
    ws.sort();
    Ok(Eigen {
        dim: ws.dim,
        values: ws.values,
        vectors: ws.vectors,
    })
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(h: &HamiltonianMatrix) -> Result<Vec<f64>> {
    let mut d = h.diagonal().to_vec();
    let mut e = h.superdiagonal().to_vec();
    e.push(0.0);
    ql_implicit(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Reusable buffers for repeated decompositions of the same size.
///
/// The propagator calls [`Workspace::decompose`] once per time step; results
/// are left unsorted.
#[derive(Debug, Clone)]
pub struct Workspace {
    dim: usize,
    values: Vec<f64>,
    offdiag: Vec<f64>,
    vectors: Vec<f64>,
}

impl Workspace {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            values: vec![0.0; dim],
            offdiag: vec![0.0; dim],
            vectors: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn decompose(&mut self, diag: &[f64], offdiag: &[f64]) -> Result<()> {
        let n = self.dim;
        assert_eq!(diag.len(), n, "diagonal length does not match workspace");
        assert_eq!(
            offdiag.len() + 1,
            n,
            "superdiagonal length does not match workspace"
        );
        self.values.copy_from_slice(diag);
        self.offdiag[..n - 1].copy_from_slice(offdiag);
        self.offdiag[n - 1] = 0.0;
        self.vectors.iter_mut().for_each(|x| *x = 0.0);
        for k in 0..n {
            self.vectors[k * n + k] = 1.0;
        }
        ql_implicit(&mut self.values, &mut self.offdiag, Some(&mut self.vectors))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    fn sort(&mut self) {
        let n = self.dim;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        let values = order.iter().map(|&k| self.values[k]).collect();
        let mut vectors = Vec::with_capacity(n * n);
        for &k in &order {
            vectors.extend_from_slice(&self.vectors[k * n..(k + 1) * n]);
        }
        self.values = values;
        self.vectors = vectors;
    }
}

/// In-place implicit QL. `e[i]` couples `d[i]` and `d[i + 1]`; `e[n - 1]` must be 0.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let max_iter = 30 * n;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::NoConvergence(l));
                }

                // shift from the leading 2x2 block
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if let Some(z) = z.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut((i + 1) * n);
                        let vi = &mut lo[i * n..];
                        let vi1 = &mut hi[..n];
                        for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                            let t = *b;
                            *b = s * *a + c * t;
                            *a = c * *a - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
