//! Symmetric tridiagonal eigensolver.
//!
//! Eigenvalues come from implicit QL iterations; eigenvectors from inverse
//! iteration on a pivoted LU factorization, with Gram–Schmidt inside clusters
//! of close eigenvalues. Cost is O(n²) for the full eigensystem, which keeps
//! grids of a few thousand points cheap.

use crate::error::{Error, Result};

/// Full eigensystem, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// Largest residual ‖Tv − λv‖ over all pairs.
    pub max_residual: f64,
    /// ∞-norm of the matrix.
    pub norm: f64,
}

/// Residual bound ‖Tv − λv‖ ≤ RESIDUAL_TOL·‖T‖ enforced per eigenpair.
pub const RESIDUAL_TOL: f64 = 1e-10;

// eigenvalues closer than this (relative to ‖T‖) are reorthogonalized
const CLUSTER_TOL: f64 = 1e-6;

fn norm_inf(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i].abs();
            if i > 0 {
                s += off[i - 1].abs();
            }
            if i + 1 < n {
                s += off[i].abs();
            }
            s
        })
        .fold(0.0, f64::max)
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(diag: &[f64], off: &[f64], channel: usize) -> Result<Vec<f64>> {
    let n = diag.len();
    if off.len() + 1 != n && !(n == 0 && off.is_empty()) {
        return Err(Error::InvalidInput(format!(
            "tridiagonal shape mismatch: {} diagonal, {} off-diagonal",
            n,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(off);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(Error::EigenNotConverged {
                    channel,
                    index: l,
                    detail: "QL iteration limit reached".into(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

struct PivotedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl PivotedLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        for x in d.iter_mut() {
            if *x == 0.0 {
                *x = tiny;
            }
        }
        PivotedLu {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if !self.swapped[i] {
                b[i + 1] -= self.dl[i] * b[i];
            } else {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            }
        }
        if n == 0 {
            return;
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn matvec(diag: &[f64], off: &[f64], v: &[f64], out: &mut [f64]) {
    let n = diag.len();
    for i in 0..n {
        let mut s = diag[i] * v[i];
        if i > 0 {
            s += off[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            s += off[i] * v[i + 1];
        }
        out[i] = s;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for u in against {
        let dot: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
    }
}

/// Full eigensystem of the symmetric tridiagonal matrix with diagonal `diag`
/// and off-diagonal `off`. `channel` only labels errors.
///
/// Vectors are unit-normalized with their largest-magnitude component
/// positive.
pub fn eigensystem(diag: &[f64], off: &[f64], channel: usize) -> Result<TridiagEigen> {
    let values = eigenvalues(diag, off, channel)?;
    let n = diag.len();
    let norm = norm_inf(diag, off).max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * norm;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut refined = Vec::with_capacity(n);
    let mut cluster_start = 0;
    let mut work = vec![0.0; n];
    let mut max_residual: f64 = 0.0;
    // deterministic start vector
    let mut seed: u64 = 0x9e37_79b9_7f4a_7c15;
    for (idx, &lambda) in values.iter().enumerate() {
        if idx > 0 && (lambda - values[idx - 1]) > CLUSTER_TOL * norm {
            cluster_start = idx;
        }
        // separate shifts inside a cluster so the factorizations differ
        let mut shift = lambda;
        if idx > cluster_start {
            let prev = refined[idx - 1];
            if shift <= prev {
                shift = prev + 10.0 * tiny;
            }
        }
        let lu = PivotedLu::factor(diag, off, shift, tiny);
        let mut v: Vec<f64> = (0..n)
            .map(|_| {
                seed ^= seed << 13;
                seed ^= seed >> 7;
                seed ^= seed << 17;
                (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        normalize(&mut v);
        let mut residual = f64::INFINITY;
        let mut rayleigh = lambda;
        for _ in 0..8 {
            lu.solve(&mut v);
            orthogonalize(&mut v, &vectors[cluster_start..idx]);
            if normalize(&mut v) == 0.0 || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::EigenNotConverged {
                    channel,
                    index: idx,
                    detail: "inverse iteration collapsed".into(),
                });
            }
            matvec(diag, off, &v, &mut work);
            rayleigh = v.iter().zip(&work).map(|(a, b)| a * b).sum();
            residual = work
                .iter()
                .zip(&v)
                .map(|(tv, x)| (tv - rayleigh * x).powi(2))
                .sum::<f64>()
                .sqrt();
            if residual <= 0.01 * RESIDUAL_TOL * norm {
                break;
            }
        }
        if residual > RESIDUAL_TOL * norm {
            return Err(Error::EigenNotConverged {
                channel,
                index: idx,
                detail: format!("residual {residual:e} exceeds {:e}", RESIDUAL_TOL * norm),
            });
        }
        let imax = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if v.get(imax).copied().unwrap_or(0.0) < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        max_residual = max_residual.max(residual);
        refined.push(rayleigh);
        vectors.push(v);
    }
    // Rayleigh quotients replace the QL values
    let values = refined;
    Ok(TridiagEigen {
        values,
        vectors,
        max_residual,
        norm,
    })
}
