//! Slice-level kernels for real symmetric tridiagonal (Jacobi) matrices.

use rayon::prelude::*;

use crate::error::{Error, Result};

fn pivot_floor(off: &[f64]) -> f64 {
    let emax = off.iter().fold(1.0f64, |m, e| m.max(e * e));
    f64::MIN_POSITIVE * emax
}

/// Number of eigenvalues strictly below `kappa`, by the inertia of the `LDLᵀ`
/// factorisation of `T − κ`.
///
/// A pivot that vanishes exactly is replaced by `+pivmin`, which makes an
/// eigenvalue sitting exactly on `kappa` uncounted.
pub fn count_below(diag: &[f64], off: &[f64], kappa: f64) -> usize {
    let n = diag.len();
    if n == 0 {
        return 0;
    }
    let pivmin = pivot_floor(off);
    let guard = |q: f64| {
        if q == 0.0 {
            pivmin
        } else if q.abs() < pivmin {
            -pivmin
        } else {
            q
        }
    };
    let mut count = 0;
    let mut q = guard(diag[0] - kappa);
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let e = off[i - 1];
        q = guard((diag[i] - kappa) - e * e / q);
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin enclosure `[lo, hi]` of the spectrum.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    let pad = f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) * 4.0;
    (lo - pad, hi + pad)
}

/// Result of a bisection sweep.
#[derive(Debug, Clone)]
pub struct Bisection {
    pub eigenvalues: Vec<f64>,
    /// Largest half-width of the final bracketing intervals.
    pub half_width: f64,
}

/// Chunk size for distributing eigenvalue indices over workers. Fixed so that
/// the work split does not depend on the pool size.
const INDEX_CHUNK: usize = 32;

/// Eigenvalues with index in `first..last` (0-based, ascending), each bracketed
/// by bisection from the common root interval `[lo, hi]` to width `≤ tol`.
///
/// Every eigenvalue follows the same dyadic refinement path regardless of how
/// the index range is chunked, so results are bit-identical across worker counts.
pub fn bisect_range(
    diag: &[f64],
    off: &[f64],
    lo: f64,
    hi: f64,
    first: usize,
    last: usize,
    tol: f64,
) -> Result<Bisection> {
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    if !(tol > 0.0) || tol < 4.0 * f64::EPSILON * scale {
        return Err(Error::Tolerance(format!(
            "bisection tolerance {tol:e} is below the floating resolution {:e} of the bracket [{lo}, {hi}]",
            4.0 * f64::EPSILON * scale
        )));
    }
    if first >= last {
        return Ok(Bisection {
            eigenvalues: Vec::new(),
            half_width: 0.0,
        });
    }
    let n_lo = count_below(diag, off, lo);
    let n_hi = count_below(diag, off, hi);
    let chunks: Vec<(usize, usize)> = (first..last)
        .step_by(INDEX_CHUNK)
        .map(|a| (a, (a + INDEX_CHUNK).min(last)))
        .collect();
    let parts: Vec<(Vec<f64>, f64)> = chunks
        .par_iter()
        .map(|&(a, b)| bisect_chunk(diag, off, (lo, n_lo), (hi, n_hi), a, b, tol))
        .collect();
    let mut eigenvalues = Vec::with_capacity(last - first);
    let mut half_width: f64 = 0.0;
    for (vals, w) in parts {
        eigenvalues.extend(vals);
        half_width = half_width.max(w);
    }
    Ok(Bisection {
        eigenvalues,
        half_width,
    })
}

fn bisect_chunk(
    diag: &[f64],
    off: &[f64],
    lo: (f64, usize),
    hi: (f64, usize),
    first: usize,
    last: usize,
    tol: f64,
) -> (Vec<f64>, f64) {
    let mut out = Vec::with_capacity(last - first);
    let mut half_width: f64 = 0.0;
    // Depth-first, left child first: eigenvalues come out ascending.
    let mut stack = vec![(lo, hi)];
    while let Some(((a, na), (b, nb))) = stack.pop() {
        // indices in this interval are na..nb; keep only the overlap with first..last
        if nb <= first || na >= last || na == nb {
            continue;
        }
        let mid = 0.5 * (a + b);
        if b - a <= tol || mid <= a || mid >= b {
            for idx in na..nb {
                if idx >= first && idx < last {
                    out.push(mid);
                }
            }
            half_width = half_width.max(0.5 * (b - a));
            continue;
        }
        let nm = count_below(diag, off, mid);
        stack.push(((mid, nm), (b, nb)));
        stack.push(((a, na), (mid, nm)));
    }
    (out, half_width)
}

/// All eigenvalues strictly below `kappa`.
pub fn eigenvalues_below(diag: &[f64], off: &[f64], kappa: f64, tol: f64) -> Result<Bisection> {
    let m = count_below(diag, off, kappa);
    let (lo, _) = gershgorin(diag, off);
    let lo = lo.min(kappa - 1.0);
    bisect_range(diag, off, lo, kappa, 0, m, tol)
}

/// The `k` smallest eigenvalues.
pub fn lowest_eigenvalues(diag: &[f64], off: &[f64], k: usize, tol: f64) -> Result<Bisection> {
    let (lo, hi) = gershgorin(diag, off);
    bisect_range(diag, off, lo, hi, 0, k.min(diag.len()), tol)
}

/// LU factorisation of a tridiagonal matrix with partial pivoting (the
/// `gttrf` scheme): `U` gains a second super-diagonal.
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        // exact singularity is expected when the shift hits an eigenvalue
        let scale = diag.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for v in &mut d {
            if v.abs() < f64::EPSILON * scale {
                *v = f64::EPSILON * scale;
            }
        }
        TridiagLu {
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
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
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

const MAX_INVERSE_ITERATIONS: usize = 50;

/// Unit-Euclidean-norm eigenvector for the eigenvalue closest to `shift`, by
/// inverse iteration from the deterministic seed `((i mod 7) + 1)/7`.
///
/// `tol` is the accuracy of `shift`; two eigenvalues within `10·tol` of it are
/// reported as a degeneracy.
pub fn inverse_iteration(diag: &[f64], off: &[f64], shift: f64, tol: f64) -> Result<Vec<f64>> {
    let n = diag.len();
    let window = 10.0 * tol;
    let inside = count_below(diag, off, shift + window) - count_below(diag, off, shift - window);
    if inside >= 2 {
        return Err(Error::Degeneracy(format!(
            "{inside} eigenvalues within {window:e} of the shift {shift}"
        )));
    }
    let lu = TridiagLu::factor(diag, off, shift);
    let mut v: Vec<f64> = (0..n).map(|i| ((i % 7) + 1) as f64 / 7.0).collect();
    normalize(&mut v);
    for _ in 0..MAX_INVERSE_ITERATIONS {
        let mut w = v.clone();
        lu.solve(&mut w);
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::Iteration("inverse iteration overflowed".into()));
        }
        normalize(&mut w);
        let overlap: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        if overlap < 0.0 {
            w.iter_mut().for_each(|x| *x = -*x);
        }
        let converged = 1.0 - overlap.abs() < 1e-14;
        v = w;
        if converged {
            return Ok(v);
        }
    }
    Err(Error::Iteration(format!(
        "inverse iteration at shift {shift} did not converge in {MAX_INVERSE_ITERATIONS} steps"
    )))
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}
