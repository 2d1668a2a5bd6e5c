//! The reference operator `P_1` and the scaling relations
//! `λ_k(P_μ) = μ^{2/(2+β)} λ_k(P_1)`, `φ_k(x; μ) = μ^{1/(2(2+β))} φ_k^{(1)}(μ^{1/(2+β)} x)`.

use std::env;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::emit::{fmt_f64, to_json, write_artifact};
use crate::error::{Error, Result};
use crate::params::GrushinParams;
use crate::sturm::{
    discretize, solve_half_line, BoundaryCondition, Grid1D, GridPolicy, PotentialSpec, Target,
};

/// Default number of retained reference eigenpairs.
pub const DEFAULT_K_MAX: usize = 200;
/// Default relative Dirichlet/Neumann agreement required of every retained eigenvalue.
pub const DEFAULT_CERT_TOL: f64 = 1e-8;

/// Eigenpairs of `P_1` on a certified truncation of the half-line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpectrum {
    pub params: GrushinParams,
    /// Richardson-extrapolated eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Grid of the eigenfunction samples (the finer of the two Richardson grids).
    pub grid: Grid1D,
    /// `φ_k^{(1)}` at the grid nodes, normalized to `h·Σφ² = 1`.
    pub eigenfunctions: Vec<Vec<f64>>,
    pub truncation: Truncation,
    /// `|λ_{h/2} − λ_h|`, the Richardson discrepancy of each eigenvalue.
    pub discretization_error: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub x_max: f64,
    pub certificate_tol: f64,
    /// Relative Dirichlet/Neumann gap for each eigenvalue.
    pub gaps: Vec<f64>,
}

impl ReferenceSpectrum {
    pub fn k_max(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.k_max() {
            return Err(Error::Range(format!("k = {k} outside 1..={}", self.k_max())));
        }
        Ok(self.eigenvalues[k - 1])
    }

    /// Linearly interpolated `φ_k^{(1)}(x)`, zero outside the truncation.
    pub fn eigenfunction_at(&self, k: usize, x: f64) -> f64 {
        self.grid.interpolate(&self.eigenfunctions[k - 1], x)
    }

    /// Same spectrum restricted to the first `k` eigenpairs.
    pub fn truncated(&self, k: usize) -> ReferenceSpectrum {
        let k = k.min(self.k_max());
        ReferenceSpectrum {
            params: self.params,
            eigenvalues: self.eigenvalues[..k].to_vec(),
            grid: self.grid,
            eigenfunctions: self.eigenfunctions[..k].to_vec(),
            truncation: Truncation {
                x_max: self.truncation.x_max,
                certificate_tol: self.truncation.certificate_tol,
                gaps: self.truncation.gaps[..k].to_vec(),
            },
            discretization_error: self.discretization_error[..k].to_vec(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }

    /// `index,lambda,discretization_error,truncation_gap` rows.
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# n={} beta={} k_max={} x_max={}\nk,lambda,discretization_error,truncation_gap\n",
            self.params.n,
            fmt_f64(self.params.beta),
            self.k_max(),
            fmt_f64(self.truncation.x_max)
        );
        for (i, l) in self.eigenvalues.iter().enumerate() {
            s.push_str(&format!(
                "{},{},{},{}\n",
                i + 1,
                fmt_f64(*l),
                fmt_f64(self.discretization_error[i]),
                fmt_f64(self.truncation.gaps[i])
            ));
        }
        s
    }
}

/// `∫_0^1 √(1 − t^β) dt` by the midpoint rule.
fn wkb_integral(beta: f64) -> f64 {
    let m = 4096;
    (0..m)
        .map(|i| {
            let t = (i as f64 + 0.5) / m as f64;
            (1.0 - t.powf(beta)).sqrt()
        })
        .sum::<f64>()
        / m as f64
}

/// Semiclassical estimate of `λ_k(P_1)` from `∫√(E − x^β) dx = π(k + ν/2)`.
pub fn wkb_estimate(params: &GrushinParams, k: usize) -> f64 {
    let phase = PI * (k as f64 + params.bessel_order() / 2.0);
    let exponent = 0.5 + 1.0 / params.beta;
    (phase / wkb_integral(params.beta)).powf(1.0 / exponent)
}

pub fn reference_spectrum(params: &GrushinParams, k_max: usize, cert_tol: f64) -> Result<ReferenceSpectrum> {
    reference_spectrum_with(params, k_max, cert_tol, &GridPolicy::default())
}

pub fn reference_spectrum_with(
    params: &GrushinParams,
    k_max: usize,
    cert_tol: f64,
    policy: &GridPolicy,
) -> Result<ReferenceSpectrum> {
    if k_max == 0 {
        return Err(Error::ParameterDomain("k_max must be >= 1".into()));
    }
    policy.validate()?;
    let pot = PotentialSpec::model(params, 1.0)?;
    let energy = 1.25 * wkb_estimate(params, k_max);
    let half = solve_half_line(&pot, Target::Lowest { k: k_max, energy }, cert_tol, policy)?;
    let fine_grid = half.operator.grid.refined();
    let fine = discretize(&pot, fine_grid, BoundaryCondition::Dirichlet)?;
    let fine_vals = fine.lowest(k_max)?.eigenvalues;
    if fine_vals.len() < k_max || half.eigenvalues.len() < k_max {
        return Err(Error::Discretization(format!(
            "grid too small for {k_max} eigenvalues"
        )));
    }
    let eigenvalues: Vec<f64> = half
        .eigenvalues
        .iter()
        .zip(&fine_vals)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();
    let discretization_error = half
        .eigenvalues
        .iter()
        .zip(&fine_vals)
        .map(|(c, f)| (f - c).abs())
        .collect();
    let eigenfunctions = fine_vals
        .par_iter()
        .map(|l| fine.eigenfunction(*l, fine.default_tol(*l)))
        .collect::<Result<Vec<_>>>()?;
    for w in eigenvalues.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Discretization(
                "reference eigenvalues are not strictly ascending".into(),
            ));
        }
    }
    Ok(ReferenceSpectrum {
        params: *params,
        eigenvalues,
        grid: fine_grid,
        eigenfunctions,
        truncation: Truncation {
            x_max: fine_grid.x_max,
            certificate_tol: cert_tol,
            gaps: half.gaps,
        },
        discretization_error,
    })
}

/// Cache directory named by `GRUSHIN_CACHE_DIR`, if set.
pub fn cache_dir_from_env() -> Option<PathBuf> {
    env::var_os("GRUSHIN_CACHE_DIR").map(PathBuf::from)
}

fn cache_file(dir: &Path, params: &GrushinParams, k_max: usize, cert_tol: f64) -> PathBuf {
    dir.join(format!(
        "reference_n{}_beta{}_k{}_tol{}.json",
        params.n,
        fmt_f64(params.beta),
        k_max,
        fmt_f64(cert_tol)
    ))
}

/// [`reference_spectrum`] through a JSON cache keyed by `(n, β, k_max, cert_tol)`.
/// Unreadable or mismatching cache files are recomputed and overwritten.
pub fn reference_spectrum_cached(
    params: &GrushinParams,
    k_max: usize,
    cert_tol: f64,
    cache_dir: Option<&Path>,
) -> Result<ReferenceSpectrum> {
    let Some(dir) = cache_dir else {
        return reference_spectrum(params, k_max, cert_tol);
    };
    let path = cache_file(dir, params, k_max, cert_tol);
    if let Ok(text) = fs::read_to_string(&path) {
        match serde_json::from_str::<ReferenceSpectrum>(&text) {
            Ok(r)
                if r.params == *params && r.k_max() == k_max && r.truncation.certificate_tol == cert_tol =>
            {
                log::info!("reference spectrum loaded from {}", path.display());
                return Ok(r);
            }
            _ => log::warn!("ignoring stale cache file {}", path.display()),
        }
    }
    let r = reference_spectrum(params, k_max, cert_tol)?;
    write_artifact(&path, &r.to_json()?)?;
    Ok(r)
}

/// `μ^{2/(2+β)} λ_k(P_1)`.
pub fn scaled_eigenvalue(r: &ReferenceSpectrum, k: usize, mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::ParameterDomain(format!("mu must be positive, got {mu}")));
    }
    Ok(mu.powf(2.0 / (2.0 + r.params.beta)) * r.lambda(k)?)
}

/// `μ^{1/(2(2+β))} φ_k^{(1)}(μ^{1/(2+β)} x)`.
pub fn scaled_eigenfunction(r: &ReferenceSpectrum, k: usize, mu: f64, x: f64) -> f64 {
    let a = mu.powf(1.0 / (2.0 + r.params.beta));
    a.sqrt() * r.eigenfunction_at(k, a * x)
}

/// `n_s(κ)` with a flag set when every retained eigenvalue was counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModeCount {
    pub count: usize,
    pub inconclusive: bool,
}

/// `#{k : s^{2/d} λ_k(P_1) < κ}`.
pub fn n_s(r: &ReferenceSpectrum, kappa: f64, s: f64) -> Result<ModeCount> {
    if !(s > 0.0) {
        return Err(Error::ParameterDomain(format!("s must be positive, got {s}")));
    }
    let factor = s.powf(2.0 / r.params.d);
    let count = r.eigenvalues.partition_point(|l| factor * l < kappa);
    Ok(ModeCount {
        count,
        inconclusive: count == r.k_max(),
    })
}

/// `S = (κ/λ_1)^{d/2}`: no eigenvalue of `P_{s^{2/n}}` lies below `κ` for `s > S`.
pub fn cutoff_s(r: &ReferenceSpectrum, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    Ok((kappa / r.lambda(1)?).powf(r.params.d / 2.0))
}
