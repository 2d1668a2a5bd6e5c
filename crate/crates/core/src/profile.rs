//! Spectral zeta of `P_1`, the Weyl constant, and the boundary concentration
//! profiles `B(x)` and `A(u)`.
//!
//! With `a_k = λ_k^{-1/2}` the profile is
//! `B(x) = (l_cl/C) Σ_k d ∫_0^{a_k} t^d |φ_k(t x)|² dt`, and substituting
//! `y = t x` gives the equivalent moment form `d x^{-d-1} M_k(a_k x)` with
//! `M_k(Y) = ∫_0^Y y^d |φ_k|²`. Each term carries mass `(l_cl/C) λ_k^{-d/2}`.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::emit::{fmt_f64, to_json};
use crate::error::{Error, Result};
use crate::params::{alpha_to_beta, map_x_to_u, GrushinParams};
use crate::scaling::ReferenceSpectrum;

/// `Σ_k λ_k^{-s}` over the retained eigenvalues plus a tail estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Zeta {
    /// Partial sum plus tail estimate.
    pub value: f64,
    pub partial_sum: f64,
    pub tail_estimate: f64,
    pub k_used: usize,
    /// Exponent `p` of the fitted growth `λ_k ≈ c k^p`.
    pub growth_exponent: f64,
}

/// Growth exponent fitted by least squares on `log λ_k` against `log k` over
/// the last decade `k ∈ [K/10, K]`.
fn fit_growth(eigenvalues: &[f64], fallback: f64) -> f64 {
    let k = eigenvalues.len();
    let first = (k / 10).max(1);
    if k - first + 1 < 3 {
        return fallback;
    }
    let pts: Vec<(f64, f64)> = (first..=k)
        .map(|i| ((i as f64).ln(), eigenvalues[i - 1].ln()))
        .collect();
    fit_line(&pts).0
}

/// Least-squares `(slope, intercept)` through the points.
pub(crate) fn fit_line(pts: &[(f64, f64)]) -> (f64, f64) {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn spectral_zeta(r: &ReferenceSpectrum, exponent: f64, k_used: usize) -> Result<Zeta> {
    let p = &r.params;
    if (exponent - p.d / 2.0).abs() <= 1e-15 * p.d {
        p.require_supercritical()?;
    } else if !(exponent * p.eigenvalue_growth() > 1.0) {
        return Err(Error::Regime(format!(
            "zeta at exponent {exponent} diverges for eigenvalue growth k^{}",
            p.eigenvalue_growth()
        )));
    }
    if k_used == 0 || k_used > r.k_max() {
        return Err(Error::Range(format!(
            "k_used = {k_used} outside 1..={}",
            r.k_max()
        )));
    }
    let lambdas = &r.eigenvalues[..k_used];
    let partial_sum: f64 = lambdas.iter().map(|l| l.powf(-exponent)).sum();
    let mut growth = fit_growth(lambdas, p.eigenvalue_growth());
    if !(growth * exponent > 1.0) {
        growth = p.eigenvalue_growth();
    }
    // λ_k ≈ c k^p anchored at the last retained eigenvalue; ∫_{K+1/2}^∞ (c k^p)^{-s} dk
    let kk = k_used as f64;
    let c = lambdas[k_used - 1] / kk.powf(growth);
    let q = growth * exponent;
    let tail_estimate = c.powf(-exponent) * (kk + 0.5).powf(1.0 - q) / (q - 1.0);
    Ok(Zeta {
        value: partial_sum + tail_estimate,
        partial_sum,
        tail_estimate,
        k_used,
        growth_exponent: growth,
    })
}

/// `C = l_cl · ζ(d/2)`, the coefficient of `N(λ) ≈ C v_G(M) λ^{d/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylConstant {
    pub value: f64,
    pub zeta_value: f64,
    pub k_used: usize,
    pub tail_estimate: f64,
}

impl WeylConstant {
    pub fn from_zeta(params: &GrushinParams, zeta: &Zeta) -> Self {
        WeylConstant {
            value: params.l_cl * zeta.value,
            zeta_value: zeta.value,
            k_used: zeta.k_used,
            tail_estimate: zeta.tail_estimate,
        }
    }
}

pub fn weyl_constant(r: &ReferenceSpectrum) -> Result<WeylConstant> {
    let zeta = spectral_zeta(r, r.params.d / 2.0, r.k_max())?;
    Ok(WeylConstant::from_zeta(&r.params, &zeta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProfileKind {
    #[serde(rename = "B")]
    BOfX,
    #[serde(rename = "A")]
    AOfU,
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileKind::BOfX => "B",
            ProfileKind::AOfU => "A",
        })
    }
}

/// A sampled profile with its normalization bookkeeping.
///
/// The mass balance is `grid_integral + beyond_grid_mass + k_tail_mass`,
/// where the last two are the exact mass of the retained terms beyond the last
/// abscissa and the estimated mass of the terms `k > k_used`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryProfile {
    pub kind: ProfileKind,
    pub n: usize,
    pub beta: f64,
    pub alpha: Option<f64>,
    pub k_used: usize,
    pub normalization_defect: f64,
    pub defect_bound: f64,
    pub zeta_tail_estimate: f64,
    pub grid_integral: f64,
    pub beyond_grid_mass: f64,
    pub k_tail_mass: f64,
    /// Observed power of vanishing at the origin.
    pub vanishing_order: Option<f64>,
    /// Abscissae beyond the range where the retained terms dominate.
    pub support_warning: bool,
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
}

/// Default declared bound on `|∫B − 1|`.
pub const DEFECT_BOUND: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    /// Minimum t-points per term.
    pub t_points: usize,
    /// Additional t-points per sign change of `φ_k` inside the integration range.
    pub points_per_node: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            t_points: 256,
            points_per_node: 16,
        }
    }
}

/// Default abscissae: 400 uniform points on `[0, 1.2 x_ref/√λ_1]`, continued
/// geometrically to `x_ref √λ_K` where the retained terms stop dominating.
pub fn default_x_grid(r: &ReferenceSpectrum) -> Vec<f64> {
    let x_ref = r.truncation.x_max;
    let near = 1.2 * x_ref / r.eigenvalues[0].sqrt();
    let far = far_limit(r);
    let mut xs: Vec<f64> = (0..400).map(|i| near * i as f64 / 399.0).collect();
    if far > near {
        let step = (far / near).powf(1.0 / FAR_POINTS as f64);
        let mut x = near;
        for _ in 0..FAR_POINTS {
            x *= step;
            xs.push(x);
        }
    }
    xs
}

/// Geometric continuation points of the default grid.
const FAR_POINTS: usize = 200;

fn far_limit(r: &ReferenceSpectrum) -> f64 {
    r.truncation.x_max * r.eigenvalues.last().expect("nonempty").sqrt()
}

/// Per-term data on the reference grid.
struct Term {
    a: f64,
    /// `M(y_i)` and `F(y_i) = ∫_{y_i}^∞ |φ|²` at the nodes, with `y_0 = 0` prepended.
    moments: Vec<f64>,
    tails: Vec<f64>,
    /// Positions of sign changes.
    zeros: Vec<f64>,
}

impl Term {
    fn new(r: &ReferenceSpectrum, k: usize) -> Term {
        let g = r.grid;
        let h = g.h();
        let d = r.params.d;
        let phi = &r.eigenfunctions[k - 1];
        let mut ys = vec![0.0];
        ys.extend(g.nodes());
        let mut vals = vec![0.0];
        vals.extend(phi.iter().map(|v| v * v));
        ys.push(g.x_max);
        vals.push(0.0);
        let mut moments = vec![0.0; ys.len()];
        let mut mass = vec![0.0; ys.len()];
        for i in 1..ys.len() {
            let f0 = ys[i - 1].powf(d) * vals[i - 1];
            let f1 = ys[i].powf(d) * vals[i];
            moments[i] = moments[i - 1] + 0.5 * h * (f0 + f1);
            mass[i] = mass[i - 1] + 0.5 * h * (vals[i - 1] + vals[i]);
        }
        let total = *mass.last().expect("nonempty");
        let tails = mass.iter().map(|m| (total - m).max(0.0)).collect();
        let zeros = phi
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] * w[1] < 0.0)
            .map(|(i, _)| g.node(i))
            .collect();
        Term {
            a: r.eigenvalues[k - 1].powf(-0.5),
            moments,
            tails,
            zeros,
        }
    }

    fn lookup(table: &[f64], h: f64, y: f64) -> f64 {
        let pos = y / h;
        let last = table.len() - 1;
        if pos >= last as f64 {
            return table[last];
        }
        let i = pos.floor() as usize;
        let w = pos - i as f64;
        table[i] + w * (table[i + 1] - table[i])
    }

    fn moment(&self, h: f64, y: f64) -> f64 {
        Self::lookup(&self.moments, h, y)
    }

    fn tail(&self, h: f64, y: f64) -> f64 {
        Self::lookup(&self.tails, h, y)
    }

    /// Exact mass of this term beyond `x`, in units of `l_cl/C`:
    /// `a^d [Z^{-d} M(Z) + F(Z)]`, `Z = a x`.
    fn mass_beyond(&self, h: f64, d: f64, x: f64) -> f64 {
        let z = self.a * x;
        let m = if z > 0.0 {
            z.powf(-d) * self.moment(h, z)
        } else {
            0.0
        };
        self.a.powf(d) * (m + self.tail(h, z))
    }
}

/// `d ∫_0^{t_max} t^d |φ(t x)|² dt` by composite trapezoid, `t_max = min(a, x_ref/x)`.
fn term_value(r: &ReferenceSpectrum, k: usize, term: &Term, x: f64, q: &QuadratureConfig) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let d = r.params.d;
    let t_max = term.a.min(r.grid.x_max / x);
    let covered = term.zeros.partition_point(|z| *z <= t_max * x);
    let m = q.t_points.max(q.points_per_node * (covered + 1));
    let dt = t_max / m as f64;
    let phi = &r.eigenfunctions[k - 1];
    let mut sum = 0.0;
    for i in 1..=m {
        let t = dt * i as f64;
        let v = r.grid.interpolate(phi, t * x);
        let w = if i == m { 0.5 } else { 1.0 };
        sum += w * t.powf(d) * v * v;
    }
    d * dt * sum
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Power `p` in `B ≈ c x^p` fitted on the first positive samples.
fn vanishing_order(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .take(8)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    (pts.len() >= 3).then(|| fit_line(&pts).0)
}

/// `B` on the abscissae `x_grid` (ascending, starting at 0), from the first
/// `k_used` reference terms.
pub fn compute_profile_b(
    r: &ReferenceSpectrum,
    x_grid: &[f64],
    quad: &QuadratureConfig,
    k_used: usize,
) -> Result<BoundaryProfile> {
    let p = r.params;
    p.require_supercritical()?;
    if r.eigenfunctions.len() < k_used || k_used == 0 {
        return Err(Error::Range(format!(
            "k_used = {k_used} needs that many reference eigenfunctions (have {})",
            r.eigenfunctions.len()
        )));
    }
    if x_grid.is_empty() || x_grid[0] < 0.0 || x_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::ParameterDomain(
            "x grid must be nonnegative and strictly ascending".into(),
        ));
    }
    if quad.t_points < 2 {
        return Err(Error::ParameterDomain("need at least 2 t-points".into()));
    }
    let zeta = spectral_zeta(r, p.d / 2.0, k_used)?;
    let weyl = WeylConstant::from_zeta(&p, &zeta);
    let prefactor = p.l_cl / weyl.value;

    let terms: Vec<Vec<f64>> = (1..=k_used)
        .into_par_iter()
        .map(|k| {
            let term = Term::new(r, k);
            x_grid.iter().map(|&x| term_value(r, k, &term, x, quad)).collect()
        })
        .collect();
    let mut values = vec![0.0; x_grid.len()];
    for t in &terms {
        for (v, tv) in values.iter_mut().zip(t) {
            *v += tv;
        }
    }
    values.iter_mut().for_each(|v| *v *= prefactor);

    let x_last = *x_grid.last().expect("nonempty");
    let h = r.grid.h();
    let beyond: f64 = (1..=k_used)
        .map(|k| Term::new(r, k).mass_beyond(h, p.d, x_last))
        .sum::<f64>()
        * prefactor;
    let k_tail_mass = prefactor * zeta.tail_estimate;
    let grid_integral = trapezoid(x_grid, &values);
    let defect = (grid_integral + beyond + k_tail_mass - 1.0).abs();
    let support_warning = x_last > far_limit(r) * (1.0 + 1e-12);
    if support_warning {
        log::warn!(
            "profile abscissae reach {x_last}, beyond the reliable range {}",
            far_limit(r)
        );
    }
    Ok(BoundaryProfile {
        kind: ProfileKind::BOfX,
        n: p.n,
        beta: p.beta,
        alpha: None,
        k_used,
        normalization_defect: defect,
        defect_bound: DEFECT_BOUND,
        zeta_tail_estimate: zeta.tail_estimate,
        grid_integral,
        beyond_grid_mass: beyond,
        k_tail_mass,
        vanishing_order: vanishing_order(x_grid, &values),
        support_warning,
        abscissae: x_grid.to_vec(),
        values,
    })
}

/// `B` on the default grid with all reference terms.
pub fn compute_profile_b_default(r: &ReferenceSpectrum) -> Result<BoundaryProfile> {
    r.params.require_supercritical()?;
    compute_profile_b(r, &default_x_grid(r), &QuadratureConfig::default(), r.k_max())
}

/// `A(u) = B(x(u)) u^{-α/2}` on the mapped abscissae `u_i = u(x_i)`.
pub fn compute_profile_a(b: &BoundaryProfile, alpha: f64) -> Result<BoundaryProfile> {
    if b.kind != ProfileKind::BOfX {
        return Err(Error::Consistency("A is built from a B profile".into()));
    }
    let beta = alpha_to_beta(alpha)?;
    if (beta - b.beta).abs() > 1e-12 * b.beta {
        return Err(Error::Consistency(format!(
            "alpha = {alpha} gives beta = {beta}, but the profile has beta = {}",
            b.beta
        )));
    }
    let us = b
        .abscissae
        .iter()
        .map(|x| map_x_to_u(*x, alpha))
        .collect::<Result<Vec<f64>>>()?;
    // A ~ u^{p(1 − α/2) − α/2} at the origin
    let endpoint_exponent = b.vanishing_order.map(|p| p * (1.0 - alpha / 2.0) - alpha / 2.0);
    let values: Vec<f64> = us
        .iter()
        .zip(&b.values)
        .map(|(&u, &v)| {
            if u > 0.0 {
                v * u.powf(-alpha / 2.0)
            } else {
                match endpoint_exponent {
                    Some(e) if e > 0.0 => 0.0,
                    _ => v,
                }
            }
        })
        .collect();
    let grid_integral = trapezoid(&us, &values);
    let defect = (grid_integral + b.beyond_grid_mass + b.k_tail_mass - 1.0).abs();
    Ok(BoundaryProfile {
        kind: ProfileKind::AOfU,
        alpha: Some(alpha),
        normalization_defect: defect,
        defect_bound: 2.0 * b.defect_bound,
        grid_integral,
        vanishing_order: vanishing_order(&us, &values),
        abscissae: us,
        values,
        ..b.clone()
    })
}

/// Smallest abscissa whose cumulative trapezoid integral reaches `p` of the grid total.
pub fn profile_quantile(prof: &BoundaryProfile, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ParameterDomain(format!(
            "quantile level must lie in [0, 1], got {p}"
        )));
    }
    let xs = &prof.abscissae;
    let total = trapezoid(xs, &prof.values);
    let target = p * total;
    if p == 0.0 {
        return Ok(xs[0]);
    }
    let mut acc = 0.0;
    for i in 1..xs.len() {
        acc += 0.5 * (xs[i] - xs[i - 1]) * (prof.values[i - 1] + prof.values[i]);
        if acc >= target * (1.0 - 1e-15) {
            return Ok(xs[i]);
        }
    }
    Ok(*xs.last().expect("nonempty"))
}

impl BoundaryProfile {
    pub fn to_csv(&self) -> String {
        let mut s = format!("# kind={} n={} beta={}", self.kind, self.n, fmt_f64(self.beta));
        if let Some(a) = self.alpha {
            s.push_str(&format!(" alpha={}", fmt_f64(a)));
        }
        s.push_str(&format!(
            " k_used={} defect={}\n",
            self.k_used,
            fmt_f64(self.normalization_defect)
        ));
        s.push_str(match self.kind {
            ProfileKind::BOfX => "x,value\n",
            ProfileKind::AOfU => "u,value\n",
        });
        for (x, v) in self.abscissae.iter().zip(&self.values) {
            s.push_str(&format!("{},{}\n", fmt_f64(*x), fmt_f64(*v)));
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }

    /// Linear interpolation of the samples, zero outside the abscissae.
    pub fn value_at(&self, x: f64) -> f64 {
        let xs = &self.abscissae;
        if x < xs[0] || x > *xs.last().expect("nonempty") {
            return 0.0;
        }
        let i = xs.partition_point(|t| *t <= x).clamp(1, xs.len() - 1);
        let w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        self.values[i - 1] + w * (self.values[i] - self.values[i - 1])
    }

    /// Trapezoid `∫ P·f` over the abscissae.
    pub fn integrate_against(&self, f: impl Fn(f64) -> f64) -> f64 {
        let g: Vec<f64> = self
            .abscissae
            .iter()
            .zip(&self.values)
            .map(|(x, v)| v * f(*x))
            .collect();
        trapezoid(&self.abscissae, &g)
    }
}
