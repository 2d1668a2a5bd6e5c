//! The product model `⊕_j P_{μ_j}` on `[0, x_max] × M`, obtained by separating
//! variables over the cross-manifold eigenvalues `μ_j`, and the spectral
//! functionals evaluated on it.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::cross::CrossSpectrum;
use crate::emit::fmt_f64;
use crate::error::{Error, Result};
use crate::params::GrushinParams;
use crate::profile::{fit_line, spectral_zeta, BoundaryProfile};
use crate::scaling::{cutoff_s, n_s, ReferenceSpectrum};
use crate::sturm::{
    discretize, solve_half_line, BoundaryCondition, Grid1D, GridPolicy, PotentialSpec, ScaledShape, Shape,
    Target, TridiagonalOperator,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelOperator {
    pub params: GrushinParams,
    pub cross: CrossSpectrum,
    pub x_max: f64,
    pub right_bc: BoundaryCondition,
    pub policy: GridPolicy,
}

/// Modes solved per parallel batch; batches are consumed in ascending `μ`.
const MODE_CHUNK: usize = 32;

impl ModelOperator {
    pub fn new(
        params: GrushinParams,
        cross: CrossSpectrum,
        x_max: f64,
        right_bc: BoundaryCondition,
        policy: GridPolicy,
    ) -> Result<Self> {
        if !(x_max.is_finite() && x_max > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "x_max must be positive, got {x_max}"
            )));
        }
        if let Some(dim) = cross.dimension() {
            if dim != params.n {
                return Err(Error::Consistency(format!(
                    "cross manifold has dimension {dim} but n = {}",
                    params.n
                )));
            }
        }
        policy.validate()?;
        Ok(ModelOperator {
            params,
            cross,
            x_max,
            right_bc,
            policy,
        })
    }

    fn mode_potential(&self, mu: f64) -> Result<PotentialSpec> {
        PotentialSpec::model(&self.params, mu)
    }

    /// Common grid for every mode at energy `lambda` with perturbation `extra`.
    fn grid(&self, lambda: f64, extra: Option<&ScaledShape>) -> Result<Grid1D> {
        let mut pot = self.mode_potential(0.0)?;
        if let Some(e) = extra {
            pot = pot.with_extra(e.clone());
        }
        Grid1D::new(self.x_max, self.policy.nodes_for(&pot, self.x_max, lambda)?)
    }

    /// Sweeps modes in ascending `μ` until the first one with nothing below
    /// `kappa`, running `solve` on each. Later modes are empty as well because
    /// every mode operator is monotone in `μ`.
    fn sweep<T: Send>(
        &self,
        kappa: f64,
        solve: impl Fn(usize, f64) -> Result<Option<T>> + Sync,
    ) -> Result<Vec<(usize, T)>> {
        let entries = self.cross.entries();
        let mut out = Vec::new();
        for (c, chunk) in entries.chunks(MODE_CHUNK).enumerate() {
            let base = c * MODE_CHUNK;
            let results: Vec<Option<T>> = chunk
                .par_iter()
                .enumerate()
                .map(|(i, e)| solve(base + i, e.mu))
                .collect::<Result<_>>()?;
            for (i, r) in results.into_iter().enumerate() {
                match r {
                    Some(v) => out.push((base + i, v)),
                    None => return Ok(out),
                }
            }
        }
        Err(Error::IncompleteTable(format!(
            "cross spectrum ends at mu = {} but modes up to mu = {} can reach {kappa}",
            self.cross.mu_max(),
            mode_cutoff(&self.params, self.x_max, kappa)
        )))
    }
}

/// Smallest `μ` for which `min_{0<x≤x_max} (C_β x⁻² + μ x^β) ≥ lambda`; modes
/// beyond it have no eigenvalue below `lambda`.
pub fn mode_cutoff(params: &GrushinParams, x_max: f64, lambda: f64) -> f64 {
    let c = params.c_beta;
    let b = params.beta;
    let floor = |mu: f64| {
        let x_star = (2.0 * c / (b * mu)).powf(1.0 / (b + 2.0)).min(x_max);
        c / (x_star * x_star) + mu * x_star.powf(b)
    };
    if floor(0.0f64.max(f64::MIN_POSITIVE)) >= lambda {
        return 0.0;
    }
    let mut hi = 1.0;
    while floor(hi) < lambda {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if floor(mid) < lambda {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    hi
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableEntry {
    pub j: usize,
    pub k: usize,
    pub lambda: f64,
    pub multiplicity: u64,
}

/// Every model eigenvalue up to `lambda_max`, ordered by `(j, k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenTable {
    pub entries: Vec<TableEntry>,
    pub lambda_max: f64,
    pub grid: Grid1D,
    pub right_bc: BoundaryCondition,
    pub volume: f64,
    pub uniform_density: bool,
    /// Eigenfunctions parallel to `entries`, normalized to `h·Σφ² = 1`.
    #[serde(skip)]
    pub vectors: Option<Vec<Vec<f64>>>,
}

pub fn assemble_spectrum(model: &ModelOperator, lambda_max: f64, want_vectors: bool) -> Result<EigenTable> {
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Error::ParameterDomain(format!(
            "lambda_max must be positive, got {lambda_max}"
        )));
    }
    let grid = model.grid(lambda_max, None)?;
    // include eigenvalues equal to lambda_max
    let kappa = lambda_max * (1.0 + 4.0 * f64::EPSILON);
    let modes = model.sweep(kappa, |_, mu| {
        let op = discretize(&model.mode_potential(mu)?, grid, model.right_bc)?;
        let tol = op.default_tol(kappa);
        let vals = op.eigenvalues_below(kappa, tol)?.eigenvalues;
        if vals.is_empty() {
            return Ok(None);
        }
        let vecs = if want_vectors {
            Some(
                vals.iter()
                    .map(|l| op.eigenfunction(*l, tol))
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        Ok(Some((vals, vecs)))
    })?;
    let entries_m = model.cross.entries();
    let mut entries = Vec::new();
    let mut vectors = want_vectors.then(Vec::new);
    for (j, (vals, vecs)) in modes {
        for (i, l) in vals.into_iter().enumerate() {
            entries.push(TableEntry {
                j,
                k: i + 1,
                lambda: l,
                multiplicity: entries_m[j].multiplicity,
            });
        }
        if let (Some(all), Some(v)) = (vectors.as_mut(), vecs) {
            all.extend(v);
        }
    }
    Ok(EigenTable {
        entries,
        lambda_max,
        grid,
        right_bc: model.right_bc,
        volume: model.cross.volume(),
        uniform_density: model.cross.has_uniform_density(),
        vectors,
    })
}

impl EigenTable {
    fn check_range(&self, lambda: f64) -> Result<()> {
        if lambda > self.lambda_max {
            return Err(Error::Range(format!(
                "lambda = {lambda} above the table limit {}",
                self.lambda_max
            )));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,k,multiplicity,lambda\n");
        for e in &self.entries {
            s.push_str(&format!(
                "{},{},{},{}\n",
                e.j,
                e.k,
                e.multiplicity,
                fmt_f64(e.lambda)
            ));
        }
        s
    }
}

/// `N(λ)`: eigenvalues `≤ λ` with multiplicity.
pub fn counting_function(table: &EigenTable, lambda: f64) -> Result<u64> {
    table.check_range(lambda)?;
    Ok(table
        .entries
        .iter()
        .filter(|e| e.lambda <= lambda)
        .map(|e| e.multiplicity)
        .sum())
}

/// `N ≈ constant · λ^exponent` by least squares in log-log coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub constant: f64,
    pub residuals: Vec<f64>,
}

pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<PowerFit> {
    if samples.len() < 3 {
        return Err(Error::ParameterDomain(
            "power-law fit needs at least 3 samples".into(),
        ));
    }
    if samples.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::ParameterDomain(
            "power-law fit needs positive samples".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let (slope, intercept) = fit_line(&pts);
    Ok(PowerFit {
        exponent: slope,
        constant: intercept.exp(),
        residuals: pts.iter().map(|(x, y)| y - (intercept + slope * x)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylFit {
    pub samples: Vec<(f64, u64)>,
    pub slope: f64,
    pub constant: f64,
    pub residuals: Vec<f64>,
}

pub fn weyl_fit(table: &EigenTable, lambdas: &[f64]) -> Result<WeylFit> {
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::ParameterDomain("lambda samples must be ascending".into()));
    }
    let samples = lambdas
        .iter()
        .map(|l| Ok((*l, counting_function(table, *l)?)))
        .collect::<Result<Vec<_>>>()?;
    if let Some((l, _)) = samples.iter().find(|(_, n)| *n == 0) {
        return Err(Error::ParameterDomain(format!(
            "N({l}) = 0 cannot enter a log fit"
        )));
    }
    let fit = fit_power_law(&samples.iter().map(|(l, n)| (*l, *n as f64)).collect::<Vec<_>>())?;
    Ok(WeylFit {
        samples,
        slope: fit.exponent,
        constant: fit.constant,
        residuals: fit.residuals,
    })
}

/// `Σ mult·(λ − λ_i)₊`.
pub fn riesz_mean(table: &EigenTable, lambda: f64) -> Result<f64> {
    table.check_range(lambda)?;
    Ok(table
        .entries
        .iter()
        .filter(|e| e.lambda < lambda)
        .map(|e| e.multiplicity as f64 * (lambda - e.lambda))
        .sum())
}

/// `Tr(Δ + V_λ − λ)₋` with `V_λ(x) = λ V(√λ x)` added to every mode.
pub fn trace_with_potential(model: &ModelOperator, lambda: f64, v: &Shape) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let extra = ScaledShape::semiclassical(v.clone(), lambda);
    let grid = model.grid(lambda, Some(&extra))?;
    let entries = model.cross.entries();
    let modes = model.sweep(lambda, |j, mu| {
        let pot = model.mode_potential(mu)?.with_extra(extra.clone());
        let op = discretize(&pot, grid, model.right_bc)?;
        if op.count_below(lambda) == 0 {
            return Ok(None);
        }
        Ok(Some(entries[j].multiplicity as f64 * op.trace_neg(lambda)?))
    })?;
    Ok(modes.iter().map(|(_, t)| t).sum())
}

/// Composite rule for the `s`-integral of the trace functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SQuadrature {
    pub initial_panels: usize,
    pub max_doublings: usize,
    /// Relative change between successive doublings accepted as converged.
    pub tol: f64,
    pub cert_tol: f64,
    pub policy: GridPolicy,
}

impl Default for SQuadrature {
    fn default() -> Self {
        SQuadrature {
            initial_panels: 16,
            max_doublings: 6,
            tol: 1e-3,
            cert_tol: 1e-8,
            policy: GridPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Rhs {
    pub value: f64,
    /// `l_cl v (2/(d+2)) κ₊^{(d+2)/2} ζ(d/2)` with `κ = 1 − V(∞)`.
    pub closed_form: f64,
    /// `l_cl v ∫ R(s) ds`, the effect of `V − V(∞)`.
    pub remainder: f64,
    pub s_cut: f64,
    pub panels: usize,
    pub converged: bool,
}

/// `l_cl v ∫_0^∞ Tr(P_{s^{2/n}} + V − 1)₋ ds`.
///
/// The far-field constant `V(∞)` only lowers the threshold to `κ = 1 − V(∞)`,
/// so by the scaling law its part integrates in closed form. The decaying part
/// `W = V − V(∞)` enters through `R(s) = Tr(P − κ)₋ − Tr(P + W − κ)₋`, which
/// vanishes for `s > ((κ + sup|W|)/λ_1)^{d/2}` and is integrated numerically;
/// the first panel takes the value at its right node.
pub fn lemma1_rhs(r: &ReferenceSpectrum, v: &Shape, volume: f64, cfg: &SQuadrature) -> Result<Lemma1Rhs> {
    let p = r.params;
    p.require_supercritical()?;
    let d = p.d;
    let zeta = spectral_zeta(r, d / 2.0, r.k_max())?;
    let v_inf = v.far_field();
    let kappa = 1.0 - v_inf;
    let scale = p.l_cl * volume;
    let closed_form = scale * 2.0 / (d + 2.0) * kappa.max(0.0).powf((d + 2.0) / 2.0) * zeta.value;
    let w = v.minus_far_field();
    let w_sup = w.sup_norm();
    if w_sup == 0.0 {
        return Ok(Lemma1Rhs {
            value: closed_form,
            closed_form,
            remainder: 0.0,
            s_cut: cutoff_s(r, kappa.max(f64::MIN_POSITIVE))?,
            panels: 0,
            converged: true,
        });
    }
    let top = kappa + w_sup;
    if !(top > 0.0) {
        return Ok(Lemma1Rhs {
            value: closed_form,
            closed_form,
            remainder: 0.0,
            s_cut: 0.0,
            panels: 0,
            converged: true,
        });
    }
    let s_cut = cutoff_s(r, top)?;
    let remainder_at = |s: f64| -> Result<f64> {
        let mu = s.powf(2.0 / p.n as f64);
        let base = PotentialSpec::model(&p, mu)?;
        let pert = base.clone().with_extra(ScaledShape::plain(w.clone()));
        // grid certified for the perturbed operator, shared by both traces
        let solve = solve_half_line(
            &pert,
            Target::Below(kappa.max(0.0) + w_sup),
            cfg.cert_tol,
            &cfg.policy,
        )?;
        let plain = discretize(&base, solve.operator.grid, BoundaryCondition::Dirichlet)?;
        Ok(plain.trace_neg(kappa)? - solve.operator.trace_neg(kappa)?)
    };
    let mut panels = cfg.initial_panels.max(2);
    let mut values: Vec<f64> = Vec::new();
    let mut previous: Option<f64> = None;
    for _ in 0..=cfg.max_doublings {
        let ds = s_cut / panels as f64;
        // values at s_i = i·ds for i = 1..=panels; odd nodes are new after a doubling
        let fresh: Vec<f64> = if values.is_empty() {
            (1..=panels)
                .into_par_iter()
                .map(|i| remainder_at(ds * i as f64))
                .collect::<Result<_>>()?
        } else {
            (0..panels / 2)
                .into_par_iter()
                .map(|i| remainder_at(ds * (2 * i + 1) as f64))
                .collect::<Result<_>>()?
        };
        values = if values.is_empty() {
            fresh
        } else {
            let mut merged = Vec::with_capacity(panels);
            for (i, old) in values.iter().enumerate() {
                merged.push(fresh[i]);
                merged.push(*old);
            }
            merged
        };
        // first panel: R(s_1)·ds; then trapezoid over [s_1, s_cut]
        let mut integral = ds * values[0];
        for pair in values.windows(2) {
            integral += 0.5 * ds * (pair[0] + pair[1]);
        }
        if let Some(prev) = previous {
            if (integral - prev).abs() <= cfg.tol * (closed_form / scale).abs().max(integral.abs()) {
                let remainder = -scale * integral;
                return Ok(Lemma1Rhs {
                    value: closed_form + remainder,
                    closed_form,
                    remainder,
                    s_cut,
                    panels,
                    converged: true,
                });
            }
        }
        previous = Some(integral);
        panels *= 2;
    }
    Err(Error::Quadrature(format!(
        "s-integral not converged to {} after {} doublings",
        cfg.tol, cfg.max_doublings
    )))
}

/// Functions on the cross manifold with exactly known eigenspace averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrossPotential {
    Const(f64),
    /// `cos(m y)` along the first circle factor.
    Cos(u32),
}

impl CrossPotential {
    /// Average of the potential against the density of any eigenspace of a
    /// flat cross manifold, which is uniform.
    fn eigenspace_average(&self, table: &EigenTable) -> Result<f64> {
        match self {
            CrossPotential::Const(c) => Ok(*c),
            CrossPotential::Cos(m) => {
                if !table.uniform_density {
                    return Err(Error::Unsupported(
                        "cos cross potentials need a flat cross manifold".into(),
                    ));
                }
                Ok(if *m == 0 { 1.0 } else { 0.0 })
            }
        }
    }

    /// `v_G^{-1} ∫_M V2`.
    fn mean(&self) -> f64 {
        match self {
            CrossPotential::Const(c) => *c,
            CrossPotential::Cos(m) => {
                if *m == 0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl FromStr for CrossPotential {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParameterDomain(format!("cannot parse cross potential '{s}'"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "const" => Ok(CrossPotential::Const(arg.trim().parse().map_err(|_| bad())?)),
            "cos" => Ok(CrossPotential::Cos(arg.trim().parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for CrossPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrossPotential::Const(c) => write!(f, "const:{c}"),
            CrossPotential::Cos(m) => write!(f, "cos:{m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub lambda: f64,
    #[serde(rename = "N")]
    pub n_of_lambda: u64,
    pub moment: f64,
    pub target: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
}

fn vectors(table: &EigenTable) -> Result<&[Vec<f64>]> {
    table.vectors.as_deref().ok_or(Error::MissingVectors)
}

/// `N(λ)^{-1} Σ_{λ_i ≤ λ} mult · Σ_x h |φ_i(x)|² f(x)`.
fn weighted_density(
    table: &EigenTable,
    lambda: f64,
    weight: impl Fn(usize) -> f64,
    f: &[f64],
) -> Result<(u64, f64)> {
    let vecs = vectors(table)?;
    table.check_range(lambda)?;
    let h = table.grid.h();
    let mut count = 0u64;
    let mut acc = 0.0;
    for (e, v) in table.entries.iter().zip(vecs) {
        if e.lambda > lambda {
            continue;
        }
        count += e.multiplicity;
        let w = weight(e.j);
        if w == 0.0 {
            continue;
        }
        let pairing: f64 = v.iter().zip(f).map(|(a, b)| a * a * b).sum::<f64>() * h;
        acc += e.multiplicity as f64 * pairing * w;
    }
    if count == 0 {
        return Err(Error::Range(format!("no eigenvalues at or below {lambda}")));
    }
    Ok((count, acc / count as f64))
}

/// The density pairing `⟨ρ_λ, V1(√λ x) V2(y)⟩ / N(λ)` against `∫B V1 · mean(V2)`.
pub fn density_moment(
    table: &EigenTable,
    lambda: f64,
    v1: &Shape,
    v2: &CrossPotential,
    profile: &BoundaryProfile,
) -> Result<MomentReport> {
    let cross = v2.eigenspace_average(table)?;
    let root = lambda.sqrt();
    let f: Vec<f64> = table.grid.nodes().iter().map(|x| v1.eval(root * x)).collect();
    let (count, moment) = weighted_density(table, lambda, |_| cross, &f)?;
    let outside = profile.beyond_grid_mass + profile.k_tail_mass;
    let target = (profile.integrate_against(|x| v1.eval(x)) + outside * v1.far_field()) * v2.mean();
    let abs_gap = (moment - target).abs();
    Ok(MomentReport {
        lambda,
        n_of_lambda: count,
        moment,
        target,
        abs_gap,
        rel_gap: if target != 0.0 {
            abs_gap / target.abs()
        } else {
            abs_gap
        },
    })
}

/// Fraction of the density with `√λ x ≤ big_l`.
pub fn mass_capture(table: &EigenTable, lambda: f64, big_l: f64) -> Result<f64> {
    let cut = big_l / lambda.sqrt();
    let f: Vec<f64> = table
        .grid
        .nodes()
        .iter()
        .map(|x| if *x <= cut { 1.0 } else { 0.0 })
        .collect();
    Ok(weighted_density(table, lambda, |_| 1.0, &f)?.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HellmannFeynman {
    pub s: f64,
    pub epsilon: f64,
    pub fd_value: f64,
    pub pairing_value: f64,
    pub gap: f64,
    /// Eigenvalues below 1 on the certified grid.
    pub count: usize,
    /// `n_s(1)` from the reference spectrum.
    pub reference_count: usize,
}

/// Finite-difference derivative of `Tr(P_{s^{2/n}} + εV − 1)₋` in `ε` against
/// the first-order pairing `Σ_{λ_k<1} ∫|φ_k|² V`, on one certified grid.
pub fn hellmann_feynman(
    r: &ReferenceSpectrum,
    s: f64,
    v: &Shape,
    epsilon: f64,
    cert_tol: f64,
    policy: &GridPolicy,
) -> Result<HellmannFeynman> {
    if !(s > 0.0 && epsilon > 0.0) {
        return Err(Error::ParameterDomain("s and epsilon must be positive".into()));
    }
    let p = r.params;
    let mu = s.powf(2.0 / p.n as f64);
    let base = PotentialSpec::model(&p, mu)?;
    let probe = base.clone().with_extra(ScaledShape::plain(v.clone()));
    let grid = solve_half_line(&probe, Target::Below(1.0), cert_tol, policy)?
        .operator
        .grid;
    let plain = discretize(&base, grid, BoundaryCondition::Dirichlet)?;
    let shifted = discretize(
        &base.clone().with_extra(ScaledShape {
            shape: v.clone(),
            amplitude: epsilon,
            stretch: 1.0,
        }),
        grid,
        BoundaryCondition::Dirichlet,
    )?;
    let window = 10.0 * epsilon * v.sup_norm();
    let near = plain.count_below(1.0 + window) - plain.count_below(1.0 - window);
    if near > 0 {
        return Err(Error::Degeneracy(format!(
            "{near} eigenvalue(s) within {window:e} of the threshold at s = {s}"
        )));
    }
    let tol = plain.default_tol(1.0);
    let eig = plain.eigenvalues_below(1.0, tol)?.eigenvalues;
    let fd_value = (plain.trace_neg(1.0)? - shifted.trace_neg(1.0)?) / epsilon;
    let f: Vec<f64> = grid.nodes().iter().map(|x| v.eval(*x)).collect();
    let h = grid.h();
    let mut pairing_value = 0.0;
    for l in &eig {
        let phi = plain.eigenfunction(*l, tol)?;
        pairing_value += h * phi.iter().zip(&f).map(|(a, b)| a * a * b).sum::<f64>();
    }
    let reference_count = n_s(r, 1.0, s)?.count;
    if reference_count != eig.len() {
        log::warn!(
            "grid count {} differs from reference n_s(1) = {reference_count} at s = {s}",
            eig.len()
        );
    }
    Ok(HellmannFeynman {
        s,
        epsilon,
        fd_value,
        pairing_value,
        gap: (fd_value - pairing_value).abs(),
        count: eig.len(),
        reference_count,
    })
}

/// Reused operator for callers that want to inspect a single mode.
pub fn mode_operator(model: &ModelOperator, j: usize, lambda: f64) -> Result<TridiagonalOperator> {
    let e = model
        .cross
        .entries()
        .get(j)
        .ok_or_else(|| Error::Range(format!("mode {j} not in the cross spectrum")))?;
    discretize(
        &model.mode_potential(e.mu)?,
        model.grid(lambda, None)?,
        model.right_bc,
    )
}
