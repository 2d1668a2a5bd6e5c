//! Finite-difference discretization of `−∂² + q` on `(0, x_max)` with an
//! implicit Dirichlet condition at the singular end, and the eigensolvers
//! built on it.

pub mod jacobi;
pub mod potential;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use potential::{PotentialSpec, ScaledShape, Shape};

/// Uniform grid of interior nodes `x_i = i·h`, `i = 1..=n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid1D {
    pub fn new(x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_max.is_finite() && x_max > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "x_max must be positive, got {x_max}"
            )));
        }
        if n_points == 0 {
            return Err(Error::ParameterDomain(
                "grid needs at least one interior node".into(),
            ));
        }
        Ok(Grid1D { x_max, n_points })
    }

    pub fn h(&self) -> f64 {
        self.x_max / (self.n_points + 1) as f64
    }

    /// Node `i` counted from 0, i.e. `(i+1)·h`.
    pub fn node(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    /// The same interval with `2N+1` nodes, i.e. half the spacing.
    pub fn refined(&self) -> Grid1D {
        Grid1D {
            x_max: self.x_max,
            n_points: 2 * self.n_points + 1,
        }
    }

    /// Linear interpolation of grid samples `v` at `x`, with the Dirichlet value
    /// 0 at the origin and 0 beyond `x_max`.
    pub fn interpolate(&self, v: &[f64], x: f64) -> f64 {
        let h = self.h();
        let pos = x / h;
        if !(pos > 0.0) || x >= self.x_max {
            return 0.0;
        }
        let i = pos.floor() as usize;
        let w = pos - i as f64;
        let left = if i == 0 { 0.0 } else { v[i - 1] };
        let right = if i < self.n_points { v[i] } else { 0.0 };
        left + w * (right - left)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            "neumann" => Ok(BoundaryCondition::Neumann),
            other => Err(Error::ParameterDomain(format!(
                "boundary condition must be dirichlet or neumann, got '{other}'"
            ))),
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub diagonal: Vec<f64>,
    pub offdiagonal: Vec<f64>,
    pub grid: Grid1D,
    pub right_bc: BoundaryCondition,
}

/// Relative width used for eigenvalue brackets.
const BISECTION_REL_TOL: f64 = 1e-14;

/// Ascending eigenvalues with their accuracy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSolveReport {
    pub eigenvalues: Vec<f64>,
    pub tolerance_achieved: f64,
    pub refinement: Option<Vec<Refinement>>,
    /// False when a refinement loop hit its node cap first.
    pub converged: bool,
    pub n_points: usize,
}

/// One eigenvalue on grids `h` and `h/2` and their Richardson combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Refinement {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

pub fn discretize(
    pot: &PotentialSpec,
    grid: Grid1D,
    right_bc: BoundaryCondition,
) -> Result<TridiagonalOperator> {
    let h = grid.h();
    let inv_h2 = 1.0 / (h * h);
    if !inv_h2.is_finite() || !(pot.c_coef * inv_h2).is_finite() {
        return Err(Error::Discretization(format!(
            "x^-2 term overflows at x_1 = {h:e}; use a larger spacing or a smaller coefficient"
        )));
    }
    let mut diagonal = Vec::with_capacity(grid.n_points);
    for i in 0..grid.n_points {
        let q = pot.eval(grid.node(i));
        if !q.is_finite() {
            return Err(Error::Discretization(format!(
                "potential is not finite at x = {}",
                grid.node(i)
            )));
        }
        diagonal.push(2.0 * inv_h2 + q);
    }
    if right_bc == BoundaryCondition::Neumann {
        *diagonal.last_mut().expect("nonempty grid") -= inv_h2;
    }
    Ok(TridiagonalOperator {
        diagonal,
        offdiagonal: vec![-inv_h2; grid.n_points - 1],
        grid,
        right_bc,
    })
}

impl TridiagonalOperator {
    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    /// Eigenvalues strictly below `kappa`.
    pub fn count_below(&self, kappa: f64) -> usize {
        jacobi::count_below(&self.diagonal, &self.offdiagonal, kappa)
    }

    /// Default bisection tolerance for eigenvalues up to `top`.
    pub fn default_tol(&self, top: f64) -> f64 {
        let (lo, _) = jacobi::gershgorin(&self.diagonal, &self.offdiagonal);
        BISECTION_REL_TOL * lo.abs().max(top.abs()).max(1.0)
    }

    pub fn eigenvalues_below(&self, kappa: f64, tol: f64) -> Result<EigenSolveReport> {
        let b = jacobi::eigenvalues_below(&self.diagonal, &self.offdiagonal, kappa, tol)?;
        Ok(self.report(b))
    }

    /// The `k` lowest eigenvalues, bisected inside `[gershgorin_lo, top]` where
    /// `top` is found by doubling so that the bracket stays tight.
    pub fn lowest(&self, k: usize) -> Result<EigenSolveReport> {
        let k = k.min(self.len());
        let (lo, hi) = jacobi::gershgorin(&self.diagonal, &self.offdiagonal);
        let mut top = lo.abs().max(1.0) + lo;
        let mut step = lo.abs().max(1.0);
        while top < hi && self.count_below(top) < k {
            step *= 2.0;
            top = (lo + step).min(hi);
        }
        let top = top.min(hi);
        let tol = self.default_tol(top);
        let b = jacobi::bisect_range(&self.diagonal, &self.offdiagonal, lo, top, 0, k, tol)?;
        Ok(self.report(b))
    }

    fn report(&self, b: jacobi::Bisection) -> EigenSolveReport {
        EigenSolveReport {
            eigenvalues: b.eigenvalues,
            tolerance_achieved: b.half_width,
            refinement: None,
            converged: true,
            n_points: self.len(),
        }
    }

    /// Eigenfunction for the eigenvalue estimate `lambda_hat`, normalized to
    /// `h·Σ v² = 1` with its first non-negligible entry positive.
    pub fn eigenfunction(&self, lambda_hat: f64, tol: f64) -> Result<Vec<f64>> {
        let mut v = jacobi::inverse_iteration(&self.diagonal, &self.offdiagonal, lambda_hat, tol)?;
        let scale = 1.0 / self.grid.h().sqrt();
        let flip = v
            .iter()
            .find(|x| x.abs() * scale > 1e-8)
            .is_some_and(|x| *x < 0.0);
        let factor = if flip { -scale } else { scale };
        v.iter_mut().for_each(|x| *x *= factor);
        Ok(v)
    }

    /// `Tr(T − κ)₋ = Σ_{λ_i < κ} (κ − λ_i)`.
    pub fn trace_neg(&self, kappa: f64) -> Result<f64> {
        let tol = self.default_tol(kappa);
        let r = self.eigenvalues_below(kappa, tol)?;
        Ok(r.eigenvalues.iter().map(|l| kappa - l).sum())
    }
}

/// Node budget rule: at least `nodes_per_wavelength` nodes per local
/// wavelength `2π/√(κ − q)` and enough nodes across each feature of `extra`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPolicy {
    pub nodes_per_wavelength: f64,
    pub min_nodes: usize,
    pub max_nodes: usize,
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy {
            nodes_per_wavelength: 20.0,
            min_nodes: 400,
            max_nodes: 1 << 20,
        }
    }
}

/// Nodes placed across the length scale of a bounded perturbation.
const NODES_PER_FEATURE: f64 = 8.0;

impl GridPolicy {
    /// Interior node count for `pot` on `(0, x_max)` at energy `kappa`.
    pub fn nodes_for(&self, pot: &PotentialSpec, x_max: f64, kappa: f64) -> Result<usize> {
        // q ≥ -sup|extra| everywhere, so this bounds the local wavenumber
        let k_loc = (kappa + pot.extra_sup()).max(0.0).sqrt();
        let mut h = if k_loc > 0.0 {
            2.0 * PI / (self.nodes_per_wavelength * k_loc)
        } else {
            f64::INFINITY
        };
        if let Some(extra) = &pot.extra {
            if let Some(scale) = feature_scale(&extra.shape) {
                h = h.min(scale / extra.stretch / NODES_PER_FEATURE);
            }
        }
        let wanted = (x_max / h).ceil();
        if wanted > self.max_nodes as f64 {
            return Err(Error::Resolution(format!(
                "{wanted} nodes needed on (0, {x_max}) at energy {kappa}, cap is {}",
                self.max_nodes
            )));
        }
        Ok((wanted as usize).max(self.min_nodes))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nodes_per_wavelength > 0.0) || self.min_nodes == 0 || self.max_nodes < self.min_nodes {
            return Err(Error::ParameterDomain(format!("invalid grid policy {self:?}")));
        }
        Ok(())
    }
}

fn feature_scale(shape: &Shape) -> Option<f64> {
    match shape {
        Shape::Const(_) => None,
        Shape::Exp { b, .. } => (*b > 0.0).then(|| 1.0 / b),
        Shape::Indicator { b, .. } => (*b > 0.0).then_some(*b),
        Shape::Tabulated { xs, .. } => xs.windows(2).map(|w| w[1] - w[0]).reduce(f64::min),
    }
}

/// Largest node count tried by [`solve_with_refinement`].
pub const REFINEMENT_NODE_CAP: usize = 1 << 17;

/// First `k_wanted` eigenvalues on `(0, x_max)` from grids `N` and `2N+1`,
/// Richardson-extrapolated for a second-order scheme. `N` doubles until the
/// largest relative `h` vs `h/2` discrepancy is at most `target_tol`.
pub fn solve_with_refinement(
    pot: &PotentialSpec,
    x_max: f64,
    right_bc: BoundaryCondition,
    k_wanted: usize,
    target_tol: f64,
) -> Result<EigenSolveReport> {
    solve_with_refinement_from(pot, x_max, right_bc, k_wanted, target_tol, &GridPolicy::default())
}

pub fn solve_with_refinement_from(
    pot: &PotentialSpec,
    x_max: f64,
    right_bc: BoundaryCondition,
    k_wanted: usize,
    target_tol: f64,
    policy: &GridPolicy,
) -> Result<EigenSolveReport> {
    if k_wanted == 0 {
        return Err(Error::ParameterDomain("k_wanted must be >= 1".into()));
    }
    if !(target_tol > 0.0) {
        return Err(Error::ParameterDomain("target tolerance must be positive".into()));
    }
    // a rough solve locates the top eigenvalue for the node budget
    let probe_n = policy.min_nodes.max(2 * k_wanted);
    let probe = discretize(pot, Grid1D::new(x_max, probe_n)?, right_bc)?.lowest(k_wanted)?;
    if probe.eigenvalues.len() < k_wanted {
        return Err(Error::Discretization(format!(
            "grid of {probe_n} nodes has fewer than {k_wanted} eigenvalues"
        )));
    }
    let top = *probe.eigenvalues.last().expect("nonempty");
    let mut n = policy.nodes_for(pot, x_max, 1.2 * top)?.max(probe_n);
    let mut coarse = discretize(pot, Grid1D::new(x_max, n)?, right_bc)?.lowest(k_wanted)?;
    loop {
        let fine_grid = Grid1D::new(x_max, n)?.refined();
        let fine = discretize(pot, fine_grid, right_bc)?.lowest(k_wanted)?;
        let triples: Vec<Refinement> = coarse
            .eigenvalues
            .iter()
            .zip(&fine.eigenvalues)
            .map(|(&c, &f)| Refinement {
                coarse: c,
                fine: f,
                extrapolated: (4.0 * f - c) / 3.0,
            })
            .collect();
        let estimate = triples
            .iter()
            .map(|r| (r.fine - r.coarse).abs() / r.fine.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        let converged = estimate <= target_tol;
        if converged || fine_grid.n_points > REFINEMENT_NODE_CAP {
            if !converged {
                log::warn!(
                    "refinement stopped at {} nodes with discrepancy {estimate:e} > {target_tol:e}",
                    fine_grid.n_points
                );
            }
            return Ok(EigenSolveReport {
                eigenvalues: triples.iter().map(|r| r.extrapolated).collect(),
                tolerance_achieved: estimate,
                refinement: Some(triples),
                converged,
                n_points: fine_grid.n_points,
            });
        }
        n = fine_grid.n_points;
        coarse = fine;
    }
}

/// What a half-line solve must capture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// The lowest `k` eigenvalues, with an estimate of the largest.
    Lowest { k: usize, energy: f64 },
    /// Every eigenvalue strictly below the threshold.
    Below(f64),
}

/// A truncated half-line problem whose Dirichlet and Neumann truncations agree.
#[derive(Debug, Clone)]
pub struct HalfLineSolve {
    /// Dirichlet truncation at the certified `x_max`.
    pub operator: TridiagonalOperator,
    pub eigenvalues: Vec<f64>,
    /// Largest relative Dirichlet/Neumann gap over the retained eigenvalues.
    pub truncation_gap: f64,
    /// Per-eigenvalue relative gaps.
    pub gaps: Vec<f64>,
    pub tol: f64,
}

/// Fraction of `x_max` at which the outermost turning point is placed.
pub const TURNING_POINT_FRACTION: f64 = 0.6;
const X_MAX_GROWTH: f64 = 1.5;
const X_MAX_ATTEMPTS: usize = 8;

/// Solves a confining potential on a truncated half-line, growing `x_max` until
/// the Dirichlet and Neumann outer conditions give eigenvalues within `cert_tol`
/// (relative) of each other.
pub fn solve_half_line(
    pot: &PotentialSpec,
    target: Target,
    cert_tol: f64,
    policy: &GridPolicy,
) -> Result<HalfLineSolve> {
    if !(cert_tol > 0.0) {
        return Err(Error::ParameterDomain(
            "certificate tolerance must be positive".into(),
        ));
    }
    let energy = match target {
        Target::Lowest { energy, .. } => energy,
        Target::Below(kappa) => kappa,
    };
    let x_turn = pot
        .turning_point_bound(energy)
        .ok_or_else(|| Error::ParameterDomain("half-line solves need a confining term (mu > 0)".into()))?;
    let mut x_max = (x_turn / TURNING_POINT_FRACTION).max(1.0 / pot.mu.powf(1.0 / (2.0 + pot.beta)));
    let mut last_gap = f64::NAN;
    for _ in 0..X_MAX_ATTEMPTS {
        let n = policy.nodes_for(pot, x_max, energy)?;
        let grid = Grid1D::new(x_max, n)?;
        let dir = discretize(pot, grid, BoundaryCondition::Dirichlet)?;
        let neu = discretize(pot, grid, BoundaryCondition::Neumann)?;
        let (ev_d, ev_n, tol) = match target {
            Target::Lowest { k, .. } => {
                let d = dir.lowest(k)?;
                let nn = neu.lowest(k)?;
                let tol = dir.default_tol(*d.eigenvalues.last().unwrap_or(&energy));
                (d.eigenvalues, nn.eigenvalues, tol)
            }
            Target::Below(kappa) => {
                let tol = dir.default_tol(kappa);
                let m = neu.count_below(kappa);
                let d = dir.lowest(m)?;
                let nn = neu.lowest(m)?;
                (d.eigenvalues, nn.eigenvalues, tol)
            }
        };
        let gaps: Vec<f64> = ev_d
            .iter()
            .zip(&ev_n)
            .map(|(d, n)| (d - n).abs() / d.abs().max(f64::MIN_POSITIVE))
            .collect();
        let gap = gaps.iter().copied().fold(0.0, f64::max);
        if gap <= cert_tol {
            let eigenvalues = match target {
                Target::Lowest { .. } => ev_d,
                Target::Below(kappa) => ev_d.into_iter().filter(|l| *l < kappa).collect(),
            };
            let gaps = gaps[..eigenvalues.len()].to_vec();
            return Ok(HalfLineSolve {
                operator: dir,
                eigenvalues,
                truncation_gap: gap,
                gaps,
                tol,
            });
        }
        last_gap = gap;
        x_max *= X_MAX_GROWTH;
    }
    Err(Error::Truncation(format!(
        "Dirichlet/Neumann gap {last_gap:e} still above {cert_tol:e} at x_max = {x_max}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free(n: usize, bc: BoundaryCondition) -> TridiagonalOperator {
        let pot = PotentialSpec::new(0.0, 0.0, 1.0).unwrap();
        discretize(&pot, Grid1D::new((n + 1) as f64, n).unwrap(), bc).unwrap()
    }

    #[test]
    fn free_stencil() {
        let t = free(3, BoundaryCondition::Dirichlet);
        assert_eq!(t.diagonal, vec![2.0, 2.0, 2.0]);
        assert_eq!(t.offdiagonal, vec![-1.0, -1.0]);
        let t = free(2, BoundaryCondition::Neumann);
        assert_eq!(t.diagonal, vec![2.0, 1.0]);
        assert_eq!(t.offdiagonal, vec![-1.0]);
    }

    #[test]
    fn inverse_square_diagonal() {
        let pot = PotentialSpec::new(0.75, 0.0, 1.0).unwrap();
        let t = discretize(&pot, Grid1D::new(4.0, 3).unwrap(), BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(t.diagonal, vec![2.75, 2.0 + 0.75 / 4.0, 2.0 + 0.75 / 9.0]);
    }

    #[test]
    fn overflow_is_reported() {
        let pot = PotentialSpec::new(1e300, 0.0, 1.0).unwrap();
        let err = discretize(&pot, Grid1D::new(1e-10, 3).unwrap(), BoundaryCondition::Dirichlet);
        assert!(matches!(err, Err(Error::Discretization(_))));
    }

    #[test]
    fn grid_geometry() {
        let g = Grid1D::new(2.5, 9).unwrap();
        assert_eq!(g.h() * 10.0, 2.5);
        assert!(g.node(0) > 0.0 && g.node(8) < 2.5);
        let v: Vec<f64> = g.nodes().iter().map(|x| 2.0 * x).collect();
        assert!((g.interpolate(&v, 0.3) - 0.6).abs() < 1e-14);
        assert!((g.interpolate(&v, 0.1) - 0.2).abs() < 1e-14);
        assert_eq!(g.interpolate(&v, 0.0), 0.0);
    }

    #[test]
    fn trace_examples() {
        let t = free(3, BoundaryCondition::Dirichlet);
        assert!((t.trace_neg(2.0).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(t.trace_neg(0.0).unwrap(), 0.0);
        assert!((t.trace_neg(10.0).unwrap() - 24.0).abs() < 1e-12);
    }

    #[test]
    fn eigenfunctions_are_sines() {
        let n = 2000;
        let x_max = 1.0;
        let pot = PotentialSpec::new(0.0, 0.0, 1.0).unwrap();
        let g = Grid1D::new(x_max, n).unwrap();
        let t = discretize(&pot, g, BoundaryCondition::Dirichlet).unwrap();
        let r = t.lowest(5).unwrap();
        let h = g.h();
        let vs: Vec<Vec<f64>> = r
            .eigenvalues
            .iter()
            .map(|l| t.eigenfunction(*l, t.default_tol(*l)).unwrap())
            .collect();
        for (k, v) in vs.iter().enumerate().take(3) {
            let s: Vec<f64> = g
                .nodes()
                .iter()
                .map(|x| (2.0f64 / x_max).sqrt() * ((k + 1) as f64 * PI * x / x_max).sin())
                .collect();
            let overlap: f64 = h * v.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>();
            assert!(overlap.abs() > 1.0 - 1e-6);
            assert!(v[0] > 0.0);
        }
        for (j, a) in vs.iter().enumerate() {
            let norm: f64 = h * a.iter().map(|x| x * x).sum::<f64>();
            assert!((norm - 1.0).abs() < 1e-12);
            for b in &vs[j + 1..] {
                let ip: f64 = h * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
                assert!(ip.abs() < 1e-8);
            }
        }
    }

    #[test]
    fn policy_counts_nodes_per_wavelength() {
        let pot = PotentialSpec::new(0.0, 1.0, 2.0).unwrap();
        let p = GridPolicy {
            nodes_per_wavelength: 20.0,
            min_nodes: 1,
            max_nodes: 1000,
        };
        // wavelength 2π at κ = 1: 20 nodes per 2π
        assert_eq!(p.nodes_for(&pot, 2.0 * PI, 1.0).unwrap(), 20);
        assert!(matches!(p.nodes_for(&pot, 1e3, 1e4), Err(Error::Resolution(_))));
    }

    #[test]
    fn half_line_harmonic_oscillator() {
        // −u'' + x² u on the half-line with Dirichlet at 0: odd oscillator levels 3, 7, 11
        let pot = PotentialSpec::new(0.0, 1.0, 2.0).unwrap();
        let s = solve_half_line(&pot, Target::Below(12.0), 1e-8, &GridPolicy::default()).unwrap();
        assert_eq!(s.eigenvalues.len(), 3);
        for (got, want) in s.eigenvalues.iter().zip([3.0, 7.0, 11.0]) {
            assert!((got - want).abs() / want < 1e-3, "{got}");
        }
        assert!(s.truncation_gap <= 1e-8);
    }
}
