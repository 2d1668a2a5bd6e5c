//! Closed-form and independently computed reference values.

use std::f64::consts::PI;
use std::sync::OnceLock;

use grushin_core::params::GrushinParams;
use grushin_core::profile::{self, QuadratureConfig};
use grushin_core::scaling::{self, ReferenceSpectrum};
use grushin_core::sturm::{
    discretize, solve_half_line, solve_with_refinement, BoundaryCondition, Grid1D, GridPolicy, PotentialSpec,
    Target,
};

fn beta3() -> &'static ReferenceSpectrum {
    static R: OnceLock<ReferenceSpectrum> = OnceLock::new();
    R.get_or_init(|| scaling::reference_spectrum(&GrushinParams::new(1, 3.0).unwrap(), 200, 1e-8).unwrap())
}

/// `J_ν(x) Γ(ν+1) (2/x)^ν = Σ_m (−x²/4)^m / (m! (ν+1)_m)`; same positive zeros as `J_ν`.
fn bessel_reduced(nu: f64, x: f64) -> f64 {
    let z = -x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200 {
        term *= z / (m as f64 * (nu + m as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && m > 10 {
            break;
        }
    }
    sum
}

fn first_bessel_zero(nu: f64) -> f64 {
    let mut a = 0.5;
    while bessel_reduced(nu, a + 0.01) > 0.0 {
        a += 0.01;
    }
    let mut b = a + 0.01;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if bessel_reduced(nu, m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[test]
fn bessel_oracle_matches_known_zeros() {
    // j_{1/2,1} = π and j_{3/2,1} ≈ 4.4934094579
    assert!((first_bessel_zero(0.5) - PI).abs() < 1e-12);
    assert!((first_bessel_zero(1.5) - 4.493409457909064).abs() < 1e-10);
}

#[test]
fn inverse_square_box_ground_state_is_bessel_zero() {
    let p = GrushinParams::new(1, 3.0).unwrap();
    let nu = p.bessel_order();
    assert_eq!(nu, 1.25);
    let exact = first_bessel_zero(nu).powi(2);
    let pot = PotentialSpec::new(p.c_beta, 0.0, p.beta).unwrap();
    let rep = solve_with_refinement(&pot, 1.0, BoundaryCondition::Dirichlet, 1, 1e-5).unwrap();
    assert!(rep.converged);
    let got = rep.eigenvalues[0];
    assert!((got / exact - 1.0).abs() < 1e-3, "{got} vs {exact}");
}

#[test]
fn calogero_spectra_after_refinement() {
    for (n, count, offset) in [(1usize, 5usize, 4.0), (2, 3, 5.0)] {
        let p = GrushinParams::new(n, 2.0).unwrap();
        let pot = PotentialSpec::model(&p, 1.0).unwrap();
        let rep = solve_with_refinement(&pot, 12.0, BoundaryCondition::Dirichlet, count, 1e-4).unwrap();
        for (k, l) in rep.eigenvalues.iter().enumerate() {
            let exact = 4.0 * k as f64 + offset;
            assert!((l / exact - 1.0).abs() < 1e-3, "n={n} k={k}: {l} vs {exact}");
        }
    }
}

#[test]
fn calogero_brute_force_two_resolutions() {
    // plain grid solves with no refinement logic: both resolutions within 1e-3
    let p = GrushinParams::new(1, 2.0).unwrap();
    let pot = PotentialSpec::model(&p, 1.0).unwrap();
    for n in [3000, 6001] {
        let op = discretize(&pot, Grid1D::new(12.0, n).unwrap(), BoundaryCondition::Dirichlet).unwrap();
        let vals = op.lowest(5).unwrap().eigenvalues;
        for (k, l) in vals.iter().enumerate() {
            let exact = 4.0 * k as f64 + 4.0;
            assert!((l / exact - 1.0).abs() < 1e-3);
        }
    }
}

#[test]
fn richardson_discrepancy_shrinks_by_four() {
    let p = GrushinParams::new(1, 2.0).unwrap();
    let pot = PotentialSpec::model(&p, 1.0).unwrap();
    let ground = |n: usize| {
        discretize(&pot, Grid1D::new(12.0, n).unwrap(), BoundaryCondition::Dirichlet)
            .unwrap()
            .lowest(1)
            .unwrap()
            .eigenvalues[0]
    };
    let ns = [200usize, 401, 803];
    let vals: Vec<f64> = ns.iter().map(|n| ground(*n)).collect();
    let ratio = (vals[1] - vals[0]) / (vals[2] - vals[1]);
    assert!((3.0..=5.0).contains(&ratio), "{ratio}");
}

#[test]
fn reference_spectrum_oracles() {
    for (n, offset) in [(1usize, 4.0), (2, 5.0)] {
        let r = scaling::reference_spectrum(&GrushinParams::new(n, 2.0).unwrap(), 3, 1e-8).unwrap();
        for (k, l) in r.eigenvalues.iter().enumerate() {
            let exact = 4.0 * k as f64 + offset;
            assert!((l / exact - 1.0).abs() < 1e-3);
        }
    }
    let r = beta3().truncated(40);
    assert!(r.eigenvalues[0] > 0.0);
    assert!(r.eigenvalues.windows(2).all(|w| w[1] > w[0]));
    assert!(r.truncation.gaps.iter().all(|g| *g <= 1e-8));
}

#[test]
fn reference_eigenfunctions_are_normalized() {
    let r = beta3();
    let h = r.grid.h();
    for phi in r.eigenfunctions.iter().take(20) {
        let norm: f64 = h * phi.iter().map(|v| v * v).sum::<f64>();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn direct_solve_follows_scaling_law() {
    let r = beta3();
    let p = r.params;
    let pot = PotentialSpec::model(&p, 10.0).unwrap();
    let s = solve_half_line(
        &pot,
        Target::Lowest {
            k: 10,
            energy: 1.5 * scaling::scaled_eigenvalue(r, 10, 10.0).unwrap(),
        },
        1e-8,
        &GridPolicy::default(),
    )
    .unwrap();
    let fine = discretize(&pot, s.operator.grid.refined(), BoundaryCondition::Dirichlet)
        .unwrap()
        .lowest(10)
        .unwrap()
        .eigenvalues;
    for k in 1..=10 {
        let direct = (4.0 * fine[k - 1] - s.eigenvalues[k - 1]) / 3.0;
        let scaled = scaling::scaled_eigenvalue(r, k, 10.0).unwrap();
        assert!(
            (direct / scaled - 1.0).abs() < 1e-3,
            "k={k}: {direct} vs {scaled}"
        );
    }
}

#[test]
fn eigenfunctions_follow_scaling_law() {
    let r = beta3();
    let p = r.params;
    for mu in [4.0, 16.0] {
        let pot = PotentialSpec::model(&p, mu).unwrap();
        let s = solve_half_line(
            &pot,
            Target::Lowest {
                k: 3,
                energy: 1.5 * scaling::scaled_eigenvalue(r, 3, mu).unwrap(),
            },
            1e-8,
            &GridPolicy::default(),
        )
        .unwrap();
        let op = &s.operator;
        let g = op.grid;
        for k in 1..=3 {
            let l = s.eigenvalues[k - 1];
            let phi = op.eigenfunction(l, op.default_tol(l)).unwrap();
            let err: f64 = g
                .nodes()
                .iter()
                .zip(&phi)
                .map(|(x, v)| (v - scaling::scaled_eigenfunction(r, k, mu, *x)).powi(2))
                .sum::<f64>()
                * g.h();
            assert!(err.sqrt() < 1e-2, "mu={mu} k={k}: {}", err.sqrt());
        }
    }
}

#[test]
fn n_s_counts_and_small_s_envelope() {
    let r = beta3();
    let p = r.params;
    let big_s = scaling::cutoff_s(r, 1.0).unwrap();
    assert!((big_s - r.eigenvalues[0].powf(-p.d / 2.0)).abs() < 1e-15);
    assert_eq!(scaling::n_s(r, 1.0, big_s * 1.01).unwrap().count, 0);
    // n_s(1) ≤ c s^{-2/(nβ)}: the ratio stays bounded along a log grid
    let mut prev = 0;
    let mut ratios = Vec::new();
    for i in (0..20).rev() {
        let s = big_s * 10f64.powf(-0.15 * i as f64);
        let c = scaling::n_s(r, 1.0, s).unwrap();
        assert!(!c.inconclusive);
        if i < 19 {
            assert!(c.count <= prev);
        }
        prev = c.count;
        if c.count > 0 {
            ratios.push(c.count as f64 * s.powf(2.0 / (p.n as f64 * p.beta)));
        }
    }
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let tail_max = ratios[..10].iter().cloned().fold(0.0, f64::max);
    assert!(tail_max <= max && max < 2.0, "{ratios:?}");
}

/// `Σ_{k≥0} (4k+5)^{-2}` by direct summation plus the integral tail.
fn zeta_oracle() -> f64 {
    let m = 1_000_000;
    let partial: f64 = (0..m).map(|k| (4.0 * k as f64 + 5.0).powi(-2)).sum();
    partial + 1.0 / (4.0 * (4.0 * m as f64 + 3.0))
}

#[test]
fn zeta_and_weyl_constant_for_closed_form_spectrum() {
    let oracle = zeta_oracle();
    // trigamma form (ψ'(1/4) − 16)/16 = (π² + 8G − 16)/16
    let catalan = 0.915_965_594_177_219_f64;
    assert!((oracle - (PI * PI + 8.0 * catalan - 16.0) / 16.0).abs() < 1e-12);
    assert!((oracle - 0.0748325).abs() < 1e-6);
    let p = GrushinParams::new(2, 2.0).unwrap();
    let r = scaling::reference_spectrum(&p, 200, 1e-8).unwrap();
    let z = profile::spectral_zeta(&r, 2.0, 200).unwrap();
    assert!((z.value / oracle - 1.0).abs() < 1e-4, "{}", z.value);
    let w = profile::weyl_constant(&r).unwrap();
    assert!((w.value - oracle / (4.0 * PI)).abs() < 1e-6);
    assert_eq!(w.value, p.l_cl * w.zeta_value);
    // tail estimate shrinks as k_used doubles
    let tails: Vec<f64> = [25, 50, 100, 200]
        .iter()
        .map(|k| profile::spectral_zeta(&r, 2.0, *k).unwrap().tail_estimate)
        .collect();
    assert!(tails.windows(2).all(|w| w[1] < w[0]), "{tails:?}");
}

#[test]
fn first_term_mass_by_direct_double_quadrature() {
    // ∫_0^∞ d ∫_0^{a} t^d |φ_1(t x)|² dt dx = a^d; done by brute force on a 2D tensor grid
    let r = beta3();
    let d = r.params.d;
    let a = r.eigenvalues[0].powf(-0.5);
    let x_end = r.grid.x_max / a * 4.0;
    let (nx, nt) = (4000, 400);
    let mut total = 0.0;
    for ix in 0..nx {
        let x = (ix as f64 + 0.5) * x_end / nx as f64;
        let mut inner = 0.0;
        for it in 0..nt {
            let t = (it as f64 + 0.5) * a / nt as f64;
            let v = r.eigenfunction_at(1, t * x);
            inner += t.powf(d) * v * v;
        }
        total += d * inner * a / nt as f64 * x_end / nx as f64;
    }
    // beyond x_end the term carries a^d (y_ref/x_end... ) mass ≈ a^{d+1} M(∞)/x_end^d · d/d
    assert!((total / a.powf(d) - 1.0).abs() < 2e-3, "{}", total / a.powf(d));
}

#[test]
fn b_term_values_match_moment_form() {
    // independent route: d x^{-d-1} M_1(a x) with M_1(Y) = ∫_0^Y y^d φ² dy
    let r = beta3().truncated(1);
    let d = r.params.d;
    let a = r.eigenvalues[0].powf(-0.5);
    let xs: Vec<f64> = (0..60).map(|i| 0.2 * i as f64).collect();
    let prof = profile::compute_profile_b(&r, &xs, &QuadratureConfig::default(), 1).unwrap();
    let z = profile::spectral_zeta(&r, d / 2.0, 1).unwrap();
    let pref = r.params.l_cl / (r.params.l_cl * z.value);
    for (x, b) in xs.iter().zip(&prof.values).skip(1) {
        // Simpson on [0, a x] with 2000 panels
        let y_max = a * x;
        let m_panels = 2000;
        let dy = y_max / m_panels as f64;
        let f = |y: f64| y.powf(d) * r.eigenfunction_at(1, y).powi(2);
        let m: f64 = (0..=m_panels)
            .map(|i| {
                let w = if i == 0 || i == m_panels {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * f(i as f64 * dy)
            })
            .sum::<f64>()
            * dy
            / 3.0;
        let want = pref * d * x.powf(-d - 1.0) * m;
        assert!((b - want).abs() <= 2e-3 * want.max(1e-3), "x={x}: {b} vs {want}");
    }
}

#[test]
fn profile_b_basic_properties() {
    let r = beta3();
    let b = profile::compute_profile_b_default(r).unwrap();
    assert_eq!(b.values[0], 0.0);
    assert!(b.values.iter().all(|v| *v >= 0.0));
    assert!(b.normalization_defect <= 1e-2);
    assert!(!b.support_warning);
    let q50 = profile::profile_quantile(&b, 0.5).unwrap();
    let q95 = profile::profile_quantile(&b, 0.95).unwrap();
    assert!(q50 <= q95);
}

#[test]
fn profile_b_quadrature_and_truncation_stability() {
    let r = beta3();
    let xs = profile::default_x_grid(r);
    let base = profile::compute_profile_b(r, &xs, &QuadratureConfig::default(), 200).unwrap();
    let dense = profile::compute_profile_b(
        r,
        &xs,
        &QuadratureConfig {
            t_points: 512,
            points_per_node: 32,
        },
        200,
    )
    .unwrap();
    let sup = base
        .values
        .iter()
        .zip(&dense.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(sup < 1e-3, "{sup}");

    let half = profile::compute_profile_b(r, &xs, &QuadratureConfig::default(), 100).unwrap();
    let mass = |p: &profile::BoundaryProfile| p.grid_integral + p.beyond_grid_mass;
    let change = (mass(&base) - mass(&half)).abs();
    let ratio = half.k_tail_mass / base.k_tail_mass;
    assert!(change < ratio * half.k_tail_mass, "{change} vs {ratio}");
}

#[test]
fn profile_a_substitution() {
    let r = beta3();
    let b = profile::compute_profile_b_default(r).unwrap();
    let alpha = 2.0 * 3.0 / 5.0;
    let a = profile::compute_profile_a(&b, alpha).unwrap();
    assert!(a.normalization_defect <= 2.0 * b.normalization_defect.max(1e-2));
    assert!(a.values.iter().all(|v| *v >= 0.0));
    assert!(profile::compute_profile_a(&b, 1.0).is_err());

    // α = 1 pairs with β = 2: A(0.25) = 2·B(1) is direct substitution
    let p2 = GrushinParams::new(2, 2.0).unwrap();
    let r2 = scaling::reference_spectrum(&p2, 20, 1e-8).unwrap();
    let xs = vec![0.0, 0.5, 1.0, 1.5];
    let b2 = profile::compute_profile_b(&r2, &xs, &QuadratureConfig::default(), 20).unwrap();
    let a2 = profile::compute_profile_a(&b2, 1.0).unwrap();
    assert!((a2.abscissae[2] - 0.25).abs() < 1e-15);
    assert!((a2.values[2] - 2.0 * b2.values[2]).abs() < 1e-14);
}
