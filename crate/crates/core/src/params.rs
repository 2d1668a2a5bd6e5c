//! Dimensional parameters, derived constants and the coordinate maps between
//! the Grushin variable `x` and the gas-planet variable `u`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Position of `n*beta` relative to the critical value 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        })
    }
}

/// A singularity exponent, remembered as an exact fraction when it was given
/// as one so that the critical case `n*beta == 2` can be recognised exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent {
    value: f64,
    ratio: Option<(u64, u64)>,
}

impl Exponent {
    pub fn float(value: f64) -> Self {
        Exponent { value, ratio: None }
    }

    pub fn ratio(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::ParameterDomain("zero denominator in exponent".into()));
        }
        Ok(Exponent {
            value: num as f64 / den as f64,
            ratio: Some((num, den)),
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

impl FromStr for Exponent {
    type Err = Error;

    /// Accepts decimal literals (`3`, `0.75`) and fractions (`2/3`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::ParameterDomain(format!("cannot parse exponent '{s}'"));
        if let Some((num, den)) = s.split_once('/') {
            let num = num.trim().parse::<u64>().map_err(|_| bad())?;
            let den = den.trim().parse::<u64>().map_err(|_| bad())?;
            return Exponent::ratio(num, den);
        }
        if let Ok(int) = s.parse::<u64>() {
            return Exponent::ratio(int, 1);
        }
        let value = s.parse::<f64>().map_err(|_| bad())?;
        Ok(Exponent::float(value))
    }
}

/// Cross-manifold dimension, singularity exponent and everything derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrushinParams {
    pub n: usize,
    pub beta: f64,
    /// Coefficient of the inverse-square term, `(βn/4)(1 + βn/4)`.
    pub c_beta: f64,
    /// Hausdorff dimension `n(1 + β/2)`.
    pub d: f64,
    /// Semiclassical constant `(4π)^{-n/2} / Γ(1 + n/2)`.
    pub l_cl: f64,
    pub regime: Regime,
}

impl GrushinParams {
    pub fn new(n: usize, beta: f64) -> Result<Self> {
        Self::from_exponent(n, Exponent::float(beta))
    }

    pub fn from_exponent(n: usize, beta: Exponent) -> Result<Self> {
        let b = beta.value;
        if n == 0 {
            return Err(Error::ParameterDomain("cross dimension n must be >= 1".into()));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::ParameterDomain(format!("beta must be positive, got {b}")));
        }
        let regime = match beta.ratio {
            Some((num, den)) => {
                let lhs = n as u128 * num as u128;
                let rhs = 2 * den as u128;
                classify(lhs.cmp(&rhs))
            }
            None => classify((n as f64 * b).partial_cmp(&2.0).expect("finite")),
        };
        let quarter = b * n as f64 / 4.0;
        Ok(GrushinParams {
            n,
            beta: b,
            c_beta: quarter * (1.0 + quarter),
            d: n as f64 * (1.0 + b / 2.0),
            l_cl: semiclassical_constant(n),
            regime,
        })
    }

    /// Index `ν` of the Bessel behaviour at the singular end, `c_beta = ν² − 1/4`.
    pub fn bessel_order(&self) -> f64 {
        self.beta * self.n as f64 / 4.0 + 0.5
    }

    /// Growth exponent of the reference eigenvalues, `λ_k ~ k^{2β/(β+2)}`.
    pub fn eigenvalue_growth(&self) -> f64 {
        2.0 * self.beta / (self.beta + 2.0)
    }

    pub fn require_supercritical(&self) -> Result<()> {
        if self.regime == Regime::Supercritical {
            Ok(())
        } else {
            Err(Error::Regime(format!(
                "n={} beta={} is {}; the spectral zeta at d/2 diverges unless n*beta > 2",
                self.n, self.beta, self.regime
            )))
        }
    }
}

fn classify(ord: std::cmp::Ordering) -> Regime {
    match ord {
        std::cmp::Ordering::Less => Regime::Subcritical,
        std::cmp::Ordering::Equal => Regime::Critical,
        std::cmp::Ordering::Greater => Regime::Supercritical,
    }
}

/// `Γ(1 + n/2)` for a positive integer `n`, by the half-integer recursion.
pub fn gamma_one_plus_half(n: usize) -> f64 {
    let (mut x, mut g) = if n.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (1.5, PI.sqrt() / 2.0)
    };
    let target = 1.0 + n as f64 / 2.0;
    while x < target - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

pub fn semiclassical_constant(n: usize) -> f64 {
    (4.0 * PI).powf(-(n as f64) / 2.0) / gamma_one_plus_half(n)
}

/// Gas-planet parametrisation by the speed-of-sound exponent `α ∈ (0, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GasPlanetParams {
    pub alpha: f64,
    pub grushin: GrushinParams,
    /// Concentration rate exponent `1/(2 − α)`.
    pub rate_exponent: f64,
}

impl GasPlanetParams {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        let beta = alpha_to_beta(alpha)?;
        Ok(GasPlanetParams {
            alpha,
            grushin: GrushinParams::new(n, beta)?,
            rate_exponent: 1.0 / (2.0 - alpha),
        })
    }

    /// Whether `α ∈ (2/(n+1), 2)`, the range in which the profile `A` exists.
    pub fn profile_applies(&self) -> bool {
        self.alpha > 2.0 / (self.grushin.n as f64 + 1.0) && self.alpha < 2.0
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!(
            "alpha must lie in (0, 2), got {alpha}"
        )))
    }
}

pub fn alpha_to_beta(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(2.0 * alpha / (2.0 - alpha))
}

pub fn beta_to_alpha(beta: f64) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "beta must be positive, got {beta}"
        )));
    }
    Ok(2.0 * beta / (2.0 + beta))
}

/// `x = (1 − α/2)^{-1} u^{1 − α/2}`.
pub fn map_u_to_x(u: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(u >= 0.0) {
        return Err(Error::ParameterDomain(format!("u must be nonnegative, got {u}")));
    }
    let e = 1.0 - alpha / 2.0;
    Ok(u.powf(e) / e)
}

pub fn map_x_to_u(x: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(x >= 0.0) {
        return Err(Error::ParameterDomain(format!("x must be nonnegative, got {x}")));
    }
    let e = 1.0 - alpha / 2.0;
    Ok((e * x).powf(1.0 / e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants() {
        let p = GrushinParams::new(1, 2.0).unwrap();
        assert_eq!(p.c_beta, 0.75);
        assert_eq!(p.d, 2.0);
        assert_eq!(p.regime, Regime::Critical);

        let p = GrushinParams::new(1, 3.0).unwrap();
        assert_eq!(p.c_beta, 1.3125);
        assert_eq!(p.d, 2.5);
        assert_eq!(p.regime, Regime::Supercritical);
        assert!((p.l_cl - 1.0 / PI).abs() < 1e-15);

        let p = GrushinParams::new(2, 2.0).unwrap();
        assert_eq!(p.c_beta, 2.0);
        assert_eq!(p.d, 4.0);
        assert!((p.l_cl - 0.0795775).abs() < 1e-7);
        assert_eq!(p.regime, Regime::Supercritical);
    }

    #[test]
    fn rejects_bad_domain() {
        assert!(matches!(
            GrushinParams::new(0, 1.0),
            Err(Error::ParameterDomain(_))
        ));
        assert!(matches!(
            GrushinParams::new(1, 0.0),
            Err(Error::ParameterDomain(_))
        ));
        assert!(matches!(
            GrushinParams::new(1, -2.0),
            Err(Error::ParameterDomain(_))
        ));
        assert!(alpha_to_beta(2.0).is_err());
        assert!(alpha_to_beta(0.0).is_err());
        assert!(map_u_to_x(-1.0, 1.0).is_err());
    }

    #[test]
    fn rational_exponent_hits_critical_exactly() {
        let beta: Exponent = "2/3".parse().unwrap();
        let p = GrushinParams::from_exponent(3, beta).unwrap();
        assert_eq!(p.regime, Regime::Critical);
        let beta: Exponent = "7/10".parse().unwrap();
        let p = GrushinParams::from_exponent(3, beta).unwrap();
        assert_eq!(p.regime, Regime::Supercritical);
        let p = GrushinParams::from_exponent(1, "2".parse().unwrap()).unwrap();
        assert_eq!(p.regime, Regime::Critical);
    }

    #[test]
    fn gamma_half_integers() {
        assert_eq!(gamma_one_plus_half(2), 1.0);
        assert_eq!(gamma_one_plus_half(4), 2.0);
        assert!((gamma_one_plus_half(1) - PI.sqrt() / 2.0).abs() < 1e-15);
        assert!((gamma_one_plus_half(3) - 0.75 * PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn alpha_beta_examples() {
        let g = GasPlanetParams::new(1, 1.0).unwrap();
        assert_eq!(g.grushin.beta, 2.0);
        assert_eq!(g.rate_exponent, 1.0);
        assert!((alpha_to_beta(4.0 / 3.0).unwrap() - 4.0).abs() < 1e-14);
        assert!(!GasPlanetParams::new(1, 1.0).unwrap().profile_applies());
        assert!(GasPlanetParams::new(1, 1.2).unwrap().profile_applies());
    }

    #[test]
    fn coordinate_maps() {
        assert_eq!(map_u_to_x(0.0, 0.7).unwrap(), 0.0);
        assert_eq!(map_u_to_x(1.0, 1.0).unwrap(), 2.0);
        for u in [0.1, 1.0, 10.0] {
            for alpha in [0.3, 1.0, 1.2, 1.9] {
                let back = map_x_to_u(map_u_to_x(u, alpha).unwrap(), alpha).unwrap();
                assert!((back - u).abs() <= 1e-12 * u);
            }
        }
    }
}
