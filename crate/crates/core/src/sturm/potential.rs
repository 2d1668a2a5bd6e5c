//! Potentials on the half-line: the model terms `c x^{-2} + μ x^β` and the
//! bounded perturbations `V` used by the trace and density functionals.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Bounded potential shapes.
///
/// `Tabulated` interpolates linearly between samples and is continued by its
/// end values outside the table.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Const(f64),
    /// `a·e^{−b x}`
    Exp {
        a: f64,
        b: f64,
    },
    /// `a·1[x ≤ b]`
    Indicator {
        a: f64,
        b: f64,
    },
    Tabulated {
        xs: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Shape {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Shape::Const(c) => *c,
            Shape::Exp { a, b } => a * (-b * x).exp(),
            Shape::Indicator { a, b } => {
                if x <= *b {
                    *a
                } else {
                    0.0
                }
            }
            Shape::Tabulated { xs, values } => interpolate(xs, values, x),
        }
    }

    /// `sup |V|`.
    pub fn sup_norm(&self) -> f64 {
        match self {
            Shape::Const(c) => c.abs(),
            Shape::Exp { a, .. } | Shape::Indicator { a, .. } => a.abs(),
            Shape::Tabulated { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// `lim_{x→∞} V(x)`.
    pub fn far_field(&self) -> f64 {
        match self {
            Shape::Const(c) => *c,
            Shape::Exp { .. } | Shape::Indicator { .. } => 0.0,
            Shape::Tabulated { values, .. } => *values.last().expect("non-empty table"),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Shape::Const(_))
    }

    /// The same shape with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Shape {
        match self {
            Shape::Const(c) => Shape::Const(c * factor),
            Shape::Exp { a, b } => Shape::Exp { a: a * factor, b: *b },
            Shape::Indicator { a, b } => Shape::Indicator { a: a * factor, b: *b },
            Shape::Tabulated { xs, values } => Shape::Tabulated {
                xs: xs.clone(),
                values: values.iter().map(|v| v * factor).collect(),
            },
        }
    }

    /// `V − V(∞)`.
    pub fn minus_far_field(&self) -> Shape {
        match self {
            Shape::Const(_) => Shape::Const(0.0),
            Shape::Tabulated { xs, values } => {
                let last = *values.last().expect("non-empty table");
                Shape::Tabulated {
                    xs: xs.clone(),
                    values: values.iter().map(|v| v - last).collect(),
                }
            }
            other => other.clone(),
        }
    }

    /// Reads a two-column `x,V` CSV with strictly ascending `x`.
    pub fn load_table(path: impl AsRef<Path>) -> Result<Shape> {
        Shape::parse_table(&fs::read_to_string(path)?)
    }

    pub fn parse_table(text: &str) -> Result<Shape> {
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.eq_ignore_ascii_case("x,v") {
                continue;
            }
            let line_no = idx + 1;
            let (x, v) = line
                .split_once(',')
                .ok_or_else(|| Error::schema(line_no, "expected 'x,V'"))?;
            let x: f64 = x.trim().parse().map_err(|_| Error::schema(line_no, "bad x"))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::schema(line_no, "bad V"))?;
            if !(x.is_finite() && v.is_finite()) {
                return Err(Error::schema(line_no, "non-finite sample"));
            }
            if let Some(prev) = xs.last() {
                if !(x > *prev) {
                    return Err(Error::schema(line_no, "x must be strictly ascending"));
                }
            }
            xs.push(x);
            values.push(v);
        }
        if xs.is_empty() {
            return Err(Error::schema(1, "empty potential table"));
        }
        Ok(Shape::Tabulated { xs, values })
    }
}

fn interpolate(xs: &[f64], values: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return values[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return values[last];
    }
    let i = xs.partition_point(|&t| t <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    values[i] + w * (values[i + 1] - values[i])
}

impl FromStr for Shape {
    type Err = Error;

    /// `const:<c>`, `exp:<a>,<b>`, `indicator:<a>,<b>` or `file:<path>`.
    fn from_str(s: &str) -> Result<Shape> {
        let bad = || Error::ParameterDomain(format!("cannot parse potential descriptor '{s}'"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let nums = |args: &str| -> Result<Vec<f64>> {
            args.split(',')
                .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
                .collect()
        };
        let shape = match kind.trim() {
            "const" => match nums(args)?.as_slice() {
                [c] => Shape::Const(*c),
                _ => return Err(bad()),
            },
            "exp" => match nums(args)?.as_slice() {
                [a, b] => Shape::Exp { a: *a, b: *b },
                _ => return Err(bad()),
            },
            "indicator" => match nums(args)?.as_slice() {
                [a, b] => Shape::Indicator { a: *a, b: *b },
                _ => return Err(bad()),
            },
            "file" => Shape::load_table(args.trim())?,
            _ => return Err(bad()),
        };
        if let Shape::Exp { b, .. } = shape {
            if b < 0.0 {
                return Err(Error::ParameterDomain(
                    "exp decay rate must be >= 0 (bounded V)".into(),
                ));
            }
        }
        let finite = match &shape {
            Shape::Const(c) => c.is_finite(),
            Shape::Exp { a, b } | Shape::Indicator { a, b } => a.is_finite() && b.is_finite(),
            Shape::Tabulated { .. } => true,
        };
        if !finite {
            return Err(bad());
        }
        Ok(shape)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Const(c) => write!(f, "const:{c}"),
            Shape::Exp { a, b } => write!(f, "exp:{a},{b}"),
            Shape::Indicator { a, b } => write!(f, "indicator:{a},{b}"),
            Shape::Tabulated { xs, .. } => write!(f, "table[{} samples]", xs.len()),
        }
    }
}

/// `amplitude · V(stretch · x)`; with `amplitude = λ`, `stretch = √λ` this is `V_λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledShape {
    pub shape: Shape,
    pub amplitude: f64,
    pub stretch: f64,
}

impl ScaledShape {
    pub fn plain(shape: Shape) -> Self {
        ScaledShape {
            shape,
            amplitude: 1.0,
            stretch: 1.0,
        }
    }

    /// `V_λ(x) = λ V(√λ x)`.
    pub fn semiclassical(shape: Shape, lambda: f64) -> Self {
        ScaledShape {
            shape,
            amplitude: lambda,
            stretch: lambda.sqrt(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * self.shape.eval(self.stretch * x)
    }

    pub fn sup_norm(&self) -> f64 {
        self.amplitude.abs() * self.shape.sup_norm()
    }
}

/// `q(x) = c x^{-2} + μ x^β + extra(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub c_coef: f64,
    pub mu: f64,
    pub beta: f64,
    pub extra: Option<ScaledShape>,
}

impl PotentialSpec {
    pub fn new(c_coef: f64, mu: f64, beta: f64) -> Result<Self> {
        if !(c_coef.is_finite() && c_coef >= 0.0) {
            return Err(Error::ParameterDomain(format!(
                "c_coef must be >= 0, got {c_coef}"
            )));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::ParameterDomain(format!("mu must be >= 0, got {mu}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "beta must be positive, got {beta}"
            )));
        }
        Ok(PotentialSpec {
            c_coef,
            mu,
            beta,
            extra: None,
        })
    }

    /// The model operator `P_μ` for given parameters.
    pub fn model(params: &crate::params::GrushinParams, mu: f64) -> Result<Self> {
        PotentialSpec::new(params.c_beta, mu, params.beta)
    }

    pub fn with_extra(mut self, extra: ScaledShape) -> Self {
        self.extra = Some(extra);
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut q = self.c_coef / (x * x) + self.mu * x.powf(self.beta);
        if let Some(extra) = &self.extra {
            q += extra.eval(x);
        }
        q
    }

    pub fn extra_sup(&self) -> f64 {
        self.extra.as_ref().map_or(0.0, |e| e.sup_norm())
    }

    /// Upper bound on the outermost classical turning point at energy `e`,
    /// from `q(x) ≥ μ x^β − sup|extra|`. `None` when `μ = 0` (no confinement).
    pub fn turning_point_bound(&self, e: f64) -> Option<f64> {
        if self.mu <= 0.0 {
            return None;
        }
        let top = (e + self.extra_sup()).max(0.0);
        Some((top / self.mu).powf(1.0 / self.beta))
    }
}
