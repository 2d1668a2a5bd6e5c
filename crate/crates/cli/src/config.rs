//! Run configuration: built-in defaults, then a flat `key = value` file, then flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use grushin_core::model::CrossPotential;
use grushin_core::params::{self, GrushinParams};
use grushin_core::profile::QuadratureConfig;
use grushin_core::sturm::{BoundaryCondition, GridPolicy, Shape};
use grushin_core::{circle_spectrum, load_cross_spectrum, torus_spectrum, CrossSpectrum, Error, Result};

/// Every key accepted in a config file; flags use the same names with dashes.
pub const KEYS: &[&str] = &[
    "n",
    "beta",
    "alpha",
    "cross",
    "x_max",
    "right_bc",
    "nodes_per_wavelength",
    "min_nodes",
    "max_nodes",
    "k_max",
    "cert_tol",
    "t_points",
    "points_per_node",
    "s_panels",
    "lambda",
    "v1",
    "v2",
    "s",
    "epsilon",
    "workers",
    "out",
    "format",
];

#[derive(Debug, Clone, PartialEq)]
pub enum CrossSpec {
    Circle(f64),
    Torus(f64, f64),
    File(PathBuf),
}

impl CrossSpec {
    /// The cross spectrum up to `mu_max` (file spectra are taken as given).
    pub fn build(&self, mu_max: f64) -> Result<CrossSpectrum> {
        match self {
            CrossSpec::Circle(l) => circle_spectrum(*l, mu_max),
            CrossSpec::Torus(a, b) => torus_spectrum(*a, *b, mu_max),
            CrossSpec::File(p) => load_cross_spectrum(p),
        }
    }
}

impl FromStr for CrossSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParameterDomain(format!("cannot parse cross model '{s}'"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        match s.split_once(':').ok_or_else(bad)? {
            ("circle", l) => Ok(CrossSpec::Circle(num(l)?)),
            ("torus", dims) => {
                let (a, b) = dims.split_once('x').ok_or_else(bad)?;
                Ok(CrossSpec::Torus(num(a)?, num(b)?))
            }
            ("file", p) => Ok(CrossSpec::File(PathBuf::from(p.trim()))),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "both" => Ok(Format::Both),
            _ => Err(Error::ParameterDomain(format!(
                "format must be csv, json or both, got '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub beta: f64,
    pub alpha: Option<f64>,
    pub cross: CrossSpec,
    pub x_max: f64,
    pub right_bc: BoundaryCondition,
    pub policy: GridPolicy,
    pub k_max: usize,
    pub cert_tol: f64,
    pub quadrature: QuadratureConfig,
    pub s_panels: usize,
    pub lambdas: Vec<f64>,
    /// Whether the list came from the user rather than the default ladder.
    pub lambdas_given: bool,
    pub v1: Shape,
    pub v2: CrossPotential,
    pub s: f64,
    pub epsilon: f64,
    pub workers: usize,
    pub out: PathBuf,
    pub format: Format,
}

impl RunConfig {
    pub fn params(&self) -> Result<GrushinParams> {
        GrushinParams::new(self.n, self.beta)
    }

    pub fn lambda_max(&self) -> f64 {
        *self.lambdas.last().expect("validated non-empty")
    }
}

/// Parses the flat config format: one `key = value` per line, `#` comments.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let schema = |message: String| Error::Schema {
            line: idx + 1,
            message,
        };
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| schema("expected 'key = value'".into()))?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(schema(format!("unknown key '{}'", k.trim())));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(schema(format!("duplicate key '{key}'")));
        }
    }
    Ok(map)
}

pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_config_text(&fs::read_to_string(path)?)
}

/// File values overridden by flag values.
pub fn merge(file: &BTreeMap<String, String>, flags: &BTreeMap<String, String>) -> BTreeMap<String, String> {
    let mut out = file.clone();
    out.extend(flags.iter().map(|(k, v)| (k.clone(), v.clone())));
    out
}

fn get<T: FromStr>(map: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::ParameterDomain(format!("cannot parse {key} = '{v}'"))),
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::ParameterDomain(format!("{key} must be positive, got {v}")))
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl RunConfig {
    /// Builds a configuration from resolved key/value pairs; missing keys take defaults.
    pub fn from_pairs(map: &BTreeMap<String, String>) -> Result<RunConfig> {
        if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::ParameterDomain(format!("unknown key '{k}'")));
        }
        let alpha: Option<f64> = map.get("alpha").map(|_| get(map, "alpha", 0.0)).transpose()?;
        let beta = match (map.contains_key("beta"), alpha) {
            (true, Some(_)) => {
                return Err(Error::ParameterDomain(
                    "give either beta or alpha, not both".into(),
                ))
            }
            (_, Some(a)) => params::alpha_to_beta(a)?,
            (_, None) => get(map, "beta", 3.0)?,
        };
        let defaults = GridPolicy::default();
        let policy = GridPolicy {
            nodes_per_wavelength: get(map, "nodes_per_wavelength", defaults.nodes_per_wavelength)?,
            min_nodes: get(map, "min_nodes", defaults.min_nodes)?,
            max_nodes: get(map, "max_nodes", defaults.max_nodes)?,
        };
        policy.validate()?;
        let quad = QuadratureConfig::default();
        let quadrature = QuadratureConfig {
            t_points: get(map, "t_points", quad.t_points)?,
            points_per_node: get(map, "points_per_node", quad.points_per_node)?,
        };
        let lambdas = match map.get("lambda") {
            None => vec![500.0, 1000.0, 2000.0, 4000.0],
            Some(list) => list
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::ParameterDomain(format!("cannot parse lambda list '{list}'")))
                        .and_then(|l| positive("lambda", l))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        if lambdas.is_empty() || lambdas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::ParameterDomain(
                "lambda list must be non-empty and ascending".into(),
            ));
        }
        let cfg = RunConfig {
            n: get(map, "n", 1)?,
            beta,
            alpha,
            cross: get(map, "cross", CrossSpec::Circle(2.0 * std::f64::consts::PI))?,
            x_max: positive("x_max", get(map, "x_max", 1.0)?)?,
            right_bc: get(map, "right_bc", BoundaryCondition::Dirichlet)?,
            policy,
            k_max: get(map, "k_max", grushin_core::scaling::DEFAULT_K_MAX)?,
            cert_tol: positive(
                "cert_tol",
                get(map, "cert_tol", grushin_core::scaling::DEFAULT_CERT_TOL)?,
            )?,
            quadrature,
            s_panels: get(map, "s_panels", 16)?,
            lambdas,
            lambdas_given: map.contains_key("lambda"),
            v1: match map.get("v1") {
                None => Shape::Exp { a: 1.0, b: 1.0 },
                Some(v) => v.parse()?,
            },
            v2: get(map, "v2", CrossPotential::Const(1.0))?,
            s: positive("s", get(map, "s", 0.02)?)?,
            epsilon: positive("epsilon", get(map, "epsilon", 1e-3)?)?,
            workers: get(map, "workers", default_workers())?,
            out: PathBuf::from(map.get("out").map_or("out", String::as_str)),
            format: get(map, "format", Format::Both)?,
        };
        cfg.params()?;
        if cfg.k_max == 0 || cfg.s_panels == 0 || cfg.workers == 0 || cfg.quadrature.t_points < 2 {
            return Err(Error::ParameterDomain(
                "k_max, s_panels and workers must be >= 1 and t_points >= 2".into(),
            ));
        }
        Ok(cfg)
    }
}
