//! Command-line front end for the grushin spectral engine.

pub mod commands;
pub mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use grushin_core::Error;

#[derive(Debug, Parser)]
#[command(
    name = "grushin",
    version,
    about = "Spectral engine for Grushin-type singular Laplacians"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Print derived constants as JSON
    Params,
    /// Reference spectrum of P_1, or the product-model table when --lambda is given
    Spectrum,
    /// Boundary profile B, plus A when --alpha is given
    Profile,
    /// Counting function samples and power-law fit
    Weyl,
    /// Riesz means and traces against their semiclassical limits
    Riesz,
    /// Density moments and mass capture
    Density,
    /// Finite-difference derivative of the trace against the density pairing
    HfCheck,
}

/// Flags mirror the config keys; every one may also come from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long, global = true)]
    pub n: Option<String>,
    #[arg(long, global = true)]
    pub beta: Option<String>,
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    /// circle:<L> | torus:<L1>x<L2> | file:<path>
    #[arg(long, global = true)]
    pub cross: Option<String>,
    #[arg(long, global = true)]
    pub x_max: Option<String>,
    /// dirichlet | neumann
    #[arg(long, global = true)]
    pub right_bc: Option<String>,
    #[arg(long, global = true)]
    pub nodes_per_wavelength: Option<String>,
    #[arg(long, global = true)]
    pub min_nodes: Option<String>,
    #[arg(long, global = true)]
    pub max_nodes: Option<String>,
    #[arg(long, global = true)]
    pub k_max: Option<String>,
    #[arg(long, global = true)]
    pub cert_tol: Option<String>,
    #[arg(long, global = true)]
    pub t_points: Option<String>,
    #[arg(long, global = true)]
    pub points_per_node: Option<String>,
    #[arg(long, global = true)]
    pub s_panels: Option<String>,
    /// Comma-separated ascending list
    #[arg(long, global = true)]
    pub lambda: Option<String>,
    /// const:<c> | exp:<a>,<b> | indicator:<a>,<b> | file:<path>
    #[arg(long, global = true)]
    pub v1: Option<String>,
    /// const:<c> | cos:<m>
    #[arg(long, global = true)]
    pub v2: Option<String>,
    #[arg(long, global = true)]
    pub s: Option<String>,
    #[arg(long, global = true)]
    pub epsilon: Option<String>,
    #[arg(long, global = true)]
    pub workers: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// csv | json | both
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

impl Flags {
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let all = [
            ("n", &self.n),
            ("beta", &self.beta),
            ("alpha", &self.alpha),
            ("cross", &self.cross),
            ("x_max", &self.x_max),
            ("right_bc", &self.right_bc),
            ("nodes_per_wavelength", &self.nodes_per_wavelength),
            ("min_nodes", &self.min_nodes),
            ("max_nodes", &self.max_nodes),
            ("k_max", &self.k_max),
            ("cert_tol", &self.cert_tol),
            ("t_points", &self.t_points),
            ("points_per_node", &self.points_per_node),
            ("s_panels", &self.s_panels),
            ("lambda", &self.lambda),
            ("v1", &self.v1),
            ("v2", &self.v2),
            ("s", &self.s),
            ("epsilon", &self.epsilon),
            ("workers", &self.workers),
            ("out", &self.out),
            ("format", &self.format),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v)))
            .collect()
    }

    /// Defaults, then the config file, then these flags.
    pub fn resolve(&self) -> grushin_core::Result<config::RunConfig> {
        let file = match &self.config {
            Some(p) => config::load_config(p)?,
            None => BTreeMap::new(),
        };
        config::RunConfig::from_pairs(&config::merge(&file, &self.to_pairs()))
    }
}

/// 2 for invalid input, 3 when a numerical certificate fails.
pub fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

pub fn error_json(code: &str, message: &str) -> String {
    serde_json::json!({ "code": code, "message": message }).to_string()
}
