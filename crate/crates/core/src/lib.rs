//! Spectral engine for Grushin-type singular Laplacians: the one-dimensional
//! model operators `P_μ = −∂² + C_β x⁻² + μ x^β`, their scaling theory, the
//! boundary concentration profiles, and the product model on `[0, x_max] × M`.

// `!(a > b)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cross;
pub mod emit;
pub mod error;
pub mod model;
pub mod params;
pub mod profile;
pub mod scaling;
pub mod sturm;

pub use cross::{circle_spectrum, load_cross_spectrum, torus_spectrum, CrossEntry, CrossSpectrum};
pub use error::{Error, Result};
pub use params::{GasPlanetParams, GrushinParams, Regime};

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::ParameterDomain(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}
