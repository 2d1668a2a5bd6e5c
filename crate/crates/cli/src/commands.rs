use serde::Serialize;

use grushin_core::emit::{fmt_f64, to_json};
use grushin_core::model::{
    self, EigenTable, HellmannFeynman, Lemma1Rhs, ModelOperator, MomentReport, SQuadrature,
};
use grushin_core::params::{GasPlanetParams, Regime};
use grushin_core::profile::{self, BoundaryProfile};
use grushin_core::scaling::{self, ReferenceSpectrum};
use grushin_core::sturm::{BoundaryCondition, Shape};
use grushin_core::Result;

use crate::config::RunConfig;
use crate::Command;

/// What a subcommand produced: text for stdout and files for the output directory.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub files: Vec<(String, String)>,
}

impl Output {
    fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Output> {
    match command {
        Command::Params => params(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Profile => profile_cmd(cfg),
        Command::Weyl => weyl(cfg),
        Command::Riesz => riesz(cfg),
        Command::Density => density(cfg),
        Command::HfCheck => hf_check(cfg),
    }
}

#[derive(Serialize)]
struct ParamsReport {
    n: usize,
    beta: f64,
    alpha: f64,
    c_beta: f64,
    d: f64,
    l_cl: f64,
    regime: Regime,
    bessel_order: f64,
    weyl_exponent: f64,
    eigenvalue_growth: f64,
    concentration_rate: f64,
    profile_a_applies: bool,
}

fn params(cfg: &RunConfig) -> Result<Output> {
    let p = cfg.params()?;
    let alpha = cfg
        .alpha
        .map_or_else(|| grushin_core::params::beta_to_alpha(p.beta), Ok)?;
    let gas = GasPlanetParams::new(p.n, alpha)?;
    let report = ParamsReport {
        n: p.n,
        beta: p.beta,
        alpha,
        c_beta: p.c_beta,
        d: p.d,
        l_cl: p.l_cl,
        regime: p.regime,
        bessel_order: p.bessel_order(),
        weyl_exponent: p.d / 2.0,
        eigenvalue_growth: p.eigenvalue_growth(),
        concentration_rate: gas.rate_exponent,
        profile_a_applies: gas.profile_applies(),
    };
    Ok(Output {
        stdout: to_json(&report)?,
        files: Vec::new(),
    })
}

fn reference(cfg: &RunConfig) -> Result<ReferenceSpectrum> {
    let cache = scaling::cache_dir_from_env();
    scaling::reference_spectrum_cached(&cfg.params()?, cfg.k_max, cfg.cert_tol, cache.as_deref())
}

fn model_for(cfg: &RunConfig, right_bc: BoundaryCondition) -> Result<ModelOperator> {
    let p = cfg.params()?;
    let mu_max = model::mode_cutoff(&p, cfg.x_max, cfg.lambda_max()) * 1.01;
    ModelOperator::new(p, cfg.cross.build(mu_max)?, cfg.x_max, right_bc, cfg.policy)
}

fn table(cfg: &RunConfig, vectors: bool) -> Result<(ModelOperator, EigenTable)> {
    let m = model_for(cfg, cfg.right_bc)?;
    let t = model::assemble_spectrum(&m, cfg.lambda_max(), vectors)?;
    Ok((m, t))
}

fn spectrum(cfg: &RunConfig) -> Result<Output> {
    let mut out = Output::default();
    if cfg.lambdas_given {
        let (_, t) = table(cfg, false)?;
        if cfg.format.csv() {
            out.add("table.csv", t.to_csv());
        }
        if cfg.format.json() {
            out.add("table.json", to_json(&t)?);
        }
    } else {
        let r = reference(cfg)?;
        if cfg.format.csv() {
            out.add("reference.csv", r.to_csv());
        }
        if cfg.format.json() {
            out.add("reference.json", r.to_json()?);
        }
    }
    Ok(out)
}

fn b_profile(cfg: &RunConfig, r: &ReferenceSpectrum) -> Result<BoundaryProfile> {
    profile::compute_profile_b(r, &profile::default_x_grid(r), &cfg.quadrature, r.k_max())
}

fn profile_cmd(cfg: &RunConfig) -> Result<Output> {
    cfg.params()?.require_supercritical()?;
    let r = reference(cfg)?;
    let b = b_profile(cfg, &r)?;
    let mut out = Output::default();
    if b.support_warning {
        log::warn!("B grid extends past the range where the retained terms dominate");
    }
    let mut emit = |name: &str, p: &BoundaryProfile| -> Result<()> {
        if cfg.format.csv() {
            out.add(&format!("{name}.csv"), p.to_csv());
        }
        if cfg.format.json() {
            out.add(&format!("{name}.json"), p.to_json()?);
        }
        Ok(())
    };
    emit("profile_b", &b)?;
    if let Some(alpha) = cfg.alpha {
        emit("profile_a", &profile::compute_profile_a(&b, alpha)?)?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct Sample {
    lambda: f64,
    #[serde(rename = "N")]
    n: u64,
}

#[derive(Serialize)]
struct WeylReport {
    n: usize,
    beta: f64,
    cross: String,
    x_max: f64,
    right_bc: BoundaryCondition,
    expected_slope: f64,
    slope: f64,
    constant: f64,
    residuals: Vec<f64>,
    volume: f64,
    weyl_constant: Option<f64>,
    target_constant: Option<f64>,
    constant_ratio: Option<f64>,
    samples: Vec<Sample>,
}

fn weyl(cfg: &RunConfig) -> Result<Output> {
    let p = cfg.params()?;
    let (m, t) = table(cfg, false)?;
    let fit = model::weyl_fit(&t, &cfg.lambdas)?;
    let c = if p.regime == Regime::Supercritical {
        Some(profile::weyl_constant(&reference(cfg)?)?.value)
    } else {
        None
    };
    let target = c.map(|c| c * t.volume);
    let report = WeylReport {
        n: p.n,
        beta: p.beta,
        cross: m.cross.label().to_string(),
        x_max: cfg.x_max,
        right_bc: cfg.right_bc,
        expected_slope: p.d / 2.0,
        slope: fit.slope,
        constant: fit.constant,
        residuals: fit.residuals.clone(),
        volume: t.volume,
        weyl_constant: c,
        target_constant: target,
        constant_ratio: target.map(|v| fit.constant / v),
        samples: fit
            .samples
            .iter()
            .map(|(lambda, n)| Sample {
                lambda: *lambda,
                n: *n,
            })
            .collect(),
    };
    let mut out = Output::default();
    if cfg.format.json() {
        out.add("weyl.json", to_json(&report)?);
    }
    if cfg.format.csv() {
        let mut csv = String::from("lambda,N\n");
        for (l, n) in &fit.samples {
            csv.push_str(&format!("{},{n}\n", fmt_f64(*l)));
        }
        out.add("weyl.csv", csv);
    }
    Ok(out)
}

#[derive(Serialize)]
struct RieszRow {
    lambda: f64,
    riesz_mean: f64,
    riesz_scaled: f64,
    trace: f64,
    trace_scaled: f64,
}

#[derive(Serialize)]
struct RieszReport {
    n: usize,
    beta: f64,
    cross: String,
    x_max: f64,
    v1: String,
    free_limit: f64,
    rhs: Lemma1Rhs,
    rows: Vec<RieszRow>,
}

fn squadrature(cfg: &RunConfig) -> SQuadrature {
    SQuadrature {
        initial_panels: cfg.s_panels,
        cert_tol: cfg.cert_tol,
        policy: cfg.policy,
        ..SQuadrature::default()
    }
}

fn riesz(cfg: &RunConfig) -> Result<Output> {
    let p = cfg.params()?;
    p.require_supercritical()?;
    let r = reference(cfg)?;
    let (m, t) = table(cfg, false)?;
    let quad = squadrature(cfg);
    let free_limit = model::lemma1_rhs(&r, &Shape::Const(0.0), t.volume, &quad)?.value;
    let rhs = model::lemma1_rhs(&r, &cfg.v1, t.volume, &quad)?;
    let rows = cfg
        .lambdas
        .iter()
        .map(|l| {
            let scale = l.powf(-1.0 - p.d / 2.0);
            let riesz_mean = model::riesz_mean(&t, *l)?;
            let trace = model::trace_with_potential(&m, *l, &cfg.v1)?;
            Ok(RieszRow {
                lambda: *l,
                riesz_mean,
                riesz_scaled: scale * riesz_mean,
                trace,
                trace_scaled: scale * trace,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Output::default();
    if cfg.format.csv() {
        let mut csv = String::from("lambda,riesz_mean,riesz_scaled,trace,trace_scaled\n");
        for row in &rows {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_f64(row.lambda),
                fmt_f64(row.riesz_mean),
                fmt_f64(row.riesz_scaled),
                fmt_f64(row.trace),
                fmt_f64(row.trace_scaled)
            ));
        }
        out.add("riesz.csv", csv);
    }
    if cfg.format.json() {
        let report = RieszReport {
            n: p.n,
            beta: p.beta,
            cross: m.cross.label().to_string(),
            x_max: cfg.x_max,
            v1: cfg.v1.to_string(),
            free_limit,
            rhs,
            rows,
        };
        out.add("riesz.json", to_json(&report)?);
    }
    Ok(out)
}

/// Quantile levels at which the mass-capture curve is sampled.
const CAPTURE_LEVELS: [f64; 5] = [0.5, 0.75, 0.9, 0.95, 0.99];

#[derive(Serialize)]
struct CaptureRow {
    lambda: f64,
    p: f64,
    #[serde(rename = "L")]
    big_l: f64,
    capture: f64,
}

#[derive(Serialize)]
struct DensityReport {
    v1: String,
    v2: String,
    moments: Vec<MomentReport>,
    capture: Vec<CaptureRow>,
}

fn density(cfg: &RunConfig) -> Result<Output> {
    cfg.params()?.require_supercritical()?;
    let r = reference(cfg)?;
    let b = b_profile(cfg, &r)?;
    let (_, t) = table(cfg, true)?;
    let moments = cfg
        .lambdas
        .iter()
        .map(|l| model::density_moment(&t, *l, &cfg.v1, &cfg.v2, &b))
        .collect::<Result<Vec<_>>>()?;
    let mut capture = Vec::new();
    for p in CAPTURE_LEVELS {
        let big_l = profile::profile_quantile(&b, p)?;
        for l in &cfg.lambdas {
            capture.push(CaptureRow {
                lambda: *l,
                p,
                big_l,
                capture: model::mass_capture(&t, *l, big_l)?,
            });
        }
    }
    capture.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.p.total_cmp(&b.p)));
    let mut out = Output::default();
    if cfg.format.csv() {
        let mut csv = String::from("lambda,p,L,capture\n");
        for c in &capture {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                fmt_f64(c.lambda),
                fmt_f64(c.p),
                fmt_f64(c.big_l),
                fmt_f64(c.capture)
            ));
        }
        out.add("capture.csv", csv);
    }
    if cfg.format.json() {
        let report = DensityReport {
            v1: cfg.v1.to_string(),
            v2: cfg.v2.to_string(),
            moments,
            capture,
        };
        out.add("density.json", to_json(&report)?);
    }
    Ok(out)
}

fn hf_check(cfg: &RunConfig) -> Result<Output> {
    let r = reference(cfg)?;
    let hf: HellmannFeynman =
        model::hellmann_feynman(&r, cfg.s, &cfg.v1, cfg.epsilon, cfg.cert_tol, &cfg.policy)?;
    let mut out = Output::default();
    if cfg.format.csv() {
        out.add(
            "hf.csv",
            format!(
                "s,epsilon,fd_value,pairing_value,gap,count,reference_count\n{},{},{},{},{},{},{}\n",
                fmt_f64(hf.s),
                fmt_f64(hf.epsilon),
                fmt_f64(hf.fd_value),
                fmt_f64(hf.pairing_value),
                fmt_f64(hf.gap),
                hf.count,
                hf.reference_count
            ),
        );
    }
    if cfg.format.json() {
        out.add("hf.json", to_json(&hf)?);
    }
    Ok(out)
}
