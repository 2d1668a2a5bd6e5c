//! Eigenvalues of the Laplacian on the cross manifold `M`.
//!
//! Only the eigenvalue list and the volume enter the product model, so the
//! catalogue is a circle, a flat rectangular torus, and spectra read from file.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::emit::fmt_f64;
use crate::error::{Error, Result};
use crate::params::semiclassical_constant;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossEntry {
    pub mu: f64,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSpectrum {
    entries: Vec<CrossEntry>,
    volume: f64,
    label: String,
    /// Known for built-in models; spectra read from file do not declare it.
    dimension: Option<usize>,
    /// Degenerate eigenspaces have a uniform density on `M` (true on flat tori).
    uniform_density: bool,
}

impl CrossSpectrum {
    pub fn new(entries: Vec<CrossEntry>, volume: f64, label: impl Into<String>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::ParameterDomain("cross spectrum has no entries".into()));
        }
        if !(volume.is_finite() && volume > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "volume must be positive, got {volume}"
            )));
        }
        for (i, e) in entries.iter().enumerate() {
            if !(e.mu.is_finite() && e.mu >= 0.0) {
                return Err(Error::ParameterDomain(format!("entry {i}: mu must be >= 0")));
            }
            if e.multiplicity == 0 {
                return Err(Error::ParameterDomain(format!(
                    "entry {i}: multiplicity must be >= 1"
                )));
            }
            if i > 0 && !(e.mu > entries[i - 1].mu) {
                return Err(Error::ParameterDomain(format!(
                    "entry {i}: mu values must be strictly increasing"
                )));
            }
        }
        Ok(CrossSpectrum {
            entries,
            volume,
            label: label.into(),
            dimension: None,
            uniform_density: false,
        })
    }

    pub fn entries(&self) -> &[CrossEntry] {
        &self.entries
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dimension(&self) -> Option<usize> {
        self.dimension
    }

    pub fn has_uniform_density(&self) -> bool {
        self.uniform_density
    }

    pub fn mu_max(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.mu)
    }

    /// Number of eigenvalues `≤ t`, counted with multiplicity.
    pub fn count_up_to(&self, t: f64) -> u64 {
        self.entries
            .iter()
            .take_while(|e| e.mu <= t)
            .map(|e| e.multiplicity)
            .sum()
    }

    /// `c_M = (L^cl_{0,n} v_G(M))^{-2/n}`, the Weyl coefficient of `μ_j ≈ c_M j^{2/n}`.
    pub fn weyl_coefficient(&self, n: usize) -> f64 {
        (semiclassical_constant(n) * self.volume).powf(-2.0 / n as f64)
    }

    /// Same eigenvalues with every multiplicity multiplied by `factor`.
    pub fn with_scaled_multiplicities(&self, factor: u64) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            e.multiplicity *= factor;
        }
        out
    }

    /// Writes the documented CSV form.
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# volume={} label={}\nmu,multiplicity\n",
            fmt_f64(self.volume),
            self.label
        );
        for e in &self.entries {
            s.push_str(&format!("{},{}\n", fmt_f64(e.mu), e.multiplicity));
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut volume = None;
        let mut label = String::new();
        let mut entries: Vec<CrossEntry> = Vec::new();
        let mut header_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("volume=") {
                    let (vol, tail) = v.split_once(char::is_whitespace).unwrap_or((v, ""));
                    let vol: f64 = vol
                        .parse()
                        .map_err(|_| Error::schema(line_no, format!("bad volume '{vol}'")))?;
                    if !(vol.is_finite() && vol > 0.0) {
                        return Err(Error::schema(line_no, "volume must be positive"));
                    }
                    volume = Some(vol);
                    header_line = line_no;
                    label = tail.trim().strip_prefix("label=").unwrap_or("").to_string();
                }
                continue;
            }
            if line.eq_ignore_ascii_case("mu,multiplicity") {
                continue;
            }
            let (mu, mult) = line
                .split_once(',')
                .ok_or_else(|| Error::schema(line_no, "expected 'mu,multiplicity'"))?;
            let mu: f64 = mu
                .trim()
                .parse()
                .map_err(|_| Error::schema(line_no, format!("bad mu '{}'", mu.trim())))?;
            let mult: i64 = mult
                .trim()
                .parse()
                .map_err(|_| Error::schema(line_no, format!("bad multiplicity '{}'", mult.trim())))?;
            if !(mu.is_finite() && mu >= 0.0) {
                return Err(Error::schema(line_no, "mu must be a nonnegative number"));
            }
            if mult < 1 {
                return Err(Error::schema(line_no, "multiplicity must be a positive integer"));
            }
            if let Some(prev) = entries.last() {
                if !(mu > prev.mu) {
                    return Err(Error::schema(line_no, "mu values must be strictly increasing"));
                }
            }
            entries.push(CrossEntry {
                mu,
                multiplicity: mult as u64,
            });
        }
        let volume = volume.ok_or_else(|| Error::schema(1, "missing '# volume=<float>' header"))?;
        if entries.is_empty() {
            return Err(Error::schema(header_line.max(1), "no spectrum entries"));
        }
        CrossSpectrum::new(entries, volume, label)
    }
}

pub fn load_cross_spectrum(path: impl AsRef<Path>) -> Result<CrossSpectrum> {
    let text = fs::read_to_string(path)?;
    CrossSpectrum::parse_csv(&text)
}

/// Circle of circumference `length`: `0` once, then `(2πj/length)²` twice.
pub fn circle_spectrum(length: f64, mu_max: f64) -> Result<CrossSpectrum> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "circle length must be positive, got {length}"
        )));
    }
    let step = 2.0 * PI / length;
    let mut entries = vec![CrossEntry {
        mu: 0.0,
        multiplicity: 1,
    }];
    let mut j = 1u64;
    loop {
        let mu = (step * j as f64).powi(2);
        if mu > mu_max {
            break;
        }
        entries.push(CrossEntry { mu, multiplicity: 2 });
        j += 1;
    }
    let mut s = CrossSpectrum::new(entries, length, format!("circle:{}", fmt_f64(length)))?;
    s.dimension = Some(1);
    s.uniform_density = true;
    Ok(s)
}

/// Flat torus `R²/(L1 Z × L2 Z)`, eigenvalues grouped by lattice counting.
pub fn torus_spectrum(l1: f64, l2: f64, mu_max: f64) -> Result<CrossSpectrum> {
    if !(l1.is_finite() && l1 > 0.0 && l2.is_finite() && l2 > 0.0) {
        return Err(Error::ParameterDomain(
            "torus side lengths must be positive".into(),
        ));
    }
    let (s1, s2) = (2.0 * PI / l1, 2.0 * PI / l2);
    let k1_max = (mu_max.max(0.0).sqrt() / s1).floor() as i64;
    let k2_max = (mu_max.max(0.0).sqrt() / s2).floor() as i64;
    let mut values = Vec::new();
    for k1 in -k1_max..=k1_max {
        for k2 in -k2_max..=k2_max {
            let mu = (s1 * k1 as f64).powi(2) + (s2 * k2 as f64).powi(2);
            if mu <= mu_max {
                values.push(mu);
            }
        }
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut entries: Vec<CrossEntry> = Vec::new();
    for mu in values {
        match entries.last_mut() {
            Some(last) if (mu - last.mu).abs() <= 1e-12 * mu.max(1.0) => last.multiplicity += 1,
            _ => entries.push(CrossEntry { mu, multiplicity: 1 }),
        }
    }
    let mut s = CrossSpectrum::new(entries, l1 * l2, format!("torus:{}x{}", fmt_f64(l1), fmt_f64(l2)))?;
    s.dimension = Some(2);
    s.uniform_density = true;
    Ok(s)
}
