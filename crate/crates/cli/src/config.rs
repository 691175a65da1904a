//! Optional TOML configuration. Precedence everywhere is
//! command-line flag > config file > built-in default.

use std::path::Path;

use serde::Deserialize;

use nst_core::diffusion::{Conductance, DiffusionSettings, Kappa};
use nst_core::report::ReportConfig;
use nst_core::{Error, Result};

/// Accepts `kappa = "auto"` or a number.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum KappaField {
    Num(f64),
    Str(String),
}

impl KappaField {
    pub fn resolve(&self) -> Result<Kappa> {
        match self {
            KappaField::Num(v) => Ok(Kappa::Fixed(*v)),
            KappaField::Str(s) if s == "auto" => Ok(Kappa::Auto),
            KappaField::Str(s) => s
                .parse::<f64>()
                .map(Kappa::Fixed)
                .map_err(|_| Error::InvalidParameter(format!("kappa must be a number or 'auto', got '{s}'"))),
        }
    }
}

/// Documented key set of the config file; every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub iters: Option<usize>,
    pub kappa: Option<KappaField>,
    pub dt: Option<f64>,
    pub cond: Option<String>,
    pub alpha: Option<f64>,
    pub lilliefors: Option<bool>,
    pub bins: Option<usize>,
    pub levels: Option<usize>,
    pub patch: Option<usize>,
    pub patch_levels: Option<usize>,
    pub glcm_levels: Option<usize>,
    pub d_max: Option<i32>,
    pub workers: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                toml::from_str(&text)
                    .map_err(|e| Error::InvalidParameter(format!("config {}: {e}", p.display())))
            }
        }
    }
}

pub fn parse_conductance(s: &str) -> Result<Conductance> {
    match s {
        "exp" => Ok(Conductance::Exponential),
        "rat" => Ok(Conductance::Rational),
        other => Err(Error::InvalidParameter(format!(
            "conductance must be 'exp' or 'rat', got '{other}'"
        ))),
    }
}

/// Diffusion settings from flags over config over defaults.
pub fn merge_diffusion(
    file: &FileConfig,
    iters: Option<usize>,
    kappa: Option<&str>,
    dt: Option<f64>,
    cond: Option<&str>,
) -> Result<DiffusionSettings> {
    let defaults = DiffusionSettings::default();
    let kappa = match kappa {
        Some(s) => KappaField::Str(s.to_string()).resolve()?,
        None => match &file.kappa {
            Some(k) => k.resolve()?,
            None => defaults.kappa,
        },
    };
    let conductance = match cond {
        Some(s) => parse_conductance(s)?,
        None => match &file.cond {
            Some(s) => parse_conductance(s)?,
            None => defaults.conductance,
        },
    };
    Ok(DiffusionSettings {
        iterations: iters.or(file.iters).unwrap_or(defaults.iterations),
        kappa,
        dt: dt.or(file.dt).unwrap_or(defaults.dt),
        conductance,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn merge_report(
    file: &FileConfig,
    diffusion: DiffusionSettings,
    alpha: Option<f64>,
    lilliefors: bool,
    bins: Option<usize>,
    levels: Option<usize>,
    patch: Option<usize>,
    patch_levels: Option<usize>,
    glcm_levels: Option<usize>,
) -> ReportConfig {
    let d = ReportConfig::default();
    ReportConfig {
        diffusion,
        alpha: alpha.or(file.alpha).unwrap_or(d.alpha),
        lilliefors: lilliefors || file.lilliefors.unwrap_or(false),
        bins: bins.or(file.bins).unwrap_or(d.bins),
        scale_levels: levels.or(file.levels).unwrap_or(d.scale_levels),
        patch: patch.or(file.patch).unwrap_or(d.patch),
        patch_levels: patch_levels.or(file.patch_levels).unwrap_or(d.patch_levels),
        glcm_levels: glcm_levels.or(file.glcm_levels).unwrap_or(d.glcm_levels),
        glcm_distances: d.glcm_distances,
    }
}
