//! Flat JSON run configuration and the small parsers behind the string
//! flags. Precedence is flag > file key > built-in default.

use std::fs;
use std::path::{Path, PathBuf};

use ncqr_core::basis::BasisSpec;
use ncqr_core::gp_adjust::{AdjustmentMode, GpConfig};
use ncqr_core::sampler::SamplerConfig;
use ncqr_core::QuantileLevelGrid;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

pub const DEFAULT_GRID: &str = "0.05:0.01:0.95";
pub const DEFAULT_CROSSING_TOL: f64 = 1e-10;

/// Every key a config file may carry. Unknown keys are rejected so a typo
/// fails loudly instead of silently running with defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub total_iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub beta_prior_sd: Option<f64>,
    pub sigma_prior_shape: Option<f64>,
    pub sigma_prior_rate: Option<f64>,
    pub seed: Option<u64>,
    pub grid: Option<String>,
    pub basis: Option<String>,
    pub mode: Option<String>,
    pub sigma_k_sq: Option<f64>,
    pub jitter: Option<f64>,
    pub fixed_b: Option<f64>,
    pub response: Option<String>,
    pub out: Option<String>,
    pub design: Option<u32>,
    pub replicates: Option<usize>,
    pub n: Option<usize>,
    pub crossing_tol: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))
    }
}

/// "start:step:stop" (inclusive arithmetic grid) or a comma list of levels.
pub fn parse_grid(text: &str) -> CliResult<QuantileLevelGrid> {
    let bad = |detail: String| CliError::Config(format!("bad grid \"{text}\": {detail}"));
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("\"{}\" is not a number", s.trim())))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:step:stop".into()));
        }
        let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        return QuantileLevelGrid::from_range(start, stop, step).map_err(CliError::from);
    }
    let levels = text.split(',').map(num).collect::<CliResult<Vec<f64>>>()?;
    QuantileLevelGrid::new(levels).map_err(CliError::from)
}

/// "linear", "poly:D", or "spline:K".
pub fn parse_basis(text: &str) -> CliResult<BasisSpec> {
    let bad = || {
        CliError::Config(format!(
            "bad basis \"{text}\": expected linear, poly:D, or spline:K"
        ))
    };
    let spec = match text.split_once(':') {
        None if text == "linear" => BasisSpec::linear(),
        Some(("poly", d)) => BasisSpec::polynomial(d.parse().map_err(|_| bad())?),
        Some(("spline", k)) => BasisSpec::cubic_spline(k.parse().map_err(|_| bad())?),
        _ => return Err(bad()),
    };
    spec.validate().map_err(CliError::from)?;
    Ok(spec)
}

pub fn parse_mode(text: &str) -> CliResult<AdjustmentMode> {
    match text {
        "gpr" => Ok(AdjustmentMode::Gpr),
        "lgpr" => Ok(AdjustmentMode::Lgpr),
        other => Err(CliError::Config(format!(
            "bad mode \"{other}\": expected gpr or lgpr"
        ))),
    }
}

pub fn mode_name(mode: AdjustmentMode) -> &'static str {
    match mode {
        AdjustmentMode::Gpr => "gpr",
        AdjustmentMode::Lgpr => "lgpr",
    }
}

/// Sampler settings: file keys over defaults, then the seed flag on top.
pub fn sampler_config(file: &FileConfig, seed_flag: Option<u64>) -> SamplerConfig {
    let d = SamplerConfig::default();
    SamplerConfig {
        total_iterations: file.total_iterations.unwrap_or(d.total_iterations),
        burn_in: file.burn_in.unwrap_or(d.burn_in),
        thin: file.thin.unwrap_or(d.thin),
        beta_prior_sd: file.beta_prior_sd.unwrap_or(d.beta_prior_sd),
        sigma_prior_shape: file.sigma_prior_shape.unwrap_or(d.sigma_prior_shape),
        sigma_prior_rate: file.sigma_prior_rate.unwrap_or(d.sigma_prior_rate),
        seed: seed_flag.or(file.seed).unwrap_or(d.seed),
    }
}

/// GP settings with a placeholder bandwidth; the caller either searches or
/// substitutes a fixed value.
pub fn gp_template(file: &FileConfig, mode_flag: Option<&str>) -> CliResult<GpConfig> {
    let mode = match mode_flag.or(file.mode.as_deref()) {
        Some(text) => parse_mode(text)?,
        None => AdjustmentMode::Gpr,
    };
    let mut cfg = GpConfig::new(1.0, mode);
    if let Some(s) = file.sigma_k_sq {
        cfg.sigma_k_sq = s;
    }
    if let Some(j) = file.jitter {
        cfg.jitter = j;
    }
    Ok(cfg)
}

pub fn resolve_grid(flag: Option<&str>, file: &FileConfig) -> CliResult<QuantileLevelGrid> {
    parse_grid(flag.or(file.grid.as_deref()).unwrap_or(DEFAULT_GRID))
}

pub fn resolve_basis(flag: Option<&str>, file: &FileConfig) -> CliResult<BasisSpec> {
    parse_basis(flag.or(file.basis.as_deref()).unwrap_or("linear"))
}

pub fn resolve_out(flag: Option<&PathBuf>, file: &FileConfig) -> CliResult<PathBuf> {
    flag.cloned()
        .or_else(|| file.out.as_ref().map(PathBuf::from))
        .ok_or_else(|| {
            CliError::Config("no output directory: pass --out or set \"out\" in the config".into())
        })
}
