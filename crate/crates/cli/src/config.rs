//! JSON configuration schemas. Unknown keys are rejected everywhere.

use serde::Deserialize;
use wfi_core::measure::{
    build_base_measure, build_measure, Family, GridSpec, Measure1D, Potential, Spacing,
};
use wfi_core::rate::{ConstantsPolicy, RateFunction};
use wfi_core::semigroup::Scheme;
use wfi_core::verify::FamilyKind;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub xmin: f64,
    pub xmax: f64,
    pub n: usize,
    #[serde(default)]
    pub spacing: Option<String>,
}

impl GridConfig {
    pub fn to_spec(&self) -> Result<GridSpec, CliError> {
        let spacing = match self.spacing.as_deref() {
            None | Some("auto") => Spacing::Auto,
            Some("uniform") => Spacing::Uniform,
            Some("asinh") => Spacing::Asinh,
            Some(other) => {
                return Err(CliError::Config(format!(
                    "unknown spacing {other:?} (use uniform|asinh|auto)"
                )))
            }
        };
        Ok(GridSpec {
            x_min: self.xmin,
            x_max: self.xmax,
            n: self.n,
            spacing,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    pub family: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub smoothed: bool,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    /// CSV path with header "x,phi" for custom potentials.
    #[serde(default)]
    pub csv: Option<String>,
    /// Build as an unnormalized base measure (e.g. Lebesgue via "flat").
    #[serde(default)]
    pub base: bool,
}

fn default_scale() -> f64 {
    1.0
}

impl MeasureConfig {
    pub fn potential(&self) -> Result<Potential, CliError> {
        let family = match self.family.as_str() {
            "heavy_tail" => Family::HeavyTail {
                alpha: self.alpha.ok_or_else(|| miss("heavy_tail", "alpha"))?,
            },
            "subexp" => Family::Subexp {
                alpha: self.alpha.ok_or_else(|| miss("subexp", "alpha"))?,
            },
            "double_exp" => Family::DoubleExp,
            "gaussian" => Family::Gaussian,
            "flat" => Family::Flat,
            "custom" => {
                let path = self
                    .csv
                    .as_ref()
                    .ok_or_else(|| miss("custom", "csv"))?;
                let (xs, phis) = read_potential_csv(path)?;
                Family::Custom { xs, phis }
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown family {other:?} (use heavy_tail|subexp|double_exp|gaussian|flat|custom)"
                )))
            }
        };
        let mut p = if self.smoothed {
            Potential::smoothed(family)
        } else {
            Potential::new(family)
        };
        p = p.with_scale(self.scale);
        Ok(p)
    }

    pub fn build(&self) -> Result<Measure1D, CliError> {
        let pot = self.potential()?;
        let spec = match &self.grid {
            Some(g) => g.to_spec()?,
            None => {
                let trunc = pot.default_truncation().ok_or_else(|| {
                    CliError::Config(
                        "no default truncation for this potential; give an explicit grid".into(),
                    )
                })?;
                GridSpec::new(-trunc, trunc, 4096)
            }
        };
        let mu = if self.base {
            build_base_measure(pot, &spec)?
        } else {
            build_measure(pot, &spec)?
        };
        Ok(mu)
    }
}

fn miss(family: &str, key: &str) -> CliError {
    CliError::Config(format!("family {family:?} requires key {key:?}"))
}

fn read_potential_csv(path: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
    let mut xs = Vec::new();
    let mut phis = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if ln == 0 && line.starts_with("x,") {
            continue; // header "x,phi"
        }
        let mut parts = line.split(',');
        let x: f64 = parse_field(parts.next(), path, ln)?;
        let phi: f64 = parse_field(parts.next(), path, ln)?;
        xs.push(x);
        phis.push(phi);
    }
    if xs.len() < 2 {
        return Err(CliError::Config(format!("{path}: need at least 2 rows")));
    }
    Ok((xs, phis))
}

fn parse_field(field: Option<&str>, path: &str, line: usize) -> Result<f64, CliError> {
    field
        .ok_or_else(|| CliError::Config(format!("{path}:{}: missing column", line + 1)))?
        .trim()
        .parse()
        .map_err(|e| CliError::Config(format!("{path}:{}: {e}", line + 1)))
}

/// Rate function specification.
#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateConfig {
    Const {
        value: f64,
    },
    PowerLog {
        coeff: f64,
        power: f64,
        log_exp: f64,
    },
    /// CSV with header "s,beta".
    Table {
        path: String,
    },
    /// beta_from_capacity of a measure, optionally rescaled by the Hardy
    /// upper bound ("certified").
    FromCapacity {
        measure: MeasureConfig,
        #[serde(default = "default_per_side")]
        per_side: usize,
        #[serde(default = "default_mass_lo")]
        mass_lo: f64,
        #[serde(default)]
        certify: bool,
    },
}

pub fn default_per_side() -> usize {
    400
}

pub fn default_mass_lo() -> f64 {
    1e-9
}

impl RateConfig {
    pub fn build(&self) -> Result<RateFunction, CliError> {
        match self {
            RateConfig::Const { value } => Ok(RateFunction::constant(*value)),
            RateConfig::PowerLog {
                coeff,
                power,
                log_exp,
            } => Ok(RateFunction::power_log(*coeff, *power, *log_exp)),
            RateConfig::Table { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
                let mut pairs = Vec::new();
                for (ln, line) in text.lines().enumerate() {
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('#') || line.starts_with("s,") {
                        continue;
                    }
                    let mut parts = line.split(',');
                    let s: f64 = parse_field(parts.next(), path, ln)?;
                    let b: f64 = parse_field(parts.next(), path, ln)?;
                    pairs.push((s, b));
                }
                Ok(RateFunction::from_table(pairs)?)
            }
            RateConfig::FromCapacity {
                measure,
                per_side,
                mass_lo,
                certify,
            } => {
                let mu = measure.build()?;
                let grid = wfi_core::capacity::default_tail_grid(&mu, *per_side, *mass_lo)?;
                let beta = wfi_core::capacity::beta_from_capacity(&mu, &grid)?;
                if *certify {
                    let hb = wfi_core::hardy::hardy_bounds(&mu, &beta, &grid)?;
                    Ok(beta.scaled(hb.upper()))
                } else {
                    Ok(beta)
                }
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "default_per_side")]
    pub per_side: usize,
    #[serde(default = "default_mass_lo")]
    pub mass_lo: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            per_side: default_per_side(),
            mass_lo: default_mass_lo(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureCmdConfig {
    pub measure: MeasureConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityCmdConfig {
    pub measure: MeasureConfig,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
    /// Rate to test against the necessary condition (optional; defaults to
    /// the certified capacity rate).
    #[serde(default)]
    pub beta: Option<RateConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaCmdConfig {
    pub measure: MeasureConfig,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvertCmdConfig {
    pub kind: String,
    pub rate: RateConfig,
    pub target: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub osc_v: Option<f64>,
    /// Sample range for the exported rate CSV.
    #[serde(default)]
    pub export: Option<ExportRange>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportRange {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyCmdConfig {
    pub measure: MeasureConfig,
    pub beta: RateConfig,
    #[serde(default)]
    pub beta_scale: Option<f64>,
    pub family: FamilyKind,
    pub s_grid: ExportRange,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Dirac {
        x: f64,
        #[serde(default)]
        width: Option<f64>,
    },
    /// Two-level density: `high` on the right of the split mass, `low` left.
    TwoLevel {
        low: f64,
        high: f64,
        #[serde(default = "default_split")]
        split_mass: f64,
    },
    /// Density given as e^{-λ|x|}-type tilt of Lebesgue, normalized against μ.
    ExpLaw {
        lambda: f64,
    },
}

fn default_split() -> f64 {
    0.5
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateCmdConfig {
    pub measure: MeasureConfig,
    pub initial: InitialConfig,
    pub t_end: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub scheme: Option<Scheme>,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    /// Overlay the ξ-curve built from this rate (certified scale included).
    #[serde(default)]
    pub xi_beta: Option<RateConfig>,
    #[serde(default = "default_eps")]
    pub xi_eps: f64,
    /// Monte Carlo companion run.
    #[serde(default)]
    pub mc_paths: Option<usize>,
}

fn default_samples() -> usize {
    120
}

fn default_eps() -> f64 {
    0.1
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveConfig {
    Xi {
        beta: RateConfig,
        eps: f64,
    },
    LoDecay {
        alpha: f64,
        eps: f64,
        #[serde(default)]
        t_offset: f64,
    },
    Iterated {
        beta: RateConfig,
        eps: f64,
        k: u32,
        iter_eps: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsCmdConfig {
    pub curves: Vec<CurveConfig>,
    pub t_grid: ExportRange,
}

/// Optional constants-policy file.
pub fn load_policy(path: Option<&std::path::Path>) -> Result<ConstantsPolicy, CliError> {
    match path {
        None => Ok(ConstantsPolicy::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}
