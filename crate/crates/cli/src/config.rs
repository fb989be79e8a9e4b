//! Run configuration: one TOML document per run, schema-validated before
//! anything executes. All seeds are explicit — there are no wall-clock
//! defaults anywhere, so a config pins its outputs byte for byte.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use qrf_core::fields::{CoefFamily, FieldModel, VolterraFamily};
use qrf_core::innovations::InnovationSpec;
use qrf_core::lattice::{MultiIndex, Rect};
use qrf_core::quenched::{QuenchedConfig, SummationMode};
use qrf_core::sums::TGrid;

use crate::CliError;

fn default_mode() -> String {
    "rectangular".into()
}

fn default_grid_levels() -> Vec<f64> {
    vec![0.25, 0.5, 0.75, 1.0]
}

fn default_alpha() -> f64 {
    0.01
}

fn default_fdd_tolerance() -> f64 {
    0.10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    #[serde(default = "default_mode")]
    pub mode: String,
    pub trials: usize,
    pub omega_seeds: Vec<u64>,
    pub master_salt: u64,
    #[serde(default)]
    pub n_list: Vec<Vec<i64>>,
    #[serde(default = "default_grid_levels")]
    pub grid_levels: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_fdd_tolerance")]
    pub fdd_tolerance: f64,
    pub innovation: InnovationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rosenthal: Option<RosenthalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negligibility: Option<NegligibilityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orlicz: Option<OrliczConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnovationConfig {
    /// gaussian | rademacher | laplace | uniform | heavy_tail
    pub dist: String,
    /// sigma, scale, half-width or tail exponent, depending on `dist`.
    #[serde(default)]
    pub param: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    /// linear | volterra | iid_diff
    pub model: String,
    /// delta | geometric | polynomial | explicit
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub ratio: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub radius: Option<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<LinearEntryConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub volterra_entries: Vec<VolterraEntryConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearEntryConfig {
    pub index: Vec<i64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolterraEntryConfig {
    pub u: Vec<i64>,
    pub v: Vec<i64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionsConfig {
    #[serde(default)]
    pub which: Vec<String>,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
}

fn default_levels() -> usize {
    5
}

fn default_mc_samples() -> usize {
    2000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RosenthalConfig {
    /// iid | axis_product
    #[serde(default = "default_diff")]
    pub diff: String,
    #[serde(default)]
    pub d_list: Vec<usize>,
    pub n_list: Vec<Vec<i64>>,
    #[serde(default)]
    pub trials: Option<usize>,
}

fn default_diff() -> String {
    "iid".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NegligibilityConfig {
    #[serde(default)]
    pub axes: Vec<usize>,
    pub n: Vec<i64>,
    #[serde(default = "default_neg_trials")]
    pub trials: usize,
}

fn default_neg_trials() -> usize {
    200
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrliczConfig {
    #[serde(default)]
    pub d_list: Vec<usize>,
    #[serde(default = "default_orlicz_samples")]
    pub samples: usize,
}

fn default_orlicz_samples() -> usize {
    10_000
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(1..=4).contains(&self.dimension) {
            return Err(CliError::Config(format!(
                "dimension must be in 1..=4, got {}",
                self.dimension
            )));
        }
        if !matches!(self.mode.as_str(), "cubic" | "rectangular") {
            return Err(CliError::Config(format!(
                "mode must be 'cubic' or 'rectangular', got '{}'",
                self.mode
            )));
        }
        for n in &self.n_list {
            if n.len() != self.dimension {
                return Err(CliError::Config(format!(
                    "region {n:?} does not match dimension {}",
                    self.dimension
                )));
            }
        }
        if self.grid_levels.is_empty()
            || self
                .grid_levels
                .iter()
                .any(|&t| !(0.0..=1.0).contains(&t) || !t.is_finite())
        {
            return Err(CliError::Config(
                "grid_levels must be a nonempty subset of [0, 1]".into(),
            ));
        }
        self.innovation_spec()?;
        if self.field.is_some() {
            self.field_model()?;
        }
        Ok(())
    }

    /// Apply a `key=value` override from the command line.
    pub fn apply_override(&mut self, kv: &str) -> Result<(), CliError> {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override '{kv}' is not of the form K=V")))?;
        match key {
            "master_salt" => {
                self.master_salt = value
                    .parse()
                    .map_err(|e| CliError::Config(format!("master_salt: {e}")))?;
            }
            "omega_seeds" => {
                self.omega_seeds = value
                    .split(',')
                    .map(|s| s.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::Config(format!("omega_seeds: {e}")))?;
            }
            "trials" => {
                self.trials = value
                    .parse()
                    .map_err(|e| CliError::Config(format!("trials: {e}")))?;
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown override key '{other}' (expected master_salt, omega_seeds or trials)"
                )))
            }
        }
        Ok(())
    }

    pub fn innovation_spec(&self) -> Result<InnovationSpec<f64>, CliError> {
        let param = self.innovation.param.unwrap_or(1.0);
        let bad = |e: qrf_core::Error| CliError::Config(e.to_string());
        Ok(match self.innovation.dist.as_str() {
            "gaussian" => InnovationSpec::new(qrf_core::innovations::Distribution::Gaussian {
                sigma: param,
            })
            .map_err(bad)?,
            "rademacher" => InnovationSpec::rademacher(),
            "laplace" => {
                InnovationSpec::new(qrf_core::innovations::Distribution::Laplace { b: param })
                    .map_err(bad)?
            }
            "uniform" => InnovationSpec::new(
                qrf_core::innovations::Distribution::UniformCentered { a: param },
            )
            .map_err(bad)?,
            "heavy_tail" => InnovationSpec::new(
                qrf_core::innovations::Distribution::HeavyTailDiagnostic { kappa: param },
            )
            .map_err(bad)?,
            other => {
                return Err(CliError::Config(format!(
                    "unknown innovation distribution '{other}'"
                )))
            }
        })
    }

    pub fn field_model(&self) -> Result<FieldModel<f64>, CliError> {
        let field = self
            .field
            .as_ref()
            .ok_or_else(|| CliError::Config("this subcommand needs a [field] section".into()))?;
        let dim = self.dimension;
        let radius = field.radius.unwrap_or(1);
        let bad = |e: qrf_core::Error| CliError::Config(e.to_string());
        match field.model.as_str() {
            "iid_diff" => Ok(FieldModel::iid_diff(dim)),
            "linear" => {
                let family = match field.family.as_deref() {
                    Some("delta") | None => CoefFamily::Delta,
                    Some("geometric") => CoefFamily::Geometric {
                        ratio: field.ratio.ok_or_else(|| {
                            CliError::Config("geometric family needs 'ratio'".into())
                        })?,
                    },
                    Some("polynomial") => CoefFamily::PolynomialDecay {
                        alpha: field.alpha.ok_or_else(|| {
                            CliError::Config("polynomial family needs 'alpha'".into())
                        })?,
                    },
                    Some("explicit") => CoefFamily::Explicit(
                        field
                            .entries
                            .iter()
                            .map(|e| (e.index.clone(), e.value))
                            .collect(),
                    ),
                    Some(other) => {
                        return Err(CliError::Config(format!(
                            "unknown linear family '{other}'"
                        )))
                    }
                };
                FieldModel::linear(dim, radius, &family).map_err(bad)
            }
            "volterra" => {
                let family = match field.family.as_deref() {
                    Some("geometric") => VolterraFamily::Geometric {
                        ratio: field.ratio.ok_or_else(|| {
                            CliError::Config("geometric family needs 'ratio'".into())
                        })?,
                    },
                    Some("explicit") | None => VolterraFamily::Explicit(
                        field
                            .volterra_entries
                            .iter()
                            .map(|e| (e.u.clone(), e.v.clone(), e.value))
                            .collect(),
                    ),
                    Some(other) => {
                        return Err(CliError::Config(format!(
                            "unknown volterra family '{other}'"
                        )))
                    }
                };
                FieldModel::volterra(dim, radius, &family).map_err(bad)
            }
            other => Err(CliError::Config(format!("unknown field model '{other}'"))),
        }
    }

    pub fn rect_list(&self) -> Result<Vec<Rect>, CliError> {
        if self.n_list.is_empty() {
            return Err(CliError::Config("n_list must not be empty".into()));
        }
        self.n_list
            .iter()
            .map(|n| {
                Rect::new(MultiIndex::new(n)).map_err(|e| CliError::Config(e.to_string()))
            })
            .collect()
    }

    pub fn grid(&self) -> Result<Arc<TGrid<f64>>, CliError> {
        TGrid::cartesian(self.dimension, &self.grid_levels)
            .map(Arc::new)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn summation_mode(&self) -> SummationMode {
        if self.mode == "cubic" {
            SummationMode::Cubic
        } else {
            SummationMode::Rectangular
        }
    }

    pub fn quenched_config(&self) -> Result<QuenchedConfig<f64>, CliError> {
        let cfg = QuenchedConfig {
            model: self.field_model()?,
            spec: self.innovation_spec()?,
            mode: self.summation_mode(),
            n_list: self.rect_list()?,
            grid: self.grid()?,
            trials: self.trials,
            omega_seeds: self.omega_seeds.clone(),
            master_salt: self.master_salt,
            alpha: self.alpha,
        };
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}
