//! Experiment configuration: a versioned JSON schema naming a distribution
//! family, a weight family, an optional threshold with a below-threshold
//! model, and run sizes. Building a config resolves every name through the
//! built-in registries, so the same file drives the CLI, the verification
//! battery and library callers identically.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::boundary::{DeclaredTailLimits, ThresholdSeq};
use crate::coupling::{BelowModel, ThresholdScheme, VeeGen, WarpFamily};
use crate::dist::{DistributionRegistry, DynDist};
use crate::weights::{AlphaSeq, WeightRegistry};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Json(String),
    #[error("config field `{field}`: {message}")]
    Field { field: String, message: String },
}

fn field_err(field: &str, message: impl ToString) -> ConfigError {
    ConfigError::Field { field: field.into(), message: message.to_string() }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdSpec {
    #[default]
    None,
    Flat {
        level: f64,
    },
    /// level_n = a ln n + b. Analytic tail limits are attached when the
    /// base distribution is exponential (where this is exactly a power
    /// tail); otherwise the limits stay undeclared.
    LogLevels {
        a: f64,
        #[serde(default)]
        b: f64,
    },
    /// q_n = coeff * n^{-exponent}.
    TailPower {
        coeff: f64,
        exponent: f64,
    },
    /// q_n = coeff * lnln(n)/n (constant head below n = 16).
    TailLoglog {
        coeff: f64,
    },
    Table {
        levels: Vec<f64>,
        #[serde(default)]
        declared: DeclaredTailLimits,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VeeSpec {
    AtThreshold,
    Offset { offset: f64 },
    IidUniform { width: f64 },
    Markov { rho: f64, width: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BelowSpec {
    Vee {
        v: VeeSpec,
    },
    TailExact {
        spread: f64,
    },
    Perturbed {
        width0: f64,
        decay: f64,
        #[serde(default = "default_base_u")]
        base_u: f64,
    },
}

fn default_base_u() -> f64 {
    0.5
}

impl Default for BelowSpec {
    fn default() -> Self {
        BelowSpec::Vee { v: VeeSpec::AtThreshold }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub version: u32,
    pub distribution: FamilySpec,
    pub alpha: FamilySpec,
    #[serde(default)]
    pub threshold: ThresholdSpec,
    #[serde(default)]
    pub below: BelowSpec,
    pub horizon: usize,
    pub replications: u64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(field_err(
                "version",
                format!("expected {CONFIG_VERSION}, got {}", cfg.version),
            ));
        }
        if cfg.horizon == 0 {
            return Err(field_err("horizon", "must be at least 1"));
        }
        if cfg.replications == 0 {
            return Err(field_err("replications", "must be at least 1"));
        }
        Ok(cfg)
    }
}

/// A config resolved against the registries, ready to run.
pub struct BuiltExperiment {
    pub config: ExperimentConfig,
    pub dist: DynDist,
    pub alpha: Arc<AlphaSeq>,
    pub scheme: ThresholdScheme,
}

impl BuiltExperiment {
    pub fn threshold(&self) -> Option<&ThresholdSeq> {
        self.scheme.threshold.as_ref().map(|(t, _)| t)
    }
}

pub fn build(cfg: &ExperimentConfig) -> Result<BuiltExperiment, ConfigError> {
    let dists = DistributionRegistry::builtin();
    let weights = WeightRegistry::builtin();
    let dist = dists
        .build(&cfg.distribution.family, &cfg.distribution.params)
        .map_err(|e| field_err("distribution", e))?;
    // Criteria sums look one index past the horizon.
    let alpha = weights
        .build(&cfg.alpha.family, &cfg.alpha.params, cfg.horizon + 1)
        .map_err(|e| field_err("alpha", e))?;

    let thr = match &cfg.threshold {
        ThresholdSpec::None => None,
        ThresholdSpec::Flat { level } => Some(
            ThresholdSeq::flat(dist.as_ref(), *level, &alpha, cfg.horizon)
                .map_err(|e| field_err("threshold", e))?,
        ),
        ThresholdSpec::LogLevels { a, b } => {
            if cfg.distribution.family == "exponential" {
                let rate = cfg
                    .distribution
                    .params
                    .get("rate")
                    .and_then(|v| v.as_f64())
                    .unwrap_or(1.0);
                let coeff = (-rate * b).exp();
                if coeff > 1.0 {
                    return Err(field_err(
                        "threshold.b",
                        "must be >= 0 so the tail coefficient stays within (0, 1]",
                    ));
                }
                Some(
                    ThresholdSeq::tail_power(dist.as_ref(), coeff, rate * a, &alpha, cfg.horizon)
                        .map_err(|e| field_err("threshold", e))?,
                )
            } else {
                // No analytic translation: materialize levels, undeclared.
                let levels = (1..=cfg.horizon).map(|n| a * (n as f64).ln() + b).collect();
                Some(
                    ThresholdSeq::from_levels(dist.as_ref(), levels, DeclaredTailLimits::default())
                        .map_err(|e| field_err("threshold", e))?,
                )
            }
        }
        ThresholdSpec::TailPower { coeff, exponent } => Some(
            ThresholdSeq::tail_power(dist.as_ref(), *coeff, *exponent, &alpha, cfg.horizon)
                .map_err(|e| field_err("threshold", e))?,
        ),
        ThresholdSpec::TailLoglog { coeff } => Some(
            ThresholdSeq::tail_loglog(dist.as_ref(), *coeff, &alpha, cfg.horizon)
                .map_err(|e| field_err("threshold", e))?,
        ),
        ThresholdSpec::Table { levels, declared } => {
            if levels.len() < cfg.horizon {
                return Err(field_err(
                    "threshold.levels",
                    format!("need {} levels for the horizon, got {}", cfg.horizon, levels.len()),
                ));
            }
            Some(
                ThresholdSeq::from_levels(dist.as_ref(), levels.clone(), *declared)
                    .map_err(|e| field_err("threshold", e))?,
            )
        }
    };

    let scheme = match thr {
        None => ThresholdScheme::pure(dist.clone(), alpha.clone()),
        Some(thr) => {
            let below = match &cfg.below {
                BelowSpec::Vee { v } => BelowModel::Vee {
                    v: match v {
                        VeeSpec::AtThreshold => VeeGen::AtThreshold,
                        VeeSpec::Offset { offset } => {
                            if *offset < 0.0 {
                                return Err(field_err("below.offset", "must be >= 0"));
                            }
                            VeeGen::Offset { offset: *offset }
                        }
                        VeeSpec::IidUniform { width } => {
                            if *width <= 0.0 {
                                return Err(field_err("below.width", "must be > 0"));
                            }
                            VeeGen::IidUniform { width: *width }
                        }
                        VeeSpec::Markov { rho, width } => {
                            if !(0.0..1.0).contains(rho) {
                                return Err(field_err("below.rho", "must lie in [0, 1)"));
                            }
                            VeeGen::Markov { rho: *rho, width: *width }
                        }
                    },
                },
                BelowSpec::TailExact { spread } => {
                    if *spread <= 0.0 {
                        return Err(field_err("below.spread", "must be > 0"));
                    }
                    BelowModel::TailExact { spread: *spread }
                }
                BelowSpec::Perturbed { width0, decay, base_u } => {
                    if !(*decay > 0.0 && *decay < 1.0) {
                        return Err(field_err("below.decay", "must lie in (0, 1)"));
                    }
                    if !(*base_u > 0.0 && *base_u < 1.0) {
                        return Err(field_err("below.base_u", "must lie in (0, 1)"));
                    }
                    BelowModel::Perturbed {
                        warp: WarpFamily { width0: *width0, decay: *decay, base_u: *base_u },
                    }
                }
            };
            ThresholdScheme::with_threshold(dist.clone(), alpha.clone(), thr, below)
        }
    };

    Ok(BuiltExperiment { config: cfg.clone(), dist, alpha, scheme })
}
