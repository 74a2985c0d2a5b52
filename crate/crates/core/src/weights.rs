//! Positive weight sequences `alpha_n` and their exact partial sums `s_n`.
//!
//! Everything downstream (record probabilities, growth criteria, joint
//! laws) is driven by `alpha_n / s_n` and `h^{s_n}`-type quantities, so the
//! partial sums are accumulated with compensated summation and each family
//! carries its analytic asymptotics: whether `s_n -> inf` (condition used
//! throughout), the limit of `p_n = alpha_n / s_n` and whether the record
//! count variance stays bounded.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::Value;
use thiserror::Error;

use crate::numeric::Kahan;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("unknown weight family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameters for `{family}`: {message}")]
    InvalidParams { family: String, message: String },
    #[error("weights must be positive, got {0} at n = {1}")]
    NonPositive(f64, usize),
}

/// Limit of a real sequence, where known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitValue {
    Zero,
    One,
    Const(f64),
    Infinite,
    Unknown,
}

/// Analytic facts about a weight family.
#[derive(Debug, Clone, Copy)]
pub struct AlphaAsymptotics {
    /// Does `s_n -> inf`? `None` for tables without declared limits.
    pub sums_diverge: Option<bool>,
    /// Limit of the record probabilities `p_n = alpha_n / s_n`.
    pub p_limit: LimitValue,
    /// Is `lim V_n = sum p_k (1 - p_k)` finite? `None` when undeclared.
    pub v_finite: Option<bool>,
}

/// Limits a user table may declare in the experiment config.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize, Default)]
pub struct DeclaredAlphaLimits {
    pub sums_diverge: Option<bool>,
    pub p_limit: Option<f64>,
    pub v_finite: Option<bool>,
}

/// Weight family descriptor, carrying the parameters the analytic
/// asymptotics are derived from.
#[derive(Debug, Clone)]
pub enum AlphaFamily {
    Constant { value: f64 },
    Geometric { ratio: f64 },
    Polynomial { theta: f64 },
    /// alpha_n = (n!)^2. Sums diverge while `sum (1 - p_n) < inf`, so the
    /// record count has bounded variance: the one built-in exercising the
    /// convergent branch of the count asymptotics.
    FactorialSquared,
    Table { declared: DeclaredAlphaLimits },
}

use AlphaFamily as Family;

/// A weight sequence materialized up to a horizon, immutable afterwards.
#[derive(Debug, Clone)]
pub struct AlphaSeq {
    family: Family,
    family_name: &'static str,
    terms: Vec<f64>,
    sums: Vec<f64>,
}

impl AlphaSeq {
    fn from_terms(
        family: Family,
        family_name: &'static str,
        terms: Vec<f64>,
    ) -> Result<Self, WeightError> {
        let mut sums = Vec::with_capacity(terms.len() + 1);
        sums.push(0.0);
        let mut acc = Kahan::new();
        for (i, &a) in terms.iter().enumerate() {
            if !(a > 0.0) {
                return Err(WeightError::NonPositive(a, i + 1));
            }
            acc.add(a);
            sums.push(acc.value());
        }
        Ok(AlphaSeq { family, family_name, terms, sums })
    }

    pub fn constant(value: f64, n_max: usize) -> Result<Self, WeightError> {
        Self::from_terms(
            Family::Constant { value },
            "constant",
            vec![value; n_max],
        )
    }

    pub fn geometric(ratio: f64, n_max: usize) -> Result<Self, WeightError> {
        if !(ratio > 0.0) {
            return Err(WeightError::InvalidParams {
                family: "geometric".into(),
                message: format!("need ratio > 0, got {ratio}"),
            });
        }
        let mut terms = Vec::with_capacity(n_max);
        let mut a = ratio;
        for _ in 0..n_max {
            terms.push(a);
            a *= ratio;
        }
        Self::from_terms(Family::Geometric { ratio }, "geometric", terms)
    }

    pub fn polynomial(theta: f64, n_max: usize) -> Result<Self, WeightError> {
        let terms = (1..=n_max).map(|n| (n as f64).powf(theta)).collect();
        Self::from_terms(Family::Polynomial { theta }, "polynomial", terms)
    }

    pub fn factorial_squared(n_max: usize) -> Result<Self, WeightError> {
        let mut terms = Vec::with_capacity(n_max);
        let mut a = 1.0f64;
        for n in 1..=n_max {
            a *= (n as f64) * (n as f64);
            if !a.is_finite() {
                return Err(WeightError::InvalidParams {
                    family: "factorial_squared".into(),
                    message: format!("overflows f64 beyond n = {}", n - 1),
                });
            }
            terms.push(a);
        }
        Self::from_terms(Family::FactorialSquared, "factorial_squared", terms)
    }

    pub fn table(terms: Vec<f64>, declared: DeclaredAlphaLimits) -> Result<Self, WeightError> {
        Self::from_terms(Family::Table { declared }, "table", terms)
    }

    pub fn family_name(&self) -> &'static str {
        self.family_name
    }

    pub fn family(&self) -> &AlphaFamily {
        &self.family
    }

    /// Largest n the sequence is materialized for.
    pub fn horizon(&self) -> usize {
        self.terms.len()
    }

    /// alpha_n, 1-based.
    pub fn term(&self, n: usize) -> f64 {
        self.terms[n - 1]
    }

    /// s_n = alpha_1 + ... + alpha_n, with s_0 = 0.
    pub fn partial_sum(&self, n: usize) -> f64 {
        self.sums[n]
    }

    /// Analytic asymptotics of the family.
    pub fn asymptotics(&self) -> AlphaAsymptotics {
        match &self.family {
            Family::Constant { .. } => AlphaAsymptotics {
                sums_diverge: Some(true),
                p_limit: LimitValue::Zero,
                v_finite: Some(false),
            },
            Family::Geometric { ratio } => {
                if *ratio > 1.0 {
                    AlphaAsymptotics {
                        sums_diverge: Some(true),
                        p_limit: LimitValue::Const((ratio - 1.0) / ratio),
                        v_finite: Some(false),
                    }
                } else if *ratio == 1.0 {
                    AlphaAsymptotics {
                        sums_diverge: Some(true),
                        p_limit: LimitValue::Zero,
                        v_finite: Some(false),
                    }
                } else {
                    AlphaAsymptotics {
                        sums_diverge: Some(false),
                        p_limit: LimitValue::Zero,
                        v_finite: Some(true),
                    }
                }
            }
            Family::Polynomial { theta } => {
                if *theta >= -1.0 {
                    AlphaAsymptotics {
                        sums_diverge: Some(true),
                        p_limit: LimitValue::Zero,
                        v_finite: Some(false),
                    }
                } else {
                    AlphaAsymptotics {
                        sums_diverge: Some(false),
                        p_limit: LimitValue::Zero,
                        v_finite: Some(true),
                    }
                }
            }
            Family::FactorialSquared => AlphaAsymptotics {
                sums_diverge: Some(true),
                p_limit: LimitValue::One,
                v_finite: Some(true),
            },
            Family::Table { declared } => AlphaAsymptotics {
                sums_diverge: declared.sums_diverge,
                p_limit: match declared.p_limit {
                    Some(p) if p == 0.0 => LimitValue::Zero,
                    Some(p) if p == 1.0 => LimitValue::One,
                    Some(p) => LimitValue::Const(p),
                    None => LimitValue::Unknown,
                },
                v_finite: declared.v_finite,
            },
        }
    }
}

type WeightFactory =
    Box<dyn Fn(&Value, usize) -> Result<Arc<AlphaSeq>, WeightError> + Send + Sync>;

/// Name-indexed factory for weight families. `build` takes the horizon the
/// sequence must be materialized for.
pub struct WeightRegistry {
    factories: BTreeMap<String, WeightFactory>,
}

impl WeightRegistry {
    pub fn empty() -> Self {
        WeightRegistry { factories: BTreeMap::new() }
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&Value, usize) -> Result<Arc<AlphaSeq>, WeightError> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(|s| s.as_str())
    }

    pub fn build(
        &self,
        family: &str,
        params: &Value,
        n_max: usize,
    ) -> Result<Arc<AlphaSeq>, WeightError> {
        let f = self
            .factories
            .get(family)
            .ok_or_else(|| WeightError::UnknownFamily(family.to_string()))?;
        f(params, n_max)
    }

    pub fn builtin() -> Self {
        let mut r = WeightRegistry::empty();
        r.register("constant", |p, n| {
            let value = p.get("value").and_then(|v| v.as_f64()).unwrap_or(1.0);
            if !(value > 0.0) {
                return Err(WeightError::InvalidParams {
                    family: "constant".into(),
                    message: format!("need value > 0, got {value} (field `value`)"),
                });
            }
            Ok(Arc::new(AlphaSeq::constant(value, n)?))
        });
        r.register("geometric", |p, n| {
            let ratio = p.get("ratio").and_then(|v| v.as_f64()).unwrap_or(2.0);
            Ok(Arc::new(AlphaSeq::geometric(ratio, n)?))
        });
        r.register("polynomial", |p, n| {
            let theta = p.get("theta").and_then(|v| v.as_f64()).unwrap_or(1.0);
            Ok(Arc::new(AlphaSeq::polynomial(theta, n)?))
        });
        r.register("factorial_squared", |_, n| {
            Ok(Arc::new(AlphaSeq::factorial_squared(n)?))
        });
        r.register("table", |p, _| {
            let vals = p
                .get("values")
                .and_then(|v| v.as_array())
                .ok_or_else(|| WeightError::InvalidParams {
                    family: "table".into(),
                    message: "need `values` array (field `values`)".into(),
                })?;
            let terms: Option<Vec<f64>> = vals.iter().map(|v| v.as_f64()).collect();
            let terms = terms.ok_or_else(|| WeightError::InvalidParams {
                family: "table".into(),
                message: "`values` must be numbers".into(),
            })?;
            let declared: DeclaredAlphaLimits = p
                .get("declared")
                .map(|d| serde_json::from_value(d.clone()))
                .transpose()
                .map_err(|e| WeightError::InvalidParams {
                    family: "table".into(),
                    message: format!("bad `declared`: {e}"),
                })?
                .unwrap_or_default();
            Ok(Arc::new(AlphaSeq::table(terms, declared)?))
        });
        r
    }
}
