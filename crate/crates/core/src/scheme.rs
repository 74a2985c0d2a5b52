//! The pure weighted scheme: independent draws with cdfs `F^{alpha_n}`.
//!
//! Sampling inverts `u^{1/alpha_n}` entirely in log space, so weights up to
//! and beyond 1e250 (for example the factorial-squared family) keep full
//! tail resolution. Record indicators of the scheme are independent with
//! `P(I_n = 1) = alpha_n / s_n`, which gives the exact mean/variance of the
//! record count and, via a Poisson-binomial convolution, its exact law.

use rayon::prelude::*;
use thiserror::Error;

use crate::dist::Distribution;
use crate::numeric::Kahan;
use crate::rng::{Channel, Streams};
use crate::weights::{AlphaSeq, LimitValue};

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("horizon {0} exceeds the exact-pmf cap {1}")]
    HorizonTooLarge(usize, usize),
    #[error("asymptotics undecidable: {0}")]
    Undecidable(String),
}

/// One realization of (X_n, M_n, I_n, N_n) up to a horizon.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub values: Vec<f64>,
    pub maxima: Vec<f64>,
    pub indicators: Vec<bool>,
    pub counts: Vec<u32>,
    pub seed: u64,
    pub rep: u64,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    /// Builds maxima/indicators/counts from raw values: M_n is the running
    /// max, I_1 = 1 and I_n = 1(X_n > M_{n-1}) after, N_n the running count.
    pub fn from_values(values: Vec<f64>, seed: u64, rep: u64) -> Self {
        let n = values.len();
        let mut maxima = Vec::with_capacity(n);
        let mut indicators = Vec::with_capacity(n);
        let mut counts = Vec::with_capacity(n);
        let mut m = f64::NEG_INFINITY;
        let mut c = 0u32;
        for (i, &x) in values.iter().enumerate() {
            let rec = i == 0 || x > m;
            m = m.max(x);
            if rec {
                c += 1;
            }
            maxima.push(m);
            indicators.push(rec);
            counts.push(c);
        }
        Trajectory { values, maxima, indicators, counts, seed, rep }
    }

    /// Like [`Trajectory::from_values`], but record comparisons run on a
    /// parallel score sequence that is order-isomorphic to the values.
    ///
    /// The pure sampler scores by `ln(U_n)/alpha_n`: for bounded base laws
    /// and very large weights the values themselves collapse onto the
    /// upper endpoint in f64 (quantization would fake ties and suppress
    /// records), while the scores keep full resolution at any weight.
    pub fn from_scored(values: Vec<f64>, scores: &[f64], seed: u64, rep: u64) -> Self {
        debug_assert_eq!(values.len(), scores.len());
        let n = values.len();
        let mut maxima = Vec::with_capacity(n);
        let mut indicators = Vec::with_capacity(n);
        let mut counts = Vec::with_capacity(n);
        let mut m = f64::NEG_INFINITY;
        let mut sm = f64::NEG_INFINITY;
        let mut c = 0u32;
        for (i, (&x, &s)) in values.iter().zip(scores).enumerate() {
            let rec = i == 0 || s > sm;
            m = m.max(x);
            sm = sm.max(s);
            if rec {
                c += 1;
            }
            maxima.push(m);
            indicators.push(rec);
            counts.push(c);
        }
        Trajectory { values, maxima, indicators, counts, seed, rep }
    }
}

/// Samples one trajectory of the scheme: `X_n = F^{-1}(U_n^{1/alpha_n})`,
/// with records decided on the exact log-space scores.
pub fn sample_falpha(
    f: &dyn Distribution,
    alpha: &AlphaSeq,
    n: usize,
    streams: &Streams,
    rep: u64,
) -> Trajectory {
    debug_assert!(n >= 1 && n <= alpha.horizon());
    let mut u = streams.uniforms(rep, Channel::Primary);
    let mut scores = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for k in 1..=n {
        let w = u.next_uniform().ln() / alpha.term(k);
        scores.push(w);
        values.push(f.quantile_log(w));
    }
    Trajectory::from_scored(values, &scores, streams.seed(), rep)
}

/// Exact record probability `p_n = alpha_n / s_n`.
pub fn record_probability(alpha: &AlphaSeq, n: usize) -> f64 {
    alpha.term(n) / alpha.partial_sum(n)
}

/// Exact p_n, E_n, V_n up to a horizon.
#[derive(Debug, Clone)]
pub struct RecordLawSummary {
    pub p: Vec<f64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

pub fn record_law_summary(alpha: &AlphaSeq, n: usize) -> RecordLawSummary {
    let mut p = Vec::with_capacity(n);
    let mut mean = Vec::with_capacity(n);
    let mut variance = Vec::with_capacity(n);
    let mut e = Kahan::new();
    let mut v = Kahan::new();
    for k in 1..=n {
        let pk = record_probability(alpha, k);
        e.add(pk);
        v.add(pk * (1.0 - pk));
        p.push(pk);
        mean.push(e.value());
        variance.push(v.value());
    }
    RecordLawSummary { p, mean, variance }
}

/// Exact-pmf horizon cap: the convolution is O(n^2).
pub const MAX_PMF_HORIZON: usize = 100_000;

/// Exact law of the record count N_n as the convolution of independent
/// Bernoulli(p_k). Returned vector is indexed by the count, `pmf[k] =
/// P(N_n = k)` for k = 0..=n (the 0 entry is always 0 since I_1 = 1).
pub fn exact_count_pmf(alpha: &AlphaSeq, n: usize) -> Result<Vec<f64>, SchemeError> {
    if n > MAX_PMF_HORIZON {
        return Err(SchemeError::HorizonTooLarge(n, MAX_PMF_HORIZON));
    }
    let mut pmf = vec![0.0f64; n + 1];
    pmf[0] = 1.0;
    for k in 1..=n {
        let p = record_probability(alpha, k);
        let top = k.min(n);
        for j in (1..=top).rev() {
            pmf[j] = pmf[j] * (1.0 - p) + pmf[j - 1] * p;
        }
        pmf[0] *= 1.0 - p;
    }
    Ok(pmf)
}

// ---------------------------------------------------------------------------
// Asymptotic regimes
// ---------------------------------------------------------------------------

/// Limit statements about the record count implied by the weight family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum LimitStatement {
    /// N_n -> inf a.s.
    CountDiverges,
    /// Only finitely many records a.s. (partial sums stay bounded).
    CountStaysFinite,
    /// N_n / E_n -> 1 a.s.
    RatioToOne,
    /// (N_n - E_n) / ln s_n -> 0 a.s.
    LogNormalizedDeviationVanishes,
    /// N_n / ln s_n -> 1 a.s. (record probabilities vanish).
    CountOverLogSumToOne,
    /// N_n / ln s_n -> 0 a.s. (record probabilities tend to one).
    CountOverLogSumToZero,
    /// N_n - E_n converges a.s. to a proper limit (bounded variance).
    CenteredCountConverges,
    /// (N_n - E_n)/sqrt(V_n) converges to a standard normal.
    CentralLimit,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct AsymptoticsReport {
    pub sums_diverge: bool,
    pub p_limit_desc: String,
    pub v_finite: bool,
    pub statements: Vec<LimitStatement>,
}

/// Classifies the limit behavior of the record count from the family's
/// analytic asymptotics. Tables must declare their limits.
pub fn classify_asymptotics(alpha: &AlphaSeq) -> Result<AsymptoticsReport, SchemeError> {
    let asy = alpha.asymptotics();
    let sums_diverge = asy
        .sums_diverge
        .ok_or_else(|| SchemeError::Undecidable("table without declared sum limit".into()))?;
    if !sums_diverge {
        return Ok(AsymptoticsReport {
            sums_diverge,
            p_limit_desc: describe_limit(asy.p_limit),
            v_finite: true,
            statements: vec![
                LimitStatement::CountStaysFinite,
                LimitStatement::CenteredCountConverges,
            ],
        });
    }
    let v_finite = asy
        .v_finite
        .ok_or_else(|| SchemeError::Undecidable("table without declared variance limit".into()))?;
    let mut statements = vec![
        LimitStatement::CountDiverges,
        LimitStatement::RatioToOne,
        LimitStatement::LogNormalizedDeviationVanishes,
    ];
    match asy.p_limit {
        LimitValue::Zero => statements.push(LimitStatement::CountOverLogSumToOne),
        LimitValue::One => statements.push(LimitStatement::CountOverLogSumToZero),
        _ => {}
    }
    statements.push(if v_finite {
        LimitStatement::CenteredCountConverges
    } else {
        LimitStatement::CentralLimit
    });
    Ok(AsymptoticsReport {
        sums_diverge,
        p_limit_desc: describe_limit(asy.p_limit),
        v_finite,
        statements,
    })
}

fn describe_limit(l: LimitValue) -> String {
    match l {
        LimitValue::Zero => "0".into(),
        LimitValue::One => "1".into(),
        LimitValue::Const(c) => format!("{c}"),
        LimitValue::Infinite => "inf".into(),
        LimitValue::Unknown => "unknown".into(),
    }
}

/// Samples `reps` trajectories in parallel and folds each through `map`,
/// returning the per-replication results in replication order (so any
/// later reduction is independent of the worker count).
pub fn map_replications<T, F>(reps: u64, map: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..reps).into_par_iter().map(map).collect()
}
