//! Threshold sequences and boundary functions.
//!
//! A threshold sequence is a non-decreasing `level_n`; with a distribution
//! F attached it carries the tail values `q_n = 1 - F(level_n)` and
//! `ln F(level_n)` every criterion and joint-law formula consumes. The
//! associated step boundary is `b_t = level_n` on `[s_n, s_{n+1})` (with
//! `b_t = level_1` below `s_1`), which is exactly the boundary the partial
//! maxima of the weighted scheme cross at times `s_n`.
//!
//! Tail families constructed through this module also carry their analytic
//! asymptotics ([`TailHypothesis`]): the limit of `q_n`, the growth of
//! `s_n q_n`, and where available a certified power minorant
//! `g_t >= kappa * t^{gamma - 1}` used to bound series/integral tails, or
//! an analytic divergence certificate. Tables without declared limits get
//! `Unknown` everywhere and classification stays undecided.

use std::sync::Arc;

use thiserror::Error;

use crate::dist::Distribution;
use crate::weights::{AlphaSeq, LimitValue};

#[derive(Debug, Error)]
pub enum BoundaryError {
    #[error("threshold levels must be non-decreasing (index {0})")]
    NotMonotone(usize),
    #[error("invalid threshold parameters: {0}")]
    InvalidParams(String),
}

/// Growth class of the products `s_n q_n` (or `t g_t`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeqGrowth {
    LimitZero,
    LimitConst(f64),
    /// Bounded but with no claimed limit; enough for `liminf < inf`.
    Bounded(f64),
    Infinite,
    Unknown,
}

impl SeqGrowth {
    pub fn liminf_finite(self) -> Option<bool> {
        match self {
            SeqGrowth::LimitZero | SeqGrowth::LimitConst(_) | SeqGrowth::Bounded(_) => Some(true),
            SeqGrowth::Infinite => Some(false),
            SeqGrowth::Unknown => None,
        }
    }
}

/// Certified lower bound `g_t >= kappa * t^{gamma-1}` for `t >= valid_from`.
///
/// Under it, upper tails of `integral g_t e^{-t g_t} dt` and of the matching
/// sums are `(1/gamma) e^{-kappa T^gamma}` once `kappa T^gamma >= 1`.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct TailMinorant {
    pub kappa: f64,
    pub gamma: f64,
    pub valid_from: f64,
}

impl TailMinorant {
    /// Upper bound for the tail beyond `t_star`, if certifiable there.
    pub fn tail_bound(&self, t_star: f64) -> Option<f64> {
        if t_star < self.valid_from {
            return None;
        }
        let u = self.kappa * t_star.powf(self.gamma);
        if u < 1.0 {
            return None;
        }
        Some((-u).exp() / self.gamma)
    }
}

/// Analytic certificate that the convergence functional diverges.
#[derive(Debug, Clone, Copy)]
pub enum DivergenceCert {
    /// Terms dominate `c * lnln n / (n (ln n)^beta)` with `beta <= 1`,
    /// whose sum diverges by integral comparison.
    LogLogComparison { coeff: f64, beta: f64, from: usize },
}

/// Analytic facts about a threshold tail, relative to a weight sequence.
#[derive(Debug, Clone, Copy)]
pub struct TailHypothesis {
    pub q_limit: LimitValue,
    pub sq_growth: SeqGrowth,
    pub minorant: Option<TailMinorant>,
    pub divergence: Option<DivergenceCert>,
}

impl TailHypothesis {
    pub fn unknown() -> Self {
        TailHypothesis {
            q_limit: LimitValue::Unknown,
            sq_growth: SeqGrowth::Unknown,
            minorant: None,
            divergence: None,
        }
    }
}

/// Limits a user-table threshold may declare in the config.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize, Default)]
pub struct DeclaredTailLimits {
    /// Limit of q_n (None when unknown).
    pub q_limit: Option<f64>,
    /// Declared behavior of s_n q_n: true means -> infinity.
    pub sq_infinite: Option<bool>,
    /// Declared finite bound for s_n q_n when not infinite.
    pub sq_bound: Option<f64>,
    pub minorant: Option<TailMinorant>,
}

// ---------------------------------------------------------------------------
// Threshold sequences
// ---------------------------------------------------------------------------

/// A materialized threshold sequence with its tail values under a fixed F.
#[derive(Debug, Clone)]
pub struct ThresholdSeq {
    levels: Vec<f64>,
    q: Vec<f64>,
    log_h: Vec<f64>,
    monotone: bool,
    hypothesis: TailHypothesis,
}

impl ThresholdSeq {
    fn from_levels_internal(
        f: &dyn Distribution,
        levels: Vec<f64>,
        hypothesis: TailHypothesis,
    ) -> Result<Self, BoundaryError> {
        if levels.is_empty() {
            return Err(BoundaryError::InvalidParams("empty threshold table".into()));
        }
        let mut monotone = true;
        for (i, w) in levels.windows(2).enumerate() {
            if w[1] < w[0] {
                monotone = false;
                let _ = i;
            }
        }
        let q = levels.iter().map(|&l| f.sf(l)).collect();
        let log_h = levels.iter().map(|&l| f.log_cdf(l)).collect();
        Ok(ThresholdSeq { levels, q, log_h, monotone, hypothesis })
    }

    /// Flat threshold `level_n = level`.
    pub fn flat(
        f: &dyn Distribution,
        level: f64,
        alpha: &AlphaSeq,
        n_max: usize,
    ) -> Result<Self, BoundaryError> {
        let q = f.sf(level);
        let sums_diverge = alpha.asymptotics().sums_diverge;
        let hypothesis = if q > 0.0 {
            TailHypothesis {
                q_limit: LimitValue::Const(q),
                sq_growth: match sums_diverge {
                    Some(true) => SeqGrowth::Infinite,
                    Some(false) => SeqGrowth::Bounded(f64::INFINITY),
                    None => SeqGrowth::Unknown,
                },
                minorant: Some(TailMinorant { kappa: q, gamma: 1.0, valid_from: 0.0 }),
                divergence: None,
            }
        } else {
            TailHypothesis {
                q_limit: LimitValue::Zero,
                sq_growth: SeqGrowth::LimitZero,
                minorant: None,
                divergence: None,
            }
        };
        Self::from_levels_internal(f, vec![level; n_max], hypothesis)
    }

    /// Tail family `q_n = coeff * n^{-exponent}` (exponent > 0), realized as
    /// `level_n = F^{-1}(1 - q_n)`. For an exponential F this is exactly the
    /// logarithmic level family `level_n = (exponent ln n - ln coeff)/rate`.
    pub fn tail_power(
        f: &dyn Distribution,
        coeff: f64,
        exponent: f64,
        alpha: &AlphaSeq,
        n_max: usize,
    ) -> Result<Self, BoundaryError> {
        if !(coeff > 0.0 && coeff <= 1.0) || !(exponent > 0.0) {
            return Err(BoundaryError::InvalidParams(format!(
                "tail_power needs coeff in (0,1] and exponent > 0, got {coeff}, {exponent}"
            )));
        }
        let q_of = |n: usize| (coeff * (n as f64).powf(-exponent)).min(1.0);
        let levels: Vec<f64> = (1..=n_max).map(|n| inverse_sf(f, q_of(n))).collect();
        let hypothesis = power_tail_hypothesis(alpha, coeff, exponent);
        Self::from_levels_internal(f, levels, hypothesis)
    }

    /// Tail family `q_n = coeff * lnln(n) / n` for n >= 16, constant before.
    /// The boundary case for the convergence functional: with constant
    /// weights c it diverges iff `c * coeff <= 1`.
    pub fn tail_loglog(
        f: &dyn Distribution,
        coeff: f64,
        alpha: &AlphaSeq,
        n_max: usize,
    ) -> Result<Self, BoundaryError> {
        if !(coeff > 0.0) {
            return Err(BoundaryError::InvalidParams(format!(
                "tail_loglog needs coeff > 0, got {coeff}"
            )));
        }
        let q_of = |n: usize| {
            let n = (n.max(16)) as f64;
            (coeff * n.ln().ln() / n).min(1.0)
        };
        let levels: Vec<f64> = (1..=n_max).map(|n| inverse_sf(f, q_of(n))).collect();
        let hypothesis = loglog_tail_hypothesis(alpha, coeff);
        Self::from_levels_internal(f, levels, hypothesis)
    }

    /// Explicit level table; asymptotics only as declared.
    pub fn from_levels(
        f: &dyn Distribution,
        levels: Vec<f64>,
        declared: DeclaredTailLimits,
    ) -> Result<Self, BoundaryError> {
        let hypothesis = TailHypothesis {
            q_limit: match declared.q_limit {
                Some(q) if q == 0.0 => LimitValue::Zero,
                Some(q) => LimitValue::Const(q),
                None => LimitValue::Unknown,
            },
            sq_growth: match (declared.sq_infinite, declared.sq_bound) {
                (Some(true), _) => SeqGrowth::Infinite,
                (_, Some(b)) => SeqGrowth::Bounded(b),
                (Some(false), None) => SeqGrowth::Bounded(f64::INFINITY),
                (None, None) => SeqGrowth::Unknown,
            },
            minorant: declared.minorant,
            divergence: None,
        };
        Self::from_levels_internal(f, levels, hypothesis)
    }

    pub fn horizon(&self) -> usize {
        self.levels.len()
    }

    /// level_n, 1-based.
    pub fn level(&self, n: usize) -> f64 {
        self.levels[n - 1]
    }

    /// q_n = 1 - F(level_n).
    pub fn q(&self, n: usize) -> f64 {
        self.q[n - 1]
    }

    /// ln F(level_n) = ln h_n.
    pub fn log_h(&self, n: usize) -> f64 {
        self.log_h[n - 1]
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn hypothesis(&self) -> TailHypothesis {
        self.hypothesis
    }

    /// Running-maximum rectification of the levels. Tail limits are
    /// unchanged by monotone rectification, so the hypothesis carries over.
    pub fn rectified(&self, f: &dyn Distribution) -> ThresholdSeq {
        let mut levels = self.levels.clone();
        let mut run = f64::NEG_INFINITY;
        for l in levels.iter_mut() {
            run = run.max(*l);
            *l = run;
        }
        Self::from_levels_internal(f, levels, self.hypothesis)
            .expect("rectified levels are valid")
    }

    /// The step boundary jumping to level_n at s_n.
    pub fn step_boundary(&self, alpha: &AlphaSeq) -> StepBoundary {
        let n = self.levels.len().min(alpha.horizon());
        StepBoundary {
            jumps: (1..=n).map(|k| alpha.partial_sum(k)).collect(),
            levels: self.levels[..n].to_vec(),
            monotone: self.monotone,
        }
    }
}

fn inverse_sf(f: &dyn Distribution, q: f64) -> f64 {
    if q >= 1.0 {
        // Everything above the lower support counts; use its infimum.
        return f.lower_support();
    }
    if q > 1e-10 {
        f.quantile(1.0 - q)
    } else {
        f.quantile_log((-q).ln_1p())
    }
}

fn power_tail_hypothesis(alpha: &AlphaSeq, coeff: f64, exponent: f64) -> TailHypothesis {
    use crate::weights::AlphaFamily;
    let mut h = TailHypothesis {
        q_limit: LimitValue::Zero,
        sq_growth: SeqGrowth::Unknown,
        minorant: None,
        divergence: None,
    };
    match alpha.family() {
        AlphaFamily::Constant { value: c } => {
            // s_n = c n exactly.
            if exponent < 1.0 {
                h.sq_growth = SeqGrowth::Infinite;
                // q at time t: the step active at t has index n <= t/c.
                h.minorant = Some(TailMinorant {
                    kappa: coeff * c.powf(exponent),
                    gamma: 1.0 - exponent,
                    valid_from: alpha.partial_sum(1),
                });
            } else if exponent == 1.0 {
                h.sq_growth = SeqGrowth::LimitConst(coeff * c);
            } else {
                h.sq_growth = SeqGrowth::LimitZero;
            }
        }
        AlphaFamily::Polynomial { theta } if *theta >= 0.0 => {
            // s_n >= n^{theta+1}/(theta+1), so at time t the active index
            // satisfies n <= ((theta+1) t)^{1/(theta+1)}.
            let rho = theta + 1.0;
            if exponent < rho {
                h.sq_growth = SeqGrowth::Infinite;
                h.minorant = Some(TailMinorant {
                    kappa: coeff * rho.powf(-exponent / rho),
                    gamma: 1.0 - exponent / rho,
                    valid_from: alpha.partial_sum(1).max(1.0),
                });
            } else if exponent == rho {
                h.sq_growth = SeqGrowth::LimitConst(coeff / rho);
            } else {
                h.sq_growth = SeqGrowth::LimitZero;
            }
        }
        AlphaFamily::Geometric { ratio } if *ratio >= 1.0 => {
            // s_n grows faster than any power of n, so s_n q_n -> inf for
            // every power tail; no power minorant in t is available.
            h.sq_growth = SeqGrowth::Infinite;
        }
        AlphaFamily::FactorialSquared => {
            h.sq_growth = SeqGrowth::Infinite;
        }
        _ => {}
    }
    h
}

fn loglog_tail_hypothesis(alpha: &AlphaSeq, coeff: f64) -> TailHypothesis {
    use crate::weights::AlphaFamily;
    let mut h = TailHypothesis {
        q_limit: LimitValue::Zero,
        sq_growth: SeqGrowth::Unknown,
        minorant: None,
        divergence: None,
    };
    if let AlphaFamily::Constant { value: c } = alpha.family() {
        h.sq_growth = SeqGrowth::Infinite;
        let beta = c * coeff;
        if beta <= 1.0 {
            // e^{-s_n q_n} (1 - e^{-a_{n+1} q_n})
            //   >= (1 - 1/e) * c*coeff * lnln n / (n (ln n)^beta), n >= 16,
            // and the majorized series diverges for beta <= 1.
            h.divergence = Some(DivergenceCert::LogLogComparison {
                coeff: (1.0 - (-1.0f64).exp()) * beta,
                beta,
                from: 16,
            });
        }
    }
    h
}

// ---------------------------------------------------------------------------
// Boundary functions
// ---------------------------------------------------------------------------

/// Non-decreasing (or to-be-enveloped) boundary `b_t`, evaluable on t > 0.
pub trait Boundary: Send + Sync {
    fn value(&self, t: f64) -> f64;

    /// Jump locations inside (t_lo, t_hi], for quadrature splitting.
    fn breakpoints(&self, _t_lo: f64, _t_hi: f64) -> Vec<f64> {
        Vec::new()
    }

    fn is_nondecreasing(&self) -> bool;

    /// Piecewise-constant representation (jumps, levels), when one exists.
    /// Lets envelopes be built exactly instead of by scanning.
    fn as_step(&self) -> Option<(&[f64], &[f64])> {
        None
    }
}

/// Piecewise-constant boundary with value `levels[n-1]` on
/// `[jumps[n-1], jumps[n])`, extended by `levels[0]` below the first jump.
#[derive(Debug, Clone)]
pub struct StepBoundary {
    jumps: Vec<f64>,
    levels: Vec<f64>,
    monotone: bool,
}

impl StepBoundary {
    pub fn from_table(jumps: Vec<f64>, levels: Vec<f64>) -> Result<Self, BoundaryError> {
        if jumps.len() != levels.len() || jumps.is_empty() {
            return Err(BoundaryError::InvalidParams(
                "jumps and levels must be equal-length and non-empty".into(),
            ));
        }
        for (i, w) in jumps.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(BoundaryError::NotMonotone(i));
            }
        }
        let monotone = levels.windows(2).all(|w| w[1] >= w[0]);
        Ok(StepBoundary { jumps, levels, monotone })
    }

    /// Time of the last jump contained in the materialized range.
    pub fn last_jump(&self) -> f64 {
        *self.jumps.last().unwrap()
    }
}

impl Boundary for StepBoundary {
    fn value(&self, t: f64) -> f64 {
        let idx = self.jumps.partition_point(|&s| s <= t);
        self.levels[idx.saturating_sub(1)]
    }

    fn breakpoints(&self, t_lo: f64, t_hi: f64) -> Vec<f64> {
        let lo = self.jumps.partition_point(|&s| s <= t_lo);
        let hi = self.jumps.partition_point(|&s| s <= t_hi);
        self.jumps[lo..hi].to_vec()
    }

    fn is_nondecreasing(&self) -> bool {
        self.monotone
    }

    fn as_step(&self) -> Option<(&[f64], &[f64])> {
        Some((&self.jumps, &self.levels))
    }
}

/// Boundary given by a closure.
pub struct FnBoundary<F: Fn(f64) -> f64 + Send + Sync> {
    f: F,
    nondecreasing: bool,
}

impl<F: Fn(f64) -> f64 + Send + Sync> FnBoundary<F> {
    pub fn new(f: F, nondecreasing: bool) -> Self {
        FnBoundary { f, nondecreasing }
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> Boundary for FnBoundary<F> {
    fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }
    fn is_nondecreasing(&self) -> bool {
        self.nondecreasing
    }
}

/// Running-sup envelope: constant `b_{t0}` on (0, t0), `sup_{t0<=u<=t} b_u`
/// after. Materialized on [t0, t_max] at construction so lookups stay
/// immutable and shareable across workers.
pub struct MonotoneEnvelope {
    inner: Arc<dyn Boundary>,
    t0: f64,
    t_max: f64,
    step: f64,
    prefix_max: Vec<f64>,
    /// Exact rectified form, when the inner boundary is a step function.
    exact: Option<StepBoundary>,
}

const ENVELOPE_CELLS: usize = 1 << 20;

/// Builds the running-sup envelope of `b` starting at `t0`. When `b` is
/// already non-decreasing the envelope coincides with it on `[t0, inf)`;
/// step boundaries rectify exactly; anything else is scanned on a fine
/// grid with per-cell golden-section refinement.
pub fn monotone_envelope(b: Arc<dyn Boundary>, t0: f64, t_max: f64) -> MonotoneEnvelope {
    assert!(t0 > 0.0 && t_max > t0);
    if b.is_nondecreasing() {
        return MonotoneEnvelope {
            inner: b,
            t0,
            t_max,
            step: t_max - t0,
            prefix_max: Vec::new(),
            exact: None,
        };
    }
    if let Some((jumps, levels)) = b.as_step() {
        let mut run = b.value(t0);
        let mut ej = vec![t0];
        let mut el = vec![run];
        for (j, &t) in jumps.iter().enumerate() {
            if t <= t0 {
                continue;
            }
            run = run.max(levels[j]);
            if run > *el.last().unwrap() {
                ej.push(t);
                el.push(run);
            }
        }
        let exact = StepBoundary::from_table(ej, el).expect("rectified step");
        return MonotoneEnvelope {
            inner: b,
            t0,
            t_max,
            step: t_max - t0,
            prefix_max: Vec::new(),
            exact: Some(exact),
        };
    }
    let cells = ENVELOPE_CELLS;
    let step = (t_max - t0) / cells as f64;
    let mut prefix_max = Vec::with_capacity(cells + 1);
    let mut running = b.value(t0);
    prefix_max.push(running);
    for i in 1..=cells {
        let left = t0 + step * (i - 1) as f64;
        let right = t0 + step * i as f64;
        running = running.max(cell_max(b.as_ref(), left, right));
        prefix_max.push(running);
    }
    MonotoneEnvelope { inner: b, t0, t_max, step, prefix_max, exact: None }
}

/// Golden-section max over one tiny cell; the inner boundary is assumed at
/// most unimodal at this scale.
fn cell_max(b: &dyn Boundary, mut lo: f64, mut hi: f64) -> f64 {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut best = b.value(lo).max(b.value(hi));
    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let mut f1 = b.value(x1);
    let mut f2 = b.value(x2);
    for _ in 0..48 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = b.value(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INVPHI * (hi - lo);
            f1 = b.value(x1);
        }
        best = best.max(f1.max(f2));
    }
    best
}

impl Boundary for MonotoneEnvelope {
    fn value(&self, t: f64) -> f64 {
        let t = t.clamp(self.t0, self.t_max);
        if let Some(step) = &self.exact {
            return step.value(t);
        }
        if self.prefix_max.is_empty() {
            return self.inner.value(t);
        }
        let idx = (((t - self.t0) / self.step).floor() as usize).min(self.prefix_max.len() - 1);
        let full = self.prefix_max[idx];
        let cell_lo = self.t0 + self.step * idx as f64;
        if t <= cell_lo {
            full
        } else {
            full.max(cell_max(self.inner.as_ref(), cell_lo, t))
        }
    }

    fn breakpoints(&self, t_lo: f64, t_hi: f64) -> Vec<f64> {
        self.inner.breakpoints(t_lo, t_hi)
    }

    fn is_nondecreasing(&self) -> bool {
        true
    }
}
