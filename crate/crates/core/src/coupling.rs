//! Threshold schemes and their coupling to the pure scheme.
//!
//! A threshold scheme only promises the law `F^{alpha_n}` above a
//! non-decreasing level `level_n`; below it anything (dependent, arbitrary)
//! may happen. Both sequences are driven by the same uniforms, so above
//! the threshold the observed values literally equal the pure-scheme
//! values whenever the tails match exactly. Three below-threshold models
//! ship:
//!
//! * `Vee`: X_n = max(V_n, Y_n) with Y_n the pure draw and V_n <= level_n
//!   an arbitrary bounded filler (constant, i.i.d. or Markov);
//! * `TailExact`: the law equals `F^{alpha_n}` above the level and a
//!   uniform smear below it;
//! * `Perturbed`: the quantile map is warped on a shrinking u-window above
//!   the threshold, so the tail law differs from `F^{alpha_n}` by a total
//!   variation `delta_n = width_n / 2` while the common-uniform coupling
//!   still yields exact equality off the window (mismatch probability
//!   `delta'_n = width_n >= delta_n`).
//!
//! The agreement time reported for a coupled path is the first index from
//! which (max, indicator) pairs agree through the horizon; paths that
//! still disagree at the horizon are counted separately, never dropped.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::boundary::ThresholdSeq;
use crate::criteria::{classify_growth, CriterionVerdict, Verdict};
use crate::dist::DynDist;
use crate::numeric::Kahan;
use crate::rng::{Channel, Streams};
use crate::scheme::Trajectory;
use crate::weights::AlphaSeq;

#[derive(Debug, Error)]
pub enum CouplingError {
    #[error("condition clause ({clause}) failed: {detail}")]
    CertificationFailed { clause: &'static str, detail: String },
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
}

/// Below-threshold filler for the vee model.
#[derive(Debug, Clone)]
pub enum VeeGen {
    /// V_n = level_n.
    AtThreshold,
    /// V_n = level_n - offset.
    Offset { offset: f64 },
    /// V_n = level_n - width * U'_n.
    IidUniform { width: f64 },
    /// V_n = level_n - width * z_n with z_n an AR(1) chain in (0,1).
    Markov { rho: f64, width: f64 },
}

/// Shrinking warp windows for the perturbed model: window n has width
/// `min(width0 * decay^n, (1-u1)/2)` starting at
/// `u1 = max(F^{alpha_n}(level_n), base_u)`, and the quantile map inside
/// is bent by `shift = width/4`.
#[derive(Debug, Clone, Serialize)]
pub struct WarpFamily {
    pub width0: f64,
    pub decay: f64,
    pub base_u: f64,
}

impl WarpFamily {
    fn window(&self, n: usize, h_pow: f64) -> (f64, f64, f64) {
        let u1 = h_pow.max(self.base_u);
        let width = (self.width0 * self.decay.powi(n as i32)).min(0.5 * (1.0 - u1));
        (u1, u1 + width, 0.25 * width)
    }

    /// Exact restricted TV between the warped law and `F^{alpha_n}`:
    /// twice the bend of the u-map.
    pub fn delta(&self, n: usize, h_pow: f64) -> f64 {
        let (u1, u2, shift) = self.window(n, h_pow);
        if u2 > u1 {
            2.0 * shift
        } else {
            0.0
        }
    }

    /// Mismatch probability of the common-uniform coupling: the window
    /// width. Always >= delta.
    pub fn delta_prime(&self, n: usize, h_pow: f64) -> f64 {
        let (u1, u2, _) = self.window(n, h_pow);
        u2 - u1
    }

    fn warp(&self, u: f64, n: usize, h_pow: f64) -> f64 {
        let (u1, u2, shift) = self.window(n, h_pow);
        if u <= u1 || u >= u2 || u2 <= u1 {
            return u;
        }
        let mid = 0.5 * (u1 + u2);
        let bent = mid + shift;
        if u <= mid {
            u1 + (u - u1) * (bent - u1) / (mid - u1)
        } else {
            bent + (u - mid) * (u2 - bent) / (u2 - mid)
        }
    }
}

#[derive(Debug, Clone)]
pub enum BelowModel {
    Vee { v: VeeGen },
    TailExact { spread: f64 },
    Perturbed { warp: WarpFamily },
}

impl BelowModel {
    /// Restricted TV between the step-n law and `F^{alpha_n}` above the
    /// threshold. Zero except for the perturbed model.
    pub fn delta(&self, n: usize, h_pow: f64) -> f64 {
        match self {
            BelowModel::Perturbed { warp } => warp.delta(n, h_pow),
            _ => 0.0,
        }
    }
}

/// A scheme to simulate: pure, or thresholded with a below-model.
pub struct ThresholdScheme {
    pub dist: DynDist,
    pub alpha: Arc<AlphaSeq>,
    pub threshold: Option<(ThresholdSeq, BelowModel)>,
}

impl ThresholdScheme {
    pub fn pure(dist: DynDist, alpha: Arc<AlphaSeq>) -> Self {
        ThresholdScheme { dist, alpha, threshold: None }
    }

    pub fn with_threshold(
        dist: DynDist,
        alpha: Arc<AlphaSeq>,
        thr: ThresholdSeq,
        below: BelowModel,
    ) -> Self {
        ThresholdScheme { dist, alpha, threshold: Some((thr, below)) }
    }

    /// ln F^{alpha_n}(level_n), the log of the no-exceedance probability.
    fn log_h_pow(&self, n: usize) -> f64 {
        match &self.threshold {
            Some((thr, _)) => self.alpha.term(n) * thr.log_h(n),
            None => f64::NEG_INFINITY,
        }
    }

    /// Samples the observed sequence and its paired pure-scheme sequence
    /// from one uniform stream.
    pub fn sample_coupled(&self, n: usize, streams: &Streams, rep: u64) -> CoupledTrajectory {
        let mut u = streams.uniforms(rep, Channel::Primary);
        let f = self.dist.as_ref();
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        let mut ws = Vec::with_capacity(n);
        match &self.threshold {
            None => {
                for k in 1..=n {
                    let w = u.next_uniform().ln() / self.alpha.term(k);
                    let y = f.quantile_log(w);
                    ws.push(w);
                    xs.push(y);
                    ys.push(y);
                }
                let observed = Trajectory::from_scored(xs, &ws, streams.seed(), rep);
                let scheme = Trajectory::from_scored(ys, &ws, streams.seed(), rep);
                return CoupledTrajectory { observed, scheme, agreement_start: Some(1) };
            }
            Some((thr, below)) => {
                let mut below_stream = streams.uniforms(rep, Channel::Below);
                let mut markov_z = f64::NAN;
                for k in 1..=n {
                    let uk = u.next_uniform();
                    let w = uk.ln() / self.alpha.term(k);
                    let y = f.quantile_log(w);
                    ws.push(w);
                    ys.push(y);
                    let level = thr.level(k);
                    let x = match below {
                        BelowModel::Vee { v } => {
                            let w = below_stream.next_uniform();
                            let filler = match v {
                                VeeGen::AtThreshold => level,
                                VeeGen::Offset { offset } => level - offset,
                                VeeGen::IidUniform { width } => level - width * w,
                                VeeGen::Markov { rho, width } => {
                                    markov_z = if markov_z.is_nan() {
                                        w
                                    } else {
                                        rho * markov_z + (1.0 - rho) * w
                                    };
                                    level - width * markov_z
                                }
                            };
                            filler.max(y)
                        }
                        BelowModel::TailExact { spread } => {
                            let log_h_pow = self.log_h_pow(k);
                            if uk.ln() > log_h_pow {
                                y
                            } else {
                                // Uniform smear on (level - spread, level].
                                let hp = log_h_pow.exp();
                                level - spread * (1.0 - uk / hp)
                            }
                        }
                        BelowModel::Perturbed { warp } => {
                            let hp = self.log_h_pow(k).exp();
                            let wu = warp.warp(uk, k, hp);
                            if wu == uk {
                                y
                            } else {
                                f.quantile_log(wu.ln() / self.alpha.term(k))
                            }
                        }
                    };
                    xs.push(x);
                }
            }
        }
        // Observed side: records on the values as realized (fillers mix
        // scales). Pure side: records on the exact log-space scores.
        let observed = Trajectory::from_values(xs, streams.seed(), rep);
        let scheme = Trajectory::from_scored(ys, &ws, streams.seed(), rep);
        let agreement_start = agreement_start(&observed, &scheme);
        CoupledTrajectory { observed, scheme, agreement_start }
    }
}

/// First index from which (M, I) pairs agree through the horizon; `None`
/// when they still disagree at the horizon itself.
fn agreement_start(a: &Trajectory, b: &Trajectory) -> Option<usize> {
    let n = a.horizon();
    let mut last_disagreement = 0usize;
    for k in (1..=n).rev() {
        if a.maxima[k - 1] != b.maxima[k - 1] || a.indicators[k - 1] != b.indicators[k - 1] {
            last_disagreement = k;
            break;
        }
    }
    if last_disagreement == n {
        None
    } else {
        Some(last_disagreement + 1)
    }
}

#[derive(Debug, Clone)]
pub struct CoupledTrajectory {
    pub observed: Trajectory,
    pub scheme: Trajectory,
    pub agreement_start: Option<usize>,
}

impl CoupledTrajectory {
    /// Smallest m with M_m > level_m, if any.
    pub fn first_above(&self, thr: &ThresholdSeq) -> Option<usize> {
        (1..=self.observed.horizon()).find(|&m| self.observed.maxima[m - 1] > thr.level(m))
    }

    /// Pathwise flat-threshold identity violations: the exceedance events
    /// and the above-threshold values must coincide exactly at every step.
    /// Only meaningful for models with exact tails (delta = 0).
    pub fn identity_violations(&self, thr: &ThresholdSeq) -> usize {
        let mut bad = 0;
        for k in 1..=self.observed.horizon() {
            let l = thr.level(k);
            let (x, y) = (self.observed.values[k - 1], self.scheme.values[k - 1]);
            if (x > l) != (y > l) {
                bad += 1;
            } else if x > l && x != y {
                bad += 1;
            }
        }
        bad
    }

    /// Violations of the flat-threshold agreement claim: once the observed
    /// maximum clears the level, (M, I) must equal the pure pair onwards.
    pub fn lemma0_violations(&self, thr: &ThresholdSeq) -> usize {
        let Some(m) = self.first_above(thr) else {
            return 0;
        };
        let mut bad = 0;
        for k in m..=self.observed.horizon() {
            if self.observed.maxima[k - 1] != self.scheme.maxima[k - 1]
                || self.observed.indicators[k - 1] != self.scheme.indicators[k - 1]
            {
                bad += 1;
            }
        }
        bad
    }
}

// ---------------------------------------------------------------------------
// Coupling-time statistics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CouplingTimeReport {
    pub reps: u64,
    pub horizon: usize,
    /// [q25, q50, q75, q90] of the agreement start (non-agreed paths count
    /// as horizon + 1).
    pub quantiles: [usize; 4],
    pub no_agreement_fraction: f64,
    #[serde(skip)]
    starts: Vec<usize>,
}

impl CouplingTimeReport {
    /// Fraction of paths not yet agreed at step n (agreement starts later
    /// or never).
    pub fn fraction_not_agreed_by(&self, n: usize) -> f64 {
        let cnt = self.starts.iter().filter(|&&s| s > n).count();
        cnt as f64 / self.starts.len() as f64
    }
}

pub fn coupling_time_distribution(
    scheme: &ThresholdScheme,
    horizon: usize,
    streams: &Streams,
    reps: u64,
) -> CouplingTimeReport {
    let mut starts: Vec<usize> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            scheme
                .sample_coupled(horizon, streams, rep)
                .agreement_start
                .unwrap_or(horizon + 1)
        })
        .collect();
    let no_agreement_fraction =
        starts.iter().filter(|&&s| s > horizon).count() as f64 / reps as f64;
    starts.sort_unstable();
    let at = |q: f64| starts[((q * reps as f64) as usize).min(starts.len() - 1)];
    CouplingTimeReport {
        reps,
        horizon,
        quantiles: [at(0.25), at(0.5), at(0.75), at(0.9)],
        no_agreement_fraction,
        starts,
    }
}

// ---------------------------------------------------------------------------
// Condition certification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct C2Report {
    /// (i): right endpoints never exceed the base distribution's.
    pub endpoint_ok: bool,
    /// (ii): conditional tail laws equal the marginal ones (construction).
    pub conditional_match: bool,
    /// (iii): partial sum of the tail TV distances plus its analytic tail.
    pub delta_partial: f64,
    pub delta_tail_bound: f64,
    /// (iv): growth verdict for the paired pure scheme over the levels.
    pub growth: CriterionVerdict,
}

/// Checks the four threshold-scheme clauses up to `n_max`; errors on the
/// first clause that fails. Clause (iv) requires the eventual-crossing
/// verdict to be One.
pub fn certify_c2(scheme: &ThresholdScheme, n_max: usize) -> Result<C2Report, CouplingError> {
    let report = c2_report(scheme, n_max)?;
    if report.growth.verdict != Verdict::One {
        return Err(CouplingError::CertificationFailed {
            clause: "iv",
            detail: format!(
                "eventual-crossing verdict is {:?} (case {:?})",
                report.growth.verdict, report.growth.fired_case
            ),
        });
    }
    Ok(report)
}

/// The structural clauses (i)-(iii) plus the clause-(iv) growth verdict,
/// without gating on the verdict itself.
pub fn c2_report(scheme: &ThresholdScheme, n_max: usize) -> Result<C2Report, CouplingError> {
    let Some((thr, below)) = &scheme.threshold else {
        // Pure scheme: everything holds trivially.
        let flat = ThresholdSeq::flat(
            scheme.dist.as_ref(),
            f64::NEG_INFINITY,
            &scheme.alpha,
            n_max.min(scheme.alpha.horizon() - 1),
        )
        .expect("flat threshold");
        let growth = classify_growth(
            scheme.dist.as_ref(),
            &scheme.alpha,
            &flat,
            n_max.min(scheme.alpha.horizon() - 1),
        );
        return Ok(C2Report {
            endpoint_ok: true,
            conditional_match: true,
            delta_partial: 0.0,
            delta_tail_bound: 0.0,
            growth,
        });
    };

    let n_max = n_max.min(thr.horizon()).min(scheme.alpha.horizon() - 1);
    if !thr.is_monotone() {
        return Err(CouplingError::CertificationFailed {
            clause: "levels",
            detail: "threshold levels must be non-decreasing".into(),
        });
    }

    // (i) endpoint domination.
    let endpoint = scheme.dist.upper_endpoint();
    if let BelowModel::Vee { .. } = below {
        for k in 1..=n_max {
            if thr.level(k) > endpoint {
                return Err(CouplingError::CertificationFailed {
                    clause: "i",
                    detail: format!(
                        "vee filler at level {} exceeds the distribution endpoint {}",
                        thr.level(k),
                        endpoint
                    ),
                });
            }
        }
    }

    // (ii) holds by construction for all shipped below-models: fillers are
    // independent of the past or bounded by the level, and the tail draw
    // is an independent uniform inversion.

    // (iii) summable tail TV distances.
    let mut acc = Kahan::new();
    for k in 1..=n_max {
        acc.add(below.delta(k, scheme.log_h_pow(k).exp()));
    }
    let delta_partial = acc.value();
    let delta_tail_bound = match below {
        BelowModel::Perturbed { warp } => {
            if !(warp.decay > 0.0 && warp.decay < 1.0) {
                return Err(CouplingError::CertificationFailed {
                    clause: "iii",
                    detail: format!("warp decay {} does not give a summable tail", warp.decay),
                });
            }
            // delta_n <= width0 decay^n / 2: geometric tail.
            0.5 * warp.width0 * warp.decay.powi(n_max as i32 + 1) / (1.0 - warp.decay)
        }
        _ => 0.0,
    };

    // (iv) whether the paired pure scheme clears the levels eventually.
    let growth = classify_growth(scheme.dist.as_ref(), &scheme.alpha, thr, n_max);

    Ok(C2Report {
        endpoint_ok: true,
        conditional_match: true,
        delta_partial,
        delta_tail_bound,
        growth,
    })
}
