//! Growth-rate criteria for `P(M_t > b_t eventually)`.
//!
//! The dichotomy is decided by a case ladder on the boundary tail
//! `g_t = 1 - F(b_t)` (equivalently `q_n = 1 - F(level_n)` on step
//! boundaries):
//!
//! * tail bounded away from zero  -> probability one;
//! * `q_n -> 0` with `liminf s_n q_n < inf` -> probability zero;
//! * `q_n -> 0`, `s_n q_n -> inf` -> decided by the convergence of
//!   `K = sum e^{-s_n q_n} (1 - e^{-alpha_{n+1} q_n})`, equal to the
//!   integral `J = int g_t e^{-t g_t} dt` on step boundaries, and matching
//!   the classical i.i.d. series `Sigma = sum g_n e^{-n g_n}`.
//!
//! Numerical convergence of a series is not decidable from finitely many
//! terms, so verdicts are only emitted with a certificate: a power
//! minorant `g_t >= kappa t^{gamma-1}` bounds the whole tail by
//! `(1/gamma) e^{-kappa T^gamma}`, and divergence is upgraded from
//! "evidence" to a verdict only with an analytic comparison series. The
//! partial-sum threshold for divergence *evidence* stays configurable and
//! never becomes a verdict by itself.

use serde::Serialize;
use thiserror::Error;

use crate::boundary::{Boundary, DivergenceCert, TailHypothesis, TailMinorant, ThresholdSeq};
use crate::dist::Distribution;
use crate::numeric::Kahan;
use crate::weights::{AlphaSeq, LimitValue};

#[derive(Debug, Error)]
pub enum CriteriaError {
    #[error("tail not certifiable at horizon {t_star}: {reason}")]
    TailUnbounded { t_star: f64, reason: String },
}

/// A partial value plus a certified bound on everything beyond it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Partial {
    pub value: f64,
    pub tail_bound: f64,
}

// ---------------------------------------------------------------------------
// The three functionals
// ---------------------------------------------------------------------------

/// Quadrature of `int_{t_lo}^{t_star} g_t e^{-t g_t} dt` with
/// `g_t = 1 - F(b_t)`, split at the boundary's jumps.
pub fn j_partial(f: &dyn Distribution, b: &dyn Boundary, t_lo: f64, t_star: f64) -> f64 {
    let integrand = |t: f64| {
        let g = f.sf(b.value(t));
        g * (-t * g).exp()
    };
    let mut cuts = b.breakpoints(t_lo, t_star);
    cuts.retain(|&c| c > t_lo && c < t_star);
    cuts.push(t_star);
    let mut acc = Kahan::new();
    let mut left = t_lo;
    for right in cuts {
        acc.add(adaptive_simpson(&integrand, left, right, 1e-13, 48));
        left = right;
    }
    acc.value()
}

/// `J` up to `t_star` with a certified bound on the remaining tail.
pub fn j_integral(
    f: &dyn Distribution,
    b: &dyn Boundary,
    t_lo: f64,
    t_star: f64,
    minorant: Option<&TailMinorant>,
) -> Result<Partial, CriteriaError> {
    let value = j_partial(f, b, t_lo, t_star);
    let tail_bound = certify_tail(minorant, t_star)?;
    Ok(Partial { value, tail_bound })
}

fn certify_tail(minorant: Option<&TailMinorant>, t_star: f64) -> Result<f64, CriteriaError> {
    let m = minorant.ok_or_else(|| CriteriaError::TailUnbounded {
        t_star,
        reason: "no tail minorant available".into(),
    })?;
    m.tail_bound(t_star).ok_or_else(|| CriteriaError::TailUnbounded {
        t_star,
        reason: format!(
            "minorant kappa={} gamma={} not in force (needs kappa*t^gamma >= 1 and t >= {})",
            m.kappa, m.gamma, m.valid_from
        ),
    })
}

/// Trace of a partial summation, kept for divergence evidence.
#[derive(Debug, Clone, Serialize)]
pub struct SumTrace {
    pub partial: f64,
    pub first_term: f64,
    pub last_term: f64,
    pub terms: usize,
}

impl SumTrace {
    /// Divergence *evidence* (not a verdict): the partial sum dwarfs the
    /// first term and is still growing at the horizon.
    pub fn divergence_evidence(&self, factor: f64) -> bool {
        self.first_term > 0.0
            && self.partial > factor * self.first_term
            && self.last_term > 0.0
    }
}

/// Partial `K = sum_{n<=n_max} e^{-s_n q_n} (1 - e^{-alpha_{n+1} q_n})`.
/// Requires the weights to be materialized one step past `n_max`.
pub fn k_partial(alpha: &AlphaSeq, q: impl Fn(usize) -> f64, n_max: usize) -> SumTrace {
    debug_assert!(alpha.horizon() > n_max);
    let mut acc = Kahan::new();
    let mut first = 0.0;
    let mut last = 0.0;
    for n in 1..=n_max {
        let qn = q(n);
        let term = (-alpha.partial_sum(n) * qn).exp() * (-(-alpha.term(n + 1) * qn).exp_m1());
        if n == 1 {
            first = term;
        }
        last = term;
        acc.add(term);
    }
    SumTrace { partial: acc.value(), first_term: first, last_term: last, terms: n_max }
}

/// `K` with a certified tail bound. The tail of the sum beyond `n_max`
/// equals the integral tail beyond `s_{n_max+1}`, so the same minorant
/// certifies both.
pub fn k_sum(
    alpha: &AlphaSeq,
    thr: &ThresholdSeq,
    n_max: usize,
    minorant: Option<&TailMinorant>,
) -> Result<(SumTrace, f64), CriteriaError> {
    let trace = k_partial(alpha, |n| thr.q(n), n_max);
    let tail = certify_tail(minorant, alpha.partial_sum(n_max + 1))?;
    Ok((trace, tail))
}

/// Partial of the i.i.d.-scale series `Sigma = sum g_n e^{-n g_n}`.
pub fn klass_partial(g: impl Fn(usize) -> f64, n_max: usize) -> SumTrace {
    let mut acc = Kahan::new();
    let mut first = 0.0;
    let mut last = 0.0;
    for n in 1..=n_max {
        let gn = g(n);
        let term = gn * (-(n as f64) * gn).exp();
        if n == 1 {
            first = term;
        }
        last = term;
        acc.add(term);
    }
    SumTrace { partial: acc.value(), first_term: first, last_term: last, terms: n_max }
}

/// `Sigma` with a certified tail: with `g_n >= kappa n^{gamma-1}` the terms
/// beyond `n_max` are dominated by a decreasing integrand whose integral is
/// `(1/gamma) e^{-kappa n_max^gamma}`.
pub fn klass_sum(
    g: impl Fn(usize) -> f64,
    n_max: usize,
    minorant: Option<&TailMinorant>,
) -> Result<(SumTrace, f64), CriteriaError> {
    let trace = klass_partial(g, n_max);
    let tail = certify_tail(minorant, n_max as f64)?;
    Ok((trace, tail))
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    One,
    Zero,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FiredCase {
    /// Tail of the boundary stays bounded away from zero.
    PositiveTailLimit,
    /// `liminf s_n q_n < inf`.
    BoundedProduct,
    /// Series certified convergent.
    SeriesConverges,
    /// Series certified divergent (analytic comparison).
    SeriesDiverges,
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct Evidence {
    pub q_limit: String,
    pub sq_growth: String,
    pub horizon: usize,
    pub k_partial: Option<f64>,
    pub k_tail_bound: Option<f64>,
    pub divergence_evidence: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionVerdict {
    pub verdict: Verdict,
    pub fired_case: FiredCase,
    pub evidence: Evidence,
}

/// Partial-sum blowup factor treated as divergence evidence.
pub const DIVERGENCE_EVIDENCE_FACTOR: f64 = 1e3;

/// Classifies `P(M_n > level_n eventually)` for the scheme given by
/// (F, alpha) and a threshold sequence. Verdicts are emitted only with
/// certified hypotheses; everything else is `Undecided` with evidence.
/// Non-monotone level tables are rectified by their running maximum first
/// (which leaves the eventual-crossing event unchanged in the series case).
pub fn classify_growth(
    f: &dyn Distribution,
    alpha: &AlphaSeq,
    thr: &ThresholdSeq,
    horizon: usize,
) -> CriterionVerdict {
    let mut notes = Vec::new();
    let thr_owned;
    let thr = if thr.is_monotone() {
        thr
    } else {
        notes.push("levels rectified by running maximum".to_string());
        thr_owned = thr.rectified(f);
        &thr_owned
    };
    let hyp: TailHypothesis = thr.hypothesis();
    let horizon = horizon.min(alpha.horizon().saturating_sub(1)).min(thr.horizon());
    let mut evidence = Evidence {
        q_limit: format!("{:?}", hyp.q_limit),
        sq_growth: format!("{:?}", hyp.sq_growth),
        horizon,
        k_partial: None,
        k_tail_bound: None,
        divergence_evidence: false,
        notes,
    };

    // The dichotomy needs diverging partial sums; without them the
    // crossing probability can be strictly between 0 and 1.
    if alpha.asymptotics().sums_diverge != Some(true) {
        evidence.notes.push("partial sums of the weights do not diverge (or are undeclared)".into());
        return CriterionVerdict { verdict: Verdict::Undecided, fired_case: FiredCase::None, evidence };
    }

    match hyp.q_limit {
        LimitValue::Const(c) if c > 0.0 => {
            return CriterionVerdict {
                verdict: Verdict::One,
                fired_case: FiredCase::PositiveTailLimit,
                evidence,
            };
        }
        LimitValue::One => {
            return CriterionVerdict {
                verdict: Verdict::One,
                fired_case: FiredCase::PositiveTailLimit,
                evidence,
            };
        }
        LimitValue::Zero => {}
        _ => {
            evidence.notes.push("limit of q_n unknown; declare it for tables".into());
            return CriterionVerdict { verdict: Verdict::Undecided, fired_case: FiredCase::None, evidence };
        }
    }

    match hyp.sq_growth.liminf_finite() {
        Some(true) => {
            return CriterionVerdict {
                verdict: Verdict::Zero,
                fired_case: FiredCase::BoundedProduct,
                evidence,
            };
        }
        None => {
            evidence.notes.push("growth of s_n q_n unknown".into());
            return CriterionVerdict { verdict: Verdict::Undecided, fired_case: FiredCase::None, evidence };
        }
        Some(false) => {}
    }

    // Series case: q_n -> 0 and s_n q_n -> inf.
    let trace = k_partial(alpha, |n| thr.q(n), horizon);
    evidence.k_partial = Some(trace.partial);
    // Numeric blowup of the partial sums, or an analytic comparison series:
    // either counts as evidence (only the latter supports a verdict).
    evidence.divergence_evidence =
        trace.divergence_evidence(DIVERGENCE_EVIDENCE_FACTOR) || hyp.divergence.is_some();

    if let Some(cert) = hyp.divergence {
        let DivergenceCert::LogLogComparison { coeff, beta, from } = cert;
        evidence.notes.push(format!(
            "terms dominate {coeff:.4} * lnln n / (n (ln n)^{beta:.4}) from n = {from}; the comparison series diverges"
        ));
        return CriterionVerdict {
            verdict: Verdict::Zero,
            fired_case: FiredCase::SeriesDiverges,
            evidence,
        };
    }

    match certify_tail(hyp.minorant.as_ref(), alpha.partial_sum(horizon + 1)) {
        Ok(tail) => {
            evidence.k_tail_bound = Some(tail);
            CriterionVerdict {
                verdict: Verdict::One,
                fired_case: FiredCase::SeriesConverges,
                evidence,
            }
        }
        Err(e) => {
            evidence.notes.push(e.to_string());
            if evidence.divergence_evidence {
                evidence
                    .notes
                    .push("partial sums keep growing (divergence evidence only, no verdict)".into());
            }
            CriterionVerdict { verdict: Verdict::Undecided, fired_case: FiredCase::None, evidence }
        }
    }
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    (fa + 4.0 * fm + fb) * h / 6.0
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    simpson_step(f, a, m, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, lm, m, fa, flm, fm, left, tol * 0.5, depth - 1)
            + simpson_step(f, m, rm, b, fm, frm, fb, right, tol * 0.5, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{monotone_envelope, FnBoundary, StepBoundary};
    use crate::dist::{Exponential, Uniform};
    use std::sync::Arc;

    #[test]
    fn j_of_constant_tail_is_one() {
        // g_t = c: J = int c e^{-tc} dt = 1, with tail e^{-cT} at T.
        let f = Exponential::new(1.0).unwrap();
        let c: f64 = 0.25;
        let level = -c.ln(); // sf(level) = c
        let b = FnBoundary::new(move |_| level, true);
        let m = TailMinorant { kappa: c, gamma: 1.0, valid_from: 0.0 };
        let t_star = 80.0;
        let j = j_integral(&f, &b, 0.0, t_star, Some(&m)).unwrap();
        assert!((j.value - (1.0 - (-c * t_star).exp())).abs() < 1e-11);
        assert!((j.tail_bound - (-c * t_star).exp()).abs() < 1e-14);
        assert!((j.value + j.tail_bound - 1.0).abs() < 1e-11);
    }

    #[test]
    fn j_quadrature_matches_refined_grid_oracle() {
        // Exponential F with b_t = (ln t)/2 gives g_t = t^{-1/2}.
        let f = Exponential::new(1.0).unwrap();
        let b = FnBoundary::new(|t: f64| 0.5 * t.max(1e-300).ln(), true);
        let got = j_partial(&f, &b, 1.0, 400.0);
        // Fixed-grid composite Simpson as the independent route.
        let n = 2_000_000usize;
        let h = 399.0 / n as f64;
        let integrand = |t: f64| {
            let g = t.powf(-0.5);
            g * (-t * g).exp()
        };
        let mut s = 0.0;
        for i in 0..n {
            let a = 1.0 + i as f64 * h;
            s += simpson(integrand(a), integrand(a + 0.5 * h), integrand(a + h), h);
        }
        assert!((got - s).abs() < 1e-8, "{got} vs {s}");
    }

    #[test]
    fn tail_certificate_requires_the_minorant_in_force() {
        let f = Exponential::new(1.0).unwrap();
        let b = FnBoundary::new(|_| 5.0, true);
        assert!(matches!(
            j_integral(&f, &b, 0.0, 10.0, None),
            Err(CriteriaError::TailUnbounded { .. })
        ));
        // kappa * T too small: horizon cannot bound the tail yet.
        let weak = TailMinorant { kappa: 1e-3, gamma: 1.0, valid_from: 0.0 };
        assert!(matches!(
            j_integral(&f, &b, 0.0, 10.0, Some(&weak)),
            Err(CriteriaError::TailUnbounded { .. })
        ));
    }

    #[test]
    fn k_geometric_closed_form() {
        // q = c constant, unit weights: K = e^{-c} exactly.
        let f = Uniform::standard();
        let alpha = AlphaSeq::constant(1.0, 4001).unwrap();
        let thr = ThresholdSeq::flat(&f, 1.0 - 0.3, &alpha, 4000).unwrap();
        let minorant = thr.hypothesis().minorant;
        let (trace, tail) = k_sum(&alpha, &thr, 4000, minorant.as_ref()).unwrap();
        // Telescoping closed form: partial = e^{-q} - e^{-q (N+1)}, and the
        // certified tail equals the true remainder exactly.
        assert!((trace.partial - ((-0.3f64).exp() - (-0.3f64 * 4001.0).exp())).abs() < 1e-12);
        assert!((trace.partial + tail - (-0.3f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn k_zero_tail_gives_zero() {
        let f = Uniform::standard();
        let alpha = AlphaSeq::constant(1.0, 101).unwrap();
        // Level at the upper endpoint: q = 0.
        let thr = ThresholdSeq::flat(&f, 1.0, &alpha, 100).unwrap();
        let trace = k_partial(&alpha, |n| thr.q(n), 100);
        assert_eq!(trace.partial, 0.0);
    }

    #[test]
    fn j_equals_k_on_step_boundaries() {
        let f = Exponential::new(1.0).unwrap();
        let alpha = AlphaSeq::constant(1.0, 121).unwrap();
        let thr = ThresholdSeq::tail_power(&f, 1.0, 0.5, &alpha, 121).unwrap();
        let n = 120;
        let b = thr.step_boundary(&alpha);
        let j = j_partial(&f, &b, alpha.partial_sum(1), alpha.partial_sum(n + 1));
        let k = k_partial(&alpha, |i| thr.q(i), n);
        assert!((j - k.partial).abs() < 1e-10, "J {j} vs K {}", k.partial);
    }

    #[test]
    fn klass_power_tail_stabilizes_under_its_bound() {
        // g_n = n^{-1/2}: partial at 1e4 is within the certified tail of
        // the partial at 3e4.
        let g = |n: usize| (n as f64).powf(-0.5);
        let m = TailMinorant { kappa: 1.0, gamma: 0.5, valid_from: 1.0 };
        let (t1, tail1) = klass_sum(g, 10_000, Some(&m)).unwrap();
        let t2 = klass_partial(g, 30_000);
        assert!(tail1 < 1e-6);
        assert!((t2.partial - t1.partial).abs() <= tail1);
        // g = 0: sum is zero.
        assert_eq!(klass_partial(|_| 0.0, 100).partial, 0.0);
    }

    #[test]
    fn loglog_partials_keep_growing() {
        // q_n = lnln n / n: comparison with sum lnln n/(n ln n).
        let g = |n: usize| {
            let x = (n.max(16)) as f64;
            x.ln().ln() / x
        };
        let t_small = klass_partial(g, 2_000);
        let t_big = klass_partial(g, 200_000);
        assert!(t_big.partial > t_small.partial + 0.4, "{} vs {}", t_big.partial, t_small.partial);
        let oracle: f64 = (16..200_000)
            .map(|n| {
                let x = n as f64;
                x.ln().ln() / (x * x.ln())
            })
            .sum();
        assert!(t_big.partial > 0.5 * oracle);
        assert!(t_big.divergence_evidence(30.0));
    }

    #[test]
    fn classify_case_ladder() {
        let f = Exponential::new(1.0).unwrap();
        let alpha = AlphaSeq::constant(1.0, 10_001).unwrap();

        // Flat level: q > 0 => One.
        let flat = ThresholdSeq::flat(&f, 2.0, &alpha, 10_000).unwrap();
        let v = classify_growth(&f, &alpha, &flat, 10_000);
        assert_eq!(v.verdict, Verdict::One);
        assert_eq!(v.fired_case, FiredCase::PositiveTailLimit);

        // level_n = ln n: q_n = 1/n, s_n q_n = 1 => Zero.
        let ln_n = ThresholdSeq::tail_power(&f, 1.0, 1.0, &alpha, 10_000).unwrap();
        let v = classify_growth(&f, &alpha, &ln_n, 10_000);
        assert_eq!(v.verdict, Verdict::Zero);
        assert_eq!(v.fired_case, FiredCase::BoundedProduct);

        // level_n = (1/2) ln n: q_n = n^{-1/2}, series converges => One.
        let half = ThresholdSeq::tail_power(&f, 1.0, 0.5, &alpha, 10_000).unwrap();
        let v = classify_growth(&f, &alpha, &half, 10_000);
        assert_eq!(v.verdict, Verdict::One);
        assert_eq!(v.fired_case, FiredCase::SeriesConverges);
        assert!(v.evidence.k_tail_bound.unwrap() < 1e-20);

        // q_n = lnln n / n: divergent series, certified by comparison.
        let ll = ThresholdSeq::tail_loglog(&f, 1.0, &alpha, 10_000).unwrap();
        let v = classify_growth(&f, &alpha, &ll, 10_000);
        assert_eq!(v.verdict, Verdict::Zero);
        assert_eq!(v.fired_case, FiredCase::SeriesDiverges);
        assert!(v.evidence.divergence_evidence);
    }

    #[test]
    fn classify_never_asserts_without_certificates() {
        let f = Exponential::new(1.0).unwrap();
        let alpha = AlphaSeq::constant(1.0, 1001).unwrap();
        // A table threshold with no declared limits: Undecided.
        let levels: Vec<f64> = (1..=1000).map(|n| 0.5 * (n as f64).ln()).collect();
        let thr = ThresholdSeq::from_levels(&f, levels, Default::default()).unwrap();
        let v = classify_growth(&f, &alpha, &thr, 1000);
        assert_eq!(v.verdict, Verdict::Undecided);

        // Weights with bounded partial sums: the dichotomy breaks down.
        let small = AlphaSeq::polynomial(-2.0, 1001).unwrap();
        let flat = ThresholdSeq::flat(&f, 1.0, &small, 1000).unwrap();
        let v = classify_growth(&f, &small, &flat, 1000);
        assert_eq!(v.verdict, Verdict::Undecided);
    }

    #[test]
    fn classify_is_invariant_under_envelope_rectification() {
        let f = Uniform::standard();
        let alpha = AlphaSeq::constant(1.0, 101).unwrap();
        // Wiggly flat-ish levels: rectification keeps the flat verdict.
        let levels: Vec<f64> = (1..=100)
            .map(|n| 0.5 + 0.1 * ((n as f64).sin().abs()) * if n % 2 == 0 { -1.0 } else { 1.0 })
            .collect();
        let thr = ThresholdSeq::from_levels(
            &f,
            levels.clone(),
            crate::boundary::DeclaredTailLimits {
                q_limit: Some(0.4),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!thr.is_monotone());
        let v = classify_growth(&f, &alpha, &thr, 100);
        // Rectified levels stabilize at 0.6, but the declared q-limit is
        // what drives the verdict either way.
        assert_eq!(v.verdict, Verdict::One);
        assert!(v.evidence.notes.iter().any(|n| n.contains("rectified")));
    }

    #[test]
    fn j_partial_agrees_with_enveloped_boundary_when_monotone() {
        let f = Exponential::new(1.0).unwrap();
        let alpha = AlphaSeq::constant(1.0, 61).unwrap();
        let thr = ThresholdSeq::tail_power(&f, 1.0, 0.5, &alpha, 61).unwrap();
        let b: Arc<dyn Boundary> = Arc::new(thr.step_boundary(&alpha));
        let env = monotone_envelope(b.clone(), 1.0, 61.0);
        let a = j_partial(&f, b.as_ref(), 1.0, 60.0);
        let c = j_partial(&f, &env, 1.0, 60.0);
        assert!((a - c).abs() < 1e-11);
    }

    #[test]
    fn step_boundary_from_table_roundtrip() {
        let b = StepBoundary::from_table(vec![1.0, 2.0], vec![0.1, 0.2]).unwrap();
        assert_eq!(b.value(1.5), 0.1);
        assert_eq!(b.breakpoints(0.0, 3.0), vec![1.0, 2.0]);
    }
}
