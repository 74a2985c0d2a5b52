//! Exact joint record probabilities for flat-threshold schemes with
//! independent observations and exact power tails (`delta_n = 0`).
//!
//! With `h = F(level)` the marginal record probability decomposes as
//! `P(I_m = 1) = (alpha_m/s_m)(1 - h^{s_m}) + b_m` and the joint one as
//! `P1 + b_m * alpha_n (1 - h^{s_n - s_m})/(s_n - s_m) + c_{m,n}`, with
//!
//! ```text
//! P1 = alpha_m alpha_n / (s_n - s_m) * ((1 - h^{s_m})/s_m - (1 - h^{s_n})/s_n)
//! ```
//!
//! The remainders `b_m = P(I_m = 1, M_m <= level)` and
//! `c_{m,n} = P(I_m = I_n = 1, M_n <= level)` depend on the scheme below
//! the threshold and are generally only bounded by `h^{s_m}` resp.
//! `h^{s_n}`, so the module is interval-first: callers that know them
//! exactly (pure scheme, vee model with constant filler) inject the values
//! and every interval collapses to a point.

use serde::Serialize;
use thiserror::Error;

use crate::numeric::{one_minus_pow, pow_from_log};
use crate::weights::AlphaSeq;

#[derive(Debug, Error)]
pub enum JointError {
    #[error("need n > m >= 1, got m = {0}, n = {1}")]
    IndexOrder(usize, usize),
    #[error("h must lie in [0, 1), got {0}")]
    BadTail(f64),
    #[error("marginal lower bound vanishes at m = {0}; h is too close to 1")]
    DegenerateDenominator(usize),
}

/// Closed interval [lo, hi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi + 1e-15);
        Interval { lo: lo.min(hi), hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Largest deviation of the interval from 1.
    pub fn halfwidth_around_one(&self) -> f64 {
        (self.hi - 1.0).max(1.0 - self.lo).max(0.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JointRecordLaw {
    pub m: usize,
    pub n: usize,
    pub h: f64,
    /// P(I_m = I_n = 1, M_m > level): exact.
    pub p1: f64,
    pub b_m: Interval,
    pub c_mn: Interval,
    /// P(I_m = I_n = 1, M_m <= level < M_n) = b_m * shifted marginal.
    pub p2: Interval,
    pub marginal_m: Interval,
    pub marginal_n: Interval,
    pub joint: Interval,
    pub ratio: Interval,
}

/// Exact P1 and interval bounds for everything `b_m`/`c_{m,n}`-dependent.
/// `b_m_known`/`c_mn_known` collapse the respective intervals when the
/// scheme model provides exact values.
pub fn joint_record_law(
    alpha: &AlphaSeq,
    h: f64,
    m: usize,
    n: usize,
    b_m_known: Option<f64>,
    c_mn_known: Option<f64>,
) -> Result<JointRecordLaw, JointError> {
    if n <= m || m == 0 {
        return Err(JointError::IndexOrder(m, n));
    }
    if !(0.0..1.0).contains(&h) {
        return Err(JointError::BadTail(h));
    }
    let log_h = if h == 0.0 { f64::NEG_INFINITY } else { h.ln() };
    let (sm, sn) = (alpha.partial_sum(m), alpha.partial_sum(n));
    let (am, an) = (alpha.term(m), alpha.term(n));

    let p1 = if h == 0.0 {
        // The bracket telescopes to 1/(s_m s_n) exactly.
        am * an / (sm * sn)
    } else {
        am * an / (sn - sm)
            * (one_minus_pow(log_h, sm) / sm - one_minus_pow(log_h, sn) / sn)
    };
    let shift_factor = an * one_minus_pow(log_h, sn - sm) / (sn - sm);

    let b_m = match b_m_known {
        Some(v) => Interval::point(v),
        None => Interval::new(0.0, pow_from_log(log_h, sm)),
    };
    let c_mn = match c_mn_known {
        Some(v) => Interval::point(v),
        None => Interval::new(0.0, pow_from_log(log_h, sn)),
    };
    let b_n = Interval::new(0.0, pow_from_log(log_h, sn));

    let p2 = Interval::new(b_m.lo * shift_factor, b_m.hi * shift_factor);
    let joint = Interval::new(p1 + p2.lo + c_mn.lo, p1 + p2.hi + c_mn.hi);
    let marg1 = am / sm * one_minus_pow(log_h, sm);
    let margn1 = an / sn * one_minus_pow(log_h, sn);
    let marginal_m = Interval::new(marg1 + b_m.lo, marg1 + b_m.hi);
    let marginal_n = Interval::new(margn1 + b_n.lo, margn1 + b_n.hi);
    if marginal_m.lo <= 0.0 {
        return Err(JointError::DegenerateDenominator(m));
    }
    if marginal_n.lo <= 0.0 {
        return Err(JointError::DegenerateDenominator(n));
    }

    // ratio = joint / (marginal_m * marginal_n) over the (b_m, c, b_n) box.
    // For fixed b_m the ratio is monotone in c and in b_n; in b_m the
    // derivative sign of (P1 + A b + c)/(B + b) is constant. Corner
    // evaluation is therefore exact for the joint worst case.
    let ratio = if h == 0.0 {
        Interval::point(1.0)
    } else {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &bm in &[b_m.lo, b_m.hi] {
            for &c in &[c_mn.lo, c_mn.hi] {
                for &bn in &[b_n.lo, b_n.hi] {
                    let r = (p1 + bm * shift_factor + c) / ((marg1 + bm) * (margn1 + bn));
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
            }
        }
        Interval::new(lo, hi)
    };
    Ok(JointRecordLaw {
        m,
        n,
        h,
        p1,
        b_m,
        c_mn,
        p2,
        marginal_m,
        marginal_n,
        joint,
        ratio,
    })
}

/// The `b_m` value of the pure scheme (no threshold effect on records):
/// record indicators are independent of the running maximum, so
/// `b_m = p_m h^{s_m}`.
pub fn pure_scheme_b(alpha: &AlphaSeq, h: f64, m: usize) -> f64 {
    let log_h = if h == 0.0 { f64::NEG_INFINITY } else { h.ln() };
    alpha.term(m) / alpha.partial_sum(m) * pow_from_log(log_h, alpha.partial_sum(m))
}

/// The pure-scheme `c_{m,n} = p_m p_n h^{s_n}`.
pub fn pure_scheme_c(alpha: &AlphaSeq, h: f64, m: usize, n: usize) -> f64 {
    let log_h = if h == 0.0 { f64::NEG_INFINITY } else { h.ln() };
    let pm = alpha.term(m) / alpha.partial_sum(m);
    let pn = alpha.term(n) / alpha.partial_sum(n);
    pm * pn * pow_from_log(log_h, alpha.partial_sum(n))
}

/// The vanishing-remainder condition value `(s_k^2/alpha_k)(alpha_k v 1)
/// h^{s_k}`, evaluated in log space.
pub fn theorem3_condition(alpha: &AlphaSeq, h: f64, k: usize) -> f64 {
    if h == 0.0 {
        return 0.0;
    }
    let sk = alpha.partial_sum(k);
    let ak = alpha.term(k);
    (2.0 * sk.ln() - ak.ln() + ak.max(1.0).ln() + sk * h.ln()).exp()
}

/// Certified bounds for the conditional-to-marginal record ratio
/// `P(I_n = 1 | I_m = 1) / P(I_n = 1)`.
#[derive(Debug, Clone, Serialize)]
pub struct RatioBound {
    pub interval: Interval,
    /// Analytic mean-value bound on |ratio - 1| mirroring the uniform
    /// pairwise-independence estimate; always >= the interval half-width.
    pub analytic_bound: f64,
}

pub fn ratio_bound(alpha: &AlphaSeq, h: f64, m: usize, n: usize) -> Result<RatioBound, JointError> {
    let law = joint_record_law(alpha, h, m, n, None, None)?;
    let analytic_bound = lemma_style_bound(alpha, h, m, n).unwrap_or(f64::INFINITY);
    Ok(RatioBound { interval: law.ratio, analytic_bound })
}

/// Mean-value bound on |ratio - 1| assembled from the scaled components:
/// the P1 deviation `h^{s_m} + h^{s_n} + max |(1 + s ln h) h^s|`, the P2
/// term `|ln h| max(s^2 h^s) / alpha_m`, the c term, and the marginal
/// product deviation. The interior extrema of `(1+s ln h)h^s` and
/// `s^2 h^s` sit at `s = -2/ln h`, so a max over endpoints plus that
/// critical value bounds each mean-value term.
fn lemma_style_bound(alpha: &AlphaSeq, h: f64, m: usize, n: usize) -> Option<f64> {
    if h == 0.0 {
        return Some(0.0);
    }
    let lam = h.ln();
    let (sm, sn) = (alpha.partial_sum(m), alpha.partial_sum(n));
    let (am, an) = (alpha.term(m), alpha.term(n));
    let (hm, hn) = ((sm * lam).exp(), (sn * lam).exp());

    let psi = |s: f64| ((1.0 + s * lam) * (s * lam).exp()).abs();
    let crit = -2.0 / lam;
    let mut m1 = psi(sm).max(psi(sn));
    if sm <= crit && crit <= sn {
        m1 = m1.max((-2.0f64).exp());
    }
    let phi2 = |s: f64| s * s * (s * lam).exp();
    let mut m2 = phi2(sm).max(phi2(sn));
    if sm <= crit && crit <= sn {
        m2 = m2.max(crit * crit * (-2.0f64).exp());
    }
    let dev_joint = hm + hn + m1
        + lam.abs() * m2 / am
        + (sm * (0.5 * sm * lam).exp() / am) * (sn * (0.5 * sn * lam).exp() / an);
    let prod_hi = (1.0 + hm * sm / am) * (1.0 + hn * sn / an) - 1.0;
    let prod_lo = (1.0 - hm * sm / am) * (1.0 - hn * sn / an);
    if prod_lo <= 0.0 {
        return None;
    }
    let dev_prod = prod_hi.max(1.0 - prod_lo);
    Some((dev_joint + dev_prod) / prod_lo)
}

/// Row of the uniform-decay table: certified sup of the ratio deviation
/// over all pairs `k <= m < n <= n_max`.
#[derive(Debug, Clone, Serialize)]
pub struct SupDecayRow {
    pub k: usize,
    pub sup_halfwidth: f64,
    pub sup_analytic_bound: f64,
    pub condition_value: f64,
}

/// Certified upper bounds for the pairwise-independence supremum,
/// restricted to `n <= n_max`, per requested k.
pub fn sup_ratio_decay(
    alpha: &AlphaSeq,
    h: f64,
    k_list: &[usize],
    n_max: usize,
) -> Result<Vec<SupDecayRow>, JointError> {
    let k_min = *k_list.iter().min().expect("non-empty k list");
    // sup over n for each m, then suffix maxima over m.
    let mut per_m_half = vec![0.0f64; n_max + 1];
    let mut per_m_bound = vec![0.0f64; n_max + 1];
    for m in k_min..n_max {
        let mut best_half = 0.0f64;
        let mut best_bound = 0.0f64;
        for n in (m + 1)..=n_max {
            let law = joint_record_law(alpha, h, m, n, None, None)?;
            best_half = best_half.max(law.ratio.halfwidth_around_one());
            if let Some(b) = lemma_style_bound(alpha, h, m, n) {
                best_bound = best_bound.max(b);
            } else {
                return Err(JointError::DegenerateDenominator(m));
            }
        }
        per_m_half[m] = best_half;
        per_m_bound[m] = best_bound;
    }
    let mut rows = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let sup_halfwidth = per_m_half[k..n_max]
            .iter()
            .cloned()
            .fold(0.0f64, f64::max);
        let sup_analytic_bound = per_m_bound[k..n_max]
            .iter()
            .cloned()
            .fold(0.0f64, f64::max);
        rows.push(SupDecayRow {
            k,
            sup_halfwidth,
            sup_analytic_bound,
            condition_value: theorem3_condition(alpha, h, k),
        });
    }
    Ok(rows)
}
