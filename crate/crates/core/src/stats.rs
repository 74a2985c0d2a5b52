//! Monte Carlo estimators and statistical tests used by the verification
//! suites: binomial-error indicator estimates, chi-square 2x2 independence
//! tests, one- and two-sample Kolmogorov-Smirnov statistics, total-variation
//! comparison of histograms against exact laws, and the deterministic
//! normal-approximation diagnostic built on the exact count pmf.

use rayon::prelude::*;
use statrs::function::erf;
use thiserror::Error;

use crate::scheme::{self, Trajectory};
use crate::weights::AlphaSeq;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("expected cell count {0:.2} below 5; enlarge the sample")]
    CellTooSmall(f64),
    #[error("support mismatch: histogram has {0} cells, pmf {1}")]
    SupportMismatch(usize, usize),
    #[error("wrong regime: {0}")]
    WrongRegime(String),
}

/// Standard normal cdf.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erf::erfc(-z / std::f64::consts::SQRT_2)
}

/// A Monte Carlo point estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct McEstimate {
    pub point: f64,
    pub std_error: f64,
    pub replications: u64,
    pub seed: u64,
}

impl McEstimate {
    /// |point - truth| measured in standard errors (capped at a tiny floor
    /// so exact zero-variance estimates still compare).
    pub fn deviations_from(&self, truth: f64) -> f64 {
        (self.point - truth).abs() / self.std_error.max(1e-12)
    }
}

/// Mean of a boolean predicate over seeded replications.
pub fn estimate_probability<F>(reps: u64, seed: u64, predicate: F) -> McEstimate
where
    F: Fn(u64) -> bool + Sync,
{
    let hits: u64 = (0..reps)
        .into_par_iter()
        .map(|rep| u64::from(predicate(rep)))
        .sum();
    let p = hits as f64 / reps as f64;
    McEstimate {
        point: p,
        std_error: (p * (1.0 - p) / reps as f64).sqrt(),
        replications: reps,
        seed,
    }
}

/// Mean of a trajectory predicate over replications of a sampler.
pub fn estimate_indicator_prob<S, P>(sampler: S, predicate: P, reps: u64, seed: u64) -> McEstimate
where
    S: Fn(u64) -> Trajectory + Sync,
    P: Fn(&Trajectory) -> bool + Sync,
{
    estimate_probability(reps, seed, |rep| predicate(&sampler(rep)))
}

// ---------------------------------------------------------------------------
// Test reports
// ---------------------------------------------------------------------------

/// A test statistic against its critical values at 10%, 5% and 1%.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TestReport {
    pub statistic: f64,
    pub critical: [f64; 3],
    pub reject: [bool; 3],
    pub sample_size: usize,
}

impl TestReport {
    fn new(statistic: f64, critical: [f64; 3], sample_size: usize) -> Self {
        TestReport {
            statistic,
            critical,
            reject: [
                statistic > critical[0],
                statistic > critical[1],
                statistic > critical[2],
            ],
            sample_size,
        }
    }

    pub fn reject_at_5pct(&self) -> bool {
        self.reject[1]
    }
}

/// Asymptotic Kolmogorov critical coefficients at 10% / 5% / 1%.
const KS_COEFF: [f64; 3] = [1.22385, 1.35810, 1.62762];
/// Chi-square critical values with one degree of freedom.
const CHI2_1DF: [f64; 3] = [2.705_543_454, 3.841_458_821, 6.634_896_601];

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov
// ---------------------------------------------------------------------------

/// sup_x |F_hat(x) - cdf(x)| for a sample against a reference cdf.
pub fn ks_statistic_one_sample<C: Fn(f64) -> f64>(sample: &[f64], cdf: C) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let c = cdf(x);
        sup = sup.max((i as f64 / n - c).abs()).max(((i + 1) as f64 / n - c).abs());
    }
    sup
}

pub fn ks_test_one_sample<C: Fn(f64) -> f64>(sample: &[f64], cdf: C) -> TestReport {
    let d = ks_statistic_one_sample(sample, cdf);
    let root = (sample.len() as f64).sqrt();
    TestReport::new(d, KS_COEFF.map(|c| c / root), sample.len())
}

/// Two-sample KS statistic.
pub fn ks_statistic_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|u, v| u.partial_cmp(v).unwrap());
    ys.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while i < n && j < m {
        let x = xs[i].min(ys[j]);
        while i < n && xs[i] <= x {
            i += 1;
        }
        while j < m && ys[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    sup
}

pub fn ks_test_two_sample(a: &[f64], b: &[f64]) -> TestReport {
    let d = ks_statistic_two_sample(a, b);
    let scale = ((a.len() + b.len()) as f64 / (a.len() as f64 * b.len() as f64)).sqrt();
    TestReport::new(d, KS_COEFF.map(|c| c * scale), a.len() + b.len())
}

// ---------------------------------------------------------------------------
// Chi-square pairwise independence
// ---------------------------------------------------------------------------

/// Packs the first `n_max <= 64` record indicators of a trajectory.
pub fn indicator_mask(t: &Trajectory, n_max: usize) -> u64 {
    debug_assert!(n_max <= 64 && n_max <= t.horizon());
    let mut m = 0u64;
    for k in 0..n_max {
        if t.indicators[k] {
            m |= 1u64 << k;
        }
    }
    m
}

/// Pearson chi-square (1 d.o.f.) for the 2x2 table of indicators (m, n)
/// over replication masks. Errors when any expected cell is below 5.
pub fn chi2_pair(masks: &[u64], m: usize, n: usize) -> Result<TestReport, StatsError> {
    let bm = 1u64 << (m - 1);
    let bn = 1u64 << (n - 1);
    let mut counts = [0u64; 4]; // [!m!n, m!n, !mn, mn]
    for &mask in masks {
        let idx = usize::from(mask & bm != 0) + 2 * usize::from(mask & bn != 0);
        counts[idx] += 1;
    }
    let total = masks.len() as f64;
    let pm = (counts[1] + counts[3]) as f64 / total;
    let pn = (counts[2] + counts[3]) as f64 / total;
    let probs = [
        (1.0 - pm) * (1.0 - pn),
        pm * (1.0 - pn),
        (1.0 - pm) * pn,
        pm * pn,
    ];
    let mut stat = 0.0;
    for (o, p) in counts.iter().zip(probs) {
        let e = p * total;
        if e < 5.0 {
            return Err(StatsError::CellTooSmall(e));
        }
        let d = *o as f64 - e;
        stat += d * d / e;
    }
    Ok(TestReport::new(stat, CHI2_1DF, masks.len()))
}

/// Chi-square reports for a list of index pairs, plus the 5%-level
/// rejection rate across the family.
pub fn chi2_pairwise(
    masks: &[u64],
    pairs: &[(usize, usize)],
) -> Result<(Vec<TestReport>, f64), StatsError> {
    let reports: Result<Vec<_>, _> = pairs.iter().map(|&(m, n)| chi2_pair(masks, m, n)).collect();
    let reports = reports?;
    let rate = reports.iter().filter(|r| r.reject_at_5pct()).count() as f64 / reports.len() as f64;
    Ok((reports, rate))
}

// ---------------------------------------------------------------------------
// Histogram vs exact pmf
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TvReport {
    pub tv: f64,
    /// Sampling-error allowance 4 sqrt(cells) / sqrt(replications).
    pub bound: f64,
    pub replications: u64,
}

/// Total variation between an empirical histogram (counts indexed like the
/// pmf) and an exact pmf.
pub fn pmf_tv_compare(hist: &[u64], pmf: &[f64]) -> Result<TvReport, StatsError> {
    if hist.len() != pmf.len() {
        return Err(StatsError::SupportMismatch(hist.len(), pmf.len()));
    }
    let reps: u64 = hist.iter().sum();
    let total = reps as f64;
    let tv = 0.5
        * hist
            .iter()
            .zip(pmf)
            .map(|(&h, &p)| (h as f64 / total - p).abs())
            .sum::<f64>();
    Ok(TvReport {
        tv,
        bound: 4.0 * (pmf.len() as f64).sqrt() / total.sqrt(),
        replications: reps,
    })
}

// ---------------------------------------------------------------------------
// Normal-approximation diagnostic (deterministic)
// ---------------------------------------------------------------------------

/// KS distance between the exact standardized count law at each horizon and
/// the standard normal. No Monte Carlo: the pmf route is exact, so the
/// distances are reproducible bit for bit.
pub fn clt_diagnostic(
    alpha: &AlphaSeq,
    horizons: &[usize],
) -> Result<Vec<(usize, f64)>, StatsError> {
    let asy = alpha.asymptotics();
    match (asy.sums_diverge, asy.v_finite) {
        (Some(true), Some(false)) => {}
        (Some(true), Some(true)) => {
            return Err(StatsError::WrongRegime(
                "count variance stays bounded; the centered count converges instead".into(),
            ))
        }
        (Some(false), _) => {
            return Err(StatsError::WrongRegime(
                "partial sums stay bounded; records stop".into(),
            ))
        }
        _ => return Err(StatsError::WrongRegime("undeclared limits".into())),
    }
    let mut out = Vec::with_capacity(horizons.len());
    for &n in horizons {
        let pmf = scheme::exact_count_pmf(alpha, n)
            .map_err(|e| StatsError::WrongRegime(e.to_string()))?;
        let law = scheme::record_law_summary(alpha, n);
        let (mean, sd) = (law.mean[n - 1], law.variance[n - 1].sqrt());
        if sd == 0.0 {
            return Err(StatsError::WrongRegime(format!(
                "count variance vanishes at n = {n}; standardization is degenerate"
            )));
        }
        let mut sup = 0.0f64;
        let mut cum = 0.0f64;
        for (k, &p) in pmf.iter().enumerate() {
            if p == 0.0 && cum == 0.0 {
                continue;
            }
            let z = (k as f64 - mean) / sd;
            let phi = normal_cdf(z);
            sup = sup.max((cum - phi).abs());
            cum += p;
            sup = sup.max((cum - phi).abs());
        }
        out.push((n, sup));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Almost-sure convergence diagnostics
// ---------------------------------------------------------------------------

/// Empirical quantiles of suffix suprema: consistent-with-a.s.-convergence
/// means the quantiles shrink as the suffix start grows.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SupDecayReport {
    pub suffix_starts: Vec<usize>,
    /// Per suffix start: [q25, median, q75, q90] of sup |N_n/E_n - 1|.
    pub ratio_quantiles: Vec<[f64; 4]>,
    /// Per suffix start: quantiles of sup |N_n - E_n| / ln s_n.
    pub lognorm_quantiles: Vec<[f64; 4]>,
}

/// Suffix-sup decay of the two normalized deviations, from `reps`
/// trajectories of `sampler`. Suffix starts default to horizon/10, /4, /2.
pub fn as_convergence_diagnostic<S>(
    sampler: S,
    alpha: &AlphaSeq,
    horizon: usize,
    reps: u64,
) -> SupDecayReport
where
    S: Fn(u64) -> Trajectory + Sync,
{
    let starts = vec![horizon / 10, horizon / 4, horizon / 2];
    let law = scheme::record_law_summary(alpha, horizon);
    let per_rep: Vec<(Vec<f64>, Vec<f64>)> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let t = sampler(rep);
            let mut ratio_sup = vec![0.0f64; starts.len()];
            let mut log_sup = vec![0.0f64; starts.len()];
            let mut r = 0.0f64;
            let mut l = 0.0f64;
            // Scan suffixes from the horizon downwards, recording the
            // running sup when passing each checkpoint.
            let mut next = starts.len();
            for n in (1..=horizon).rev() {
                let e = law.mean[n - 1];
                r = r.max((t.counts[n - 1] as f64 / e - 1.0).abs());
                let ls = alpha.partial_sum(n).ln();
                if ls > 0.0 {
                    l = l.max((t.counts[n - 1] as f64 - e).abs() / ls);
                }
                while next > 0 && n == starts[next - 1] {
                    ratio_sup[next - 1] = r;
                    log_sup[next - 1] = l;
                    next -= 1;
                }
            }
            (ratio_sup, log_sup)
        })
        .collect();
    let mut ratio_quantiles = Vec::new();
    let mut lognorm_quantiles = Vec::new();
    for i in 0..starts.len() {
        let mut rs: Vec<f64> = per_rep.iter().map(|p| p.0[i]).collect();
        let mut ls: Vec<f64> = per_rep.iter().map(|p| p.1[i]).collect();
        ratio_quantiles.push(quartiles(&mut rs));
        lognorm_quantiles.push(quartiles(&mut ls));
    }
    SupDecayReport {
        suffix_starts: starts,
        ratio_quantiles,
        lognorm_quantiles,
    }
}

fn quartiles(v: &mut [f64]) -> [f64; 4] {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let at = |q: f64| v[((q * v.len() as f64) as usize).min(v.len() - 1)];
    [at(0.25), at(0.5), at(0.75), at(0.9)]
}
