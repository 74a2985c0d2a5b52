//! The continuous-time max process associated with F.
//!
//! The process has marginals `F^t` and independent spacing maxima: the
//! increment over `(t_{j-1}, t_j]` is an independent draw from
//! `F^{t_j - t_{j-1}}`. Simulation happens only at user grids; the driving
//! point measure has infinite mass near the lower end of the support, so a
//! full point realization is ill-posed while the grid law is exact.
//! Sampling the partial maxima of a weighted scheme at its `s_n` times
//! reproduces the scheme's maxima law exactly.

use rayon::prelude::*;
use thiserror::Error;

use crate::boundary::Boundary;
use crate::dist::Distribution;
use crate::rng::{Channel, Streams};

#[derive(Debug, Error)]
pub enum ExtremalError {
    #[error("times must be strictly increasing and positive")]
    BadGrid,
    #[error("boundary must be non-decreasing; build its monotone envelope first")]
    BoundaryNotMonotone,
    #[error("distribution has an atom at its lower support; refusing")]
    AtomAtLowerSupport,
}

#[derive(Debug, Clone)]
pub struct ExtremalPath {
    pub times: Vec<f64>,
    pub levels: Vec<f64>,
    pub seed: u64,
    pub rep: u64,
}

fn validate_grid(times: &[f64]) -> Result<(), ExtremalError> {
    if times.is_empty() || times[0] <= 0.0 {
        return Err(ExtremalError::BadGrid);
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ExtremalError::BadGrid);
    }
    Ok(())
}

/// Samples the process at the grid: running max of independent spacing
/// draws with laws `F^{dt}`, inverted in log space.
pub fn sample_extremal(
    f: &dyn Distribution,
    times: &[f64],
    streams: &Streams,
    rep: u64,
) -> Result<ExtremalPath, ExtremalError> {
    validate_grid(times)?;
    if !f.is_continuous() {
        return Err(ExtremalError::AtomAtLowerSupport);
    }
    let mut u = streams.uniforms(rep, Channel::Primary);
    let mut levels = Vec::with_capacity(times.len());
    let mut prev_t = 0.0;
    let mut m = f64::NEG_INFINITY;
    for &t in times {
        let dt = t - prev_t;
        let draw = f.quantile_log(u.next_uniform().ln() / dt);
        m = m.max(draw);
        levels.push(m);
        prev_t = t;
    }
    Ok(ExtremalPath { times: times.to_vec(), levels, seed: streams.seed(), rep })
}

/// Grid statistics of the last time the process sits at or below a
/// boundary.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LastCrossingReport {
    pub paths: u64,
    pub horizon: f64,
    /// Fraction of paths at or below the boundary at the final grid time.
    pub below_at_horizon: f64,
    /// Fraction of paths that never sat below the boundary on the grid.
    pub never_below: f64,
    /// [q25, q50, q75, q90] of the last grid time at or below the boundary
    /// (paths that never dip below count as 0).
    pub last_below_quantiles: [f64; 4],
}

/// Per-path last grid time with the process at or below `b`, across
/// replications. The boundary must already be non-decreasing.
pub fn last_crossing_statistics(
    f: &dyn Distribution,
    b: &dyn Boundary,
    grid: &[f64],
    streams: &Streams,
    reps: u64,
) -> Result<LastCrossingReport, ExtremalError> {
    validate_grid(grid)?;
    if !b.is_nondecreasing() {
        return Err(ExtremalError::BoundaryNotMonotone);
    }
    let bounds: Vec<f64> = grid.iter().map(|&t| b.value(t)).collect();
    let per_rep: Vec<(f64, bool)> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let path = sample_extremal(f, grid, streams, rep).expect("validated grid");
            let mut last = 0.0f64;
            let mut below_end = false;
            for (j, (&lvl, &bd)) in path.levels.iter().zip(&bounds).enumerate() {
                if lvl <= bd {
                    last = grid[j];
                    below_end = j + 1 == grid.len();
                }
            }
            (last, below_end)
        })
        .collect();
    let mut lasts: Vec<f64> = per_rep.iter().map(|p| p.0).collect();
    lasts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let at = |q: f64| lasts[((q * lasts.len() as f64) as usize).min(lasts.len() - 1)];
    let below_at_horizon =
        per_rep.iter().filter(|p| p.1).count() as f64 / reps as f64;
    let never_below = per_rep.iter().filter(|p| p.0 == 0.0).count() as f64 / reps as f64;
    Ok(LastCrossingReport {
        paths: reps,
        horizon: *grid.last().unwrap(),
        below_at_horizon,
        never_below,
        last_below_quantiles: [at(0.25), at(0.5), at(0.75), at(0.9)],
    })
}
