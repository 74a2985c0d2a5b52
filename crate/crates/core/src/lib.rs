//! Record statistics for power-of-cdf schemes.
//!
//! A scheme here is a sequence of independent observations whose n-th
//! distribution function is `F^{alpha_n}` for a common continuous `F` and
//! positive weights `alpha_n`. Record indicators of such sequences are
//! independent with success probability `alpha_n / s_n`, which makes the
//! record count analytically tractable. The crate provides:
//!
//! * exact record-law computations (probabilities, moments, the full count
//!   distribution as a Poisson-binomial convolution),
//! * simulation of the pure scheme, of threshold variants that only match
//!   `F^{alpha_n}` above non-decreasing levels, and of the continuous-time
//!   extremal process the partial maxima embed into,
//! * growth-rate classification of `P(M_n > level_n eventually)` with
//!   certified tail bounds,
//! * exact joint record probabilities and asymptotic pairwise-independence
//!   bounds for flat-threshold schemes,
//! * a Monte Carlo harness (seeded counter-keyed streams, chi-square / KS
//!   tests, exact-PMF comparisons) used by the verification suite.
//!
//! Distribution families, weight families and threshold families are
//! trait objects registered by name and selected from JSON experiment
//! configs (see [`config`]).

pub mod boundary;
pub mod config;
pub mod coupling;
pub mod criteria;
pub mod dist;
pub mod export;
pub mod extremal;
pub mod joint;
pub mod numeric;
pub mod rng;
pub mod scheme;
pub mod stats;
pub mod weights;

pub use boundary::{Boundary, StepBoundary, ThresholdSeq};
pub use dist::{Distribution, DistributionRegistry};
pub use weights::{AlphaSeq, WeightRegistry};
