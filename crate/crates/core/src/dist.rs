//! Distribution-function primitives.
//!
//! The [`Distribution`] trait is the common surface for every continuous
//! law used by the samplers and the exact formulas: cdf, log-cdf, survival
//! function, generalized inverse, support bounds. Built-in families cover
//! bounded and unbounded supports and all three extreme-value tail regimes
//! (uniform, exponential, Pareto, Gumbel) plus piecewise-linear table cdfs
//! loaded from CSV. Families are registered by name in
//! [`DistributionRegistry`] and selected from JSON experiment configs.
//!
//! All powers of cdfs are evaluated in log space: quantities like `h^{s_n}`
//! routinely carry exponents beyond 10^6 where repeated multiplication
//! would under- or overflow.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DistError {
    #[error("bisection failed to converge after {0} iterations (malformed cdf?)")]
    NonConvergence(usize),
    #[error("total variation unsupported: {0}")]
    Unsupported(String),
    #[error("invalid table cdf: {0}")]
    InvalidTable(String),
    #[error("unknown distribution family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameters for `{family}`: {message}")]
    InvalidParams { family: String, message: String },
}

/// A distribution function with the evaluations every other module needs.
///
/// Implementations must keep `cdf` non-decreasing with limits 0/1,
/// `log_cdf(x) = ln(cdf(x))` (with `-inf` where the cdf vanishes) and
/// `quantile(u) = inf { x : cdf(x) >= u }`.
pub trait Distribution: Send + Sync {
    fn name(&self) -> &'static str;

    fn cdf(&self, x: f64) -> f64;

    /// ln F(x), computed directly from the tail where that is more accurate.
    fn log_cdf(&self, x: f64) -> f64;

    /// Survival function 1 - F(x), accurate deep in the upper tail.
    fn sf(&self, x: f64) -> f64;

    /// Generalized inverse at u in (0, 1).
    fn quantile(&self, u: f64) -> f64;

    /// Generalized inverse at u = exp(log_u), for log_u in (-inf, 0).
    ///
    /// Used to invert `u^{1/alpha}` for very large alpha, where `u^{1/alpha}`
    /// itself rounds to 1 in f64 but its log (`log_u / alpha`) is exact.
    fn quantile_log(&self, log_u: f64) -> f64 {
        self.quantile(log_u.exp().clamp(f64::MIN_POSITIVE, 1.0 - 1e-16))
    }

    /// Density, where one exists in closed form.
    fn pdf(&self, _x: f64) -> Option<f64> {
        None
    }

    /// Infimum of the support (`-inf` when unbounded below).
    fn lower_support(&self) -> f64;

    /// Right endpoint `F^{-1}(1-)` (`+inf` when unbounded above).
    fn upper_endpoint(&self) -> f64;

    fn is_continuous(&self) -> bool {
        true
    }
}

/// Shared handle to a distribution.
pub type DynDist = Arc<dyn Distribution>;

/// F^a(x) evaluated as exp(a * ln F(x)). Total on its domain: returns 0
/// where the cdf vanishes.
pub fn power_cdf(f: &dyn Distribution, a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0);
    crate::numeric::pow_from_log(f.log_cdf(x), a)
}

// ---------------------------------------------------------------------------
// Built-in families
// ---------------------------------------------------------------------------

/// Uniform law on (lo, hi).
#[derive(Debug, Clone)]
pub struct Uniform {
    lo: f64,
    hi: f64,
}

impl Uniform {
    pub fn new(lo: f64, hi: f64) -> Result<Self, DistError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(DistError::InvalidParams {
                family: "uniform".into(),
                message: format!("need lo < hi, got [{lo}, {hi}]"),
            });
        }
        Ok(Uniform { lo, hi })
    }

    pub fn standard() -> Self {
        Uniform { lo: 0.0, hi: 1.0 }
    }
}

impl Distribution for Uniform {
    fn name(&self) -> &'static str {
        "uniform"
    }
    fn cdf(&self, x: f64) -> f64 {
        ((x - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }
    fn log_cdf(&self, x: f64) -> f64 {
        self.cdf(x).ln()
    }
    fn sf(&self, x: f64) -> f64 {
        ((self.hi - x) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }
    fn quantile(&self, u: f64) -> f64 {
        self.lo + u * (self.hi - self.lo)
    }
    fn quantile_log(&self, log_u: f64) -> f64 {
        self.lo + log_u.exp() * (self.hi - self.lo)
    }
    fn pdf(&self, x: f64) -> Option<f64> {
        Some(if x >= self.lo && x <= self.hi {
            1.0 / (self.hi - self.lo)
        } else {
            0.0
        })
    }
    fn lower_support(&self) -> f64 {
        self.lo
    }
    fn upper_endpoint(&self) -> f64 {
        self.hi
    }
}

/// Exponential law with the given rate.
#[derive(Debug, Clone)]
pub struct Exponential {
    rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self, DistError> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(DistError::InvalidParams {
                family: "exponential".into(),
                message: format!("need rate > 0, got {rate}"),
            });
        }
        Ok(Exponential { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl Distribution for Exponential {
    fn name(&self) -> &'static str {
        "exponential"
    }
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.rate * x).exp_m1()
        }
    }
    fn log_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            f64::NEG_INFINITY
        } else {
            (-(-self.rate * x).exp()).ln_1p()
        }
    }
    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.rate * x).exp()
        }
    }
    fn quantile(&self, u: f64) -> f64 {
        -(-u).ln_1p() / self.rate
    }
    fn quantile_log(&self, log_u: f64) -> f64 {
        // 1 - u = -expm1(log_u), exact for log_u near 0.
        -(-log_u.exp_m1()).ln() / self.rate
    }
    fn pdf(&self, x: f64) -> Option<f64> {
        Some(if x < 0.0 {
            0.0
        } else {
            self.rate * (-self.rate * x).exp()
        })
    }
    fn lower_support(&self) -> f64 {
        0.0
    }
    fn upper_endpoint(&self) -> f64 {
        f64::INFINITY
    }
}

/// Pareto law on (1, inf): F(x) = 1 - x^{-shape}.
#[derive(Debug, Clone)]
pub struct Pareto {
    shape: f64,
}

impl Pareto {
    pub fn new(shape: f64) -> Result<Self, DistError> {
        if !(shape.is_finite() && shape > 0.0) {
            return Err(DistError::InvalidParams {
                family: "pareto".into(),
                message: format!("need shape > 0, got {shape}"),
            });
        }
        Ok(Pareto { shape })
    }
}

impl Distribution for Pareto {
    fn name(&self) -> &'static str {
        "pareto"
    }
    fn cdf(&self, x: f64) -> f64 {
        if x <= 1.0 {
            0.0
        } else {
            -(-self.shape * x.ln()).exp_m1()
        }
    }
    fn log_cdf(&self, x: f64) -> f64 {
        if x <= 1.0 {
            f64::NEG_INFINITY
        } else {
            (-(-self.shape * x.ln()).exp()).ln_1p()
        }
    }
    fn sf(&self, x: f64) -> f64 {
        if x <= 1.0 {
            1.0
        } else {
            (-self.shape * x.ln()).exp()
        }
    }
    fn quantile(&self, u: f64) -> f64 {
        ((-(-u).ln_1p()) / self.shape).exp()
    }
    fn quantile_log(&self, log_u: f64) -> f64 {
        (-(-log_u.exp_m1()).ln() / self.shape).exp()
    }
    fn pdf(&self, x: f64) -> Option<f64> {
        Some(if x < 1.0 {
            0.0
        } else {
            self.shape * (-(self.shape + 1.0) * x.ln()).exp()
        })
    }
    fn lower_support(&self) -> f64 {
        1.0
    }
    fn upper_endpoint(&self) -> f64 {
        f64::INFINITY
    }
}

/// Standard Gumbel law: F(x) = exp(-e^{-x}).
#[derive(Debug, Clone, Default)]
pub struct Gumbel;

impl Distribution for Gumbel {
    fn name(&self) -> &'static str {
        "gumbel"
    }
    fn cdf(&self, x: f64) -> f64 {
        (-(-x).exp()).exp()
    }
    fn log_cdf(&self, x: f64) -> f64 {
        -(-x).exp()
    }
    fn sf(&self, x: f64) -> f64 {
        -(-(-x).exp()).exp_m1()
    }
    fn quantile(&self, u: f64) -> f64 {
        -(-u.ln()).ln()
    }
    fn quantile_log(&self, log_u: f64) -> f64 {
        -(-log_u).ln()
    }
    fn pdf(&self, x: f64) -> Option<f64> {
        Some((-x - (-x).exp()).exp())
    }
    fn lower_support(&self) -> f64 {
        f64::NEG_INFINITY
    }
    fn upper_endpoint(&self) -> f64 {
        f64::INFINITY
    }
}

/// Piecewise-linear cdf from a table of (x, F(x)) points with strictly
/// increasing x, F non-decreasing, F ending at 1. A positive first F value
/// encodes an atom at the first point (continuity flag off).
#[derive(Debug, Clone)]
pub struct PiecewiseCdf {
    xs: Vec<f64>,
    fs: Vec<f64>,
}

impl PiecewiseCdf {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, DistError> {
        if points.len() < 2 {
            return Err(DistError::InvalidTable("need at least two points".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(DistError::InvalidTable(format!(
                    "x values must be strictly increasing, got {} then {}",
                    w[0].0, w[1].0
                )));
            }
            if w[1].1 < w[0].1 {
                return Err(DistError::InvalidTable(format!(
                    "F values must be non-decreasing, got {} then {}",
                    w[0].1, w[1].1
                )));
            }
        }
        let first = points[0].1;
        let last = points[points.len() - 1].1;
        if !(0.0..=1.0).contains(&first) || (last - 1.0).abs() > 1e-12 {
            return Err(DistError::InvalidTable(format!(
                "F must start in [0,1] and end at 1, got {first} .. {last}"
            )));
        }
        let (xs, fs) = points.into_iter().unzip();
        Ok(PiecewiseCdf { xs, fs })
    }

    /// Reads a two-column CSV (x, F(x)) with a header row.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self, DistError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| DistError::InvalidTable(e.to_string()))?;
            if rec.len() < 2 {
                return Err(DistError::InvalidTable("rows need two columns".into()));
            }
            let x: f64 = rec[0]
                .trim()
                .parse()
                .map_err(|_| DistError::InvalidTable(format!("bad x `{}`", &rec[0])))?;
            let f: f64 = rec[1]
                .trim()
                .parse()
                .map_err(|_| DistError::InvalidTable(format!("bad F `{}`", &rec[1])))?;
            points.push((x, f));
        }
        PiecewiseCdf::new(points)
    }
}

impl Distribution for PiecewiseCdf {
    fn name(&self) -> &'static str {
        "table"
    }
    fn cdf(&self, x: f64) -> f64 {
        if x < self.xs[0] {
            return 0.0;
        }
        let n = self.xs.len();
        if x >= self.xs[n - 1] {
            return self.fs[n - 1];
        }
        let j = self.xs.partition_point(|&xi| xi <= x);
        let (x0, x1) = (self.xs[j - 1], self.xs[j]);
        let (f0, f1) = (self.fs[j - 1], self.fs[j]);
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }
    fn log_cdf(&self, x: f64) -> f64 {
        self.cdf(x).ln()
    }
    fn sf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }
    fn quantile(&self, u: f64) -> f64 {
        // inf { x : F(x) >= u }; flat pieces resolve to their left end.
        if u <= self.fs[0] {
            return self.xs[0];
        }
        let j = self.fs.partition_point(|&fi| fi < u);
        let (x0, x1) = (self.xs[j - 1], self.xs[j]);
        let (f0, f1) = (self.fs[j - 1], self.fs[j]);
        x0 + (x1 - x0) * (u - f0) / (f1 - f0)
    }
    fn pdf(&self, x: f64) -> Option<f64> {
        if self.fs[0] > 0.0 {
            return None; // atom at the left end, no density
        }
        if x < self.xs[0] || x >= self.xs[self.xs.len() - 1] {
            return Some(0.0);
        }
        let j = self.xs.partition_point(|&xi| xi <= x);
        Some((self.fs[j] - self.fs[j - 1]) / (self.xs[j] - self.xs[j - 1]))
    }
    fn lower_support(&self) -> f64 {
        self.xs[0]
    }
    fn upper_endpoint(&self) -> f64 {
        // F may reach 1 before the last table point.
        let j = self.fs.partition_point(|&fi| fi < 1.0);
        self.xs[j.min(self.xs.len() - 1)]
    }
    fn is_continuous(&self) -> bool {
        self.fs[0] == 0.0
    }
}

/// The law F^a as a distribution in its own right.
#[derive(Clone)]
pub struct PowerDist {
    base: DynDist,
    exponent: f64,
}

impl PowerDist {
    pub fn new(base: DynDist, exponent: f64) -> Self {
        debug_assert!(exponent > 0.0);
        PowerDist { base, exponent }
    }
}

impl Distribution for PowerDist {
    fn name(&self) -> &'static str {
        "power"
    }
    fn cdf(&self, x: f64) -> f64 {
        crate::numeric::pow_from_log(self.base.log_cdf(x), self.exponent)
    }
    fn log_cdf(&self, x: f64) -> f64 {
        self.exponent * self.base.log_cdf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        crate::numeric::one_minus_pow(self.base.log_cdf(x), self.exponent)
    }
    fn quantile(&self, u: f64) -> f64 {
        self.base.quantile_log(u.ln() / self.exponent)
    }
    fn quantile_log(&self, log_u: f64) -> f64 {
        self.base.quantile_log(log_u / self.exponent)
    }
    fn pdf(&self, x: f64) -> Option<f64> {
        let f = self.base.pdf(x)?;
        let log_c = self.base.log_cdf(x);
        if log_c == f64::NEG_INFINITY {
            return Some(0.0);
        }
        Some(self.exponent * ((self.exponent - 1.0) * log_c).exp() * f)
    }
    fn lower_support(&self) -> f64 {
        self.base.lower_support()
    }
    fn upper_endpoint(&self) -> f64 {
        self.base.upper_endpoint()
    }
    fn is_continuous(&self) -> bool {
        self.base.is_continuous()
    }
}

// ---------------------------------------------------------------------------
// Generic inversion
// ---------------------------------------------------------------------------

const BISECTION_CAP: usize = 200;

/// Bisection for `inf { x : cdf(x) >= u }` on a bracketing interval.
/// Absolute tolerance 1e-12, switching to relative beyond |x| = 1.
pub fn invert_cdf<C: Fn(f64) -> f64>(
    cdf: C,
    mut lo: f64,
    mut hi: f64,
    u: f64,
) -> Result<f64, DistError> {
    debug_assert!(u > 0.0 && u < 1.0);
    if !(cdf(lo) < u && cdf(hi) >= u) {
        return Err(DistError::NonConvergence(0));
    }
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        let tol = 1e-12 * mid.abs().max(1.0);
        if hi - lo <= tol {
            return Ok(hi);
        }
        if cdf(mid) >= u {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(DistError::NonConvergence(BISECTION_CAP))
}

// ---------------------------------------------------------------------------
// Restricted total variation distance
// ---------------------------------------------------------------------------

/// A total-variation value together with the approximation error bound of
/// whatever route computed it.
#[derive(Debug, Clone, Copy)]
pub struct TvEstimate {
    pub value: f64,
    pub error_bound: f64,
}

/// Exact restricted TV distance between F^a and F^b above `ell`, for a
/// common continuous F with a density. The signed density difference
/// changes sign exactly once, at F(x*) = (a/b)^{1/(b-a)}, so the distance
/// is a sum of cdf differences.
pub fn tv_restricted_power_pair(f: &dyn Distribution, a: f64, b: f64, ell: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    // F-value at the density crossing.
    let fx_star = ((a / b).ln() / (b - a)).exp();
    let d = |fx: f64| {
        // D(x) = F^a - F^b expressed through v = F(x).
        if fx <= 0.0 {
            0.0
        } else {
            let lv = fx.ln();
            (a * lv).exp() - (b * lv).exp()
        }
    };
    let f_ell = f.cdf(ell).max(0.0);
    if f_ell >= fx_star {
        // Only the region where the difference has one sign remains.
        d(f_ell)
    } else {
        (d(fx_star) - d(f_ell)) + d(fx_star)
    }
}

/// Restricted TV distance `d_TV(G|_ell, H|_ell)` for general laws.
///
/// With densities on both sides this scans for sign changes of g - h,
/// refines each crossing by bisection and sums exact cdf differences over
/// the sign-constant pieces; the reported bound is a Richardson-style
/// estimate from one grid refinement. Without densities it falls back to
/// the same scheme on cell masses, which only sees variation at the grid
/// scale.
pub fn tv_restricted(
    g: &dyn Distribution,
    h: &dyn Distribution,
    ell: f64,
) -> Result<TvEstimate, DistError> {
    let hi = effective_upper(g, h, ell)?;
    if hi <= ell {
        return Ok(TvEstimate { value: 0.0, error_bound: 0.0 });
    }
    let have_densities = g.pdf(0.5 * (ell.max(g.lower_support()) + hi)).is_some()
        && h.pdf(0.5 * (ell.max(h.lower_support()) + hi)).is_some();
    if !have_densities {
        // Cell-mass scan only; honest but coarse.
        let coarse = tv_grid(g, h, ell, hi, 2_000);
        let fine = tv_grid(g, h, ell, hi, 8_000);
        return Ok(TvEstimate {
            value: fine,
            error_bound: (fine - coarse).abs() * 4.0 + 1e-12,
        });
    }
    let coarse = tv_by_sign_pieces(g, h, ell, hi, 512);
    let fine = tv_by_sign_pieces(g, h, ell, hi, 2_048);
    Ok(TvEstimate {
        value: fine,
        error_bound: (fine - coarse).abs() * 4.0 + 1e-12,
    })
}

fn effective_upper(
    g: &dyn Distribution,
    h: &dyn Distribution,
    ell: f64,
) -> Result<f64, DistError> {
    let cap = g.upper_endpoint().max(h.upper_endpoint());
    if cap.is_finite() {
        return Ok(cap);
    }
    // Push until both upper tails are negligible.
    let mut hi = ell.max(1.0).abs().max(1.0);
    for _ in 0..200 {
        if g.sf(hi) < 1e-15 && h.sf(hi) < 1e-15 {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(DistError::Unsupported(
        "could not truncate the upper tails".into(),
    ))
}

fn tv_by_sign_pieces(
    g: &dyn Distribution,
    h: &dyn Distribution,
    ell: f64,
    hi: f64,
    cells: usize,
) -> f64 {
    let lo = ell.max(g.lower_support().min(h.lower_support()));
    let diff = |x: f64| g.pdf(x).unwrap_or(0.0) - h.pdf(x).unwrap_or(0.0);
    let d = |x: f64| g.cdf(x) - h.cdf(x);
    let step = (hi - lo) / cells as f64;
    let mut total = 0.0f64;
    let mut piece_start = lo;
    let mut prev_x = lo;
    let mut prev_sign = diff(lo + 1e-12 * step).signum();
    for i in 1..=cells {
        let x = lo + step * i as f64;
        let s = diff(x).signum();
        if s != prev_sign && s != 0.0 && prev_sign != 0.0 {
            // Refine the crossing.
            let (mut a, mut b) = (prev_x, x);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if diff(m).signum() == prev_sign {
                    a = m;
                } else {
                    b = m;
                }
            }
            let cross = 0.5 * (a + b);
            total += (d(cross) - d(piece_start)).abs();
            piece_start = cross;
            prev_sign = s;
        } else if s != 0.0 {
            prev_sign = s;
        }
        prev_x = x;
    }
    total += (d(hi) - d(piece_start)).abs();
    // Mass beyond the truncation point, if any.
    total += (g.sf(hi) - h.sf(hi)).abs();
    total
}

fn tv_grid(g: &dyn Distribution, h: &dyn Distribution, ell: f64, hi: f64, cells: usize) -> f64 {
    let lo = ell.max(g.lower_support().min(h.lower_support()));
    let step = (hi - lo) / cells as f64;
    let mut total = 0.0f64;
    let mut gl = g.cdf(lo);
    let mut hl = h.cdf(lo);
    for i in 1..=cells {
        let x = lo + step * i as f64;
        let gr = g.cdf(x);
        let hr = h.cdf(x);
        total += ((gr - gl) - (hr - hl)).abs();
        gl = gr;
        hl = hr;
    }
    total + (g.sf(hi) - h.sf(hi)).abs()
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

type DistFactory = Box<dyn Fn(&Value) -> Result<DynDist, DistError> + Send + Sync>;

/// Name-indexed factory for distribution families; the JSON config names a
/// family and supplies its parameters.
pub struct DistributionRegistry {
    factories: BTreeMap<String, DistFactory>,
}

impl DistributionRegistry {
    pub fn empty() -> Self {
        DistributionRegistry { factories: BTreeMap::new() }
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&Value) -> Result<DynDist, DistError> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(|s| s.as_str())
    }

    pub fn build(&self, family: &str, params: &Value) -> Result<DynDist, DistError> {
        let f = self
            .factories
            .get(family)
            .ok_or_else(|| DistError::UnknownFamily(family.to_string()))?;
        f(params)
    }

    /// Registry with all built-in families.
    pub fn builtin() -> Self {
        let mut r = DistributionRegistry::empty();
        r.register("uniform", |p| {
            let lo = opt_f64(p, "lo").unwrap_or(0.0);
            let hi = opt_f64(p, "hi").unwrap_or(1.0);
            Ok(Arc::new(Uniform::new(lo, hi)?) as DynDist)
        });
        r.register("exponential", |p| {
            let rate = opt_f64(p, "rate").unwrap_or(1.0);
            Ok(Arc::new(Exponential::new(rate)?) as DynDist)
        });
        r.register("pareto", |p| {
            let shape = opt_f64(p, "shape").unwrap_or(1.0);
            Ok(Arc::new(Pareto::new(shape)?) as DynDist)
        });
        r.register("gumbel", |_| Ok(Arc::new(Gumbel) as DynDist));
        r.register("table", |p| {
            if let Some(path) = p.get("path").and_then(|v| v.as_str()) {
                let file = std::fs::File::open(path)
                    .map_err(|e| DistError::InvalidTable(format!("{path}: {e}")))?;
                return Ok(Arc::new(PiecewiseCdf::from_csv_reader(file)?) as DynDist);
            }
            let pts = p
                .get("points")
                .and_then(|v| v.as_array())
                .ok_or_else(|| DistError::InvalidTable("need `path` or `points`".into()))?;
            let mut points = Vec::with_capacity(pts.len());
            for pt in pts {
                let pair = pt
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| DistError::InvalidTable("points must be [x, F] pairs".into()))?;
                points.push((
                    pair[0].as_f64().ok_or_else(|| DistError::InvalidTable("bad x".into()))?,
                    pair[1].as_f64().ok_or_else(|| DistError::InvalidTable("bad F".into()))?,
                ));
            }
            Ok(Arc::new(PiecewiseCdf::new(points)?) as DynDist)
        });
        r
    }
}

fn opt_f64(v: &Value, key: &str) -> Option<f64> {
    v.get(key).and_then(|x| x.as_f64())
}
