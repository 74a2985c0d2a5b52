//! Property tests for the structural invariants: generalized-inverse
//! galois inequalities, boundary monotonicity, envelope domination, pmf
//! normalization, and interval coverage of the exact joint law.

use std::sync::Arc;

use proptest::prelude::*;

use falpha::boundary::{monotone_envelope, Boundary, StepBoundary, ThresholdSeq};
use falpha::dist::{power_cdf, Distribution, Exponential, Pareto, Uniform};
use falpha::joint::{joint_record_law, pure_scheme_b, pure_scheme_c};
use falpha::scheme::{exact_count_pmf, record_law_summary};
use falpha::weights::{AlphaSeq, DeclaredAlphaLimits};

fn dist_for(idx: u8) -> Arc<dyn Distribution> {
    match idx % 4 {
        0 => Arc::new(Uniform::standard()),
        1 => Arc::new(Exponential::new(1.3).unwrap()),
        2 => Arc::new(Pareto::new(2.0).unwrap()),
        _ => Arc::new(falpha::dist::Gumbel),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantile_galois(idx in 0u8..4, u in 1e-6f64..=0.999_999) {
        let f = dist_for(idx);
        let x = f.quantile(u);
        prop_assert!(f.cdf(x) >= u - 1e-9);
        let c = f.cdf(x);
        if c > 0.0 && c < 1.0 {
            prop_assert!(f.quantile(c) <= x + 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn power_cdf_monotone(idx in 0u8..4, a in 0.01f64..500.0, lo in -5.0f64..5.0, step in 0.01f64..2.0) {
        let f = dist_for(idx);
        let x1 = lo;
        let x2 = lo + step;
        prop_assert!(power_cdf(f.as_ref(), a, x1) <= power_cdf(f.as_ref(), a, x2) + 1e-12);
    }

    #[test]
    fn step_boundary_monotone_for_monotone_levels(
        raw_alpha in prop::collection::vec(0.05f64..4.0, 3..40),
        raw_steps in prop::collection::vec(0.0f64..0.5, 3..40),
        base in -2.0f64..2.0,
    ) {
        let n = raw_alpha.len().min(raw_steps.len());
        let alpha = AlphaSeq::table(raw_alpha[..n].to_vec(), DeclaredAlphaLimits::default()).unwrap();
        let mut level = base;
        let levels: Vec<f64> = raw_steps[..n].iter().map(|d| { level += d; level }).collect();
        let f = Exponential::new(1.0).unwrap();
        let thr = ThresholdSeq::from_levels(&f, levels, Default::default()).unwrap();
        prop_assert!(thr.is_monotone());
        let b = thr.step_boundary(&alpha);
        prop_assert!(b.is_nondecreasing());
        let t_hi = alpha.partial_sum(n) + 1.0;
        let mut prev = f64::NEG_INFINITY;
        let mut t = 0.05;
        while t < t_hi {
            let v = b.value(t);
            prop_assert!(v >= prev);
            prev = v;
            t += t_hi / 97.0;
        }
    }

    #[test]
    fn envelope_dominates_and_is_monotone(
        jumps_raw in prop::collection::vec(0.1f64..1.0, 3..24),
        levels in prop::collection::vec(-3.0f64..3.0, 3..24),
    ) {
        let n = jumps_raw.len().min(levels.len());
        let mut t = 0.0;
        let jumps: Vec<f64> = jumps_raw[..n].iter().map(|d| { t += d; t }).collect();
        let b: Arc<dyn Boundary> =
            Arc::new(StepBoundary::from_table(jumps.clone(), levels[..n].to_vec()).unwrap());
        let t0 = 0.5 * jumps[0];
        let t_max = jumps[n - 1] + 1.0;
        let env = monotone_envelope(b.clone(), t0, t_max);
        let mut prev = f64::NEG_INFINITY;
        let mut q = t0;
        while q < t_max {
            let e = env.value(q);
            prop_assert!(e + 1e-12 >= b.value(q), "envelope below inner at {q}");
            prop_assert!(e + 1e-12 >= prev);
            prev = e;
            q += (t_max - t0) / 53.0;
        }
    }

    #[test]
    fn count_pmf_normalizes_with_exact_mean(
        raw_alpha in prop::collection::vec(0.05f64..6.0, 2..40),
    ) {
        let n = raw_alpha.len();
        let alpha = AlphaSeq::table(raw_alpha, DeclaredAlphaLimits::default()).unwrap();
        let pmf = exact_count_pmf(&alpha, n).unwrap();
        let mass: f64 = pmf.iter().sum();
        prop_assert!((mass - 1.0).abs() < 1e-10);
        let mean: f64 = pmf.iter().enumerate().map(|(k, &p)| k as f64 * p).sum();
        let law = record_law_summary(&alpha, n);
        prop_assert!((mean - law.mean[n - 1]).abs() < 1e-9);
    }

    #[test]
    fn joint_intervals_cover_the_pure_scheme_point(
        raw_alpha in prop::collection::vec(0.1f64..4.0, 3..30),
        h in 0.0f64..0.98,
        pick in 0usize..1000,
    ) {
        let n_len = raw_alpha.len();
        let alpha = AlphaSeq::table(raw_alpha, DeclaredAlphaLimits::default()).unwrap();
        let m = 1 + pick % (n_len - 1);
        let n = m + 1 + (pick / 7) % (n_len - m);
        let law = joint_record_law(&alpha, h, m, n, None, None).unwrap();
        prop_assert!(law.p1 >= -1e-15);
        prop_assert!(law.joint.lo >= -1e-12 && law.joint.hi <= 1.0 + 1e-9);
        // The pure-scheme remainders sit inside the bound intervals, and
        // their assembled ratio is exactly 1, so 1 lies in the interval.
        let b = pure_scheme_b(&alpha, h, m);
        let c = pure_scheme_c(&alpha, h, m, n);
        prop_assert!(law.b_m.contains(b));
        prop_assert!(law.c_mn.contains(c));
        prop_assert!(law.ratio.lo <= 1.0 + 1e-9 && 1.0 <= law.ratio.hi + 1e-9);
    }
}
