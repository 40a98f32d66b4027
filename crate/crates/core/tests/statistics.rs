mod common;

use common::*;
use dispatch_opt::stats::{mean_and_ci, run_until_precise, t_quantile, PrecisionPolicy};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

const PROBS: [f64; 4] = [0.9, 0.95, 0.975, 0.995];
const DFS: [f64; 6] = [1.0, 2.0, 5.0, 10.0, 30.0, 120.0];

#[test]
fn t_quantile_matches_quadrature_oracle() {
    for p in PROBS {
        for df in DFS {
            let got = t_quantile(p, df).unwrap();
            let want = t_quantile_oracle(p, df);
            assert!((got - want).abs() <= 1e-6, "p={p} df={df}: {got} vs {want}");
        }
    }
}

#[test]
fn quadrature_oracle_agrees_with_statrs() {
    for p in PROBS {
        for df in DFS {
            let a = t_quantile_oracle(p, df);
            let b = StudentsT::new(0.0, 1.0, df).unwrap().inverse_cdf(p);
            assert!((a - b).abs() <= 1e-6, "p={p} df={df}: {a} vs {b}");
        }
    }
}

#[test]
fn t_quantile_domain() {
    assert!(t_quantile(0.0, 5.0).is_err());
    assert!(t_quantile(1.0, 5.0).is_err());
    assert!(t_quantile(0.95, 0.0).is_err());
    assert!((t_quantile(0.5, 7.0).unwrap()).abs() < 1e-9);
}

#[test]
fn stops_when_precise_and_not_before() {
    let policy = PrecisionPolicy {
        max_n: 1000,
        ..PrecisionPolicy::default()
    };
    for sigma in [0.5, 2.0, 5.0, 10.0, 20.0] {
        for seed in 0..5 {
            let mut seeds = ChaCha8Rng::seed_from_u64(seed);
            let s = run_until_precise(noisy_evaluator(100.0, sigma), &mut seeds, &policy).unwrap();
            assert!(s.n >= 3);
            assert!(s.precise, "sigma={sigma} n={}", s.n);
            let rel = relative_width_oracle(&s.samples, 0.95);
            assert!(rel <= 0.05 + 1e-12, "sigma={sigma}: {rel}");
            assert!((rel - s.relative_width()).abs() < 1e-9);
            if s.n > 3 {
                let prev = relative_width_oracle(&s.samples[..s.n - 1], 0.95);
                assert!(prev > 0.05, "should have stopped at n={}", s.n - 1);
            }
        }
    }
}

#[test]
fn constant_evaluator_stops_at_three() {
    let mut seeds = ChaCha8Rng::seed_from_u64(0);
    let s = run_until_precise(|_| 42.0, &mut seeds, &PrecisionPolicy::default()).unwrap();
    assert_eq!(s.n, 3);
    assert_eq!(s.width, 0.0);
    assert!(s.precise);
}

#[test]
fn cap_reports_imprecise() {
    let policy = PrecisionPolicy {
        max_n: 8,
        ..PrecisionPolicy::default()
    };
    let mut seeds = ChaCha8Rng::seed_from_u64(0);
    let s = run_until_precise(noisy_evaluator(1.0, 50.0), &mut seeds, &policy).unwrap();
    assert_eq!(s.n, 8);
    assert!(!s.precise);
}

#[test]
fn evaluator_receives_distinct_seeds() {
    let mut seen = Vec::new();
    let mut seeds = ChaCha8Rng::seed_from_u64(3);
    let policy = PrecisionPolicy {
        max_n: 10,
        ..PrecisionPolicy::default()
    };
    run_until_precise(
        |s| {
            seen.push(s);
            (s % 1000) as f64 + 1.0
        },
        &mut seeds,
        &policy,
    )
    .unwrap();
    let mut dedup = seen.clone();
    dedup.sort_unstable();
    dedup.dedup();
    assert_eq!(dedup.len(), seen.len());
}

proptest! {
    #[test]
    fn ci_width_matches_statrs(samples in prop::collection::vec(1.0f64..1000.0, 2..40)) {
        let (mean, width) = mean_and_ci(&samples, 0.95).unwrap();
        let oracle = relative_width_oracle(&samples, 0.95) * mean.abs();
        prop_assert!((width - oracle).abs() <= 1e-8 * oracle.max(1.0));
    }

    #[test]
    fn ci_width_shift_invariant(samples in prop::collection::vec(-100.0f64..100.0, 3..20), shift in -1e3f64..1e3) {
        let (_, w1) = mean_and_ci(&samples, 0.95).unwrap();
        let shifted: Vec<f64> = samples.iter().map(|x| x + shift).collect();
        let (_, w2) = mean_and_ci(&shifted, 0.95).unwrap();
        prop_assert!((w1 - w2).abs() <= 1e-7 * w1.max(1.0));
    }
}
