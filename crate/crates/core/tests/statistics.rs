//! Seeded statistical checks of the sampler against its stationary law.
//!
//! Every test uses significance 0.01 and reruns once on independent seeds
//! before failing.

use jwr_core::analysis::correlation::empirical_autocorrelation;
use jwr_core::analysis::offsets;
use jwr_core::analysis::stats::{marginal_uniformity_test, MarginalSample};
use jwr_core::config::DiscreteConfig;
use jwr_core::jitter::DiscreteJitter;
use jwr_core::sampler::StrategyStream;
use jwr_core::seed::derive_seed;
use jwr_core::{generate_schedule, ContinuousConfigF64, DiscreteConfigF64, Strategy};

const SIGNIFICANCE: f64 = 0.01;

fn passes_with_retry(test: impl Fn(u64) -> bool) -> bool {
    test(0) || test(1)
}

fn discrete_offsets_at(
    cfg: &DiscreteConfigF64,
    strategy: Strategy,
    step: usize,
    trials: u64,
    master: u64,
) -> Vec<u64> {
    (0..trials)
        .map(|k| {
            let a = StrategyStream::new(cfg, strategy, derive_seed(master, "marginal", k))
                .nth(step)
                .unwrap();
            a - step as u64 * cfg.t()
        })
        .collect()
}

#[test]
fn discrete_marginals_are_uniform() {
    for (t, t_p) in [(2, 1), (5, 2), (10, 3), (12, 11)] {
        let cfg = DiscreteConfigF64::uniform(t, t_p).unwrap();
        for step in [0, 1, 7, 40] {
            assert!(
                passes_with_retry(|round| {
                    let b = discrete_offsets_at(&cfg, Strategy::Jwr, step, 20_000, round);
                    let test = marginal_uniformity_test(MarginalSample::Discrete { values: &b, t })
                        .unwrap();
                    !test.rejects(SIGNIFICANCE)
                }),
                "t={t} t_p={t_p} step={step}"
            );
        }
    }
}

#[test]
fn continuous_marginals_are_uniform() {
    for (t, t_p) in [(1.0, 0.1), (1.0, 0.9), (25.0, 4.0)] {
        let cfg = ContinuousConfigF64::uniform(t, t_p).unwrap();
        for step in [0usize, 3, 30] {
            assert!(
                passes_with_retry(|round| {
                    let b: Vec<f64> = (0..20_000)
                        .map(|k| {
                            let mut s = StrategyStream::new(
                                &cfg,
                                Strategy::Jwr,
                                derive_seed(round, "marginal", k),
                            );
                            s.nth(step).unwrap() - step as f64 * t
                        })
                        .collect();
                    let test =
                        marginal_uniformity_test(MarginalSample::Continuous { values: &b, t })
                            .unwrap();
                    !test.rejects(SIGNIFICANCE)
                }),
                "t={t} t_p={t_p} step={step}"
            );
        }
    }
}

#[test]
fn baselines_are_uniform_too() {
    // Random offset and per-interval resampling share the uniform marginal;
    // they differ from jwr only in their correlations.
    let cfg = DiscreteConfigF64::uniform(8, 2).unwrap();
    for strategy in [Strategy::RandomOffset, Strategy::IidPerInterval] {
        assert!(passes_with_retry(|round| {
            let b = discrete_offsets_at(&cfg, strategy, 5, 20_000, round);
            !marginal_uniformity_test(MarginalSample::Discrete { values: &b, t: 8 })
                .unwrap()
                .rejects(SIGNIFICANCE)
        }));
    }
}

#[test]
fn fixed_rate_marginal_is_degenerate() {
    let cfg = DiscreteConfigF64::uniform(8, 2).unwrap();
    let b = discrete_offsets_at(&cfg, Strategy::FixedRate, 5, 2000, 0);
    let test = marginal_uniformity_test(MarginalSample::Discrete { values: &b, t: 8 }).unwrap();
    assert!(test.rejects(SIGNIFICANCE));
}

#[test]
fn iid_offsets_are_uncorrelated() {
    let cfg = DiscreteConfigF64::uniform(6, 2).unwrap();
    assert!(passes_with_retry(|round| {
        let sch = generate_schedule(
            &cfg,
            Strategy::IidPerInterval,
            derive_seed(round, "iid", 0),
            200_000,
        );
        let b: Vec<f64> = offsets(&sch).into_iter().map(|x| x as f64).collect();
        let curve = empirical_autocorrelation(&b, 5).unwrap();
        curve.points[1..]
            .iter()
            .all(|p| p.empirical.abs() <= 3.0 * p.stderr)
    }));
}

#[test]
fn correlation_law_holds_across_alpha() {
    for alpha in [0.05, 0.2, 0.3, 0.4] {
        let cfg = DiscreteConfig::new(2, 1, DiscreteJitter::lazy_step(alpha)).unwrap();
        assert!(
            passes_with_retry(|round| {
                let sch =
                    generate_schedule(&cfg, Strategy::Jwr, derive_seed(round, "corr", 0), 400_000);
                let b: Vec<f64> = offsets(&sch).into_iter().map(|x| x as f64).collect();
                let curve = empirical_autocorrelation(&b, 10)
                    .unwrap()
                    .with_theory(alpha);
                curve.max_z_score().unwrap() <= 3.0
            }),
            "alpha={alpha}"
        );
    }
}
