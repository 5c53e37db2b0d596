//! Monte Carlo detection trials.

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::{AttackError, AttackSet, ExpFit};
use crate::sampler::{SamplingDomain, Strategy, StrategyStream};
use crate::scalar::TimeValue;
use crate::seed::derive_seed;

/// Fewest trials accepted by the estimators.
pub const MIN_TRIALS: usize = 100;

/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

const TRIAL_TAG: &str = "trial";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome<T> {
    pub detected: bool,
    /// Earliest sample that fell inside the attack set.
    pub first_hit: Option<T>,
    pub measure_covered: f64,
}

/// Runs one schedule up to the attack horizon.
pub fn run_trial<D: SamplingDomain>(
    domain: &D,
    strategy: Strategy,
    attack: &AttackSet<D::Time>,
    seed: u64,
) -> TrialOutcome<D::Time> {
    let first_hit = first_hit(domain, strategy, attack, seed);
    TrialOutcome {
        detected: first_hit.is_some(),
        first_hit,
        measure_covered: attack.measure(),
    }
}

fn first_hit<D: SamplingDomain>(
    domain: &D,
    strategy: Strategy,
    attack: &AttackSet<D::Time>,
    seed: u64,
) -> Option<D::Time> {
    if attack.is_empty() {
        return None;
    }
    let u = attack.horizon();
    StrategyStream::new(domain, strategy, seed)
        .take_while(|a| *a < u)
        .find(|a| attack.contains(*a))
}

/// Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = (center - half).clamp(0.0, 1.0).min(p);
    let hi = (center + half).clamp(0.0, 1.0).max(p);
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MissEstimate {
    pub horizon: f64,
    pub measure: f64,
    pub trials: usize,
    pub misses: usize,
    pub p_hat: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    /// Exact miss probability, when an oracle was run.
    pub exact: Option<f64>,
}

impl MissEstimate {
    pub fn from_counts(horizon: f64, measure: f64, trials: usize, misses: usize) -> Self {
        let (wilson_lo, wilson_hi) = wilson_interval(misses, trials, WILSON_Z);
        MissEstimate {
            horizon,
            measure,
            trials,
            misses,
            p_hat: misses as f64 / trials as f64,
            wilson_lo,
            wilson_hi,
            exact: None,
        }
    }

    pub fn covers(&self, p: f64) -> bool {
        self.wilson_lo <= p && p <= self.wilson_hi
    }
}

fn check_trials(trials: usize) -> Result<(), AttackError> {
    if trials < MIN_TRIALS {
        return Err(AttackError::TooFewTrials {
            needed: MIN_TRIALS,
            got: trials,
        });
    }
    Ok(())
}

/// Fraction of `trials` schedules that miss the attack, with a Wilson 95%
/// interval. Trial `k` uses seed `derive_seed(master_seed, "trial", k)`.
pub fn estimate_miss_probability<D>(
    domain: &D,
    strategy: Strategy,
    attack: &AttackSet<D::Time>,
    trials: usize,
    master_seed: u64,
) -> Result<MissEstimate, AttackError>
where
    D: SamplingDomain + Sync,
{
    check_trials(trials)?;
    let misses = (0..trials as u64)
        .into_par_iter()
        .filter(|&k| {
            first_hit(
                domain,
                strategy,
                attack,
                derive_seed(master_seed, TRIAL_TAG, k),
            )
            .is_none()
        })
        .count();
    Ok(MissEstimate::from_counts(
        attack.horizon().as_f64(),
        attack.measure(),
        trials,
        misses,
    ))
}

/// Miss estimates at several horizons of one attack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissCurve {
    pub strategy: Strategy,
    pub points: Vec<MissEstimate>,
}

impl MissCurve {
    /// Exponential fit of the point estimates against measure.
    pub fn fit(&self) -> Result<ExpFit, AttackError> {
        let pts: Vec<(f64, f64)> = self.points.iter().map(|p| (p.measure, p.p_hat)).collect();
        super::fit_exponential(&pts)
    }

    /// Exponential fit of the exact column, if every point has one.
    pub fn fit_exact(&self) -> Option<Result<ExpFit, AttackError>> {
        let pts: Option<Vec<(f64, f64)>> = self
            .points
            .iter()
            .map(|p| p.exact.map(|e| (p.measure, e)))
            .collect();
        pts.map(|pts| super::fit_exponential(&pts))
    }
}

/// Miss estimates at each of `horizons`, all from the same trials.
///
/// Each trial runs once to the largest horizon and records its first hit;
/// it missed at horizon `u` if that hit is absent or not before `u`.
pub fn miss_curve<D>(
    domain: &D,
    strategy: Strategy,
    attack: &AttackSet<D::Time>,
    horizons: &[D::Time],
    trials: usize,
    master_seed: u64,
) -> Result<MissCurve, AttackError>
where
    D: SamplingDomain + Sync,
{
    check_trials(trials)?;
    let max_u = horizons
        .iter()
        .copied()
        .fold(D::Time::zero(), |m, u| if u > m { u } else { m });
    let full = attack.truncate(max_u);
    let hits: Vec<Option<D::Time>> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            first_hit(
                domain,
                strategy,
                &full,
                derive_seed(master_seed, TRIAL_TAG, k),
            )
        })
        .collect();
    let points = horizons
        .iter()
        .map(|&u| {
            let misses = hits.iter().filter(|h| h.is_none_or(|a| a >= u)).count();
            MissEstimate::from_counts(u.as_f64(), full.measure_below(u), trials, misses)
        })
        .collect();
    Ok(MissCurve { strategy, points })
}
