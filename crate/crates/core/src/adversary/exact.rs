//! Exact miss probabilities on discrete offset chains, exponential fits and
//! the phase-search attacker.

use serde::Serialize;

use super::{AttackError, AttackSet, MissEstimate};
use crate::analysis::chain::{OffsetChain, TransitionMatrix};
use crate::config::DiscreteConfig;
use crate::sampler::{Strategy, StrategyStream};
use crate::scalar::Scalar;
use crate::seed::derive_seed;

/// Largest horizon, in frames, accepted by the exact DP.
pub const MAX_DP_HORIZON: u64 = 1_000_000;

fn total<S: Scalar>(v: &[S]) -> S {
    v.iter().cloned().fold(S::zero(), |a, b| a + b)
}

fn check_chain<S: Scalar>(chain: &OffsetChain<S>, t: u64) -> Result<(), AttackError> {
    if chain.size() as u64 != t {
        return Err(AttackError::ChainMismatch {
            chain: chain.size(),
            t,
        });
    }
    Ok(())
}

/// Probability that the offset chain places no sample in `S ∩ [0, horizon)`.
///
/// Forward recursion over intervals carrying the probability of "no hit so
/// far" per offset: offsets whose timestamp lies in `S` are zeroed, the rest
/// move one step along the kernel.
pub fn exact_miss_dp<S: Scalar>(
    chain: &OffsetChain<S>,
    t: u64,
    attack: &AttackSet<u64>,
    horizon: u64,
) -> Result<S, AttackError> {
    check_chain(chain, t)?;
    if horizon > MAX_DP_HORIZON {
        return Err(AttackError::HorizonTooLarge {
            horizon,
            limit: MAX_DP_HORIZON,
        });
    }
    let intervals = horizon.div_ceil(t);
    let mut surv = chain.init.clone();
    for i in 0..intervals {
        for (b, p) in surv.iter_mut().enumerate() {
            let a = i * t + b as u64;
            if a < horizon && attack.contains(a) {
                *p = S::zero();
            }
        }
        if i + 1 < intervals {
            surv = chain.kernel.apply(&surv);
        }
    }
    Ok(total(&surv))
}

/// [`exact_miss_dp`] at each horizon.
pub fn exact_miss_curve<S: Scalar>(
    chain: &OffsetChain<S>,
    t: u64,
    attack: &AttackSet<u64>,
    horizons: &[u64],
) -> Result<Vec<S>, AttackError> {
    horizons
        .iter()
        .map(|&u| exact_miss_dp(chain, t, attack, u))
        .collect()
}

/// Least-squares line through `(measure, ln miss)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpFit {
    pub slope: f64,
    pub intercept: f64,
    /// Zero when the log-miss values are all equal.
    pub r_squared: f64,
    pub points_used: usize,
    /// Points dropped because their miss estimate was zero.
    pub zeros_excluded: usize,
    /// Set when the miss probability does not decrease with measure.
    pub no_decay: bool,
}

/// Fits `ln miss = intercept + slope · measure` over points with positive
/// miss probability.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<ExpFit, AttackError> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|&(m, p)| (m, p.ln()))
        .collect();
    let zeros_excluded = points.len() - usable.len();
    if usable.len() < 4 {
        return Err(AttackError::TooFewPoints {
            needed: 4,
            got: usable.len(),
        });
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(AttackError::TooFewPoints { needed: 2, got: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let flat = syy <= 1e-24 * n;
    let r_squared = if flat {
        0.0
    } else {
        (sxy * sxy / (sxx * syy)).min(1.0)
    };
    Ok(ExpFit {
        slope,
        intercept,
        r_squared,
        points_used: usable.len(),
        zeros_excluded,
        no_decay: flat || slope >= 0.0,
    })
}

/// Outcome of the phase-search attack.
///
/// The attacker watches the first `budget` samples of a stream, then inserts
/// a window of `width` frames at the same in-interval phase in each of the
/// next `horizon` intervals, choosing the phase that maximizes the chance of
/// going unseen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseSearch<S> {
    pub width: u64,
    pub budget: usize,
    pub horizon: usize,
    /// Best phase for each last observed offset; a single entry when the
    /// budget is zero.
    pub policy: Vec<usize>,
    /// Probability that no sample lands in the chosen windows.
    #[serde(skip)]
    pub evasion: S,
}

impl<S: Scalar> PhaseSearch<S> {
    pub fn evasion_f64(&self) -> f64 {
        self.evasion.to_float()
    }

    pub fn phase_for(&self, last_observed: Option<u64>) -> usize {
        match last_observed {
            Some(x) if self.policy.len() > 1 => self.policy[x as usize],
            _ => self.policy[0],
        }
    }
}

fn window_mask(t: usize, phase: usize, width: u64) -> Vec<bool> {
    let mut m = vec![false; t];
    for j in 0..width as usize {
        m[(phase + j) % t] = true;
    }
    m
}

/// Survival of `dist` through `h` intervals, each with offsets in `mask`
/// forbidden; `dist` is the law in the first attacked interval.
fn windowed_miss<S: Scalar>(
    kernel: &TransitionMatrix<S>,
    dist: &[S],
    mask: &[bool],
    h: usize,
) -> S {
    let mut surv = dist.to_vec();
    for j in 0..h {
        for (p, hit) in surv.iter_mut().zip(mask) {
            if *hit {
                *p = S::zero();
            }
        }
        if j + 1 < h {
            surv = kernel.apply(&surv);
        }
    }
    total(&surv)
}

fn best_phase<S: Scalar>(
    kernel: &TransitionMatrix<S>,
    dist: &[S],
    width: u64,
    h: usize,
) -> (usize, S) {
    let t = dist.len();
    let mut best = (0, S::zero());
    for phase in 0..t {
        let miss = windowed_miss(kernel, dist, &window_mask(t, phase, width), h);
        if phase == 0 || miss > best.1 {
            best = (phase, miss);
        }
    }
    best
}

/// Exact evasion rate of the best periodic phase for an informed attacker.
pub fn phase_search_attack<S: Scalar>(
    chain: &OffsetChain<S>,
    width: u64,
    budget: usize,
    horizon: usize,
) -> Result<PhaseSearch<S>, AttackError> {
    let t = chain.size();
    if width == 0 || width > t as u64 {
        return Err(AttackError::BadWidth { width, t: t as u64 });
    }
    let kernel = &chain.kernel;
    if budget == 0 {
        let (phase, evasion) = best_phase(kernel, &chain.init, width, horizon);
        return Ok(PhaseSearch {
            width,
            budget,
            horizon,
            policy: vec![phase],
            evasion,
        });
    }
    // Law of the last observed offset b_{budget-1}.
    let mut last = chain.init.clone();
    for _ in 1..budget {
        last = kernel.apply(&last);
    }
    let mut policy = Vec::with_capacity(t);
    let mut evasion = S::zero();
    for (x, w) in last.iter().enumerate() {
        let next = kernel.row(x).to_vec();
        let (phase, miss) = best_phase(kernel, &next, width, horizon);
        policy.push(phase);
        evasion = evasion + w.clone() * miss;
    }
    Ok(PhaseSearch {
        width,
        budget,
        horizon,
        policy,
        evasion,
    })
}

/// Replays the attacker's policy against fresh simulated streams.
pub fn phase_search_monte_carlo<S: Scalar, P: Scalar>(
    config: &DiscreteConfig<S>,
    strategy: Strategy,
    search: &PhaseSearch<P>,
    trials: usize,
    master_seed: u64,
) -> Result<MissEstimate, AttackError> {
    use rayon::prelude::*;
    if trials < super::MIN_TRIALS {
        return Err(AttackError::TooFewTrials {
            needed: super::MIN_TRIALS,
            got: trials,
        });
    }
    let t = config.t();
    let masks: Vec<Vec<bool>> = (0..t as usize)
        .map(|phase| window_mask(t as usize, phase, search.width))
        .collect();
    let evaded = (0..trials as u64)
        .into_par_iter()
        .filter(|&k| {
            let seed = derive_seed(master_seed, "phase-search", k);
            let offsets: Vec<u64> = StrategyStream::new(config, strategy, seed)
                .take(search.budget + search.horizon)
                .enumerate()
                .map(|(i, a)| a - i as u64 * t)
                .collect();
            let observed = search.budget.checked_sub(1).map(|i| offsets[i]);
            let mask = &masks[search.phase_for(observed)];
            offsets[search.budget..].iter().all(|&b| !mask[b as usize])
        })
        .count();
    Ok(MissEstimate::from_counts(
        ((search.budget + search.horizon) as u64 * t) as f64,
        (search.horizon as u64 * search.width) as f64,
        trials,
        evaded,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{miss_curve, AttackSpec};
    use crate::jitter::DiscreteJitter;
    use num_rational::BigRational;

    fn lazy(alpha: f64) -> DiscreteConfig<f64> {
        DiscreteConfig::new(2, 1, DiscreteJitter::lazy_step(alpha)).unwrap()
    }

    fn one_per_interval(t: u64, phase: u64, u: u64) -> AttackSet<u64> {
        AttackSet::build(&AttackSpec::Periodic {
            period: t as f64,
            phase: phase as f64,
            width: 1.0,
            horizon: Some(u as f64),
        })
        .unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        <BigRational as Scalar>::from_ratio(n, d)
    }

    #[test]
    fn trivial_cases() {
        let cfg = DiscreteConfig::<f64>::uniform(10, 3).unwrap();
        let chain = OffsetChain::for_strategy(Strategy::Jwr, &cfg);
        let all = AttackSet::from_intervals([(0, 10)], 10);
        assert_eq!(exact_miss_dp(&chain, 10, &all, 10).unwrap(), 0.0);
        let none = AttackSet::empty(1000);
        assert!((exact_miss_dp(&chain, 10, &none, 1000).unwrap() - 1.0).abs() < 1e-12);
        let exact = OffsetChain::for_strategy(
            Strategy::Jwr,
            &DiscreteConfig::<BigRational>::uniform(10, 3).unwrap(),
        );
        assert_eq!(exact_miss_dp(&exact, 10, &none, 1000).unwrap(), q(1, 1));
        assert!(matches!(
            exact_miss_dp(&chain, 10, &none, MAX_DP_HORIZON + 1),
            Err(AttackError::HorizonTooLarge { .. })
        ));
    }

    #[test]
    fn two_state_closed_form() {
        // Offset 0 forbidden in every interval: start in 1 (prob ½) and
        // stay there (prob (1-α) per step), so miss(m) = ½(1-α)^{m-1}.
        let cfg = DiscreteConfig::new(2, 1, DiscreteJitter::lazy_step(q(1, 3))).unwrap();
        let chain = OffsetChain::for_strategy(Strategy::Jwr, &cfg);
        for m in 1..=30u64 {
            let attack = one_per_interval(2, 0, 2 * m);
            let exact = exact_miss_dp(&chain, 2, &attack, 2 * m).unwrap();
            let expected = q(1, 2) * num_traits::pow(q(2, 3), (m - 1) as usize);
            assert_eq!(exact, expected);
        }
    }

    #[test]
    fn monotone_under_supersets() {
        let cfg = DiscreteConfig::<f64>::uniform(6, 2).unwrap();
        let chain = OffsetChain::for_strategy(Strategy::Jwr, &cfg);
        let u = 120;
        let mut prev = 1.0;
        for width in 1..=6 {
            let attack = AttackSet::build(&AttackSpec::Periodic {
                period: 6.0,
                phase: 2.0,
                width: width as f64,
                horizon: Some(u as f64),
            })
            .unwrap();
            let miss = exact_miss_dp(&chain, 6, &attack, u).unwrap();
            assert!(miss <= prev + 1e-15);
            prev = miss;
        }
        assert!(prev < 1e-12);
    }

    #[test]
    fn exact_decay_is_log_linear() {
        for alpha in [0.1, 1.0 / 3.0, 0.45] {
            let chain = OffsetChain::for_strategy(Strategy::Jwr, &lazy(alpha));
            let pts: Vec<(f64, f64)> = (10..=60u64)
                .map(|m| {
                    let attack = one_per_interval(2, 0, 2 * m);
                    (m as f64, exact_miss_dp(&chain, 2, &attack, 2 * m).unwrap())
                })
                .collect();
            let fit = fit_exponential(&pts).unwrap();
            assert!(fit.r_squared > 0.99 && fit.slope < 0.0 && !fit.no_decay);
            assert!((fit.slope - (1.0 - alpha).ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn fit_synthetic_and_degenerate() {
        let pts: Vec<(f64, f64)> = (1..=8)
            .map(|m| (m as f64, (-0.3 * m as f64).exp()))
            .collect();
        let fit = fit_exponential(&pts).unwrap();
        assert!((fit.slope + 0.3).abs() < 1e-12 && (fit.r_squared - 1.0).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = (1..=8).map(|m| (m as f64, 1.0)).collect();
        assert!(fit_exponential(&flat).unwrap().no_decay);
        let mut zeros = pts.clone();
        zeros.extend([(9.0, 0.0), (10.0, 0.0)]);
        assert_eq!(fit_exponential(&zeros).unwrap().zeros_excluded, 2);
        assert!(matches!(
            fit_exponential(&pts[..3]),
            Err(AttackError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn monte_carlo_brackets_dp() {
        let cfg = lazy(1.0 / 3.0);
        let chain = OffsetChain::for_strategy(Strategy::Jwr, &cfg);
        let horizons: Vec<u64> = (1..=8).map(|k| 10 * k).collect();
        let attack = one_per_interval(2, 0, 80);
        let curve = miss_curve(&cfg, Strategy::Jwr, &attack, &horizons, 20_000, 3).unwrap();
        let exact = exact_miss_curve(&chain, 2, &attack, &horizons).unwrap();
        let covered = curve
            .points
            .iter()
            .zip(&exact)
            .filter(|(p, e)| p.covers(**e))
            .count();
        assert!(covered >= 7, "{covered}/8");
    }

    #[test]
    fn baseline_phase_search() {
        let cfg = DiscreteConfig::<BigRational>::uniform(10, 3).unwrap();
        let fixed = OffsetChain::for_strategy(Strategy::FixedRate, &cfg);
        for budget in [0, 1] {
            assert_eq!(
                phase_search_attack(&fixed, 1, budget, 50).unwrap().evasion,
                q(1, 1)
            );
        }
        let ro = OffsetChain::for_strategy(Strategy::RandomOffset, &cfg);
        assert_eq!(
            phase_search_attack(&ro, 1, 0, 50).unwrap().evasion,
            q(9, 10)
        );
        assert_eq!(
            phase_search_attack(&ro, 3, 0, 50).unwrap().evasion,
            q(7, 10)
        );
        for budget in 1..=10 {
            assert_eq!(
                phase_search_attack(&ro, 1, budget, 50).unwrap().evasion,
                q(1, 1)
            );
        }
    }

    #[test]
    fn jwr_best_phase_still_decays() {
        let cfg = lazy(1.0 / 3.0);
        let chain = OffsetChain::for_strategy(Strategy::Jwr, &cfg);
        for budget in [0, 1, 5] {
            let pts: Vec<(f64, f64)> = (1..=8)
                .map(|k| {
                    let h = 5 * k;
                    let s = phase_search_attack(&chain, 1, budget, h).unwrap();
                    (h as f64, s.evasion)
                })
                .collect();
            let fit = fit_exponential(&pts).unwrap();
            assert!(fit.r_squared > 0.99 && fit.slope < 0.0, "{fit:?}");
        }
    }

    #[test]
    fn phase_search_monte_carlo_agrees() {
        let cfg = DiscreteConfig::<f64>::uniform(5, 2).unwrap();
        for strategy in [Strategy::Jwr, Strategy::RandomOffset] {
            let chain = OffsetChain::for_strategy(strategy, &cfg);
            for budget in [0, 2] {
                let s = phase_search_attack(&chain, 1, budget, 6).unwrap();
                let mc = phase_search_monte_carlo(&cfg, strategy, &s, 40_000, 5).unwrap();
                assert!(
                    (mc.p_hat - s.evasion).abs() < 5.0 * (mc.wilson_hi - mc.wilson_lo) + 1e-12,
                    "{strategy} budget={budget}: {} vs {}",
                    mc.p_hat,
                    s.evasion
                );
            }
        }
    }
}
