//! Jittering-with-reflection samplers and the naive baselines.
//!
//! Samplers keep the interval index `i` and the in-interval offset
//! `b = a_i - i·t` rather than the absolute timestamp, so the update never
//! loses precision as `i` grows. Each step draws a symmetric jitter `v`,
//! moves the offset to `b + v` and mirrors it back into the interval if it
//! overshot. Because `t_p < t`, one reflection always suffices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::{ContinuousConfig, DiscreteConfig};
use crate::jitter::{ContinuousDraw, DiscreteDraw};
use crate::scalar::{Real, Scalar, TimeValue};
use crate::seed::{rng_from_seed, SamplerRng};

/// How a schedule was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Jittering with reflection.
    Jwr,
    /// `a_i = i·t`.
    FixedRate,
    /// `a_i = i·t + o`, one `o` per schedule.
    RandomOffset,
    /// `a_i` independently uniform in interval `i`.
    IidPerInterval,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Jwr,
        Strategy::FixedRate,
        Strategy::RandomOffset,
        Strategy::IidPerInterval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Jwr => "jwr",
            Strategy::FixedRate => "fixed_rate",
            Strategy::RandomOffset => "random_offset",
            Strategy::IidPerInterval => "iid_per_interval",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown strategy {s:?}"))
    }
}

/// Mirror a continuous raw offset back into `[0, t]`.
///
/// Boundary values pass through unchanged.
pub fn reflect_offset_continuous<R: Real>(raw: R, t: R) -> R {
    if raw > t {
        t + t - raw
    } else if raw < R::zero() {
        -raw
    } else {
        raw
    }
}

/// Mirror a discrete raw offset back into `{0, …, t-1}`.
pub fn reflect_offset_discrete(raw: i64, t: u64) -> u64 {
    let t = t as i64;
    let b = if raw >= t {
        2 * t - raw - 1
    } else if raw < 0 {
        -raw - 1
    } else {
        raw
    };
    debug_assert!(
        (0..t).contains(&b),
        "single reflection overshot: raw={raw}, t={t}"
    );
    b as u64
}

/// Reflect an absolute candidate timestamp into `[i·t, (i+1)·t]`.
pub fn reflect_continuous<R: Real>(b_raw: R, i: u64, t: R) -> R {
    let base = R::from_index(i) * t;
    base + reflect_offset_continuous(b_raw - base, t)
}

/// Reflect an absolute candidate timestamp into `{i·t, …, (i+1)·t - 1}`.
pub fn reflect_discrete(b_raw: i64, i: u64, t: u64) -> u64 {
    let base = i * t;
    base + reflect_offset_discrete(b_raw - base as i64, t)
}

/// One step of the continuous offset chain.
pub fn step_offset_continuous<R: Real>(b: R, v: R, t: R) -> R {
    reflect_offset_continuous(b + v, t)
}

/// One step of the discrete offset chain.
pub fn step_offset_discrete(b: u64, v: i64, t: u64) -> u64 {
    reflect_offset_discrete(b as i64 + v, t)
}

/// Position of a sampler: interval index, in-interval offset, generator.
///
/// A step reads nothing but these three fields.
#[derive(Debug, Clone)]
pub struct SamplerState<T> {
    interval: u64,
    offset: T,
    rng: SamplerRng,
}

impl<T: TimeValue> SamplerState<T> {
    pub fn interval(&self) -> u64 {
        self.interval
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn timestamp(&self, t: T) -> T {
        T::from_index(self.interval) * t + self.offset
    }
}

/// Continuous jittering-with-reflection sampler.
///
/// Iterating yields `a_0, a_1, …` without end.
#[derive(Debug, Clone)]
pub struct ContinuousJwr<R> {
    t: R,
    draw: ContinuousDraw<R>,
    state: SamplerState<R>,
    emitted_first: bool,
}

impl<R: Real> ContinuousJwr<R> {
    /// Seeds the generator and draws `a_0` uniformly from `[0, t)`.
    pub fn new(config: &ContinuousConfig<R>, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let offset = R::uniform_below(&mut rng, config.t());
        Self::from_parts(config, offset, rng)
    }

    /// Starts from a chosen `a_0 ∈ [0, t]` instead of a uniform draw.
    pub fn with_initial_offset(config: &ContinuousConfig<R>, seed: u64, a0: R) -> Self {
        assert!(a0 >= R::zero() && a0 <= config.t(), "a_0 outside [0, t]");
        Self::from_parts(config, a0, rng_from_seed(seed))
    }

    fn from_parts(config: &ContinuousConfig<R>, offset: R, rng: SamplerRng) -> Self {
        ContinuousJwr {
            t: config.t(),
            draw: config.jitter().draw(),
            state: SamplerState {
                interval: 0,
                offset,
                rng,
            },
            emitted_first: false,
        }
    }

    pub fn state(&self) -> &SamplerState<R> {
        &self.state
    }

    /// Current timestamp `a_i`.
    pub fn current(&self) -> R {
        self.state.timestamp(self.t)
    }

    /// Advances with a caller-supplied jitter value.
    pub fn advance_with(&mut self, v: R) -> R {
        self.state.offset = step_offset_continuous(self.state.offset, v, self.t);
        self.state.interval += 1;
        self.current()
    }

    /// Draws `v`, advances one interval and returns `a_i`.
    pub fn next_sample(&mut self) -> R {
        let v = self.draw.sample(&mut self.state.rng);
        self.advance_with(v)
    }
}

impl<R: Real> Iterator for ContinuousJwr<R> {
    type Item = R;

    fn next(&mut self) -> Option<R> {
        if !self.emitted_first {
            self.emitted_first = true;
            return Some(self.current());
        }
        Some(self.next_sample())
    }
}

/// Discrete jittering-with-reflection sampler.
#[derive(Debug, Clone)]
pub struct DiscreteJwr {
    t: u64,
    draw: DiscreteDraw,
    state: SamplerState<u64>,
    emitted_first: bool,
}

impl DiscreteJwr {
    /// Seeds the generator and draws `a_0` uniformly from `{0, …, t-1}`.
    pub fn new<S: Scalar>(config: &DiscreteConfig<S>, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let offset = u64::uniform_below(&mut rng, config.t());
        Self::from_parts(config, offset, rng)
    }

    pub fn with_initial_offset<S: Scalar>(config: &DiscreteConfig<S>, seed: u64, a0: u64) -> Self {
        assert!(a0 < config.t(), "a_0 outside {{0..t-1}}");
        Self::from_parts(config, a0, rng_from_seed(seed))
    }

    fn from_parts<S: Scalar>(config: &DiscreteConfig<S>, offset: u64, rng: SamplerRng) -> Self {
        DiscreteJwr {
            t: config.t(),
            draw: config.jitter().draw(),
            state: SamplerState {
                interval: 0,
                offset,
                rng,
            },
            emitted_first: false,
        }
    }

    pub fn state(&self) -> &SamplerState<u64> {
        &self.state
    }

    pub fn current(&self) -> u64 {
        self.state.timestamp(self.t)
    }

    pub fn advance_with(&mut self, v: i64) -> u64 {
        self.state.offset = step_offset_discrete(self.state.offset, v, self.t);
        self.state.interval += 1;
        self.current()
    }

    pub fn next_sample(&mut self) -> u64 {
        let v = self.draw.sample(&mut self.state.rng);
        self.advance_with(v)
    }
}

impl Iterator for DiscreteJwr {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if !self.emitted_first {
            self.emitted_first = true;
            return Some(self.current());
        }
        Some(self.next_sample())
    }
}

/// Fixed-rate, random-offset and iid-per-interval samplers.
#[derive(Debug, Clone)]
pub struct Baseline<T> {
    kind: Strategy,
    t: T,
    state: SamplerState<T>,
    emitted_first: bool,
}

impl<T: TimeValue> Baseline<T> {
    /// Panics if `kind` is [`Strategy::Jwr`].
    pub fn new(kind: Strategy, t: T, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let offset = match kind {
            Strategy::FixedRate => T::zero(),
            Strategy::RandomOffset | Strategy::IidPerInterval => T::uniform_below(&mut rng, t),
            Strategy::Jwr => panic!("jwr is not a baseline"),
        };
        Baseline {
            kind,
            t,
            state: SamplerState {
                interval: 0,
                offset,
                rng,
            },
            emitted_first: false,
        }
    }

    pub fn next_sample(&mut self) -> T {
        if self.kind == Strategy::IidPerInterval {
            self.state.offset = T::uniform_below(&mut self.state.rng, self.t);
        }
        self.state.interval += 1;
        self.state.timestamp(self.t)
    }
}

impl<T: TimeValue> Iterator for Baseline<T> {
    type Item = T;

    fn next(&mut self) -> Option<T> {
        if !self.emitted_first {
            self.emitted_first = true;
            return Some(self.state.timestamp(self.t));
        }
        Some(self.next_sample())
    }
}

/// A validated configuration that can drive samplers on its timeline.
pub trait SamplingDomain {
    type Time: TimeValue;
    type Jwr: Iterator<Item = Self::Time> + Clone + Send;

    fn interval(&self) -> Self::Time;
    fn perturbation(&self) -> Self::Time;
    fn jwr(&self, seed: u64) -> Self::Jwr;
    /// The U2 offset `o` for jittering with reflection.
    fn u2_offset(&self) -> f64;
}

impl<R: Real> SamplingDomain for ContinuousConfig<R> {
    type Time = R;
    type Jwr = ContinuousJwr<R>;

    fn interval(&self) -> R {
        self.t()
    }
    fn perturbation(&self) -> R {
        self.t_p()
    }
    fn jwr(&self, seed: u64) -> ContinuousJwr<R> {
        ContinuousJwr::new(self, seed)
    }
    fn u2_offset(&self) -> f64 {
        self.t().to_float() / 2.0
    }
}

impl<S: Scalar> SamplingDomain for DiscreteConfig<S> {
    type Time = u64;
    type Jwr = DiscreteJwr;

    fn interval(&self) -> u64 {
        self.t()
    }
    fn perturbation(&self) -> u64 {
        self.t_p()
    }
    fn jwr(&self, seed: u64) -> DiscreteJwr {
        DiscreteJwr::new(self, seed)
    }
    fn u2_offset(&self) -> f64 {
        (self.t() as f64 - 1.0) / 2.0
    }
}

/// An unbounded timestamp stream for any strategy.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum StrategyStream<D: SamplingDomain> {
    Jwr(D::Jwr),
    Baseline(Baseline<D::Time>),
}

impl<D: SamplingDomain> StrategyStream<D> {
    pub fn new(domain: &D, strategy: Strategy, seed: u64) -> Self {
        match strategy {
            Strategy::Jwr => StrategyStream::Jwr(domain.jwr(seed)),
            other => StrategyStream::Baseline(Baseline::new(other, domain.interval(), seed)),
        }
    }
}

impl<D: SamplingDomain> Iterator for StrategyStream<D> {
    type Item = D::Time;

    fn next(&mut self) -> Option<D::Time> {
        match self {
            StrategyStream::Jwr(s) => s.next(),
            StrategyStream::Baseline(s) => s.next(),
        }
    }
}

/// A finite realized schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule<T> {
    pub strategy: Strategy,
    pub t: T,
    pub t_p: T,
    pub seed: u64,
    pub timestamps: Vec<T>,
}

impl<T: TimeValue> Schedule<T> {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.timestamps.windows(2).all(|w| w[0] < w[1])
    }
}

/// First `n` timestamps of `strategy` under `domain`. Panics if `n == 0`.
pub fn generate_schedule<D: SamplingDomain>(
    domain: &D,
    strategy: Strategy,
    seed: u64,
    n: usize,
) -> Schedule<D::Time> {
    assert!(n >= 1, "schedule length must be at least 1");
    Schedule {
        strategy,
        t: domain.interval(),
        t_p: domain.perturbation(),
        seed,
        timestamps: StrategyStream::new(domain, strategy, seed)
            .take(n)
            .collect(),
    }
}
