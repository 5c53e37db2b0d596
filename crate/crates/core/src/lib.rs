//! Jittering-with-reflection frame sampling.
//!
//! Samples one timestamp per interval of length `t`. Each timestamp is the
//! previous one plus `t` plus symmetric noise, mirrored back into its own
//! interval when it overshoots. The result keeps a near-fixed rate while
//! leaving no phase an attacker can rely on.
//!
//! * [`sampler`]: the continuous and discrete samplers and naive baselines.
//! * [`config`]: configuration and validation.
//! * [`analysis`]: exact offset-chain analytics and empirical statistics.
//! * [`adversary`]: insertion attacks, miss probabilities, exponential fits.
//!
//! Numeric code is generic. Timelines use [`scalar::TimeValue`] (`u64` frames
//! or `f32`/`f64` seconds), and probability masses use [`scalar::Scalar`]
//! (floats or exact rationals). The aliases below fix the common choices.

// Range checks are written `!(x > 0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversary;
pub mod analysis;
pub mod config;
pub mod io;
pub mod jitter;
pub mod properties;
pub mod sampler;
pub mod scalar;
pub mod seed;

pub use config::{ConfigError, ConfigViolation, JitterSpec, Mode, SamplingConfig, ValidatedConfig};
pub use sampler::{generate_schedule, Schedule, Strategy};

/// Arbitrary-precision rational masses.
pub type Rational = num_rational::BigRational;
/// Machine-word rational masses.
pub type Rational64 = num_rational::Rational64;

pub type ContinuousSampler = sampler::ContinuousJwr<f64>;
pub type ContinuousSamplerF32 = sampler::ContinuousJwr<f32>;
pub type DiscreteSampler = sampler::DiscreteJwr;

pub type ContinuousConfigF64 = config::ContinuousConfig<f64>;
pub type DiscreteConfigF64 = config::DiscreteConfig<f64>;
pub type ExactDiscreteConfig = config::DiscreteConfig<Rational>;

pub type TransitionMatrixF64 = analysis::chain::TransitionMatrix<f64>;
pub type ExactTransitionMatrix = analysis::chain::TransitionMatrix<Rational>;

pub type ContinuousSchedule = Schedule<f64>;
pub type DiscreteSchedule = Schedule<u64>;
