//! Chain-theoretic quantities and empirical statistics of schedules.

pub mod chain;
pub mod correlation;
pub mod spectral;
pub mod stats;

use thiserror::Error;

use crate::sampler::Schedule;
use crate::scalar::TimeValue;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("series of length {got} is too short, need at least {needed}")]
    SeriesTooShort { needed: usize, got: usize },
    #[error("flip probability is defined for t = 2 only (got t = {t})")]
    NotTwoState { t: u64 },
    #[error("alpha = {0} outside the open interval (0, 0.5)")]
    AlphaOutOfDomain(f64),
    #[error("need at least two timestamps")]
    TooFewTimestamps,
    #[error("initial distribution is not a probability vector of length {size}")]
    InvalidDistribution { size: usize },
    #[error("series has zero variance")]
    DegenerateSeries,
    #[error("no lag has a correlation resolvable above its standard error")]
    NoUsableLags,
}

/// `b_i = a_i - i·t` for every timestamp.
///
/// Values below the interval start (only possible for hand-built schedules)
/// are clamped to zero.
pub fn offsets<T: TimeValue>(schedule: &Schedule<T>) -> Vec<T> {
    schedule
        .timestamps
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let base = T::from_index(i as u64) * schedule.t;
            if a < base {
                T::zero()
            } else {
                a - base
            }
        })
        .collect()
}

/// Unbiased sample variance of consecutive gaps `a_{i+1} - a_i`.
pub fn gap_variance<T: TimeValue>(schedule: &Schedule<T>) -> Result<f64, AnalysisError> {
    if schedule.len() < 2 {
        return Err(AnalysisError::TooFewTimestamps);
    }
    let gaps: Vec<f64> = schedule
        .timestamps
        .windows(2)
        .map(|w| w[1].as_f64() - w[0].as_f64())
        .collect();
    Ok(sample_variance(&gaps))
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased variance; zero for fewer than two values.
pub(crate) fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}
