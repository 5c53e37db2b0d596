//! Schedule files and fixed-precision number formatting.

use serde::{Deserialize, Serialize};

use crate::config::{Mode, SamplingConfig};
use crate::sampler::{Schedule, Strategy};

/// Significant digits kept when writing real numbers.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to twelve significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Shortest decimal text of `x` rounded to twelve significant digits.
pub fn format_number(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        // Avoid "-0".
        return "0".into();
    }
    format!("{r}")
}

/// Timestamps as stored on disk: integers or rounded decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Timestamps {
    Discrete(Vec<u64>),
    Continuous(Vec<f64>),
}

/// On-disk schedule: `{strategy, mode, t, t_p, jitter, seed, timestamps}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub strategy: Strategy,
    #[serde(flatten)]
    pub config: SamplingConfig,
    pub seed: u64,
    pub timestamps: Timestamps,
}

impl ScheduleFile {
    pub fn discrete(schedule: &Schedule<u64>, config: &SamplingConfig) -> Self {
        ScheduleFile {
            strategy: schedule.strategy,
            config: config.clone(),
            seed: schedule.seed,
            timestamps: Timestamps::Discrete(schedule.timestamps.clone()),
        }
    }

    pub fn continuous(schedule: &Schedule<f64>, config: &SamplingConfig) -> Self {
        ScheduleFile {
            strategy: schedule.strategy,
            config: config.clone(),
            seed: schedule.seed,
            timestamps: Timestamps::Continuous(
                schedule.timestamps.iter().map(|&a| round_sig(a)).collect(),
            ),
        }
    }

    pub fn len(&self) -> usize {
        match &self.timestamps {
            Timestamps::Discrete(v) => v.len(),
            Timestamps::Continuous(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The integer schedule, if this is a discrete file.
    pub fn to_discrete(&self) -> Option<Schedule<u64>> {
        if self.config.mode != Mode::Discrete {
            return None;
        }
        match &self.timestamps {
            Timestamps::Discrete(v) => Some(Schedule {
                strategy: self.strategy,
                t: self.config.t as u64,
                t_p: self.config.t_p as u64,
                seed: self.seed,
                timestamps: v.clone(),
            }),
            Timestamps::Continuous(_) => None,
        }
    }

    /// The real-valued schedule; discrete timestamps are widened.
    pub fn to_continuous(&self) -> Schedule<f64> {
        let timestamps = match &self.timestamps {
            Timestamps::Discrete(v) => v.iter().map(|&a| a as f64).collect(),
            Timestamps::Continuous(v) => v.clone(),
        };
        Schedule {
            strategy: self.strategy,
            t: self.config.t,
            t_p: self.config.t_p,
            seed: self.seed,
            timestamps,
        }
    }
}
