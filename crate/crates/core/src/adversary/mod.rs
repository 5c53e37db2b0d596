//! Frame-insertion attacks and how often samplers miss them.
//!
//! An attack is a set `S` of timestamps at which an adversary inserts
//! content. A schedule detects the attack if any sample lands in `S`
//! before the horizon; otherwise it misses. This module builds attack sets,
//! estimates miss probabilities by simulation, computes them exactly for
//! discrete offset chains and fits their exponential decay.

mod exact;
mod trial;

pub use exact::{
    exact_miss_curve, exact_miss_dp, fit_exponential, phase_search_attack,
    phase_search_monte_carlo, ExpFit, PhaseSearch, MAX_DP_HORIZON,
};
pub use trial::{
    estimate_miss_probability, miss_curve, run_trial, wilson_interval, MissCurve, MissEstimate,
    TrialOutcome, MIN_TRIALS, WILSON_Z,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::TimeValue;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error("{name} must be positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("phase {phase} must lie in [0, period = {period})")]
    PhaseOutOfRange { phase: f64, period: f64 },
    #[error("discrete attack parameter {name} = {value} is not a nonnegative integer")]
    NonIntegral { name: &'static str, value: f64 },
    #[error("attack set is empty within the horizon {horizon}")]
    EmptyWithinHorizon { horizon: f64 },
    #[error("no horizon given and none can be inferred")]
    MissingHorizon,
    #[error("horizon {horizon} exceeds the exact-DP limit {limit}")]
    HorizonTooLarge { horizon: u64, limit: u64 },
    #[error("need at least {needed} trials, got {got}")]
    TooFewTrials { needed: usize, got: usize },
    #[error("need at least {needed} points with positive miss probability, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("offset chain has {chain} states but the interval is {t}")]
    ChainMismatch { chain: usize, t: u64 },
    #[error("width {width} must be between 1 and t = {t}")]
    BadWidth { width: u64, t: u64 },
}

/// JSON form of an attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackSpec {
    /// `S = ∪_k [k·period + phase, k·period + phase + width)`.
    Periodic {
        period: f64,
        phase: f64,
        width: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<f64>,
    },
    /// Listed timestamps (unit cells in discrete mode) and `[lo, hi)` intervals.
    Explicit {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        timestamps: Vec<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        intervals: Vec<(f64, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<f64>,
    },
    /// Everything before the horizon except the listed sample times.
    ComplementOfSchedule {
        timestamps: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<f64>,
    },
}

impl AttackSpec {
    pub fn horizon(&self) -> Option<f64> {
        match self {
            AttackSpec::Periodic { horizon, .. }
            | AttackSpec::Explicit { horizon, .. }
            | AttackSpec::ComplementOfSchedule { horizon, .. } => *horizon,
        }
    }

    pub fn with_horizon(mut self, u: f64) -> Self {
        match &mut self {
            AttackSpec::Periodic { horizon, .. }
            | AttackSpec::Explicit { horizon, .. }
            | AttackSpec::ComplementOfSchedule { horizon, .. } => *horizon = Some(u),
        }
        self
    }
}

/// A finite attack: sorted, disjoint half-open intervals inside `[0, horizon)`.
///
/// On an integer timeline the timestamp `k` is the cell `[k, k+1)`, so
/// measure is cardinality.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackSet<T> {
    intervals: Vec<(T, T)>,
    horizon: T,
}

impl<T: TimeValue> AttackSet<T> {
    /// Materializes `spec`, using the spec's own horizon.
    pub fn build(spec: &AttackSpec) -> Result<Self, AttackError> {
        let set = Self::build_unchecked(spec)?;
        if set.intervals.is_empty() {
            return Err(AttackError::EmptyWithinHorizon {
                horizon: set.horizon.as_f64(),
            });
        }
        Ok(set)
    }

    /// An attack with no timestamps at all.
    pub fn empty(horizon: T) -> Self {
        AttackSet {
            intervals: Vec::new(),
            horizon,
        }
    }

    /// Merges arbitrary `[lo, hi)` pieces and clips them to `[0, horizon)`.
    pub fn from_intervals(pieces: impl IntoIterator<Item = (T, T)>, horizon: T) -> Self {
        let mut v: Vec<(T, T)> = pieces
            .into_iter()
            .map(|(lo, hi)| {
                let lo = if lo < T::zero() { T::zero() } else { lo };
                let hi = if hi > horizon { horizon } else { hi };
                (lo, hi)
            })
            .filter(|(lo, hi)| lo < hi)
            .collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("ordered timestamps"));
        let mut merged: Vec<(T, T)> = Vec::with_capacity(v.len());
        for (lo, hi) in v {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => merged.push((lo, hi)),
            }
        }
        AttackSet {
            intervals: merged,
            horizon,
        }
    }

    /// Like [`AttackSet::build`] but allows an empty result.
    pub fn build_unchecked(spec: &AttackSpec) -> Result<Self, AttackError> {
        let horizon = match spec.horizon() {
            Some(u) => u,
            None => infer_horizon::<T>(spec).ok_or(AttackError::MissingHorizon)?,
        };
        let u = lift::<T>("horizon", horizon)?;
        if !(u > T::zero()) {
            return Err(AttackError::NonPositive {
                name: "horizon",
                value: horizon,
            });
        }
        let unit = unit_width::<T>();
        match spec {
            AttackSpec::Periodic {
                period,
                phase,
                width,
                ..
            } => {
                let p = lift::<T>("period", *period)?;
                let phi = lift::<T>("phase", *phase)?;
                let w = lift::<T>("width", *width)?;
                for (name, value, x) in [("period", *period, p), ("width", *width, w)] {
                    if !(x > T::zero()) {
                        return Err(AttackError::NonPositive { name, value });
                    }
                }
                if !(phi >= T::zero() && phi < p) {
                    return Err(AttackError::PhaseOutOfRange {
                        phase: *phase,
                        period: *period,
                    });
                }
                let mut pieces = Vec::new();
                let mut k = 0u64;
                loop {
                    let lo = T::from_index(k) * p + phi;
                    if !(lo < u) {
                        break;
                    }
                    pieces.push((lo, lo + w));
                    k += 1;
                }
                Ok(Self::from_intervals(pieces, u))
            }
            AttackSpec::Explicit {
                timestamps,
                intervals,
                ..
            } => {
                let mut pieces = Vec::with_capacity(timestamps.len() + intervals.len());
                for &x in timestamps {
                    let x = lift::<T>("timestamp", x)?;
                    pieces.push((x, x + unit));
                }
                for &(lo, hi) in intervals {
                    pieces.push((
                        lift::<T>("interval start", lo)?,
                        lift::<T>("interval end", hi)?,
                    ));
                }
                Ok(Self::from_intervals(pieces, u))
            }
            AttackSpec::ComplementOfSchedule { timestamps, .. } => {
                let mut points = Vec::with_capacity(timestamps.len());
                for &x in timestamps {
                    points.push(lift::<T>("timestamp", x)?);
                }
                points.sort_by(|a, b| a.partial_cmp(b).expect("ordered timestamps"));
                let mut pieces = Vec::with_capacity(points.len() + 1);
                let mut start = T::zero();
                for x in points {
                    pieces.push((start, x));
                    start = after(x);
                }
                pieces.push((start, u));
                Ok(Self::from_intervals(pieces, u))
            }
        }
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: T) -> bool {
        let idx = self.intervals.partition_point(|(lo, _)| *lo <= x);
        idx > 0 && x < self.intervals[idx - 1].1
    }

    /// Measure of `S ∩ [0, horizon)`.
    pub fn measure(&self) -> f64 {
        self.measure_below(self.horizon)
    }

    /// Measure of `S ∩ [0, u)`.
    pub fn measure_below(&self, u: T) -> f64 {
        self.intervals
            .iter()
            .take_while(|(lo, _)| *lo < u)
            .map(|&(lo, hi)| {
                let hi = if hi > u { u } else { hi };
                (hi - lo).as_f64()
            })
            .sum()
    }

    /// The same set cut off at an earlier horizon.
    pub fn truncate(&self, u: T) -> Self {
        Self::from_intervals(self.intervals.iter().copied(), u)
    }
}

/// The smallest representable time step: 1 on integer timelines, 0 (a point)
/// on continuous ones.
fn unit_width<T: TimeValue>() -> T {
    if T::DISCRETE {
        T::one()
    } else {
        T::zero()
    }
}

/// The first timestamp strictly after `x`.
fn after<T: TimeValue>(x: T) -> T {
    if T::DISCRETE {
        x + T::one()
    } else {
        let up = x.as_f64().next_up();
        <T as num_traits::NumCast>::from(up)
            .filter(|y| *y > x)
            .unwrap_or(x)
    }
}

fn lift<T: TimeValue>(name: &'static str, value: f64) -> Result<T, AttackError> {
    if T::DISCRETE && (value.fract() != 0.0 || value < 0.0) || !value.is_finite() {
        return Err(AttackError::NonIntegral { name, value });
    }
    <T as num_traits::NumCast>::from(value).ok_or(AttackError::NonIntegral { name, value })
}

fn infer_horizon<T: TimeValue>(spec: &AttackSpec) -> Option<f64> {
    let unit = unit_width::<T>().as_f64();
    match spec {
        AttackSpec::Periodic { .. } => None,
        AttackSpec::Explicit {
            timestamps,
            intervals,
            ..
        } => timestamps
            .iter()
            .map(|x| x + unit)
            .chain(intervals.iter().map(|iv| iv.1))
            .reduce(f64::max),
        AttackSpec::ComplementOfSchedule { timestamps, .. } => {
            timestamps.iter().map(|x| x + unit).reduce(f64::max)
        }
    }
}
