//! Uniformity checks on realized schedules.
//!
//! U1 bounds every gap: `|a_{i+1} - a_i - t| <= t_p`.
//! U2 bounds drift from a shifted grid: `|a_i - (i·t + o)| <= t/2`.
//!
//! Integer schedules are checked exactly. Float schedules allow 16 ulp of
//! the timestamp magnitude.

use serde::Serialize;

use crate::sampler::Schedule;
use crate::scalar::TimeValue;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct U1Violation {
    /// Gap between timestamps `index` and `index + 1`.
    pub index: usize,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct U2Violation {
    pub index: usize,
    pub deviation: f64,
}

fn slack<T: TimeValue>(magnitude: f64) -> f64 {
    16.0 * T::EPSILON * magnitude.max(1.0)
}

pub fn check_u1<T: TimeValue>(schedule: &Schedule<T>) -> Vec<U1Violation> {
    let t = schedule.t.as_f64();
    let t_p = schedule.t_p.as_f64();
    schedule
        .timestamps
        .windows(2)
        .enumerate()
        .filter_map(|(index, w)| {
            let (a, b) = (w[0].as_f64(), w[1].as_f64());
            let gap = b - a;
            ((gap - t).abs() > t_p + slack::<T>(b.abs())).then_some(U1Violation { index, gap })
        })
        .collect()
}

pub fn check_u2<T: TimeValue>(schedule: &Schedule<T>, offset: f64) -> Vec<U2Violation> {
    let t = schedule.t.as_f64();
    schedule
        .timestamps
        .iter()
        .enumerate()
        .filter_map(|(index, a)| {
            let a = a.as_f64();
            let deviation = a - (index as f64 * t + offset);
            (deviation.abs() > t / 2.0 + slack::<T>(a.abs()))
                .then_some(U2Violation { index, deviation })
        })
        .collect()
}
