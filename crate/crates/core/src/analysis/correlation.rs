//! Offset autocorrelation and the two-state correlation law.
//!
//! For `t = 2` the offset chain flips with probability `α` per step, so
//! `corr(b_i, b_{i+m}) = (1 - 2α)^m` and the correlation length, the lag at
//! which this falls to `1/e`, is `-1 / ln(1 - 2α)`.

use serde::Serialize;

use super::{mean, sample_variance, AnalysisError};

pub fn theoretical_correlation(alpha: f64, lag: u32) -> f64 {
    (1.0 - 2.0 * alpha).powi(lag as i32)
}

/// `l_c = -1 / ln(1 - 2α)` for `0 < α < 0.5`.
pub fn correlation_length(alpha: f64) -> Result<f64, AnalysisError> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(AnalysisError::AlphaOutOfDomain(alpha));
    }
    Ok(-1.0 / (1.0 - 2.0 * alpha).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationPoint {
    pub lag: usize,
    pub empirical: f64,
    pub theoretical: Option<f64>,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationCurve {
    pub points: Vec<CorrelationPoint>,
    pub samples: usize,
    /// Block length used for the standard errors.
    pub block_len: usize,
}

impl CorrelationCurve {
    /// Fills the theoretical column with `(1 - 2α)^m`.
    pub fn with_theory(mut self, alpha: f64) -> Self {
        for p in &mut self.points {
            p.theoretical = Some(theoretical_correlation(alpha, p.lag as u32));
        }
        self
    }

    /// Largest `|empirical - theoretical| / stderr` over lags `1..`.
    pub fn max_z_score(&self) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.lag > 0)
            .map(|p| p.theoretical.map(|th| (p.empirical - th).abs() / p.stderr))
            .try_fold(0.0_f64, |acc, z| z.map(|z| acc.max(z)))
    }
}

/// `r(m) = [Σ_{i<n-m} (x_i - x̄)(x_{i+m} - x̄)] / [Σ (x_i - x̄)²]`.
fn autocorrelation(x: &[f64], center: f64, denom: f64, lag: usize) -> f64 {
    let num: f64 = x
        .iter()
        .zip(&x[lag..])
        .map(|(a, b)| (a - center) * (b - center))
        .sum();
    num / denom
}

/// Sample autocorrelation for lags `0..=max_lag`.
///
/// Every lag uses all overlapping pairs and the global mean. Standard errors
/// come from splitting the series into independent blocks of length
/// `max(⌈10·l̂_c⌉, 10·(M+1))`, where `l̂_c` is read off the lag-1 estimate,
/// and taking the spread of the per-block estimates.
pub fn empirical_autocorrelation(
    series: &[f64],
    max_lag: usize,
) -> Result<CorrelationCurve, AnalysisError> {
    let needed = (100 * max_lag).max(2);
    if series.len() < needed {
        return Err(AnalysisError::SeriesTooShort {
            needed,
            got: series.len(),
        });
    }
    let n = series.len();
    let center = mean(series);
    let ss: f64 = series.iter().map(|x| (x - center) * (x - center)).sum();
    if ss <= 0.0 {
        return Err(AnalysisError::DegenerateSeries);
    }
    let r: Vec<f64> = (0..=max_lag)
        .map(|m| autocorrelation(series, center, ss, m))
        .collect();

    let lc_hat = match r.get(1) {
        Some(&r1) if r1 > 0.0 && r1 < 1.0 => -1.0 / r1.ln(),
        _ => 0.0,
    };
    let block_len = ((10.0 * lc_hat).ceil() as usize).max(10 * (max_lag + 1));
    let blocks: Vec<&[f64]> = series.chunks_exact(block_len).collect();

    let points = (0..=max_lag)
        .map(|m| {
            let stderr = if m == 0 || blocks.len() < 2 {
                0.0
            } else {
                let per_block: Vec<f64> = blocks
                    .iter()
                    .map(|b| {
                        let ss_b: f64 = b.iter().map(|x| (x - center) * (x - center)).sum();
                        if ss_b > 0.0 {
                            autocorrelation(b, center, ss_b, m)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                (sample_variance(&per_block) / per_block.len() as f64).sqrt()
            };
            CorrelationPoint {
                lag: m,
                empirical: r[m],
                theoretical: None,
                stderr,
            }
        })
        .collect();
    Ok(CorrelationCurve {
        points,
        samples: n,
        block_len,
    })
}

/// Correlation length from a measured curve.
///
/// Fits `ln r(m) = -m / l_c` through the origin by weighted least squares
/// over the lags whose correlation exceeds three standard errors, with
/// delta-method weights `(r / se)²`.
pub fn fit_correlation_length(curve: &CorrelationCurve) -> Result<f64, AnalysisError> {
    let (mut num, mut den) = (0.0, 0.0);
    for p in curve.points.iter().filter(|p| p.lag > 0) {
        if !(p.empirical > 3.0 * p.stderr) || p.stderr <= 0.0 {
            continue;
        }
        let w = (p.empirical / p.stderr).powi(2);
        let m = p.lag as f64;
        num += w * m * p.empirical.ln();
        den += w * m * m;
    }
    if den == 0.0 || num >= 0.0 {
        return Err(AnalysisError::NoUsableLags);
    }
    Ok(-den / num)
}
