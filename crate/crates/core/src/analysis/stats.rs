//! Goodness-of-fit tests for the stationary uniform marginal.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::AnalysisError;

/// Minimum sample count accepted by [`marginal_uniformity_test`].
pub const MIN_MARGINAL_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    KolmogorovSmirnov,
    ChiSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformityTest {
    pub kind: TestKind,
    pub statistic: f64,
    pub p_value: f64,
    pub samples: usize,
}

impl UniformityTest {
    pub fn rejects(&self, significance: f64) -> bool {
        self.p_value < significance
    }
}

/// Offsets observed at one step index across independent schedules.
#[derive(Debug, Clone, Copy)]
pub enum MarginalSample<'a> {
    /// Values in `[0, t]`, tested against `Unif[0, t]` by KS.
    Continuous { values: &'a [f64], t: f64 },
    /// Values in `{0, …, t-1}`, tested by chi-square over `t` bins.
    Discrete { values: &'a [u64], t: u64 },
}

pub fn marginal_uniformity_test(
    sample: MarginalSample<'_>,
) -> Result<UniformityTest, AnalysisError> {
    let n = match sample {
        MarginalSample::Continuous { values, .. } => values.len(),
        MarginalSample::Discrete { values, .. } => values.len(),
    };
    if n < MIN_MARGINAL_SAMPLES {
        return Err(AnalysisError::InsufficientSamples {
            needed: MIN_MARGINAL_SAMPLES,
            got: n,
        });
    }
    Ok(match sample {
        MarginalSample::Continuous { values, t } => ks_uniform(values, t),
        MarginalSample::Discrete { values, t } => chi_square_uniform(values, t),
    })
}

/// One-sample KS test against `Unif[0, upper]`.
pub fn ks_uniform(values: &[f64], upper: f64) -> UniformityTest {
    let mut u: Vec<f64> = values.iter().map(|x| x / upper).collect();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    let d = u.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let above = (i + 1) as f64 / n - x;
        let below = x - i as f64 / n;
        d.max(above).max(below)
    });
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    UniformityTest {
        kind: TestKind::KolmogorovSmirnov,
        statistic: d,
        p_value: kolmogorov_survival(lambda),
        samples: values.len(),
    }
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // P(K <= λ) = √(2π)/λ Σ_{k>=1} exp(-(2k-1)²π²/(8λ²))
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let cdf: f64 = (1..=20)
            .map(|k| {
                let j = (2 * k - 1) as f64;
                (-j * j * c).exp()
            })
            .sum::<f64>()
            * (2.0 * std::f64::consts::PI).sqrt()
            / lambda;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        // P(K > λ) = 2 Σ_{k>=1} (-1)^{k-1} exp(-2k²λ²)
        let sum: f64 = (1..=100)
            .map(|k| {
                let kf = k as f64;
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * kf * kf * lambda * lambda).exp()
            })
            .sum();
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// Pearson chi-square test of `{0, …, t-1}`-valued data against uniform.
pub fn chi_square_uniform(values: &[u64], t: u64) -> UniformityTest {
    let mut counts = vec![0u64; t as usize];
    for &v in values {
        counts[v as usize] += 1;
    }
    let expected = values.len() as f64 / t as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum();
    let p_value = if t < 2 {
        1.0
    } else {
        ChiSquared::new((t - 1) as f64)
            .expect("positive degrees of freedom")
            .sf(statistic)
    };
    UniformityTest {
        kind: TestKind::ChiSquare,
        statistic,
        p_value,
        samples: values.len(),
    }
}
