//! Fourier coefficients, spectral gap and total-variation decay in one report.

use serde::Serialize;

use super::chain::{
    continuous_surrogate, fitted_tv_constant, point_mass, tv_bound_constant, tv_decay,
    TransitionMatrix,
};
use crate::config::{ContinuousConfig, DiscreteConfig};
use crate::scalar::{Real, Scalar};

/// Bin count of the continuous surrogate chain.
pub const SURROGATE_BINS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourierRow {
    pub k: i64,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TvRow {
    pub n: usize,
    pub tv: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    /// `d(k) = E[exp(-iπkv/t)]` for `k = 0..=K`.
    pub fourier: Vec<FourierRow>,
    pub slem: f64,
    /// Eigenvalues of the offset chain as `(re, im)`, by decreasing modulus.
    pub eigenvalues: Vec<(f64, f64)>,
    /// TV distance to uniform from a point mass at offset 0, with `C·slemⁿ`.
    pub tv: Vec<TvRow>,
    /// The `C` used in the bound column.
    pub tv_constant: f64,
}

fn fourier_row(k: i64, re: f64, im: f64) -> FourierRow {
    FourierRow {
        k,
        re,
        im,
        modulus: re.hypot(im),
    }
}

fn assemble(
    fourier: Vec<FourierRow>,
    matrix: &TransitionMatrix<f64>,
    steps: usize,
) -> SpectralReport {
    let eig = matrix.eigenvalues();
    let slem = eig.get(1).map_or(0.0, |z| z.norm());
    let init = point_mass(matrix.size(), 0);
    let series = tv_decay(matrix, &init, steps).expect("point mass is a distribution");
    // The analytic constant holds for symmetric kernels; otherwise fit one.
    let tv_constant = if matrix.is_symmetric(1e-12) {
        tv_bound_constant(&init).max(fitted_tv_constant(&series, slem))
    } else {
        fitted_tv_constant(&series, slem)
    };
    let tv = series
        .iter()
        .enumerate()
        .map(|(n, &tv)| TvRow {
            n,
            tv,
            bound: tv_constant * slem.powi(n as i32),
        })
        .collect();
    SpectralReport {
        fourier,
        slem,
        eigenvalues: eig.iter().map(|z| (z.re, z.im)).collect(),
        tv,
        tv_constant,
    }
}

/// Report for a discrete configuration, built from its exact matrix.
pub fn discrete_report<S: Scalar>(
    config: &DiscreteConfig<S>,
    max_k: i64,
    steps: usize,
) -> SpectralReport {
    let fourier = (0..=max_k)
        .map(|k| {
            let d = config.jitter().fourier(k, config.t());
            fourier_row(k, d.re, d.im)
        })
        .collect();
    let matrix = TransitionMatrix::from_discrete(config).to_f64();
    assemble(fourier, &matrix, steps)
}

/// Report for a continuous configuration. Fourier coefficients are exact;
/// the chain quantities come from the binned surrogate.
pub fn continuous_report<R: Real>(
    config: &ContinuousConfig<R>,
    max_k: i64,
    steps: usize,
) -> SpectralReport {
    let fourier = (0..=max_k)
        .map(|k| {
            let d = config.jitter().fourier(k, config.t());
            fourier_row(k, d.re.to_float(), d.im.to_float())
        })
        .collect();
    let matrix = continuous_surrogate(config, SURROGATE_BINS);
    assemble(fourier, &matrix, steps)
}
