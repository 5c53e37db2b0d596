//! Exact offset-chain analytics.
//!
//! For the discrete sampler the offset `b_i = a_i - i·t` is a Markov chain on
//! `{0, …, t-1}`. Its transition matrix is built by enumerating every
//! (offset, jitter) pair, so with a rational scalar every entry is exact.
//! With the half-integer reflection the matrix is symmetric and its
//! eigenvalues are the jitter's Fourier coefficients `d(0), …, d(t-1)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use super::AnalysisError;
use crate::config::{ContinuousConfig, DiscreteConfig};
use crate::sampler::{step_offset_discrete, Strategy};
use crate::scalar::{Real, Scalar};

/// Row-stochastic matrix, `entry(x, y) = P(x → y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<S> {
    size: usize,
    entries: Vec<S>,
}

impl<S: Scalar> TransitionMatrix<S> {
    /// Builds the matrix from row-major entries. Panics on a size mismatch.
    pub fn from_rows(size: usize, entries: Vec<S>) -> Self {
        assert_eq!(entries.len(), size * size, "expected {size}x{size} entries");
        TransitionMatrix { size, entries }
    }

    /// One discrete jittering-with-reflection step.
    pub fn from_discrete(config: &DiscreteConfig<S>) -> Self {
        let t = config.t();
        let size = t as usize;
        let mut entries = vec![S::zero(); size * size];
        let masses = config.jitter().masses();
        for x in 0..t {
            for (v, m) in &masses {
                let y = step_offset_discrete(x, *v, t);
                let e = &mut entries[x as usize * size + y as usize];
                *e = e.clone() + m.clone();
            }
        }
        TransitionMatrix { size, entries }
    }

    pub fn identity(size: usize) -> Self {
        let mut entries = vec![S::zero(); size * size];
        for i in 0..size {
            entries[i * size + i] = S::one();
        }
        TransitionMatrix { size, entries }
    }

    /// Every row uniform: consecutive offsets independent.
    pub fn resampling(size: usize) -> Self {
        let p = S::from_ratio(1, size as i64);
        TransitionMatrix {
            size,
            entries: vec![p; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, x: usize, y: usize) -> &S {
        &self.entries[x * self.size + y]
    }

    pub fn row(&self, x: usize) -> &[S] {
        &self.entries[x * self.size..(x + 1) * self.size]
    }

    pub fn row_sums(&self) -> Vec<S> {
        (0..self.size)
            .map(|x| self.row(x).iter().cloned().fold(S::zero(), |a, b| a + b))
            .collect()
    }

    pub fn column_sums(&self) -> Vec<S> {
        (0..self.size)
            .map(|y| {
                (0..self.size)
                    .map(|x| self.entry(x, y).clone())
                    .fold(S::zero(), |a, b| a + b)
            })
            .collect()
    }

    pub fn is_stochastic(&self, tol: f64) -> bool {
        self.entries.iter().all(|e| *e >= S::zero())
            && self.row_sums().iter().all(|s| s.is_within(&S::one(), tol))
    }

    pub fn is_doubly_stochastic(&self, tol: f64) -> bool {
        self.is_stochastic(tol)
            && self
                .column_sums()
                .iter()
                .all(|s| s.is_within(&S::one(), tol))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.size).all(|x| (0..x).all(|y| self.entry(x, y).is_within(self.entry(y, x), tol)))
    }

    /// Row vector times matrix: the law one step later.
    pub fn apply(&self, dist: &[S]) -> Vec<S> {
        assert_eq!(dist.len(), self.size);
        let mut out = vec![S::zero(); self.size];
        for (x, p) in dist.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for (y, e) in self.row(x).iter().enumerate() {
                if !e.is_zero() {
                    out[y] = out[y].clone() + p.clone() * e.clone();
                }
            }
        }
        out
    }

    pub fn to_f64(&self) -> TransitionMatrix<f64> {
        TransitionMatrix {
            size: self.size,
            entries: self.entries.iter().map(Scalar::to_float).collect(),
        }
    }

    /// Eigenvalues sorted by decreasing modulus.
    pub fn eigenvalues(&self) -> Vec<Complex<f64>> {
        let m = DMatrix::from_row_slice(
            self.size,
            self.size,
            &self
                .entries
                .iter()
                .map(Scalar::to_float)
                .collect::<Vec<_>>(),
        );
        let mut ev: Vec<Complex<f64>> = if self.is_symmetric(1e-12) {
            SymmetricEigen::new(m)
                .eigenvalues
                .iter()
                .map(|&x| Complex::new(x, 0.0))
                .collect()
        } else {
            m.complex_eigenvalues().iter().copied().collect()
        };
        ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        ev
    }

    /// Second-largest eigenvalue modulus. Equals 1 for periodic or reducible
    /// chains, and is below 1 exactly when the chain mixes.
    pub fn slem(&self) -> f64 {
        let ev = self.eigenvalues();
        ev.get(1).map_or(0.0, |z| z.norm())
    }
}

/// The `t = 2` flip probability, read off the exact matrix.
pub fn alpha_of_config<S: Scalar>(config: &DiscreteConfig<S>) -> Result<S, AnalysisError> {
    if config.t() != 2 {
        return Err(AnalysisError::NotTwoState { t: config.t() });
    }
    Ok(TransitionMatrix::from_discrete(config).entry(0, 1).clone())
}

pub fn uniform_distribution<S: Scalar>(size: usize) -> Vec<S> {
    vec![S::from_ratio(1, size as i64); size]
}

pub fn point_mass<S: Scalar>(size: usize, at: usize) -> Vec<S> {
    let mut d = vec![S::zero(); size];
    d[at] = S::one();
    d
}

/// `½ Σ |p_i - 1/t|`.
pub fn tv_to_uniform<S: Scalar>(dist: &[S]) -> S {
    let u = S::from_ratio(1, dist.len() as i64);
    let sum = dist.iter().fold(S::zero(), |acc, p| {
        acc + (p.clone() - u.clone()).magnitude()
    });
    sum / S::from_int(2)
}

fn check_distribution<S: Scalar>(dist: &[S], size: usize) -> Result<(), AnalysisError> {
    let total = dist.iter().cloned().fold(S::zero(), |a, b| a + b);
    if dist.len() != size
        || dist.iter().any(|p| *p < S::zero())
        || !total.is_within(&S::one(), 1e-12)
    {
        return Err(AnalysisError::InvalidDistribution { size });
    }
    Ok(())
}

/// `TV(init·Pⁿ, uniform)` for `n = 0..=steps`, by repeated exact application.
pub fn tv_decay<S: Scalar>(
    matrix: &TransitionMatrix<S>,
    init: &[S],
    steps: usize,
) -> Result<Vec<S>, AnalysisError> {
    check_distribution(init, matrix.size())?;
    let mut dist = init.to_vec();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(tv_to_uniform(&dist));
    for _ in 0..steps {
        dist = matrix.apply(&dist);
        out.push(tv_to_uniform(&dist));
    }
    Ok(out)
}

/// `C` with `TV(n) <= C·slemⁿ` for a symmetric doubly stochastic matrix:
/// `C = ½·√t·‖init - u‖₂`.
pub fn tv_bound_constant<S: Scalar>(init: &[S]) -> f64 {
    let n = init.len() as f64;
    let l2 = init
        .iter()
        .map(|p| {
            let d = p.to_float() - 1.0 / n;
            d * d
        })
        .sum::<f64>()
        .sqrt();
    0.5 * n.sqrt() * l2
}

/// `max_n TV(n) / slemⁿ` over a computed series.
pub fn fitted_tv_constant(series: &[f64], slem: f64) -> f64 {
    series
        .iter()
        .enumerate()
        .map(|(n, tv)| {
            if slem > 0.0 {
                tv / slem.powi(n as i32)
            } else {
                *tv
            }
        })
        .fold(0.0, f64::max)
}

/// Markov description of a sampling strategy's offsets: `b_0 ~ init`,
/// `b_{i+1} ~ kernel[b_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetChain<S> {
    pub init: Vec<S>,
    pub kernel: TransitionMatrix<S>,
}

impl<S: Scalar> OffsetChain<S> {
    pub fn for_strategy(strategy: Strategy, config: &DiscreteConfig<S>) -> Self {
        let t = config.t() as usize;
        match strategy {
            Strategy::Jwr => OffsetChain {
                init: uniform_distribution(t),
                kernel: TransitionMatrix::from_discrete(config),
            },
            Strategy::FixedRate => OffsetChain {
                init: point_mass(t, 0),
                kernel: TransitionMatrix::identity(t),
            },
            Strategy::RandomOffset => OffsetChain {
                init: uniform_distribution(t),
                kernel: TransitionMatrix::identity(t),
            },
            Strategy::IidPerInterval => OffsetChain {
                init: uniform_distribution(t),
                kernel: TransitionMatrix::resampling(t),
            },
        }
    }

    pub fn size(&self) -> usize {
        self.init.len()
    }
}

/// Bin-averaged transition kernel of the continuous offset chain.
///
/// `entry(x, y)` is the probability that an offset uniform on bin `x` lands
/// in bin `y` after one step, integrated exactly for piecewise-constant
/// jitter densities.
pub fn continuous_surrogate<R: Real>(
    config: &ContinuousConfig<R>,
    bins: usize,
) -> TransitionMatrix<f64> {
    let t = config.t();
    let jitter = config.jitter();
    let w = t / R::from_int(bins as i64);
    let edge = |k: usize| R::from_int(k as i64) * w;
    // P(b + v ∈ [c, d)) for b ~ U[x0, x1).
    let mass_in = |x0: R, x1: R, c: R, d: R| {
        let g = |s: R| jitter.cdf_integral(s);
        ((g(d - x0) - g(d - x1)) - (g(c - x0) - g(c - x1))) / w
    };
    let two_t = t + t;
    let mut entries = vec![0.0; bins * bins];
    for x in 0..bins {
        let (x0, x1) = (edge(x), edge(x + 1));
        for y in 0..bins {
            let (y0, y1) = (edge(y), edge(y + 1));
            let direct = mass_in(x0, x1, y0, y1);
            let lower = mass_in(x0, x1, -y1, -y0);
            let upper = mass_in(x0, x1, two_t - y1, two_t - y0);
            entries[x * bins + y] = (direct + lower + upper).to_float().max(0.0);
        }
    }
    TransitionMatrix::from_rows(bins, entries)
}
