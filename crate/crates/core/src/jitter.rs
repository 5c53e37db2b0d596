//! Symmetric jitter distributions and their Fourier coefficients.

use num_complex::Complex;
use rand::Rng;

use crate::scalar::{Real, Scalar};

/// One constant-density piece `[lo, hi)` of a continuous jitter density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece<R> {
    pub lo: R,
    pub hi: R,
    pub density: R,
}

impl<R: Real> Piece<R> {
    pub fn mass(&self) -> R {
        (self.hi - self.lo) * self.density
    }
}

/// Jitter law on `[-t_p, t_p]`.
///
/// Explicit densities are piecewise constant; pieces are kept sorted by
/// `lo` and must not overlap (gaps carry zero density).
#[derive(Debug, Clone, PartialEq)]
pub enum ContinuousJitter<R> {
    Uniform { half_width: R },
    Piecewise(Vec<Piece<R>>),
}

impl<R: Real> ContinuousJitter<R> {
    pub fn uniform(half_width: R) -> Self {
        ContinuousJitter::Uniform { half_width }
    }

    pub fn piecewise(mut pieces: Vec<Piece<R>>) -> Self {
        pieces.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite breakpoints"));
        ContinuousJitter::Piecewise(pieces)
    }

    /// The density as explicit pieces (a uniform law is one piece).
    pub fn pieces(&self) -> Vec<Piece<R>> {
        match self {
            ContinuousJitter::Uniform { half_width } => vec![Piece {
                lo: -*half_width,
                hi: *half_width,
                density: R::one() / (*half_width + *half_width),
            }],
            ContinuousJitter::Piecewise(p) => p.clone(),
        }
    }

    pub fn total_mass(&self) -> R {
        self.pieces()
            .iter()
            .fold(R::zero(), |acc, p| acc + p.mass())
    }

    /// Smallest `h` with the support inside `[-h, h]`.
    pub fn support_bound(&self) -> R {
        self.pieces()
            .iter()
            .filter(|p| p.density > R::zero())
            .fold(R::zero(), |acc, p| acc.max(p.lo.abs()).max(p.hi.abs()))
    }

    pub fn density(&self, v: R) -> R {
        self.pieces()
            .iter()
            .find(|p| p.lo <= v && v < p.hi)
            .map_or(R::zero(), |p| p.density)
    }

    pub fn cdf(&self, v: R) -> R {
        self.pieces().iter().fold(R::zero(), |acc, p| {
            if v <= p.lo {
                acc
            } else if v >= p.hi {
                acc + p.mass()
            } else {
                acc + (v - p.lo) * p.density
            }
        })
    }

    /// `G(v) = ∫_{-∞}^{v} F(u) du` where `F` is [`cdf`](Self::cdf).
    ///
    /// Piecewise quadratic; used to integrate landing probabilities over a
    /// uniformly distributed starting offset.
    pub fn cdf_integral(&self, v: R) -> R {
        let half = R::lit(0.5);
        // Each piece contributes ∫ (clamped ramp) = ramp area up to v.
        self.pieces().iter().fold(R::zero(), |acc, p| {
            if v <= p.lo {
                acc
            } else if v >= p.hi {
                let w = p.hi - p.lo;
                acc + p.density * w * w * half + p.mass() * (v - p.hi)
            } else {
                let w = v - p.lo;
                acc + p.density * w * w * half
            }
        })
    }

    /// `d(k) = E[exp(-iπkv/t)]`, integrated exactly piece by piece.
    pub fn fourier(&self, k: i64, t: R) -> Complex<R> {
        if k == 0 {
            return Complex::new(self.total_mass(), R::zero());
        }
        if let ContinuousJitter::Uniform { half_width } = self {
            let x = R::lit(std::f64::consts::PI) * R::from_int(k) * *half_width / t;
            return Complex::new(x.sin() / x, R::zero());
        }
        let w = R::lit(std::f64::consts::PI) * R::from_int(k) / t;
        let (re, im) = self
            .pieces()
            .iter()
            .fold((R::zero(), R::zero()), |(re, im), p| {
                // ∫ c·cos(wv) = c(sin(w·hi) - sin(w·lo))/w
                // -∫ c·sin(wv) = c(cos(w·hi) - cos(w·lo))/w
                let re_p = p.density * ((w * p.hi).sin() - (w * p.lo).sin()) / w;
                let im_p = p.density * ((w * p.hi).cos() - (w * p.lo).cos()) / w;
                (re + re_p, im + im_p)
            });
        Complex::new(re, im)
    }

    pub(crate) fn draw(&self) -> ContinuousDraw<R> {
        match self {
            ContinuousJitter::Uniform { half_width } => ContinuousDraw::Uniform(*half_width),
            ContinuousJitter::Piecewise(pieces) => {
                let mut acc = R::zero();
                let mut cumulative = Vec::with_capacity(pieces.len());
                let live: Vec<Piece<R>> = pieces
                    .iter()
                    .copied()
                    .filter(|p| p.mass() > R::zero())
                    .collect();
                for p in &live {
                    acc = acc + p.mass();
                    cumulative.push(acc);
                }
                ContinuousDraw::Pieces {
                    pieces: live,
                    cumulative,
                }
            }
        }
    }
}

/// Sampling table for a continuous jitter.
#[derive(Debug, Clone)]
pub(crate) enum ContinuousDraw<R> {
    Uniform(R),
    Pieces {
        pieces: Vec<Piece<R>>,
        cumulative: Vec<R>,
    },
}

impl<R: Real> ContinuousDraw<R> {
    pub(crate) fn sample<G: Rng + ?Sized>(&self, rng: &mut G) -> R {
        match self {
            ContinuousDraw::Uniform(h) => (R::unit(rng) * R::lit(2.0) - R::one()) * *h,
            ContinuousDraw::Pieces { pieces, cumulative } => {
                let total = *cumulative.last().expect("validated jitter has mass");
                let u = R::unit(rng) * total;
                let idx = cumulative
                    .partition_point(|c| *c <= u)
                    .min(pieces.len() - 1);
                let p = pieces[idx];
                p.lo + (p.hi - p.lo) * R::unit(rng)
            }
        }
    }
}

/// Jitter law on the integer offsets `{-t_p, …, t_p}`.
#[derive(Debug, Clone, PartialEq)]
pub enum DiscreteJitter<S> {
    Uniform {
        half_width: u64,
    },
    /// Sorted by offset, duplicates merged.
    Explicit(Vec<(i64, S)>),
}

impl<S: Scalar> DiscreteJitter<S> {
    pub fn uniform(half_width: u64) -> Self {
        DiscreteJitter::Uniform { half_width }
    }

    pub fn explicit(entries: impl IntoIterator<Item = (i64, S)>) -> Self {
        let mut merged: Vec<(i64, S)> = Vec::new();
        let mut sorted: Vec<(i64, S)> = entries.into_iter().collect();
        sorted.sort_by_key(|(k, _)| *k);
        for (k, m) in sorted {
            match merged.last_mut() {
                Some((last, acc)) if *last == k => *acc = acc.clone() + m,
                _ => merged.push((k, m)),
            }
        }
        DiscreteJitter::Explicit(merged)
    }

    /// Mass `alpha` on each of ±1 and `1 - 2·alpha` on 0.
    ///
    /// With `t = 2` the offset chain flips state with probability `alpha`.
    pub fn lazy_step(alpha: S) -> Self {
        let two = S::from_int(2);
        let stay = S::one() - two * alpha.clone();
        Self::explicit([(-1, alpha.clone()), (0, stay), (1, alpha)])
    }

    /// All `(offset, mass)` pairs, including zero masses of explicit laws.
    pub fn masses(&self) -> Vec<(i64, S)> {
        match self {
            DiscreteJitter::Uniform { half_width } => {
                let h = *half_width as i64;
                let m = S::from_ratio(1, 2 * h + 1);
                (-h..=h).map(|k| (k, m.clone())).collect()
            }
            DiscreteJitter::Explicit(entries) => entries.clone(),
        }
    }

    pub fn mass(&self, k: i64) -> S {
        match self {
            DiscreteJitter::Uniform { half_width } => {
                let h = *half_width as i64;
                if k.abs() <= h {
                    S::from_ratio(1, 2 * h + 1)
                } else {
                    S::zero()
                }
            }
            DiscreteJitter::Explicit(entries) => entries
                .binary_search_by_key(&k, |(o, _)| *o)
                .map_or(S::zero(), |i| entries[i].1.clone()),
        }
    }

    /// Offsets carrying positive mass.
    pub fn support(&self) -> Vec<i64> {
        self.masses()
            .into_iter()
            .filter(|(_, m)| *m > S::zero())
            .map(|(k, _)| k)
            .collect()
    }

    pub fn support_bound(&self) -> u64 {
        self.support()
            .iter()
            .map(|k| k.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn total_mass(&self) -> S {
        self.masses()
            .into_iter()
            .fold(S::zero(), |acc, (_, m)| acc + m)
    }

    /// `d(k) = Σ_v P(v) exp(-iπkv/t)`.
    pub fn fourier(&self, k: i64, t: u64) -> Complex<f64> {
        self.masses()
            .into_iter()
            .fold(Complex::new(0.0, 0.0), |acc, (v, m)| {
                let phase = -std::f64::consts::PI * (k as f64) * (v as f64) / t as f64;
                acc + Complex::from_polar(m.to_float(), phase)
            })
    }

    pub(crate) fn draw(&self) -> DiscreteDraw {
        match self {
            DiscreteJitter::Uniform { half_width } => DiscreteDraw::Uniform(*half_width as i64),
            DiscreteJitter::Explicit(_) => {
                let mut acc = 0.0;
                let mut offsets = Vec::new();
                let mut cumulative = Vec::new();
                for (k, m) in self.masses() {
                    let p = m.to_float();
                    if p > 0.0 {
                        acc += p;
                        offsets.push(k);
                        cumulative.push(acc);
                    }
                }
                DiscreteDraw::Table {
                    offsets,
                    cumulative,
                }
            }
        }
    }
}

/// Sampling table for a discrete jitter.
#[derive(Debug, Clone)]
pub(crate) enum DiscreteDraw {
    Uniform(i64),
    Table {
        offsets: Vec<i64>,
        cumulative: Vec<f64>,
    },
}

impl DiscreteDraw {
    pub(crate) fn sample<G: Rng + ?Sized>(&self, rng: &mut G) -> i64 {
        match self {
            DiscreteDraw::Uniform(h) => rng.random_range(-*h..=*h),
            DiscreteDraw::Table {
                offsets,
                cumulative,
            } => {
                let total = *cumulative.last().expect("validated jitter has mass");
                let u = rng.random::<f64>() * total;
                let idx = cumulative
                    .partition_point(|c| *c <= u)
                    .min(offsets.len() - 1);
                offsets[idx]
            }
        }
    }
}
