//! Numeric abstractions shared by the samplers and the chain analysis.
//!
//! Three layers:
//!
//! * [`Scalar`]: anything that can carry probability mass exactly or
//!   approximately (`f32`, `f64`, `Ratio<i64>`, `BigRational`).
//! * [`TimeValue`]: a timestamp coordinate (`u64` frame indices, `f32`/`f64`
//!   seconds).
//! * [`Real`]: floating-point scalars usable on the continuous timeline.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Float, Num, NumCast, Signed, ToPrimitive};
use rand::Rng;

/// Probability-mass arithmetic, exact or floating.
pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// `num / den`; `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Nearest (for floats) or exact binary-fraction (for rationals) value.
    fn from_float(x: f64) -> Option<Self>;

    fn to_float(&self) -> f64;

    /// Absolute value.
    fn magnitude(&self) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    /// True when `|self - other| <= tol`. Rationals compare exactly against a
    /// zero tolerance.
    fn is_within(&self, other: &Self, tol: f64) -> bool {
        let diff = (self.clone() - other.clone()).magnitude();
        diff.to_float() <= tol
    }
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_float(x: f64) -> Option<Self> {
        Some(x)
    }
    fn to_float(&self) -> f64 {
        *self
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
}

impl Scalar for f32 {
    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }
    fn from_float(x: f64) -> Option<Self> {
        Some(x as f32)
    }
    fn to_float(&self) -> f64 {
        *self as f64
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
}

impl Scalar for Ratio<i64> {
    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(num, den)
    }
    fn from_float(x: f64) -> Option<Self> {
        Ratio::approximate_float(x).filter(|r: &Ratio<i64>| ToPrimitive::to_f64(r) == Some(x))
    }
    fn to_float(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn magnitude(&self) -> Self {
        Signed::abs(self)
    }
}

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_float(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn to_float(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn magnitude(&self) -> Self {
        Signed::abs(self)
    }
}

/// A coordinate on the sampling timeline.
///
/// Discrete timelines use `u64` frame indices; continuous ones use floats.
pub trait TimeValue:
    Copy + PartialOrd + Num + NumCast + Debug + Display + Send + Sync + 'static
{
    const DISCRETE: bool;
    /// Relative rounding unit (zero for exact integer timelines).
    const EPSILON: f64;

    fn from_index(i: u64) -> Self;

    /// A uniform draw from `[0, upper)`.
    fn uniform_below<G: Rng + ?Sized>(rng: &mut G, upper: Self) -> Self;

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl TimeValue for u64 {
    const DISCRETE: bool = true;
    const EPSILON: f64 = 0.0;

    fn from_index(i: u64) -> Self {
        i
    }
    fn uniform_below<G: Rng + ?Sized>(rng: &mut G, upper: Self) -> Self {
        rng.random_range(0..upper)
    }
}

impl TimeValue for f64 {
    const DISCRETE: bool = false;
    const EPSILON: f64 = f64::EPSILON;

    fn from_index(i: u64) -> Self {
        i as f64
    }
    fn uniform_below<G: Rng + ?Sized>(rng: &mut G, upper: Self) -> Self {
        rng.random::<f64>() * upper
    }
}

impl TimeValue for f32 {
    const DISCRETE: bool = false;
    const EPSILON: f64 = f32::EPSILON as f64;

    fn from_index(i: u64) -> Self {
        i as f32
    }
    fn uniform_below<G: Rng + ?Sized>(rng: &mut G, upper: Self) -> Self {
        // `random::<f32>() * upper` can round up to `upper` itself.
        let x = rng.random::<f32>() * upper;
        if x < upper {
            x
        } else {
            upper.prev_below()
        }
    }
}

trait PrevBelow {
    fn prev_below(self) -> Self;
}

impl PrevBelow for f32 {
    fn prev_below(self) -> Self {
        f32::from_bits(self.to_bits() - 1)
    }
}

/// Floating-point scalar for the continuous timeline.
pub trait Real: Float + Scalar + TimeValue {
    /// A uniform draw from `[0, 1)`.
    fn unit<G: Rng + ?Sized>(rng: &mut G) -> Self {
        Self::uniform_below(rng, Self::one())
    }

    fn lit(x: f64) -> Self {
        <Self as Scalar>::from_float(x).expect("finite literal")
    }
}

impl Real for f32 {}
impl Real for f64 {}
