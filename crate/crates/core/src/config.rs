//! Sampling configurations and their validation.
//!
//! [`SamplingConfig`] is the JSON-facing description. Validation turns it
//! into a typed [`ContinuousConfig`] or [`DiscreteConfig`], reporting every
//! violated invariant at once.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jitter::{ContinuousJitter, DiscreteJitter, Piece};
use crate::scalar::{Real, Scalar};

/// Normalization tolerance for jitter laws.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigViolation {
    #[error("interval t must be positive (got {0})")]
    NonPositiveInterval(f64),
    #[error("discrete mode requires integer t and t_p (got t={t}, t_p={t_p})")]
    NonIntegral { t: f64, t_p: f64 },
    #[error("perturbation threshold t_p={t_p} outside (0, t={t})")]
    PerturbationOutOfRange { t: f64, t_p: f64 },
    #[error("jitter support reaches {bound}, beyond t_p={t_p}")]
    SupportExceedsBound { bound: f64, t_p: f64 },
    #[error("jitter is not symmetric about 0 (mismatch at v={at})")]
    Asymmetric { at: f64 },
    #[error("jitter is not normalized (total mass {total})")]
    NotNormalized { total: f64 },
    #[error("jitter has negative mass at v={at}")]
    NegativeMass { at: f64 },
    #[error("gcd condition violated: gcd(2t, nonzero jitter offsets) = {gcd}, must be 1")]
    GcdCondition { gcd: u64 },
    #[error("malformed jitter: {0}")]
    MalformedJitter(String),
}

impl ConfigViolation {
    /// Stable short name of the violated invariant.
    pub fn name(&self) -> &'static str {
        match self {
            ConfigViolation::NonPositiveInterval(_) => "non_positive_interval",
            ConfigViolation::NonIntegral { .. } => "non_integral",
            ConfigViolation::PerturbationOutOfRange { .. } => "perturbation_out_of_range",
            ConfigViolation::SupportExceedsBound { .. } => "support_exceeds_bound",
            ConfigViolation::Asymmetric { .. } => "asymmetric",
            ConfigViolation::NotNormalized { .. } => "not_normalized",
            ConfigViolation::NegativeMass { .. } => "negative_mass",
            ConfigViolation::GcdCondition { .. } => "gcd_condition",
            ConfigViolation::MalformedJitter(_) => "malformed_jitter",
        }
    }
}

/// All invariants a configuration failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigError {
    pub violations: Vec<ConfigViolation>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid sampling config:")?;
        for v in &self.violations {
            write!(f, "\n  - [{}] {}", v.name(), v)?;
        }
        Ok(())
    }
}

impl ConfigError {
    pub fn has(&self, name: &str) -> bool {
        self.violations.iter().any(|v| v.name() == name)
    }

    fn check(violations: Vec<ConfigViolation>) -> Result<(), ConfigError> {
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { violations })
        }
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `gcd({2t} ∪ {|k| : k ≠ 0, P(k) > 0})`.
pub fn jitter_gcd<S: Scalar>(t: u64, jitter: &DiscreteJitter<S>) -> u64 {
    jitter
        .support()
        .into_iter()
        .filter(|k| *k != 0)
        .fold(2 * t, |g, k| gcd(g, k.unsigned_abs()))
}

/// Continuous-mode configuration: real interval `t`, threshold `t_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousConfig<R> {
    t: R,
    t_p: R,
    jitter: ContinuousJitter<R>,
}

impl<R: Real> ContinuousConfig<R> {
    pub fn new(t: R, t_p: R, jitter: ContinuousJitter<R>) -> Result<Self, ConfigError> {
        let mut v = Vec::new();
        if !(t > R::zero()) || !t.is_finite() {
            v.push(ConfigViolation::NonPositiveInterval(t.to_float()));
        }
        if !(t_p > R::zero() && t_p < t) {
            v.push(ConfigViolation::PerturbationOutOfRange {
                t: t.to_float(),
                t_p: t_p.to_float(),
            });
        }
        v.extend(continuous_jitter_violations(&jitter, t_p));
        ConfigError::check(v)?;
        Ok(ContinuousConfig { t, t_p, jitter })
    }

    /// Uniform jitter on `[-t_p, t_p]`.
    pub fn uniform(t: R, t_p: R) -> Result<Self, ConfigError> {
        Self::new(t, t_p, ContinuousJitter::uniform(t_p))
    }

    pub fn t(&self) -> R {
        self.t
    }

    pub fn t_p(&self) -> R {
        self.t_p
    }

    pub fn jitter(&self) -> &ContinuousJitter<R> {
        &self.jitter
    }
}

fn continuous_jitter_violations<R: Real>(
    jitter: &ContinuousJitter<R>,
    t_p: R,
) -> Vec<ConfigViolation> {
    let mut v = Vec::new();
    let pieces = jitter.pieces();
    if pieces.is_empty() {
        v.push(ConfigViolation::MalformedJitter("no density pieces".into()));
        return v;
    }
    for w in pieces.windows(2) {
        if w[1].lo < w[0].hi {
            v.push(ConfigViolation::MalformedJitter(format!(
                "pieces overlap at {}",
                w[1].lo.to_float()
            )));
        }
    }
    for p in &pieces {
        if !(p.lo < p.hi) {
            v.push(ConfigViolation::MalformedJitter(format!(
                "empty piece [{}, {})",
                p.lo.to_float(),
                p.hi.to_float()
            )));
        }
        if p.density < R::zero() {
            v.push(ConfigViolation::NegativeMass {
                at: p.lo.to_float(),
            });
        }
    }
    let rep_tol = R::lit(MASS_TOLERANCE);
    let bound = jitter.support_bound();
    if bound > t_p * (R::one() + rep_tol) {
        v.push(ConfigViolation::SupportExceedsBound {
            bound: bound.to_float(),
            t_p: t_p.to_float(),
        });
    }
    let total = jitter.total_mass();
    if !total.is_within(&R::one(), MASS_TOLERANCE) {
        v.push(ConfigViolation::NotNormalized {
            total: total.to_float(),
        });
    }
    if let Some(at) = first_asymmetry(&pieces) {
        v.push(ConfigViolation::Asymmetric { at: at.to_float() });
    }
    v
}

/// Refines the breakpoints with their mirror images and compares the
/// density on every cell with its mirrored cell.
fn first_asymmetry<R: Real>(pieces: &[Piece<R>]) -> Option<R> {
    let mut breaks: Vec<R> = pieces
        .iter()
        .flat_map(|p| [p.lo, p.hi, -p.lo, -p.hi])
        .collect();
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    breaks.dedup();
    let density_at = |x: R| {
        pieces
            .iter()
            .find(|p| p.lo <= x && x < p.hi)
            .map_or(R::zero(), |p| p.density)
    };
    let half = R::lit(0.5);
    for w in breaks.windows(2) {
        let mid = (w[0] + w[1]) * half;
        let (a, b) = (density_at(mid), density_at(-mid));
        let scale = a.abs().max(b.abs()).max(R::one());
        if (a - b).abs() > R::lit(MASS_TOLERANCE) * scale {
            return Some(mid);
        }
    }
    None
}

/// Discrete-mode configuration: integer interval `t`, threshold `t_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteConfig<S> {
    t: u64,
    t_p: u64,
    jitter: DiscreteJitter<S>,
}

impl<S: Scalar> DiscreteConfig<S> {
    pub fn new(t: u64, t_p: u64, jitter: DiscreteJitter<S>) -> Result<Self, ConfigError> {
        let mut v = Vec::new();
        if t == 0 {
            v.push(ConfigViolation::NonPositiveInterval(0.0));
        }
        if t_p == 0 || t_p >= t {
            v.push(ConfigViolation::PerturbationOutOfRange {
                t: t as f64,
                t_p: t_p as f64,
            });
        }
        v.extend(discrete_jitter_violations(t, t_p, &jitter));
        ConfigError::check(v)?;
        Ok(DiscreteConfig { t, t_p, jitter })
    }

    /// Uniform jitter on `{-t_p, …, t_p}`.
    pub fn uniform(t: u64, t_p: u64) -> Result<Self, ConfigError> {
        Self::new(t, t_p, DiscreteJitter::uniform(t_p))
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn t_p(&self) -> u64 {
        self.t_p
    }

    pub fn jitter(&self) -> &DiscreteJitter<S> {
        &self.jitter
    }
}

fn discrete_jitter_violations<S: Scalar>(
    t: u64,
    t_p: u64,
    jitter: &DiscreteJitter<S>,
) -> Vec<ConfigViolation> {
    let mut v = Vec::new();
    let masses = jitter.masses();
    if masses.is_empty() {
        v.push(ConfigViolation::MalformedJitter("no jitter masses".into()));
        return v;
    }
    for (k, m) in &masses {
        if *m < S::zero() {
            v.push(ConfigViolation::NegativeMass { at: *k as f64 });
        }
    }
    let bound = jitter.support_bound();
    if bound > t_p {
        v.push(ConfigViolation::SupportExceedsBound {
            bound: bound as f64,
            t_p: t_p as f64,
        });
    }
    let total = jitter.total_mass();
    if !total.is_within(&S::one(), MASS_TOLERANCE) {
        v.push(ConfigViolation::NotNormalized {
            total: total.to_float(),
        });
    }
    if let Some((k, _)) = masses.iter().find(|(k, m)| *m != jitter.mass(-*k)) {
        v.push(ConfigViolation::Asymmetric { at: *k as f64 });
    }
    if t > 0 {
        let g = jitter_gcd(t, jitter);
        if g != 1 {
            v.push(ConfigViolation::GcdCondition { gcd: g });
        }
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Continuous,
    Discrete,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Continuous => "continuous",
            Mode::Discrete => "discrete",
        })
    }
}

/// A probability mass in a config file: a JSON number or a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Mass {
    Number(f64),
    Text(String),
}

impl Mass {
    pub fn to_scalar<S: Scalar>(&self) -> Result<S, ConfigViolation> {
        let bad = || ConfigViolation::MalformedJitter(format!("unparseable mass {self:?}"));
        match self {
            Mass::Number(x) => S::from_float(*x).ok_or_else(bad),
            Mass::Text(s) => match s.split_once('/') {
                Some((p, q)) => {
                    let p: i64 = p.trim().parse().map_err(|_| bad())?;
                    let q: i64 = q.trim().parse().map_err(|_| bad())?;
                    if q == 0 {
                        return Err(bad());
                    }
                    Ok(S::from_ratio(p, q))
                }
                None => {
                    let x: f64 = s.trim().parse().map_err(|_| bad())?;
                    S::from_float(x).ok_or_else(bad)
                }
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceSpec {
    pub lo: f64,
    pub hi: f64,
    pub density: f64,
}

/// JSON form of a jitter law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JitterSpec {
    /// Uniform on `[-t_p, t_p]` or `{-t_p, …, t_p}`.
    Uniform,
    /// Discrete masses `[[offset, mass], …]` or continuous density pieces.
    Explicit {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        masses: Vec<(i64, Mass)>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        pieces: Vec<PieceSpec>,
    },
    /// Discrete only: mass `alpha` on ±1, the rest on 0.
    LazyStep { alpha: Mass },
}

/// JSON form of a sampling configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub mode: Mode,
    pub t: f64,
    pub t_p: f64,
    pub jitter: JitterSpec,
}

/// A configuration that passed validation.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidatedConfig {
    Continuous(ContinuousConfig<f64>),
    Discrete(DiscreteConfig<f64>),
}

impl ValidatedConfig {
    pub fn mode(&self) -> Mode {
        match self {
            ValidatedConfig::Continuous(_) => Mode::Continuous,
            ValidatedConfig::Discrete(_) => Mode::Discrete,
        }
    }
}

impl SamplingConfig {
    pub fn discrete(t: u64, t_p: u64, jitter: JitterSpec) -> Self {
        SamplingConfig {
            mode: Mode::Discrete,
            t: t as f64,
            t_p: t_p as f64,
            jitter,
        }
    }

    pub fn continuous(t: f64, t_p: f64, jitter: JitterSpec) -> Self {
        SamplingConfig {
            mode: Mode::Continuous,
            t,
            t_p,
            jitter,
        }
    }

    pub fn validate(&self) -> Result<ValidatedConfig, ConfigError> {
        match self.mode {
            Mode::Continuous => self.to_continuous().map(ValidatedConfig::Continuous),
            Mode::Discrete => self.to_discrete().map(ValidatedConfig::Discrete),
        }
    }

    pub fn to_continuous<R: Real>(&self) -> Result<ContinuousConfig<R>, ConfigError> {
        let lift = |x: f64| {
            <R as Scalar>::from_float(x).ok_or_else(|| ConfigError {
                violations: vec![ConfigViolation::MalformedJitter(format!(
                    "value {x} not representable"
                ))],
            })
        };
        let (t, t_p) = (lift(self.t)?, lift(self.t_p)?);
        let jitter = match &self.jitter {
            JitterSpec::Uniform => ContinuousJitter::uniform(t_p),
            JitterSpec::Explicit { masses, pieces } => {
                if !masses.is_empty() || pieces.is_empty() {
                    return Err(ConfigError {
                        violations: vec![ConfigViolation::MalformedJitter(
                            "continuous mode needs density pieces".into(),
                        )],
                    });
                }
                let mut out = Vec::with_capacity(pieces.len());
                for p in pieces {
                    out.push(Piece {
                        lo: lift(p.lo)?,
                        hi: lift(p.hi)?,
                        density: lift(p.density)?,
                    });
                }
                ContinuousJitter::piecewise(out)
            }
            JitterSpec::LazyStep { .. } => {
                return Err(ConfigError {
                    violations: vec![ConfigViolation::MalformedJitter(
                        "lazy_step jitter is discrete only".into(),
                    )],
                })
            }
        };
        ContinuousConfig::new(t, t_p, jitter)
    }

    pub fn to_discrete<S: Scalar>(&self) -> Result<DiscreteConfig<S>, ConfigError> {
        let integral = |x: f64| x.fract() == 0.0 && x.is_finite() && x >= 0.0;
        if !integral(self.t) || !integral(self.t_p) {
            let mut v = vec![ConfigViolation::NonIntegral {
                t: self.t,
                t_p: self.t_p,
            }];
            if !(self.t > 0.0) {
                v.push(ConfigViolation::NonPositiveInterval(self.t));
            }
            return Err(ConfigError { violations: v });
        }
        let (t, t_p) = (self.t as u64, self.t_p as u64);
        let jitter = match &self.jitter {
            JitterSpec::Uniform => DiscreteJitter::uniform(t_p),
            JitterSpec::Explicit { masses, pieces } => {
                if !pieces.is_empty() || masses.is_empty() {
                    return Err(ConfigError {
                        violations: vec![ConfigViolation::MalformedJitter(
                            "discrete mode needs offset masses".into(),
                        )],
                    });
                }
                let mut entries = Vec::with_capacity(masses.len());
                let mut bad = Vec::new();
                for (k, m) in masses {
                    match m.to_scalar::<S>() {
                        Ok(s) => entries.push((*k, s)),
                        Err(e) => bad.push(e),
                    }
                }
                ConfigError::check(bad)?;
                DiscreteJitter::explicit(entries)
            }
            JitterSpec::LazyStep { alpha } => {
                let a = alpha.to_scalar::<S>().map_err(|e| ConfigError {
                    violations: vec![e],
                })?;
                DiscreteJitter::lazy_step(a)
            }
        };
        DiscreteConfig::new(t, t_p, jitter)
    }
}
