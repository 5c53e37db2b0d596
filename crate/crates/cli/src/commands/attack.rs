use std::path::PathBuf;

use jwr_core::adversary::{
    exact_miss_curve, miss_curve, AttackSet, AttackSpec, ExpFit, MissCurve, MIN_TRIALS,
};
use jwr_core::analysis::chain::OffsetChain;
use jwr_core::{SamplingConfig, Strategy, ValidatedConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::{csv_text, num, opt_num, sibling, write_json, write_text};

/// Horizons used when none are listed: this many evenly spaced multiples of `t`.
pub const DEFAULT_POINTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackJob {
    pub config: SamplingConfig,
    pub strategy: Strategy,
    pub attack: AttackSpec,
    pub trials: usize,
    pub seed: u64,
    /// Horizons in time units; empty means evenly spaced up to the attack's.
    pub horizons: Vec<f64>,
    pub exact: bool,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct FitSummary {
    strategy: Strategy,
    fit: Option<ExpFit>,
    fit_error: Option<String>,
    exact_fit: Option<ExpFit>,
}

impl AttackJob {
    fn horizons(&self, t: f64) -> Result<Vec<f64>> {
        if !self.horizons.is_empty() {
            return Ok(self.horizons.clone());
        }
        let u = self
            .attack
            .horizon()
            .ok_or_else(|| CliError::invalid("attack has no horizon; pass --horizon"))?;
        let intervals = (u / t).floor() as usize;
        if intervals == 0 {
            return Err(CliError::invalid("horizon is shorter than one interval"));
        }
        let mut hs: Vec<f64> = (1..=DEFAULT_POINTS)
            .map(|k| ((k * intervals) as f64 / DEFAULT_POINTS as f64).ceil() * t)
            .collect();
        hs.dedup();
        Ok(hs)
    }

    pub fn run(&self) -> Result<Vec<PathBuf>> {
        if self.trials < MIN_TRIALS {
            return Err(CliError::invalid(format!(
                "need at least {MIN_TRIALS} trials, got {}",
                self.trials
            )));
        }
        let curve = match self.config.validate()? {
            ValidatedConfig::Continuous(c) => {
                let set = AttackSet::<f64>::build(&self.attack)?;
                let hs = self.horizons(c.t())?;
                miss_curve(&c, self.strategy, &set, &hs, self.trials, self.seed)?
            }
            ValidatedConfig::Discrete(c) => {
                let set = AttackSet::<u64>::build(&self.attack)?;
                let hs: Vec<u64> = self
                    .horizons(c.t() as f64)?
                    .into_iter()
                    .map(|u| {
                        if u.fract() == 0.0 && u > 0.0 {
                            Ok(u as u64)
                        } else {
                            Err(CliError::invalid(format!(
                                "horizon {u} is not a positive integer"
                            )))
                        }
                    })
                    .collect::<Result<_>>()?;
                let mut curve = miss_curve(&c, self.strategy, &set, &hs, self.trials, self.seed)?;
                if self.exact {
                    let chain = OffsetChain::for_strategy(self.strategy, &c);
                    let exact = exact_miss_curve(&chain, c.t(), &set, &hs)?;
                    for (p, e) in curve.points.iter_mut().zip(exact) {
                        p.exact = Some(e);
                    }
                }
                curve
            }
        };
        let csv_path = self.out.clone();
        write_text(&csv_path, &curve_csv(&curve, self.exact))?;
        let (fit, fit_error) = match curve.fit() {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let summary = FitSummary {
            strategy: self.strategy,
            fit,
            fit_error,
            exact_fit: curve.fit_exact().and_then(|r| r.ok()),
        };
        let summary_path = sibling(&self.out, ".fit.json");
        write_json(&summary_path, &summary)?;
        Ok(vec![csv_path, summary_path])
    }
}

fn curve_csv(curve: &MissCurve, exact: bool) -> String {
    let mut header = vec![
        "strategy",
        "horizon",
        "measure",
        "trials",
        "misses",
        "p_hat",
        "wilson_lo",
        "wilson_hi",
    ];
    if exact {
        header.push("exact");
    }
    csv_text(
        &header,
        curve.points.iter().map(|p| {
            let mut row = vec![
                curve.strategy.to_string(),
                num(p.horizon),
                num(p.measure),
                p.trials.to_string(),
                p.misses.to_string(),
                num(p.p_hat),
                num(p.wilson_lo),
                num(p.wilson_hi),
            ];
            if exact {
                row.push(opt_num(p.exact));
            }
            row
        }),
    )
}
