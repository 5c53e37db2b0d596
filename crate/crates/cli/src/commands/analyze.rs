use std::path::PathBuf;

use clap::ValueEnum;
use jwr_core::analysis::chain::alpha_of_config;
use jwr_core::analysis::correlation::{
    correlation_length, empirical_autocorrelation, fit_correlation_length, CorrelationPoint,
};
use jwr_core::analysis::spectral::{continuous_report, discrete_report, SpectralReport};
use jwr_core::analysis::stats::{marginal_uniformity_test, MarginalSample, UniformityTest};
use jwr_core::analysis::{gap_variance, offsets};
use jwr_core::io::ScheduleFile;
use jwr_core::sampler::{SamplingDomain, StrategyStream};
use jwr_core::scalar::TimeValue;
use jwr_core::seed::derive_seed;
use jwr_core::{Mode, SamplingConfig, Strategy, ValidatedConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::{csv_text, num, opt_num, read_json, sibling, write_json, write_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Marginal,
    Autocorr,
    Gaps,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum AnalyzeInput {
    /// A schedule file written by `generate`.
    Schedule { path: PathBuf },
    /// A schedule generated on the fly from the job seed.
    Config {
        config: SamplingConfig,
        strategy: Strategy,
        n: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeJob {
    pub input: AnalyzeInput,
    pub which: Which,
    pub format: Format,
    pub seed: u64,
    pub max_lag: usize,
    pub max_k: i64,
    pub steps: usize,
    pub trials: usize,
    pub indices: Vec<u64>,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct MarginalRow {
    index: u64,
    #[serde(flatten)]
    test: UniformityTest,
    rejects_at_0_01: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct AutocorrReport {
    samples: usize,
    block_len: usize,
    alpha: Option<f64>,
    l_c_theory: Option<f64>,
    l_c_fit: Option<f64>,
    points: Vec<CorrelationPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct GapsReport {
    gaps: usize,
    gap_variance: f64,
    theoretical: Option<f64>,
}

impl AnalyzeJob {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn source(&self) -> Result<(SamplingConfig, Strategy)> {
        match &self.input {
            AnalyzeInput::Schedule { path } => {
                let f: ScheduleFile = read_json(path)?;
                Ok((f.config, f.strategy))
            }
            AnalyzeInput::Config {
                config, strategy, ..
            } => Ok((config.clone(), *strategy)),
        }
    }

    fn schedule(&self) -> Result<ScheduleFile> {
        match &self.input {
            AnalyzeInput::Schedule { path } => read_json(path),
            AnalyzeInput::Config {
                config,
                strategy,
                n,
            } => super::schedule_file(config, *strategy, self.seed, *n),
        }
    }

    pub fn run(&self) -> Result<Vec<PathBuf>> {
        match self.which {
            Which::Marginal => self.marginal(),
            Which::Autocorr => self.autocorr(),
            Which::Gaps => self.gaps(),
            Which::Spectral => self.spectral(),
        }
    }

    fn marginal(&self) -> Result<Vec<PathBuf>> {
        let (config, strategy) = self.source()?;
        let rows = match config.validate()? {
            ValidatedConfig::Continuous(c) => self.marginal_rows(&c, strategy, |b, t| {
                MarginalSample::Continuous { values: b, t }
            })?,
            ValidatedConfig::Discrete(c) => self.marginal_rows(&c, strategy, |b, t| {
                MarginalSample::Discrete { values: b, t }
            })?,
        };
        match self.format {
            Format::Json => write_json(&self.out, &rows)?,
            Format::Csv => write_text(
                &self.out,
                &csv_text(
                    &["index", "test", "statistic", "p_value", "samples"],
                    rows.iter().map(|r| {
                        [
                            r.index.to_string(),
                            serde_json::to_value(r.test.kind)
                                .ok()
                                .and_then(|v| v.as_str().map(str::to_string))
                                .unwrap_or_default(),
                            num(r.test.statistic),
                            num(r.test.p_value),
                            r.test.samples.to_string(),
                        ]
                    }),
                ),
            )?,
        }
        Ok(vec![self.out.clone()])
    }

    /// Offset `b_i` at each requested index across `trials` independent
    /// schedules.
    fn marginal_rows<D, F>(
        &self,
        domain: &D,
        strategy: Strategy,
        sample: F,
    ) -> Result<Vec<MarginalRow>>
    where
        D: SamplingDomain + Sync,
        F: for<'a> Fn(&'a [D::Time], D::Time) -> MarginalSample<'a>,
    {
        let t = domain.interval();
        let last = self.indices.iter().copied().max().unwrap_or(0) as usize;
        let per_trial: Vec<Vec<D::Time>> = (0..self.trials as u64)
            .into_par_iter()
            .map(|k| {
                let seed = derive_seed(self.seed, "marginal", k);
                StrategyStream::new(domain, strategy, seed)
                    .take(last + 1)
                    .enumerate()
                    .map(|(i, a)| a - D::Time::from_index(i as u64) * t)
                    .collect()
            })
            .collect();
        self.indices
            .iter()
            .map(|&i| {
                let b: Vec<D::Time> = per_trial.iter().map(|row| row[i as usize]).collect();
                let test = marginal_uniformity_test(sample(&b, t))?;
                Ok(MarginalRow {
                    index: i,
                    rejects_at_0_01: test.rejects(0.01),
                    test,
                })
            })
            .collect()
    }

    fn two_state_alpha(file: &ScheduleFile) -> Option<f64> {
        if file.strategy != Strategy::Jwr || file.config.mode != Mode::Discrete {
            return None;
        }
        let cfg = file.config.to_discrete::<f64>().ok()?;
        alpha_of_config(&cfg).ok()
    }

    fn autocorr(&self) -> Result<Vec<PathBuf>> {
        let file = self.schedule()?;
        let series: Vec<f64> = match file.to_discrete() {
            Some(s) => offsets(&s).into_iter().map(|b| b as f64).collect(),
            None => offsets(&file.to_continuous()),
        };
        let alpha = Self::two_state_alpha(&file);
        let mut curve = empirical_autocorrelation(&series, self.max_lag)?;
        if let Some(a) = alpha {
            curve = curve.with_theory(a);
        }
        let report = AutocorrReport {
            samples: curve.samples,
            block_len: curve.block_len,
            alpha,
            l_c_theory: alpha.and_then(|a| correlation_length(a).ok()),
            l_c_fit: fit_correlation_length(&curve).ok(),
            points: curve.points,
        };
        match self.format {
            Format::Json => write_json(&self.out, &report)?,
            Format::Csv => write_text(
                &self.out,
                &csv_text(
                    &["lag", "empirical", "theoretical", "stderr"],
                    report.points.iter().map(|p| {
                        [
                            p.lag.to_string(),
                            num(p.empirical),
                            opt_num(p.theoretical),
                            num(p.stderr),
                        ]
                    }),
                ),
            )?,
        }
        Ok(vec![self.out.clone()])
    }

    fn gaps(&self) -> Result<Vec<PathBuf>> {
        let file = self.schedule()?;
        let gap_variance = match file.to_discrete() {
            Some(s) => gap_variance(&s)?,
            None => gap_variance(&file.to_continuous())?,
        };
        let report = GapsReport {
            gaps: file.len().saturating_sub(1),
            gap_variance,
            theoretical: Self::two_state_alpha(&file),
        };
        match self.format {
            Format::Json => write_json(&self.out, &report)?,
            Format::Csv => write_text(
                &self.out,
                &csv_text(
                    &["gaps", "gap_variance", "theoretical"],
                    [[
                        report.gaps.to_string(),
                        num(report.gap_variance),
                        opt_num(report.theoretical),
                    ]],
                ),
            )?,
        }
        Ok(vec![self.out.clone()])
    }

    fn spectral(&self) -> Result<Vec<PathBuf>> {
        let (config, _) = self.source()?;
        if self.max_k < 0 {
            return Err(CliError::invalid("max_k must be nonnegative"));
        }
        let report: SpectralReport = match config.validate()? {
            ValidatedConfig::Continuous(c) => continuous_report(&c, self.max_k, self.steps),
            ValidatedConfig::Discrete(c) => discrete_report(&c, self.max_k, self.steps),
        };
        match self.format {
            Format::Json => {
                write_json(&self.out, &report)?;
                Ok(vec![self.out.clone()])
            }
            Format::Csv => {
                write_text(
                    &self.out,
                    &csv_text(
                        &["k", "re", "im", "modulus"],
                        report
                            .fourier
                            .iter()
                            .map(|r| [r.k.to_string(), num(r.re), num(r.im), num(r.modulus)]),
                    ),
                )?;
                let tv_path = sibling(&self.out, ".tv.csv");
                write_text(
                    &tv_path,
                    &csv_text(
                        &["n", "tv", "bound"],
                        report
                            .tv
                            .iter()
                            .map(|r| [r.n.to_string(), num(r.tv), num(r.bound)]),
                    ),
                )?;
                Ok(vec![self.out.clone(), tv_path])
            }
        }
    }
}
