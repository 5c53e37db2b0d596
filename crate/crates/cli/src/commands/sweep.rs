use std::path::{Path, PathBuf};

use jwr_core::adversary::{exact_miss_curve, fit_exponential, AttackSet, AttackSpec};
use jwr_core::analysis::chain::{alpha_of_config, OffsetChain};
use jwr_core::analysis::correlation::{
    correlation_length, empirical_autocorrelation, fit_correlation_length,
};
use jwr_core::analysis::{gap_variance, offsets};
use jwr_core::config::Mass;
use jwr_core::seed::derive_seed;
use jwr_core::{generate_schedule, DiscreteConfigF64, JitterSpec, SamplingConfig, Strategy};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::{csv_text, opt_num, write_json, write_text};

fn default_steps() -> usize {
    1_000_000
}

fn default_max_lag() -> usize {
    10
}

/// Intervals at which the exact miss probability is evaluated for the slope.
const MISS_INTERVALS: [u64; 8] = [5, 10, 15, 20, 25, 30, 35, 40];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalCell {
    pub t: u64,
    pub t_p: u64,
}

/// Parameter grid: two-state flip probabilities and/or `(t, t_p)` pairs
/// with uniform jitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub cells: Vec<IntervalCell>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_max_lag")]
    pub max_lag: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepJob {
    pub grid: Grid,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub index: usize,
    pub seed: u64,
    pub steps: usize,
    pub t: u64,
    pub t_p: u64,
    pub alpha: Option<f64>,
    pub l_c_theory: Option<f64>,
    pub autocorr_fit_l_c: Option<f64>,
    pub gap_variance_empirical: Option<f64>,
    pub miss_slope: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct FailedCell {
    index: usize,
    error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SweepSummary {
    cells: usize,
    succeeded: usize,
    failed: Vec<FailedCell>,
}

#[derive(Debug, Clone, Copy)]
enum CellSpec {
    Alpha(f64),
    Interval(IntervalCell),
}

impl CellSpec {
    fn config(self) -> SamplingConfig {
        match self {
            CellSpec::Alpha(a) => SamplingConfig::discrete(
                2,
                1,
                JitterSpec::LazyStep {
                    alpha: Mass::Number(a),
                },
            ),
            CellSpec::Interval(c) => SamplingConfig::discrete(c.t, c.t_p, JitterSpec::Uniform),
        }
    }

    fn shape(self) -> (u64, u64, Option<f64>) {
        match self {
            CellSpec::Alpha(a) => (2, 1, Some(a)),
            CellSpec::Interval(c) => (c.t, c.t_p, None),
        }
    }
}

impl SweepJob {
    fn specs(&self) -> Vec<CellSpec> {
        self.grid
            .alphas
            .iter()
            .map(|&a| CellSpec::Alpha(a))
            .chain(self.grid.cells.iter().map(|&c| CellSpec::Interval(c)))
            .collect()
    }

    fn cell_path(&self, index: usize) -> PathBuf {
        self.out.join("cells").join(format!("cell-{index:03}.json"))
    }

    pub fn run(&self) -> Result<Vec<PathBuf>> {
        let specs = self.specs();
        if specs.is_empty() {
            return Err(CliError::invalid("sweep grid has no cells"));
        }
        let reports: Vec<CellReport> = specs
            .par_iter()
            .enumerate()
            .map(|(i, &spec)| self.cell(i, spec))
            .collect::<Result<_>>()?;

        let mut outputs: Vec<PathBuf> = (0..reports.len()).map(|i| self.cell_path(i)).collect();
        let aggregate = self.out.join("aggregate.csv");
        write_text(
            &aggregate,
            &csv_text(
                &[
                    "alpha",
                    "l_c_theory",
                    "autocorr_fit_l_c",
                    "gap_variance_empirical",
                    "miss_slope",
                    "t",
                    "t_p",
                    "error",
                ],
                reports.iter().map(|r| {
                    [
                        opt_num(r.alpha),
                        opt_num(r.l_c_theory),
                        opt_num(r.autocorr_fit_l_c),
                        opt_num(r.gap_variance_empirical),
                        opt_num(r.miss_slope),
                        r.t.to_string(),
                        r.t_p.to_string(),
                        r.error.clone().unwrap_or_default(),
                    ]
                }),
            ),
        )?;
        let failed: Vec<FailedCell> = reports
            .iter()
            .filter_map(|r| {
                r.error.as_ref().map(|e| FailedCell {
                    index: r.index,
                    error: e.clone(),
                })
            })
            .collect();
        for f in &failed {
            eprintln!("sweep cell {} failed: {}", f.index, f.error);
        }
        let summary = SweepSummary {
            cells: reports.len(),
            succeeded: reports.len() - failed.len(),
            failed,
        };
        let summary_path = self.out.join("summary.json");
        write_json(&summary_path, &summary)?;
        outputs.push(aggregate);
        outputs.push(summary_path);
        if summary.succeeded == 0 {
            return Err(CliError::invalid("every sweep cell failed"));
        }
        Ok(outputs)
    }

    /// Loads a finished cell if one with the same inputs exists, otherwise
    /// computes and stores it.
    fn cell(&self, index: usize, spec: CellSpec) -> Result<CellReport> {
        let path = self.cell_path(index);
        let seed = derive_seed(self.seed, "sweep-cell", index as u64);
        let (t, t_p, alpha) = spec.shape();
        if let Some(done) = load_cell(&path) {
            let same_alpha = alpha.is_none() || done.alpha == alpha;
            if done.seed == seed
                && done.steps == self.grid.steps
                && done.t == t
                && done.t_p == t_p
                && same_alpha
            {
                return Ok(done);
            }
        }
        let mut report = CellReport {
            index,
            seed,
            steps: self.grid.steps,
            t,
            t_p,
            alpha,
            l_c_theory: None,
            autocorr_fit_l_c: None,
            gap_variance_empirical: None,
            miss_slope: None,
            error: None,
        };
        if let Err(e) = self.compute(spec, &mut report) {
            report.error = Some(e);
        }
        write_json(&path, &report)?;
        Ok(report)
    }

    fn compute(&self, spec: CellSpec, r: &mut CellReport) -> std::result::Result<(), String> {
        let cfg: DiscreteConfigF64 = spec
            .config()
            .to_discrete()
            .map_err(|e| e.to_string().replace('\n', " "))?;
        if r.alpha.is_none() {
            r.alpha = alpha_of_config(&cfg).ok();
        }
        r.l_c_theory = r.alpha.and_then(|a| correlation_length(a).ok());

        let sch = generate_schedule(&cfg, Strategy::Jwr, r.seed, r.steps.max(1));
        let b: Vec<f64> = offsets(&sch).into_iter().map(|x| x as f64).collect();
        let curve = empirical_autocorrelation(&b, self.grid.max_lag).map_err(|e| e.to_string())?;
        r.autocorr_fit_l_c = fit_correlation_length(&curve).ok();
        r.gap_variance_empirical = Some(gap_variance(&sch).map_err(|e| e.to_string())?);

        let t = cfg.t();
        let u = MISS_INTERVALS[MISS_INTERVALS.len() - 1] * t;
        let attack = AttackSet::<u64>::build(&AttackSpec::Periodic {
            period: t as f64,
            phase: 0.0,
            width: 1.0,
            horizon: Some(u as f64),
        })
        .map_err(|e| e.to_string())?;
        let horizons: Vec<u64> = MISS_INTERVALS.iter().map(|m| m * t).collect();
        let chain = OffsetChain::for_strategy(Strategy::Jwr, &cfg);
        let exact = exact_miss_curve(&chain, t, &attack, &horizons).map_err(|e| e.to_string())?;
        let pts: Vec<(f64, f64)> = horizons
            .iter()
            .zip(exact)
            .map(|(&h, e)| (attack.measure_below(h), e))
            .collect();
        r.miss_slope = fit_exponential(&pts).ok().map(|f| f.slope);
        Ok(())
    }
}

fn load_cell(path: &Path) -> Option<CellReport> {
    let text = std::fs::read_to_string(path).ok()?;
    serde_json::from_str(&text).ok()
}
