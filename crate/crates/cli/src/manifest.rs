//! Run manifests: enough to replay any invocation exactly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::commands::{
    analyze::AnalyzeJob, attack::AttackJob, generate::GenerateJob, sweep::SweepJob,
};
use crate::error::Result;
use crate::output::{sibling, write_json};

/// A fully resolved invocation. Config files are inlined so replay does not
/// depend on them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Job {
    Generate(GenerateJob),
    Analyze(AnalyzeJob),
    Attack(AttackJob),
    Sweep(SweepJob),
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Generate(_) => "generate",
            Job::Analyze(_) => "analyze",
            Job::Attack(_) => "attack",
            Job::Sweep(_) => "sweep",
        }
    }

    pub fn master_seed(&self) -> u64 {
        match self {
            Job::Generate(j) => j.seed,
            Job::Analyze(j) => j.seed(),
            Job::Attack(j) => j.seed,
            Job::Sweep(j) => j.seed,
        }
    }

    pub fn out(&self) -> &Path {
        match self {
            Job::Generate(j) => &j.out,
            Job::Analyze(j) => &j.out,
            Job::Attack(j) => &j.out,
            Job::Sweep(j) => &j.out,
        }
    }

    pub fn set_out(&mut self, out: PathBuf) {
        match self {
            Job::Generate(j) => j.out = out,
            Job::Analyze(j) => j.out = out,
            Job::Attack(j) => j.out = out,
            Job::Sweep(j) => j.out = out,
        }
    }

    /// Where the manifest for this job goes.
    pub fn manifest_path(&self) -> PathBuf {
        match self {
            Job::Sweep(j) => j.out.join("manifest.json"),
            other => sibling(other.out(), ".manifest.json"),
        }
    }

    /// Runs the job and returns the files it wrote.
    pub fn execute(&self) -> Result<Vec<PathBuf>> {
        match self {
            Job::Generate(j) => j.run(),
            Job::Analyze(j) => j.run(),
            Job::Attack(j) => j.run(),
            Job::Sweep(j) => j.run(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub job: Job,
    pub master_seed: u64,
    pub version: String,
    pub outputs: Vec<PathBuf>,
    pub duration_secs: f64,
}

/// Executes `job` and writes its manifest.
pub fn run_and_record(job: Job) -> Result<RunManifest> {
    let start = std::time::Instant::now();
    let outputs = job.execute()?;
    let manifest = RunManifest {
        command: job.name().to_string(),
        master_seed: job.master_seed(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs,
        duration_secs: start.elapsed().as_secs_f64(),
        job,
    };
    write_json(&manifest.job.manifest_path(), &manifest)?;
    Ok(manifest)
}
