use std::path::PathBuf;

use jwr_core::{SamplingConfig, Strategy};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::output::write_json_compact;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateJob {
    pub config: SamplingConfig,
    pub strategy: Strategy,
    pub seed: u64,
    pub n: usize,
    pub out: PathBuf,
}

impl GenerateJob {
    pub fn run(&self) -> Result<Vec<PathBuf>> {
        let file = super::schedule_file(&self.config, self.strategy, self.seed, self.n)?;
        write_json_compact(&self.out, &file)?;
        Ok(vec![self.out.clone()])
    }
}
