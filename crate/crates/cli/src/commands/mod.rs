pub mod analyze;
pub mod attack;
pub mod generate;
pub mod sweep;

use jwr_core::io::ScheduleFile;
use jwr_core::{generate_schedule, SamplingConfig, Strategy, ValidatedConfig};

use crate::error::{CliError, Result};

/// Generates `n` timestamps and packages them with their config.
pub fn schedule_file(
    config: &SamplingConfig,
    strategy: Strategy,
    seed: u64,
    n: usize,
) -> Result<ScheduleFile> {
    if n == 0 {
        return Err(CliError::invalid("schedule length must be at least 1"));
    }
    Ok(match config.validate()? {
        ValidatedConfig::Continuous(c) => {
            ScheduleFile::continuous(&generate_schedule(&c, strategy, seed, n), config)
        }
        ValidatedConfig::Discrete(c) => {
            ScheduleFile::discrete(&generate_schedule(&c, strategy, seed, n), config)
        }
    })
}
