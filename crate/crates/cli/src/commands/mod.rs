pub mod chains;
pub mod identities;
pub mod multiparty;
pub mod pqc;
pub mod schemes;
pub mod sweep;

use crate::config::{Command, ExperimentConfig};
use crate::error::Result;
use crate::report::RunReport;

/// Runs one resolved configuration.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    match config.command {
        Command::VerifyIdentities => identities::run(config),
        Command::BuildQscheme => schemes::run_build(config),
        Command::Security => schemes::run_security(config),
        Command::Sweep => sweep::run(config),
        Command::Chains => chains::run(config),
        Command::Multiparty => multiparty::run(config),
        Command::Pqc => pqc::run(config),
    }
}
