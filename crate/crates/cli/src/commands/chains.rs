//! The three bound chains: bits→qubits, qubits→bits and the multiparty stand-in.

use qhide_core::bit_hiding::{perfect_oracle, BitHidingScheme, SchemeSelector};
use qhide_core::dual_hiding::qubits_from_bits;
use qhide_core::multiparty::{
    default_multiparty_attack, multiparty_seesaw_settings, multiparty_stand_in, verify_multiparty_chain, StandInCore,
};
use qhide_core::security::{
    default_c2q_attack, default_q2c_attack, verify_c2q_chain, verify_q2c_chain, ChainCheck, ChainReport,
    ChainSettings, SeesawSettings,
};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::report::{Check, Entry, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainMode {
    Werner,
    Oracle,
}

impl ChainMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "werner" => Ok(ChainMode::Werner),
            "oracle" => Ok(ChainMode::Oracle),
            other => Err(CliError::Usage(format!("mode must be werner or oracle, got `{other}`"))),
        }
    }

    fn bit_core(self, n: usize) -> qhide_core::Result<BitHidingScheme> {
        match self {
            ChainMode::Werner => SchemeSelector::werner_power(2, 2 * n).build(),
            ChainMode::Oracle => perfect_oracle(2 * n),
        }
    }

    fn stand_in(self) -> StandInCore {
        match self {
            ChainMode::Werner => StandInCore::Werner,
            ChainMode::Oracle => StandInCore::PerfectOracle,
        }
    }
}

pub fn c2q_report(mode: ChainMode, n: usize, seed: u64, settings: &ChainSettings) -> Result<ChainReport> {
    let cs = mode.bit_core(n)?;
    let seesaw = SeesawSettings {
        seed,
        ..SeesawSettings::default()
    };
    let attack = default_c2q_attack(&cs, &seesaw)?;
    Ok(verify_c2q_chain(&cs, &attack.protocol, settings)?)
}

pub fn q2c_report(mode: ChainMode, n: usize, seed: u64, settings: &ChainSettings) -> Result<ChainReport> {
    let qs = qubits_from_bits(&mode.bit_core(n)?)?;
    let seesaw = SeesawSettings {
        seed,
        ..SeesawSettings::default()
    };
    let attack = default_q2c_attack(&qs, &seesaw)?;
    Ok(verify_q2c_chain(&qs, &attack.protocol, settings)?)
}

pub fn multiparty_report(mode: ChainMode, k: usize, seed: u64, settings: &ChainSettings) -> Result<ChainReport> {
    let cs = multiparty_stand_in(k, mode.stand_in())?;
    let attack = default_multiparty_attack(&cs, &multiparty_seesaw_settings(k, seed))?;
    Ok(verify_multiparty_chain(&cs, &attack.protocol, settings)?)
}

fn chain_check(report: &ChainReport, c: &ChainCheck) -> Check {
    Check {
        name: format!("{}/{}/{}", report.chain, report.instance, c.name),
        value: c.lhs,
        limit: c.rhs,
        margin: c.margin,
        passed: c.passed,
    }
}

/// Estimator and bound direction of a named chain value.
fn classify(name: &str) -> (&'static str, &'static str) {
    match name {
        "delta_hat" | "attack_value" => ("locc-attack", "lower"),
        "epsilon_hat" | "delta_upper" | "bound" => ("ppt-certificate", "upper"),
        "tomography_lower" => ("pauli-tomography", "lower"),
        _ => ("exact", "exact"),
    }
}

pub fn flatten(reports: &[ChainReport]) -> (Vec<Check>, Vec<Entry>) {
    let mut checks = Vec::new();
    let mut entries = Vec::new();
    for r in reports {
        checks.extend(r.checks.iter().map(|c| chain_check(r, c)));
        for (name, &value) in &r.values {
            let (estimator, direction) = classify(name);
            entries.push(Entry::new(format!("{}/{}/{name}", r.chain, r.instance), value, estimator, direction));
        }
    }
    (checks, entries)
}

pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    let mode = ChainMode::parse(config.string("mode")?)?;
    let n = config.usize("n")?;
    let ks = config.usize_list("k")?;
    let seed = config.seed()?;
    let settings = ChainSettings {
        seed,
        identity_tolerance: config.tolerance()?,
        ..ChainSettings::default()
    };
    let mut reports = vec![
        c2q_report(mode, n, seed, &settings)?,
        q2c_report(mode, n, seed, &settings)?,
    ];
    for k in ks {
        reports.push(multiparty_report(mode, k, seed, &settings)?);
    }
    let (checks, entries) = flatten(&reports);
    Ok(RunReport::new(config, checks, entries, json!({ "chains": reports })))
}
