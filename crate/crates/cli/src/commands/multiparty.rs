//! Secret-sharing demos on the five-qubit code (and the unencoded codes) with the hidden
//! Pauli key kept symbolic.

use qhide_core::multiparty::{AccessStructure, OracleMultihide, SharedSecret, LOGICAL_REGISTER};
use qhide_core::operators::HilbertLayout;
use qhide_core::random::pure_test_set;
use rayon::prelude::*;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::{read_file, CliError, Result};
use crate::report::{Check, Entry, RunReport};

/// `five-qubit`, `trivial` or `split:<k>`, optionally with a replacement access structure.
pub fn shared_secret(code: &str, access: Option<AccessStructure>) -> Result<SharedSecret> {
    let base = match code {
        "five-qubit" => SharedSecret::five_qubit()?,
        "trivial" => SharedSecret::trivial()?,
        other => match other.strip_prefix("split:").map(str::parse::<usize>) {
            Some(Ok(k)) => SharedSecret::split(k)?,
            _ => return Err(CliError::Usage(format!("code must be five-qubit, trivial or split:<k>, got `{other}`"))),
        },
    };
    Ok(match access {
        Some(access) => {
            let owners = (1..=base.k()).map(|q| base_owner(&base, q)).collect::<Result<Vec<_>>>()?;
            SharedSecret::new(base.code().clone(), owners, access)?
        }
        None => base,
    })
}

/// Party holding share `q`, read back from the register map.
fn base_owner(secret: &SharedSecret, q: usize) -> Result<usize> {
    let label = format!("S{q}");
    (1..=secret.access().party_count())
        .find(|&p| secret.registers_of(&[p]).contains(&label))
        .ok_or_else(|| CliError::Usage(format!("share {label} has no owner")))
}

pub fn parse_parties(text: &str) -> Result<Vec<usize>> {
    let parties = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Usage(format!("party `{s}` is not a number"))))
        .collect::<Result<Vec<usize>>>()?;
    if parties.is_empty() {
        return Err(CliError::Usage("no parties given".into()));
    }
    Ok(parties)
}

/// Worst trace distance between the coalition's marginals over the logical test set.
pub fn marginal_spread(secret: &SharedSecret, parties: &[usize], seed: u64) -> Result<f64> {
    let layout = secret.logical_layout()?;
    let tests = pure_test_set(&layout, seed)?;
    let marginals = tests
        .par_iter()
        .map(|psi| secret.marginal(parties, &secret.encode(&psi.projector())?))
        .collect::<qhide_core::Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for m in &marginals[1..] {
        worst = worst.max(m.as_op().checked_sub(marginals[0].as_op())?.trace_norm());
    }
    Ok(worst)
}

/// Worst infidelity of oracle-hidden reconstruction over the logical test set.
pub fn reconstruction_infidelity(secret: &SharedSecret, parties: &[usize], seed: u64) -> Result<f64> {
    let layout = HilbertLayout::single(LOGICAL_REGISTER, 1 << secret.code().logical_qubits())?;
    let mut worst = 0.0f64;
    for psi in pure_test_set(&layout, seed)? {
        let hidden = OracleMultihide::encode(secret, &psi)?;
        let out = hidden.reconstruct(parties)?;
        worst = worst.max(1.0 - out.overlap_with(&psi)?);
    }
    Ok(worst)
}

pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    let access = match config.get("access") {
        Some(path) => Some(AccessStructure::parse_json(&read_file(path)?)?),
        None => None,
    };
    let secret = shared_secret(config.string("code")?, access)?;
    let seed = config.seed()?;
    let tol = config.tolerance()?;
    let structure = secret.access();
    let mut checks = Vec::new();
    let mut entries = Vec::new();
    let mut details = json!({
        "code": secret.code().name(),
        "access": structure.to_json(),
        "minimal_sets": structure.minimal_sets().iter().map(|c| c.parties()).collect::<Vec<_>>(),
        "maximal_unauthorized": structure.maximal_unauthorized().iter().map(|c| c.parties()).collect::<Vec<_>>(),
    });
    match config.string("demo")? {
        "reconstruct" => {
            let parties = parse_parties(config.string("authorized")?)?;
            let authorized = structure.is_authorized(&parties)?;
            details["coalition"] = json!(parties);
            details["authorized"] = json!(authorized);
            if authorized {
                let infidelity = reconstruction_infidelity(&secret, &parties, seed)?;
                checks.push(Check::le("reconstruction-infidelity", infidelity, tol));
                entries.push(Entry::exact("min_fidelity", 1.0 - infidelity));
            } else {
                let spread = marginal_spread(&secret, &parties, seed)?;
                checks.push(Check::le("unauthorized-marginal-spread", spread, tol));
                let hidden = OracleMultihide::encode(&secret, &pure_test_set(&secret.logical_layout()?, seed)?[0])?;
                let refused = matches!(hidden.reconstruct(&parties), Err(qhide_core::Error::Access(_)));
                checks.push(Check::holds("unauthorized-refused", refused));
                entries.push(Entry::exact("marginal_spread", spread));
            }
        }
        "marginals" => {
            for set in structure.maximal_unauthorized() {
                let spread = marginal_spread(&secret, &set.parties(), seed)?;
                checks.push(Check::le(format!("marginal-spread {set}"), spread, tol));
            }
        }
        "access" => {}
        other => return Err(CliError::Usage(format!("demo must be reconstruct, marginals or access, got `{other}`"))),
    }
    Ok(RunReport::new(config, checks, entries, details))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Command;

    #[test]
    fn every_threshold_coalition_reconstructs() {
        let secret = shared_secret("five-qubit", None).unwrap();
        for set in secret.access().minimal_sets() {
            assert!(reconstruction_infidelity(&secret, &set.parties(), 3).unwrap() < 1e-9, "{set}");
        }
    }

    #[test]
    fn unauthorized_demo_reports_hiding() {
        let config = ExperimentConfig::resolve(Command::Multiparty, None, &[("authorized", "4,5".into())]).unwrap();
        let report = run(&config).unwrap();
        assert!(report.passed, "{:?}", report.checks);
        assert_eq!(report.checks.len(), 2);
    }

    #[test]
    fn access_file_replaces_structure() {
        let access = AccessStructure::parse_json(r#"{"p": 2, "authorized": [[1, 2]]}"#).unwrap();
        let secret = shared_secret("split:2", Some(access)).unwrap();
        assert!(!secret.access().is_authorized(&[1]).unwrap());
        assert!(shared_secret("steane", None).is_err());
        assert!(parse_parties(" ,").is_err());
    }
}
