//! The Pauli pad as a private quantum channel, with the optional entropy audit.

use qhide_core::resources::{
    eavesdropper_distance, entropy_audit, key_lower_bound_check, pad_as_bit_scheme, pauli_pad, uniform_ensemble,
};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{Check, Entry, RunReport};

pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    let n = config.usize("n")?;
    let seed = config.seed()?;
    let tol = config.tolerance()?;
    let pad = pauli_pad(n)?;

    let secrecy = pad.secrecy_deviation(seed)?;
    let infidelity = pad.decryption_infidelity()?;
    let verdict = key_lower_bound_check(&pad, seed)?;
    let bits = pad_as_bit_scheme(&pad)?;
    let leak = eavesdropper_distance(&bits)?;
    let worst_decode = (0..bits.num_states())
        .map(|i| bits.success_probability(i).map(|p| 1.0 - p))
        .collect::<qhide_core::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let mut checks = vec![
        Check::le("secrecy-deviation", secrecy, tol),
        Check::le("decryption-infidelity", infidelity, tol),
        Check::holds("key-length-bound", verdict.passed()),
        Check::le("dense-coded-eavesdropper-distance", leak, tol),
        Check::le("dense-coded-decoding-failure", worst_decode, tol),
    ];
    let mut entries = vec![
        Entry::exact("key_bits", pad.key_bits() as f64),
        Entry::exact("secrecy_deviation", secrecy),
        Entry::exact("eavesdropper_distance", leak),
    ];
    let mut details = json!({
        "scheme": pad.descriptor(),
        "verdict": verdict,
        "dense_coded_bits": bits.arity(),
    });
    if config.flag("audit")? {
        let audit = entropy_audit(&pad, &uniform_ensemble(n))?;
        for c in &audit.checks {
            let deviation = match c.expected.as_str() {
                ">= 0" => (-c.value).max(0.0),
                "0" => c.value.abs(),
                expected => (c.value - expected.parse::<f64>().unwrap_or(f64::NAN)).abs(),
            };
            checks.push(Check::le(format!("entropy/{}", c.name), deviation, tol));
        }
        for (name, value) in [
            ("S(M)", audit.s_m),
            ("S(K)", audit.s_k),
            ("S(M:K)", audit.s_m_k),
            ("S(M:B2B3)", audit.s_m_c),
            ("S(M:B2B3|K)", audit.s_m_c_given_k),
            ("S(M:K|B2B3)", audit.s_m_k_given_c),
            ("S(K|B2B3M)", audit.s_k_given_cm),
        ] {
            entries.push(Entry::new(name, value, "von-neumann-entropy", "exact"));
        }
        details["entropy_report"] = serde_json::to_value(&audit)?;
    }
    Ok(RunReport::new(config, checks, entries, details))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Command;

    #[test]
    fn audit_passes_for_one_qubit() {
        let config = ExperimentConfig::resolve(Command::Pqc, None, &[("audit", "true".into())]).unwrap();
        let report = run(&config).unwrap();
        assert!(report.passed, "{:?}", report.checks);
        assert!(report.details["entropy_report"]["S(M:B2B3|K)"].as_f64().unwrap() > 1.99);
    }
}
