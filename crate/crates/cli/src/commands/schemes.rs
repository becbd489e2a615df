//! `build-qscheme` and `security`: qubit hiding schemes as JSON files, and one
//! distinguishability estimator applied to their Pauli eigenspace encodings.

use std::collections::BTreeMap;
use std::str::FromStr;

use qhide_core::bit_hiding::{BitHidingScheme, Certificate, CertificateKind, Holder, SchemeSelector};
use qhide_core::channels::{ChannelJson, QChannel};
use qhide_core::dual_hiding::{qubits_from_bits, QubitHidingScheme};
use qhide_core::operators::DensityOperator;
use qhide_core::pauli::{pm_decomposition_on, PauliIndex};
use qhide_core::security::{
    certify_qubit_scheme, certify_scheme, dist_global, dist_locc_seesaw, dist_ppt, dist_tomography_lower, Cut,
    EstimatorKind, SecurityReport, SeesawSettings,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::{read_file, write_file, CliError, Result};
use crate::report::{Check, Entry, RunReport};

pub const SCHEME_SCHEMA: &str = "qhide-scheme/1";

/// A qubit hiding scheme with the provenance of its certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeFile {
    pub schema: String,
    pub bit_scheme: String,
    pub n: usize,
    pub descriptor: String,
    pub holders: BTreeMap<String, Holder>,
    pub epsilon: Option<Certificate>,
    pub delta: Option<Certificate>,
    pub encoder: ChannelJson,
    pub decoder: ChannelJson,
}

impl SchemeFile {
    pub fn from_scheme(selector: &str, qs: &QubitHidingScheme) -> Self {
        Self {
            schema: SCHEME_SCHEMA.into(),
            bit_scheme: selector.into(),
            n: qs.n(),
            descriptor: qs.descriptor().into(),
            holders: qs.holders().clone(),
            epsilon: qs.core().and_then(|c| c.eps_certificate().cloned()),
            delta: qs.delta_certificate().cloned(),
            encoder: qs.encoder().to_json(),
            decoder: qs.decoder().to_json(),
        }
    }

    pub fn to_scheme(&self) -> Result<QubitHidingScheme> {
        if self.schema != SCHEME_SCHEMA {
            return Err(CliError::Usage(format!("scheme schema `{}`, expected `{SCHEME_SCHEMA}`", self.schema)));
        }
        let qs = QubitHidingScheme::from_channels(
            self.descriptor.clone(),
            QChannel::from_json(&self.encoder)?,
            QChannel::from_json(&self.decoder)?,
            self.holders.clone(),
        )?;
        if qs.n() != self.n {
            return Err(CliError::Usage(format!("scheme file says n={}, channels hide {}", self.n, qs.n())));
        }
        Ok(match &self.delta {
            Some(cert) => qs.with_delta(cert.clone()),
            None => qs,
        })
    }
}

/// The `2n`-bit core for `n` hidden qubits. A one-bit selector is tensored `2n` times.
pub fn bit_core(selector: &str, n: usize) -> Result<BitHidingScheme> {
    if n == 0 {
        return Err(CliError::Usage("n must be at least 1".into()));
    }
    let parsed = SchemeSelector::from_str(selector)?;
    let cs = parsed.build()?;
    let cs = if cs.arity() == 2 * n {
        cs
    } else if cs.arity() == 1 {
        SchemeSelector::Tensor(vec![parsed; 2 * n]).build()?
    } else {
        return Err(CliError::Usage(format!(
            "`{selector}` hides {} bits; {n} qubits need {} (or a one-bit scheme to repeat)",
            cs.arity(),
            2 * n
        )));
    };
    let eps = certify_scheme(&cs)?;
    Ok(cs.with_certificate(eps))
}

/// `qubits_from_bits` of [`bit_core`], with its `δ̂` certificate attached.
pub fn build_qscheme(selector: &str, n: usize) -> Result<QubitHidingScheme> {
    let qs = qubits_from_bits(&bit_core(selector, n)?)?;
    let delta = certify_qubit_scheme(&qs)?;
    Ok(qs.with_delta(delta))
}

fn certificate_entry(name: &str, cert: &Certificate) -> Entry {
    let direction = match cert.kind {
        CertificateKind::CertifiedUpper => "upper",
        CertificateKind::Heuristic => "heuristic",
        CertificateKind::OraclePerfect => "oracle",
    };
    Entry::new(name, cert.value, &cert.method, direction)
}

pub fn run_build(config: &ExperimentConfig) -> Result<RunReport> {
    let selector = config.string("bit-scheme")?;
    let n = config.usize("n")?;
    let tol = config.tolerance()?;
    let qs = build_qscheme(selector, n)?;
    let file = SchemeFile::from_scheme(selector, &qs);
    if let Some(path) = config.get("emit") {
        write_file(path, &(serde_json::to_string_pretty(&file)? + "\n"))?;
    }
    let fidelity = qs.process_fidelity()?;
    let checks = vec![Check::le("roundtrip-infidelity", 1.0 - fidelity, tol)];
    let mut entries = vec![Entry::exact("process_fidelity", fidelity)];
    if let Some(eps) = &file.epsilon {
        entries.push(certificate_entry("epsilon_hat", eps));
    }
    if let Some(delta) = &file.delta {
        entries.push(certificate_entry("delta_upper", delta));
    }
    let details = json!({
        "descriptor": file.descriptor,
        "bit_scheme": file.bit_scheme,
        "n": n,
        "output_layout": qs.output_layout().to_string(),
        "epsilon": file.epsilon,
        "delta": file.delta,
        "emitted": config.get("emit"),
    });
    Ok(RunReport::new(config, checks, entries, details))
}

fn parse_estimator(name: &str) -> Result<EstimatorKind> {
    match name {
        "ppt" => Ok(EstimatorKind::PptSdp),
        "seesaw" => Ok(EstimatorKind::LoccSeesaw),
        "tomo" => Ok(EstimatorKind::PauliTomography),
        "global" => Ok(EstimatorKind::GlobalHelstrom),
        other => Err(CliError::Usage(format!("estimator must be ppt|seesaw|tomo|global, got `{other}`"))),
    }
}

/// `A:B` names the party on each side; their registers come from the scheme's holders.
pub fn parse_cut(text: &str, holders: &BTreeMap<String, Holder>) -> Result<Cut> {
    let (alice, bob) = text
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("cut must look like `A:B`, got `{text}`")))?;
    let cut = Cut::from_holders(holders, alice.trim(), bob.trim());
    if cut.alice.is_empty() && cut.bob.is_empty() {
        return Err(CliError::Usage(format!("neither side of `{text}` holds a register")));
    }
    Ok(cut)
}

/// One estimator value for a pair of states, with solver diagnostics.
pub fn estimate(
    kind: EstimatorKind,
    rho: &DensityOperator,
    sigma: &DensityOperator,
    cut: &Cut,
    seed: u64,
) -> Result<(f64, BTreeMap<String, serde_json::Value>)> {
    let mut diagnostics = BTreeMap::new();
    let mut visible = cut.alice.clone();
    visible.extend(cut.bob.iter().cloned());
    let value = match kind {
        EstimatorKind::GlobalHelstrom => dist_global(&rho.partial_trace(&visible)?, &sigma.partial_trace(&visible)?)?,
        EstimatorKind::PptSdp => {
            let bound = dist_ppt(rho, sigma, cut)?;
            diagnostics.insert("lower".into(), json!(bound.lower));
            diagnostics.insert("gap".into(), json!(bound.gap()));
            diagnostics.insert("solver".into(), json!(bound.diagnostics));
            bound.upper
        }
        EstimatorKind::LoccSeesaw => {
            let settings = SeesawSettings {
                seed,
                ..SeesawSettings::default()
            };
            let run = dist_locc_seesaw(rho, sigma, cut, &settings)?;
            diagnostics.insert("direction".into(), json!(run.direction));
            diagnostics.insert("iterations".into(), json!(run.iterations));
            run.value
        }
        EstimatorKind::PauliTomography => {
            if let Some(reg) = rho.layout().registers().iter().find(|r| !r.dim.is_power_of_two()) {
                return Err(CliError::Usage(format!(
                    "register `{}` of dimension {} has no qubit Pauli basis",
                    reg.label, reg.dim
                )));
            }
            let bound = dist_tomography_lower(&rho.partial_trace(&visible)?, &sigma.partial_trace(&visible)?)?;
            diagnostics.insert("coefficient_sum".into(), json!(bound.coefficient_sum));
            bound.lower
        }
    };
    Ok((value, diagnostics))
}

fn load_scheme(config: &ExperimentConfig) -> Result<QubitHidingScheme> {
    match config.get("scheme") {
        Some(path) => {
            let file: SchemeFile = serde_json::from_str(&read_file(path)?)?;
            file.to_scheme()
        }
        None => build_qscheme(config.string("bit-scheme")?, config.usize("n")?),
    }
}

/// Largest estimator value over the encodings of the ± eigenspaces of every `σ_M ≠ 1`.
pub fn security_report(qs: &QubitHidingScheme, kind: EstimatorKind, cut: &Cut, seed: u64) -> Result<SecurityReport> {
    let mut per_pauli = BTreeMap::new();
    let mut best = (f64::NEG_INFINITY, String::new(), BTreeMap::new());
    for idx in PauliIndex::all(qs.n())?.skip(1) {
        let s = idx.string();
        let pm = pm_decomposition_on(&s, qs.input_layout().clone())?;
        let (value, diag) = estimate(kind, &qs.encode(&pm.plus)?, &qs.encode(&pm.minus)?, cut, seed)?;
        per_pauli.insert(s.to_string(), json!(value));
        if value > best.0 {
            best = (value, s.to_string(), diag);
        }
    }
    let (value, worst, mut diagnostics) = best;
    diagnostics.insert("worst_pauli".into(), json!(worst));
    diagnostics.insert("per_pauli".into(), json!(per_pauli));
    diagnostics.insert("cut".into(), json!(cut));
    Ok(SecurityReport {
        instance: qs.descriptor().into(),
        estimator: kind,
        direction: kind.direction(),
        value,
        diagnostics,
    })
}

pub fn run_security(config: &ExperimentConfig) -> Result<RunReport> {
    let kind = parse_estimator(config.string("estimator")?)?;
    let tol = config.tolerance()?;
    let qs = load_scheme(config)?;
    let cut = parse_cut(config.string("cut")?, qs.holders())?;
    let report = security_report(&qs, kind, &cut, config.seed()?)?;
    if let Some(path) = config.get("report") {
        write_file(path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    let mut checks = vec![Check::le("trace-distance-range", report.value, 2.0 + tol)];
    if let Some(gap) = report.diagnostics.get("gap").and_then(|g| g.as_f64()) {
        checks.push(Check::le("ppt-duality-gap", gap, tol));
    }
    let direction = serde_json::to_value(report.direction)?;
    let estimator = serde_json::to_value(report.estimator)?;
    let entries = vec![Entry::new(
        "value",
        report.value,
        estimator.as_str().unwrap_or_default(),
        direction.as_str().unwrap_or_default(),
    )];
    Ok(RunReport::new(config, checks, entries, json!({ "security": report })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qhide_core::operators::linalg::max_abs_diff;

    #[test]
    fn scheme_file_round_trip() {
        let qs = build_qscheme("oracle:k=2", 1).unwrap();
        let file = SchemeFile::from_scheme("oracle:k=2", &qs);
        let text = serde_json::to_string(&file).unwrap();
        let back: SchemeFile = serde_json::from_str(&text).unwrap();
        let rebuilt = back.to_scheme().unwrap();
        let a = qs.encoder().choi().unwrap();
        let b = rebuilt.encoder().choi().unwrap();
        assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-15);
        assert_eq!(rebuilt.delta_certificate(), qs.delta_certificate());
    }

    #[test]
    fn one_bit_selectors_are_repeated() {
        assert_eq!(bit_core("werner:d=2", 1).unwrap().arity(), 2);
        assert!(bit_core("oracle:k=3", 1).is_err());
    }

    #[test]
    fn oracle_scheme_is_invisible_to_every_estimator() {
        let qs = build_qscheme("oracle:k=2", 1).unwrap();
        let cut = parse_cut("A:B", qs.holders()).unwrap();
        for kind in [EstimatorKind::GlobalHelstrom, EstimatorKind::PptSdp, EstimatorKind::PauliTomography] {
            assert!(security_report(&qs, kind, &cut, 1).unwrap().value < 1e-9, "{kind:?}");
        }
    }
}
