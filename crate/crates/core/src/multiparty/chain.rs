use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::bit_hiding::{perfect_oracle, BitHidingScheme, CertificateKind, SchemeSelector};
use crate::channels::{LinearMap, LoccProtocol};
use crate::dual_hiding::qubits_from_bits;
use crate::pauli::{pm_decomposition_on, PauliIndex};
use crate::random::pure_test_set;
use crate::security::{
    best_seesaw_attack, certify_scheme, dist_tomography_lower, jamiolkowski_family, max_pairwise_distance, AttackMap,
    ChainCheck, ChainReport, ChainSettings, Cut, SeesawResult, SeesawSettings,
};
use crate::{Error, Result};

/// Largest share count for which the chain is evaluated with dense matrices.
pub const MAX_CHAIN_QUBITS: usize = 2;

/// Hiding core of the bipartite stand-in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StandInCore {
    /// `2k` Werner pairs with `d = 2`.
    Werner,
    PerfectOracle,
}

/// Bit scheme of arity `2k` keying the twirl of `k` share qubits, all held by party 2.
pub fn multiparty_stand_in(k: usize, core: StandInCore) -> Result<BitHidingScheme> {
    if k == 0 || k > MAX_CHAIN_QUBITS {
        return Err(Error::Domain(format!("stand-in needs k in 1..={MAX_CHAIN_QUBITS}, got {k}")));
    }
    match core {
        StandInCore::Werner => SchemeSelector::werner_power(2, 2 * k).build(),
        StandInCore::PerfectOracle => perfect_oracle(2 * k),
    }
}

/// Seesaw budget used for the stand-in: the full default at `k = 1`; at `k = 2` the 64x64
/// blocks make each restart expensive, so a single warm start with a short run is used.
pub fn multiparty_seesaw_settings(k: usize, seed: u64) -> SeesawSettings {
    let base = SeesawSettings { seed, ..SeesawSettings::default() };
    if k <= 1 {
        base
    } else {
        SeesawSettings {
            restarts: 0,
            iterations: 20,
            ..base
        }
    }
}

/// Seesaw attack with a one-bit output, over the ± eigenspace encodings of the weight-one
/// Pauli axes.
pub fn default_multiparty_attack(cs: &BitHidingScheme, settings: &SeesawSettings) -> Result<SeesawResult> {
    let qs = qubits_from_bits(cs)?;
    let mut pairs = Vec::new();
    for idx in PauliIndex::all(qs.n())?.filter(|i| i.string().weight() == 1) {
        let pm = pm_decomposition_on(&idx.string(), qs.input_layout().clone())?;
        pairs.push((qs.encode(&pm.plus)?, qs.encode(&pm.minus)?));
    }
    best_seesaw_attack(&pairs, &Cut::of_qubit_scheme(&qs), settings)
}

/// Multiparty chain on the bipartite stand-in: the attack's `δ̂` forces a gap between the
/// `2^{k+1}`-dimensional states `ω_I`, which Pauli tomography turns into an LOCC
/// distinguisher of the hiding states, so `ε ≥ δ̂ / 2^{3k+5}`.
pub fn verify_multiparty_chain(
    cs: &BitHidingScheme,
    attack: &LoccProtocol,
    settings: &ChainSettings,
) -> Result<ChainReport> {
    let qs = qubits_from_bits(cs)?;
    let k = qs.n();
    if k > MAX_CHAIN_QUBITS {
        return Err(Error::Domain(format!("chain evaluated for k <= {MAX_CHAIN_QUBITS}, got {k}")));
    }
    let map = AttackMap::new(attack, qs.output_layout())?;
    if map.output_layout().dim() != 2 {
        return Err(Error::Domain(format!(
            "attack outputs dimension {}, the reduction needs one qubit",
            map.output_layout().dim()
        )));
    }

    let tests = pure_test_set(qs.input_layout(), settings.seed)?;
    let outputs = tests
        .par_iter()
        .map(|psi| map.apply_operator(qs.encode(&psi.projector())?.as_op()))
        .collect::<Result<Vec<_>>>()?;
    let delta_hat = max_pairwise_distance(&outputs)?;

    let omegas = jamiolkowski_family(&map, cs)?;
    let d = omegas[0].dim();
    let expected_d = 1usize << (k + 1);
    let gaps = omegas
        .par_iter()
        .skip(1)
        .map(|w| {
            let gap = crate::security::dist_global(&omegas[0], w)?;
            let tomo = dist_tomography_lower(&omegas[0], w)?;
            Ok((gap, tomo))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_gap = gaps.iter().map(|(g, _)| *g).fold(0.0, f64::max);
    let tomography = gaps.iter().map(|(_, t)| t.lower).fold(0.0, f64::max);
    let (worst_gap, worst_sum) = gaps
        .iter()
        .map(|(g, t)| (*g, t.coefficient_sum))
        .max_by(|a, b| (a.0 - a.1).total_cmp(&(b.0 - b.1)))
        .unwrap_or((0.0, 0.0));

    let eps = certify_scheme(cs)?;
    let d2 = (d * d) as f64;
    let witness_scale = (1u64 << (k + 1)) as f64;
    let final_scale = (1u64 << (3 * k + 5)) as f64;
    let tol = settings.identity_tolerance;
    let slack = settings.bound_slack;
    let checks = vec![
        ChainCheck::le("omega-dimension", (d as f64 - expected_d as f64).abs(), 0.0, 0.0),
        ChainCheck::le("coefficient-sum", worst_gap, worst_sum, tol),
        ChainCheck::le("witness", delta_hat / witness_scale, max_gap, tol),
        ChainCheck::le("tomography-vs-epsilon", tomography, eps.value, slack),
        ChainCheck::le("omega-vs-epsilon", max_gap / (2.0 * d2), eps.value, slack),
        ChainCheck::le("delta-vs-epsilon", delta_hat / final_scale, eps.value, slack),
    ];
    let mut values = BTreeMap::new();
    values.insert("k".into(), k as f64);
    values.insert("d".into(), d as f64);
    values.insert("delta_hat".into(), delta_hat);
    values.insert("delta_over_2^(3k+5)".into(), delta_hat / final_scale);
    values.insert("epsilon_hat".into(), eps.value);
    values.insert("epsilon_is_oracle".into(), (eps.kind == CertificateKind::OraclePerfect) as u8 as f64);
    values.insert("max_omega_gap".into(), max_gap);
    values.insert("omega_gap_over_2d^2".into(), max_gap / (2.0 * d2));
    values.insert("tomography_lower".into(), tomography);
    Ok(ChainReport {
        chain: "multiparty".into(),
        instance: format!("stand-in k={k} ({})", cs.descriptor()),
        values,
        checks,
    })
}
