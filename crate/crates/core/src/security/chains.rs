//! Numerical verification of the bits→qubits and qubits→bits bound chains for a concrete
//! attack. Each step of the argument becomes a [`ChainCheck`] with its margin.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::ppt::{certify_qubit_scheme, certify_scheme};
use super::seesaw::{best_seesaw_attack, SeesawResult, SeesawSettings};
use super::Cut;
use crate::bit_hiding::{BitHidingScheme, CertificateKind};
use crate::channels::{
    conditioned_channel, jamiolkowski_state, reference_label, ClassicalMeasurement, LinearMap, LoccProtocol, QChannel,
};
use crate::dual_hiding::{bits_from_qubits, qubits_from_bits, QubitHidingScheme};
use crate::operators::linalg::max_abs_diff;
use crate::operators::{DenseOperator, DensityOperator, HilbertLayout};
use crate::pauli::{pm_decomposition_on, PauliIndex};
use crate::random::pure_test_set;
use crate::{c, CMatrix, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainSettings {
    /// Seed of the Haar part of the pure-state test set.
    pub seed: u64,
    /// Slack for exact identities.
    pub identity_tolerance: f64,
    /// Slack for inequalities involving solver output.
    pub bound_slack: f64,
}

impl Default for ChainSettings {
    fn default() -> Self {
        Self {
            seed: 42,
            identity_tolerance: 1e-10,
            bound_slack: 1e-6,
        }
    }
}

/// One inequality `lhs ≤ rhs` (identities are `deviation ≤ tolerance`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; negative beyond the slack means a violation.
    pub margin: f64,
    pub passed: bool,
}

impl ChainCheck {
    pub fn le(name: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin: rhs - lhs,
            passed: lhs.is_finite() && rhs.is_finite() && lhs <= rhs + slack,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub chain: String,
    pub instance: String,
    pub values: BTreeMap<String, f64>,
    pub checks: Vec<ChainCheck>,
}

impl ChainReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// An attack as a linear map; measurement-only protocols use their effects directly.
pub(crate) enum AttackMap {
    Measurement(ClassicalMeasurement),
    Protocol(LoccProtocol),
}

impl AttackMap {
    pub(crate) fn new(attack: &LoccProtocol, expected: &HilbertLayout) -> Result<Self> {
        let input = attack.input();
        if input.dim() != expected.dim() || expected.labels().any(|l| !input.contains(l)) {
            return Err(Error::Shape(format!(
                "attack acts on {input}, the scheme outputs {expected}"
            )));
        }
        Ok(if attack.kept().is_empty() {
            Self::Measurement(attack.to_measurement()?)
        } else {
            Self::Protocol(attack.clone())
        })
    }
}

impl LinearMap for AttackMap {
    fn input_layout(&self) -> &HilbertLayout {
        match self {
            Self::Measurement(m) => m.input_layout(),
            Self::Protocol(p) => p.input(),
        }
    }

    fn output_layout(&self) -> &HilbertLayout {
        match self {
            Self::Measurement(m) => m.output_layout(),
            Self::Protocol(p) => p.output(),
        }
    }

    fn apply_operator(&self, x: &DenseOperator) -> Result<DenseOperator> {
        match self {
            Self::Measurement(m) => m.apply_operator(x),
            Self::Protocol(p) => p.apply_operator(x),
        }
    }
}

pub(crate) fn max_pairwise_distance(outputs: &[DenseOperator]) -> Result<f64> {
    let mut best = 0.0f64;
    for i in 0..outputs.len() {
        for j in i + 1..outputs.len() {
            best = best.max(outputs[i].checked_sub(&outputs[j])?.trace_norm());
        }
    }
    Ok(best)
}

/// `ω_I = (L_I ⊗ id)(Φ)` with `L_I(τ) = L(ρ_I ⊗ τ)`.
pub(crate) fn jamiolkowski_family(map: &AttackMap, cs: &BitHidingScheme) -> Result<Vec<DensityOperator>> {
    if let AttackMap::Measurement(m) = map {
        return measurement_family(m, cs);
    }
    (0..cs.num_states())
        .into_par_iter()
        .map(|i| jamiolkowski_state(&conditioned_channel(map, &cs.state(i)?)?))
        .collect()
}

/// Direct form for measurements: `ω_I = d⁻¹ Σ_g |g⟩⟨g| ⊗ X_gᵀ` with `X_g = Tr_H[(ρ_I ⊗ 1) F_g]`.
fn measurement_family(m: &ClassicalMeasurement, cs: &BitHidingScheme) -> Result<Vec<DensityOperator>> {
    let input = m.input_layout();
    let hiding: Vec<&str> = cs.layout().labels().collect();
    let tau = input.without(&hiding)?;
    let layout = m.output_layout().concat(&tau.relabel(reference_label)?)?;
    let din = tau.dim();
    let outcomes = m.effects().len();
    let effects = m
        .effects()
        .iter()
        .map(|f| DenseOperator::new(input.clone(), f.clone()))
        .collect::<Result<Vec<_>>>()?;
    (0..cs.num_states())
        .into_par_iter()
        .map(|i| {
            let rho = cs.state(i)?;
            let mut w = CMatrix::zeros(outcomes * din, outcomes * din);
            for (g, f) in effects.iter().enumerate() {
                let x = f.contract_local(rho.matrix(), &hiding)?.aligned_to(&tau)?;
                for a in 0..din {
                    for b in 0..din {
                        w[(g * din + a, g * din + b)] = x.matrix()[(b, a)] * c(1.0 / din as f64);
                    }
                }
            }
            Ok(DensityOperator::from_op_unchecked(DenseOperator::new(layout.clone(), w)?))
        })
        .collect()
}

/// Attack on the qubit scheme built from `cs`: seesaw over the encodings of the ±
/// eigenspaces of every non-identity Pauli string.
pub fn default_c2q_attack(cs: &BitHidingScheme, settings: &SeesawSettings) -> Result<SeesawResult> {
    let qs = qubits_from_bits(cs)?;
    let mut pairs = Vec::new();
    for idx in PauliIndex::all(qs.n())?.skip(1) {
        let pm = pm_decomposition_on(&idx.string(), qs.input_layout().clone())?;
        pairs.push((qs.encode(&pm.plus)?, qs.encode(&pm.minus)?));
    }
    best_seesaw_attack(&pairs, &Cut::of_qubit_scheme(&qs), settings)
}

/// Attack on the bit scheme derived from `qs`: seesaw over every pair of hidden strings.
pub fn default_q2c_attack(qs: &QubitHidingScheme, settings: &SeesawSettings) -> Result<SeesawResult> {
    let bits = bits_from_qubits(qs)?;
    let states = bits.states()?;
    let mut pairs = Vec::new();
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            pairs.push((states[i].clone(), states[j].clone()));
        }
    }
    best_seesaw_attack(&pairs, &Cut::of_scheme(&bits), settings)
}

/// Bits→qubits chain: an attack `L` on `E_q = qubits_from_bits(cs)` with measured `δ̂`
/// forces some `‖ω_I − ω_0‖₁ ≥ δ̂/2^{n+1}`, hence `δ̂ ≤ 2^{n+1} ε̂`.
pub fn verify_c2q_chain(cs: &BitHidingScheme, attack: &LoccProtocol, settings: &ChainSettings) -> Result<ChainReport> {
    let qs = qubits_from_bits(cs)?;
    let n = qs.n();
    let d = 1usize << n;
    let map = AttackMap::new(attack, qs.output_layout())?;

    let tests = pure_test_set(qs.input_layout(), settings.seed)?;
    let outputs = tests
        .par_iter()
        .map(|psi| map.apply_operator(qs.encode(&psi.projector())?.as_op()))
        .collect::<Result<Vec<_>>>()?;
    let delta_hat = max_pairwise_distance(&outputs)?;

    let omegas = jamiolkowski_family(&map, cs)?;
    let deltas: Vec<CMatrix> = omegas.iter().map(|w| w.matrix() - omegas[0].matrix()).collect();
    let norms: Vec<f64> = deltas
        .iter()
        .map(crate::operators::trace_norm_matrix)
        .collect::<Result<_>>()?;
    let sum_norm: f64 = norms.iter().sum();
    let max_norm = norms.iter().copied().fold(0.0, f64::max);

    let composite = QChannel::from_linear_map(qs.input_layout().clone(), map.output_layout().clone(), |x| {
        map.apply_operator(&qs.encoder().apply_operator(x)?)
    })?;
    let xi = jamiolkowski_state(&composite)?;
    let dout = map.output_layout().dim();
    let reduced = omegas[0].as_op().partial_trace(&map.output_layout().labels().collect::<Vec<_>>())?;
    let mut decomposed = reduced.matrix().kronecker(&(CMatrix::identity(d, d) * c(1.0 / d as f64)));
    let weight = c(1.0 / (d * d) as f64);
    for (idx, delta) in PauliIndex::all(n)?.zip(&deltas) {
        let local = CMatrix::identity(dout, dout).kronecker(&idx.string().to_matrix());
        decomposed += &local * delta * &local * weight;
    }
    let xi_dev = max_abs_diff(xi.matrix(), &decomposed);

    let eps = certify_scheme(cs)?;
    let scale = (1u64 << (n + 1)) as f64;
    let tol = settings.identity_tolerance;
    let slack = settings.bound_slack;
    let checks = vec![
        ChainCheck::le("xi-decomposition", xi_dev, tol, 0.0),
        ChainCheck::le("subadditivity", delta_hat, sum_norm / (1u64 << n) as f64 * 2.0, tol),
        ChainCheck::le("witness", delta_hat / scale, max_norm, tol),
        ChainCheck::le("jamiolkowski-vs-epsilon", max_norm, eps.value, slack),
        ChainCheck::le("delta-vs-epsilon", delta_hat, scale * eps.value, slack),
    ];
    let mut values = BTreeMap::new();
    values.insert("n".into(), n as f64);
    values.insert("delta_hat".into(), delta_hat);
    values.insert("max_jamiolkowski_gap".into(), max_norm);
    values.insert("sum_jamiolkowski_gap".into(), sum_norm);
    values.insert("epsilon_hat".into(), eps.value);
    values.insert("epsilon_is_oracle".into(), (eps.kind == CertificateKind::OraclePerfect) as u8 as f64);
    values.insert("bound".into(), scale * eps.value);
    Ok(ChainReport {
        chain: "bits-to-qubits".into(),
        instance: qs.descriptor().to_string(),
        values,
        checks,
    })
}

/// Qubits→bits chain: an attack on the dense-coding states `ρ_I` is bounded through the
/// Pauli expansion of `Φ` by `4^n δ̂_upper`.
pub fn verify_q2c_chain(qs: &QubitHidingScheme, attack: &LoccProtocol, settings: &ChainSettings) -> Result<ChainReport> {
    let n = qs.n();
    let d = 1usize << n;
    let count = d * d;
    let bits = bits_from_qubits(qs)?;
    let map = AttackMap::new(attack, bits.layout())?;
    let states = bits.states()?;
    let outputs = states
        .par_iter()
        .map(|rho| map.apply_operator(rho.as_op()))
        .collect::<Result<Vec<_>>>()?;

    let delta_cert = certify_qubit_scheme(qs)?;
    let delta_upper = delta_cert.value;
    let tol = settings.identity_tolerance;
    let slack = settings.bound_slack;
    let paulis: Vec<PauliIndex> = PauliIndex::all(n)?.collect();

    // ρ_I = 4^{-n} Σ_M χ(I,M) E_q(σ_M) ⊗ σ_M^*, with χ = ±1 from (anti)commutation.
    let chi = |i: PauliIndex, m: PauliIndex| if i.string().commutes_with(&m.string()) { 1.0 } else { -1.0 };
    let terms = paulis
        .par_iter()
        .map(|m| {
            let sigma = DenseOperator::new(qs.input_layout().clone(), m.string().to_matrix())?;
            let encoded = qs.encoder().apply_operator(&sigma)?;
            DenseOperator::new(
                bits.layout().clone(),
                encoded.matrix().kronecker(&m.string().to_matrix().conjugate()),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut expansion_dev = 0.0f64;
    for (i, rho) in paulis.iter().zip(&states) {
        let mut acc = CMatrix::zeros(rho.dim(), rho.dim());
        for (m, term) in paulis.iter().zip(&terms) {
            acc += term.matrix() * c(chi(*i, *m) / count as f64);
        }
        expansion_dev = expansion_dev.max(max_abs_diff(&acc, rho.matrix()));
    }

    let mut pm_dev = 0.0f64;
    for m in paulis.iter().skip(1) {
        let pm = pm_decomposition_on(&m.string(), qs.input_layout().clone())?;
        let half = (1u64 << (n - 1)) as f64;
        let rebuilt = (pm.plus.matrix() - pm.minus.matrix()) * c(half);
        pm_dev = pm_dev.max(max_abs_diff(&rebuilt, &m.string().to_matrix()));
        for k in &paulis {
            let conj = k.string().conjugate(pm.plus.matrix())?;
            let expected = if chi(*k, *m) > 0.0 { pm.plus.matrix() } else { pm.minus.matrix() };
            pm_dev = pm_dev.max(max_abs_diff(&conj, expected));
        }
    }

    let term_norms = terms
        .par_iter()
        .map(|t| Ok(map.apply_operator(t)?.trace_norm()))
        .collect::<Result<Vec<f64>>>()?;
    let term_cap = (count as f64) * delta_upper / 2.0;
    let max_term = term_norms.iter().skip(1).copied().fold(0.0, f64::max);

    let mut attack_value = 0.0f64;
    let mut triangle_margin = f64::INFINITY;
    let mut triangle_worst = (0.0, 0.0);
    for i in 0..count {
        for j in i + 1..count {
            let dist = outputs[i].checked_sub(&outputs[j])?.trace_norm();
            attack_value = attack_value.max(dist);
            let bound: f64 = paulis
                .iter()
                .zip(&term_norms)
                .map(|(m, t)| (chi(paulis[i], *m) - chi(paulis[j], *m)).abs() * t)
                .sum::<f64>()
                / count as f64;
            if bound - dist < triangle_margin {
                triangle_margin = bound - dist;
                triangle_worst = (dist, bound);
            }
        }
    }

    let final_bound = count as f64 * delta_upper;
    let checks = vec![
        ChainCheck::le("pauli-expansion", expansion_dev, tol, 0.0),
        ChainCheck::le("pm-decomposition", pm_dev, tol, 0.0),
        ChainCheck::le("term-bound", max_term, term_cap, slack),
        ChainCheck::le("triangle", triangle_worst.0, triangle_worst.1, tol),
        ChainCheck::le("attack-vs-delta", attack_value, final_bound, slack),
    ];
    let mut values = BTreeMap::new();
    values.insert("n".into(), n as f64);
    values.insert("attack_value".into(), attack_value);
    values.insert("delta_upper".into(), delta_upper);
    values.insert("bound".into(), final_bound);
    values.insert("max_term".into(), max_term);
    Ok(ChainReport {
        chain: "qubits-to-bits".into(),
        instance: bits.descriptor().to_string(),
        values,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bit_hiding::werner_pair;
    use crate::security::random_one_way_attack;
    use crate::security::SeesawDirection;

    #[test]
    fn measurement_family_matches_channel_construction() {
        let cs = crate::bit_hiding::tensor_schemes(&werner_pair(2).unwrap(), &werner_pair(2).unwrap()).unwrap();
        let qs = qubits_from_bits(&cs).unwrap();
        let mut rng = crate::random::seeded(4);
        let attack =
            random_one_way_attack(qs.output_layout(), &Cut::of_qubit_scheme(&qs), SeesawDirection::BobFirst, &mut rng)
                .unwrap();
        let fast = jamiolkowski_family(&AttackMap::new(&attack, qs.output_layout()).unwrap(), &cs).unwrap();
        let slow = jamiolkowski_family(&AttackMap::Protocol(attack), &cs).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert_eq!(a.layout(), b.layout());
            assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-12);
        }
    }
}
