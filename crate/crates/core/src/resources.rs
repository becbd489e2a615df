//! Keyed encryption of qubits and the entropy count behind "two key bits per qubit".
//!
//! A [`KeyedEncryption`] applies `T_I` for a uniform key `I`. Perfect secrecy means the
//! ciphertext marginal `2^{-k} Σ_I T_I(φ)` does not depend on `φ`; [`entropy_audit`]
//! evaluates the entropies of the composite message/key/ciphertext state that turn
//! secrecy plus decodability into `S(K) ≥ S(M)`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::bit_hiding::{perfect_oracle, BitHidingScheme, Holder, BOB};
use crate::channels::QChannel;
use crate::dual_hiding::{bell_vector, bits_from_qubits, generalized_encoder, QubitHidingScheme, INPUT_REGISTER};
use crate::operators::linalg::herm_eigenvalues;
use crate::operators::{shannon_entropy, DensityOperator, HilbertLayout, PureState};
use crate::pauli::PauliIndex;
use crate::random::pure_test_set;
use crate::{c, CMatrix, Error, Result};

/// Ciphertext register.
pub const CIPHER_REGISTER: &str = "B2";
/// Reference half of the message Bell pair.
pub const MESSAGE_REFERENCE: &str = "B3";

/// Slack for the exact entropy identities.
pub const ENTROPY_TOLERANCE: f64 = 1e-9;
/// Largest secrecy deviation (trace distance) still counted as perfect secrecy.
pub const SECRECY_TOLERANCE: f64 = 1e-9;

/// `φ ↦ T_I(φ)` for a uniform `k`-bit key `I`.
#[derive(Debug, Clone)]
pub struct KeyedEncryption {
    n: usize,
    key_bits: usize,
    maps: Vec<QChannel>,
    /// Inverses of unitary `T_I`, when every map is unitary.
    inverses: Option<Vec<CMatrix>>,
    descriptor: String,
}

fn message_layout(n: usize) -> Result<HilbertLayout> {
    HilbertLayout::single(INPUT_REGISTER, 1 << n)
}

fn cipher_layout(n: usize) -> Result<HilbertLayout> {
    HilbertLayout::single(CIPHER_REGISTER, 1 << n)
}

impl KeyedEncryption {
    /// Encryption by unitaries `U_I`, decrypted by `U_I†`.
    pub fn from_unitaries(descriptor: &str, n: usize, unitaries: Vec<CMatrix>) -> Result<Self> {
        let count = unitaries.len();
        if count == 0 || !count.is_power_of_two() {
            return Err(Error::Domain(format!("{count} keys do not form a whole number of bits")));
        }
        let maps = unitaries
            .iter()
            .map(|u| QChannel::from_kraus(message_layout(n)?, cipher_layout(n)?, vec![u.clone()]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            key_bits: count.trailing_zeros() as usize,
            maps,
            inverses: Some(unitaries.iter().map(|u| u.adjoint()).collect()),
            descriptor: descriptor.to_string(),
        })
    }

    /// Encryption by arbitrary channels; no decryption is attached.
    pub fn from_channels(descriptor: &str, maps: Vec<QChannel>) -> Result<Self> {
        let count = maps.len();
        if count == 0 || !count.is_power_of_two() {
            return Err(Error::Domain(format!("{count} keys do not form a whole number of bits")));
        }
        let d = maps[0].input().dim();
        if !d.is_power_of_two() || d < 2 {
            return Err(Error::Shape(format!("message dimension {d} is not 2^n")));
        }
        let n = d.trailing_zeros() as usize;
        let maps = maps
            .iter()
            .map(|m| {
                if m.input().dim() != d || m.output().dim() != d {
                    return Err(Error::Shape("every T_I must map n qubits to n qubits".into()));
                }
                QChannel::from_kraus(message_layout(n)?, cipher_layout(n)?, m.kraus().to_vec())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            key_bits: count.trailing_zeros() as usize,
            maps,
            inverses: None,
            descriptor: descriptor.to_string(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn key_bits(&self) -> usize {
        self.key_bits
    }

    pub fn maps(&self) -> &[QChannel] {
        &self.maps
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    fn check_key(&self, key: usize) -> Result<()> {
        if key >= self.maps.len() {
            return Err(Error::Domain(format!("key {key} outside [0, 2^{})", self.key_bits)));
        }
        Ok(())
    }

    fn as_message(&self, phi: &DensityOperator) -> Result<DensityOperator> {
        if phi.dim() != 1 << self.n {
            return Err(Error::Shape(format!("message of dimension {} for {} qubits", phi.dim(), self.n)));
        }
        DensityOperator::from_matrix(message_layout(self.n)?, phi.matrix().clone())
    }

    pub fn encrypt(&self, phi: &DensityOperator, key: usize) -> Result<DensityOperator> {
        self.check_key(key)?;
        self.maps[key].apply(&self.as_message(phi)?)
    }

    /// Inverse of `T_key`; only available for unitary encryptions.
    pub fn decrypt(&self, cipher: &DensityOperator, key: usize) -> Result<DensityOperator> {
        self.check_key(key)?;
        let inverses = self
            .inverses
            .as_ref()
            .ok_or_else(|| Error::Domain(format!("{} has no decryption maps", self.descriptor)))?;
        let out = &inverses[key] * cipher.matrix() * inverses[key].adjoint();
        DensityOperator::from_matrix(message_layout(self.n)?, out)
    }

    /// What an eavesdropper without the key holds: `2^{-k} Σ_I T_I(φ)`.
    pub fn cipher_marginal(&self, phi: &DensityOperator) -> Result<DensityOperator> {
        let phi = self.as_message(phi)?;
        let outs = self.maps.iter().map(|m| m.apply(&phi)).collect::<Result<Vec<_>>>()?;
        let w = 1.0 / outs.len() as f64;
        let parts: Vec<(f64, &DensityOperator)> = outs.iter().map(|o| (w, o)).collect();
        DensityOperator::mixture(&parts)
    }

    /// `E(φ) = 2^{-k} Σ_I |I,I⟩⟨I,I| ⊗ T_I(φ)`, with key copies `K` (sender) and `K'`
    /// (receiver) and the ciphertext on `B2`.
    pub fn private_channel_state(&self, phi: &DensityOperator) -> Result<DensityOperator> {
        let phi = self.as_message(phi)?;
        let keys = self.maps.len();
        let layout = HilbertLayout::new([("K", keys), ("K'", keys), (CIPHER_REGISTER, 1 << self.n)])?;
        let dc = 1usize << self.n;
        let mut out = CMatrix::zeros(layout.dim(), layout.dim());
        for (key, m) in self.maps.iter().enumerate() {
            let block = m.apply(&phi)?;
            let offset = (key * keys + key) * dc;
            let mut view = out.view_mut((offset, offset), (dc, dc));
            view += block.matrix() * c(1.0 / keys as f64);
        }
        DensityOperator::from_matrix(layout, out)
    }

    /// Largest trace distance between ciphertext marginals over a pure test set.
    pub fn secrecy_deviation(&self, seed: u64) -> Result<f64> {
        let tests = pure_test_set(&message_layout(self.n)?, seed)?;
        let marginals = tests
            .par_iter()
            .map(|psi| self.cipher_marginal(&psi.projector()))
            .collect::<Result<Vec<_>>>()?;
        let mut worst = 0.0f64;
        for m in &marginals[1..] {
            worst = worst.max(m.as_op().checked_sub(marginals[0].as_op())?.trace_norm());
        }
        Ok(worst)
    }

    /// Worst process infidelity of `decrypt ∘ encrypt` over all keys.
    pub fn decryption_infidelity(&self) -> Result<f64> {
        let inverses = self
            .inverses
            .as_ref()
            .ok_or_else(|| Error::Domain(format!("{} has no decryption maps", self.descriptor)))?;
        let d = 1usize << self.n;
        let mut worst = 0.0f64;
        for (m, inv) in self.maps.iter().zip(inverses) {
            let u = inv * &m.kraus()[0];
            let fidelity = u.trace().norm_sqr() / (d * d) as f64;
            worst = worst.max(1.0 - fidelity);
        }
        Ok(worst)
    }
}

/// The Pauli one-time pad on `n ≤ 2` qubits: `T_I = σ_I · σ_I`, `k = 2n`.
pub fn pauli_pad(n: usize) -> Result<KeyedEncryption> {
    if n == 0 || n > 2 {
        return Err(Error::Domain(format!("Pauli pad supports 1 or 2 qubits, got {n}")));
    }
    let unitaries = PauliIndex::all(n)?.map(|i| i.string().to_matrix()).collect();
    KeyedEncryption::from_unitaries(&format!("pauli-pad:n={n}"), n, unitaries)
}

/// An entropy term with the value it should take, if the argument pins one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyCheck {
    pub name: String,
    pub value: f64,
    pub expected: String,
    pub passed: bool,
}

/// Entropies of `Σ_m p_m |m⟩⟨m|^M ⊗ 2^{-k} Σ_I |I⟩⟨I|^K ⊗ (T_I ⊗ id)(Φ_m)^{B2 B3}`.
///
/// `C = B2 B3` is everything an eavesdropper without the key could hold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub scheme: String,
    pub n: usize,
    pub key_bits: usize,
    #[serde(rename = "S(M)")]
    pub s_m: f64,
    #[serde(rename = "S(K)")]
    pub s_k: f64,
    #[serde(rename = "S(M:K)")]
    pub s_m_k: f64,
    #[serde(rename = "S(M:B2B3)")]
    pub s_m_c: f64,
    #[serde(rename = "S(M:B2B3|K)")]
    pub s_m_c_given_k: f64,
    #[serde(rename = "S(M:K|B2B3)")]
    pub s_m_k_given_c: f64,
    #[serde(rename = "S(K|B2B3M)")]
    pub s_k_given_cm: f64,
    /// `S(M:B2B3) = 0` within tolerance.
    pub secure: bool,
    pub checks: Vec<EntropyCheck>,
}

impl EntropyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn entropy_of_matrix(m: &CMatrix) -> f64 {
    let probs: Vec<f64> = herm_eigenvalues(m).iter().map(|&x| x.max(0.0)).collect();
    shannon_entropy(&probs)
}

/// Bell-basis message states `Φ_m = (σ_m ⊗ 1)Φ` on `B2 B3`.
pub fn message_states(n: usize) -> Result<Vec<PureState>> {
    let layout = HilbertLayout::new([(CIPHER_REGISTER, 1usize << n), (MESSAGE_REFERENCE, 1usize << n)])?;
    PauliIndex::all(n)?
        .map(|i| PureState::new(layout.clone(), bell_vector(i)))
        .collect()
}

/// Conditional blocks `τ_{m,I} = (T_I ⊗ id)(Φ_m)`, indexed `[m][I]`.
fn conditional_blocks(enc: &KeyedEncryption) -> Result<Vec<Vec<CMatrix>>> {
    let d = 1usize << enc.n;
    let eye = CMatrix::identity(d, d);
    let extended: Vec<Vec<CMatrix>> = enc
        .maps
        .iter()
        .map(|m| m.kraus().iter().map(|k| k.kronecker(&eye)).collect())
        .collect();
    message_states(enc.n)?
        .iter()
        .map(|phi| {
            let v = phi.amplitudes();
            Ok(extended
                .iter()
                .map(|ks| {
                    ks.iter().fold(CMatrix::zeros(d * d, d * d), |acc, k| {
                        let w = k * v;
                        acc + &w * w.adjoint()
                    })
                })
                .collect())
        })
        .collect()
}

/// The composite state as a dense operator on `M K B2 B3`.
pub fn audit_state(enc: &KeyedEncryption, ensemble: &[f64]) -> Result<DensityOperator> {
    check_ensemble(enc, ensemble)?;
    let blocks = conditional_blocks(enc)?;
    let (messages, keys) = (ensemble.len(), enc.maps.len());
    let dc = 1usize << (2 * enc.n);
    let layout = HilbertLayout::new([
        ("M", messages),
        ("K", keys),
        (CIPHER_REGISTER, 1usize << enc.n),
        (MESSAGE_REFERENCE, 1usize << enc.n),
    ])?;
    let mut out = CMatrix::zeros(layout.dim(), layout.dim());
    for (m, row) in blocks.iter().enumerate() {
        for (key, tau) in row.iter().enumerate() {
            let offset = (m * keys + key) * dc;
            let mut view = out.view_mut((offset, offset), (dc, dc));
            view += tau * c(ensemble[m] / keys as f64);
        }
    }
    DensityOperator::from_matrix(layout, out)
}

fn check_ensemble(enc: &KeyedEncryption, ensemble: &[f64]) -> Result<()> {
    let expected = 1usize << (2 * enc.n);
    if ensemble.len() != expected {
        return Err(Error::Domain(format!(
            "{} message probabilities for {expected} Bell-basis messages",
            ensemble.len()
        )));
    }
    if ensemble.iter().any(|&p| p.is_nan() || p < 0.0) {
        return Err(Error::Domain("message probabilities must be non-negative".into()));
    }
    let total: f64 = ensemble.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("message probabilities sum to {total}")));
    }
    Ok(())
}

/// Entropy audit of the composite state; `M` and `K` are classical, so every entropy is
/// `H(classical) + Σ p S(block)`.
pub fn entropy_audit(enc: &KeyedEncryption, ensemble: &[f64]) -> Result<EntropyReport> {
    check_ensemble(enc, ensemble)?;
    let blocks = conditional_blocks(enc)?;
    let keys = enc.maps.len();
    let pk = 1.0 / keys as f64;
    let dc = blocks[0][0].nrows();

    let s_m = shannon_entropy(ensemble);
    let s_k = enc.key_bits as f64;
    // M and K are independent by construction: S(MK) = S(M) + S(K).
    let s_mk = s_m + s_k;

    let zero = CMatrix::zeros(dc, dc);
    let per_message: Vec<CMatrix> = blocks
        .iter()
        .map(|row| row.iter().fold(zero.clone(), |acc, t| acc + t * c(pk)))
        .collect();
    let per_key: Vec<CMatrix> = (0..keys)
        .map(|key| {
            blocks
                .iter()
                .zip(ensemble)
                .fold(zero.clone(), |acc, (row, &p)| acc + &row[key] * c(p))
        })
        .collect();
    let cipher = per_message
        .iter()
        .zip(ensemble)
        .fold(zero.clone(), |acc, (t, &p)| acc + t * c(p));

    let s_c = entropy_of_matrix(&cipher);
    let s_mc = s_m
        + per_message
            .iter()
            .zip(ensemble)
            .map(|(t, &p)| if p > 0.0 { p * entropy_of_matrix(t) } else { 0.0 })
            .sum::<f64>();
    let s_kc = s_k + per_key.iter().map(|t| pk * entropy_of_matrix(t)).sum::<f64>();
    let s_mkc = s_mk
        + blocks
            .iter()
            .zip(ensemble)
            .map(|(row, &p)| {
                if p > 0.0 {
                    row.iter().map(|t| p * pk * entropy_of_matrix(t)).sum::<f64>()
                } else {
                    0.0
                }
            })
            .sum::<f64>();

    let s_m_k = s_m + s_k - s_mk;
    let s_m_c = s_m + s_c - s_mc;
    let s_m_c_given_k = s_mk + s_kc - s_k - s_mkc;
    let s_m_k_given_c = s_mc + s_kc - s_c - s_mkc;
    let s_k_given_cm = s_mkc - s_mc;
    let secure = s_m_c.abs() <= ENTROPY_TOLERANCE;

    let tol = ENTROPY_TOLERANCE;
    let mut checks = vec![
        EntropyCheck {
            name: "S(M:K) = 0".into(),
            value: s_m_k,
            expected: "0".into(),
            passed: s_m_k.abs() <= tol,
        },
        EntropyCheck {
            name: "S(K|B2B3M) >= 0".into(),
            value: s_k_given_cm,
            expected: ">= 0".into(),
            passed: s_k_given_cm >= -tol,
        },
    ];
    if secure {
        checks.extend([
            EntropyCheck {
                name: "S(M:B2B3) = 0".into(),
                value: s_m_c,
                expected: "0".into(),
                passed: true,
            },
            EntropyCheck {
                name: "S(M:B2B3|K) = S(M)".into(),
                value: s_m_c_given_k,
                expected: format!("{s_m}"),
                passed: (s_m_c_given_k - s_m).abs() <= tol,
            },
            EntropyCheck {
                name: "S(M:K|B2B3) = S(M)".into(),
                value: s_m_k_given_c,
                expected: format!("{s_m}"),
                passed: (s_m_k_given_c - s_m).abs() <= tol,
            },
            EntropyCheck {
                name: "S(K) >= S(M)".into(),
                value: s_k - s_m,
                expected: ">= 0".into(),
                passed: s_k >= s_m - tol,
            },
        ]);
    }
    Ok(EntropyReport {
        scheme: enc.descriptor.clone(),
        n: enc.n,
        key_bits: enc.key_bits,
        s_m,
        s_k,
        s_m_k,
        s_m_c,
        s_m_c_given_k,
        s_m_k_given_c,
        s_k_given_cm,
        secure,
        checks,
    })
}

/// Uniform distribution over the `4^n` Bell-basis messages.
pub fn uniform_ensemble(n: usize) -> Vec<f64> {
    let count = 1usize << (2 * n);
    vec![1.0 / count as f64; count]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum KeyVerdict {
    /// Secrecy holds and `k ≥ 2n`.
    Pass { key_bits: usize, n: usize, secrecy_deviation: f64 },
    /// The precondition failed; the bound says nothing about this scheme.
    NotSecret { secrecy_deviation: f64 },
    /// Secrecy held with `k < 2n`; the audit shows which entropy relation breaks.
    Violated { audit: Box<EntropyReport> },
}

impl KeyVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, KeyVerdict::Pass { .. })
    }
}

/// Checks `k ≥ 2n` for an encryption that numerically achieves perfect secrecy.
pub fn key_lower_bound_check(enc: &KeyedEncryption, seed: u64) -> Result<KeyVerdict> {
    let secrecy_deviation = enc.secrecy_deviation(seed)?;
    if secrecy_deviation > SECRECY_TOLERANCE {
        return Ok(KeyVerdict::NotSecret { secrecy_deviation });
    }
    if enc.key_bits >= 2 * enc.n {
        return Ok(KeyVerdict::Pass {
            key_bits: enc.key_bits,
            n: enc.n,
            secrecy_deviation,
        });
    }
    let audit = entropy_audit(enc, &uniform_ensemble(enc.n))?;
    Ok(KeyVerdict::Violated { audit: Box::new(audit) })
}

/// The 24 single-qubit Clifford unitaries, up to phase.
pub fn single_qubit_cliffords() -> Vec<CMatrix> {
    let s = 1.0 / 2f64.sqrt();
    let h = CMatrix::from_row_slice(2, 2, &[c(s), c(s), c(s), c(-s)]);
    let phase = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), crate::C64::new(0.0, 1.0)]);
    let mut group: Vec<CMatrix> = vec![CMatrix::identity(2, 2)];
    let same_up_to_phase = |a: &CMatrix, b: &CMatrix| (a.adjoint() * b).trace().norm() > 2.0 - 1e-9;
    let mut frontier = group.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for g in &frontier {
            for gen in [&h, &phase] {
                let cand = gen * g;
                if !group.iter().any(|x| same_up_to_phase(x, &cand)) {
                    group.push(cand.clone());
                    next.push(cand);
                }
            }
        }
        frontier = next;
    }
    group
}

/// All one-bit candidate pads `{U_0, U_1}` over single-qubit Cliffords that pass the
/// secrecy test; the entropy bound says there are none.
pub fn secret_one_bit_candidates(seed: u64) -> Result<Vec<(usize, usize)>> {
    let group = single_qubit_cliffords();
    let mut survivors = Vec::new();
    for a in 0..group.len() {
        for b in a..group.len() {
            let enc = KeyedEncryption::from_unitaries("candidate", 1, vec![group[a].clone(), group[b].clone()])?;
            if enc.secrecy_deviation(seed)? <= SECRECY_TOLERANCE {
                survivors.push((a, b));
            }
        }
    }
    Ok(survivors)
}

/// The pad as a qubit hiding scheme: the key sits in a sealed register, the ciphertext
/// with the eavesdropper (Bob), and decoding reads the key then decrypts.
pub fn pad_as_qubit_scheme(enc: &KeyedEncryption) -> Result<QubitHidingScheme> {
    let inverses = enc
        .inverses
        .as_ref()
        .ok_or_else(|| Error::Domain(format!("{} has no decryption maps", enc.descriptor)))?;
    let cs = perfect_oracle(enc.key_bits)?;
    let encoder = generalized_encoder(&cs, &enc.maps)?;
    let keys = enc.maps.len();
    let dk = cs.layout().dim();
    let decoder_kraus = inverses
        .iter()
        .enumerate()
        .map(|(key, inv)| {
            let mut bra = CMatrix::zeros(1, dk);
            bra[(0, key)] = c(1.0);
            bra.kronecker(inv)
        })
        .collect();
    let decoder = QChannel::from_kraus(encoder.output().clone(), message_layout(enc.n)?, decoder_kraus)?;
    let mut holders: BTreeMap<String, Holder> = cs.holders().clone();
    holders.insert(CIPHER_REGISTER.into(), Holder::Party(BOB.into()));
    debug_assert_eq!(keys, cs.num_states());
    QubitHidingScheme::from_channels(format!("pqc({})", enc.descriptor), encoder, decoder, holders)
}

/// The `2n`-bit classical pad obtained from the qubit pad by dense coding.
pub fn pad_as_bit_scheme(enc: &KeyedEncryption) -> Result<BitHidingScheme> {
    bits_from_qubits(&pad_as_qubit_scheme(enc)?)
}

/// Largest trace distance between the eavesdropper's marginals of the dense-coded states.
pub fn eavesdropper_distance(scheme: &BitHidingScheme) -> Result<f64> {
    let visible = scheme.party_registers(BOB);
    let marginals = scheme
        .states()?
        .iter()
        .map(|s| s.partial_trace(&visible))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for i in 0..marginals.len() {
        for j in i + 1..marginals.len() {
            worst = worst.max(marginals[i].as_op().checked_sub(marginals[j].as_op())?.trace_norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{conditional_mutual_information, entropy_of, mutual_information};
    use crate::operators::linalg::max_abs_diff;

    #[test]
    fn pad_hides_zero_state() {
        let pad = pauli_pad(1).unwrap();
        let zero = DensityOperator::basis(message_layout(1).unwrap(), 0).unwrap();
        let marginal = pad.cipher_marginal(&zero).unwrap();
        assert!(max_abs_diff(marginal.matrix(), &(CMatrix::identity(2, 2) * c(0.5))) < 1e-15);
        assert!(pad.secrecy_deviation(1).unwrap() < 1e-12);
        assert!(pad.decryption_infidelity().unwrap() < 1e-12);
    }

    #[test]
    fn decrypt_inverts_every_key() {
        let pad = pauli_pad(2).unwrap();
        let mut rng = crate::random::seeded(2);
        let phi = crate::random::random_density(&mut rng, message_layout(2).unwrap(), 4);
        for key in 0..16 {
            let out = pad.decrypt(&pad.encrypt(&phi, key).unwrap(), key).unwrap();
            assert!(max_abs_diff(out.matrix(), phi.matrix()) < 1e-12);
        }
    }

    #[test]
    fn uniform_audit_of_single_qubit_pad() {
        let report = entropy_audit(&pauli_pad(1).unwrap(), &uniform_ensemble(1)).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.secure);
        assert!((report.s_m - 2.0).abs() < 1e-9 && (report.s_k - 2.0).abs() < 1e-9);
        assert!((report.s_m_c_given_k - 2.0).abs() < 1e-9);
    }

    #[test]
    fn block_entropies_match_dense_state() {
        let pad = pauli_pad(1).unwrap();
        let ensemble = [0.4, 0.3, 0.2, 0.1];
        let report = entropy_audit(&pad, &ensemble).unwrap();
        let rho = audit_state(&pad, &ensemble).unwrap();
        let c_regs = [CIPHER_REGISTER, MESSAGE_REFERENCE];
        assert!((mutual_information(&rho, &["M"], &c_regs).unwrap() - report.s_m_c).abs() < 1e-9);
        let cmi = conditional_mutual_information(&rho, &["M"], &c_regs, &["K"]).unwrap();
        assert!((cmi - report.s_m_c_given_k).abs() < 1e-9);
        assert!((entropy_of(&rho, &["K"]).unwrap() - report.s_k).abs() < 1e-9);
    }

    #[test]
    fn single_message_ensemble_is_vacuous() {
        let report = entropy_audit(&pauli_pad(1).unwrap(), &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(report.s_m.abs() < 1e-12 && report.passed());
    }

    #[test]
    fn broken_pad_leaks() {
        let x = PauliIndex::new(1, 1).unwrap().string().to_matrix();
        let broken = KeyedEncryption::from_unitaries("broken", 1, vec![CMatrix::identity(2, 2), x]).unwrap();
        let report = entropy_audit(&broken, &uniform_ensemble(1)).unwrap();
        assert!(!report.secure && report.s_m_c > 0.5);
        assert!(matches!(key_lower_bound_check(&broken, 1).unwrap(), KeyVerdict::NotSecret { .. }));
    }

    #[test]
    fn key_bound_verdicts() {
        assert!(key_lower_bound_check(&pauli_pad(1).unwrap(), 1).unwrap().passed());
        let mut over = PauliIndex::all(1).unwrap().map(|i| i.string().to_matrix()).collect::<Vec<_>>();
        over.extend(over.clone());
        let over = KeyedEncryption::from_unitaries("over-provisioned", 1, over).unwrap();
        assert_eq!(over.key_bits(), 3);
        assert!(key_lower_bound_check(&over, 1).unwrap().passed());
        assert!(entropy_audit(&over, &uniform_ensemble(1)).unwrap().s_k > 2.0);
    }

    #[test]
    fn no_one_bit_clifford_pad_is_secret() {
        assert_eq!(single_qubit_cliffords().len(), 24);
        assert!(secret_one_bit_candidates(1).unwrap().is_empty());
    }

    #[test]
    fn dense_coded_pad_is_a_classical_pad() {
        let bits = pad_as_bit_scheme(&pauli_pad(1).unwrap()).unwrap();
        assert_eq!(bits.arity(), 2);
        assert!(eavesdropper_distance(&bits).unwrap() < 1e-12);
        for i in 0..4 {
            assert!((bits.success_probability(i).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
