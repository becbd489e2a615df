//! Conversions between bit hiding and qubit hiding.
//!
//! Bits→qubits hides `φ` behind a Pauli twirl keyed by a hidden string `I`; qubits→bits
//! hides `I` in the Bell state `(σ_I ⊗ 1)|Φ⟩` fed through a qubit-hiding encoder.

use std::collections::BTreeMap;

use rand::Rng;

use crate::bit_hiding::{BitHidingScheme, Certificate, CertificateKind, Holder, BOB};
use crate::channels::QChannel;
use crate::operators::linalg::herm_eigen;
use crate::operators::{max_entangled_on, DenseOperator, DensityOperator, HilbertLayout};
use crate::pauli::PauliIndex;
use crate::{c, CMatrix, CVector, Error, Result};

/// Input register of qubit encoders.
pub const INPUT_REGISTER: &str = "Q";
/// Register carrying the twirled qubits; held by Bob.
pub const QUBIT_REGISTER: &str = "Bq";
/// Reference half of the Bell pair in the dense-coding conversion; held by Bob.
pub const REFERENCE_REGISTER: &str = "R";

/// Encoder/decoder pair hiding `n` qubits.
#[derive(Debug, Clone)]
pub struct QubitHidingScheme {
    n: usize,
    encoder: QChannel,
    decoder: QChannel,
    holders: BTreeMap<String, Holder>,
    delta: Option<Certificate>,
    descriptor: String,
    core: Option<BitHidingScheme>,
}

fn input_layout(n: usize) -> Result<HilbertLayout> {
    HilbertLayout::single(INPUT_REGISTER, 1 << n)
}

/// `(σ_I ⊗ 1)|Φ⟩` as a flat vector on `d ⊗ d`.
pub fn bell_vector(index: PauliIndex) -> CVector {
    let d = 1usize << index.n();
    let (perm, phases) = index.string().monomial();
    let amp = 1.0 / (d as f64).sqrt();
    let mut v = CVector::zeros(d * d);
    for k in 0..d {
        v[perm[k] * d + k] = phases[k] * c(amp);
    }
    v
}

/// `E_q(φ) = 4^{-n} Σ_I ρ_I ⊗ σ_I φ σ_I`, with `φ` on `2n`-bit hiding states.
pub fn qubits_from_bits(cs: &BitHidingScheme) -> Result<QubitHidingScheme> {
    if !cs.arity().is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "hiding {} bits cannot key a Pauli twirl",
            cs.arity()
        )));
    }
    let n = cs.arity() / 2;
    let d = 1usize << n;
    let weight = 1.0 / cs.num_states() as f64;
    let output = cs.layout().concat(&HilbertLayout::single(QUBIT_REGISTER, d)?)?;
    let dc = cs.layout().dim();
    let mut enc_kraus = Vec::new();
    let mut dec_kraus = Vec::new();
    for idx in PauliIndex::all(n)? {
        let sigma = idx.string().to_matrix();
        let rho = cs.state(idx.value())?;
        let (vals, vecs) = herm_eigen(rho.matrix());
        for (j, &p) in vals.iter().enumerate() {
            if p <= 1e-14 {
                continue;
            }
            let v = CMatrix::from_column_slice(dc, 1, vecs.column(j).as_slice());
            enc_kraus.push(v.kronecker(&sigma) * c((p * weight).sqrt()));
        }
        let (evals, evecs) = herm_eigen(&cs.decoder_effect(idx.value())?);
        for (j, &lambda) in evals.iter().enumerate() {
            if lambda <= 1e-14 {
                continue;
            }
            let bra = CMatrix::from_row_slice(1, dc, evecs.column(j).adjoint().as_slice());
            dec_kraus.push(bra.kronecker(&sigma) * c(lambda.sqrt()));
        }
    }
    let encoder = QChannel::from_kraus(input_layout(n)?, output.clone(), enc_kraus)?;
    let decoder = QChannel::from_kraus(output, input_layout(n)?, dec_kraus)?;
    let mut holders = cs.holders().clone();
    holders.insert(QUBIT_REGISTER.into(), Holder::Party(BOB.into()));
    let delta = cs.eps_certificate().filter(|e| e.kind == CertificateKind::OraclePerfect).cloned();
    Ok(QubitHidingScheme {
        n,
        encoder,
        decoder,
        holders,
        delta,
        descriptor: format!("pauli-twirl({})", cs.descriptor()),
        core: Some(cs.clone()),
    })
}

/// `E(φ) = 2^{-k} Σ_I ρ_I ⊗ T_I(φ)` for arbitrary channels `T_I`.
pub fn generalized_encoder(cs: &BitHidingScheme, maps: &[QChannel]) -> Result<QChannel> {
    if maps.len() != cs.num_states() {
        return Err(Error::Domain(format!(
            "{} maps for {} hidden strings",
            maps.len(),
            cs.num_states()
        )));
    }
    let (tin, tout) = (maps[0].input().clone(), maps[0].output().clone());
    if maps.iter().any(|m| m.input() != &tin || m.output() != &tout) {
        return Err(Error::Shape("maps must share input and output layouts".into()));
    }
    let output = cs.layout().concat(&tout)?;
    let weight = 1.0 / cs.num_states() as f64;
    let dc = cs.layout().dim();
    let mut kraus = Vec::new();
    for (i, t) in maps.iter().enumerate() {
        let (vals, vecs) = herm_eigen(cs.state(i)?.matrix());
        for (j, &p) in vals.iter().enumerate() {
            if p <= 1e-14 {
                continue;
            }
            let v = CMatrix::from_column_slice(dc, 1, vecs.column(j).as_slice()) * c((p * weight).sqrt());
            for k in t.kraus() {
                kraus.push(v.kronecker(k));
            }
        }
    }
    QChannel::from_kraus(tin, output, kraus)
}

/// `ρ_I = (E_q ⊗ id)((σ_I ⊗ 1)Φ(σ_I ⊗ 1))` with decoder `(D ⊗ id)` followed by a Bell measurement.
pub fn bits_from_qubits(qs: &QubitHidingScheme) -> Result<BitHidingScheme> {
    let n = qs.n;
    let d = 1usize << n;
    let reference = HilbertLayout::single(REFERENCE_REGISTER, d)?;
    let enc = &qs.encoder;
    let dec = &qs.decoder;
    let layout = enc.output().concat(&reference)?;
    let dd = layout.dim();
    let eye = CMatrix::identity(d, d);
    let enc_ext: Vec<CMatrix> = enc.kraus().iter().map(|k| k.kronecker(&eye)).collect();
    let dec_ext: Vec<CMatrix> = dec.kraus().iter().map(|k| k.kronecker(&eye)).collect();
    let mut states = Vec::with_capacity(d * d);
    let mut effects = Vec::with_capacity(d * d);
    for idx in PauliIndex::all(n)? {
        let bell = bell_vector(idx);
        let mut rho = CMatrix::zeros(dd, dd);
        for k in &enc_ext {
            let w = k * &bell;
            rho.ger(c(1.0), &w, &w.conjugate(), c(1.0));
        }
        states.push(DensityOperator::from_op_unchecked(DenseOperator::new(layout.clone(), rho)?));
        let mut eff = CMatrix::zeros(dd, dd);
        for k in &dec_ext {
            let u = k.adjoint() * &bell;
            eff.ger(c(1.0), &u, &u.conjugate(), c(1.0));
        }
        effects.push(eff);
    }
    let mut holders = qs.holders.clone();
    holders.insert(REFERENCE_REGISTER.into(), Holder::Party(BOB.into()));
    let mut scheme = BitHidingScheme::from_states(format!("dense-coding({})", qs.descriptor), holders, states, effects)?;
    if let Some(cert) = qs.delta.as_ref().filter(|c| c.kind == CertificateKind::OraclePerfect) {
        scheme = scheme.with_certificate(cert.clone());
    }
    Ok(scheme)
}

impl QubitHidingScheme {
    /// The insecure scheme `E_q = D = id`, with the qubits handed straight to Bob.
    pub fn identity(n: usize) -> Result<Self> {
        let d = 1usize << n;
        let out = HilbertLayout::single(QUBIT_REGISTER, d)?;
        let eye = CMatrix::identity(d, d);
        let mut holders = BTreeMap::new();
        holders.insert(QUBIT_REGISTER.to_string(), Holder::Party(BOB.into()));
        Ok(Self {
            n,
            encoder: QChannel::from_kraus(input_layout(n)?, out.clone(), vec![eye.clone()])?,
            decoder: QChannel::from_kraus(out, input_layout(n)?, vec![eye])?,
            holders,
            delta: Some(Certificate {
                value: 2.0,
                kind: CertificateKind::CertifiedUpper,
                method: "trace-distance ceiling".into(),
            }),
            descriptor: "identity".into(),
            core: None,
        })
    }

    /// Scheme from an arbitrary encoder/decoder pair.
    pub fn from_channels(
        descriptor: String,
        encoder: QChannel,
        decoder: QChannel,
        holders: BTreeMap<String, Holder>,
    ) -> Result<Self> {
        let d = encoder.input().dim();
        if !d.is_power_of_two() || d < 2 {
            return Err(Error::Shape(format!("encoder input dimension {d} is not 2^n")));
        }
        if encoder.input() != &input_layout(d.trailing_zeros() as usize)? || decoder.output() != encoder.input() {
            return Err(Error::Shape(format!(
                "encoder input and decoder output must both be register `{INPUT_REGISTER}`"
            )));
        }
        if decoder.input() != encoder.output() {
            return Err(Error::Shape("decoder input must match encoder output".into()));
        }
        for l in encoder.output().labels() {
            if !holders.contains_key(l) {
                return Err(Error::Label(format!("register `{l}` has no holder")));
            }
        }
        Ok(Self {
            n: d.trailing_zeros() as usize,
            encoder,
            decoder,
            holders,
            delta: None,
            descriptor,
            core: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn encoder(&self) -> &QChannel {
        &self.encoder
    }

    pub fn decoder(&self) -> &QChannel {
        &self.decoder
    }

    pub fn holders(&self) -> &BTreeMap<String, Holder> {
        &self.holders
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    /// The bit scheme this was built from, if any.
    pub fn core(&self) -> Option<&BitHidingScheme> {
        self.core.as_ref()
    }

    pub fn delta_certificate(&self) -> Option<&Certificate> {
        self.delta.as_ref()
    }

    pub fn with_delta(mut self, cert: Certificate) -> Self {
        self.delta = Some(cert);
        self
    }

    pub fn input_layout(&self) -> &HilbertLayout {
        self.encoder.input()
    }

    pub fn output_layout(&self) -> &HilbertLayout {
        self.encoder.output()
    }

    pub fn party_registers(&self, party: &str) -> Vec<String> {
        self.output_layout()
            .labels()
            .filter(|l| matches!(self.holders.get(*l), Some(Holder::Party(p)) if p == party))
            .map(str::to_string)
            .collect()
    }

    /// Reinterpret a `2^n`-dimensional state on the encoder input register.
    pub fn as_input(&self, phi: &DensityOperator) -> Result<DensityOperator> {
        if phi.layout() == self.input_layout() {
            return Ok(phi.clone());
        }
        if phi.dim() != self.input_layout().dim() {
            return Err(Error::Shape(format!(
                "input has dimension {}, scheme hides {} qubits",
                phi.dim(),
                self.n
            )));
        }
        Ok(DensityOperator::from_op_unchecked(DenseOperator::new(
            self.input_layout().clone(),
            phi.matrix().clone(),
        )?))
    }

    /// `E_q(φ)`; uses the twirl formula directly when the bit core is known.
    pub fn encode(&self, phi: &DensityOperator) -> Result<DensityOperator> {
        let phi = self.as_input(phi)?;
        match &self.core {
            Some(cs) => {
                let out = self.output_layout().clone();
                let mut acc = CMatrix::zeros(out.dim(), out.dim());
                let w = c(1.0 / cs.num_states() as f64);
                for idx in PauliIndex::all(self.n)? {
                    let twisted = idx.string().conjugate(phi.matrix())?;
                    acc += cs.state(idx.value())?.matrix().kronecker(&twisted) * w;
                }
                Ok(DensityOperator::from_op_unchecked(DenseOperator::new(out, acc)?))
            }
            None => self.encoder.apply(&phi),
        }
    }

    pub fn decode(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        self.decoder.apply(rho)
    }

    /// `⟨Φ|((D∘E_q) ⊗ id)(Φ)|Φ⟩`.
    pub fn process_fidelity(&self) -> Result<f64> {
        let d = 1usize << self.n;
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                let unit = DenseOperator::matrix_unit(self.input_layout().clone(), i, j)?;
                let out = self.decoder.apply_operator(&self.encoder.apply_operator(&unit)?)?;
                acc += out.matrix()[(i, j)].re;
            }
        }
        Ok(acc / (d * d) as f64)
    }

    /// Largest entrywise distance between the Choi matrices of `D∘E_q` and the identity.
    pub fn roundtrip_choi_distance(&self) -> Result<f64> {
        let roundtrip = QChannel::from_linear_map(self.input_layout().clone(), self.input_layout().clone(), |x| {
            self.decoder.apply_operator(&self.encoder.apply_operator(x)?)
        })?;
        let id = QChannel::identity(self.input_layout().clone());
        Ok(crate::operators::linalg::max_abs_diff(roundtrip.choi_matrix(), id.choi_matrix()))
    }
}

/// One run of the teleportation-form encoder with its Bell outcome.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub outcome: PauliIndex,
    pub probability: f64,
    /// `ρ_I ⊗ (post-measurement state on Bq)`.
    pub state: DensityOperator,
}

/// Operational encoder: teleport `φ` through `Φ^{Bq' Bq}`, keep the Bell outcome `I`
/// classically, and emit `ρ_I` next to the uncorrected qubits.
#[derive(Debug, Clone)]
pub struct CircuitSampler {
    cs: BitHidingScheme,
    n: usize,
    probabilities: Vec<f64>,
    posts: Vec<DensityOperator>,
}

/// Simulates the Bell measurement of `φ` against half of a fresh maximally entangled pair.
pub fn circuit_sampler(cs: &BitHidingScheme, phi: &DensityOperator) -> Result<CircuitSampler> {
    if !cs.arity().is_multiple_of(2) {
        return Err(Error::Domain(format!("{} hidden bits cannot key a Bell outcome", cs.arity())));
    }
    let n = cs.arity() / 2;
    let d = 1usize << n;
    if phi.dim() != d {
        return Err(Error::Shape(format!("input has dimension {}, expected {d}", phi.dim())));
    }
    let phi = DensityOperator::from_op_unchecked(DenseOperator::new(input_layout(n)?, phi.matrix().clone())?);
    let pair = max_entangled_on("Bq'", QUBIT_REGISTER, d)?.projector();
    let joint = phi.tensor(&pair)?;
    let mut probabilities = Vec::with_capacity(d * d);
    let mut posts = Vec::with_capacity(d * d);
    for idx in PauliIndex::all(n)? {
        let b = bell_vector(idx);
        let proj = &b * b.adjoint();
        let branch = joint.as_op().contract_local(&proj, &[INPUT_REGISTER, "Bq'"])?;
        let p = branch.trace().re;
        probabilities.push(p);
        posts.push(DensityOperator::from_op_unchecked(branch.scaled(c(1.0 / p))));
    }
    Ok(CircuitSampler {
        cs: cs.clone(),
        n,
        probabilities,
        posts,
    })
}

impl CircuitSampler {
    pub fn outcome_probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// The trajectory with the Bell outcome forced to `index`.
    pub fn branch(&self, index: usize) -> Result<Trajectory> {
        let outcome = PauliIndex::new(self.n, index)?;
        let state = self.cs.state(index)?.tensor(&self.posts[index])?;
        Ok(Trajectory {
            outcome,
            probability: self.probabilities[index],
            state,
        })
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Result<Trajectory> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = self.probabilities.len() - 1;
        for (i, p) in self.probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                pick = i;
                break;
            }
        }
        self.branch(pick)
    }

    /// Probability-weighted sum over every outcome.
    pub fn exact_average(&self) -> Result<DensityOperator> {
        let branches = (0..self.probabilities.len())
            .map(|i| self.branch(i))
            .collect::<Result<Vec<_>>>()?;
        let parts: Vec<(f64, &DensityOperator)> = branches.iter().map(|t| (t.probability, &t.state)).collect();
        DensityOperator::mixture(&parts)
    }

    /// Empirical average of `samples` trajectories.
    pub fn monte_carlo_average(&self, samples: usize, rng: &mut impl Rng) -> Result<DensityOperator> {
        if samples == 0 {
            return Err(Error::Domain("need at least one sample".into()));
        }
        let mut counts = vec![0usize; self.probabilities.len()];
        for _ in 0..samples {
            counts[self.sample(rng)?.outcome.value()] += 1;
        }
        let branches = (0..counts.len())
            .filter(|&i| counts[i] > 0)
            .map(|i| Ok((counts[i] as f64 / samples as f64, self.branch(i)?.state)))
            .collect::<Result<Vec<_>>>()?;
        let parts: Vec<(f64, &DensityOperator)> = branches.iter().map(|(w, s)| (*w, s)).collect();
        DensityOperator::mixture(&parts)
    }
}

/// Pauli-conjugation channels `σ_I · σ_I` from the input register to `Bq`, in index order.
pub fn pauli_conjugations(n: usize) -> Result<Vec<QChannel>> {
    let d = 1usize << n;
    PauliIndex::all(n)?
        .map(|idx| {
            QChannel::from_kraus(
                input_layout(n)?,
                HilbertLayout::single(QUBIT_REGISTER, d)?,
                vec![idx.string().to_matrix()],
            )
        })
        .collect()
}

/// Bell-basis projector `Φ_I` on `(Q, R)`.
pub fn bell_projector(index: PauliIndex) -> Result<DensityOperator> {
    let d = 1usize << index.n();
    let layout = HilbertLayout::new([(INPUT_REGISTER, d), (REFERENCE_REGISTER, d)])?;
    let v = bell_vector(index);
    Ok(DensityOperator::from_op_unchecked(DenseOperator::new(layout, &v * v.adjoint())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bit_hiding::perfect_oracle;

    #[test]
    fn odd_arity_is_rejected() {
        let cs = perfect_oracle(3).unwrap();
        assert!(matches!(qubits_from_bits(&cs), Err(Error::Domain(_))));
    }

    #[test]
    fn bell_vectors_are_orthonormal() {
        let all: Vec<CVector> = PauliIndex::all(2).unwrap().map(bell_vector).collect();
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let ip = a.dotc(b).norm();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn werner_twirl_round_trips() {
        let cs = crate::bit_hiding::SchemeSelector::werner_power(2, 2).build().unwrap();
        let qs = qubits_from_bits(&cs).unwrap();
        assert!((qs.process_fidelity().unwrap() - 1.0).abs() < 1e-10);
        assert!(qs.roundtrip_choi_distance().unwrap() < 1e-10);
    }

    #[test]
    fn direct_encode_matches_kraus_form() {
        let cs = crate::bit_hiding::SchemeSelector::werner_power(2, 2).build().unwrap();
        let qs = qubits_from_bits(&cs).unwrap();
        let mut rng = crate::random::seeded(5);
        let phi = crate::random::random_density(&mut rng, qs.input_layout().clone(), 2);
        let fast = qs.encode(&phi).unwrap();
        let slow = qs.encoder().apply(&phi).unwrap();
        assert!(fast.as_op().max_abs_diff(slow.as_op()).unwrap() < 1e-12);
        let general = generalized_encoder(&cs, &pauli_conjugations(1).unwrap()).unwrap();
        let other = general.apply(&phi).unwrap();
        assert!(fast.as_op().max_abs_diff(other.as_op()).unwrap() < 1e-12);
    }

    #[test]
    fn circuit_average_is_the_encoder() {
        let cs = crate::bit_hiding::werner_pair(2).unwrap();
        let cs = crate::bit_hiding::tensor_schemes(&cs, &cs).unwrap();
        let qs = qubits_from_bits(&cs).unwrap();
        let mut rng = crate::random::seeded(9);
        let phi = crate::random::random_density(&mut rng, qs.input_layout().clone(), 1);
        let sampler = circuit_sampler(&cs, &phi).unwrap();
        for p in sampler.outcome_probabilities() {
            assert!((p - 0.25).abs() < 1e-12);
        }
        let avg = sampler.exact_average().unwrap();
        let direct = qs.encode(&phi).unwrap();
        assert!(avg.as_op().max_abs_diff(direct.as_op()).unwrap() < 1e-12);
    }

    #[test]
    fn dense_coding_of_identity_is_perfectly_decodable() {
        let qs = QubitHidingScheme::identity(1).unwrap();
        let cs = bits_from_qubits(&qs).unwrap();
        assert_eq!(cs.arity(), 2);
        for i in 0..4 {
            assert!((cs.success_probability(i).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn generalized_encoder_checks_map_count() {
        let cs = perfect_oracle(2).unwrap();
        let maps = pauli_conjugations(1).unwrap();
        assert!(generalized_encoder(&cs, &maps[..3]).is_err());
    }
}
