use std::collections::BTreeMap;

use super::access::AccessStructure;
use crate::bit_hiding::{Holder, ALICE, BOB};
use crate::channels::Party;
use crate::operators::{DenseOperator, DensityOperator, HilbertLayout, PureState};
use crate::pauli::{Phase, PauliString};
use crate::{c, CMatrix, CVector, Error, Result};

/// Register holding logical qubits after decoding.
pub const LOGICAL_REGISTER: &str = "L";

/// Party name used in holder maps: parties 1 and 2 are the bipartite `A` and `B`.
pub fn party_label(party: usize) -> String {
    match party {
        1 => ALICE.to_string(),
        2 => BOB.to_string(),
        j => format!("P{j}"),
    }
}

/// A stabilizer code given by its generators and an encoding isometry.
#[derive(Debug, Clone)]
pub struct StabilizerCode {
    name: String,
    physical: usize,
    logical: usize,
    generators: Vec<PauliString>,
    /// `2^physical × 2^logical`, orthonormal columns inside the code space.
    isometry: CMatrix,
}

impl StabilizerCode {
    /// `k` qubits stored unencoded.
    pub fn identity(k: usize) -> Result<Self> {
        if k == 0 || k > 10 {
            return Err(Error::Domain(format!("{k} qubits outside 1..=10")));
        }
        let d = 1usize << k;
        Ok(Self {
            name: format!("identity:k={k}"),
            physical: k,
            logical: k,
            generators: Vec::new(),
            isometry: CMatrix::identity(d, d),
        })
    }

    /// The `[[5,1,3]]` code with cyclic generators `XZZXI`.
    pub fn five_qubit() -> Self {
        let base = [1u8, 3, 3, 1, 0];
        let generators: Vec<PauliString> = (0..4)
            .map(|shift| {
                let codes = (0..5).map(|q| base[(q + 5 - shift) % 5]).collect();
                PauliString::new(codes, Phase::PlusOne).expect("codes in range")
            })
            .collect();
        let mut code = Self {
            name: "five-qubit".into(),
            physical: 5,
            logical: 1,
            generators,
            isometry: CMatrix::zeros(32, 2),
        };
        // |0_L⟩ ∝ Π_code |00000⟩ (norm² 1/16), |1_L⟩ = X^{⊗5} |0_L⟩.
        let projector = code.syndrome_projector(0);
        let zero = projector.column(0) * c(4.0);
        let one = PauliString::new(vec![1; 5], Phase::PlusOne).expect("codes in range").to_matrix() * &zero;
        code.isometry.set_column(0, &zero);
        code.isometry.set_column(1, &one);
        code
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn physical_qubits(&self) -> usize {
        self.physical
    }

    pub fn logical_qubits(&self) -> usize {
        self.logical
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn isometry(&self) -> &CMatrix {
        &self.isometry
    }

    pub fn logical_x(&self) -> PauliString {
        let code = if self.generators.is_empty() { vec![1, 0] } else { vec![1; self.physical] };
        self.logical_operator(code)
    }

    pub fn logical_z(&self) -> PauliString {
        let code = if self.generators.is_empty() { vec![3, 0] } else { vec![3; self.physical] };
        self.logical_operator(code)
    }

    fn logical_operator(&self, mut codes: Vec<u8>) -> PauliString {
        codes.resize(self.physical, 0);
        PauliString::new(codes, Phase::PlusOne).expect("codes in range")
    }

    /// Bit `j` is set when `error` anticommutes with generator `j`.
    pub fn syndrome(&self, error: &PauliString) -> usize {
        self.generators
            .iter()
            .enumerate()
            .filter(|(_, g)| !g.commutes_with(error))
            .fold(0, |acc, (j, _)| acc | 1 << j)
    }

    /// Projector onto the joint eigenspace with eigenvalue `(−1)^{s_j}` for generator `j`.
    pub fn syndrome_projector(&self, syndrome: usize) -> CMatrix {
        let d = 1usize << self.physical;
        let id = CMatrix::identity(d, d);
        self.generators.iter().enumerate().fold(id.clone(), |acc, (j, g)| {
            let sign = if syndrome >> j & 1 == 1 { -1.0 } else { 1.0 };
            acc * (&id + g.to_matrix() * c(sign)) * c(0.5)
        })
    }

    pub fn encode_matrix(&self, logical: &CMatrix) -> CMatrix {
        &self.isometry * logical * self.isometry.adjoint()
    }

    /// `Σ_s V† P_s Π_s ρ Π_s P_s V` over a table of errors with pairwise distinct syndromes.
    fn recover(&self, rho: &CMatrix, errors: &[PauliString]) -> Result<CMatrix> {
        let mut table: BTreeMap<usize, &PauliString> = BTreeMap::new();
        for e in errors {
            if let Some(prev) = table.insert(self.syndrome(e), e) {
                if prev != e {
                    return Err(Error::Validity(format!(
                        "errors {:?} and {:?} share a syndrome in {}",
                        prev.codes(),
                        e.codes(),
                        self.name
                    )));
                }
            }
        }
        let dl = 1usize << self.logical;
        let mut out = CMatrix::zeros(dl, dl);
        for (s, e) in table {
            let kraus = self.isometry.adjoint() * e.to_matrix() * self.syndrome_projector(s);
            out += &kraus * rho * kraus.adjoint();
        }
        Ok(out)
    }

    /// Minimum-weight decoding of single-qubit errors, then `V†`.
    pub fn decode_matrix(&self, rho: &CMatrix) -> Result<CMatrix> {
        let mut table: BTreeMap<usize, PauliString> = BTreeMap::new();
        table.insert(0, PauliString::identity(self.physical));
        for q in 0..self.physical {
            for code in 1..=3u8 {
                let mut codes = vec![0; self.physical];
                codes[q] = code;
                let e = PauliString::new(codes, Phase::PlusOne)?;
                table.entry(self.syndrome(&e)).or_insert(e);
            }
        }
        let errors: Vec<PauliString> = table.into_values().collect();
        self.recover(rho, &errors)
    }

    /// Recovery when the qubits in `erased` are lost: they are replaced by maximally mixed
    /// qubits, which is a uniform Pauli error on them, and that error is corrected.
    fn recover_erasure(&self, rho: &CMatrix, erased: &[usize]) -> Result<CMatrix> {
        let count = 1usize << (2 * erased.len());
        let errors = (0..count)
            .map(|x| {
                let mut codes = vec![0u8; self.physical];
                for (j, &q) in erased.iter().enumerate() {
                    codes[q] = ((x >> (2 * j)) & 3) as u8;
                }
                PauliString::new(codes, Phase::PlusOne)
            })
            .collect::<Result<Vec<_>>>()?;
        self.recover(rho, &errors)
    }
}

/// A code whose physical qubits are distributed among `p` parties.
#[derive(Debug, Clone)]
pub struct SharedSecret {
    code: StabilizerCode,
    layout: HilbertLayout,
    /// Party (from 1) holding each physical qubit, in layout order.
    owners: Vec<usize>,
    access: AccessStructure,
}

impl SharedSecret {
    pub fn new(code: StabilizerCode, owners: Vec<usize>, access: AccessStructure) -> Result<Self> {
        if owners.len() != code.physical {
            return Err(Error::Domain(format!(
                "{} owners for {} physical qubits",
                owners.len(),
                code.physical
            )));
        }
        if let Some(bad) = owners.iter().find(|&&j| j == 0 || j > access.party_count()) {
            return Err(Error::Domain(format!("owner {bad} outside 1..={}", access.party_count())));
        }
        let layout = HilbertLayout::new((1..=code.physical).map(|q| (format!("S{q}"), 2)))?;
        Ok(Self {
            code,
            layout,
            owners,
            access,
        })
    }

    /// One qubit held by party 1 of 2.
    pub fn trivial() -> Result<Self> {
        Self::new(StabilizerCode::identity(1)?, vec![1], AccessStructure::generated(2, &[vec![1]])?)
    }

    /// `k` unencoded qubits, one per party; only all parties together are authorized.
    pub fn split(k: usize) -> Result<Self> {
        let all: Vec<usize> = (1..=k).collect();
        Self::new(StabilizerCode::identity(k)?, all.clone(), AccessStructure::generated(k, &[all])?)
    }

    /// The five-qubit code, one share per party, any three parties authorized.
    pub fn five_qubit() -> Result<Self> {
        Self::new(StabilizerCode::five_qubit(), (1..=5).collect(), AccessStructure::threshold(5, 3)?)
    }

    pub fn code(&self) -> &StabilizerCode {
        &self.code
    }

    pub fn access(&self) -> &AccessStructure {
        &self.access
    }

    /// Physical qubit count `k`.
    pub fn k(&self) -> usize {
        self.code.physical
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn logical_layout(&self) -> Result<HilbertLayout> {
        HilbertLayout::single(LOGICAL_REGISTER, 1 << self.code.logical)
    }

    /// Share registers held by any of `parties`, in layout order.
    pub fn registers_of(&self, parties: &[usize]) -> Vec<String> {
        self.layout
            .labels()
            .zip(&self.owners)
            .filter(|(_, o)| parties.contains(o))
            .map(|(l, _)| l.to_string())
            .collect()
    }

    pub fn holders(&self) -> BTreeMap<String, Holder> {
        self.layout
            .labels()
            .zip(&self.owners)
            .map(|(l, &o)| (l.to_string(), Holder::Party(party_label(o))))
            .collect()
    }

    fn logical_matrix<'a>(&self, phi: &'a DensityOperator) -> Result<&'a CMatrix> {
        let dl = 1usize << self.code.logical;
        if phi.dim() != dl {
            return Err(Error::Shape(format!(
                "secret has dimension {}, the code stores {} qubit(s)",
                phi.dim(),
                self.code.logical
            )));
        }
        Ok(phi.matrix())
    }

    pub fn encode(&self, phi: &DensityOperator) -> Result<DensityOperator> {
        let enc = self.code.encode_matrix(self.logical_matrix(phi)?);
        Ok(DensityOperator::from_op_unchecked(DenseOperator::new(self.layout.clone(), enc)?))
    }

    pub fn encode_pure(&self, psi: &PureState) -> Result<PureState> {
        if psi.amplitudes().len() != self.code.isometry.ncols() {
            return Err(Error::Shape(format!(
                "secret has dimension {}, the code stores {} qubit(s)",
                psi.amplitudes().len(),
                self.code.logical
            )));
        }
        let v: CVector = &self.code.isometry * psi.amplitudes();
        PureState::new(self.layout.clone(), v)
    }

    /// Full decoding from all shares, correcting any single-qubit error.
    pub fn decode(&self, state: &DensityOperator) -> Result<DensityOperator> {
        let aligned = state.aligned_to(&self.layout)?;
        let out = self.code.decode_matrix(aligned.matrix())?;
        DensityOperator::from_matrix(self.logical_layout()?, out)
    }

    /// Recovers the secret from the shares of `parties`; other shares in `state` are ignored.
    pub fn reconstruct(&self, parties: &[usize], state: &DensityOperator) -> Result<DensityOperator> {
        if !self.access.is_authorized(parties)? {
            return Err(Error::Access(format!(
                "parties {parties:?} are not authorized for {}",
                self.code.name
            )));
        }
        let kept = self.registers_of(parties);
        let erased: Vec<usize> = self
            .owners
            .iter()
            .enumerate()
            .filter(|(_, o)| !parties.contains(o))
            .map(|(q, _)| q)
            .collect();
        let marginal = state.partial_trace(&kept)?;
        let filler_layout = self.layout.without(&kept)?;
        let filled = if filler_layout.is_empty() {
            marginal
        } else {
            marginal.tensor(&DensityOperator::maximally_mixed(filler_layout))?
        };
        let filled = filled.aligned_to(&self.layout)?;
        let out = self.code.recover_erasure(filled.matrix(), &erased)?;
        DensityOperator::from_matrix(self.logical_layout()?, out)
    }

    /// Reduced state of `parties`' shares.
    pub fn marginal(&self, parties: &[usize], state: &DensityOperator) -> Result<DensityOperator> {
        state.partial_trace(&self.registers_of(parties))
    }

    /// Parties for LOCC compilation with the coalition `merged` acting as one party.
    ///
    /// Registers of `extra` holders (for example hiding registers) are assigned by their
    /// holder labels; sealed registers stay unowned.
    pub fn merged_parties(&self, merged: &[usize], extra: &BTreeMap<String, Holder>) -> Result<Vec<Party>> {
        if self.access.is_authorized(merged)? {
            return Err(Error::Access(format!("coalition {merged:?} is authorized")));
        }
        let mut holders = self.holders();
        holders.extend(extra.iter().map(|(l, h)| (l.clone(), h.clone())));
        let merged_labels: Vec<String> = merged.iter().map(|&j| party_label(j)).collect();
        let merged_name = format!("merged{merged:?}");
        let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (reg, holder) in holders {
            if let Holder::Party(name) = holder {
                let key = if merged_labels.contains(&name) { merged_name.clone() } else { name };
                groups.entry(key).or_default().push(reg);
            }
        }
        Ok(groups
            .into_iter()
            .map(|(name, registers)| Party { name, registers })
            .collect())
    }
}

/// `V φ V†` for the five-qubit code.
pub fn five_qubit_encode(phi: &DensityOperator) -> Result<DensityOperator> {
    SharedSecret::five_qubit()?.encode(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::linalg::max_abs_diff;
    use crate::random::{pure_test_set, seeded, random_density};

    fn logical_states() -> Vec<PureState> {
        pure_test_set(&HilbertLayout::single(LOGICAL_REGISTER, 2).unwrap(), 7).unwrap()
    }

    #[test]
    fn logical_zero_is_stabilized() {
        let secret = SharedSecret::five_qubit().unwrap();
        let zero = PureState::basis(HilbertLayout::single(LOGICAL_REGISTER, 2).unwrap(), 0).unwrap();
        let enc = secret.encode(&zero.projector()).unwrap();
        for g in secret.code().generators() {
            let expectation = g.trace_with(enc.matrix());
            assert!((expectation.re - 1.0).abs() < 1e-12 && expectation.im.abs() < 1e-12);
        }
        assert!((enc.purity() - 1.0).abs() < 1e-12);
        let v = secret.code().isometry();
        assert!(max_abs_diff(&(v.adjoint() * v), &CMatrix::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn logical_operators_act_on_code_space() {
        let code = StabilizerCode::five_qubit();
        let v = code.isometry();
        let x = v.adjoint() * code.logical_x().to_matrix() * v;
        let z = v.adjoint() * code.logical_z().to_matrix() * v;
        let sx = PauliString::new(vec![1], Phase::PlusOne).unwrap().to_matrix();
        let sz = PauliString::new(vec![3], Phase::PlusOne).unwrap().to_matrix();
        assert!(max_abs_diff(&x, &sx) < 1e-12);
        assert!(max_abs_diff(&z, &sz) < 1e-12);
    }

    #[test]
    fn decode_corrects_single_qubit_errors() {
        let secret = SharedSecret::five_qubit().unwrap();
        let mut rng = seeded(3);
        let phi = random_density(&mut rng, HilbertLayout::single(LOGICAL_REGISTER, 2).unwrap(), 2);
        let enc = secret.encode(&phi).unwrap();
        assert!(max_abs_diff(secret.decode(&enc).unwrap().matrix(), phi.matrix()) < 1e-9);
        let y3 = PauliString::new(vec![0, 0, 2, 0, 0], Phase::PlusOne).unwrap();
        let hit = DensityOperator::from_matrix(secret.layout().clone(), y3.conjugate(enc.matrix()).unwrap()).unwrap();
        let out = secret.decode(&hit).unwrap();
        assert!(max_abs_diff(out.matrix(), phi.matrix()) < 1e-9);
    }

    #[test]
    fn every_three_parties_reconstruct() {
        let secret = SharedSecret::five_qubit().unwrap();
        for psi in logical_states() {
            let enc = secret.encode(&psi.projector()).unwrap();
            for set in [vec![1, 2, 3], vec![2, 4, 5], vec![1, 3, 5], vec![1, 2, 3, 4, 5]] {
                let out = secret.reconstruct(&set, &enc).unwrap();
                assert!(out.overlap_with(&psi.relabel(|_| LOGICAL_REGISTER.into()).unwrap()).unwrap() > 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn two_parties_learn_nothing() {
        let secret = SharedSecret::five_qubit().unwrap();
        let zero = secret.encode(&logical_states()[4].projector()).unwrap();
        let plus = secret.encode(&logical_states()[0].projector()).unwrap();
        let a = secret.marginal(&[1, 2], &zero).unwrap();
        let b = secret.marginal(&[1, 2], &plus).unwrap();
        assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-12);
        assert!(matches!(secret.reconstruct(&[1, 2], &zero), Err(Error::Access(_))));
    }

    #[test]
    fn merged_coalition_becomes_one_party() {
        let secret = SharedSecret::five_qubit().unwrap();
        let parties = secret.merged_parties(&[4, 5], &BTreeMap::new()).unwrap();
        assert_eq!(parties.len(), 4);
        let merged = parties.iter().find(|p| p.name.starts_with("merged")).unwrap();
        assert_eq!(merged.registers, vec!["S4".to_string(), "S5".to_string()]);
        assert!(secret.merged_parties(&[1, 2, 3], &BTreeMap::new()).is_err());
    }
}
