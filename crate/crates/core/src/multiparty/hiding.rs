use std::collections::BTreeMap;

use rayon::prelude::*;

use super::code::{party_label, SharedSecret};
use crate::bit_hiding::{BitHidingScheme, Holder};
use crate::operators::{DenseOperator, DensityOperator, PureState};
use crate::pauli::{PauliIndex, PauliString, Phase};
use crate::{c, CMatrix, CVector, Error, Result};

fn check_alignment(cs: &BitHidingScheme, secret: &SharedSecret) -> Result<()> {
    if cs.arity() != 2 * secret.k() {
        return Err(Error::Domain(format!(
            "{} hidden bits cannot key a twirl of {} qubits",
            cs.arity(),
            secret.k()
        )));
    }
    let names: Vec<String> = (1..=secret.access().party_count()).map(party_label).collect();
    for (reg, holder) in cs.holders() {
        if let Holder::Party(p) = holder {
            if !names.contains(p) {
                return Err(Error::Domain(format!(
                    "hiding register `{reg}` belongs to `{p}`, not one of the {} parties",
                    names.len()
                )));
            }
        }
        if secret.layout().contains(reg) {
            return Err(Error::Label(format!("register `{reg}` used by both layers")));
        }
    }
    Ok(())
}

/// `σ_I` with its factors outside `registers` replaced by the identity.
fn restricted_pauli(index: PauliIndex, secret: &SharedSecret, registers: &[String]) -> Result<PauliString> {
    let codes = index
        .digits()
        .into_iter()
        .zip(secret.layout().labels())
        .map(|(code, label)| if registers.iter().any(|r| r == label) { code } else { 0 })
        .collect();
    PauliString::new(codes, Phase::PlusOne)
}

/// Holders of the composite layout `hiding ⊗ shares`.
pub fn multihide_holders(cs: &BitHidingScheme, secret: &SharedSecret) -> BTreeMap<String, Holder> {
    let mut holders = cs.holders().clone();
    holders.extend(secret.holders());
    holders
}

/// `E(φ) = 4^{-k} Σ_I ρ_I ⊗ σ_I φ σ_I`, with `σ_I` on all `k` share qubits.
pub fn multihide_encode(cs: &BitHidingScheme, secret: &SharedSecret, shares: &DensityOperator) -> Result<DensityOperator> {
    check_alignment(cs, secret)?;
    let shares = shares.aligned_to(secret.layout())?;
    let layout = cs.layout().concat(secret.layout())?;
    let weight = c(1.0 / cs.num_states() as f64);
    let terms = PauliIndex::all(secret.k())?
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|idx| {
            let twisted = idx.string().conjugate(shares.matrix())?;
            Ok(cs.state(idx.value())?.matrix().kronecker(&twisted) * weight)
        })
        .collect::<Result<Vec<CMatrix>>>()?;
    let total = terms.into_iter().fold(CMatrix::zeros(layout.dim(), layout.dim()), |acc, t| acc + t);
    Ok(DensityOperator::from_op_unchecked(DenseOperator::new(layout, total)?))
}

/// Authorized reconstruction from `E(φ)`: decode `I` globally, undo `σ_I` only on the
/// coalition's own shares, then erasure-decode.
pub fn multihide_reconstruct(
    cs: &BitHidingScheme,
    secret: &SharedSecret,
    encoded: &DensityOperator,
    parties: &[usize],
) -> Result<DensityOperator> {
    check_alignment(cs, secret)?;
    if !secret.access().is_authorized(parties)? {
        return Err(Error::Access(format!("parties {parties:?} are not authorized")));
    }
    let hiding: Vec<String> = cs.layout().labels().map(str::to_string).collect();
    let own = secret.registers_of(parties);
    let branches = PauliIndex::all(secret.k())?
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|idx| {
            let branch = encoded.as_op().contract_local(&cs.decoder_effect(idx.value())?, &hiding)?;
            let branch = branch.aligned_to(secret.layout())?;
            let fix = restricted_pauli(idx, secret, &own)?;
            fix.conjugate(branch.matrix())
        })
        .collect::<Result<Vec<CMatrix>>>()?;
    let d = secret.layout().dim();
    let corrected = branches.into_iter().fold(CMatrix::zeros(d, d), |acc, b| acc + b);
    let corrected = DensityOperator::from_matrix(secret.layout().clone(), corrected)?;
    secret.reconstruct(parties, &corrected)
}

/// `E(|ψ⟩⟨ψ|)` for the perfect oracle with the classical register kept symbolic: one
/// share vector `σ_I|ψ⟩` per hidden string, each with weight `4^{-k}`.
#[derive(Debug, Clone)]
pub struct OracleMultihide {
    secret: SharedSecret,
    branches: Vec<CVector>,
}

impl OracleMultihide {
    /// Encodes the logical `psi` with the code, then twirls the shares.
    pub fn encode(secret: &SharedSecret, psi: &PureState) -> Result<Self> {
        let shares = secret.encode_pure(psi)?;
        let branches = PauliIndex::all(secret.k())?
            .map(|idx| idx.string().to_matrix() * shares.amplitudes())
            .collect();
        Ok(Self {
            secret: secret.clone(),
            branches,
        })
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    fn weight(&self) -> f64 {
        1.0 / self.branches.len() as f64
    }

    /// `Tr E(φ)`.
    pub fn trace(&self) -> f64 {
        self.branches.iter().map(|v| v.norm_squared()).sum::<f64>() * self.weight()
    }

    /// Reduced state of all shares with the oracle register traced out.
    pub fn share_marginal(&self) -> Result<DensityOperator> {
        let d = self.secret.layout().dim();
        let w = c(self.weight());
        let acc = self
            .branches
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, v| acc + v * v.adjoint() * w);
        DensityOperator::from_matrix(self.secret.layout().clone(), acc)
    }

    /// Reads `I` from the oracle, applies `σ_I` on the coalition's shares only, and erasure-decodes.
    ///
    /// Decoding is linear, so the corrected branches are mixed first and decoded once.
    pub fn reconstruct(&self, parties: &[usize]) -> Result<DensityOperator> {
        if !self.secret.access().is_authorized(parties)? {
            return Err(Error::Access(format!("parties {parties:?} are not authorized")));
        }
        let own = self.secret.registers_of(parties);
        let d = self.secret.layout().dim();
        let w = c(self.weight());
        let mut corrected = CMatrix::zeros(d, d);
        for (idx, v) in PauliIndex::all(self.secret.k())?.zip(&self.branches) {
            let fixed = restricted_pauli(idx, &self.secret, &own)?.to_matrix() * v;
            corrected += &fixed * fixed.adjoint() * w;
        }
        let state = DensityOperator::from_matrix(self.secret.layout().clone(), corrected)?;
        self.secret.reconstruct(parties, &state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::linalg::max_abs_diff;
    use crate::bit_hiding::perfect_oracle;
    use crate::random::{haar_state, random_density, seeded};

    #[test]
    fn trivial_code_round_trip_through_oracle() {
        let secret = SharedSecret::trivial().unwrap();
        let cs = perfect_oracle(2).unwrap();
        let mut rng = seeded(11);
        let phi = random_density(&mut rng, secret.layout().clone(), 2);
        let enc = multihide_encode(&cs, &secret, &phi).unwrap();
        assert!((enc.as_op().trace().re - 1.0).abs() < 1e-10);
        let out = multihide_reconstruct(&cs, &secret, &enc, &[1]).unwrap();
        assert!(max_abs_diff(out.matrix(), phi.matrix()) < 1e-9);
        assert!(multihide_reconstruct(&cs, &secret, &enc, &[2]).is_err());
    }

    #[test]
    fn split_shares_are_fully_twirled() {
        let secret = SharedSecret::split(2).unwrap();
        let cs = perfect_oracle(4).unwrap();
        let mut rng = seeded(5);
        let phi = random_density(&mut rng, secret.layout().clone(), 1);
        let enc = multihide_encode(&cs, &secret, &phi).unwrap();
        let marginal = enc.partial_trace(&["S1", "S2"]).unwrap();
        assert!(max_abs_diff(marginal.matrix(), &(CMatrix::identity(4, 4) * c(0.25))) < 1e-12);
        let out = multihide_reconstruct(&cs, &secret, &enc, &[1, 2]).unwrap();
        assert!(max_abs_diff(out.matrix(), phi.matrix()) < 1e-9);
    }

    #[test]
    fn arity_must_match_share_count() {
        let secret = SharedSecret::trivial().unwrap();
        let cs = perfect_oracle(3).unwrap();
        let phi = DensityOperator::maximally_mixed(secret.layout().clone());
        assert!(matches!(multihide_encode(&cs, &secret, &phi), Err(Error::Domain(_))));
    }

    #[test]
    fn five_qubit_oracle_reconstruction() {
        let secret = SharedSecret::five_qubit().unwrap();
        let mut rng = seeded(9);
        let psi = haar_state(&mut rng, secret.logical_layout().unwrap());
        let hidden = OracleMultihide::encode(&secret, &psi).unwrap();
        assert_eq!(hidden.branch_count(), 1024);
        assert!((hidden.trace() - 1.0).abs() < 1e-10);
        let marginal = hidden.share_marginal().unwrap();
        assert!(max_abs_diff(marginal.matrix(), &(CMatrix::identity(32, 32) * c(1.0 / 32.0))) < 1e-12);
        let out = hidden.reconstruct(&[1, 2, 3]).unwrap();
        assert!(out.overlap_with(&psi).unwrap() > 1.0 - 1e-9);
        assert!(hidden.reconstruct(&[4, 5]).is_err());
    }
}
