//! Distinguishability estimators and the bound-chain verifiers.
//!
//! Every estimator compares two states across a bipartite [`Cut`]. Registers outside the
//! cut are traced out first. Values live on the trace-distance scale `[0, 2]`.

mod chains;
mod ppt;
mod sdp;
mod seesaw;
mod tomography;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use chains::{
    default_c2q_attack, default_q2c_attack, verify_c2q_chain, verify_q2c_chain, ChainCheck, ChainReport, ChainSettings,
};
pub(crate) use chains::{jamiolkowski_family, max_pairwise_distance, AttackMap};
pub use ppt::{
    certify_qubit_scheme, certify_scheme, dist_ppt, dist_ppt_operator, werner_ppt_lp, PptBound, PPT_DIM_CAP,
};
pub use sdp::{SdpSettings, SolverDiagnostics};
pub use seesaw::{
    best_seesaw_attack, dist_locc_seesaw, dist_locc_seesaw_operator, random_one_way_attack, SeesawDirection,
    SeesawResult, SeesawSettings,
};
pub use tomography::{dist_tomography_lower, TomographyBound};

use crate::bit_hiding::{BitHidingScheme, Holder, ALICE, BOB};
use crate::channels::Party;
use crate::dual_hiding::QubitHidingScheme;
use crate::operators::{DenseOperator, DensityOperator, HilbertLayout};
use crate::{Error, Result};

/// Which estimator produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    GlobalHelstrom,
    PptSdp,
    LoccSeesaw,
    PauliTomography,
}

/// How a value relates to the LOCC distinguishability it estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundDirection {
    Upper,
    Lower,
    ExactGlobal,
}

impl EstimatorKind {
    pub fn direction(self) -> BoundDirection {
        match self {
            EstimatorKind::GlobalHelstrom => BoundDirection::ExactGlobal,
            EstimatorKind::PptSdp => BoundDirection::Upper,
            EstimatorKind::LoccSeesaw | EstimatorKind::PauliTomography => BoundDirection::Lower,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityReport {
    pub instance: String,
    pub estimator: EstimatorKind,
    pub direction: BoundDirection,
    pub value: f64,
    pub diagnostics: BTreeMap<String, serde_json::Value>,
}

/// Bipartition of registers into Alice's and Bob's.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub alice: Vec<String>,
    pub bob: Vec<String>,
}

impl Cut {
    pub fn new<S: AsRef<str>>(alice: &[S], bob: &[S]) -> Result<Self> {
        let alice: Vec<String> = alice.iter().map(|s| s.as_ref().to_string()).collect();
        let bob: Vec<String> = bob.iter().map(|s| s.as_ref().to_string()).collect();
        if let Some(r) = alice.iter().find(|r| bob.contains(r)) {
            return Err(Error::Label(format!("register `{r}` on both sides of the cut")));
        }
        Ok(Self { alice, bob })
    }

    /// Registers grouped by holder, for the two named parties.
    pub fn from_holders(holders: &BTreeMap<String, Holder>, alice: &str, bob: &str) -> Self {
        let side = |name: &str| {
            holders
                .iter()
                .filter(|(_, h)| matches!(h, Holder::Party(p) if p == name))
                .map(|(l, _)| l.clone())
                .collect()
        };
        Self {
            alice: side(alice),
            bob: side(bob),
        }
    }

    pub fn of_scheme(cs: &BitHidingScheme) -> Self {
        Self {
            alice: cs.party_registers(ALICE),
            bob: cs.party_registers(BOB),
        }
    }

    pub fn of_qubit_scheme(qs: &QubitHidingScheme) -> Self {
        Self {
            alice: qs.party_registers(ALICE),
            bob: qs.party_registers(BOB),
        }
    }

    /// The same cut with `extra` registers given to Bob.
    pub fn with_bob(mut self, extra: &[&str]) -> Self {
        self.bob.extend(extra.iter().map(|s| s.to_string()));
        self
    }

    pub fn parties(&self) -> Vec<Party> {
        vec![
            Party {
                name: ALICE.into(),
                registers: self.alice.clone(),
            },
            Party {
                name: BOB.into(),
                registers: self.bob.clone(),
            },
        ]
    }

    /// Each side's registers in `layout` order; errors on unknown registers.
    pub fn ordered_in(&self, layout: &HilbertLayout) -> Result<(Vec<String>, Vec<String>)> {
        Ok((layout.in_layout_order(&self.alice)?, layout.in_layout_order(&self.bob)?))
    }

    /// `x` reduced to the cut and reordered as `first ⊗ second`, with their dimensions.
    pub(crate) fn restrict(
        &self,
        x: &DenseOperator,
        first: &[String],
        second: &[String],
    ) -> Result<(DenseOperator, usize, usize)> {
        let mut order: Vec<String> = first.to_vec();
        order.extend(second.iter().cloned());
        let reduced = x.partial_trace(&order)?.permuted(&order)?;
        let d1 = x.layout().dim_of(first)?;
        let d2 = x.layout().dim_of(second)?;
        Ok((reduced, d1, d2))
    }
}

/// `‖ρ − σ‖₁`, achieved by the Helstrom measurement.
pub fn dist_global(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    Ok(difference(rho, sigma)?.trace_norm())
}

pub(crate) fn difference(rho: &DensityOperator, sigma: &DensityOperator) -> Result<DenseOperator> {
    let sigma = sigma.aligned_to(rho.layout()).map_err(|_| {
        Error::Shape(format!(
            "states on {} and {} cannot be compared",
            rho.layout(),
            sigma.layout()
        ))
    })?;
    rho.as_op().checked_sub(sigma.as_op())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::PureState;

    #[test]
    fn global_distance_extremes() {
        let layout = HilbertLayout::single("q", 2).unwrap();
        let zero = PureState::basis(layout.clone(), 0).unwrap().projector();
        let one = PureState::basis(layout, 1).unwrap().projector();
        assert!(dist_global(&zero, &zero).unwrap().abs() < 1e-15);
        assert!((dist_global(&zero, &one).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn werner_pair_is_globally_orthogonal() {
        let cs = crate::bit_hiding::werner_pair(2).unwrap();
        let d = dist_global(&cs.state(0).unwrap(), &cs.state(1).unwrap()).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cut_rejects_overlap() {
        assert!(Cut::new(&["a", "b"], &["b"]).is_err());
    }
}
