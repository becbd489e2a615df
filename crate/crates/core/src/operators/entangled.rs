use super::dense::DenseOperator;
use super::layout::HilbertLayout;
use super::linalg;
use super::states::{DensityOperator, PureState};
use crate::channels::QChannel;
use crate::{c, CMatrix, CVector, Error, Result};

/// `d^{-1/2} Σ_k |k⟩|k⟩` on registers `left`, `right`.
pub fn max_entangled(dim: usize) -> Result<PureState> {
    max_entangled_on("left", "right", dim)
}

pub fn max_entangled_on(left: &str, right: &str, dim: usize) -> Result<PureState> {
    if dim == 0 {
        return Err(Error::Domain("maximally entangled state needs dim >= 1".into()));
    }
    let layout = HilbertLayout::new([(left, dim), (right, dim)])?;
    let amp = c(1.0 / (dim as f64).sqrt());
    let mut v = CVector::zeros(dim * dim);
    for k in 0..dim {
        v[k * dim + k] = amp;
    }
    PureState::new(layout, v)
}

/// `d · Tr₂((1 ⊗ φ*) Φ)` for `Φ` on two registers and `φ` matching the second.
///
/// Returns `φ` on the first register of `Φ`.
pub fn ricochet(phi: &DensityOperator, big_phi: &PureState) -> Result<DensityOperator> {
    let layout = big_phi.layout();
    if layout.len() != 2 {
        return Err(Error::Shape(format!(
            "ricochet needs a two-register entangled state, got {layout}"
        )));
    }
    let regs = layout.registers();
    let (first, second) = (&regs[0], &regs[1]);
    if phi.dim() != second.dim {
        return Err(Error::Shape(format!(
            "state has dimension {}, register `{}` has {}",
            phi.dim(),
            second.label,
            second.dim
        )));
    }
    let projector = big_phi.projector();
    let conj: CMatrix = phi.matrix().map(|z| z.conj());
    let contracted = projector
        .as_op()
        .contract_local(&conj, &[second.label.as_str()])?;
    let scaled = contracted.scaled(c(second.dim as f64));
    let out_layout = HilbertLayout::single(first.label.clone(), first.dim)?;
    DensityOperator::new(DenseOperator::new(out_layout, scaled.into_matrix())?)
}

/// Two-outcome channel projecting onto the nonnegative and negative eigenspaces of `τ₀ − τ₁`.
///
/// Outcome 0 flags the nonnegative part; the output is a qubit register `outcome`.
pub fn helstrom_channel(tau0: &DensityOperator, tau1: &DensityOperator) -> Result<QChannel> {
    let tau1 = tau1.aligned_to(tau0.layout())?;
    let diff = tau0.matrix() - tau1.matrix();
    let (vals, vecs) = linalg::herm_eigen(&diff);
    let d = tau0.dim();
    let mut kraus = Vec::with_capacity(d);
    for (i, &lambda) in vals.iter().enumerate() {
        let outcome = usize::from(lambda < 0.0);
        let mut k = CMatrix::zeros(2, d);
        let v = vecs.column(i).adjoint();
        k.row_mut(outcome).copy_from(&v);
        kraus.push(k);
    }
    QChannel::from_kraus(
        tau0.layout().clone(),
        HilbertLayout::single("outcome", 2)?,
        kraus,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    #[test]
    fn ricochet_conjugation_matters() {
        // |+i⟩ has a complex density matrix, so φ vs φ* differ.
        let layout = HilbertLayout::single("q", 2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let v = CVector::from_vec(vec![c(s), C64::new(0.0, s)]);
        let phi = PureState::new(layout, v).unwrap().projector();
        let out = ricochet(&phi, &max_entangled(2).unwrap()).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), phi.matrix()) < 1e-14);
    }

    #[test]
    fn helstrom_on_orthogonal_states_reaches_two() {
        let l = HilbertLayout::single("q", 2).unwrap();
        let t0 = DensityOperator::basis(l.clone(), 0).unwrap();
        let t1 = DensityOperator::basis(l, 1).unwrap();
        let ch = helstrom_channel(&t0, &t1).unwrap();
        let o0 = ch.apply(&t0).unwrap();
        let o1 = ch.apply(&t1).unwrap();
        let dist = o0.as_op().checked_sub(o1.as_op()).unwrap().trace_norm();
        assert!((dist - 2.0).abs() < 1e-12);
    }
}
