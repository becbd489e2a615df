use nalgebra::DVector;

use super::dense::DenseOperator;
use super::layout::HilbertLayout;
use super::linalg;
use crate::{c, CMatrix, CVector, Error, Result, Tolerances, C64};

/// A validated density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: DenseOperator,
}

impl DensityOperator {
    pub fn new(op: DenseOperator) -> Result<Self> {
        Self::with_tolerances(op, &Tolerances::default())
    }

    pub fn with_tolerances(op: DenseOperator, tol: &Tolerances) -> Result<Self> {
        let herm = op.hermitian_deviation();
        if herm > tol.herm {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = linalg::min_eigenvalue(op.matrix());
        if min < -tol.psd {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { op })
    }

    /// Wraps an operator that is a density operator by construction.
    pub(crate) fn from_op_unchecked(op: DenseOperator) -> Self {
        Self { op }
    }

    pub fn from_matrix(layout: HilbertLayout, mat: CMatrix) -> Result<Self> {
        Self::new(DenseOperator::new(layout, mat)?)
    }

    pub fn maximally_mixed(layout: HilbertLayout) -> Self {
        let d = layout.dim() as f64;
        Self {
            op: DenseOperator::identity(layout).scaled(c(1.0 / d)),
        }
    }

    /// `|index⟩⟨index|` in the computational basis.
    pub fn basis(layout: HilbertLayout, index: usize) -> Result<Self> {
        Ok(Self {
            op: DenseOperator::matrix_unit(layout, index, index)?,
        })
    }

    /// Convex combination; weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Domain("empty mixture".into()))?;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain("mixture weights must form a distribution".into()));
        }
        let mut acc = DenseOperator::zeros(first.1.layout().clone());
        for (w, rho) in parts {
            acc.add_scaled(c(*w), rho.as_op())?;
        }
        Ok(Self { op: acc })
    }

    pub fn as_op(&self) -> &DenseOperator {
        &self.op
    }

    pub fn into_op(self) -> DenseOperator {
        self.op
    }

    pub fn layout(&self) -> &HilbertLayout {
        self.op.layout()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> DVector<f64> {
        linalg::herm_eigenvalues(self.op.matrix())
    }

    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        Ok(Self {
            op: self.op.partial_trace(keep)?,
        })
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            op: self.op.tensor(&other.op)?,
        })
    }

    pub fn permuted<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        Ok(Self {
            op: self.op.permuted(order)?,
        })
    }

    pub fn aligned_to(&self, target: &HilbertLayout) -> Result<Self> {
        Ok(Self {
            op: self.op.aligned_to(target)?,
        })
    }

    pub fn relabel(&self, f: impl FnMut(&str) -> String) -> Result<Self> {
        Ok(Self {
            op: self.op.relabel(f)?,
        })
    }

    /// `U ρ U†` with `U` on the named registers.
    pub fn conjugate_local<S: AsRef<str>>(&self, u: &CMatrix, regs: &[S]) -> Result<Self> {
        Ok(Self {
            op: self.op.conjugate_local(u, regs)?,
        })
    }

    pub fn purity(&self) -> f64 {
        linalg::real_inner(self.op.matrix(), self.op.matrix())
    }

    /// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        let other = other.aligned_to(self.layout())?;
        let sqrt_rho = linalg::herm_function(self.matrix(), |x| x.max(0.0).sqrt());
        let inner = &sqrt_rho * other.matrix() * &sqrt_rho;
        let root: f64 = linalg::herm_eigenvalues(&inner)
            .iter()
            .map(|x| x.max(0.0).sqrt())
            .sum();
        Ok(root * root)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn overlap_with(&self, psi: &PureState) -> Result<f64> {
        let psi = psi.aligned_to(self.layout())?;
        let v = psi.amplitudes();
        Ok((v.adjoint() * self.matrix() * v)[(0, 0)].re)
    }
}

/// A unit vector on a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    layout: HilbertLayout,
    amps: CVector,
}

impl PureState {
    pub fn new(layout: HilbertLayout, amps: CVector) -> Result<Self> {
        Self::with_tolerance(layout, amps, Tolerances::default().norm)
    }

    pub fn with_tolerance(layout: HilbertLayout, amps: CVector, tol_norm: f64) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(Error::Shape(format!(
                "{} amplitudes for layout {}",
                amps.len(),
                layout
            )));
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > tol_norm {
            return Err(Error::InvalidState(format!("state norm is {norm}")));
        }
        Ok(Self { layout, amps })
    }

    /// Normalizes `amps` first; errors on the zero vector.
    pub fn normalized(layout: HilbertLayout, amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(layout, amps.unscale(norm))
    }

    pub fn basis(layout: HilbertLayout, index: usize) -> Result<Self> {
        let d = layout.dim();
        if index >= d {
            return Err(Error::Shape(format!("basis index {index} outside dimension {d}")));
        }
        let mut amps = CVector::zeros(d);
        amps[index] = c(1.0);
        Ok(Self { layout, amps })
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn projector(&self) -> DensityOperator {
        DensityOperator::from_op_unchecked(DenseOperator::from_parts(
            self.layout.clone(),
            &self.amps * self.amps.adjoint(),
        ))
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            layout: self.layout.concat(&other.layout)?,
            amps: self.amps.kronecker(&other.amps),
        })
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        let other = other.aligned_to(&self.layout)?;
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn permuted<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        let (layout, map) = self.layout.permutation_map(order)?;
        let amps = CVector::from_fn(self.amps.len(), |i, _| self.amps[map[i]]);
        Ok(Self { layout, amps })
    }

    pub fn aligned_to(&self, target: &HilbertLayout) -> Result<Self> {
        let labels: Vec<&str> = target.labels().collect();
        let out = self.permuted(&labels)?;
        if out.layout != *target {
            return Err(Error::Shape(format!("cannot align {} to {}", self.layout, target)));
        }
        Ok(out)
    }

    pub fn relabel(&self, f: impl FnMut(&str) -> String) -> Result<Self> {
        Ok(Self {
            layout: self.layout.relabel(f)?,
            amps: self.amps.clone(),
        })
    }

    /// `(u ⊗ 1)|ψ⟩` with `u` on the named registers.
    pub fn apply_local<S: AsRef<str>>(&self, u: &CMatrix, regs: &[S]) -> Result<Self> {
        let mut order: Vec<String> = regs.iter().map(|s| s.as_ref().to_string()).collect();
        for l in self.layout.labels() {
            if !order.iter().any(|o| o == l) {
                order.push(l.to_string());
            }
        }
        let moved = self.permuted(&order)?;
        let dr = self.layout.dim_of(regs)?;
        if u.nrows() != dr || u.ncols() != dr {
            return Err(Error::Shape(format!(
                "local operator is {}x{}, registers have dimension {dr}",
                u.nrows(),
                u.ncols()
            )));
        }
        let moved_col = CMatrix::from_column_slice(moved.amps.len(), 1, moved.amps.as_slice());
        let out = super::dense::left_block(&moved_col, u, dr);
        let state = Self {
            layout: moved.layout,
            amps: CVector::from_column_slice(out.as_slice()),
        };
        let labels: Vec<&str> = self.layout.labels().collect();
        state.permuted(&labels)
    }
}
