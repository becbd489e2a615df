use crate::operators::linalg::{self, herm_function, max_abs_diff};
use crate::operators::{DensityOperator, HilbertLayout};
use crate::{c, CMatrix, Error, Result, Tolerances};

/// Finite-outcome measurement: PSD effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    layout: HilbertLayout,
    effects: Vec<CMatrix>,
}

impl Povm {
    pub fn new(layout: HilbertLayout, effects: Vec<CMatrix>) -> Result<Self> {
        let d = layout.dim();
        let tol = Tolerances::default();
        if effects.is_empty() {
            return Err(Error::Validity("a POVM needs at least one effect".into()));
        }
        let mut sum = CMatrix::zeros(d, d);
        for (i, e) in effects.iter().enumerate() {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::Shape(format!(
                    "effect {i} is {}x{}, expected {d}x{d}",
                    e.nrows(),
                    e.ncols()
                )));
            }
            if linalg::hermitian_deviation(e) > tol.herm {
                return Err(Error::Validity(format!("effect {i} is not Hermitian")));
            }
            let min = linalg::min_eigenvalue(e);
            if min < -tol.psd {
                return Err(Error::Validity(format!(
                    "effect {i} has negative eigenvalue {min:e}"
                )));
            }
            sum += e;
        }
        let dev = max_abs_diff(&sum, &CMatrix::identity(d, d));
        if dev > tol.trace {
            return Err(Error::Validity(format!(
                "effects do not sum to the identity (deviation {dev:e})"
            )));
        }
        Ok(Self { layout, effects })
    }

    /// Rank-one projective measurement onto the columns of a unitary.
    pub fn projective(layout: HilbertLayout, basis: &CMatrix) -> Result<Self> {
        let effects = basis
            .column_iter()
            .map(|v| v * v.adjoint())
            .collect();
        Self::new(layout, effects)
    }

    pub fn computational(layout: HilbertLayout) -> Self {
        let d = layout.dim();
        Self::projective(layout, &CMatrix::identity(d, d)).expect("computational basis")
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// Outcome probabilities `Tr(E_i ρ)`.
    pub fn probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        let rho = rho.aligned_to(&self.layout)?;
        Ok(self
            .effects
            .iter()
            .map(|e| linalg::real_inner(e, rho.matrix()))
            .collect())
    }
}

/// Measurement with post-measurement states: Kraus operators per outcome on one space.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    dim: usize,
    outcomes: Vec<Vec<CMatrix>>,
}

impl Instrument {
    pub fn new(dim: usize, outcomes: Vec<Vec<CMatrix>>) -> Result<Self> {
        if outcomes.is_empty() || outcomes.iter().any(Vec::is_empty) {
            return Err(Error::Validity("every outcome needs a Kraus operator".into()));
        }
        let mut sum = CMatrix::zeros(dim, dim);
        for ks in &outcomes {
            for k in ks {
                if k.nrows() != dim || k.ncols() != dim {
                    return Err(Error::Shape(format!(
                        "instrument Kraus operator is {}x{}, expected {dim}x{dim}",
                        k.nrows(),
                        k.ncols()
                    )));
                }
                sum += k.adjoint() * k;
            }
        }
        let dev = max_abs_diff(&sum, &CMatrix::identity(dim, dim));
        if dev > Tolerances::default().trace {
            return Err(Error::Validity(format!(
                "instrument is not trace preserving (deviation {dev:e})"
            )));
        }
        Ok(Self { dim, outcomes })
    }

    /// Lüders instrument `K_i = √E_i`.
    pub fn from_povm(povm: &Povm) -> Result<Self> {
        let outcomes = povm
            .effects()
            .iter()
            .map(|e| vec![herm_function(e, |x| x.max(0.0).sqrt())])
            .collect();
        Self::new(povm.layout().dim(), outcomes)
    }

    /// Single-outcome unitary step.
    pub fn unitary(u: CMatrix) -> Result<Self> {
        let d = u.nrows();
        Self::new(d, vec![vec![u]])
    }

    /// Single-outcome no-op.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            outcomes: vec![vec![CMatrix::identity(dim, dim)]],
        }
    }

    /// Measure in the computational basis, then apply `corrections[i]` on outcome `i`.
    pub fn measure_then_apply(corrections: &[CMatrix]) -> Result<Self> {
        let d = corrections.len();
        let outcomes = corrections
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let mut p = CMatrix::zeros(d, d);
                p[(i, i)] = c(1.0);
                vec![u * p]
            })
            .collect();
        Self::new(d, outcomes)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> &[Vec<CMatrix>] {
        &self.outcomes
    }

    pub fn outcome_count(&self) -> usize {
        self.outcomes.len()
    }

    /// Effect `Σ K†K` of one outcome.
    pub fn effect(&self, outcome: usize) -> CMatrix {
        let mut e = CMatrix::zeros(self.dim, self.dim);
        for k in &self.outcomes[outcome] {
            e += k.adjoint() * k;
        }
        e
    }
}
