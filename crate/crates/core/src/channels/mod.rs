//! Quantum channels, measurements and finite-round LOCC protocols.

mod locc;
mod povm;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use locc::{ClassicalMeasurement, ClassicalOutput, Conditioning, LoccProtocol, LoccProtocolBuilder, Party, Round};
pub use povm::{Instrument, Povm};

use crate::operators::linalg::{self, herm_eigen, max_abs_diff};
use crate::operators::{DenseOperator, DensityOperator, HilbertLayout, OperatorJson};
use crate::{c, CMatrix, Error, Result, Tolerances, C64};

/// Linear maps between labelled operator spaces.
pub trait LinearMap: Sync {
    fn input_layout(&self) -> &HilbertLayout;
    fn output_layout(&self) -> &HilbertLayout;
    /// Apply to an operator whose registers match the input layout up to order.
    fn apply_operator(&self, x: &DenseOperator) -> Result<DenseOperator>;

    fn apply_state(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        Ok(DensityOperator::from_op_unchecked(
            self.apply_operator(rho.as_op())?,
        ))
    }
}

/// Trace-preserving completely positive map stored by Kraus operators (`out × in`).
///
/// The Choi matrix `Σ C(|a⟩⟨b|) ⊗ |a⟩⟨b|` (trace `d_in`) is computed on demand and cached.
#[derive(Debug, Clone)]
pub struct QChannel {
    input: HilbertLayout,
    output: HilbertLayout,
    kraus: Vec<CMatrix>,
    choi: OnceLock<CMatrix>,
}

/// Serialized channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub kraus: Vec<OperatorJson>,
    pub in_dims: Vec<usize>,
    pub out_dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_labels: Option<Vec<String>>,
}

/// Label of the reference copy of an input register in Choi and Jamiołkowski layouts.
pub fn reference_label(label: &str) -> String {
    format!("{label}'")
}

impl QChannel {
    pub fn from_kraus(input: HilbertLayout, output: HilbertLayout, kraus: Vec<CMatrix>) -> Result<Self> {
        let ch = Self::from_kraus_unchecked(input, output, kraus)?;
        let dev = ch.completeness_deviation();
        if dev > Tolerances::default().trace {
            return Err(Error::Validity(format!(
                "Kraus operators are not trace preserving (deviation {dev:e})"
            )));
        }
        Ok(ch)
    }

    /// Shape checks only; callers guarantee completeness.
    pub(crate) fn from_kraus_unchecked(
        input: HilbertLayout,
        output: HilbertLayout,
        kraus: Vec<CMatrix>,
    ) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::Validity("a channel needs at least one Kraus operator".into()));
        }
        for k in &kraus {
            if k.nrows() != output.dim() || k.ncols() != input.dim() {
                return Err(Error::Shape(format!(
                    "Kraus operator is {}x{}, expected {}x{}",
                    k.nrows(),
                    k.ncols(),
                    output.dim(),
                    input.dim()
                )));
            }
        }
        Ok(Self {
            input,
            output,
            kraus,
            choi: OnceLock::new(),
        })
    }

    /// Channel from a Choi matrix on `output ⊗ input'` with trace `d_in`.
    pub fn from_choi(input: HilbertLayout, output: HilbertLayout, choi: &CMatrix) -> Result<Self> {
        let (din, dout) = (input.dim(), output.dim());
        if choi.nrows() != din * dout || choi.ncols() != din * dout {
            return Err(Error::Shape(format!(
                "Choi matrix is {}x{}, expected side {}",
                choi.nrows(),
                choi.ncols(),
                din * dout
            )));
        }
        let tol = Tolerances::default();
        let herm = linalg::hermitian_deviation(choi);
        if herm > tol.herm {
            return Err(Error::Validity(format!("Choi matrix not Hermitian ({herm:e})")));
        }
        let (vals, vecs) = herm_eigen(choi);
        let top = vals.iter().copied().fold(0.0f64, f64::max);
        if vals.iter().any(|&v| v < -tol.psd * top.max(1.0)) {
            return Err(Error::Validity("Choi matrix is not positive semidefinite".into()));
        }
        let cutoff = 1e-12 * top.max(1.0);
        let mut kraus = Vec::new();
        for (idx, &lambda) in vals.iter().enumerate().rev() {
            if lambda <= cutoff {
                continue;
            }
            let s = lambda.sqrt();
            let v = vecs.column(idx);
            kraus.push(CMatrix::from_fn(dout, din, |o, i| v[o * din + i] * s));
        }
        if kraus.is_empty() {
            return Err(Error::Validity("Choi matrix is zero".into()));
        }
        Self::from_kraus(input, output, kraus)
    }

    /// Channel from a linear map given by its action on operators of the input layout.
    pub fn from_linear_map(
        input: HilbertLayout,
        output: HilbertLayout,
        f: impl Fn(&DenseOperator) -> Result<DenseOperator>,
    ) -> Result<Self> {
        let (din, dout) = (input.dim(), output.dim());
        let mut choi = CMatrix::zeros(din * dout, din * dout);
        for a in 0..din {
            for b in 0..din {
                let unit = DenseOperator::matrix_unit(input.clone(), a, b)?;
                let img = f(&unit)?.aligned_to(&output)?;
                let m = img.matrix();
                for o in 0..dout {
                    for p in 0..dout {
                        choi[(o * din + a, p * din + b)] = m[(o, p)];
                    }
                }
            }
        }
        Self::from_choi(input, output, &choi)
    }

    pub fn identity(layout: HilbertLayout) -> Self {
        let d = layout.dim();
        Self::from_kraus_unchecked(layout.clone(), layout, vec![CMatrix::identity(d, d)])
            .expect("identity Kraus operator")
    }

    pub fn unitary(layout: HilbertLayout, u: CMatrix) -> Result<Self> {
        Self::from_kraus(layout.clone(), layout, vec![u])
    }

    /// `ρ ↦ Tr(ρ) 1/d`.
    pub fn depolarizing(layout: HilbertLayout) -> Self {
        let d = layout.dim();
        let s = c(1.0 / (d as f64).sqrt());
        let mut kraus = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut k = CMatrix::zeros(d, d);
                k[(i, j)] = s;
                kraus.push(k);
            }
        }
        Self::from_kraus_unchecked(layout.clone(), layout, kraus).expect("depolarizing shapes")
    }

    /// `ρ ↦ Tr(ρ) σ`.
    pub fn replacement(input: HilbertLayout, state: &DensityOperator) -> Result<Self> {
        let (vals, vecs) = herm_eigen(state.matrix());
        let din = input.dim();
        let mut kraus = Vec::new();
        for (idx, &lambda) in vals.iter().enumerate() {
            if lambda <= 1e-15 {
                continue;
            }
            let v = vecs.column(idx) * c(lambda.sqrt());
            for j in 0..din {
                let mut k = CMatrix::zeros(state.dim(), din);
                k.set_column(j, &v);
                kraus.push(k);
            }
        }
        Self::from_kraus(input, state.layout().clone(), kraus)
    }

    /// `ρ ↦ Tr_{rest} ρ`, keeping the named registers in layout order.
    pub fn partial_trace<S: AsRef<str>>(input: HilbertLayout, keep: &[S]) -> Result<Self> {
        let keep = input.in_layout_order(keep)?;
        let traced: Vec<String> = input
            .labels()
            .filter(|l| !keep.iter().any(|k| k == l))
            .map(str::to_string)
            .collect();
        let mut order = traced.clone();
        order.extend(keep.iter().cloned());
        let (_, map) = input.permutation_map(&order)?;
        let out = input.select(&keep)?;
        let dk = out.dim();
        let dt = input.dim() / dk;
        let kraus = (0..dt)
            .map(|t| {
                let mut k = CMatrix::zeros(dk, input.dim());
                for a in 0..dk {
                    k[(a, map[t * dk + a])] = c(1.0);
                }
                k
            })
            .collect();
        Self::from_kraus_unchecked(input, out, kraus)
    }

    pub fn input(&self) -> &HilbertLayout {
        &self.input
    }

    pub fn output(&self) -> &HilbertLayout {
        &self.output
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Largest entry of `Σ K†K − 1`.
    pub fn completeness_deviation(&self) -> f64 {
        let d = self.input.dim();
        let mut acc = CMatrix::zeros(d, d);
        for k in &self.kraus {
            acc += k.adjoint() * k;
        }
        max_abs_diff(&acc, &CMatrix::identity(d, d))
    }

    /// Choi matrix on `output ⊗ input'`, trace `d_in`.
    pub fn choi_matrix(&self) -> &CMatrix {
        self.choi.get_or_init(|| {
            let (din, dout) = (self.input.dim(), self.output.dim());
            let mut j = CMatrix::zeros(din * dout, din * dout);
            for k in &self.kraus {
                let v = nalgebra::DVector::from_fn(din * dout, |idx, _| k[(idx / din, idx % din)]);
                j.ger(c(1.0), &v, &v.conjugate(), c(1.0));
            }
            j
        })
    }

    pub fn reference_layout(&self) -> Result<HilbertLayout> {
        self.input.relabel(reference_label)
    }

    pub fn choi(&self) -> Result<DenseOperator> {
        let layout = self.output.concat(&self.reference_layout()?)?;
        DenseOperator::new(layout, self.choi_matrix().clone())
    }

    /// Smallest eigenvalue of the Choi matrix.
    pub fn choi_min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(self.choi_matrix())
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        Ok(DensityOperator::from_op_unchecked(self.apply_operator(rho.as_op())?))
    }

    pub fn apply_operator(&self, x: &DenseOperator) -> Result<DenseOperator> {
        let x = x.aligned_to(&self.input)?;
        let dout = self.output.dim();
        let mut acc = CMatrix::zeros(dout, dout);
        for k in &self.kraus {
            let kx = k * x.matrix();
            acc.gemm(c(1.0), &kx, &k.adjoint(), c(1.0));
        }
        DenseOperator::new(self.output.clone(), acc)
    }

    /// Application through the Choi matrix, `Σ J[(o,i),(o',i')] x[i,i']`.
    pub fn apply_via_choi(&self, x: &DenseOperator) -> Result<DenseOperator> {
        let x = x.aligned_to(&self.input)?;
        let (din, dout) = (self.input.dim(), self.output.dim());
        let j = self.choi_matrix();
        let out = CMatrix::from_fn(dout, dout, |o, p| {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..din {
                for ip in 0..din {
                    acc += j[(o * din + i, p * din + ip)] * x.matrix()[(i, ip)];
                }
            }
            acc
        });
        DenseOperator::new(self.output.clone(), out)
    }

    /// Heisenberg picture `Σ K† y K`.
    pub fn adjoint_apply(&self, y: &DenseOperator) -> Result<DenseOperator> {
        let y = y.aligned_to(&self.output)?;
        let din = self.input.dim();
        let mut acc = CMatrix::zeros(din, din);
        for k in &self.kraus {
            acc += k.adjoint() * y.matrix() * k;
        }
        DenseOperator::new(self.input.clone(), acc)
    }

    /// `then ∘ self`.
    pub fn compose(&self, then: &QChannel) -> Result<QChannel> {
        if then.input.dim() != self.output.dim() {
            return Err(Error::Shape(format!(
                "cannot feed {} into {}",
                self.output, then.input
            )));
        }
        let perm = permutation_between(&self.output, &then.input)?;
        let mut kraus = Vec::with_capacity(self.kraus.len() * then.kraus.len());
        for b in &then.kraus {
            let b = &perm.apply_columns(b);
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        let ch = Self::from_kraus_unchecked(self.input.clone(), then.output.clone(), kraus)?;
        ch.compressed_if_large()
    }

    /// `self ⊗ other` on concatenated layouts.
    pub fn tensor(&self, other: &QChannel) -> Result<QChannel> {
        let input = self.input.concat(&other.input)?;
        let output = self.output.concat(&other.output)?;
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.kronecker(b));
            }
        }
        Self::from_kraus_unchecked(input, output, kraus)?.compressed_if_large()
    }

    /// Minimal Kraus form from the Choi eigen-decomposition.
    pub fn compressed(&self) -> Result<QChannel> {
        let ch = Self::from_choi(self.input.clone(), self.output.clone(), self.choi_matrix())?;
        Ok(ch)
    }

    fn compressed_if_large(self) -> Result<QChannel> {
        let bound = self.input.dim() * self.output.dim();
        if self.kraus.len() > bound && bound <= 1024 {
            self.compressed()
        } else {
            Ok(self)
        }
    }

    /// Same channel with relabelled registers.
    pub fn relabel(
        &self,
        f_in: impl FnMut(&str) -> String,
        f_out: impl FnMut(&str) -> String,
    ) -> Result<QChannel> {
        Self::from_kraus_unchecked(
            self.input.relabel(f_in)?,
            self.output.relabel(f_out)?,
            self.kraus.clone(),
        )
    }

    pub fn to_json(&self) -> ChannelJson {
        let kraus = self
            .kraus
            .iter()
            .map(|k| OperatorJson {
                labels: None,
                dims: vec![k.nrows(), k.ncols()],
                re: (0..k.nrows()).map(|i| (0..k.ncols()).map(|j| k[(i, j)].re).collect()).collect(),
                im: (0..k.nrows()).map(|i| (0..k.ncols()).map(|j| k[(i, j)].im).collect()).collect(),
            })
            .collect();
        ChannelJson {
            kraus,
            in_dims: self.input.dims(),
            out_dims: self.output.dims(),
            in_labels: Some(self.input.labels().map(str::to_string).collect()),
            out_labels: Some(self.output.labels().map(str::to_string).collect()),
        }
    }

    pub fn from_json(json: &ChannelJson) -> Result<Self> {
        let layout = |labels: &Option<Vec<String>>, dims: &[usize], prefix: &str| {
            let labels: Vec<String> = match labels {
                Some(l) => l.clone(),
                None => (0..dims.len()).map(|i| format!("{prefix}{i}")).collect(),
            };
            if labels.len() != dims.len() {
                return Err(Error::Shape("labels and dims differ in length".into()));
            }
            HilbertLayout::new(labels.into_iter().zip(dims.iter().copied()))
        };
        let input = layout(&json.in_labels, &json.in_dims, "in")?;
        let output = layout(&json.out_labels, &json.out_dims, "out")?;
        let kraus = json
            .kraus
            .iter()
            .map(|k| {
                let (r, cc) = match k.dims.as_slice() {
                    [r, cc] => (*r, *cc),
                    _ => return Err(Error::Shape("Kraus dims must be [rows, cols]".into())),
                };
                if k.re.len() != r || k.im.len() != r || k.re.iter().chain(&k.im).any(|row| row.len() != cc) {
                    return Err(Error::Shape("Kraus entries do not match dims".into()));
                }
                Ok(CMatrix::from_fn(r, cc, |i, j| C64::new(k.re[i][j], k.im[i][j])))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_kraus(input, output, kraus)
    }
}

impl LinearMap for QChannel {
    fn input_layout(&self) -> &HilbertLayout {
        &self.input
    }

    fn output_layout(&self) -> &HilbertLayout {
        &self.output
    }

    fn apply_operator(&self, x: &DenseOperator) -> Result<DenseOperator> {
        QChannel::apply_operator(self, x)
    }
}

/// Index relabelling between two layouts holding the same registers in different orders.
struct BasisPermutation {
    /// `to_index[i]`: index in the target layout of basis vector `i` of the source layout.
    to_index: Option<Vec<usize>>,
}

impl BasisPermutation {
    /// Re-express columns indexed by the target layout in source-layout order.
    fn apply_columns(&self, m: &CMatrix) -> CMatrix {
        match &self.to_index {
            None => m.clone(),
            Some(map) => CMatrix::from_fn(m.nrows(), m.ncols(), |r, col| m[(r, map[col])]),
        }
    }
}

fn permutation_between(source: &HilbertLayout, target: &HilbertLayout) -> Result<BasisPermutation> {
    if source == target {
        return Ok(BasisPermutation { to_index: None });
    }
    let order: Vec<&str> = source.labels().collect();
    let (reordered, map) = target.permutation_map(&order)?;
    if reordered != *source {
        return Err(Error::Shape(format!("layouts {source} and {target} hold different registers")));
    }
    Ok(BasisPermutation { to_index: Some(map) })
}

/// `(C ⊗ id)(Φ)` on `output ⊗ input'`, unit trace.
pub fn jamiolkowski_state(ch: &QChannel) -> Result<DensityOperator> {
    let d = ch.input().dim() as f64;
    Ok(DensityOperator::from_op_unchecked(ch.choi()?.scaled(c(1.0 / d))))
}

/// `τ ↦ L(ρ ⊗ τ)`, with `τ` on the input registers of `L` not covered by `ancilla`.
///
/// The result is TCP whenever `L` is, but need not be LOCC even when `L` is.
pub fn conditioned_channel<L: LinearMap + ?Sized>(l: &L, ancilla: &DensityOperator) -> Result<QChannel> {
    let input = l.input_layout();
    for label in ancilla.layout().labels() {
        if !input.contains(label) {
            return Err(Error::Label(format!(
                "ancilla register `{label}` is not an input of the map"
            )));
        }
    }
    let ancilla_labels: Vec<&str> = ancilla.layout().labels().collect();
    let tau_layout = input.without(&ancilla_labels)?;
    QChannel::from_linear_map(tau_layout, l.output_layout().clone(), |tau| {
        let joint = ancilla.as_op().tensor(tau)?;
        l.apply_operator(&joint)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit() -> HilbertLayout {
        HilbertLayout::single("q", 2).unwrap()
    }

    #[test]
    fn identity_jamiolkowski_is_bell_projector() {
        let j = jamiolkowski_state(&QChannel::identity(qubit())).unwrap();
        let phi = crate::operators::max_entangled(2).unwrap().projector();
        assert!(max_abs_diff(j.matrix(), phi.matrix()) < 1e-15);
    }

    #[test]
    fn depolarizing_jamiolkowski_is_maximally_mixed() {
        let j = jamiolkowski_state(&QChannel::depolarizing(qubit())).unwrap();
        assert!(max_abs_diff(j.matrix(), &(CMatrix::identity(4, 4) * c(0.25))) < 1e-15);
    }

    #[test]
    fn rejects_non_trace_preserving_kraus() {
        let k = CMatrix::identity(2, 2) * c(0.5);
        assert!(matches!(
            QChannel::from_kraus(qubit(), qubit(), vec![k]),
            Err(Error::Validity(_))
        ));
    }

    #[test]
    fn partial_trace_channel_matches_operator_trace() {
        let l = HilbertLayout::new([("a", 2), ("b", 3)]).unwrap();
        let x = DenseOperator::new(
            l.clone(),
            CMatrix::from_fn(6, 6, |i, j| C64::new((i * 7 + j) as f64, i as f64 - j as f64)),
        )
        .unwrap();
        let ch = QChannel::partial_trace(l, &["b"]).unwrap();
        let direct = x.partial_trace(&["b"]).unwrap();
        assert!(direct.max_abs_diff(&ch.apply_operator(&x).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn conditioned_channel_rejects_unknown_ancilla() {
        let l = HilbertLayout::new([("a", 2), ("b", 2)]).unwrap();
        let ch = QChannel::identity(l);
        let anc = DensityOperator::maximally_mixed(HilbertLayout::single("z", 2).unwrap());
        assert!(matches!(conditioned_channel(&ch, &anc), Err(Error::Label(_))));
    }
}
