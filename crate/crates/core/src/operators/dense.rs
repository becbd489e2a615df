use serde::{Deserialize, Serialize};

use super::layout::HilbertLayout;
use super::linalg;
use crate::{c, CMatrix, Error, Result, C64};

/// A square complex matrix acting on a labelled layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    layout: HilbertLayout,
    mat: CMatrix,
}

/// Serialized operator: row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl DenseOperator {
    pub fn new(layout: HilbertLayout, mat: CMatrix) -> Result<Self> {
        let d = layout.dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::Shape(format!(
                "matrix is {}x{}, layout {} has dimension {d}",
                mat.nrows(),
                mat.ncols(),
                layout
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("operator has non-finite entries".into()));
        }
        Ok(Self { layout, mat })
    }

    pub(crate) fn from_parts(layout: HilbertLayout, mat: CMatrix) -> Self {
        debug_assert_eq!(mat.nrows(), layout.dim());
        Self { layout, mat }
    }

    pub fn identity(layout: HilbertLayout) -> Self {
        let d = layout.dim();
        Self::from_parts(layout, CMatrix::identity(d, d))
    }

    pub fn zeros(layout: HilbertLayout) -> Self {
        let d = layout.dim();
        Self::from_parts(layout, CMatrix::zeros(d, d))
    }

    /// `|row⟩⟨col|` on the layout.
    pub fn matrix_unit(layout: HilbertLayout, row: usize, col: usize) -> Result<Self> {
        let d = layout.dim();
        if row >= d || col >= d {
            return Err(Error::Shape(format!("matrix unit ({row},{col}) outside dimension {d}")));
        }
        let mut m = CMatrix::zeros(d, d);
        m[(row, col)] = c(1.0);
        Ok(Self::from_parts(layout, m))
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.layout.clone(), self.mat.adjoint())
    }

    pub fn hermitian_deviation(&self) -> f64 {
        linalg::hermitian_deviation(&self.mat)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self::from_parts(self.layout.clone(), &self.mat * factor)
    }

    fn check_same_layout(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::Shape(format!(
                "layout mismatch: {} vs {}",
                self.layout, other.layout
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(Self::from_parts(self.layout.clone(), &self.mat + &other.mat))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(Self::from_parts(self.layout.clone(), &self.mat - &other.mat))
    }

    /// `self += w · other` in place.
    pub fn add_scaled(&mut self, w: C64, other: &Self) -> Result<()> {
        self.check_same_layout(other)?;
        for (a, b) in self.mat.iter_mut().zip(other.mat.iter()) {
            *a += w * b;
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(Self::from_parts(self.layout.clone(), &self.mat * &other.mat))
    }

    /// `self ⊗ other`, registers concatenated.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self::from_parts(layout, self.mat.kronecker(&other.mat)))
    }

    pub fn relabel(&self, f: impl FnMut(&str) -> String) -> Result<Self> {
        Ok(Self::from_parts(self.layout.relabel(f)?, self.mat.clone()))
    }

    /// Reorder registers; `order` lists every label exactly once.
    pub fn permuted<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        let (layout, map) = self.layout.permutation_map(order)?;
        if map.iter().enumerate().all(|(i, &j)| i == j) {
            return Ok(Self::from_parts(layout, self.mat.clone()));
        }
        let d = self.dim();
        let mat = CMatrix::from_fn(d, d, |i, j| self.mat[(map[i], map[j])]);
        Ok(Self::from_parts(layout, mat))
    }

    /// Reorder registers to match `target`, which must hold the same registers.
    pub fn aligned_to(&self, target: &HilbertLayout) -> Result<Self> {
        let labels: Vec<&str> = target.labels().collect();
        let out = self.permuted(&labels)?;
        if out.layout != *target {
            return Err(Error::Shape(format!(
                "cannot align {} to {}",
                self.layout, target
            )));
        }
        Ok(out)
    }

    /// Move the named registers to the front (in the given order).
    fn to_front<S: AsRef<str>>(&self, regs: &[S]) -> Result<(Self, usize)> {
        let mut order: Vec<String> = regs.iter().map(|s| s.as_ref().to_string()).collect();
        for l in self.layout.labels() {
            if !order.iter().any(|o| o == l) {
                order.push(l.to_string());
            }
        }
        let front_dim = self.layout.dim_of(regs)?;
        Ok((self.permuted(&order)?, front_dim))
    }

    fn restore_order(&self, moved: Self) -> Result<Self> {
        let labels: Vec<&str> = self.layout.labels().collect();
        moved.permuted(&labels)
    }

    /// Partial trace keeping the named registers, which stay in layout order.
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        let keep = self.layout.in_layout_order(keep)?;
        let traced: Vec<String> = self
            .layout
            .labels()
            .filter(|l| !keep.iter().any(|k| k == l))
            .map(str::to_string)
            .collect();
        if traced.is_empty() {
            return Ok(self.clone());
        }
        let (moved, dt) = self.to_front(&traced)?;
        let dk = moved.dim() / dt;
        let d = moved.dim();
        let src = moved.mat.as_slice();
        let mut out = CMatrix::zeros(dk, dk);
        {
            let dst = out.as_mut_slice();
            for t in 0..dt {
                for b in 0..dk {
                    let col = (t * dk + b) * d + t * dk;
                    let dcol = b * dk;
                    for a in 0..dk {
                        dst[dcol + a] += src[col + a];
                    }
                }
            }
        }
        Ok(Self::from_parts(self.layout.select(&keep)?, out))
    }

    /// `(k ⊗ 1) self` with `k` acting on the named registers.
    pub fn left_local<S: AsRef<str>>(&self, k: &CMatrix, regs: &[S]) -> Result<Self> {
        let (moved, dr) = self.to_front(regs)?;
        check_square(k, dr)?;
        let out = left_block(&moved.mat, k, dr);
        self.restore_order(Self::from_parts(moved.layout, out))
    }

    /// `self (k ⊗ 1)` with `k` acting on the named registers.
    pub fn right_local<S: AsRef<str>>(&self, k: &CMatrix, regs: &[S]) -> Result<Self> {
        let (moved, dr) = self.to_front(regs)?;
        check_square(k, dr)?;
        let out = right_block(&moved.mat, k, dr);
        self.restore_order(Self::from_parts(moved.layout, out))
    }

    /// `(k ⊗ 1) self (k ⊗ 1)†`.
    pub fn conjugate_local<S: AsRef<str>>(&self, k: &CMatrix, regs: &[S]) -> Result<Self> {
        let (moved, dr) = self.to_front(regs)?;
        check_square(k, dr)?;
        let left = left_block(&moved.mat, k, dr);
        let out = right_block(&left, &k.adjoint(), dr);
        self.restore_order(Self::from_parts(moved.layout, out))
    }

    /// `Tr_R[(e ⊗ 1) self]` for `e` on the named registers `R`, which are removed.
    pub fn contract_local<S: AsRef<str>>(&self, e: &CMatrix, regs: &[S]) -> Result<Self> {
        let (moved, dr) = self.to_front(regs)?;
        check_square(e, dr)?;
        let d = moved.dim();
        let dk = d / dr;
        let src = moved.mat.as_slice();
        let mut out = CMatrix::zeros(dk, dk);
        {
            let dst = out.as_mut_slice();
            for j in 0..dr {
                for i in 0..dr {
                    let w = e[(j, i)];
                    if w == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for b in 0..dk {
                        let col = (j * dk + b) * d + i * dk;
                        let dcol = b * dk;
                        for a in 0..dk {
                            dst[dcol + a] += w * src[col + a];
                        }
                    }
                }
            }
        }
        let rest = moved.layout.without(regs)?;
        let keep: Vec<&str> = self
            .layout
            .labels()
            .filter(|l| rest.contains(l))
            .collect();
        Self::from_parts(rest.clone(), out).permuted(&keep)
    }

    /// Partial transpose on the named registers.
    pub fn partial_transpose<S: AsRef<str>>(&self, regs: &[S]) -> Result<Self> {
        let (moved, dr) = self.to_front(regs)?;
        let d = moved.dim();
        let dk = d / dr;
        let mut out = CMatrix::zeros(d, d);
        for i in 0..dr {
            for j in 0..dr {
                for b in 0..dk {
                    for a in 0..dk {
                        out[(i * dk + a, j * dk + b)] = moved.mat[(j * dk + a, i * dk + b)];
                    }
                }
            }
        }
        self.restore_order(Self::from_parts(moved.layout, out))
    }

    pub fn trace_norm(&self) -> f64 {
        linalg::trace_norm_matrix(&self.mat).expect("operators are square")
    }

    /// Largest entrywise deviation after aligning register order.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let other = other.aligned_to(&self.layout)?;
        Ok(linalg::max_abs_diff(&self.mat, &other.mat))
    }

    /// `Tr(self · other)` after aligning register order.
    pub fn trace_product(&self, other: &Self) -> Result<C64> {
        let other = other.aligned_to(&self.layout)?;
        Ok(linalg::trace_product(&self.mat, &other.mat))
    }

    pub fn to_json(&self) -> OperatorJson {
        let d = self.dim();
        OperatorJson {
            labels: Some(self.layout.labels().map(str::to_string).collect()),
            dims: self.layout.dims(),
            re: (0..d).map(|i| (0..d).map(|j| self.mat[(i, j)].re).collect()).collect(),
            im: (0..d).map(|i| (0..d).map(|j| self.mat[(i, j)].im).collect()).collect(),
        }
    }

    pub fn from_json(json: &OperatorJson) -> Result<Self> {
        let labels = match &json.labels {
            Some(l) if l.len() == json.dims.len() => l.clone(),
            Some(l) => {
                return Err(Error::Shape(format!(
                    "{} labels for {} dims",
                    l.len(),
                    json.dims.len()
                )))
            }
            None => (0..json.dims.len()).map(|i| format!("r{i}")).collect(),
        };
        let layout = HilbertLayout::new(labels.into_iter().zip(json.dims.iter().copied()))?;
        let d = layout.dim();
        let rows_ok = |m: &Vec<Vec<f64>>| m.len() == d && m.iter().all(|r| r.len() == d);
        if !rows_ok(&json.re) || !rows_ok(&json.im) {
            return Err(Error::Shape(format!("operator JSON is not {d}x{d}")));
        }
        let mat = CMatrix::from_fn(d, d, |i, j| C64::new(json.re[i][j], json.im[i][j]));
        Self::new(layout, mat)
    }
}

fn check_square(k: &CMatrix, d: usize) -> Result<()> {
    if k.nrows() != d || k.ncols() != d {
        return Err(Error::Shape(format!(
            "local operator is {}x{}, registers have dimension {d}",
            k.nrows(),
            k.ncols()
        )));
    }
    Ok(())
}

/// `(k ⊗ 1_r) x` where the first factor has dimension `dr`.
pub(crate) fn left_block(x: &CMatrix, k: &CMatrix, dr: usize) -> CMatrix {
    let d = x.nrows();
    let ncols = x.ncols();
    let dk = d / dr;
    let src = x.as_slice();
    let mut out = CMatrix::zeros(d, ncols);
    let dst = out.as_mut_slice();
    for col in 0..ncols {
        let base = col * d;
        for i in 0..dr {
            for kk in 0..dr {
                let w = k[(i, kk)];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                let s = base + kk * dk;
                let t = base + i * dk;
                for a in 0..dk {
                    dst[t + a] += w * src[s + a];
                }
            }
        }
    }
    out
}

/// `x (k ⊗ 1_r)` where the first factor has dimension `dr`.
pub(crate) fn right_block(x: &CMatrix, k: &CMatrix, dr: usize) -> CMatrix {
    let nrows = x.nrows();
    let d = x.ncols();
    let dk = d / dr;
    let src = x.as_slice();
    let mut out = CMatrix::zeros(nrows, d);
    let dst = out.as_mut_slice();
    for j in 0..dr {
        for kk in 0..dr {
            let w = k[(kk, j)];
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..dk {
                let s = (kk * dk + b) * nrows;
                let t = (j * dk + b) * nrows;
                for a in 0..nrows {
                    dst[t + a] += w * src[s + a];
                }
            }
        }
    }
    out
}
