//! Pauli strings with exactly tracked phases.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::operators::{DenseOperator, DensityOperator, HilbertLayout};
use crate::{c, CMatrix, CVector, Error, Result, C64};

/// Global phase `i^k`, stored exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_power(k: u8) -> Self {
        match k % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    /// `k` with `self = i^k`.
    pub fn power(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn to_complex(self) -> C64 {
        match self {
            Phase::PlusOne => C64::new(1.0, 0.0),
            Phase::PlusI => C64::new(0.0, 1.0),
            Phase::MinusOne => C64::new(-1.0, 0.0),
            Phase::MinusI => C64::new(0.0, -1.0),
        }
    }

    pub fn is_real(self) -> bool {
        matches!(self, Phase::PlusOne | Phase::MinusOne)
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    // Phases are powers of i, so multiplication adds exponents.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_power(self.power() + rhs.power())
    }
}

/// Index of an `n`-qubit Pauli string: base-4 digits, most significant digit on qubit 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliIndex {
    n: usize,
    value: usize,
}

impl PauliIndex {
    pub fn new(n: usize, value: usize) -> Result<Self> {
        if value >= count(n)? {
            return Err(Error::Domain(format!("Pauli index {value} outside [0, 4^{n})")));
        }
        Ok(Self { n, value })
    }

    /// All indices in enumeration order.
    pub fn all(n: usize) -> Result<impl Iterator<Item = PauliIndex>> {
        let total = count(n)?;
        Ok((0..total).map(move |value| PauliIndex { n, value }))
    }

    pub fn n(self) -> usize {
        self.n
    }

    pub fn value(self) -> usize {
        self.value
    }

    pub fn digits(self) -> Vec<u8> {
        (0..self.n)
            .map(|q| ((self.value >> (2 * (self.n - 1 - q))) & 3) as u8)
            .collect()
    }

    pub fn string(self) -> PauliString {
        PauliString {
            codes: self.digits(),
            phase: Phase::PlusOne,
        }
    }
}

/// `4^n`, guarded against overflow.
pub fn count(n: usize) -> Result<usize> {
    if n >= usize::BITS as usize / 2 {
        return Err(Error::Domain(format!("{n} qubits is too many to enumerate")));
    }
    Ok(1usize << (2 * n))
}

/// `phase · σ_{c₀} ⊗ σ_{c₁} ⊗ …` with codes 0=I, 1=X, 2=Y, 3=Z.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    codes: Vec<u8>,
    phase: Phase,
}

impl PauliString {
    pub fn new(codes: Vec<u8>, phase: Phase) -> Result<Self> {
        if let Some(bad) = codes.iter().find(|&&c| c > 3) {
            return Err(Error::Domain(format!("Pauli code {bad} is not in 0..=3")));
        }
        Ok(Self { codes, phase })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            codes: vec![0; n],
            phase: Phase::PlusOne,
        }
    }

    pub fn n(&self) -> usize {
        self.codes.len()
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn index(&self) -> PauliIndex {
        let value = self
            .codes
            .iter()
            .fold(0usize, |acc, &c| (acc << 2) | c as usize);
        PauliIndex {
            n: self.n(),
            value,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.codes.iter().all(|&c| c == 0)
    }

    /// Number of `σ_y` factors.
    pub fn y_count(&self) -> usize {
        self.codes.iter().filter(|&&c| c == 2).count()
    }

    pub fn weight(&self) -> usize {
        self.codes.iter().filter(|&&c| c != 0).count()
    }

    /// Sign `s` with `σᵀ = s σ`, i.e. `(1 ⊗ σ)|Φ⟩ = s (σ ⊗ 1)|Φ⟩`.
    pub fn transpose_sign(&self) -> f64 {
        if self.y_count().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// Whether `σ_self σ_other = σ_other σ_self`; otherwise they anticommute.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.codes
            .iter()
            .zip(&other.codes)
            .filter(|&(&a, &b)| a != 0 && b != 0 && a != b)
            .count()
            % 2
            == 0
    }

    /// Product `self · other` with exact phase.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n() != other.n() {
            return Err(Error::Shape(format!(
                "Pauli strings on {} and {} qubits",
                self.n(),
                other.n()
            )));
        }
        let mut phase = self.phase * other.phase;
        let codes = self
            .codes
            .iter()
            .zip(&other.codes)
            .map(|(&a, &b)| {
                let (code, p) = single_product(a, b);
                phase = phase * p;
                code
            })
            .collect();
        Ok(PauliString { codes, phase })
    }

    /// Action on basis vectors: `σ|j⟩ = phases[j] |perm[j]⟩`.
    pub fn monomial(&self) -> (Vec<usize>, Vec<C64>) {
        let n = self.n();
        let d = 1usize << n;
        let global = self.phase.to_complex();
        let mut perm = Vec::with_capacity(d);
        let mut phases = Vec::with_capacity(d);
        for j in 0..d {
            let mut target = 0usize;
            let mut ph = global;
            for (q, &code) in self.codes.iter().enumerate() {
                let bit = (j >> (n - 1 - q)) & 1;
                let (out, f) = match (code, bit) {
                    (0, b) => (b, C64::new(1.0, 0.0)),
                    (1, b) => (1 - b, C64::new(1.0, 0.0)),
                    (2, 0) => (1, C64::new(0.0, 1.0)),
                    (2, _) => (0, C64::new(0.0, -1.0)),
                    (_, 0) => (0, C64::new(1.0, 0.0)),
                    (_, _) => (1, C64::new(-1.0, 0.0)),
                };
                target |= out << (n - 1 - q);
                ph *= f;
            }
            perm.push(target);
            phases.push(ph);
        }
        (perm, phases)
    }

    pub fn to_matrix(&self) -> CMatrix {
        let d = 1usize << self.n();
        let (perm, phases) = self.monomial();
        let mut m = CMatrix::zeros(d, d);
        for j in 0..d {
            m[(perm[j], j)] = phases[j];
        }
        m
    }

    /// Dense realization on qubit registers `q0 .. q{n-1}`.
    pub fn to_dense(&self) -> DenseOperator {
        let layout = HilbertLayout::qubits("q", self.n()).expect("qubit layout within cap");
        DenseOperator::new(layout, self.to_matrix()).expect("finite Pauli matrix")
    }

    /// `σ a σ†` in `O(d²)`.
    pub fn conjugate(&self, a: &CMatrix) -> Result<CMatrix> {
        let d = 1usize << self.n();
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::Shape(format!(
                "{}x{} operator for a {}-qubit Pauli string",
                a.nrows(),
                a.ncols(),
                self.n()
            )));
        }
        let (perm, phases) = self.monomial();
        let mut out = CMatrix::zeros(d, d);
        for k in 0..d {
            for j in 0..d {
                out[(perm[j], perm[k])] = phases[j] * phases[k].conj() * a[(j, k)];
            }
        }
        Ok(out)
    }

    /// `Tr(σ a)` in `O(d)`.
    pub fn trace_with(&self, a: &CMatrix) -> C64 {
        let (perm, phases) = self.monomial();
        (0..perm.len()).map(|j| phases[j] * a[(j, perm[j])]).sum()
    }
}

fn single_product(a: u8, b: u8) -> (u8, Phase) {
    match (a, b) {
        (0, x) | (x, 0) => (x, Phase::PlusOne),
        (x, y) if x == y => (0, Phase::PlusOne),
        (x, y) => {
            let code = 6 - x - y;
            // XY = iZ, YZ = iX, ZX = iY.
            if (y + 3 - x) % 3 == 1 {
                (code, Phase::PlusI)
            } else {
                (code, Phase::MinusI)
            }
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            Phase::PlusOne => "+",
            Phase::PlusI => "+i",
            Phase::MinusOne => "-",
            Phase::MinusI => "-i",
        };
        let body: String = self
            .codes
            .iter()
            .map(|&c| ['I', 'X', 'Y', 'Z'][c as usize])
            .collect();
        write!(f, "{prefix}{body}")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MinusI, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (Phase::PlusI, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MinusOne, rest)
        } else {
            (Phase::PlusOne, s.strip_prefix('+').unwrap_or(s))
        };
        let codes = body
            .chars()
            .map(|ch| match ch {
                'I' => Ok(0),
                'X' => Ok(1),
                'Y' => Ok(2),
                'Z' => Ok(3),
                other => Err(Error::Domain(format!("`{other}` is not a Pauli symbol"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(PauliString { codes, phase })
    }
}

fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Shape(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// `4^{-n} Σ_I σ_I φ σ_I`.
pub fn twirl(phi: &DensityOperator) -> Result<DensityOperator> {
    let n = qubit_count(phi.dim())?;
    let mut acc = CMatrix::zeros(phi.dim(), phi.dim());
    for idx in PauliIndex::all(n)? {
        acc += idx.string().conjugate(phi.matrix())?;
    }
    acc /= c(count(n)? as f64);
    DensityOperator::new(DenseOperator::new(phi.layout().clone(), acc)?)
}

/// `4^{-n} Σ_M (−1)^{N_y(M)} σ_M ⊗ σ_M` on registers `left`, `right`.
pub fn phi_pauli_expansion(n: usize) -> Result<DenseOperator> {
    let d = 1usize << n;
    let layout = HilbertLayout::new([("left", d), ("right", d)])?;
    let mut acc = CMatrix::zeros(d * d, d * d);
    for idx in PauliIndex::all(n)? {
        let s = idx.string();
        let sign = if s.y_count() % 2 == 0 { 1.0 } else { -1.0 };
        let m = s.to_matrix();
        acc += m.kronecker(&m) * c(sign);
    }
    acc /= c(count(n)? as f64);
    DenseOperator::new(layout, acc)
}

/// A product pure state `⊗_q |f_q⟩` weighting one eigenvector of a Pauli string.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTerm {
    pub sign: i8,
    pub factors: Vec<CVector>,
}

impl ProductTerm {
    pub fn vector(&self) -> CVector {
        self.factors
            .iter()
            .fold(CVector::from_element(1, c(1.0)), |acc, f| acc.kronecker(f))
    }
}

/// `σ_M = 2^{n−1}(ρ₊ − ρ₋)` with `ρ±` equal mixtures of product eigenvectors.
#[derive(Debug, Clone)]
pub struct PmDecomposition {
    pub plus: DensityOperator,
    pub minus: DensityOperator,
    pub terms: Vec<ProductTerm>,
}

/// Splits a Hermitian, non-identity Pauli string into its ± eigenprojector mixtures.
///
/// The states live on qubit registers `q0 .. q{n-1}`.
pub fn pm_decomposition(m: &PauliString) -> Result<PmDecomposition> {
    pm_decomposition_on(m, HilbertLayout::qubits("q", m.n())?)
}

/// As [`pm_decomposition`], on a caller-chosen layout of dimension `2^n`.
pub fn pm_decomposition_on(m: &PauliString, layout: HilbertLayout) -> Result<PmDecomposition> {
    if m.is_identity() {
        return Err(Error::Domain(
            "the identity string has no negative eigenspace; weight it as 2^n · I/2^n".into(),
        ));
    }
    if !m.phase().is_real() {
        return Err(Error::Domain(format!("{m} is not Hermitian")));
    }
    let n = m.n();
    let d = 1usize << n;
    if layout.dim() != d {
        return Err(Error::Shape(format!("layout {layout} for {n} qubits")));
    }
    let s = 1.0 / 2f64.sqrt();
    // (eigenvalue, vector) pairs per single-qubit code.
    let eig = |code: u8| -> [(i8, CVector); 2] {
        match code {
            0 => [
                (1, CVector::from_vec(vec![c(1.0), c(0.0)])),
                (1, CVector::from_vec(vec![c(0.0), c(1.0)])),
            ],
            1 => [
                (1, CVector::from_vec(vec![c(s), c(s)])),
                (-1, CVector::from_vec(vec![c(s), c(-s)])),
            ],
            2 => [
                (1, CVector::from_vec(vec![c(s), C64::new(0.0, s)])),
                (-1, CVector::from_vec(vec![c(s), C64::new(0.0, -s)])),
            ],
            _ => [
                (1, CVector::from_vec(vec![c(1.0), c(0.0)])),
                (-1, CVector::from_vec(vec![c(0.0), c(1.0)])),
            ],
        }
    };
    let global: i8 = if m.phase() == Phase::PlusOne { 1 } else { -1 };
    let mut terms = Vec::with_capacity(d);
    for choice in 0..d {
        let mut sign = global;
        let mut factors = Vec::with_capacity(n);
        for (q, &code) in m.codes().iter().enumerate() {
            let (ev, v) = eig(code)[(choice >> (n - 1 - q)) & 1].clone();
            sign *= ev;
            factors.push(v);
        }
        terms.push(ProductTerm { sign, factors });
    }
    let weight = c(1.0 / (d / 2) as f64);
    let mut plus = CMatrix::zeros(d, d);
    let mut minus = CMatrix::zeros(d, d);
    for t in &terms {
        let v = t.vector();
        let p = &v * v.adjoint() * weight;
        if t.sign > 0 {
            plus += p;
        } else {
            minus += p;
        }
    }
    Ok(PmDecomposition {
        plus: DensityOperator::new(DenseOperator::new(layout.clone(), plus)?)?,
        minus: DensityOperator::new(DenseOperator::new(layout, minus)?)?,
        terms,
    })
}

/// `a_J = Tr(σ_J ω)` for every index `J`, in enumeration order.
pub fn pauli_coefficients(omega: &DensityOperator) -> Result<Vec<f64>> {
    Ok(pauli_coefficients_complex(omega.as_op())?
        .into_iter()
        .map(|z| z.re)
        .collect())
}

/// `Tr(σ_J A)` for an arbitrary operator.
pub fn pauli_coefficients_complex(a: &DenseOperator) -> Result<Vec<C64>> {
    let n = qubit_count(a.dim())?;
    Ok(PauliIndex::all(n)?
        .map(|idx| idx.string().trace_with(a.matrix()))
        .collect())
}

/// `(1/d) Σ_J a_J σ_J`.
pub fn from_pauli_coefficients(layout: HilbertLayout, coeffs: &[C64]) -> Result<DenseOperator> {
    let n = qubit_count(layout.dim())?;
    if coeffs.len() != count(n)? {
        return Err(Error::Shape(format!(
            "{} coefficients for {n} qubits",
            coeffs.len()
        )));
    }
    let d = layout.dim();
    let mut acc = CMatrix::zeros(d, d);
    for (idx, &a) in PauliIndex::all(n)?.zip(coeffs) {
        let (perm, phases) = idx.string().monomial();
        for j in 0..d {
            acc[(perm[j], j)] += a * phases[j];
        }
    }
    acc /= c(d as f64);
    DenseOperator::new(layout, acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::linalg::max_abs_diff;

    #[test]
    fn xy_is_i_z() {
        let x: PauliString = "X".parse().unwrap();
        let y: PauliString = "Y".parse().unwrap();
        let p = x.mul(&y).unwrap();
        assert_eq!(p.to_string(), "+iZ");
        let direct = x.to_matrix() * y.to_matrix();
        assert!(max_abs_diff(&direct, &p.to_matrix()) < 1e-15);
    }

    #[test]
    fn products_agree_with_dense_products() {
        for a in PauliIndex::all(2).unwrap() {
            for b in PauliIndex::all(2).unwrap() {
                let (sa, sb) = (a.string(), b.string());
                let p = sa.mul(&sb).unwrap();
                let direct = sa.to_matrix() * sb.to_matrix();
                assert!(max_abs_diff(&direct, &p.to_matrix()) < 1e-15);
            }
        }
    }

    #[test]
    fn index_digits_are_big_endian() {
        let idx = PauliIndex::new(2, 0b01_11).unwrap();
        assert_eq!(idx.digits(), vec![1, 3]);
        assert_eq!(idx.string().to_string(), "+XZ");
        assert_eq!(idx.string().index(), idx);
    }

    #[test]
    fn display_round_trips() {
        for s in ["+XZIY", "-iY", "+iIX", "-ZZ"] {
            let p: PauliString = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
    }

    #[test]
    fn conjugate_matches_dense() {
        let a = CMatrix::from_fn(4, 4, |i, j| C64::new(i as f64 + 0.5, j as f64 - 0.25));
        for idx in PauliIndex::all(2).unwrap() {
            let s = idx.string();
            let m = s.to_matrix();
            let direct = &m * &a * m.adjoint();
            assert!(max_abs_diff(&direct, &s.conjugate(&a).unwrap()) < 1e-14);
        }
    }

    #[test]
    fn identity_has_no_pm_split() {
        assert!(matches!(
            pm_decomposition(&PauliString::identity(2)),
            Err(Error::Domain(_))
        ));
    }
}
