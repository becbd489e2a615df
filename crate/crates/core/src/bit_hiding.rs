//! Bit-hiding schemes: Werner pairs, tensor products and a perfect-oracle test double.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::Povm;
use crate::operators::linalg::real_inner;
use crate::operators::{DenseOperator, DensityOperator, HilbertLayout};
use crate::{c, CMatrix, Error, Result};

/// Name of the party holding the first half of every hiding pair.
pub const ALICE: &str = "A";
/// Name of the party holding the second half of every hiding pair.
pub const BOB: &str = "B";

/// How a security value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    CertifiedUpper,
    Heuristic,
    OraclePerfect,
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertificateKind::CertifiedUpper => "certified-upper",
            CertificateKind::Heuristic => "heuristic",
            CertificateKind::OraclePerfect => "oracle-perfect",
        })
    }
}

/// A security level with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub value: f64,
    pub kind: CertificateKind,
    pub method: String,
}

impl Certificate {
    pub fn oracle() -> Self {
        Self {
            value: 0.0,
            kind: CertificateKind::OraclePerfect,
            method: "sealed register".into(),
        }
    }
}

/// Who holds a register.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Holder {
    Party(String),
    /// Readable by global decoding only; LOCC protocols never own it.
    Sealed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Factor {
    Werner { d: usize },
    Oracle { k: usize },
}

impl Factor {
    fn arity(self) -> usize {
        match self {
            Factor::Werner { .. } => 1,
            Factor::Oracle { k } => k,
        }
    }

    fn labels(self, j: usize) -> Vec<(String, usize, Holder)> {
        match self {
            Factor::Werner { d } => vec![
                (format!("A{j}"), d, Holder::Party(ALICE.into())),
                (format!("B{j}"), d, Holder::Party(BOB.into())),
            ],
            Factor::Oracle { k } => vec![(format!("V{j}"), 1 << k, Holder::Sealed)],
        }
    }

    fn describe(self) -> String {
        match self {
            Factor::Werner { d } => format!("werner:d={d}"),
            Factor::Oracle { k } => format!("oracle:k={k}"),
        }
    }

    fn state(self, index: usize) -> CMatrix {
        match self {
            Factor::Werner { d } => {
                let p = if index == 0 { symmetric_projector(d) } else { antisymmetric_projector(d) };
                let tr = p.trace().re;
                p / c(tr)
            }
            Factor::Oracle { k } => unit((1 << k) as usize, index),
        }
    }

    fn effect(self, index: usize) -> CMatrix {
        match self {
            Factor::Werner { d } => {
                if index == 0 {
                    symmetric_projector(d)
                } else {
                    antisymmetric_projector(d)
                }
            }
            Factor::Oracle { k } => unit((1 << k) as usize, index),
        }
    }
}

fn unit(d: usize, i: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, i)] = c(1.0);
    m
}

/// Swap operator on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> CMatrix {
    let mut f = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(i * d + j, j * d + i)] = c(1.0);
        }
    }
    f
}

/// `(1 + F)/2`.
pub fn symmetric_projector(d: usize) -> CMatrix {
    (CMatrix::identity(d * d, d * d) + swap_operator(d)) * c(0.5)
}

/// `(1 − F)/2`.
pub fn antisymmetric_projector(d: usize) -> CMatrix {
    (CMatrix::identity(d * d, d * d) - swap_operator(d)) * c(0.5)
}

#[derive(Debug, Clone)]
enum Source {
    /// Registers of factor `j` are laid out per party; factor order fixes index bit order.
    Factors(Vec<Factor>),
    Explicit {
        states: Vec<DensityOperator>,
        effects: Vec<CMatrix>,
    },
}

/// Encoder `I ↦ ρ_I` for `I ∈ [0, 2^k)` with a global decoding measurement.
#[derive(Debug, Clone)]
pub struct BitHidingScheme {
    arity: usize,
    layout: HilbertLayout,
    holders: BTreeMap<String, Holder>,
    source: Source,
    eps: Option<Certificate>,
    orthogonal: bool,
    descriptor: String,
}

/// Symmetric/antisymmetric Werner hiding pair on `C^d ⊗ C^d`.
///
/// The certificate is left empty; the security module computes it.
pub fn werner_pair(d: usize) -> Result<BitHidingScheme> {
    if d < 2 {
        return Err(Error::Domain(format!("Werner pair needs d >= 2, got {d}")));
    }
    BitHidingScheme::from_factors(vec![Factor::Werner { d }], None)
}

/// Stores `I` in a sealed register; LOCC protocols cannot read it.
pub fn perfect_oracle(k: usize) -> Result<BitHidingScheme> {
    if k == 0 || k >= 12 {
        return Err(Error::Domain(format!("oracle arity {k} outside 1..=11")));
    }
    BitHidingScheme::from_factors(vec![Factor::Oracle { k }], Some(Certificate::oracle()))
}

/// `ρ_{I₁∥I₂} = ρ_{I₁} ⊗ ρ_{I₂}`, with `I = I₁ · 2^{k₂} + I₂`.
pub fn tensor_schemes(s1: &BitHidingScheme, s2: &BitHidingScheme) -> Result<BitHidingScheme> {
    let eps = match (&s1.eps, &s2.eps) {
        (Some(a), Some(b)) if a.kind == CertificateKind::OraclePerfect && b.kind == CertificateKind::OraclePerfect => {
            Some(Certificate::oracle())
        }
        (Some(a), Some(b)) => Some(Certificate {
            value: a.value + b.value,
            kind: CertificateKind::Heuristic,
            method: "union bound over factors".into(),
        }),
        _ => None,
    };
    match (&s1.source, &s2.source) {
        (Source::Factors(f1), Source::Factors(f2)) => {
            let mut factors: Vec<Factor> = f1.iter().chain(f2).copied().collect();
            if factors.iter().all(|f| matches!(f, Factor::Oracle { .. })) {
                let k = factors.iter().map(|f| f.arity()).sum();
                if k >= 12 {
                    return Err(Error::Domain(format!("oracle arity {k} outside 1..=11")));
                }
                factors = vec![Factor::Oracle { k }];
            }
            BitHidingScheme::from_factors(factors, eps)
        }
        _ => tensor_explicit(s1, s2, eps),
    }
}

fn tensor_explicit(s1: &BitHidingScheme, s2: &BitHidingScheme, eps: Option<Certificate>) -> Result<BitHidingScheme> {
    let clash = s2.layout.labels().any(|l| s1.layout.contains(l));
    let rename = |l: &str| if clash { format!("{l}.1") } else { l.to_string() };
    let right_states = s2.states()?;
    let right_states = right_states
        .iter()
        .map(|r| r.relabel(rename))
        .collect::<Result<Vec<_>>>()?;
    let left_states = s1.states()?;
    let mut states = Vec::with_capacity(left_states.len() * right_states.len());
    let mut effects = Vec::with_capacity(states.capacity());
    for (i, l) in left_states.iter().enumerate() {
        let el = s1.decoder_effect(i)?;
        for (j, r) in right_states.iter().enumerate() {
            states.push(l.tensor(r)?);
            effects.push(el.kronecker(&s2.decoder_effect(j)?));
        }
    }
    let mut holders = s1.holders.clone();
    for (l, h) in &s2.holders {
        holders.insert(rename(l), h.clone());
    }
    let mut out = BitHidingScheme::from_states(
        format!("tensor({},{})", s1.descriptor, s2.descriptor),
        holders,
        states,
        effects,
    )?;
    out.eps = eps;
    out.orthogonal = s1.orthogonal && s2.orthogonal;
    Ok(out)
}

impl BitHidingScheme {
    fn from_factors(factors: Vec<Factor>, eps: Option<Certificate>) -> Result<Self> {
        let mut regs: Vec<(String, usize, Holder)> = factors
            .iter()
            .enumerate()
            .flat_map(|(j, f)| f.labels(j))
            .collect();
        let rank = |h: &Holder| match h {
            Holder::Party(p) if p == ALICE => 0,
            Holder::Party(_) => 1,
            Holder::Sealed => 2,
        };
        regs.sort_by_key(|(_, _, h)| rank(h));
        let layout = HilbertLayout::new(regs.iter().map(|(l, d, _)| (l.clone(), *d)))?;
        let holders = regs.into_iter().map(|(l, _, h)| (l, h)).collect();
        let descriptor = if factors.len() == 1 {
            factors[0].describe()
        } else {
            format!(
                "tensor:{}",
                factors.iter().map(|f| f.describe()).collect::<Vec<_>>().join("*")
            )
        };
        Ok(Self {
            arity: factors.iter().map(|f| f.arity()).sum(),
            layout,
            holders,
            source: Source::Factors(factors),
            eps,
            orthogonal: true,
            descriptor,
        })
    }

    /// Scheme from explicit states `ρ_I` and decoder effects `E_I`.
    pub fn from_states(
        descriptor: String,
        holders: BTreeMap<String, Holder>,
        states: Vec<DensityOperator>,
        effects: Vec<CMatrix>,
    ) -> Result<Self> {
        let n = states.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Domain(format!("{n} states do not encode a whole number of bits")));
        }
        if effects.len() != n {
            return Err(Error::Domain(format!("{} effects for {n} states", effects.len())));
        }
        let layout = states[0].layout().clone();
        let states = states
            .into_iter()
            .map(|s| s.aligned_to(&layout))
            .collect::<Result<Vec<_>>>()?;
        Povm::new(layout.clone(), effects.clone())?;
        for l in layout.labels() {
            if !holders.contains_key(l) {
                return Err(Error::Label(format!("register `{l}` has no holder")));
            }
        }
        let orthogonal = (0..n).all(|i| (0..i).all(|j| real_inner(states[i].matrix(), states[j].matrix()).abs() <= 1e-12));
        Ok(Self {
            arity: n.trailing_zeros() as usize,
            layout,
            holders,
            source: Source::Explicit { states, effects },
            eps: None,
            orthogonal,
            descriptor,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn num_states(&self) -> usize {
        1 << self.arity
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn holders(&self) -> &BTreeMap<String, Holder> {
        &self.holders
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn eps_certificate(&self) -> Option<&Certificate> {
        self.eps.as_ref()
    }

    pub fn with_certificate(mut self, cert: Certificate) -> Self {
        self.eps = Some(cert);
        self
    }

    /// Whether the provider guarantees `Tr(ρ_I ρ_J) = 0` for `I ≠ J`.
    pub fn declares_orthogonal(&self) -> bool {
        self.orthogonal
    }

    /// True when every register is sealed.
    pub fn is_oracle(&self) -> bool {
        self.holders.values().all(|h| *h == Holder::Sealed)
    }

    /// Local dimensions of the Werner factors, when the scheme is a product of them.
    pub fn werner_dims(&self) -> Option<Vec<usize>> {
        match &self.source {
            Source::Factors(fs) => fs
                .iter()
                .map(|f| match f {
                    Factor::Werner { d } => Some(*d),
                    Factor::Oracle { .. } => None,
                })
                .collect(),
            Source::Explicit { .. } => None,
        }
    }

    /// Registers held by `party`, in layout order.
    pub fn party_registers(&self, party: &str) -> Vec<String> {
        self.layout
            .labels()
            .filter(|l| matches!(self.holders.get(*l), Some(Holder::Party(p)) if p == party))
            .map(str::to_string)
            .collect()
    }

    pub fn sealed_registers(&self) -> Vec<String> {
        self.layout
            .labels()
            .filter(|l| self.holders.get(*l) == Some(&Holder::Sealed))
            .map(str::to_string)
            .collect()
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.num_states() {
            return Err(Error::Domain(format!(
                "index {index} outside [0, 2^{})",
                self.arity
            )));
        }
        Ok(())
    }

    fn factor_product(&self, factors: &[Factor], index: usize, f: impl Fn(Factor, usize) -> CMatrix) -> Result<DenseOperator> {
        let mut shift = self.arity;
        let mut mat = CMatrix::from_element(1, 1, c(1.0));
        let mut regs: Vec<(String, usize)> = Vec::new();
        for (j, fac) in factors.iter().enumerate() {
            shift -= fac.arity();
            let sub = (index >> shift) & ((1 << fac.arity()) - 1);
            mat = mat.kronecker(&f(*fac, sub));
            regs.extend(fac.labels(j).into_iter().map(|(l, d, _)| (l, d)));
        }
        DenseOperator::new(HilbertLayout::new(regs)?, mat)?.aligned_to(&self.layout)
    }

    /// `ρ_I`.
    pub fn state(&self, index: usize) -> Result<DensityOperator> {
        self.check_index(index)?;
        match &self.source {
            Source::Factors(fs) => Ok(DensityOperator::from_op_unchecked(
                self.factor_product(fs, index, Factor::state)?,
            )),
            Source::Explicit { states, .. } => Ok(states[index].clone()),
        }
    }

    /// All `ρ_I`, in index order.
    pub fn states(&self) -> Result<Vec<DensityOperator>> {
        (0..self.num_states()).into_par_iter().map(|i| self.state(i)).collect()
    }

    /// Decoder effect `E_I`.
    pub fn decoder_effect(&self, index: usize) -> Result<CMatrix> {
        self.check_index(index)?;
        match &self.source {
            Source::Factors(fs) => Ok(self.factor_product(fs, index, Factor::effect)?.into_matrix()),
            Source::Explicit { effects, .. } => Ok(effects[index].clone()),
        }
    }

    pub fn decoder(&self) -> Result<Povm> {
        let effects = (0..self.num_states())
            .map(|i| self.decoder_effect(i))
            .collect::<Result<Vec<_>>>()?;
        Povm::new(self.layout.clone(), effects)
    }

    /// `Tr(E_I ρ_I)`.
    pub fn success_probability(&self, index: usize) -> Result<f64> {
        let rho = self.state(index)?;
        Ok(real_inner(&self.decoder_effect(index)?, rho.matrix()))
    }
}

/// Provider selector: `werner:d=3`, `oracle:k=2`, `tensor:werner:d=2*werner:d=2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeSelector {
    Werner { d: usize },
    Oracle { k: usize },
    Tensor(Vec<SchemeSelector>),
}

impl SchemeSelector {
    pub fn build(&self) -> Result<BitHidingScheme> {
        match self {
            SchemeSelector::Werner { d } => werner_pair(*d),
            SchemeSelector::Oracle { k } => perfect_oracle(*k),
            SchemeSelector::Tensor(parts) => {
                let mut iter = parts.iter();
                let first = iter
                    .next()
                    .ok_or_else(|| Error::Domain("empty tensor selector".into()))?
                    .build()?;
                iter.try_fold(first, |acc, p| tensor_schemes(&acc, &p.build()?))
            }
        }
    }

    /// `count` copies of a one-bit Werner pair.
    pub fn werner_power(d: usize, count: usize) -> Self {
        if count == 1 {
            SchemeSelector::Werner { d }
        } else {
            SchemeSelector::Tensor(vec![SchemeSelector::Werner { d }; count])
        }
    }
}

impl fmt::Display for SchemeSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeSelector::Werner { d } => write!(f, "werner:d={d}"),
            SchemeSelector::Oracle { k } => write!(f, "oracle:k={k}"),
            SchemeSelector::Tensor(parts) => {
                let inner: Vec<String> = parts.iter().map(ToString::to_string).collect();
                write!(f, "tensor:{}", inner.join("*"))
            }
        }
    }
}

fn parse_param(text: &str, key: &str) -> Result<usize> {
    let value = text
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| Error::Domain(format!("expected `{key}=<n>`, got `{text}`")))?;
    value
        .parse()
        .map_err(|_| Error::Domain(format!("`{value}` is not a non-negative integer")))
}

impl FromStr for SchemeSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("tensor:") {
            let parts = rest
                .split('*')
                .map(SchemeSelector::from_str)
                .collect::<Result<Vec<_>>>()?;
            if parts.len() < 2 {
                return Err(Error::Domain("tensor selector needs at least two factors".into()));
            }
            Ok(SchemeSelector::Tensor(parts))
        } else if let Some(rest) = s.strip_prefix("werner:") {
            Ok(SchemeSelector::Werner { d: parse_param(rest, "d")? })
        } else if let Some(rest) = s.strip_prefix("oracle:") {
            Ok(SchemeSelector::Oracle { k: parse_param(rest, "k")? })
        } else {
            Err(Error::Domain(format!("unknown bit scheme `{s}`")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::linalg::max_abs_diff;

    #[test]
    fn qubit_werner_pair_is_triplet_and_singlet() {
        let s = werner_pair(2).unwrap();
        let singlet = s.state(1).unwrap();
        assert!((singlet.purity() - 1.0).abs() < 1e-12);
        let triplet = s.state(0).unwrap();
        let eig = triplet.eigenvalues();
        assert!(eig[0].abs() < 1e-12);
        for k in 1..4 {
            assert!((eig[k] - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_small_dimension() {
        assert!(matches!(werner_pair(1), Err(Error::Domain(_))));
    }

    #[test]
    fn oracle_tensor_collapses() {
        let t = tensor_schemes(&perfect_oracle(1).unwrap(), &perfect_oracle(1).unwrap()).unwrap();
        assert_eq!(t.arity(), 2);
        assert!(t.is_oracle());
        let direct = perfect_oracle(2).unwrap();
        for i in 0..4 {
            assert!(max_abs_diff(t.state(i).unwrap().matrix(), direct.state(i).unwrap().matrix()) < 1e-15);
        }
        assert_eq!(t.eps_certificate().unwrap().kind, CertificateKind::OraclePerfect);
    }

    #[test]
    fn layout_groups_parties() {
        let t = SchemeSelector::werner_power(2, 2).build().unwrap();
        let labels: Vec<&str> = t.layout().labels().collect();
        assert_eq!(labels, vec!["A0", "A1", "B0", "B1"]);
        assert_eq!(t.party_registers(ALICE), vec!["A0", "A1"]);
    }

    #[test]
    fn index_bits_are_big_endian_over_factors() {
        let t = SchemeSelector::werner_power(2, 2).build().unwrap();
        // I = 0b10: first factor antisymmetric, second symmetric.
        let rho = t.state(0b10).unwrap();
        let first = rho.partial_trace(&["A0", "B0"]).unwrap();
        let w = werner_pair(2).unwrap().state(1).unwrap();
        assert!(max_abs_diff(first.matrix(), w.matrix()) < 1e-14);
    }

    #[test]
    fn selector_round_trips() {
        for s in ["werner:d=3", "oracle:k=2", "tensor:werner:d=2*werner:d=3"] {
            let sel: SchemeSelector = s.parse().unwrap();
            assert_eq!(sel.to_string(), s);
        }
        assert!("bogus".parse::<SchemeSelector>().is_err());
    }
}
