use std::collections::BTreeMap;

use super::povm::Instrument;
use super::{LinearMap, QChannel};
use crate::operators::{DenseOperator, HilbertLayout};
use crate::{c, CMatrix, Error, Result};

/// A party and the registers it holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Party {
    pub name: String,
    pub registers: Vec<String>,
}

/// The instrument a party applies in one round, possibly chosen by the transcript so far.
#[derive(Debug, Clone)]
pub enum Conditioning {
    Always(Instrument),
    /// Keyed by the full transcript of earlier outcomes.
    OnTranscript(BTreeMap<Vec<usize>, Instrument>),
}

impl Conditioning {
    fn instrument_for(&self, transcript: &[usize]) -> Option<&Instrument> {
        match self {
            Conditioning::Always(inst) => Some(inst),
            Conditioning::OnTranscript(map) => map.get(transcript),
        }
    }
}

/// One local step of a protocol.
#[derive(Debug, Clone)]
pub struct Round {
    pub party: String,
    pub registers: Vec<String>,
    pub action: Conditioning,
}

/// What classical information the protocol outputs alongside the kept registers.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassicalOutput {
    None,
    /// The full transcript, indexed by its position among all transcripts in lexicographic order.
    Transcript { label: String },
    /// A function of the transcript into `0..dim`.
    Function {
        label: String,
        dim: usize,
        values: BTreeMap<Vec<usize>, usize>,
    },
}

/// A finite-round LOCC protocol with finite-outcome instruments.
///
/// Registers held by no party are sealed: they are traced out before any round and can
/// never be kept, so no round can read them.
#[derive(Debug, Clone)]
pub struct LoccProtocol {
    input: HilbertLayout,
    parties: Vec<Party>,
    rounds: Vec<Round>,
    keep: Vec<String>,
    classical: ClassicalOutput,
    output: HilbertLayout,
    transcripts: Vec<Vec<usize>>,
}

/// Incremental constructor; validation happens in [`LoccProtocolBuilder::build`].
#[derive(Debug, Clone)]
pub struct LoccProtocolBuilder {
    input: HilbertLayout,
    parties: Vec<Party>,
    rounds: Vec<Round>,
    keep: Vec<String>,
    classical: ClassicalOutput,
}

impl LoccProtocolBuilder {
    pub fn party<S: AsRef<str>>(mut self, name: &str, registers: &[S]) -> Self {
        self.parties.push(Party {
            name: name.to_string(),
            registers: registers.iter().map(|s| s.as_ref().to_string()).collect(),
        });
        self
    }

    pub fn round<S: AsRef<str>>(mut self, party: &str, registers: &[S], action: Conditioning) -> Self {
        self.rounds.push(Round {
            party: party.to_string(),
            registers: registers.iter().map(|s| s.as_ref().to_string()).collect(),
            action,
        });
        self
    }

    pub fn keep<S: AsRef<str>>(mut self, registers: &[S]) -> Self {
        self.keep = registers.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }

    pub fn classical(mut self, classical: ClassicalOutput) -> Self {
        self.classical = classical;
        self
    }

    pub fn build(self) -> Result<LoccProtocol> {
        let input = self.input;
        let mut owned: Vec<&str> = Vec::new();
        for (i, p) in self.parties.iter().enumerate() {
            if self.parties[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::Validity(format!("party `{}` declared twice", p.name)));
            }
            for r in &p.registers {
                input.position(r)?;
                if owned.contains(&r.as_str()) {
                    return Err(Error::Validity(format!("register `{r}` held by two parties")));
                }
                owned.push(r);
            }
        }
        for (idx, round) in self.rounds.iter().enumerate() {
            let party = self
                .parties
                .iter()
                .find(|p| p.name == round.party)
                .ok_or_else(|| Error::Validity(format!("round {idx}: unknown party `{}`", round.party)))?;
            if round.registers.is_empty() {
                return Err(Error::Validity(format!("round {idx} acts on no register")));
            }
            for r in &round.registers {
                if !party.registers.contains(r) {
                    return Err(Error::Validity(format!(
                        "round {idx}: non-local effect, party `{}` does not hold `{r}`",
                        party.name
                    )));
                }
            }
            input.in_layout_order(&round.registers)?;
        }
        let mut transcripts: Vec<Vec<usize>> = vec![Vec::new()];
        for (idx, round) in self.rounds.iter().enumerate() {
            let dim = input.dim_of(&round.registers)?;
            let mut next = Vec::new();
            for t in &transcripts {
                let inst = round.action.instrument_for(t).ok_or_else(|| {
                    Error::Validity(format!("round {idx}: no instrument for transcript {t:?}"))
                })?;
                if inst.dim() != dim {
                    return Err(Error::Validity(format!(
                        "round {idx}: instrument on dimension {}, registers have {dim}",
                        inst.dim()
                    )));
                }
                for o in 0..inst.outcome_count() {
                    let mut t2 = t.clone();
                    t2.push(o);
                    next.push(t2);
                }
            }
            transcripts = next;
        }
        for k in &self.keep {
            input.position(k)?;
            if !owned.contains(&k.as_str()) {
                return Err(Error::Validity(format!("register `{k}` is sealed and cannot be output")));
            }
        }
        let keep = input.in_layout_order(&self.keep)?;
        let keep_layout = input.select(&keep)?;
        let output = match &self.classical {
            ClassicalOutput::None => keep_layout,
            ClassicalOutput::Transcript { label } => {
                HilbertLayout::single(label.clone(), transcripts.len())?.concat(&keep_layout)?
            }
            ClassicalOutput::Function { label, dim, values } => {
                for t in &transcripts {
                    match values.get(t) {
                        Some(&v) if v < *dim => {}
                        Some(&v) => {
                            return Err(Error::Validity(format!(
                                "classical value {v} for transcript {t:?} outside 0..{dim}"
                            )))
                        }
                        None => {
                            return Err(Error::Validity(format!(
                                "no classical value for transcript {t:?}"
                            )))
                        }
                    }
                }
                HilbertLayout::single(label.clone(), *dim)?.concat(&keep_layout)?
            }
        };
        Ok(LoccProtocol {
            input,
            parties: self.parties,
            rounds: self.rounds,
            keep,
            classical: self.classical,
            output,
            transcripts,
        })
    }
}

impl LoccProtocol {
    pub fn builder(input: HilbertLayout) -> LoccProtocolBuilder {
        LoccProtocolBuilder {
            input,
            parties: Vec::new(),
            rounds: Vec::new(),
            keep: Vec::new(),
            classical: ClassicalOutput::None,
        }
    }

    /// Protocol with no rounds that discards everything.
    pub fn discard_all(input: HilbertLayout, parties: Vec<Party>) -> Result<Self> {
        let mut b = Self::builder(input);
        for p in parties {
            b = b.party(&p.name, &p.registers);
        }
        b.build()
    }

    pub fn input(&self) -> &HilbertLayout {
        &self.input
    }

    pub fn output(&self) -> &HilbertLayout {
        &self.output
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn kept(&self) -> &[String] {
        &self.keep
    }

    pub fn classical(&self) -> &ClassicalOutput {
        &self.classical
    }

    /// Every complete transcript, lexicographic.
    pub fn transcripts(&self) -> &[Vec<usize>] {
        &self.transcripts
    }

    fn owned_labels(&self) -> Vec<String> {
        self.input
            .labels()
            .filter(|l| self.parties.iter().any(|p| p.registers.iter().any(|r| r == l)))
            .map(str::to_string)
            .collect()
    }

    fn classical_value(&self, position: usize, transcript: &[usize]) -> Option<usize> {
        match &self.classical {
            ClassicalOutput::None => None,
            ClassicalOutput::Transcript { .. } => Some(position),
            ClassicalOutput::Function { values, .. } => values.get(transcript).copied(),
        }
    }

    /// Whether round `idx`'s registers are untouched afterwards and not output.
    fn discards_after(&self, idx: usize) -> bool {
        let regs = &self.rounds[idx].registers;
        regs.iter().all(|r| {
            !self.keep.contains(r)
                && self.rounds[idx + 1..]
                    .iter()
                    .all(|later| !later.registers.contains(r))
        })
    }

    /// Sequential branch-by-branch simulation; linear in `x`.
    pub fn apply_operator(&self, x: &DenseOperator) -> Result<DenseOperator> {
        let x = x.aligned_to(&self.input)?;
        let owned = self.owned_labels();
        let mut branches: Vec<(Vec<usize>, DenseOperator)> = vec![(Vec::new(), x.partial_trace(&owned)?)];
        for (idx, round) in self.rounds.iter().enumerate() {
            let discard = self.discards_after(idx);
            let mut next = Vec::new();
            for (t, op) in branches {
                let inst = round
                    .action
                    .instrument_for(&t)
                    .expect("transcripts validated at build");
                for (o, kraus) in inst.outcomes().iter().enumerate() {
                    let branch = if discard {
                        op.contract_local(&inst.effect(o), &round.registers)?
                    } else {
                        let mut acc: Option<DenseOperator> = None;
                        for k in kraus {
                            let term = op.conjugate_local(k, &round.registers)?;
                            acc = Some(match acc {
                                None => term,
                                Some(mut a) => {
                                    a.add_scaled(c(1.0), &term)?;
                                    a
                                }
                            });
                        }
                        acc.expect("outcomes are non-empty")
                    };
                    let mut t2 = t.clone();
                    t2.push(o);
                    next.push((t2, branch));
                }
            }
            branches = next;
        }
        let keep_layout = self.input.select(&self.keep)?;
        let dk = keep_layout.dim();
        let dc = self.output.dim() / dk;
        let mut out = CMatrix::zeros(self.output.dim(), self.output.dim());
        for (pos, (t, op)) in branches.iter().enumerate() {
            let reduced = op.partial_trace(&self.keep)?.aligned_to(&keep_layout)?;
            let cv = self.classical_value(pos, t).unwrap_or(0);
            debug_assert!(cv < dc);
            let mut block = out.view_mut((cv * dk, cv * dk), (dk, dk));
            block += reduced.matrix();
        }
        DenseOperator::new(self.output.clone(), out)
    }

    /// The induced global channel, assembled from per-path Kraus operators.
    pub fn compile(&self) -> Result<QChannel> {
        let owned = self.owned_labels();
        let owned_layout = self.input.select(&owned)?;
        let d_owned = owned_layout.dim();
        let embed = |k: &CMatrix, regs: &[String]| -> Result<CMatrix> {
            Ok(DenseOperator::identity(owned_layout.clone())
                .left_local(k, regs)?
                .into_matrix())
        };
        let mut paths: Vec<(Vec<usize>, CMatrix)> = vec![(Vec::new(), CMatrix::identity(d_owned, d_owned))];
        for round in &self.rounds {
            let mut next = Vec::new();
            for (t, acc) in &paths {
                let inst = round
                    .action
                    .instrument_for(t)
                    .expect("transcripts validated at build");
                for (o, kraus) in inst.outcomes().iter().enumerate() {
                    for k in kraus {
                        let mut t2 = t.clone();
                        t2.push(o);
                        next.push((t2, embed(k, &round.registers)? * acc));
                    }
                }
            }
            paths = next;
        }
        let discarded: Vec<String> = owned.iter().filter(|l| !self.keep.contains(l)).cloned().collect();
        let mut row_order = discarded.clone();
        row_order.extend(self.keep.iter().cloned());
        let (_, row_map) = owned_layout.permutation_map(&row_order)?;
        let d_disc = owned_layout.dim_of(&discarded)?;
        let dk = d_owned / d_disc;

        let sealed: Vec<String> = self.input.labels().filter(|l| !owned.contains(&l.to_string())).map(str::to_string).collect();
        let mut col_order = sealed.clone();
        col_order.extend(owned.iter().cloned());
        let (_, col_map) = self.input.permutation_map(&col_order)?;
        let d_sealed = self.input.dim_of(&sealed)?;
        let d_in = self.input.dim();
        let d_out = self.output.dim();

        let mut kraus = Vec::new();
        for (t, k_path) in &paths {
            let pos = self
                .transcripts
                .binary_search(t)
                .expect("path transcripts are enumerated");
            let cv = self.classical_value(pos, t).unwrap_or(0);
            for j in 0..d_disc {
                for u in 0..d_sealed {
                    let mut k = CMatrix::zeros(d_out, d_in);
                    for a in 0..dk {
                        let src_row = row_map[j * dk + a];
                        for col in 0..d_owned {
                            let v = k_path[(src_row, col)];
                            if v != c(0.0) {
                                k[(cv * dk + a, col_map[u * d_owned + col])] = v;
                            }
                        }
                    }
                    kraus.push(k);
                }
            }
        }
        let ch = QChannel::from_kraus(self.input.clone(), self.output.clone(), kraus)?;
        if ch.kraus().len() > d_in * d_out && d_in * d_out <= 1024 {
            ch.compressed()
        } else {
            Ok(ch)
        }
    }
}

impl LoccProtocol {
    /// Effects `F_g` on the input layout, one per output value, for protocols that keep
    /// no quantum register. `Tr(F_g ρ)` is the probability of output `g`.
    pub fn classical_effects(&self) -> Result<Vec<DenseOperator>> {
        if !self.keep.is_empty() {
            return Err(Error::Validity("protocol outputs quantum registers".into()));
        }
        let mut transcript = Vec::new();
        let effects = self.effects_from(0, &mut transcript)?;
        effects
            .into_iter()
            .map(|e| {
                let touched: Vec<&str> = e.layout().labels().collect();
                let rest = self.input.without(&touched)?;
                e.tensor(&DenseOperator::identity(rest))?.aligned_to(&self.input)
            })
            .collect()
    }

    /// The protocol as a measurement with classical output.
    pub fn to_measurement(&self) -> Result<ClassicalMeasurement> {
        let effects = self.classical_effects()?.into_iter().map(DenseOperator::into_matrix).collect();
        Ok(ClassicalMeasurement {
            input: self.input.clone(),
            output: self.output.clone(),
            effects,
        })
    }

    /// Effects of rounds `idx..` after transcript `t`, on the registers those rounds touch.
    fn effects_from(&self, idx: usize, t: &mut Vec<usize>) -> Result<Vec<DenseOperator>> {
        let dc = self.output.dim();
        if idx == self.rounds.len() {
            let pos = self.transcripts.binary_search(t).expect("transcripts are enumerated");
            let v = self.classical_value(pos, t).unwrap_or(0);
            return Ok((0..dc)
                .map(|g| {
                    let one = DenseOperator::identity(HilbertLayout::trivial());
                    if g == v {
                        one
                    } else {
                        one.scaled(c(0.0))
                    }
                })
                .collect());
        }
        let round = &self.rounds[idx];
        let inst = round.action.instrument_for(t).expect("transcripts validated at build");
        let regs_layout = self.input.select(&round.registers)?;
        let mut acc: Vec<Option<DenseOperator>> = vec![None; dc];
        for (o, kraus) in inst.outcomes().iter().enumerate() {
            t.push(o);
            let children = self.effects_from(idx + 1, t)?;
            t.pop();
            for (g, child) in children.into_iter().enumerate() {
                let disjoint = round.registers.iter().all(|r| !child.layout().contains(r));
                let term = if disjoint {
                    DenseOperator::new(regs_layout.clone(), inst.effect(o))?.tensor(&child)?
                } else {
                    let missing: Vec<&str> = round
                        .registers
                        .iter()
                        .map(String::as_str)
                        .filter(|r| !child.layout().contains(r))
                        .collect();
                    let ext = child.tensor(&DenseOperator::identity(self.input.select(&missing)?))?;
                    let mut sum = DenseOperator::zeros(ext.layout().clone());
                    for k in kraus {
                        sum.add_scaled(c(1.0), &ext.conjugate_local(&k.adjoint(), &round.registers)?)?;
                    }
                    sum
                };
                acc[g] = Some(match acc[g].take() {
                    None => term,
                    Some(mut a) => {
                        let aligned = term.aligned_to(a.layout())?;
                        a.add_scaled(c(1.0), &aligned)?;
                        a
                    }
                });
            }
        }
        Ok(acc.into_iter().map(|a| a.expect("instruments have outcomes")).collect())
    }
}

/// A map that measures and outputs only the classical result: `X ↦ Σ_g Tr(F_g X) |g⟩⟨g|`.
#[derive(Debug, Clone)]
pub struct ClassicalMeasurement {
    input: HilbertLayout,
    output: HilbertLayout,
    effects: Vec<CMatrix>,
}

impl ClassicalMeasurement {
    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }
}

impl LinearMap for ClassicalMeasurement {
    fn input_layout(&self) -> &HilbertLayout {
        &self.input
    }

    fn output_layout(&self) -> &HilbertLayout {
        &self.output
    }

    fn apply_operator(&self, x: &DenseOperator) -> Result<DenseOperator> {
        let x = x.aligned_to(&self.input)?;
        let mut out = CMatrix::zeros(self.effects.len(), self.effects.len());
        for (g, f) in self.effects.iter().enumerate() {
            out[(g, g)] = crate::operators::linalg::trace_product(f, x.matrix());
        }
        DenseOperator::new(self.output.clone(), out)
    }
}

impl LinearMap for LoccProtocol {
    fn input_layout(&self) -> &HilbertLayout {
        &self.input
    }

    fn output_layout(&self) -> &HilbertLayout {
        &self.output
    }

    fn apply_operator(&self, x: &DenseOperator) -> Result<DenseOperator> {
        LoccProtocol::apply_operator(self, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::Povm;

    fn two_qubits() -> HilbertLayout {
        HilbertLayout::new([("a", 2), ("b", 2)]).unwrap()
    }

    #[test]
    fn rejects_non_local_round() {
        let res = LoccProtocol::builder(two_qubits())
            .party("A", &["a"])
            .party("B", &["b"])
            .round("A", &["b"], Conditioning::Always(Instrument::trivial(2)))
            .build();
        assert!(matches!(res, Err(Error::Validity(_))));
    }

    #[test]
    fn sealed_registers_cannot_be_kept() {
        let res = LoccProtocol::builder(two_qubits())
            .party("A", &["a"])
            .keep(&["b"])
            .build();
        assert!(matches!(res, Err(Error::Validity(_))));
    }

    #[test]
    fn missing_conditional_instrument_is_rejected() {
        let meas = Instrument::from_povm(&Povm::computational(HilbertLayout::single("a", 2).unwrap())).unwrap();
        let mut map = BTreeMap::new();
        map.insert(vec![0], Instrument::trivial(2));
        let res = LoccProtocol::builder(two_qubits())
            .party("A", &["a"])
            .party("B", &["b"])
            .round("A", &["a"], Conditioning::Always(meas))
            .round("B", &["b"], Conditioning::OnTranscript(map))
            .build();
        assert!(matches!(res, Err(Error::Validity(_))));
    }

    #[test]
    fn transcripts_are_lexicographic() {
        let meas = Instrument::from_povm(&Povm::computational(HilbertLayout::single("a", 2).unwrap())).unwrap();
        let p = LoccProtocol::builder(two_qubits())
            .party("A", &["a"])
            .party("B", &["b"])
            .round("A", &["a"], Conditioning::Always(meas.clone()))
            .round("B", &["b"], Conditioning::Always(meas))
            .classical(ClassicalOutput::Transcript { label: "t".into() })
            .build()
            .unwrap();
        assert_eq!(p.transcripts(), &[vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(p.output().dim(), 4);
    }
}
