//! Alternating optimization over one-way LOCC protocols.
//!
//! The sender measures a POVM `{E_a}` and announces `a`; the receiver answers with the
//! Helstrom projector of its conditional operator `Γ_a = Tr_S[(E_a ⊗ 1)Δ]`. The achieved
//! output distance `Σ_a ‖Γ_a‖₁` is a valid lower bound on LOCC distinguishability.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sdp::{self, Entry, SdpProblem, SdpSettings};
use super::{difference, Cut};
use crate::bit_hiding::{ALICE, BOB};
use crate::channels::{ClassicalOutput, Conditioning, Instrument, LoccProtocol};
use crate::operators::linalg::{herm_eigen, herm_function, hermitian_part, min_eigenvalue, polar_unitary};
use crate::operators::{DenseOperator, DensityOperator, HilbertLayout};
use crate::random::{haar_unitary, seeded};
use crate::{c, CMatrix, Result, C64};

/// Label of the one-bit guess output by seesaw protocols.
pub const GUESS_REGISTER: &str = "guess";

/// Largest sender dimension whose update is solved as an SDP; above it the sender is
/// restricted to rank-one projective measurements updated by a polar step.
const SDP_SENDER_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeesawSettings {
    pub seed: u64,
    pub restarts: usize,
    pub iterations: usize,
    pub tolerance: f64,
}

impl Default for SeesawSettings {
    fn default() -> Self {
        Self {
            seed: 42,
            restarts: 4,
            iterations: 200,
            tolerance: 1e-12,
        }
    }
}

/// Which party measures first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeesawDirection {
    AliceFirst,
    BobFirst,
}

#[derive(Debug, Clone)]
pub struct SeesawResult {
    pub value: f64,
    pub direction: SeesawDirection,
    pub protocol: LoccProtocol,
    pub iterations: usize,
}

struct Blocks<'a> {
    delta: &'a CMatrix,
    ds: usize,
    dr: usize,
}

impl Blocks<'_> {
    /// `Tr_S[(E_a ⊗ 1)Δ]` for every effect, in one pass over `Δ`.
    fn receiver_operators(&self, effects: &[CMatrix]) -> Vec<CMatrix> {
        let (ds, dr) = (self.ds, self.dr);
        let d = ds * dr;
        let src = self.delta.as_slice();
        let mut outs = vec![CMatrix::zeros(dr, dr); effects.len()];
        for s2 in 0..ds {
            for r2 in 0..dr {
                let col = &src[(s2 * dr + r2) * d..(s2 * dr + r2 + 1) * d];
                for (e, out) in effects.iter().zip(outs.iter_mut()) {
                    let dst = &mut out.as_mut_slice()[r2 * dr..(r2 + 1) * dr];
                    for s1 in 0..ds {
                        let w = e[(s2, s1)];
                        if w == c(0.0) {
                            continue;
                        }
                        for (o, x) in dst.iter_mut().zip(&col[s1 * dr..(s1 + 1) * dr]) {
                            *o += w * x;
                        }
                    }
                }
            }
        }
        outs
    }

    /// `Tr_R[(1 ⊗ Q_a)Δ]` for every `Q_a`, in one pass over `Δ`.
    fn sender_operators(&self, qs: &[CMatrix]) -> Vec<CMatrix> {
        let (ds, dr) = (self.ds, self.dr);
        let d = ds * dr;
        let src = self.delta.as_slice();
        let transposed: Vec<CMatrix> = qs.iter().map(|q| q.transpose()).collect();
        let mut outs = vec![CMatrix::zeros(ds, ds); qs.len()];
        for s2 in 0..ds {
            for r2 in 0..dr {
                let col = &src[(s2 * dr + r2) * d..(s2 * dr + r2 + 1) * d];
                for (qt, out) in transposed.iter().zip(outs.iter_mut()) {
                    let weights = &qt.as_slice()[r2 * dr..(r2 + 1) * dr];
                    for s1 in 0..ds {
                        let acc: C64 = weights.iter().zip(&col[s1 * dr..(s1 + 1) * dr]).map(|(w, x)| w * x).sum();
                        out[(s1, s2)] += acc;
                    }
                }
            }
        }
        outs
    }
}

/// Exact POVM from an approximate one: PSD parts, renormalized to sum to the identity.
fn clean_povm(effects: Vec<CMatrix>, d: usize) -> Vec<CMatrix> {
    let effects: Vec<CMatrix> = effects
        .iter()
        .map(|e| herm_function(&hermitian_part(e), |x| x.max(0.0)))
        .collect();
    let mut sum = CMatrix::zeros(d, d);
    for e in &effects {
        sum += e;
    }
    let inv_sqrt = herm_function(&sum, |x| 1.0 / x.max(1e-300).sqrt());
    effects
        .iter()
        .map(|e| hermitian_part(&(&inv_sqrt * e * &inv_sqrt)))
        .collect()
}

fn sdp_sender_update(gs: &[CMatrix], d: usize) -> Option<Vec<CMatrix>> {
    let n = gs.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for elem in sdp::hermitian_basis(d) {
        let mut entries = Vec::with_capacity(n * elem.len());
        let mut bi = 0.0;
        for &(r, col, v) in &elem {
            if r == col {
                bi += v.re;
            }
            for blk in 0..n {
                entries.push(Entry {
                    block: blk,
                    row: r,
                    col,
                    value: v,
                });
            }
        }
        a.push(entries);
        b.push(bi);
    }
    let problem = SdpProblem {
        blocks: vec![d; n],
        c: gs.iter().map(|g| -hermitian_part(g)).collect(),
        a,
        b,
    };
    let sol = sdp::solve(&problem, &SdpSettings::default()).ok()?;
    Some(clean_povm(sol.x, d))
}

/// One ascent step for rank-one projective measurements `E_a = u_a u_a†`.
fn polar_sender_update(gs: &[CMatrix], u: &CMatrix) -> CMatrix {
    let d = u.nrows();
    let shift = gs.iter().map(|g| -min_eigenvalue(&hermitian_part(g))).fold(0.0, f64::max) + 1.0;
    let mut target = CMatrix::zeros(d, d);
    for (a, g) in gs.iter().enumerate() {
        let shifted = hermitian_part(g) + CMatrix::identity(d, d) * c(shift);
        target.set_column(a, &(shifted * u.column(a)));
    }
    polar_unitary(&target)
}

fn rank_one_effects(u: &CMatrix) -> Vec<CMatrix> {
    u.column_iter().map(|v| v * v.adjoint()).collect()
}

struct OneWay {
    value: f64,
    effects: Vec<CMatrix>,
    projectors: Vec<CMatrix>,
    iterations: usize,
}

fn evaluate(blocks: &Blocks, effects: &[CMatrix]) -> (f64, Vec<CMatrix>) {
    let mut value = 0.0;
    let mut projectors = Vec::with_capacity(effects.len());
    for gamma in blocks.receiver_operators(effects) {
        let (vals, vecs) = herm_eigen(&hermitian_part(&gamma));
        value += vals.iter().map(|v| v.abs()).sum::<f64>();
        let positive: Vec<usize> = (0..vals.len()).filter(|&j| vals[j] >= 0.0).collect();
        let basis = vecs.select_columns(&positive);
        projectors.push(&basis * basis.adjoint());
    }
    (value, projectors)
}

fn optimize_from(blocks: &Blocks, start: &CMatrix, settings: &SeesawSettings) -> OneWay {
    let ds = blocks.ds;
    let use_sdp = ds <= SDP_SENDER_CAP;
    let outcomes = if use_sdp { (ds * ds).min(16).max(ds) } else { ds };
    let mut u = start.clone();
    let mut effects = rank_one_effects(&u);
    effects.resize(outcomes, CMatrix::zeros(ds, ds));
    let (mut value, mut projectors) = evaluate(blocks, &effects);
    let mut iterations = 0;
    for it in 1..=settings.iterations {
        iterations = it;
        let two_p_minus_one: Vec<CMatrix> = projectors
            .iter()
            .map(|p| p * c(2.0) - CMatrix::identity(blocks.dr, blocks.dr))
            .collect();
        let gs = blocks.sender_operators(&two_p_minus_one);
        let candidate = if use_sdp {
            match sdp_sender_update(&gs, ds) {
                Some(e) => e,
                None => break,
            }
        } else {
            u = polar_sender_update(&gs, &u);
            rank_one_effects(&u)
        };
        let (v, p) = evaluate(blocks, &candidate);
        if v <= value + settings.tolerance {
            if v > value {
                value = v;
                effects = candidate;
                projectors = p;
            }
            break;
        }
        value = v;
        effects = candidate;
        projectors = p;
    }
    OneWay {
        value,
        effects,
        projectors,
        iterations,
    }
}

fn one_way(blocks: &Blocks, settings: &SeesawSettings, rng: &mut impl Rng) -> OneWay {
    let ds = blocks.ds;
    let mut best = optimize_from(blocks, &CMatrix::identity(ds, ds), settings);
    if ds == 1 {
        return best;
    }
    for _ in 0..settings.restarts {
        let start = haar_unitary(rng, ds);
        let run = optimize_from(blocks, &start, settings);
        if run.value > best.value {
            best = run;
        }
    }
    best
}

fn sqrt_psd(e: &CMatrix) -> CMatrix {
    herm_function(e, |x| x.max(0.0).sqrt())
}

/// One-way protocol from the sender's POVM and the receiver's per-outcome projectors.
fn build_protocol(
    layout: &HilbertLayout,
    cut: &Cut,
    direction: SeesawDirection,
    effects: &[CMatrix],
    projectors: &[CMatrix],
) -> Result<LoccProtocol> {
    let (alice, bob) = cut.ordered_in(layout)?;
    let (sender_name, sender, receiver_name, receiver) = match direction {
        SeesawDirection::AliceFirst => (ALICE, alice.clone(), BOB, bob.clone()),
        SeesawDirection::BobFirst => (BOB, bob.clone(), ALICE, alice.clone()),
    };
    let ds = layout.dim_of(&sender)?;
    let dr = layout.dim_of(&receiver)?;
    let kept: Vec<usize> = (0..effects.len())
        .filter(|&a| effects[a].trace().re > 1e-13)
        .collect();
    let mut builder = LoccProtocol::builder(layout.clone())
        .party(ALICE, &alice)
        .party(BOB, &bob);
    let mut values = BTreeMap::new();
    let sender_round = !sender.is_empty();
    let receiver_round = !receiver.is_empty();
    if sender_round {
        let outcomes: Vec<Vec<CMatrix>> = kept.iter().map(|&a| vec![sqrt_psd(&effects[a])]).collect();
        let inst = Instrument::new(ds, clean_kraus(outcomes, ds))?;
        builder = builder.round(sender_name, &sender, Conditioning::Always(inst));
    }
    let outcome_labels: Vec<Vec<usize>> = if sender_round {
        (0..kept.len()).map(|o| vec![o]).collect()
    } else {
        vec![Vec::new()]
    };
    let sources: Vec<usize> = if sender_round { kept.clone() } else { vec![0] };
    if receiver_round {
        let mut map = BTreeMap::new();
        for (label, &a) in outcome_labels.iter().zip(&sources) {
            let p = projectors[a].clone();
            let q = CMatrix::identity(dr, dr) - &p;
            map.insert(label.clone(), Instrument::new(dr, vec![vec![p], vec![q]])?);
            for g in 0..2 {
                let mut t = label.clone();
                t.push(g);
                values.insert(t, g);
            }
        }
        builder = builder.round(receiver_name, &receiver, Conditioning::OnTranscript(map));
    } else {
        for (label, &a) in outcome_labels.iter().zip(&sources) {
            let guess = if projectors[a][(0, 0)].re > 0.5 { 0 } else { 1 };
            values.insert(label.clone(), guess);
        }
    }
    builder
        .classical(ClassicalOutput::Function {
            label: GUESS_REGISTER.into(),
            dim: 2,
            values,
        })
        .build()
}

/// Rescale Lüders Kraus operators so that `Σ K†K = I` holds to rounding.
fn clean_kraus(outcomes: Vec<Vec<CMatrix>>, d: usize) -> Vec<Vec<CMatrix>> {
    let mut sum = CMatrix::zeros(d, d);
    for ks in &outcomes {
        for k in ks {
            sum += k.adjoint() * k;
        }
    }
    let inv_sqrt = herm_function(&sum, |x| 1.0 / x.max(1e-300).sqrt());
    outcomes
        .into_iter()
        .map(|ks| ks.into_iter().map(|k| k * &inv_sqrt).collect())
        .collect()
}

/// Seesaw lower bound on the LOCC distinguishability of `ρ` and `σ` across `cut`.
pub fn dist_locc_seesaw(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    cut: &Cut,
    settings: &SeesawSettings,
) -> Result<SeesawResult> {
    dist_locc_seesaw_operator(&difference(rho, sigma)?, cut, settings)
}

/// Seesaw over both one-way directions for a traceless Hermitian `Δ`.
pub fn dist_locc_seesaw_operator(delta: &DenseOperator, cut: &Cut, settings: &SeesawSettings) -> Result<SeesawResult> {
    let (alice, bob) = cut.ordered_in(delta.layout())?;
    let mut best: Option<SeesawResult> = None;
    for (salt, direction) in [(0u64, SeesawDirection::AliceFirst), (1, SeesawDirection::BobFirst)] {
        let (first, second) = match direction {
            SeesawDirection::AliceFirst => (&alice, &bob),
            SeesawDirection::BobFirst => (&bob, &alice),
        };
        let (reduced, ds, dr) = cut.restrict(delta, first, second)?;
        let mat = hermitian_part(reduced.matrix());
        let blocks = Blocks { delta: &mat, ds, dr };
        let mut rng = seeded(settings.seed.wrapping_mul(2).wrapping_add(salt));
        let run = one_way(&blocks, settings, &mut rng);
        if best.as_ref().is_some_and(|b| b.value >= run.value) {
            continue;
        }
        let protocol = build_protocol(delta.layout(), cut, direction, &run.effects, &run.projectors)?;
        best = Some(SeesawResult {
            value: run.value,
            direction,
            protocol,
            iterations: run.iterations,
        });
    }
    Ok(best.expect("two directions were tried"))
}

/// The best seesaw protocol over several state pairs on a common layout.
pub fn best_seesaw_attack(
    pairs: &[(DensityOperator, DensityOperator)],
    cut: &Cut,
    settings: &SeesawSettings,
) -> Result<SeesawResult> {
    let mut best: Option<SeesawResult> = None;
    for (rho, sigma) in pairs {
        let run = dist_locc_seesaw(rho, sigma, cut, settings)?;
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    best.ok_or_else(|| crate::Error::Domain("no state pairs to attack".into()))
}

/// A random one-way protocol: Haar-random projective measurement by the sender, random
/// projectors by the receiver.
pub fn random_one_way_attack(
    layout: &HilbertLayout,
    cut: &Cut,
    direction: SeesawDirection,
    rng: &mut impl Rng,
) -> Result<LoccProtocol> {
    let (alice, bob) = cut.ordered_in(layout)?;
    let (sender, receiver) = match direction {
        SeesawDirection::AliceFirst => (&alice, &bob),
        SeesawDirection::BobFirst => (&bob, &alice),
    };
    let ds = layout.dim_of(sender)?;
    let dr = layout.dim_of(receiver)?;
    let effects = rank_one_effects(&haar_unitary(rng, ds));
    let projectors: Vec<CMatrix> = (0..ds)
        .map(|_| {
            let rank = rng.random_range(0..=dr);
            crate::random::random_projector(rng, dr, rank)
        })
        .collect();
    build_protocol(layout, cut, direction, &effects, &projectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::PureState;

    #[test]
    fn product_states_are_perfectly_distinguished() {
        let layout = HilbertLayout::new([("a", 2), ("b", 2)]).unwrap();
        let s00 = PureState::basis(layout.clone(), 0).unwrap().projector();
        let s11 = PureState::basis(layout, 3).unwrap().projector();
        let cut = Cut::new(&["a"], &["b"]).unwrap();
        let res = dist_locc_seesaw(&s00, &s11, &cut, &SeesawSettings::default()).unwrap();
        assert!((res.value - 2.0).abs() < 1e-9);
        let out0 = res.protocol.apply_operator(s00.as_op()).unwrap();
        let out1 = res.protocol.apply_operator(s11.as_op()).unwrap();
        let achieved = out0.checked_sub(&out1).unwrap().trace_norm();
        assert!((achieved - res.value).abs() < 1e-9);
    }

    #[test]
    fn equal_states_give_zero() {
        let cs = crate::bit_hiding::werner_pair(2).unwrap();
        let rho = cs.state(0).unwrap();
        let res = dist_locc_seesaw(&rho, &rho, &Cut::of_scheme(&cs), &SeesawSettings::default()).unwrap();
        assert!(res.value.abs() < 1e-12);
    }

    #[test]
    fn werner_seesaw_value_is_achieved_by_its_protocol() {
        let cs = crate::bit_hiding::werner_pair(3).unwrap();
        let (r0, r1) = (cs.state(0).unwrap(), cs.state(1).unwrap());
        let res = dist_locc_seesaw(&r0, &r1, &Cut::of_scheme(&cs), &SeesawSettings::default()).unwrap();
        let d = res
            .protocol
            .apply_operator(r0.as_op())
            .unwrap()
            .checked_sub(&res.protocol.apply_operator(r1.as_op()).unwrap())
            .unwrap()
            .trace_norm();
        assert!((d - res.value).abs() < 1e-9);
        assert!(res.value <= 4.0 / 4.0 + 1e-6);
    }
}
