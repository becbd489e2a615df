//! Seeded samplers for states, unitaries and test sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operators::{DenseOperator, DensityOperator, HilbertLayout, PureState};
use crate::{c, CMatrix, CVector, Error, Result, C64};

/// The crate's deterministic generator.
pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random pure state.
pub fn haar_state(rng: &mut impl Rng, layout: HilbertLayout) -> PureState {
    let v = CVector::from_fn(layout.dim(), |_, _| gaussian(rng));
    PureState::normalized(layout, v).expect("Gaussian vectors are non-zero")
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase of `R`'s diagonal removed).
pub fn haar_unitary(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let qr = ginibre(rng, dim, dim).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        let mut col = q.column_mut(j);
        col *= ph;
    }
    q
}

/// Random density operator `G G† / Tr(G G†)` with `G` of shape `d × rank`.
pub fn random_density(rng: &mut impl Rng, layout: HilbertLayout, rank: usize) -> DensityOperator {
    let g = ginibre(rng, layout.dim(), rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(DenseOperator::new(layout, m / c(tr)).expect("square"))
        .expect("Wishart matrices are density operators after normalization")
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let g = ginibre(rng, dim, dim);
    (&g + g.adjoint()) * c(0.5)
}

/// Random orthogonal projector of the given rank.
pub fn random_projector(rng: &mut impl Rng, dim: usize, rank: usize) -> CMatrix {
    let u = haar_unitary(rng, dim);
    let v = u.columns(0, rank.min(dim));
    v * v.adjoint()
}

/// The six single-qubit Pauli eigenstates `|±x⟩, |±y⟩, |±z⟩` as amplitude pairs.
pub fn pauli_eigenstates() -> [[C64; 2]; 6] {
    let s = 1.0 / 2f64.sqrt();
    [
        [c(s), c(s)],
        [c(s), c(-s)],
        [c(s), C64::new(0.0, s)],
        [c(s), C64::new(0.0, -s)],
        [c(1.0), c(0.0)],
        [c(0.0), c(1.0)],
    ]
}

/// Number of Haar-random states in [`pure_test_set`].
pub const HAAR_TEST_STATES: usize = 20;

/// Six axis states `|±a⟩^{⊗n}` followed by 20 Haar-random states on a `2^n`-dimensional layout.
pub fn pure_test_set(layout: &HilbertLayout, seed: u64) -> Result<Vec<PureState>> {
    let d = layout.dim();
    if !d.is_power_of_two() || d < 2 {
        return Err(Error::Shape(format!("test states need 2^n dimensions, got {d}")));
    }
    let n = d.trailing_zeros() as usize;
    let mut out = Vec::with_capacity(6 + HAAR_TEST_STATES);
    for amps in pauli_eigenstates() {
        let single = CVector::from_vec(amps.to_vec());
        let v = (1..n).fold(single.clone(), |acc, _| acc.kronecker(&single));
        out.push(PureState::new(layout.clone(), v)?);
    }
    let mut rng = seeded(seed);
    for _ in 0..HAAR_TEST_STATES {
        out.push(haar_state(&mut rng, layout.clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::linalg::max_abs_diff;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = seeded(7);
        let u = haar_unitary(&mut rng, 5);
        assert!(max_abs_diff(&(u.adjoint() * &u), &CMatrix::identity(5, 5)) < 1e-12);
    }

    #[test]
    fn test_set_is_deterministic() {
        let l = HilbertLayout::single("q", 2).unwrap();
        let a = pure_test_set(&l, 3).unwrap();
        let b = pure_test_set(&l, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 26);
    }
}
