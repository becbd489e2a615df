use proptest::prelude::*;

use qhide_core::multiparty::AccessStructure;
use qhide_core::operators::linalg::{max_abs_diff, trace_norm_matrix};
use qhide_core::operators::{
    entropy_of, max_entangled, mutual_information, ricochet, DenseOperator, DensityOperator, HilbertLayout,
};
use qhide_core::pauli::{from_pauli_coefficients, pauli_coefficients_complex, twirl, PauliIndex};
use qhide_core::random::{haar_unitary, random_density, random_hermitian, seeded};
use qhide_core::security::werner_ppt_lp;
use qhide_core::{CMatrix, C64};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

fn bipartite(d1: usize, d2: usize) -> HilbertLayout {
    HilbertLayout::new([("a", d1), ("b", d2)]).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn pauli_product_matches_matrices(n in 1usize..=3, a in any::<usize>(), b in any::<usize>()) {
        let count = 1usize << (2 * n);
        let left = PauliIndex::new(n, a % count).unwrap().string();
        let right = PauliIndex::new(n, b % count).unwrap().string();
        let product = left.mul(&right).unwrap();
        let direct = left.to_matrix() * right.to_matrix();
        prop_assert!(max_abs_diff(&product.to_matrix(), &direct) < 1e-12);

        let swapped = right.to_matrix() * left.to_matrix();
        let commute = max_abs_diff(&direct, &swapped) < 1e-12;
        prop_assert_eq!(left.commutes_with(&right), commute);
    }

    #[test]
    fn twirl_erases_every_state(n in 1usize..=2, rank in 1usize..=4, seed in any::<u64>()) {
        let d = 1usize << n;
        let layout = HilbertLayout::single("q", d).unwrap();
        let rho = random_density(&mut seeded(seed), layout, rank.min(d));
        let mixed = CMatrix::identity(d, d) / C64::new(d as f64, 0.0);
        prop_assert!(max_abs_diff(twirl(&rho).unwrap().matrix(), &mixed) < 1e-12);
    }

    #[test]
    fn pauli_coefficients_round_trip(n in 1usize..=2, seed in any::<u64>()) {
        let d = 1usize << n;
        let layout = HilbertLayout::single("q", d).unwrap();
        let mut rng = seeded(seed);
        let a = random_hermitian(&mut rng, d) + haar_unitary(&mut rng, d);
        let op = DenseOperator::new(layout.clone(), a.clone()).unwrap();
        let coeffs = pauli_coefficients_complex(&op).unwrap();
        let rebuilt = from_pauli_coefficients(layout, &coeffs).unwrap();
        prop_assert!(max_abs_diff(rebuilt.matrix(), &a) < 1e-10);
    }

    #[test]
    fn ricochet_reproduces_the_input(d in 2usize..=4, rank in 1usize..=4, seed in any::<u64>()) {
        let layout = HilbertLayout::single("right", d).unwrap();
        let rho = random_density(&mut seeded(seed), layout, rank.min(d));
        let phi = max_entangled(d).unwrap();
        let out = ricochet(&rho, &phi).unwrap();
        prop_assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-10);
    }

    #[test]
    fn trace_norm_inequalities(d1 in 2usize..=3, d2 in 2usize..=3, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let d = d1 * d2;
        let a = random_hermitian(&mut rng, d);
        let b = random_hermitian(&mut rng, d);
        let u = haar_unitary(&mut rng, d);
        let na = trace_norm_matrix(&a).unwrap();
        let nb = trace_norm_matrix(&b).unwrap();
        prop_assert!(trace_norm_matrix(&(&a + &b)).unwrap() <= na + nb + 1e-10);
        let rotated = &u * &a * u.adjoint();
        prop_assert!((trace_norm_matrix(&rotated).unwrap() - na).abs() < 1e-9);
        let reduced = DenseOperator::new(bipartite(d1, d2), a).unwrap().partial_trace(&["b"]).unwrap();
        prop_assert!(reduced.trace_norm() <= na + 1e-10);
    }

    #[test]
    fn entropies_are_subadditive(d1 in 2usize..=3, d2 in 2usize..=3, rank in 1usize..=9, seed in any::<u64>()) {
        let rho = random_density(&mut seeded(seed), bipartite(d1, d2), rank.min(d1 * d2));
        let joint = entropy_of(&rho, &["a", "b"]).unwrap();
        let left = entropy_of(&rho, &["a"]).unwrap();
        let right = entropy_of(&rho, &["b"]).unwrap();
        prop_assert!(joint <= left + right + 1e-9);
        prop_assert!((left - right).abs() <= joint + 1e-9);
        prop_assert!(mutual_information(&rho, &["a"], &["b"]).unwrap() >= -1e-9);
    }

    #[test]
    fn partial_trace_undoes_tensor(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let left = random_density(&mut rng, HilbertLayout::single("a", 3).unwrap(), 2);
        let right = random_density(&mut rng, HilbertLayout::single("b", 2).unwrap(), 1);
        let joint = left.tensor(&right).unwrap();
        prop_assert!(max_abs_diff(joint.partial_trace(&["a"]).unwrap().matrix(), left.matrix()) < 1e-12);
        prop_assert!(max_abs_diff(joint.partial_trace(&["b"]).unwrap().matrix(), right.matrix()) < 1e-12);
    }

    #[test]
    fn access_structures_are_monotone(
        p in 2usize..=5,
        raw in prop::collection::vec(prop::collection::vec(1usize..=5, 1..=3), 1..=3),
    ) {
        let generators: Vec<Vec<usize>> = raw
            .into_iter()
            .map(|g| { let mut g: Vec<usize> = g.into_iter().map(|x| (x - 1) % p + 1).collect(); g.sort(); g.dedup(); g })
            .collect();
        let access = AccessStructure::generated(p, &generators);
        prop_assume!(access.is_ok());
        let access = access.unwrap();
        for set in access.minimal_sets() {
            let mut grown = set.parties();
            for extra in 1..=p {
                if !grown.contains(&extra) {
                    grown.push(extra);
                    prop_assert!(access.is_authorized(&grown).unwrap());
                }
            }
        }
        for set in access.maximal_unauthorized() {
            let parties = set.parties();
            prop_assert!(!access.is_authorized(&parties).unwrap());
            for extra in (1..=p).filter(|x| !parties.contains(x)) {
                let mut grown = parties.clone();
                grown.push(extra);
                prop_assert!(access.is_authorized(&grown).unwrap());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn werner_lp_is_a_trace_distance(dims in prop::collection::vec(2usize..=4, 1..=2), i in 0usize..4, j in 0usize..4) {
        let count = 1usize << dims.len();
        let (i, j) = (i % count, j % count);
        let value = werner_ppt_lp(&dims, i, j).unwrap();
        prop_assert!((-1e-12..=2.0 + 1e-12).contains(&value));
        if i == j {
            prop_assert!(value.abs() < 1e-9);
        }
        let swapped = werner_ppt_lp(&dims, j, i).unwrap();
        prop_assert!((value - swapped).abs() < 1e-9);
    }
}

#[test]
fn maximally_mixed_state_has_full_entropy() {
    let rho = DensityOperator::maximally_mixed(bipartite(2, 3));
    let s = entropy_of(&rho, &["a", "b"]).unwrap();
    assert!((s - 6f64.log2()).abs() < 1e-12);
}
