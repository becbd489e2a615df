//! Independent oracles and frozen values for the core constructions.

use qhide_core::bit_hiding::{werner_pair, SchemeSelector};
use qhide_core::dual_hiding::qubits_from_bits;
use qhide_core::operators::linalg::{max_abs_diff, trace_norm_matrix};
use qhide_core::operators::{max_entangled, HilbertLayout};
use qhide_core::pauli::{pm_decomposition, PauliString};
use qhide_core::random::{ginibre, haar_unitary, random_density, seeded};
use qhide_core::security::{dist_ppt, werner_ppt_lp, Cut};
use qhide_core::{CMatrix, C64};

#[test]
fn trace_norm_matches_singular_values() {
    let mut rng = seeded(1);
    for _ in 0..20 {
        let a = ginibre(&mut rng, 4, 4);
        let oracle: f64 = a.clone().svd(false, false).singular_values.iter().sum();
        assert!((trace_norm_matrix(&a).unwrap() - oracle).abs() < 1e-10);
    }
}

/// `Tr_A Tr_B ρ` by explicit index summation on `C^2 ⊗ C^3 ⊗ C^2`.
#[test]
fn nested_partial_traces_match_index_summation() {
    let (da, db, dc) = (2, 3, 2);
    let layout = HilbertLayout::new([("a", da), ("b", db), ("c", dc)]).unwrap();
    let rho = random_density(&mut seeded(2), layout, 5);
    let nested = rho.partial_trace(&["a", "c"]).unwrap().partial_trace(&["c"]).unwrap();
    let at = |a: usize, b: usize, c: usize| (a * db + b) * dc + c;
    let mut oracle = CMatrix::zeros(dc, dc);
    for i in 0..dc {
        for j in 0..dc {
            for a in 0..da {
                for b in 0..db {
                    oracle[(i, j)] += rho.matrix()[(at(a, b, i), at(a, b, j))];
                }
            }
        }
    }
    assert!(max_abs_diff(nested.matrix(), &oracle) < 1e-12);
    let direct = rho.partial_trace(&["c"]).unwrap();
    assert!(max_abs_diff(direct.matrix(), &oracle) < 1e-12);
}

#[test]
fn max_entangled_is_invariant_under_u_tensor_conjugate_u() {
    let phi = max_entangled(4).unwrap();
    let u = haar_unitary(&mut seeded(3), 4);
    let rotated = u.kronecker(&u.conjugate()) * phi.amplitudes();
    let overlap = phi.amplitudes().dotc(&rotated);
    assert!((overlap - C64::new(1.0, 0.0)).norm() < 1e-10);
}

#[test]
fn pm_split_of_x_on_first_qubit_uses_product_eigenvectors() {
    let x = "XI".parse::<PauliString>().unwrap();
    let pm = pm_decomposition(&x).unwrap();
    let plus = CMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5].map(|v| C64::new(v, 0.0)));
    let minus = CMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5].map(|v| C64::new(v, 0.0)));
    let half_identity = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
    assert!(max_abs_diff(pm.plus.matrix(), &plus.kronecker(&half_identity)) < 1e-12);
    assert!(max_abs_diff(pm.minus.matrix(), &minus.kronecker(&half_identity)) < 1e-12);
}

#[test]
fn werner_ppt_values_are_frozen() {
    for (d, frozen) in [(2, 4.0 / 3.0), (3, 1.0), (4, 0.8)] {
        let cs = werner_pair(d).unwrap();
        let bound = dist_ppt(&cs.state(0).unwrap(), &cs.state(1).unwrap(), &Cut::of_scheme(&cs)).unwrap();
        assert!((bound.upper - frozen).abs() < 1e-6, "d={d}: {}", bound.upper);
        assert!(bound.gap() < 1e-6);
    }
    // Tensor pairs differing in one or both factors.
    assert!((werner_ppt_lp(&[2, 2], 0, 3).unwrap() - 16.0 / 9.0).abs() < 1e-9);
    assert!((werner_ppt_lp(&[2, 2], 0, 1).unwrap() - 4.0 / 3.0).abs() < 1e-9);
}

#[test]
fn qubit_scheme_from_werner_core_round_trips() {
    let core = SchemeSelector::werner_power(2, 2).build().unwrap();
    let qs = qubits_from_bits(&core).unwrap();
    assert!((qs.process_fidelity().unwrap() - 1.0).abs() < 1e-9);
    let encoded = qs.encode(&random_density(&mut seeded(4), qs.input_layout().clone(), 2)).unwrap();
    assert!((encoded.as_op().trace().re - 1.0).abs() < 1e-10);
}
