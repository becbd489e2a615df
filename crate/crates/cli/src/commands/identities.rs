//! The algebraic identity suite and the trace-norm property sweep.

use qhide_core::operators::linalg::{max_abs_diff, trace_norm_matrix};
use qhide_core::operators::{max_entangled, ricochet, DenseOperator, DensityOperator, HilbertLayout};
use qhide_core::pauli::{phi_pauli_expansion, pm_decomposition, twirl, PauliIndex};
use qhide_core::random::{pure_test_set, random_density, random_hermitian, random_projector, seeded};
use qhide_core::{CMatrix, C64};
use rand::Rng;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{Check, Entry, RunReport};

/// Mixed states added to the pure test set.
const MIXED_TEST_STATES: usize = 4;

fn test_states(n: usize, seed: u64) -> Result<Vec<DensityOperator>> {
    let d = 1usize << n;
    let layout = HilbertLayout::single("right", d)?;
    let mut states: Vec<DensityOperator> = pure_test_set(&layout, seed)?.iter().map(|p| p.projector()).collect();
    let mut rng = seeded(seed ^ 0x5eed);
    for rank in 1..=MIXED_TEST_STATES {
        states.push(random_density(&mut rng, layout.clone(), rank.min(d)));
    }
    Ok(states)
}

/// Worst deviations of the identities at `n` qubits; each is compared with `tol`.
pub fn identity_checks(n: usize, seed: u64, tol: f64) -> Result<Vec<Check>> {
    let d = 1usize << n;
    let states = test_states(n, seed)?;
    let phi = max_entangled(d)?;
    let maximally_mixed = CMatrix::identity(d, d) / C64::new(d as f64, 0.0);

    let mut ricochet_dev = 0.0f64;
    let mut twirl_dev = 0.0f64;
    for rho in &states {
        ricochet_dev = ricochet_dev.max(max_abs_diff(ricochet(rho, &phi)?.matrix(), rho.matrix()));
        twirl_dev = twirl_dev.max(max_abs_diff(twirl(rho)?.matrix(), &maximally_mixed));
    }

    let expansion_dev = max_abs_diff(phi_pauli_expansion(n)?.matrix(), phi.projector().matrix());

    let eye = CMatrix::identity(d, d);
    let mut bell_dev = 0.0f64;
    let mut pm_dev = 0.0f64;
    for idx in PauliIndex::all(n)? {
        let s = idx.string();
        let m = s.to_matrix();
        let right = eye.kronecker(&m) * phi.amplitudes();
        let left = m.kronecker(&eye) * phi.amplitudes() * C64::new(s.transpose_sign(), 0.0);
        bell_dev = bell_dev.max((right - left).iter().map(|z| z.norm()).fold(0.0, f64::max));
        if !s.is_identity() {
            let pm = pm_decomposition(&s)?;
            let rebuilt = (pm.plus.matrix() - pm.minus.matrix()) * C64::new((d / 2) as f64, 0.0);
            pm_dev = pm_dev.max(max_abs_diff(&rebuilt, &m));
        }
    }

    Ok(vec![
        Check::le(format!("n={n}/ricochet"), ricochet_dev, tol),
        Check::le(format!("n={n}/twirl"), twirl_dev, tol),
        Check::le(format!("n={n}/phi-pauli-expansion"), expansion_dev, tol),
        Check::le(format!("n={n}/bell-ricochet-sign"), bell_dev, tol),
        Check::le(format!("n={n}/pm-reconstruction"), pm_dev, tol),
    ])
}

/// Largest excess of each trace-norm inequality over `instances` random operators on
/// `C^{d1} ⊗ C^{d2}` with `d1, d2 ∈ {2, 3}`; violations count excesses above `tol`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NormSweep {
    pub instances: usize,
    pub projection_excess: f64,
    pub subadditivity_excess: f64,
    pub partial_trace_excess: f64,
    pub violations: usize,
}

pub fn norm_sweep(instances: usize, seed: u64, tol: f64) -> Result<NormSweep> {
    let mut rng = seeded(seed);
    let mut sweep = NormSweep {
        instances,
        projection_excess: f64::NEG_INFINITY,
        subadditivity_excess: f64::NEG_INFINITY,
        partial_trace_excess: f64::NEG_INFINITY,
        violations: 0,
    };
    for _ in 0..instances {
        let (d1, d2) = (rng.random_range(2..=3usize), rng.random_range(2..=3usize));
        let d = d1 * d2;
        let a = random_hermitian(&mut rng, d);
        let b = random_hermitian(&mut rng, d);
        let rank = rng.random_range(1..=d);
        let p = random_projector(&mut rng, d, rank);
        let norm_a = trace_norm_matrix(&a)?;

        let projection = trace_norm_matrix(&(&p * &a))? - norm_a;
        let subadditivity = trace_norm_matrix(&(&a + &b))? - norm_a - trace_norm_matrix(&b)?;
        let layout = HilbertLayout::new([("a", d1), ("b", d2)])?;
        let reduced = DenseOperator::new(layout, a)?.partial_trace(&["a"])?;
        let partial = reduced.trace_norm() - norm_a;

        for excess in [projection, subadditivity, partial] {
            sweep.violations += usize::from(excess > tol);
        }
        sweep.projection_excess = sweep.projection_excess.max(projection);
        sweep.subadditivity_excess = sweep.subadditivity_excess.max(subadditivity);
        sweep.partial_trace_excess = sweep.partial_trace_excess.max(partial);
    }
    Ok(sweep)
}

pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    let seed = config.seed()?;
    let tol = config.tolerance()?;
    let mut checks = Vec::new();
    for n in config.usize_list("n")? {
        if n == 0 || n > 2 {
            return Err(crate::error::CliError::Usage(format!("identity suite runs at n in {{1, 2}}, got {n}")));
        }
        checks.extend(identity_checks(n, seed, tol)?);
    }
    let norms = norm_sweep(config.usize("instances")?, seed, tol)?;
    checks.push(Check::le("norms/projection-contraction", norms.projection_excess, tol));
    checks.push(Check::le("norms/subadditivity", norms.subadditivity_excess, tol));
    checks.push(Check::le("norms/partial-trace-monotonicity", norms.partial_trace_excess, tol));
    let entries = vec![Entry::exact("norms/violations", norms.violations as f64)];
    Ok(RunReport::new(config, checks, entries, json!({ "norms": norms })))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_hold_at_one_qubit() {
        assert!(identity_checks(1, 42, 1e-10).unwrap().iter().all(|c| c.passed));
    }

    #[test]
    fn below_float_precision_fails() {
        let checks = identity_checks(2, 42, 1e-18).unwrap();
        assert!(checks.iter().any(|c| !c.passed));
    }

    #[test]
    fn norm_sweep_has_no_violations() {
        let sweep = norm_sweep(50, 3, 1e-10).unwrap();
        assert_eq!(sweep.violations, 0);
        assert!(sweep.partial_trace_excess <= 1e-10);
    }
}
