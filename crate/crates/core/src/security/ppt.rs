//! PPT relaxation: certified upper bounds on LOCC distinguishability.
//!
//! `max 2 Tr(M Δ)` over `0 ⪯ M ⪯ I` with `0 ⪯ M^Γ ⪯ I` (partial transpose on Bob). The
//! two-outcome restriction loses nothing for binary discrimination.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;

use super::sdp::{self, Entry, SdpProblem, SdpSettings, SolverDiagnostics};
use super::{difference, Cut};
use crate::bit_hiding::{BitHidingScheme, Certificate, CertificateKind};
use crate::dual_hiding::QubitHidingScheme;
use crate::operators::linalg::{herm_function, hermitian_part, min_eigenvalue, real_inner};
use crate::operators::{DenseOperator, DensityOperator};
use crate::pauli::{pm_decomposition_on, PauliIndex};
use crate::{c, CMatrix, Error, Result};

/// Largest `d_A · d_B` accepted by the dense PPT SDP.
pub const PPT_DIM_CAP: usize = 64;

/// Certified bracket on the PPT value of one instance.
#[derive(Debug, Clone)]
pub struct PptBound {
    /// Objective of an exactly feasible dual point.
    pub upper: f64,
    /// `2 Tr(M Δ)` for an exactly feasible PPT measurement `M`.
    pub lower: f64,
    pub diagnostics: SolverDiagnostics,
    /// The measurement achieving `lower`, on Alice ⊗ Bob.
    pub witness: CMatrix,
}

impl PptBound {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

fn transposed_index(r: usize, col: usize, db: usize) -> (usize, usize) {
    let (ra, rb) = (r / db, r % db);
    let (ca, cb) = (col / db, col % db);
    (ra * db + cb, ca * db + rb)
}

fn partial_transpose(m: &CMatrix, db: usize) -> CMatrix {
    let d = m.nrows();
    let mut out = CMatrix::zeros(d, d);
    for r in 0..d {
        for col in 0..d {
            let (r2, c2) = transposed_index(r, col, db);
            out[(r2, c2)] = m[(r, col)];
        }
    }
    out
}

fn psd_part(m: &CMatrix) -> CMatrix {
    herm_function(m, |x| x.max(0.0))
}

/// PPT distinguishability of `ρ` and `σ` across `cut`.
pub fn dist_ppt(rho: &DensityOperator, sigma: &DensityOperator, cut: &Cut) -> Result<PptBound> {
    dist_ppt_operator(&difference(rho, sigma)?, cut)
}

/// `max 2 Tr(M Δ)` over PPT two-outcome measurements, for traceless Hermitian `Δ`.
pub fn dist_ppt_operator(delta: &DenseOperator, cut: &Cut) -> Result<PptBound> {
    let (alice, bob) = cut.ordered_in(delta.layout())?;
    let (reduced, _, db) = cut.restrict(delta, &alice, &bob)?;
    let dim = reduced.dim();
    if dim > PPT_DIM_CAP {
        return Err(Error::Capacity { dim, cap: PPT_DIM_CAP });
    }
    let delta = hermitian_part(reduced.matrix());
    let quiet = SolverDiagnostics {
        iterations: 0,
        primal_infeasibility: 0.0,
        dual_infeasibility: 0.0,
        relative_gap: 0.0,
        converged: true,
    };
    let half = CMatrix::identity(dim, dim) * c(0.5);
    if crate::operators::linalg::max_abs(&delta) < 1e-14 {
        return Ok(PptBound {
            upper: 0.0,
            lower: 0.0,
            diagnostics: quiet,
            witness: half,
        });
    }

    let eye = CMatrix::identity(dim, dim);
    let zero = CMatrix::zeros(dim, dim);
    let basis = sdp::hermitian_basis(dim);
    let mut a = Vec::with_capacity(basis.len());
    let mut b = Vec::with_capacity(basis.len());
    for elem in &basis {
        let mut entries = Vec::with_capacity(4 * elem.len());
        let mut bi = 0.0;
        for &(r, col, v) in elem {
            let (rt, ct) = transposed_index(r, col, db);
            entries.push(Entry { block: 0, row: r, col, value: -v });
            entries.push(Entry { block: 1, row: r, col, value: v });
            entries.push(Entry { block: 2, row: rt, col: ct, value: -v });
            entries.push(Entry { block: 3, row: rt, col: ct, value: v });
            bi += 2.0 * (v * delta[(col, r)]).re;
        }
        a.push(entries);
        b.push(bi);
    }
    let problem = SdpProblem {
        blocks: vec![dim; 4],
        c: vec![zero.clone(), eye.clone(), zero, eye.clone()],
        a,
        b,
    };
    let sol = sdp::solve(&problem, &SdpSettings::default())?;

    // Upper certificate: repair X to exact primal feasibility.
    let mut x: Vec<CMatrix> = sol.x.iter().map(psd_part).collect();
    let lhs = &x[1] - &x[0] - partial_transpose(&x[2], db) + partial_transpose(&x[3], db);
    let residual = hermitian_part(&(&delta * c(2.0) - lhs));
    x[1] += psd_part(&residual);
    x[0] += psd_part(&(-&residual));
    let upper = x[1].trace().re + x[3].trace().re;

    // Lower certificate: shrink the dual point toward I/2 until all four blocks are PSD.
    let m = hermitian_part(&sdp::from_basis_coordinates(dim, sol.y.as_slice()));
    let mt = partial_transpose(&m, db);
    let mins = [
        min_eigenvalue(&m),
        min_eigenvalue(&(&eye - &m)),
        min_eigenvalue(&mt),
        min_eigenvalue(&(&eye - &mt)),
    ];
    let t = mins
        .iter()
        .map(|&lam| if lam < 0.0 { -lam / (0.5 - lam) } else { 0.0 })
        .fold(0.0f64, f64::max);
    let shrunk = &m * c(1.0 - t) + &half * c(t);
    let value = 2.0 * real_inner(&shrunk, &delta);
    let (lower, witness) = if value > 0.0 { (value, shrunk) } else { (0.0, half) };

    Ok(PptBound {
        upper: upper.max(lower),
        lower,
        diagnostics: sol.diagnostics,
        witness,
    })
}

/// PPT distinguishability of Werner tensor states `ρ_I`, `ρ_J` by symmetry reduction.
///
/// With factors `d_1, …, d_k`, the optimal `M` is a combination `Σ_x m_x ⊗_j P_{x_j}` of
/// symmetric/antisymmetric projectors. Its partial transpose is diagonal in the sectors
/// `⊗_j {Φ_j, 1 − Φ_j}`, which makes the problem a linear program in the `2^k` weights.
pub fn werner_ppt_lp(dims: &[usize], i: usize, j: usize) -> Result<f64> {
    let k = dims.len();
    if k == 0 || dims.iter().any(|&d| d < 2) {
        return Err(Error::Domain("Werner factors need dimension at least 2".into()));
    }
    let n = 1usize << k;
    if i >= n || j >= n {
        return Err(Error::Domain(format!("index out of range for {k} factors")));
    }
    let bit = |x: usize, f: usize| (x >> (k - 1 - f)) & 1;
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..n)
        .map(|x| {
            let obj = 2.0 * ((x == i) as u8 as f64 - (x == j) as u8 as f64);
            lp.add_var(obj, (0.0, 1.0))
        })
        .collect();
    for sector in 0..n {
        let row: Vec<_> = (0..n)
            .map(|x| {
                let coeff: f64 = (0..k)
                    .map(|f| {
                        let d = dims[f] as f64;
                        match (bit(x, f), bit(sector, f)) {
                            (0, 0) => (1.0 + d) / 2.0,
                            (1, 0) => (1.0 - d) / 2.0,
                            _ => 0.5,
                        }
                    })
                    .product();
                (vars[x], coeff)
            })
            .collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Le, 1.0);
        lp.add_constraint(row.as_slice(), ComparisonOp::Ge, 0.0);
    }
    let sol = lp.solve().map_err(|e| Error::Solver {
        message: format!("symmetric LP failed: {e}"),
        iterations: 0,
        primal_infeasibility: f64::NAN,
        dual_infeasibility: f64::NAN,
        gap: f64::NAN,
    })?;
    Ok(sol.objective())
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Certified `ε̂`: the largest pairwise PPT distinguishability of the hidden states.
///
/// Werner tensor schemes use the symmetric LP; other schemes the PPT SDP. The oracle is
/// reported as such and never as a certified bound.
pub fn certify_scheme(cs: &BitHidingScheme) -> Result<Certificate> {
    if cs.is_oracle() {
        return Ok(Certificate::oracle());
    }
    let all = pairs(cs.num_states());
    if let Some(dims) = cs.werner_dims() {
        // The LP is invariant under permuting factors, so pairs reduce to sorted
        // per-factor patterns (d, i_f, j_f).
        let k = dims.len();
        let mut patterns: Vec<Vec<(usize, usize, usize)>> = all
            .iter()
            .map(|&(i, j)| {
                let mut p: Vec<_> = (0..k)
                    .map(|f| (dims[f], (i >> (k - 1 - f)) & 1, (j >> (k - 1 - f)) & 1))
                    .collect();
                p.sort_unstable();
                p
            })
            .collect();
        patterns.sort_unstable();
        patterns.dedup();
        let values = patterns
            .par_iter()
            .map(|p| {
                let dims: Vec<usize> = p.iter().map(|t| t.0).collect();
                let i = p.iter().fold(0, |acc, t| acc << 1 | t.1);
                let j = p.iter().fold(0, |acc, t| acc << 1 | t.2);
                werner_ppt_lp(&dims, i, j)
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(Certificate {
            value: values.into_iter().fold(0.0, f64::max),
            kind: CertificateKind::CertifiedUpper,
            method: "ppt-lp-symmetric".into(),
        });
    }
    let cut = Cut::of_scheme(cs);
    let dim = cs.layout().dim_of(&cut.alice)? * cs.layout().dim_of(&cut.bob)?;
    if dim > PPT_DIM_CAP {
        return match cs.eps_certificate() {
            Some(cert) => Ok(cert.clone()),
            None => Err(Error::Capacity { dim, cap: PPT_DIM_CAP }),
        };
    }
    let states = cs.states()?;
    let values = all
        .par_iter()
        .map(|&(i, j)| dist_ppt(&states[i], &states[j], &cut).map(|b| b.upper))
        .collect::<Result<Vec<_>>>()?;
    Ok(Certificate {
        value: values.into_iter().fold(0.0, f64::max).min(2.0),
        kind: CertificateKind::CertifiedUpper,
        method: "ppt-sdp".into(),
    })
}

/// Certified `δ̂_upper` for a qubit scheme: the smallest of
/// * the trivial 2,
/// * `2^{n+1} ε̂` of the bit core,
/// * `√(2^n / 2) · (Σ_{M≠0} D_M²)^{1/2}` with `D_M` the PPT distance between the encodings
///   of the ± eigenspaces of `σ_M` (pure-state differences have Pauli weight `Σ x_M² ≤ 2^{n+1}`).
pub fn certify_qubit_scheme(qs: &QubitHidingScheme) -> Result<Certificate> {
    if let Some(cert) = qs.delta_certificate() {
        if cert.kind == CertificateKind::OraclePerfect {
            return Ok(cert.clone());
        }
    }
    let n = qs.n();
    let mut best = 2.0;
    let mut method = String::from("trace-distance ceiling");
    if let Some(cert) = qs.delta_certificate().filter(|c| c.kind == CertificateKind::CertifiedUpper) {
        if cert.value < best {
            best = cert.value;
            method = cert.method.clone();
        }
    }
    if let Some(core) = qs.core() {
        let eps = certify_scheme(core)?;
        if eps.kind != CertificateKind::Heuristic {
            let v = (1u64 << (n + 1)) as f64 * eps.value;
            if v < best {
                best = v;
                method = format!("2^(n+1) x {}", eps.method);
            }
        }
    }
    let cut = Cut::of_qubit_scheme(qs);
    let out = qs.output_layout();
    if out.dim_of(&cut.alice)? * out.dim_of(&cut.bob)? <= PPT_DIM_CAP {
        let mut sum_sq = 0.0;
        for idx in PauliIndex::all(n)?.skip(1) {
            let pm = pm_decomposition_on(&idx.string(), qs.input_layout().clone())?;
            let plus = qs.encode(&pm.plus)?;
            let minus = qs.encode(&pm.minus)?;
            let d = dist_ppt(&plus, &minus, &cut)?.upper;
            sum_sq += d * d;
        }
        let v = ((1u64 << n) as f64 / 2.0).sqrt() * sum_sq.sqrt();
        if v < best {
            best = v;
            method = "ppt-sdp over Pauli axes".into();
        }
    }
    Ok(Certificate {
        value: best,
        kind: CertificateKind::CertifiedUpper,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bit_hiding::werner_pair;
    use crate::operators::{HilbertLayout, PureState};

    #[test]
    fn werner_lp_closed_form() {
        for d in 2..=6 {
            let v = werner_ppt_lp(&[d], 0, 1).unwrap();
            assert!((v - 4.0 / (d as f64 + 1.0)).abs() < 1e-12, "d={d}: {v}");
        }
    }

    #[test]
    fn werner_sdp_matches_lp() {
        let cs = werner_pair(2).unwrap();
        let b = dist_ppt(&cs.state(0).unwrap(), &cs.state(1).unwrap(), &Cut::of_scheme(&cs)).unwrap();
        assert!(b.gap() < 1e-6, "gap {}", b.gap());
        assert!((b.upper - 4.0 / 3.0).abs() < 1e-6, "{}", b.upper);
    }

    #[test]
    fn product_basis_states_are_ppt_distinguishable() {
        let layout = HilbertLayout::new([("a", 2), ("b", 2)]).unwrap();
        let s00 = PureState::basis(layout.clone(), 0).unwrap().projector();
        let s11 = PureState::basis(layout, 3).unwrap().projector();
        let cut = Cut::new(&["a"], &["b"]).unwrap();
        let b = dist_ppt(&s00, &s11, &cut).unwrap();
        assert!((b.upper - 2.0).abs() < 1e-6 && (b.lower - 2.0).abs() < 1e-6);
        let same = dist_ppt(&s00, &s00, &cut).unwrap();
        assert_eq!(same.upper, 0.0);
    }
}
