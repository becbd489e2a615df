//! Primal-dual interior-point solver for complex Hermitian block SDPs.
//!
//! Primal: `min ⟨C, X⟩  s.t. ⟨A_i, X⟩ = b_i, X ⪰ 0`.
//! Dual:   `max b·y     s.t. Z = C − Σ y_i A_i ⪰ 0`.
//!
//! HKM search direction with Mehrotra predictor-corrector, started from an infeasible
//! interior point. The iterates are only approximately feasible; callers turn them into
//! exact certificates by problem-specific repair.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::operators::linalg::{herm_eigenvalues, hermitian_part};
use crate::{c, CMatrix, Error, Result, C64};

/// One nonzero of a Hermitian constraint matrix; both `(r, c)` and `(c, r)` are listed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Entry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: C64,
}

#[derive(Debug, Clone)]
pub(crate) struct SdpProblem {
    pub blocks: Vec<usize>,
    pub c: Vec<CMatrix>,
    pub a: Vec<Vec<Entry>>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SdpSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 120,
        }
    }
}

/// Convergence record of one solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct SdpSolution {
    pub x: Vec<CMatrix>,
    pub y: DVector<f64>,
    pub diagnostics: SolverDiagnostics,
}

/// Orthonormal basis of `d×d` Hermitian matrices under `Re Tr(A B)`, as sparse entries:
/// `E_ii`, `(E_ij + E_ji)/√2`, `i(E_ij − E_ji)/√2` for `i < j`.
pub(crate) fn hermitian_basis(d: usize) -> Vec<Vec<(usize, usize, C64)>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(vec![(i, i, c(1.0))]);
        for j in i + 1..d {
            out.push(vec![(i, j, c(s)), (j, i, c(s))]);
            out.push(vec![(i, j, C64::new(0.0, s)), (j, i, C64::new(0.0, -s))]);
        }
    }
    out
}

/// Matrix with coordinates `y` in [`hermitian_basis`].
pub(crate) fn from_basis_coordinates(d: usize, y: &[f64]) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for (elem, &yi) in hermitian_basis(d).iter().zip(y) {
        for &(r, col, v) in elem {
            m[(r, col)] += v * yi;
        }
    }
    m
}

fn frob(blocks: &[CMatrix]) -> f64 {
    blocks.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

fn inner(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, z)| crate::operators::linalg::real_inner(x, z))
        .sum()
}

struct Operator<'a> {
    problem: &'a SdpProblem,
    by_block: Vec<Vec<Vec<(usize, usize, C64)>>>,
}

impl<'a> Operator<'a> {
    fn new(problem: &'a SdpProblem) -> Self {
        let by_block = problem
            .a
            .iter()
            .map(|entries| {
                let mut per = vec![Vec::new(); problem.blocks.len()];
                for e in entries {
                    per[e.block].push((e.row, e.col, e.value));
                }
                per
            })
            .collect();
        Self { problem, by_block }
    }

    fn m(&self) -> usize {
        self.problem.b.len()
    }

    /// `⟨A_i, X⟩` for every `i`.
    fn apply(&self, x: &[CMatrix]) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.problem.a.iter().map(|entries| {
                entries
                    .iter()
                    .map(|e| (e.value * x[e.block][(e.col, e.row)]).re)
                    .sum::<f64>()
            }),
        )
    }

    /// `Σ y_i A_i`.
    fn adjoint(&self, y: &DVector<f64>) -> Vec<CMatrix> {
        let mut out: Vec<CMatrix> = self.problem.blocks.iter().map(|&n| CMatrix::zeros(n, n)).collect();
        for (entries, &yi) in self.problem.a.iter().zip(y.iter()) {
            if yi == 0.0 {
                continue;
            }
            for e in entries {
                out[e.block][(e.row, e.col)] += e.value * yi;
            }
        }
        out
    }

    /// `M_ij = Re Tr(A_i X A_j W)`.
    fn schur(&self, x: &[CMatrix], w: &[CMatrix]) -> DMatrix<f64> {
        let m = self.m();
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let mut acc = 0.0;
                for (blk, (ei, ej)) in self.by_block[i].iter().zip(&self.by_block[j]).enumerate() {
                    if ei.is_empty() || ej.is_empty() {
                        continue;
                    }
                    let (xb, wb) = (&x[blk], &w[blk]);
                    for &(r1, c1, v1) in ei {
                        for &(r2, c2, v2) in ej {
                            acc += (v1 * v2 * xb[(c1, r2)] * wb[(c2, r1)]).re;
                        }
                    }
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc;
            }
        }
        out
    }
}

fn inverse_hpd(z: &CMatrix) -> Option<CMatrix> {
    let chol = z.clone().cholesky()?;
    Some(hermitian_part(&chol.inverse()))
}

/// Largest `α` with `x + α dx ⪰ 0`, or infinity.
fn max_step(x: &CMatrix, dx: &CMatrix) -> f64 {
    let Some(chol) = x.clone().cholesky() else {
        return 0.0;
    };
    let l = chol.l();
    let Some(half) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(t) = l.solve_lower_triangular(&half.adjoint()) else {
        return 0.0;
    };
    let lam = herm_eigenvalues(&hermitian_part(&t)).min();
    if lam >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

fn step_length(x: &[CMatrix], dx: &[CMatrix]) -> f64 {
    x.iter()
        .zip(dx)
        .map(|(a, b)| max_step(a, b))
        .fold(f64::INFINITY, f64::min)
}

enum SchurFactor {
    Cholesky(nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::linalg::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn new(mut m: DMatrix<f64>) -> Self {
        if let Some(ch) = m.clone().cholesky() {
            return Self::Cholesky(ch);
        }
        let scale = m.diagonal().amax().max(1e-300);
        for i in 0..m.nrows() {
            m[(i, i)] += 1e-13 * scale;
        }
        match m.clone().cholesky() {
            Some(ch) => Self::Cholesky(ch),
            None => Self::Lu(m.lu()),
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            Self::Cholesky(ch) => Some(ch.solve(rhs)),
            Self::Lu(lu) => lu.solve(rhs),
        }
    }
}

fn axpy(x: &[CMatrix], alpha: f64, dx: &[CMatrix]) -> Vec<CMatrix> {
    x.iter().zip(dx).map(|(a, b)| hermitian_part(&(a + b * c(alpha)))).collect()
}

pub(crate) fn solve(problem: &SdpProblem, settings: &SdpSettings) -> Result<SdpSolution> {
    let op = Operator::new(problem);
    let m = op.m();
    let nb = problem.blocks.len();
    let n_total: usize = problem.blocks.iter().sum();
    let b = DVector::from_column_slice(&problem.b);
    let b_norm = b.norm();
    let c_norm = frob(&problem.c);

    let mut a_block_norm = vec![vec![0.0f64; nb]; m];
    for (i, entries) in problem.a.iter().enumerate() {
        for e in entries {
            a_block_norm[i][e.block] += e.value.norm_sqr();
        }
    }
    let mut x = Vec::with_capacity(nb);
    let mut z = Vec::with_capacity(nb);
    for (blk, &n) in problem.blocks.iter().enumerate() {
        let sq = (n as f64).sqrt();
        let mut xi: f64 = 10f64.max(sq);
        let mut eta: f64 = 10f64.max(sq).max(problem.c[blk].norm());
        for (norms, b) in a_block_norm.iter().zip(problem.b.iter()) {
            let an = norms[blk].sqrt();
            xi = xi.max(n as f64 * (1.0 + b.abs()) / (1.0 + an));
            eta = eta.max(an);
        }
        x.push(CMatrix::identity(n, n) * c(xi));
        z.push(CMatrix::identity(n, n) * c(eta));
    }
    let mut y = DVector::zeros(m);

    let mut diag = SolverDiagnostics {
        iterations: 0,
        primal_infeasibility: f64::INFINITY,
        dual_infeasibility: f64::INFINITY,
        relative_gap: f64::INFINITY,
        converged: false,
    };
    let mut stalls = 0;
    for iter in 0..=settings.max_iterations {
        let rp = &b - op.apply(&x);
        let aty = op.adjoint(&y);
        let rd: Vec<CMatrix> = (0..nb).map(|k| &problem.c[k] - &z[k] - &aty[k]).collect();
        let pobj = inner(&problem.c, &x);
        let dobj = b.dot(&y);
        let xz = inner(&x, &z);
        diag = SolverDiagnostics {
            iterations: iter,
            primal_infeasibility: rp.norm() / (1.0 + b_norm),
            dual_infeasibility: frob(&rd) / (1.0 + c_norm),
            relative_gap: xz.abs().max((pobj - dobj).abs()) / (1.0 + pobj.abs() + dobj.abs()),
            converged: false,
        };
        if diag.primal_infeasibility <= settings.tolerance
            && diag.dual_infeasibility <= settings.tolerance
            && diag.relative_gap <= settings.tolerance
        {
            diag.converged = true;
            break;
        }
        if iter == settings.max_iterations || stalls >= 3 {
            break;
        }
        let mu = xz / n_total as f64;
        let w: Vec<CMatrix> = match z.iter().map(inverse_hpd).collect::<Option<Vec<_>>>() {
            Some(w) => w,
            None => break,
        };
        let factor = SchurFactor::new(op.schur(&x, &w));
        let x_rd_w: Vec<CMatrix> = (0..nb).map(|k| &x[k] * &rd[k] * &w[k]).collect();
        let base_rhs = &rp + op.apply(&x_rd_w);

        // rc_w = R_c W where R_c = σμI − XZ − corr.
        let direction = |rc_w: Vec<CMatrix>| -> Option<(Vec<CMatrix>, DVector<f64>, Vec<CMatrix>)> {
            let rhs = &base_rhs - op.apply(&rc_w);
            let dy = factor.solve(&rhs)?;
            let atdy = op.adjoint(&dy);
            let dz: Vec<CMatrix> = (0..nb).map(|k| &rd[k] - &atdy[k]).collect();
            let dx: Vec<CMatrix> = (0..nb)
                .map(|k| hermitian_part(&(&rc_w[k] - &x[k] * &dz[k] * &w[k])))
                .collect();
            Some((dx, dy, dz))
        };

        let pred_rc: Vec<CMatrix> = x.iter().map(|xk| -xk).collect();
        let Some((dxp, _, dzp)) = direction(pred_rc) else {
            break;
        };
        let ap = (step_length(&x, &dxp)).min(1.0);
        let ad = (step_length(&z, &dzp)).min(1.0);
        let mu_aff = inner(&axpy(&x, ap, &dxp), &axpy(&z, ad, &dzp)) / n_total as f64;
        let sigma = ((mu_aff / mu).max(0.0)).powi(3).min(1.0);

        let corr_rc: Vec<CMatrix> = (0..nb)
            .map(|k| &w[k] * c(sigma * mu) - &x[k] - &dxp[k] * &dzp[k] * &w[k])
            .collect();
        let Some((dx, dy, dz)) = direction(corr_rc) else {
            break;
        };
        let gamma = 0.9 + 0.09 * ap.min(ad);
        let sp = (gamma * step_length(&x, &dx)).min(1.0);
        let sd = (gamma * step_length(&z, &dz)).min(1.0);
        if sp < 1e-10 && sd < 1e-10 {
            stalls += 1;
        } else {
            stalls = 0;
        }
        x = axpy(&x, sp, &dx);
        z = axpy(&z, sd, &dz);
        y += dy * sd;
    }

    let loose = 1e-6;
    if !diag.converged
        && !(diag.primal_infeasibility <= loose && diag.dual_infeasibility <= loose && diag.relative_gap <= loose)
    {
        return Err(Error::Solver {
            message: "interior-point iteration did not converge".into(),
            iterations: diag.iterations,
            primal_infeasibility: diag.primal_infeasibility,
            dual_infeasibility: diag.dual_infeasibility,
            gap: diag.relative_gap,
        });
    }
    Ok(SdpSolution { x, y, diagnostics: diag })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `max ⟨G, ρ⟩` over density matrices is the top eigenvalue of `G`.
    #[test]
    fn top_eigenvalue_by_sdp() {
        let mut rng = crate::random::seeded(3);
        let g = crate::random::random_hermitian(&mut rng, 4);
        let entries: Vec<Entry> = (0..4)
            .map(|i| Entry {
                block: 0,
                row: i,
                col: i,
                value: c(1.0),
            })
            .collect();
        let problem = SdpProblem {
            blocks: vec![4],
            c: vec![-g.clone()],
            a: vec![entries],
            b: vec![1.0],
        };
        let sol = solve(&problem, &SdpSettings::default()).unwrap();
        let top = herm_eigenvalues(&g).max();
        let value = -inner(&problem.c, &sol.x);
        assert!((value - top).abs() < 1e-7, "{value} vs {top}");
        assert!(sol.diagnostics.converged);
    }

    #[test]
    fn basis_is_orthonormal() {
        let basis = hermitian_basis(3);
        assert_eq!(basis.len(), 9);
        let mats: Vec<CMatrix> = (0..9)
            .map(|i| {
                let mut y = vec![0.0; 9];
                y[i] = 1.0;
                from_basis_coordinates(3, &y)
            })
            .collect();
        for (i, a) in mats.iter().enumerate() {
            for (j, b) in mats.iter().enumerate() {
                let ip = crate::operators::linalg::real_inner(a, b);
                assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }
}
