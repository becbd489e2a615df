use nalgebra::{DMatrix, DVector};

use crate::{c, CMatrix, Error, Result, C64};

/// Largest entrywise modulus of `a − a†`.
pub fn hermitian_deviation(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut dev = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `(a + a†) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * c(0.5)
}

/// Largest entrywise modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise modulus of `a − b`; mismatched shapes count as infinitely far apart.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Eigen-decomposition of the Hermitian part, eigenvalues ascending.
pub fn herm_eigen(a: &CMatrix) -> (DVector<f64>, CMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (DVector::zeros(0), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigenvalues of the Hermitian part, ascending.
pub fn herm_eigenvalues(a: &CMatrix) -> DVector<f64> {
    if a.nrows() == 0 {
        return DVector::zeros(0);
    }
    let mut v: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    DVector::from_vec(v)
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    herm_eigenvalues(a).iter().copied().fold(f64::INFINITY, f64::min)
}

/// Apply a real function to the spectrum of the Hermitian part.
pub fn herm_function(a: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = herm_eigen(a);
    let scaled = DMatrix::from_fn(vecs.nrows(), vecs.ncols(), |i, j| vecs[(i, j)] * c(f(vals[j])));
    &scaled * vecs.adjoint()
}

/// Projector onto the span of eigenvectors with eigenvalue `>= 0`.
pub fn nonnegative_projector(a: &CMatrix) -> CMatrix {
    herm_function(a, |x| if x >= 0.0 { 1.0 } else { 0.0 })
}

/// Trace norm (sum of singular values) of a square matrix.
///
/// Hermitian inputs go through the eigen-decomposition, others through a full SVD.
pub fn trace_norm_matrix(a: &CMatrix) -> Result<f64> {
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!(
            "trace norm needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() == 0 {
        return Ok(0.0);
    }
    let scale = max_abs(a).max(1.0);
    if hermitian_deviation(a) <= 1e-13 * scale {
        Ok(herm_eigenvalues(a).iter().map(|x| x.abs()).sum())
    } else {
        Ok(a.clone().singular_values().iter().sum())
    }
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `Re Tr(a b)` for Hermitian `a`, `b`.
pub fn real_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    // Tr(ab) = Σ a_ik b_ki = Σ a_ik conj(b_ik) for Hermitian b.
    a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re).sum()
}

/// Unitary polar factor of a square matrix.
pub fn polar_unitary(a: &CMatrix) -> CMatrix {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    u * v_t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_eigen_reconstructs() {
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[c(2.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), c(-1.0)],
        );
        let (vals, vecs) = herm_eigen(&a);
        assert!(vals[0] <= vals[1]);
        let d = CMatrix::from_diagonal(&vals.map(c));
        let back = &vecs * d * vecs.adjoint();
        assert!(max_abs_diff(&back, &a) < 1e-12);
    }

    #[test]
    fn trace_norm_rejects_rectangular() {
        assert!(matches!(
            trace_norm_matrix(&CMatrix::zeros(2, 3)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn real_inner_matches_trace_product() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0), C64::new(0.5, 0.3), C64::new(0.5, -0.3), c(-2.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[c(0.2), C64::new(-0.1, 0.7), C64::new(-0.1, -0.7), c(4.0)]);
        assert!((real_inner(&a, &b) - trace_product(&a, &b).re).abs() < 1e-14);
    }
}
