use super::states::DensityOperator;
use crate::{Error, Result, Tolerances};

/// `−Σ p log₂ p` with `0 log 0 = 0`.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// `S(ρ) = −Σ λ log₂ λ`; eigenvalues below `tol_psd` in magnitude count as zero.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    let tol = Tolerances::default().psd;
    let eig = rho.eigenvalues();
    if let Some(&min) = eig.iter().find(|&&x| x < -tol) {
        return Err(Error::InvalidState(format!(
            "negative eigenvalue {min:e} in entropy"
        )));
    }
    let probs: Vec<f64> = eig.iter().map(|&x| x.max(0.0)).collect();
    Ok(shannon_entropy(&probs))
}

/// Entropy of the reduced state on the named registers.
pub fn entropy_of<S: AsRef<str>>(rho: &DensityOperator, regs: &[S]) -> Result<f64> {
    if regs.is_empty() {
        return Ok(0.0);
    }
    von_neumann_entropy(&rho.partial_trace(regs)?)
}

fn union<'a, S: AsRef<str>>(parts: &[&'a [S]]) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for part in parts {
        for l in part.iter() {
            if !out.contains(&l.as_ref()) {
                out.push(l.as_ref());
            }
        }
    }
    out
}

/// `S(X|Y) = S(XY) − S(Y)`.
pub fn conditional_entropy<S: AsRef<str>>(rho: &DensityOperator, x: &[S], y: &[S]) -> Result<f64> {
    Ok(entropy_of(rho, &union(&[x, y]))? - entropy_of(rho, y)?)
}

/// `S(X:Y) = S(X) + S(Y) − S(XY)`.
pub fn mutual_information<S: AsRef<str>>(rho: &DensityOperator, x: &[S], y: &[S]) -> Result<f64> {
    Ok(entropy_of(rho, x)? + entropy_of(rho, y)? - entropy_of(rho, &union(&[x, y]))?)
}

/// `S(X:Y|Z) = S(XZ) + S(YZ) − S(Z) − S(XYZ)`.
pub fn conditional_mutual_information<S: AsRef<str>>(
    rho: &DensityOperator,
    x: &[S],
    y: &[S],
    z: &[S],
) -> Result<f64> {
    Ok(entropy_of(rho, &union(&[x, z]))? + entropy_of(rho, &union(&[y, z]))?
        - entropy_of(rho, z)?
        - entropy_of(rho, &union(&[x, y, z]))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::HilbertLayout;

    #[test]
    fn maximally_mixed_has_entropy_n() {
        for n in 1..=3 {
            let l = HilbertLayout::qubits("q", n).unwrap();
            let rho = DensityOperator::maximally_mixed(l);
            assert!((von_neumann_entropy(&rho).unwrap() - n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn shannon_ignores_zero_mass() {
        assert_eq!(shannon_entropy(&[1.0, 0.0]), 0.0);
        assert!((shannon_entropy(&[0.25; 4]) - 2.0).abs() < 1e-15);
    }
}
