//! Small dense complex matrices and the few decompositions the crate needs.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| c(x)))
}

pub fn diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(values.len(), values.iter().map(|&x| c(x))))
}

/// Spectral (operator 2-) norm.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && frobenius(&(m - m.adjoint())) <= tol * frobenius(m).max(1.0)
}

/// Eigendecomposition `H = V diag(λ) V†` of a hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(h: &CMatrix) -> Result<Self> {
        if !is_hermitian(h, 1e-12) {
            return Err(Error::Decomposition(
                "matrix is not hermitian; no unitary eigenbasis".into(),
            ));
        }
        let n = h.nrows();
        if n == 0 {
            return Ok(HermitianEigen { values: vec![], vectors: CMatrix::zeros(0, 0) });
        }
        // Diagonal input keeps the identity basis exactly.
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| h[(i, j)].norm())
            .sum();
        if off == 0.0 {
            return Ok(HermitianEigen {
                values: (0..n).map(|i| h[(i, i)].re).collect(),
                vectors: CMatrix::identity(n, n),
            });
        }
        let eig = h.clone().symmetric_eigen();
        Ok(HermitianEigen {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    /// `exp(-i τ H) = V diag(e^{-i τ λ}) V†`.
    pub fn propagator(&self, tau: f64) -> CMatrix {
        let phases: Vec<C64> = self.values.iter().map(|&l| (-I * l * tau).exp()).collect();
        let d = CMatrix::from_diagonal(&CVector::from_vec(phases));
        &self.vectors * d * self.vectors.adjoint()
    }
}

pub fn inverse(m: &CMatrix, what: &str) -> Result<CMatrix> {
    let n = m.nrows();
    if !m.is_square() {
        return Err(Error::Singular(format!("{what} is not square")));
    }
    let lu = m.clone().lu();
    let inv = lu
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("{what} has no inverse")))?;
    // LU happily inverts matrices that are singular to working precision.
    let resid = frobenius(&(m * &inv - CMatrix::identity(n, n)));
    if !resid.is_finite() || resid > 1e-8 * (n as f64).max(1.0) {
        return Err(Error::Singular(format!("{what} is numerically singular")));
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_propagator_matches_series() {
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0), C64::new(0.3, -0.2), C64::new(0.3, 0.2), c(-0.5)],
        );
        let eig = HermitianEigen::new(&h).unwrap();
        let u = eig.propagator(0.7);
        let expm = (h.map(|z| -I * z * 0.7)).exp();
        assert!(frobenius(&(u - expm)) < 1e-13);
    }

    #[test]
    fn singular_inverse_rejected() {
        let m = real_matrix(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(inverse(&m, "m"), Err(Error::Singular(_))));
    }

    #[test]
    fn spectral_norm_of_rank_one() {
        let m = real_matrix(2, 3, &[1.5, 1.5, 1.5, 1.0, 1.0, 1.0]);
        assert!((spectral_norm(&m) - 9.75f64.sqrt()).abs() < 1e-12);
    }
}
