//! Adiabatic Hamiltonians from the literature, for comparison with the
//! projector series. All take `Δ` (n×n), `Ξ` (m×m) and a constant `Ω` (m×n).

use crate::error::{Error, Result};
use crate::linalg::{inverse, CMatrix};
use num_complex::Complex64 as C64;

/// `|Ξ_kk - Δ_mm|` below this fraction of the largest diagonal magnitude
/// counts as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

fn check_shapes(delta: &CMatrix, xi: &CMatrix, omega: &CMatrix) -> Result<()> {
    if !delta.is_square() || !xi.is_square() || omega.nrows() != xi.nrows() || omega.ncols() != delta.nrows() {
        return Err(Error::Invalid(format!(
            "incompatible blocks: Δ {}x{}, Ξ {}x{}, Ω {}x{}",
            delta.nrows(),
            delta.ncols(),
            xi.nrows(),
            xi.ncols(),
            omega.nrows(),
            omega.ncols()
        )));
    }
    Ok(())
}

/// `Δ - Ω†Ξ⁻¹Ω`.
pub fn markov_hamiltonian(delta: &CMatrix, xi: &CMatrix, omega: &CMatrix) -> Result<CMatrix> {
    check_shapes(delta, xi, omega)?;
    let xi_inv = inverse(xi, "Ξ")?;
    Ok(delta - omega.adjoint() * xi_inv * omega)
}

/// `(1 + Ω†Ξ⁻²Ω)⁻¹ (Δ - Ω†Ξ⁻¹Ω)`.
pub fn paulisch_hamiltonian(delta: &CMatrix, xi: &CMatrix, omega: &CMatrix) -> Result<CMatrix> {
    check_shapes(delta, xi, omega)?;
    let xi_inv = inverse(xi, "Ξ")?;
    let n = delta.nrows();
    let factor = CMatrix::identity(n, n) + omega.adjoint() * &xi_inv * &xi_inv * omega;
    let markov = delta - omega.adjoint() * &xi_inv * omega;
    Ok(inverse(&factor, "1 + Ω†Ξ⁻²Ω")? * markov)
}

/// `Δ - Ω†Ξ⁻¹Ω - ½(Ω†Ξ⁻²ΩΔ + ΔΩ†Ξ⁻²Ω)`.
pub fn sanz_hamiltonian(delta: &CMatrix, xi: &CMatrix, omega: &CMatrix) -> Result<CMatrix> {
    check_shapes(delta, xi, omega)?;
    let xi_inv = inverse(xi, "Ξ")?;
    let w = omega.adjoint() * &xi_inv * &xi_inv * omega;
    let markov = delta - omega.adjoint() * &xi_inv * omega;
    Ok(markov - (&w * delta + delta * &w) * C64::new(0.5, 0.0))
}

/// `Δ - Σ_k Ω†_{lk} Ω_{km} / (Ξ_kk - Δ_mm)` for diagonal `Δ` and `Ξ`.
pub fn commuting_limit_hamiltonian(delta: &CMatrix, xi: &CMatrix, omega: &CMatrix) -> Result<CMatrix> {
    check_shapes(delta, xi, omega)?;
    let off_diagonal = |m: &CMatrix| {
        (0..m.nrows()).any(|i| (0..m.ncols()).any(|j| i != j && m[(i, j)] != C64::new(0.0, 0.0)))
    };
    if off_diagonal(delta) || off_diagonal(xi) {
        return Err(Error::Invalid("the commuting limit needs diagonal Δ and Ξ".into()));
    }
    // Energy scale for the degeneracy test; the gap itself cannot serve as
    // its own reference.
    let scale = (0..xi.nrows())
        .map(|k| xi[(k, k)].re.abs())
        .chain((0..delta.nrows()).map(|m| delta[(m, m)].re.abs()))
        .fold(0.0, f64::max);
    let n = delta.nrows();
    let mut h = delta.clone();
    for k in 0..xi.nrows() {
        for m in 0..n {
            let d = xi[(k, k)].re - delta[(m, m)].re;
            if d.abs() <= DEGENERACY_TOLERANCE * scale {
                return Err(Error::Pole { denominator: format!("Ξ_{k}{k} - Δ_{m}{m}"), value: d });
            }
            for l in 0..n {
                h[(l, m)] -= omega[(k, l)].conj() * omega[(k, m)] / d;
            }
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, frobenius, real_matrix};

    fn scalar(x: f64) -> CMatrix {
        diag(&[x])
    }

    #[test]
    fn scalar_examples() {
        let (d, x, o) = (scalar(0.0), scalar(10.0), scalar(1.0));
        assert!((markov_hamiltonian(&d, &x, &o).unwrap()[(0, 0)].re + 0.1).abs() < 1e-16);
        let p = paulisch_hamiltonian(&d, &x, &o).unwrap()[(0, 0)].re;
        assert!((p + 0.1 / 1.01).abs() < 1e-16);
        assert!((p + 0.099_009_900_990_099).abs() < 1e-14);
    }

    #[test]
    fn zero_coupling_gives_delta() {
        let d = diag(&[-4.1, -4.0, 8.0]);
        let x = diag(&[22.0, 23.0]);
        let o = CMatrix::zeros(2, 3);
        for h in [
            markov_hamiltonian(&d, &x, &o).unwrap(),
            paulisch_hamiltonian(&d, &x, &o).unwrap(),
            sanz_hamiltonian(&d, &x, &o).unwrap(),
            commuting_limit_hamiltonian(&d, &x, &o).unwrap(),
        ] {
            assert_eq!(h, d);
        }
    }

    #[test]
    fn sanz_equals_markov_when_delta_vanishes() {
        let d = CMatrix::zeros(3, 3);
        let x = diag(&[22.0, 23.0]);
        let o = real_matrix(2, 3, &[1.5, 1.5, 1.5, 1.0, 1.0, 1.0]);
        let diff = sanz_hamiltonian(&d, &x, &o).unwrap() - markov_hamiltonian(&d, &x, &o).unwrap();
        assert!(frobenius(&diff) < 1e-15);
    }

    #[test]
    fn commuting_two_level_lambda() {
        let (g, o1, o2) = (40.0, 1.2, 0.7);
        let h = commuting_limit_hamiltonian(&diag(&[0.0, 0.0]), &scalar(g), &real_matrix(1, 2, &[o1, o2])).unwrap();
        assert!((h[(0, 1)].re + o1 * o2 / g).abs() < 1e-16);
        assert!((h[(0, 0)].re + o1 * o1 / g).abs() < 1e-16);
        assert!((h[(1, 1)].re + o2 * o2 / g).abs() < 1e-16);
    }

    #[test]
    fn commuting_degenerate_pair_is_a_pole() {
        let r = commuting_limit_hamiltonian(&diag(&[1.0, 3.0]), &scalar(3.0), &real_matrix(1, 2, &[1.0, 1.0]));
        match r {
            Err(Error::Pole { denominator, .. }) => assert_eq!(denominator, "Ξ_00 - Δ_11"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn singular_xi_rejected() {
        let r = markov_hamiltonian(&scalar(0.0), &scalar(0.0), &scalar(1.0));
        assert!(matches!(r, Err(Error::Singular(_))));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let r = markov_hamiltonian(&diag(&[0.0, 1.0]), &scalar(3.0), &scalar(1.0));
        assert!(matches!(r, Err(Error::Invalid(_))));
    }
}
