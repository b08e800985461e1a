use crate::elimination::projector::Coupling;
use crate::elimination::validity::{validity_report, ValidityReport};
use crate::error::{Error, Result};
use crate::linalg::{diag, real_matrix, CMatrix};
use num_complex::Complex64 as C64;

/// A finite system `H = [[Δ, Ω†], [Ω, Ξ]]` without motion (`ħ = 1`).
#[derive(Debug, Clone)]
pub struct MatrixSystem {
    pub relevant: Vec<String>,
    pub irrelevant: Vec<String>,
    pub delta: CMatrix,
    pub xi: CMatrix,
    pub omega: Coupling,
}

impl MatrixSystem {
    pub fn new(
        relevant: Vec<String>,
        irrelevant: Vec<String>,
        delta: CMatrix,
        xi: CMatrix,
        omega: Coupling,
    ) -> Result<Self> {
        let (r, c) = omega.shape();
        if delta.nrows() != relevant.len()
            || xi.nrows() != irrelevant.len()
            || !delta.is_square()
            || !xi.is_square()
            || r != xi.nrows()
            || c != delta.nrows()
        {
            return Err(Error::Invalid("block sizes do not match the level labels".into()));
        }
        Ok(MatrixSystem { relevant, irrelevant, delta, xi, omega })
    }

    pub fn n_relevant(&self) -> usize {
        self.relevant.len()
    }

    pub fn len(&self) -> usize {
        self.relevant.len() + self.irrelevant.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn labels(&self) -> Vec<String> {
        self.relevant.iter().chain(&self.irrelevant).cloned().collect()
    }

    /// The full (un-eliminated) Hamiltonian at time `t`.
    pub fn full_matrix(&self, t: f64) -> CMatrix {
        let n = self.n_relevant();
        let m = self.irrelevant.len();
        let om = self.omega.at(t);
        let mut h = CMatrix::zeros(n + m, n + m);
        h.view_mut((0, 0), (n, n)).copy_from(&self.delta);
        h.view_mut((n, n), (m, m)).copy_from(&self.xi);
        h.view_mut((n, 0), (m, n)).copy_from(&om);
        h.view_mut((0, n), (n, m)).copy_from(&om.adjoint());
        h
    }

    pub fn with_coupling_scaled(&self, factor: f64) -> Self {
        MatrixSystem { omega: self.omega.scaled(factor), ..self.clone() }
    }

    /// `Ξ → Ξ + shift·1`, which widens the manifold gap by `shift`.
    pub fn with_xi_shifted(&self, shift: f64) -> Self {
        let m = self.xi.nrows();
        MatrixSystem { xi: &self.xi + CMatrix::identity(m, m) * C64::new(shift, 0.0), ..self.clone() }
    }

    pub fn validity(&self, t0: f64, t: f64) -> ValidityReport {
        validity_report(&self.delta, &self.xi, &self.omega, t0, t, "finite matrix")
    }
}

/// The five-level benchmark: relevant `{g, m, e}`, irrelevant `{a1, a2}`,
/// values in s⁻¹. The second ancilla frequency is printed as "23.0.0" in
/// the source table and read as 23.0.
pub fn five_level_system() -> MatrixSystem {
    let labels = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
    MatrixSystem {
        relevant: labels(&["g", "m", "e"]),
        irrelevant: labels(&["a1", "a2"]),
        delta: diag(&[-4.1, -4.0, 8.0]),
        xi: diag(&[22.0, 23.0]),
        omega: Coupling::Constant(real_matrix(2, 3, &[1.5, 1.5, 1.5, 1.0, 1.0, 1.0])),
    }
}
