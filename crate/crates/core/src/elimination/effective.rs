//! `H_{α,N}(t) = Δ + Ω†(t) Σ_{ℓ≤N} P_ℓ(t)` for any of the supported systems.

use super::projector::ProjectorSeries;
use super::s_integral::SMode;
use super::validity::{ValidityReport, Verdict};
use crate::error::{Error, Result};
use crate::hilbert::BlockOperator;
use crate::linalg::CMatrix;
use crate::models::{MatrixSystem, SystemKind, SystemSpec};
use serde::Serialize;

/// Absolute tolerance used for projector and `Ŝ` quadrature.
pub const DEFAULT_TOLERANCE: f64 = 1e-11;

/// Effective Hamiltonian of a finite matrix system.
#[derive(Clone)]
pub struct MatrixEffective {
    pub order: usize,
    pub series: ProjectorSeries,
}

impl MatrixEffective {
    pub fn at(&self, t: f64) -> Result<CMatrix> {
        let p = self.series.sum(self.order, t)?;
        Ok(&self.series.delta + self.series.omega.at(t).adjoint() * p)
    }
}

#[derive(Clone)]
pub enum EffectiveBlock {
    Matrix(MatrixEffective),
    Ladder(BlockOperator),
}

#[derive(Debug, Clone, Serialize)]
pub struct EffectiveMetadata {
    pub system: SystemKind,
    pub s_mode: SMode,
    /// Whether the oscillating terms of `Ŝ` were dropped.
    pub rwa: bool,
    /// Largest `2π/(T|γ|)` over the support, for ladder systems.
    pub rwa_ratio: Option<f64>,
    pub validity: ValidityReport,
    /// Set when the validity verdict is `warn`.
    pub validity_warning: bool,
    pub notes: Vec<String>,
}

#[derive(Clone)]
pub struct EffectiveHamiltonian {
    pub order: usize,
    pub block: EffectiveBlock,
    pub metadata: EffectiveMetadata,
}

fn gate(report: &ValidityReport) -> Result<bool> {
    if !(report.gamma_star > 0.0) {
        return Err(Error::Validity(format!("manifold gap γ⋆ = {} is not positive", report.gamma_star)));
    }
    Ok(report.verdict == Verdict::Warn)
}

fn matrix_effective(sys: &MatrixSystem, order: usize, t0: f64, t1: f64) -> Result<EffectiveHamiltonian> {
    let validity = sys.validity(t0, t1);
    let validity_warning = gate(&validity)?;
    let series = ProjectorSeries::new(sys.delta.clone(), sys.xi.clone(), sys.omega.clone(), t0, DEFAULT_TOLERANCE)?;
    Ok(EffectiveHamiltonian {
        order,
        block: EffectiveBlock::Matrix(MatrixEffective { order, series }),
        metadata: EffectiveMetadata {
            system: SystemKind::FiveLevel,
            s_mode: SMode::Quadrature,
            rwa: false,
            rwa_ratio: None,
            validity,
            validity_warning,
            notes: Vec::new(),
        },
    })
}

/// Builds the effective Hamiltonian of order `order`. Matrix systems are
/// referenced to `t0 = 0` and checked for validity over `[0, 1]`; use
/// [`effective_hamiltonian_over`] to pick the interval.
pub fn effective_hamiltonian(system: &SystemSpec, order: usize, mode: SMode) -> Result<EffectiveHamiltonian> {
    match system {
        SystemSpec::Matrix(_) => effective_hamiltonian_over(system, order, mode, 0.0, 1.0),
        SystemSpec::Ladder(c) => effective_hamiltonian_over(system, order, mode, c.t_start(), c.t_end()),
    }
}

/// As [`effective_hamiltonian`], with the validity interval `[t0, t1]`.
/// Ladder systems always start at the earliest envelope.
pub fn effective_hamiltonian_over(
    system: &SystemSpec,
    order: usize,
    mode: SMode,
    t0: f64,
    t1: f64,
) -> Result<EffectiveHamiltonian> {
    if order == 0 {
        return Err(Error::Invalid("order must be at least 1".into()));
    }
    match system {
        SystemSpec::Matrix(m) => matrix_effective(m, order, t0, t1),
        SystemSpec::Ladder(c) => {
            if order > 1 {
                return Err(Error::Unsupported("center-of-mass systems are first order only".into()));
            }
            let validity = c.validity(t1);
            let validity_warning = gate(&validity)?;
            c.check_poles(mode)?;
            let mut notes = c.notes.clone();
            let rwa = mode == SMode::Rwa;
            let ratio = c.max_rwa_ratio();
            if rwa {
                notes.push(format!("oscillating Ŝ terms dropped; largest 2π/(T|γ|) = {ratio:.3e}"));
            }
            Ok(EffectiveHamiltonian {
                order: 1,
                block: EffectiveBlock::Ladder(c.effective(mode, DEFAULT_TOLERANCE)),
                metadata: EffectiveMetadata {
                    system: c.kind,
                    s_mode: mode,
                    rwa,
                    rwa_ratio: Some(ratio),
                    validity,
                    validity_warning,
                    notes,
                },
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::projector::Coupling;
    use crate::linalg::{diag, frobenius};
    use crate::models::five_level_system;

    #[test]
    fn zero_coupling_gives_delta() {
        let s = five_level_system().with_coupling_scaled(0.0);
        let h = effective_hamiltonian(&SystemSpec::Matrix(s.clone()), 3, SMode::Closed).unwrap();
        let EffectiveBlock::Matrix(m) = &h.block else { panic!("matrix block expected") };
        for t in [0.0, 0.7, 2.3] {
            assert_eq!(m.at(t).unwrap(), s.delta);
        }
    }

    #[test]
    fn first_order_is_not_hermitian_but_close() {
        let s = five_level_system();
        let h = effective_hamiltonian_over(&SystemSpec::Matrix(s.clone()), 1, SMode::Closed, 0.0, 4.0).unwrap();
        assert!(h.metadata.validity_warning);
        let EffectiveBlock::Matrix(m) = &h.block else { panic!("matrix block expected") };
        let ratio = h.metadata.validity.coupling_ratio;
        for t in [0.3, 1.1, 3.9] {
            let x = m.at(t).unwrap();
            let anti = frobenius(&(&x - x.adjoint())) / frobenius(&x);
            assert!(anti > 0.0 && anti < 2.0 * ratio, "{anti} vs {ratio}");
        }
    }

    #[test]
    fn gapless_system_is_rejected() {
        let o = Coupling::Constant(crate::linalg::real_matrix(1, 1, &[0.1]));
        let s = MatrixSystem::new(vec!["g".into()], vec!["a".into()], diag(&[1.0]), diag(&[1.0]), o).unwrap();
        assert!(matches!(effective_hamiltonian(&SystemSpec::Matrix(s), 1, SMode::Closed), Err(Error::Validity(_))));
    }

    #[test]
    fn order_zero_is_invalid() {
        let s = SystemSpec::Matrix(five_level_system());
        assert!(effective_hamiltonian(&s, 0, SMode::Closed).is_err());
    }
}
