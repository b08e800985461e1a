//! Adiabatic elimination: the `Ŝ` integrals, the projector series, effective
//! Hamiltonians, the comparison Hamiltonians from the literature and the
//! validity report.

pub mod comparison;
pub mod effective;
pub mod projector;
pub mod s_integral;
pub mod validity;

pub use comparison::{commuting_limit_hamiltonian, markov_hamiltonian, paulisch_hamiltonian, sanz_hamiltonian};
pub use effective::{effective_hamiltonian, effective_hamiltonian_over, EffectiveBlock, EffectiveHamiltonian, EffectiveMetadata, MatrixEffective};
pub use projector::{Coupling, ProjectorSeries};
pub use s_integral::{Detuning, SIntegralSpec, SMode};
pub use validity::{validity_report, ValidityReport, Verdict};
