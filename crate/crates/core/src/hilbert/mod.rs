//! Spinor wavefunctions on a momentum ladder and the block operators acting
//! on them.
//!
//! A state is stored per *family*: all amplitudes reachable from one base
//! momentum `p₀` by the plane-wave couplings of a system. Level `ℓ` at ladder
//! index `n` carries momentum `p₀ + o_ℓ + n` (units of `ħ k_ref`), where the
//! per-level offset `o_ℓ` absorbs the part of a photon kick that is not a
//! whole ladder step. Every coupling therefore moves amplitude by an integer
//! number of sites and families never mix.

mod ladder;
mod operator;
mod shift;
mod state;

pub use ladder::{InternalSpace, MomentumLadder, Window};
pub use operator::{BlockOperator, Coefficient, LadderTerm};
pub use shift::{conjugate_shift_check, plane_wave_shift, ShiftOutcome};
pub use state::{FamilyState, StateVector};
