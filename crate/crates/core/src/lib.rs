//! Time-dependent adiabatic elimination for driven multilevel atoms.
//!
//! The crate splits a Hamiltonian `H = ħ [[Δ, Ω†], [Ω, Ξ]]` into a relevant
//! block (kept) and an irrelevant block (eliminated), and builds effective
//! Hamiltonians for the relevant block from a series of time-dependent
//! projectors. Center-of-mass motion is carried on a momentum ladder: every
//! plane-wave coupling `e^{ikx}` shifts momentum by a whole number of ladder
//! steps, so each initial momentum evolves in its own closed family.
//!
//! Module map:
//!
//! * [`hilbert`]: momentum ladders, spinor states and block operators.
//! * [`pulses`]: temporal envelopes, pulse areas and amplitude calibration.
//! * [`elimination`]: the `Ŝ` integrals, projector orders, effective and
//!   comparison Hamiltonians, validity report.
//! * [`models`]: the five built-in systems (five-level benchmark, Raman,
//!   double Raman, Bragg, double Bragg).
//! * [`ode`]: adaptive Dormand–Prince 5(4) with dense output.
//! * [`propagator`]: Dormand–Prince and matrix-exponential evolution,
//!   observables and the amplitude error metric.

pub mod elimination;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod models;
pub mod ode;
pub mod propagator;
pub mod pulses;
pub mod quadrature;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
