use super::state::{FamilyState, StateVector};
use crate::error::{Error, Result};
use crate::units::Kinematics;
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftOutcome {
    pub state: StateVector,
    /// Squared norm pushed past the window edges.
    pub truncation_loss: f64,
}

/// Applies `e^{i k_steps k_ref x̂}`: every amplitude moves `k_steps` sites up
/// the ladder (all levels alike).
pub fn plane_wave_shift(state: &StateVector, k_steps: i64, cap: f64) -> Result<ShiftOutcome> {
    let mut lost = 0.0;
    let mut families = Vec::with_capacity(state.families.len());
    for fam in &state.families {
        let w = fam.window;
        if k_steps.abs() > w.width() {
            return Err(Error::ShiftTooLarge { shift: k_steps, width: w.width() });
        }
        let mut out = FamilyState::zeros(fam.base_momentum, fam.n_levels, w);
        for l in 0..fam.n_levels {
            for n in w.n_min..=w.n_max {
                let a = fam.get(l, n);
                match out.offset(l, n + k_steps) {
                    Some(i) => out.amps[i] = a,
                    None => lost += a.norm_sqr(),
                }
            }
        }
        families.push(out);
    }
    if lost > cap {
        return Err(Error::Truncation { lost_norm: lost, cap });
    }
    Ok(ShiftOutcome {
        state: StateVector { families, norm_tolerance: state.norm_tolerance },
        truncation_loss: lost,
    })
}

/// Both sides of
/// `e^{-iT(p̂²/2mħ+ω₂)} e^{ikx̂} e^{+iT(p̂²/2mħ+ω₁)} = e^{ikx̂} e^{-iT(ω₂-ω₁+ν̂+ω_r)}`
/// evaluated on the momentum eigenstate `|p⟩`, with `k = k_steps·k_ref`.
/// Both results are the phase multiplying `|p + k_steps⟩`.
pub fn conjugate_shift_check(
    kin: &Kinematics,
    omega1: f64,
    omega2: f64,
    duration: f64,
    k_steps: i64,
    p: f64,
) -> (C64, C64) {
    let i = C64::new(0.0, 1.0);
    let p_after = p + k_steps as f64;
    let lhs = (i * duration * (kin.kinetic(p) + omega1)).exp()
        * (-i * duration * (kin.kinetic(p_after) + omega2)).exp();
    let k = k_steps as f64 * kin.k_ref;
    let rhs = (-i * duration * (omega2 - omega1 + kin.doppler(k, p) + kin.recoil(k))).exp();
    (lhs, rhs)
}
