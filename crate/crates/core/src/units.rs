//! Physical constants and the kinematic frequencies of a moving atom.
//!
//! All energies are angular frequencies in rad/s (the Hamiltonian is carried
//! as `H/ħ`), times are in seconds and ladder momenta are in units of
//! `ħ k_ref`.

use std::f64::consts::PI;

/// Reduced Planck constant (J s), CODATA 2018 exact.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum (m/s).
pub const C_LIGHT: f64 = 299_792_458.0;

pub fn hz_to_rad_s(f_hz: f64) -> f64 {
    2.0 * PI * f_hz
}

pub fn rad_s_to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}

/// Vacuum wavevector (rad/m) of light with angular frequency `omega`.
pub fn wavevector(omega_rad_s: f64) -> f64 {
    omega_rad_s / C_LIGHT
}

/// Mass and momentum unit of a momentum ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub mass_kg: f64,
    /// Reference wavevector `k_ref` (rad/m); ladder momenta are multiples of `ħ k_ref`.
    pub k_ref: f64,
}

impl Kinematics {
    pub fn new(mass_kg: f64, k_ref: f64) -> Self {
        Kinematics { mass_kg, k_ref }
    }

    /// `p²/(2mħ)` for a momentum `p` given in units of `ħ k_ref`.
    pub fn kinetic(&self, p: f64) -> f64 {
        HBAR * (p * self.k_ref).powi(2) / (2.0 * self.mass_kg)
    }

    /// Doppler frequency `ν = k p / m` of wavevector `k` (rad/m) at momentum `p`.
    pub fn doppler(&self, k: f64, p: f64) -> f64 {
        HBAR * k * p * self.k_ref / self.mass_kg
    }

    /// Recoil frequency `ω_r = ħ k² / (2m)`.
    pub fn recoil(&self, k: f64) -> f64 {
        HBAR * k * k / (2.0 * self.mass_kg)
    }

    /// Momentum (units of `ħ k_ref`) at which wavevector `k` sees Doppler shift `nu`.
    pub fn momentum_for_doppler(&self, k: f64, nu: f64) -> f64 {
        nu * self.mass_kg / (HBAR * k * self.k_ref)
    }
}
