//! The ⁸⁷Rb Raman pulse protocol: two counter-propagating lasers, equal
//! envelopes calibrated to a target pulse area, and a row of momentum
//! families spaced evenly in Doppler detuning around the resonant class.

use super::builders::{raman_system, LadderConfig, RamanOptions};
use super::com::ComSystem;
use super::{AtomConstants, LaserSpec};
use crate::error::{Error, Result};
use crate::hilbert::{StateVector, Window};
use crate::pulses::PulseShape;
use crate::units::{hz_to_rad_s, wavevector};

#[derive(Debug, Clone, PartialEq)]
pub struct RamanPulseConfig {
    /// Target pulse area (rad).
    pub area: f64,
    /// Envelope template; its amplitude is replaced by the calibration.
    pub template: PulseShape,
    /// Laser 1 frequency `ω₁/2π` (Hz).
    pub laser_frequency_hz: f64,
    /// `δω/2π` with `ω₁ = ω₂ + δω` (Hz).
    pub frequency_difference_hz: f64,
    /// Number of momentum families.
    pub families: usize,
    /// Family spacing in units of the peak two-photon Rabi frequency.
    pub spacing_over_rabi: f64,
    /// Resonant momentum (units of `ħ k_ref`).
    pub resonance_momentum: f64,
    pub window: Window,
}

impl RamanPulseConfig {
    /// Values of the ⁸⁷Rb preset, a 10 µs sine-squared pulse and 64 families
    /// spaced by a quarter Rabi frequency.
    pub fn rb87(constants: &AtomConstants, area: f64) -> Result<Self> {
        let quoted = |k: &str| {
            constants
                .quoted
                .get(k)
                .copied()
                .ok_or_else(|| Error::Invalid(format!("atom preset has no quoted `{k}`")))
        };
        Ok(RamanPulseConfig {
            area,
            template: PulseShape::sine_squared(1.0, 0.0, 10e-6)?,
            laser_frequency_hz: quoted("laser_frequency_hz")?,
            frequency_difference_hz: quoted("frequency_difference_hz")?,
            families: 64,
            spacing_over_rabi: 0.25,
            resonance_momentum: 0.0,
            window: Window::new(-2, 2)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct RamanPulseSetup {
    pub system: ComSystem,
    /// `γ₀` used for the calibration (rad/s).
    pub gamma0: f64,
    /// Peak two-photon Rabi frequency (rad/s).
    pub rabi: f64,
    /// `k₁ - k₂` (rad/m).
    pub k_eff: f64,
    /// Doppler detuning `ν = k_eff p₀/m` of each family (rad/s).
    pub doppler: Vec<f64>,
    /// Family whose base momentum is the resonant one.
    pub resonant_family: usize,
    /// All amplitude in `g`, equal weight in every family.
    pub initial: StateVector,
}

impl RamanPulseSetup {
    /// Family closest to Doppler detuning `nu` (rad/s).
    pub fn family_at(&self, nu: f64) -> usize {
        (0..self.doppler.len())
            .min_by(|&a, &b| (self.doppler[a] - nu).abs().total_cmp(&(self.doppler[b] - nu).abs()))
            .unwrap_or(0)
    }
}

pub fn raman_pulse(constants: &AtomConstants, cfg: &RamanPulseConfig) -> Result<RamanPulseSetup> {
    if cfg.families == 0 {
        return Err(Error::Invalid("at least one momentum family required".into()));
    }
    let w1 = hz_to_rad_s(cfg.laser_frequency_hz);
    let w2 = w1 - hz_to_rad_s(cfg.frequency_difference_hz);
    let (k1, k2) = (wavevector(w1), -wavevector(w2));
    let laser1 = LaserSpec::new(k1, w1, cfg.template.clone(), "e", "a");
    let laser2 = LaserSpec::new(k2, w2, cfg.template.clone(), "g", "a");
    let opts = RamanOptions { resonance_momentum: Some(cfg.resonance_momentum) };
    let probe = LadderConfig { base_momenta: vec![cfg.resonance_momentum], window: cfg.window };
    let (unit, gamma0) = raman_system(constants, &laser1, &laser2, &probe, &opts)?.calibrated(cfg.area, cfg.resonance_momentum)?;
    let rabi = unit.peak_rabi(gamma0);
    if !(rabi > 0.0 && rabi.is_finite()) {
        return Err(Error::Calibration("pulse has no two-photon Rabi frequency".into()));
    }
    let kin = unit.ladder.kinematics;
    let per_step = kin.doppler(kin.k_ref, 1.0);
    let centre = cfg.families / 2;
    let doppler: Vec<f64> =
        (0..cfg.families).map(|i| (i as f64 - centre as f64) * cfg.spacing_over_rabi * rabi).collect();
    let base: Vec<f64> = doppler.iter().map(|nu| cfg.resonance_momentum + nu / per_step).collect();
    let envelope = unit.couplings[0].envelope.clone();
    let laser1 = LaserSpec { envelope: envelope.clone(), ..laser1 };
    let laser2 = LaserSpec { envelope, ..laser2 };
    let ladder = LadderConfig { base_momenta: base, window: cfg.window };
    let system = raman_system(constants, &laser1, &laser2, &ladder, &opts)?;
    let g = system.level("g")?;
    let initial = StateVector::uniform_in_level(&system.ladder, g, &vec![1.0; cfg.families])?;
    let mut notes = system.notes.clone();
    notes.push(format!("pulse area {:.6} rad against γ₀ = {gamma0:.6e} rad/s", cfg.area));
    let system = ComSystem { notes, ..system };
    Ok(RamanPulseSetup { system, gamma0, rabi, k_eff: (k1 - k2).abs(), doppler, resonant_family: centre, initial })
}
