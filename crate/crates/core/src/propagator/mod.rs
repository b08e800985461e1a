//! Time evolution under full or effective Hamiltonians (`ħ = 1`, frequencies
//! in rad/s), observables and the amplitude error metric.
//!
//! Ladder systems are integrated one momentum family at a time with the
//! adaptive Dormand–Prince 5(4) scheme of [`crate::ode`]; families run in
//! parallel. A family whose amplitude reaches the window edge is moved to a
//! doubled window and continued.

mod ladder;
mod matrix;
mod metric;
mod observables;

pub use ladder::evolve;
pub use matrix::{evolve_matrix, expm, expm_evolve};
pub use metric::{relative_error, relative_error_phase_aligned, Amplitudes};
pub use observables::{family_populations, momentum_density, DensityRow};

use crate::error::{Error, Result};
use crate::hilbert::StateVector;
use crate::linalg::CVector;
use crate::ode::{OdeOptions, OdeStats};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Rk45,
    /// Matrix exponential; time-independent generators only.
    Expm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step (s); unbounded when absent.
    pub max_step: Option<f64>,
    /// Keep the state at every sample time (populations are always kept).
    pub dense_output: bool,
    pub method: Method,
    /// Population in the outermost sites that triggers a window doubling.
    pub edge_threshold: f64,
    /// Largest ladder window (sites) a family may grow to.
    pub max_sites: usize,
    /// Squared norm that may leak past the final window before the run fails.
    pub truncation_cap: f64,
    /// Propagate families on the rayon pool.
    pub parallel: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-9,
            atol: 1e-12,
            max_step: None,
            dense_output: true,
            method: Method::Rk45,
            edge_threshold: 1e-10,
            max_sites: 1025,
            truncation_cap: 1e-6,
            parallel: true,
        }
    }
}

impl IntegratorConfig {
    pub fn tolerances(rtol: f64, atol: f64) -> Self {
        IntegratorConfig { rtol, atol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::Invalid(format!("rtol and atol must be positive (got {}, {})", self.rtol, self.atol)));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::Invalid("max_step must be positive".into()));
            }
        }
        if !(self.edge_threshold > 0.0) || !(self.truncation_cap >= 0.0) {
            return Err(Error::Invalid("edge_threshold and truncation_cap must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn ode_options(&self) -> OdeOptions {
        OdeOptions { max_step: self.max_step.unwrap_or(f64::INFINITY), ..OdeOptions::tolerances(self.rtol, self.atol) }
    }
}

/// Sampled evolution of a state of type `S`.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    /// Snapshots at `times` (empty without dense output, except the last).
    pub states: Vec<S>,
    /// `populations[i][level]` at `times[i]`.
    pub populations: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    /// Pulse area covered at each sample; empty until set by the caller.
    pub pulse_area_progress: Vec<f64>,
    /// Largest population seen in the outermost ladder sites.
    pub truncation_loss: f64,
    pub stats: OdeStats,
}

pub type TrajectoryResult = Trajectory<StateVector>;
pub type MatrixTrajectory = Trajectory<CVector>;

impl<S> Trajectory<S> {
    pub fn final_state(&self) -> Option<&S> {
        self.states.last()
    }

    pub fn final_populations(&self) -> Option<&[f64]> {
        self.populations.last().map(Vec::as_slice)
    }

    /// Fills `pulse_area_progress` from `area(t)`.
    pub fn with_area_progress(mut self, area: impl Fn(f64) -> f64) -> Self {
        self.pulse_area_progress = self.times.iter().map(|&t| area(t)).collect();
        self
    }

    /// Largest `|‖ψ(t)‖ - ‖ψ(t0)‖|` over the samples.
    pub fn norm_drift(&self, initial: f64) -> f64 {
        self.norms.iter().map(|n| (n - initial).abs()).fold(0.0, f64::max)
    }
}

pub(crate) fn check_times(t0: f64, times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Invalid("no sample times".into()));
    }
    let mut prev = t0;
    for (i, &t) in times.iter().enumerate() {
        if !t.is_finite() || t < prev || (i > 0 && t == prev) {
            return Err(Error::Invalid("sample times must be finite, ≥ t0 and strictly increasing".into()));
        }
        prev = t;
    }
    Ok(())
}

/// `n + 1` equally spaced times from `t0` to `t1`.
pub fn linspace(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| if i == n { t1 } else { t0 + (t1 - t0) * i as f64 / n as f64 }).collect()
}
