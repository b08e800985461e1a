//! Scenario files: one JSON document per run.
//!
//! Unit rules: keys ending in `_hz` are ordinary frequencies and are
//! multiplied by 2π; `_rad_s` keys are angular frequencies used as given;
//! `_s` keys are seconds; `_kg` kilograms. Momenta are in units of `ħ k_ref`,
//! where `k_ref` is the ladder step of the system.

use crate::error::CliError;
use mwelim::elimination::SMode;
use mwelim::models::{AtomConstants, SystemKind};
use mwelim::propagator::IntegratorConfig;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: SystemKind,
    #[serde(default)]
    pub label: Option<String>,
    /// Bundled atom preset name (ladder systems).
    #[serde(default)]
    pub atom_preset: Option<String>,
    /// Inline atom constants (ladder systems).
    #[serde(default)]
    pub atom: Option<AtomConstants>,
    #[serde(default)]
    pub lasers: Vec<LaserConfig>,
    #[serde(default)]
    pub pulse: Option<PulseConfig>,
    #[serde(default)]
    pub momentum: MomentumConfig,
    /// Matrix system (five-level kind).
    #[serde(default)]
    pub matrix: Option<MatrixConfig>,
    pub initial: InitialConfig,
    #[serde(default)]
    pub elimination: EliminationConfig,
    /// Also propagate the full system and report `δ` against it.
    #[serde(default)]
    pub propagate_full: bool,
    /// Five-level kind: add the Markov, Paulisch and Sanz Hamiltonians.
    #[serde(default)]
    pub compare: bool,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory the scenario was read from; relative paths resolve here.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserConfig {
    pub from: String,
    pub to: String,
    #[serde(default)]
    pub frequency_hz: Option<f64>,
    #[serde(default)]
    pub omega_rad_s: Option<f64>,
    /// +1 or -1 along the lattice axis; `|k| = ω/c`.
    pub direction: f64,
}

impl LaserConfig {
    pub fn omega(&self) -> Result<f64, String> {
        match (self.frequency_hz, self.omega_rad_s) {
            (Some(f), None) => Ok(mwelim::units::hz_to_rad_s(f)),
            (None, Some(w)) => Ok(w),
            _ => Err("exactly one of frequency_hz, omega_rad_s required".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Box,
    SineSquared,
    Blackman,
    Tabulated,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub shape: ShapeKind,
    #[serde(default)]
    pub t0_s: f64,
    #[serde(default)]
    pub duration_s: Option<f64>,
    /// Target pulse area (rad); the amplitude is calibrated to it.
    #[serde(default)]
    pub area_rad: Option<f64>,
    /// Peak single-photon Rabi frequency, used when no area is given.
    #[serde(default)]
    pub amplitude_rad_s: Option<f64>,
    /// Blackman `(a0, a1, a2)` relative to the amplitude.
    #[serde(default = "blackman_default")]
    pub blackman: [f64; 3],
    /// Two-column CSV `time_s, amplitude_rad_per_s` for tabulated pulses.
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

fn blackman_default() -> [f64; 3] {
    [0.42, 0.5, 0.08]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentumConfig {
    #[serde(default = "one")]
    pub families: usize,
    /// Family spacing in units of the peak two-photon Rabi frequency.
    #[serde(default = "quarter")]
    pub spacing_over_rabi: f64,
    /// Base momentum of the resonant family.
    #[serde(default)]
    pub resonance_momentum: f64,
    /// Explicit base momenta; overrides `families` and `spacing_over_rabi`.
    #[serde(default)]
    pub base_momenta: Option<Vec<f64>>,
    #[serde(default = "window_default")]
    pub window: [i64; 2],
}

fn one() -> usize {
    1
}
fn quarter() -> f64 {
    0.25
}
fn window_default() -> [i64; 2] {
    [-2, 2]
}

impl Default for MomentumConfig {
    fn default() -> Self {
        MomentumConfig {
            families: 1,
            spacing_over_rabi: 0.25,
            resonance_momentum: 0.0,
            base_momenta: None,
            window: window_default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    /// `five_level` for the built-in benchmark, or give the blocks inline.
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub relevant: Vec<String>,
    #[serde(default)]
    pub irrelevant: Vec<String>,
    #[serde(default)]
    pub delta_rad_s: Vec<Vec<f64>>,
    #[serde(default)]
    pub xi_rad_s: Vec<Vec<f64>>,
    /// `Ω` with one row per irrelevant level.
    #[serde(default)]
    pub omega_rad_s: Vec<Vec<f64>>,
    /// Added to every diagonal entry of `Ξ`.
    #[serde(default)]
    pub xi_shift_rad_s: f64,
    #[serde(default = "unit")]
    pub coupling_scale: f64,
    #[serde(default = "five_window")]
    pub window_s: [f64; 2],
}

fn unit() -> f64 {
    1.0
}
fn five_window() -> [f64; 2] {
    [0.0, 4.0]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// Every family starts with all amplitude in this level at `n = 0`.
    pub level: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DetuningChoice {
    #[default]
    Listed,
    Derived,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EliminationConfig {
    #[serde(default = "one")]
    pub order: usize,
    #[serde(default = "closed")]
    pub s_mode: SMode,
    /// Raman: shift `ω_e` onto two-photon resonance for the resonant family.
    #[serde(default = "yes")]
    pub resonance_correction: bool,
    #[serde(default)]
    pub double_raman_detunings: DetuningChoice,
}

fn closed() -> SMode {
    SMode::Closed
}
fn yes() -> bool {
    true
}

impl Default for EliminationConfig {
    fn default() -> Self {
        EliminationConfig {
            order: 1,
            s_mode: SMode::Closed,
            resonance_correction: true,
            double_raman_detunings: DetuningChoice::Listed,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Number of sample intervals (`samples + 1` rows per level).
    #[serde(default = "hundred")]
    pub samples: usize,
    /// Space samples evenly in pulse area instead of time.
    #[serde(default)]
    pub area_grid: bool,
}

fn hundred() -> usize {
    100
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { samples: 100, area_grid: false }
    }
}

impl Scenario {
    pub fn from_str(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut s: Scenario = serde_path_to_error::deserialize(de).map_err(|e| CliError::Config {
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        s.base_dir = base_dir.to_path_buf();
        s.check()?;
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn check(&self) -> Result<(), CliError> {
        let bad = |field: &str, message: &str| CliError::Config { field: field.into(), message: message.into() };
        if self.output.samples == 0 {
            return Err(bad("output.samples", "must be at least 1"));
        }
        if self.elimination.order == 0 {
            return Err(bad("elimination.order", "must be at least 1"));
        }
        if self.kind == SystemKind::FiveLevel {
            if self.matrix.is_none() {
                return Err(bad("matrix", "required for kind five_level"));
            }
            return Ok(());
        }
        match (&self.atom_preset, &self.atom) {
            (Some(_), Some(_)) => return Err(bad("atom", "give atom_preset or atom, not both")),
            (None, None) => return Err(bad("atom_preset", "an atom is required for ladder systems")),
            _ => {}
        }
        let want = match self.kind {
            SystemKind::Raman | SystemKind::Bragg => 2,
            _ => 4,
        };
        if self.lasers.len() != want {
            return Err(bad("lasers", &format!("{} needs {want} lasers, got {}", self.kind.name(), self.lasers.len())));
        }
        for (i, l) in self.lasers.iter().enumerate() {
            l.omega().map_err(|m| bad(&format!("lasers[{i}]"), &m))?;
            if l.direction.abs() != 1.0 {
                return Err(bad(&format!("lasers[{i}].direction"), "must be +1 or -1"));
            }
        }
        let Some(p) = &self.pulse else {
            return Err(bad("pulse", "required for ladder systems"));
        };
        if p.area_rad.is_some() && p.amplitude_rad_s.is_some() {
            return Err(bad("pulse", "give area_rad or amplitude_rad_s, not both"));
        }
        if p.shape == ShapeKind::Tabulated {
            if p.csv.is_none() {
                return Err(bad("pulse.csv", "required for tabulated pulses"));
            }
        } else {
            if p.duration_s.is_none() {
                return Err(bad("pulse.duration_s", "required for windowed pulses"));
            }
            if p.area_rad.is_none() && p.amplitude_rad_s.is_none() {
                return Err(bad("pulse", "give area_rad or amplitude_rad_s"));
            }
        }
        if self.momentum.families == 0 {
            return Err(bad("momentum.families", "must be at least 1"));
        }
        if self.momentum.window[0] > 0 || self.momentum.window[1] < 0 {
            return Err(bad("momentum.window", "must contain site 0"));
        }
        Ok(())
    }

    pub fn atom_constants(&self) -> Result<AtomConstants, CliError> {
        match (&self.atom_preset, &self.atom) {
            (Some(name), _) => Ok(AtomConstants::preset(name)?),
            (None, Some(a)) => {
                a.validate()?;
                Ok(a.clone())
            }
            (None, None) => Err(CliError::Config { field: "atom_preset".into(), message: "missing".into() }),
        }
    }
}

/// Parses `pi`, `pi/2`, `2pi`, `3pi/4` or a plain number (rad).
pub fn parse_area(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace(['π', ' '], "pi");
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.to_string(), b.parse::<f64>().map_err(|_| format!("bad area `{s}`"))?),
        None => (t.clone(), 1.0),
    };
    let value = if let Some(coef) = num.strip_suffix("pi") {
        let c = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| format!("bad area `{s}`"))? };
        c * std::f64::consts::PI
    } else {
        num.parse::<f64>().map_err(|_| format!("bad area `{s}`"))?
    };
    let v = value / den;
    if !(v.is_finite() && v > 0.0) {
        return Err(format!("area must be positive, got `{s}`"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn areas() {
        assert_eq!(parse_area("pi").unwrap(), PI);
        assert_eq!(parse_area("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_area("3pi/4").unwrap(), 0.75 * PI);
        assert_eq!(parse_area("π/2").unwrap(), PI / 2.0);
        assert_eq!(parse_area("1.5").unwrap(), 1.5);
        assert!(parse_area("-pi").is_err());
        assert!(parse_area("tau").is_err());
    }

    #[test]
    fn unknown_field_is_named() {
        let text = r#"{"kind": "five_level", "matrix": {"preset": "five_level"}, "initial": {"level": "g"}, "output": {"sampels": 3}}"#;
        match Scenario::from_str(text, Path::new(".")) {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "output.sampels"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_type_is_named() {
        let text = r#"{"kind": "raman", "atom_preset": "rb87_d2", "lasers": [{"from": "e", "to": "a", "frequency_hz": "x", "direction": 1}], "initial": {"level": "g"}}"#;
        match Scenario::from_str(text, Path::new(".")) {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "lasers[0].frequency_hz"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn laser_count_checked() {
        let text = r#"{"kind": "double_bragg", "atom_preset": "rb87_d2", "lasers": [], "initial": {"level": "g"}}"#;
        match Scenario::from_str(text, Path::new(".")) {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "lasers"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hz_keys_are_converted() {
        let l = LaserConfig { from: "g".into(), to: "a".into(), frequency_hz: Some(1.0), omega_rad_s: None, direction: 1.0 };
        assert_eq!(l.omega().unwrap(), 2.0 * PI);
    }
}
