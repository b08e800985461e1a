//! Builders for the five systems: the five-level benchmark (a plain matrix
//! system) and four center-of-mass systems on a momentum ladder (Raman,
//! double Raman, Bragg, double Bragg). Each yields both the full Hamiltonian
//! and the first-order effective one.

mod builders;
mod com;
mod five_level;
mod raman_pulse;

pub use builders::{
    bragg_system, double_bragg_system, double_raman_system, raman_system, DoubleRamanDetunings, LadderConfig,
    RamanOptions,
};
pub use com::{ComCoupling, ComSystem, CouplingInput};
pub use five_level::{five_level_system, MatrixSystem};
pub use raman_pulse::{raman_pulse, RamanPulseConfig, RamanPulseSetup};

use crate::error::{Error, Result};
use crate::pulses::PulseShape;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    FiveLevel,
    Raman,
    DoubleRaman,
    Bragg,
    DoubleBragg,
}

impl SystemKind {
    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::FiveLevel => "five_level",
            SystemKind::Raman => "raman",
            SystemKind::DoubleRaman => "double_raman",
            SystemKind::Bragg => "bragg",
            SystemKind::DoubleBragg => "double_bragg",
        }
    }
}

/// Atom data: mass and internal level frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConstants {
    pub label: String,
    pub mass_kg: f64,
    /// Level frequencies in rad/s.
    pub levels: BTreeMap<String, f64>,
    /// Reference values quoted alongside the preset (not used in builders).
    #[serde(default)]
    pub quoted: BTreeMap<String, f64>,
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
}

const RB87_D2: &str = include_str!("../../presets/rb87_d2.json");

impl AtomConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass_kg > 0.0 && self.mass_kg.is_finite()) {
            return Err(Error::Invalid(format!("mass must be positive, got {}", self.mass_kg)));
        }
        if let Some((k, v)) = self.levels.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Invalid(format!("level {k} has non-finite frequency {v}")));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: AtomConstants = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Bundled presets by name.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "rb87_d2" => Self::from_json(RB87_D2),
            other => Err(Error::Invalid(format!("unknown atom preset `{other}`"))),
        }
    }

    pub fn level(&self, label: &str) -> Result<f64> {
        self.levels
            .get(label)
            .copied()
            .ok_or_else(|| Error::Invalid(format!("atom `{}` has no level `{label}`", self.label)))
    }
}

/// One laser beam driving one transition.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserSpec {
    /// Signed wavevector (rad/m); the sign encodes the direction.
    pub k: f64,
    /// Angular frequency (rad/s).
    pub omega: f64,
    pub envelope: PulseShape,
    /// `(relevant level, ancilla level)`.
    pub transition: (String, String),
}

impl LaserSpec {
    pub fn new(k: f64, omega: f64, envelope: PulseShape, from: &str, to: &str) -> Self {
        LaserSpec { k, omega, envelope, transition: (from.to_string(), to.to_string()) }
    }

    pub(crate) fn expect(&self, from: &str, to: &str, what: &str) -> Result<()> {
        if self.transition.0 != from || self.transition.1 != to {
            return Err(Error::Invalid(format!(
                "{what} must couple {from}→{to}, got {}→{}",
                self.transition.0, self.transition.1
            )));
        }
        if self.k == 0.0 || !self.k.is_finite() {
            return Err(Error::Invalid(format!("{what} needs a nonzero wavevector")));
        }
        Ok(())
    }
}

/// Any of the five systems.
#[derive(Debug, Clone)]
pub enum SystemSpec {
    Matrix(MatrixSystem),
    Ladder(ComSystem),
}

impl SystemSpec {
    pub fn kind(&self) -> SystemKind {
        match self {
            SystemSpec::Matrix(_) => SystemKind::FiveLevel,
            SystemSpec::Ladder(c) => c.kind,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_loads() {
        let rb = AtomConstants::preset("rb87_d2").unwrap();
        assert_eq!(rb.mass_kg, 1.44316060e-25);
        assert_eq!(rb.levels.len(), 3);
        assert!(rb.provenance.contains_key("levels.a"));
        assert!(AtomConstants::preset("cs133").is_err());
    }

    #[test]
    fn preset_rejects_unknown_fields_and_bad_mass() {
        assert!(AtomConstants::from_json(r#"{"label":"x","mass_kg":1,"levels":{},"spin":1}"#).is_err());
        assert!(AtomConstants::from_json(r#"{"label":"x","mass_kg":-1,"levels":{}}"#).is_err());
    }
}
