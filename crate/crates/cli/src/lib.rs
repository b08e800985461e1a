//! Scenario runner for the `mwelim` library: JSON scenarios in, CSV and
//! JSON artifacts out.

pub mod error;
pub mod output;
pub mod run;
pub mod scenario;

use error::CliError;
use scenario::Scenario;
use std::path::Path;

/// Scenarios shipped with the binary.
pub const BUNDLED: [(&str, &str); 5] = [
    ("five_level_compare", include_str!("../scenarios/five_level_compare.json")),
    ("raman_pi", include_str!("../scenarios/raman_pi.json")),
    ("bragg_pi", include_str!("../scenarios/bragg_pi.json")),
    ("double_raman_pi", include_str!("../scenarios/double_raman_pi.json")),
    ("double_bragg_pi", include_str!("../scenarios/double_bragg_pi.json")),
];

pub fn bundled(name: &str) -> Result<Scenario, CliError> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| CliError::Config { field: "scenario".into(), message: format!("no bundled scenario `{name}`") })?;
    Scenario::from_str(text, Path::new("."))
}
