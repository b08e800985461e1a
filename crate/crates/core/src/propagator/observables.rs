use crate::hilbert::StateVector;
use crate::units::Kinematics;
use serde::Serialize;

/// One bin of the momentum density: one ladder site of one family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityRow {
    pub family: usize,
    pub level: usize,
    pub n: i64,
    /// Momentum in units of `ħ k_ref`.
    pub momentum: f64,
    /// `ν = k_eff p / m` divided by the effective Rabi frequency.
    pub doppler_over_rabi: f64,
    pub density: f64,
}

/// Population of each level within one family.
pub fn family_populations(state: &StateVector, family: usize) -> Vec<f64> {
    let f = &state.families[family];
    (0..f.n_levels).map(|l| f.level_population(l)).collect()
}

/// `|ψ(level, n)|²` for every family, level and site, with the Doppler axis
/// `ν = k_eff p / m` in units of `rabi`.
pub fn momentum_density(
    state: &StateVector,
    offsets: &[f64],
    kinematics: &Kinematics,
    k_eff: f64,
    rabi: f64,
) -> Vec<DensityRow> {
    let mut rows = Vec::new();
    for (fi, fam) in state.families.iter().enumerate() {
        for (level, offset) in offsets.iter().enumerate().take(fam.n_levels) {
            for n in fam.window.n_min..=fam.window.n_max {
                let p = fam.base_momentum + offset + n as f64;
                rows.push(DensityRow {
                    family: fi,
                    level,
                    n,
                    momentum: p,
                    doppler_over_rabi: kinematics.doppler(k_eff, p) / rabi,
                    density: fam.get(level, n).norm_sqr(),
                });
            }
        }
    }
    rows
}
