use super::com::{ComSystem, CouplingInput};
use super::{AtomConstants, LaserSpec, SystemKind};
use crate::elimination::s_integral::Detuning;
use crate::error::{Error, Result};
use crate::hilbert::{InternalSpace, MomentumLadder, Window};
use crate::units::Kinematics;

/// Momentum families and the ladder window of each family.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderConfig {
    /// Base momenta in units of `ħ k_ref`.
    pub base_momenta: Vec<f64>,
    pub window: Window,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig { base_momenta: vec![0.0], window: Window::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanOptions {
    /// Shift `ω_e` so that the two-photon transition is resonant (light
    /// shifts aside) for the family based at this momentum.
    pub resonance_momentum: Option<f64>,
}

impl Default for RamanOptions {
    fn default() -> Self {
        RamanOptions { resonance_momentum: Some(0.0) }
    }
}

/// Which constants enter the cross detunings `γ₁₂`, `γ₂₁` of the double
/// Raman system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DoubleRamanDetunings {
    /// `γ₁₂ = ν₂ + ω_a1 - ω_e - ω₁ + ω_r2`, `γ₂₁ = -ν₁ + ω_a2 - ω_g - ω₂ + ω_r1`.
    #[default]
    Listed,
    /// The energy difference of the levels actually coupled by each laser.
    Derived,
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn k_ref(k1: f64, k2: f64) -> Result<f64> {
    let k = (k2 - k1).abs();
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Grid("lasers 1 and 2 must differ in wavevector".into()));
    }
    Ok(k)
}

/// Ancilla frequency, falling back to the single excited level `a`.
fn ancilla(c: &AtomConstants, label: &str) -> Result<f64> {
    c.level(label).or_else(|_| c.level("a"))
}

fn input(label: &str, l: &LaserSpec, rel: &str, anc: &str, w: f64) -> CouplingInput {
    CouplingInput {
        label: label.into(),
        relevant: rel.into(),
        ancilla: anc.into(),
        envelope: l.envelope.clone(),
        k: l.k,
        phase_freq: w,
        gamma_override: None,
    }
}

/// Λ system: laser 1 drives `e ↔ a`, laser 2 drives `g ↔ a`.
///
/// Frame: `Δ = diag(K + ω_e + ω₁, K + ω_g + ω₂)`, `Ξ = K + ω_a`, with
/// `ω_g + ω₂` subtracted from every level.
pub fn raman_system(
    constants: &AtomConstants,
    laser1: &LaserSpec,
    laser2: &LaserSpec,
    ladder: &LadderConfig,
    opts: &RamanOptions,
) -> Result<ComSystem> {
    laser1.expect("e", "a", "laser 1")?;
    laser2.expect("g", "a", "laser 2")?;
    let kref = k_ref(laser1.k, laser2.k)?;
    let kin = Kinematics::new(constants.mass_kg, kref);
    let reference = constants.level("g")? + laser2.omega;
    let mut e = constants.level("e")? + laser1.omega - reference;
    let a = constants.level("a")? - reference;
    let mut notes = Vec::new();
    if let Some(p) = opts.resonance_momentum {
        // e sits one two-photon kick away from g within a family.
        let pe = p + (laser2.k - laser1.k) / kref;
        let correction = kin.kinetic(p) - kin.kinetic(pe) - e;
        e += correction;
        notes.push(format!(
            "ω_e shifted by {correction:.6e} rad/s for two-photon resonance at p = {p} ħk_ref"
        ));
    }
    let internal = InternalSpace::new(strings(&["e", "g", "a"]), vec![e, 0.0, a], vec![0, 1], vec![2])?;
    let lad = MomentumLadder::new(kin, ladder.base_momenta.clone(), vec![0.0, 0.0, laser2.k / kref], ladder.window)?;
    let inputs = vec![input("Ω_e", laser1, "e", "a", 0.0), input("Ω_g", laser2, "g", "a", 0.0)];
    let mut sys = ComSystem::new(SystemKind::Raman, internal, lad, inputs, reference)?;
    sys.notes.extend(notes);
    Ok(sys)
}

/// Retro-reflected Λ system with ancillas `a1` (`+k`) and `a2` (`-k`).
/// `lasers` = `[e↔a1 (k₁), g↔a1 (k₂), e↔a2 (-k₁), g↔a2 (-k₂)]`.
pub fn double_raman_system(
    constants: &AtomConstants,
    lasers: &[LaserSpec; 4],
    ladder: &LadderConfig,
    detunings: DoubleRamanDetunings,
) -> Result<ComSystem> {
    lasers[0].expect("e", "a1", "laser 1")?;
    lasers[1].expect("g", "a1", "laser 2")?;
    lasers[2].expect("e", "a2", "laser 3")?;
    lasers[3].expect("g", "a2", "laser 4")?;
    let (k1, k2) = (lasers[0].k, lasers[1].k);
    let kref = k_ref(k1, k2)?;
    let kin = Kinematics::new(constants.mass_kg, kref);
    let (w1, w2) = (lasers[0].omega, lasers[1].omega);
    let reference = constants.level("g")? + w2;
    let e = constants.level("e")? + w1 - reference;
    let a1 = ancilla(constants, "a1")? - reference;
    let a2 = ancilla(constants, "a2")? - reference;
    let internal =
        InternalSpace::new(strings(&["e", "g", "a1", "a2"]), vec![e, 0.0, a1, a2], vec![0, 1], vec![2, 3])?;
    let lad = MomentumLadder::new(
        kin,
        ladder.base_momenta.clone(),
        vec![0.0, 0.0, k2 / kref, -k2 / kref],
        ladder.window,
    )?;
    let mut inputs = vec![
        input("Ω_e+", &lasers[0], "e", "a1", 0.0),
        input("Ω_g+", &lasers[1], "g", "a1", 0.0),
        input("Ω_e-", &lasers[2], "e", "a2", 0.0),
        input("Ω_g-", &lasers[3], "g", "a2", 0.0),
    ];
    let mut notes = Vec::new();
    if detunings == DoubleRamanDetunings::Listed {
        // γ₁₂ references e + ω₁ although laser 2 couples g; γ₂₁ the reverse.
        inputs[1].gamma_override =
            Some(Detuning { constant: a1 - e + kin.recoil(lasers[1].k), per_momentum: kin.doppler(lasers[1].k, 1.0) });
        inputs[2].gamma_override =
            Some(Detuning { constant: a2 + kin.recoil(lasers[2].k), per_momentum: kin.doppler(lasers[2].k, 1.0) });
        notes.push("cross detunings γ₁₂, γ₂₁ use the listed level combinations".to_string());
    }
    let mut sys = ComSystem::new(SystemKind::DoubleRaman, internal, lad, inputs, reference)?;
    sys.notes.extend(notes);
    Ok(sys)
}

/// Two-level Bragg system. The ancilla is rotated at `ω₁`, so laser 2
/// keeps the phase `e^{-iω_L t}` with `ω_L = ω₂ - ω₁`.
pub fn bragg_system(
    constants: &AtomConstants,
    laser1: &LaserSpec,
    laser2: &LaserSpec,
    ladder: &LadderConfig,
) -> Result<ComSystem> {
    laser1.expect("g", "a", "laser 1")?;
    laser2.expect("g", "a", "laser 2")?;
    let kref = k_ref(laser1.k, laser2.k)?;
    let kin = Kinematics::new(constants.mass_kg, kref);
    let reference = constants.level("g")?;
    let a = constants.level("a")? - laser1.omega - reference;
    let omega_l = laser2.omega - laser1.omega;
    let internal = InternalSpace::new(strings(&["g", "a"]), vec![0.0, a], vec![0], vec![1])?;
    let lad = MomentumLadder::new(kin, ladder.base_momenta.clone(), vec![0.0, laser1.k / kref], ladder.window)?;
    let inputs = vec![input("Ω_1", laser1, "g", "a", 0.0), input("Ω_2", laser2, "g", "a", omega_l)];
    ComSystem::new(SystemKind::Bragg, internal, lad, inputs, reference)
}

/// Retro-reflected Bragg system.
/// `lasers` = `[g↔a1 (k₁), g↔a1 (k₂), g↔a2 (-k₁), g↔a2 (-k₂)]`.
pub fn double_bragg_system(
    constants: &AtomConstants,
    lasers: &[LaserSpec; 4],
    ladder: &LadderConfig,
) -> Result<ComSystem> {
    lasers[0].expect("g", "a1", "laser 1")?;
    lasers[1].expect("g", "a1", "laser 2")?;
    lasers[2].expect("g", "a2", "laser 3")?;
    lasers[3].expect("g", "a2", "laser 4")?;
    let (k1, k2) = (lasers[0].k, lasers[1].k);
    let kref = k_ref(k1, k2)?;
    let kin = Kinematics::new(constants.mass_kg, kref);
    let w1 = lasers[0].omega;
    let omega_l = lasers[1].omega - w1;
    let reference = constants.level("g")?;
    let a1 = ancilla(constants, "a1")? - w1 - reference;
    let a2 = ancilla(constants, "a2")? - w1 - reference;
    let internal = InternalSpace::new(strings(&["g", "a1", "a2"]), vec![0.0, a1, a2], vec![0], vec![1, 2])?;
    let lad =
        MomentumLadder::new(kin, ladder.base_momenta.clone(), vec![0.0, k1 / kref, -k1 / kref], ladder.window)?;
    let w3 = lasers[2].omega - w1;
    let w4 = lasers[3].omega - w1;
    let inputs = vec![
        input("Ω_1+", &lasers[0], "g", "a1", 0.0),
        input("Ω_2+", &lasers[1], "g", "a1", omega_l),
        input("Ω_1-", &lasers[2], "g", "a2", w3),
        input("Ω_2-", &lasers[3], "g", "a2", w4),
    ];
    ComSystem::new(SystemKind::DoubleBragg, internal, lad, inputs, reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::s_integral::SMode;
    use crate::linalg::{frobenius, is_hermitian};
    use crate::pulses::PulseShape;
    use crate::units::{hz_to_rad_s, wavevector};
    use std::collections::BTreeMap;

    fn rb() -> AtomConstants {
        AtomConstants::preset("rb87_d2").unwrap()
    }

    fn toy() -> AtomConstants {
        let levels: BTreeMap<String, f64> =
            [("g", 0.0), ("e", -3.0e7), ("a", 5.0e8), ("a1", 5.1e8), ("a2", 4.9e8)]
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect();
        AtomConstants { label: "toy".into(), mass_kg: 1.44316060e-25, levels, quoted: BTreeMap::new(), provenance: BTreeMap::new() }
    }

    fn env(a0: f64) -> PulseShape {
        PulseShape::sine_squared(a0, 0.0, 1e-6).unwrap()
    }

    const K: f64 = 8.0e6;

    fn toy_raman(a0: f64, opts: &RamanOptions) -> ComSystem {
        let l1 = LaserSpec::new(K, 2.0e8, env(a0), "e", "a");
        let l2 = LaserSpec::new(-K, 1.7e8, env(a0), "g", "a");
        raman_system(&toy(), &l1, &l2, &LadderConfig { base_momenta: vec![0.0, 0.3], window: Window::new(-3, 3).unwrap() }, opts)
            .unwrap()
    }

    fn four(a0: f64, bragg: bool) -> [LaserSpec; 4] {
        let (r1, r2) = if bragg { ("g", "g") } else { ("e", "g") };
        let (w1, w2) = if bragg { (2.0e8, 2.0e8 + 1.0e5) } else { (2.0e8, 1.7e8) };
        [
            LaserSpec::new(K, w1, env(a0), r1, "a1"),
            LaserSpec::new(-K, w2, env(a0), r2, "a1"),
            LaserSpec::new(-K, w1, env(a0), r1, "a2"),
            LaserSpec::new(K, w2, env(a0), r2, "a2"),
        ]
    }

    fn toy_ladder() -> LadderConfig {
        LadderConfig { base_momenta: vec![0.0, 0.25], window: Window::new(-3, 3).unwrap() }
    }

    fn all_systems(a0: f64) -> Vec<ComSystem> {
        let c = toy();
        vec![
            toy_raman(a0, &RamanOptions::default()),
            double_raman_system(&c, &four(a0, false), &toy_ladder(), DoubleRamanDetunings::Listed).unwrap(),
            bragg_system(
                &c,
                &LaserSpec::new(K, 2.0e8, env(a0), "g", "a"),
                &LaserSpec::new(-K, 2.0e8 + 1.0e5, env(a0), "g", "a"),
                &toy_ladder(),
            )
            .unwrap(),
            double_bragg_system(&c, &four(a0, true), &toy_ladder()).unwrap(),
        ]
    }

    #[test]
    fn zero_coupling_leaves_delta() {
        for s in all_systems(0.0) {
            for mode in [SMode::Closed, SMode::Rwa, SMode::Quadrature] {
                let eff = s.effective(mode, 1e-12);
                let delta = s.delta_operator();
                for &p0 in &s.ladder.base_momenta {
                    let d = eff.assemble(0.4e-6, p0, s.ladder.window) - delta.assemble(0.4e-6, p0, s.ladder.window);
                    assert_eq!(frobenius(&d), 0.0, "{:?}", s.kind);
                }
            }
        }
    }

    #[test]
    fn full_hamiltonian_is_hermitian_and_shares_delta() {
        for s in all_systems(3.0e6) {
            let full = s.full_hamiltonian();
            let delta = s.delta_operator();
            let sites = s.ladder.window.sites();
            let rel: Vec<usize> =
                s.internal.relevant.iter().flat_map(|&l| (0..sites).map(move |i| l * sites + i)).collect();
            for t in [0.13e-6, 0.5e-6, 0.77e-6] {
                let h = full.assemble(t, 0.25, s.ladder.window);
                assert!(is_hermitian(&h, 1e-14), "{:?}", s.kind);
                let block = h.select_rows(&rel).select_columns(&rel);
                assert_eq!(block, delta.assemble(t, 0.25, s.ladder.window));
            }
        }
    }

    #[test]
    fn coupling_block_vanishes_at_window_start() {
        let s = toy_raman(3.0e6, &RamanOptions::default());
        let h = s.full_hamiltonian().assemble(0.0, 0.0, s.ladder.window);
        let d = s.full_hamiltonian().assemble(0.0, 0.0, s.ladder.window) - s.delta_full(0.0);
        assert_eq!(frobenius(&d), 0.0);
        assert!(frobenius(&h) > 0.0);
    }

    #[test]
    fn raman_detunings_at_rest() {
        let c = toy();
        let s = toy_raman(1.0, &RamanOptions { resonance_momentum: None });
        let kin = s.ladder.kinematics;
        let g1 = c.level("a").unwrap() - c.level("e").unwrap() - 2.0e8 + kin.recoil(K);
        let g2 = c.level("a").unwrap() - c.level("g").unwrap() - 1.7e8 + kin.recoil(-K);
        assert!((s.couplings[0].gamma.at(0.0) - g1).abs() < 1e-6);
        assert!((s.couplings[1].gamma.at(0.0) - g2).abs() < 1e-6);
        assert_eq!(s.couplings[0].gamma.per_momentum, kin.doppler(K, 1.0));
    }

    #[test]
    fn raman_resonance_correction() {
        let s = toy_raman(1.0, &RamanOptions { resonance_momentum: Some(0.0) });
        let h = s.delta_operator().assemble(0.0, 0.0, s.ladder.window);
        // g at n = 0 and e one kick away are degenerate.
        let sites = s.ladder.window.sites();
        let g0 = h[(sites + 3, sites + 3)].re;
        let e = s.couplings[0].shift;
        let e_site = (3 - e) as usize;
        assert!((h[(e_site, e_site)].re - g0).abs() < 1e-9 * g0.abs().max(1.0));
        assert_eq!(s.notes.len(), 1);
    }

    #[test]
    fn raman_off_diagonals_shift_by_one_step() {
        let s = toy_raman(1.0, &RamanOptions::default());
        let eff = s.effective(SMode::Rwa, 0.0);
        let mut shifts: Vec<i64> = eff.terms.iter().filter(|t| t.row != t.col).map(|t| t.shift).collect();
        shifts.sort();
        assert_eq!(shifts, vec![-1, 1]);
        assert!(eff.terms.iter().filter(|t| t.row == t.col).all(|t| t.shift == 0));
    }

    #[test]
    fn double_raman_detunings_and_shifts() {
        let c = toy();
        let listed = double_raman_system(&c, &four(1.0, false), &toy_ladder(), DoubleRamanDetunings::Listed).unwrap();
        let derived = double_raman_system(&c, &four(1.0, false), &toy_ladder(), DoubleRamanDetunings::Derived).unwrap();
        let kin = listed.ladder.kinematics;
        // γ₂₁ at p = 0: ω_a2 - ω_g - ω₂ + ω_r1.
        let g21 = c.level("a2").unwrap() - c.level("g").unwrap() - 1.7e8 + kin.recoil(K);
        assert!((listed.couplings[2].gamma.at(0.0) - g21).abs() < 1e-6);
        assert_eq!(listed.couplings[2].gamma.per_momentum, kin.doppler(-K, 1.0));
        // The exact level combination for the same coupling.
        let exact = c.level("a2").unwrap() - c.level("e").unwrap() - 2.0e8 + kin.recoil(K);
        assert!((derived.couplings[2].gamma.at(0.0) - exact).abs() < 1e-6);
        assert_eq!(listed.couplings[0].gamma, derived.couplings[0].gamma);

        let eff = listed.effective(SMode::Rwa, 0.0);
        let mut s12: Vec<i64> = eff.terms.iter().filter(|t| t.row == 0 && t.col == 1).map(|t| t.shift).collect();
        s12.sort();
        assert_eq!(s12, vec![-1, 1]);
    }

    #[test]
    fn bragg_detunings() {
        let c = toy();
        let s = &all_systems(1.0)[2];
        let kin = s.ladder.kinematics;
        let dw = c.level("a").unwrap() - c.level("g").unwrap() - 2.0e8;
        assert!((s.couplings[0].gamma.at(0.7) - (kin.doppler(K, 0.7) + kin.recoil(K) + dw)).abs() < 1e-6);
        let wl = 1.0e5;
        assert!((s.couplings[1].gamma.at(0.7) - (kin.doppler(-K, 0.7) + kin.recoil(-K) + dw - wl)).abs() < 1e-6);
    }

    #[test]
    fn double_bragg_term_count() {
        let s = &all_systems(1.0)[3];
        let eff = s.effective(SMode::Rwa, 0.0);
        let s_terms: Vec<_> = eff.terms.iter().filter(|t| t.label.starts_with('S')).collect();
        assert_eq!(s_terms.len(), 8);
        assert_eq!(s_terms.iter().filter(|t| t.shift == 0).count(), 4);
        assert_eq!(s_terms.iter().filter(|t| t.shift != 0).count(), 4);
    }

    #[test]
    fn incommensurate_wavevectors_are_rejected() {
        let l1 = LaserSpec::new(K, 2.0e8, env(1.0), "e", "a");
        let l2 = LaserSpec::new(-K, 1.7e8, env(1.0), "g", "a");
        let ok = double_raman_system(&toy(), &four(1.0, false), &toy_ladder(), DoubleRamanDetunings::Derived);
        assert!(ok.is_ok());
        let mut bad = four(1.0, false);
        bad[2].k = -0.6 * K;
        assert!(matches!(
            double_raman_system(&toy(), &bad, &toy_ladder(), DoubleRamanDetunings::Derived),
            Err(Error::Grid(_))
        ));
        assert!(raman_system(&toy(), &l2, &l1, &toy_ladder(), &RamanOptions::default()).is_err());
    }

    #[test]
    fn rb_quoted_recoil() {
        let c = rb();
        let w1 = hz_to_rad_s(c.quoted["laser_frequency_hz"]);
        let kin = Kinematics::new(c.mass_kg, 1.0);
        let wr = kin.recoil(wavevector(w1));
        assert!((wr - 9869.0).abs() < 1.0, "{wr}");
    }
}
