use mwelim::elimination::{effective_hamiltonian, EffectiveBlock, SMode};
use mwelim::hilbert::{StateVector, Window};
use mwelim::models::{bragg_system, raman_system, AtomConstants, LadderConfig, LaserSpec, RamanOptions, SystemSpec};
use mwelim::propagator::{evolve, linspace, relative_error, IntegratorConfig};
use mwelim::pulses::PulseShape;
use mwelim::Error;
use std::collections::BTreeMap;
use std::f64::consts::PI;

fn toy_atom() -> AtomConstants {
    let levels: BTreeMap<String, f64> =
        [("g", 0.0), ("e", -1.0e7), ("a", 7.0e8)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
    AtomConstants { label: "toy".into(), mass_kg: 1.44316060e-25, levels, quoted: BTreeMap::new(), provenance: BTreeMap::new() }
}

fn toy_raman(area: f64, families: Vec<f64>) -> mwelim::models::ComSystem {
    let env = PulseShape::sine_squared(1.0, 0.0, 10e-6).unwrap();
    let l1 = LaserSpec::new(8e6, 5.1e8, env.clone(), "e", "a");
    let l2 = LaserSpec::new(-8e6, 5.0e8, env, "g", "a");
    let probe = LadderConfig { base_momenta: vec![0.0], window: Window::new(-2, 2).unwrap() };
    let (unit, _) = raman_system(&toy_atom(), &l1, &l2, &probe, &RamanOptions::default())
        .unwrap()
        .calibrated(area, 0.0)
        .unwrap();
    let l1 = LaserSpec { envelope: unit.couplings[0].envelope.clone(), ..l1 };
    let l2 = LaserSpec { envelope: unit.couplings[1].envelope.clone(), ..l2 };
    let ladder = LadderConfig { base_momenta: families, window: Window::new(-2, 2).unwrap() };
    raman_system(&toy_atom(), &l1, &l2, &ladder, &RamanOptions::default()).unwrap()
}

fn run_effective(sys: &mwelim::models::ComSystem, mode: SMode, times: &[f64]) -> mwelim::propagator::TrajectoryResult {
    let h = effective_hamiltonian(&SystemSpec::Ladder(sys.clone()), 1, mode).unwrap();
    let EffectiveBlock::Ladder(op) = h.block else { panic!("ladder block expected") };
    let g = sys.level("g").unwrap();
    let n = sys.ladder.base_momenta.len();
    let psi = StateVector::uniform_in_level(&sys.ladder, g, &vec![1.0; n])
        .unwrap()
        .select_levels(&sys.internal.relevant)
        .unwrap();
    evolve(&op, &psi, sys.t_start(), times, &IntegratorConfig::tolerances(1e-10, 1e-13)).unwrap()
}

#[test]
fn closed_and_rwa_effective_dynamics_agree_far_from_poles() {
    let sys = toy_raman(PI, vec![0.0]);
    let times = linspace(sys.t_start(), sys.t_end(), 20);
    let a = run_effective(&sys, SMode::Closed, &times);
    let b = run_effective(&sys, SMode::Rwa, &times);
    let d = relative_error(&a, &b, &[0, 1]).unwrap();
    // RWA drops terms of relative size 2π/(T|γ|) ≈ 3e-3.
    assert!(d.iter().all(|&x| x < 2e-2), "{d:?}");
}

#[test]
fn effective_norm_drift_is_bounded_by_non_hermiticity() {
    let sys = toy_raman(PI, vec![0.0]);
    let times = linspace(sys.t_start(), sys.t_end(), 10);
    let tr = run_effective(&sys, SMode::Closed, &times);
    assert!(tr.norm_drift(1.0) < 1e-2, "drift {}", tr.norm_drift(1.0));
}

#[test]
fn families_far_off_resonance_stay_in_ground_state() {
    let sys = toy_raman(PI, vec![0.0, 40.0]);
    let tr = run_effective(&sys, SMode::Rwa, &[sys.t_end()]);
    let st = tr.final_state().unwrap();
    let e_res = st.families[0].level_population(0) / st.families[0].norm_sqr();
    let e_off = st.families[1].level_population(0) / st.families[1].norm_sqr();
    assert!(e_res > 0.98, "{e_res}");
    assert!(e_off < 1e-2, "{e_off}");
}

/// Effective Bragg operator and initial state for a sine-squared pulse.
fn bragg(duration: f64, area: f64, window: Window) -> (mwelim::hilbert::BlockOperator, StateVector, f64, f64) {
    let levels: BTreeMap<String, f64> = [("g", 0.0), ("a", 7.0e8)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let atom = AtomConstants { label: "toy".into(), mass_kg: 1.44316060e-25, levels, quoted: BTreeMap::new(), provenance: BTreeMap::new() };
    let env = PulseShape::sine_squared(1.0, 0.0, duration).unwrap();
    let k = 8e6;
    let l1 = LaserSpec::new(k, 5e8, env.clone(), "g", "a");
    let l2 = LaserSpec::new(-k, 5e8, env, "g", "a");
    let ladder = LadderConfig { base_momenta: vec![0.5], window };
    let (sys, _) = bragg_system(&atom, &l1, &l2, &ladder).unwrap().calibrated(area, 0.5).unwrap();
    let h = effective_hamiltonian(&SystemSpec::Ladder(sys.clone()), 1, SMode::Rwa).unwrap();
    let EffectiveBlock::Ladder(op) = h.block else { panic!("ladder block expected") };
    let psi = StateVector::uniform_in_level(&sys.ladder, 0, &[1.0]).unwrap().select_levels(&[0]).unwrap();
    (op, psi, sys.t_start(), sys.t_end())
}

#[test]
fn bragg_pulse_transfers_between_momentum_sites() {
    let (op, psi, t0, t1) = bragg(1e-3, PI, Window::new(-2, 2).unwrap());
    let tr = evolve(&op, &psi, t0, &[t1], &IntegratorConfig::default()).unwrap();
    let f = &tr.final_state().unwrap().families[0];
    let moved = f.get(0, -1).norm_sqr() / f.norm_sqr();
    assert!(moved > 0.98, "{moved}");
}

#[test]
fn short_strong_pulse_grows_the_window() {
    // Far outside the Bragg regime population spreads over many orders.
    let (op, psi, t0, t1) = bragg(2e-6, 20.0 * PI, Window::new(-1, 1).unwrap());
    let tr = evolve(&op, &psi, t0, &[t1], &IntegratorConfig::default()).unwrap();
    let f = &tr.final_state().unwrap().families[0];
    assert!(f.window.sites() > 3);
    assert!(tr.truncation_loss < 1e-6, "{}", tr.truncation_loss);
}

#[test]
fn window_cap_turns_spreading_into_truncation_error() {
    let (op, psi, t0, t1) = bragg(2e-6, 20.0 * PI, Window::new(-1, 1).unwrap());
    let cfg = IntegratorConfig { max_sites: 3, truncation_cap: 1e-12, ..IntegratorConfig::default() };
    let r = evolve(&op, &psi, t0, &[t1], &cfg);
    assert!(matches!(r, Err(Error::Truncation { .. })), "{:?}", r.map(|t| t.truncation_loss));
}
