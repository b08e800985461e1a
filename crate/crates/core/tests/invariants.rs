use mwelim::elimination::s_integral::{s_integral_closed, s_integral_quadrature, s_integral_rwa};
use mwelim::hilbert::{plane_wave_shift, StateVector, Window};
use mwelim::linalg::{is_hermitian, spectral_norm, CMatrix};
use mwelim::models::{raman_system, AtomConstants, LadderConfig, LaserSpec, RamanOptions};
use mwelim::propagator::expm;
use mwelim::pulses::{calibrate_amplitude, pulse_area, PulseShape};
use mwelim::C64;
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

fn shape(kind: u8, a: f64, t0: f64, d: f64) -> PulseShape {
    match kind {
        0 => PulseShape::boxcar(a, t0, d),
        1 => PulseShape::sine_squared(a, t0, d),
        _ => PulseShape::blackman(0.42 * a, 0.5 * a, 0.08 * a, t0, d),
    }
    .unwrap()
}

fn toy_raman(a0: f64) -> mwelim::models::ComSystem {
    let levels: BTreeMap<String, f64> =
        [("g", 0.0), ("e", -1.0e7), ("a", 7.0e8)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let atom = AtomConstants {
        label: "toy".into(),
        mass_kg: 1.44316060e-25,
        levels,
        quoted: BTreeMap::new(),
        provenance: BTreeMap::new(),
    };
    let env = PulseShape::sine_squared(a0, 0.0, 1e-6).unwrap();
    let l1 = LaserSpec::new(8e6, 5.1e8, env.clone(), "e", "a");
    let l2 = LaserSpec::new(-8e6, 5.0e8, env, "g", "a");
    let ladder = LadderConfig { base_momenta: vec![0.0, 0.3], window: Window::new(-3, 3).unwrap() };
    raman_system(&atom, &l1, &l2, &ladder, &RamanOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn s_closed_matches_quadrature(
        kind in 0u8..3,
        a_n in 0.1f64..5.0,
        a_j in 0.1f64..5.0,
        d in 0.5f64..5.0,
        gamma in 20.0f64..300.0,
        frac in 0.01f64..1.0,
    ) {
        // Stay clear of the removable poles at γ = 2πm/T.
        prop_assume!((1..=2).all(|m| (gamma - 2.0 * PI * m as f64 / d).abs() > 1e-2 * gamma));
        let (sn, sj) = (shape(kind, a_n, 0.0, d), shape(kind, a_j, 0.0, d));
        let t = frac * d;
        let closed = s_integral_closed(&sn, &sj, gamma, 0.0, t).unwrap();
        let quad = s_integral_quadrature(&sn, &sj, gamma, 0.0, t, 1e-12).unwrap();
        prop_assert!((closed - quad).norm() <= 1e-9 * (1.0 + closed.norm()));
    }

    #[test]
    fn s_rwa_is_local(a_n in 0.1f64..5.0, a_j in 0.1f64..5.0, gamma in 1.0f64..1e3, frac in 0.01f64..0.99) {
        let (sn, sj) = (shape(1, a_n, 0.0, 2.0), shape(1, a_j, 0.0, 2.0));
        let t = 2.0 * frac;
        let v = s_integral_rwa(&sn, &sj, gamma, t).unwrap();
        let want = -sn.evaluate(t) * sj.evaluate(t) / gamma;
        prop_assert!((v.re - want).abs() <= 1e-14 * want.abs().max(1e-300));
        prop_assert_eq!(v.im, 0.0);
    }

    #[test]
    fn calibration_hits_area(kind in 0u8..3, area in 0.1f64..10.0, gamma in 1e3f64..1e9, d in 1e-6f64..1e-3) {
        let s = calibrate_amplitude(&shape(kind, 1.0, 0.0, d), gamma, area).unwrap();
        let got = pulse_area(&s, &s, gamma, d).unwrap();
        prop_assert!((got / area - 1.0).abs() < 1e-9);
    }

    #[test]
    fn full_raman_operator_is_hermitian(p0 in -3.0f64..3.0, frac in 0.0f64..1.0, a0 in 1e6f64..1e8) {
        let sys = toy_raman(a0);
        let h = sys.full_hamiltonian().assemble(frac * 1e-6, p0, sys.ladder.window);
        let scale = spectral_norm(&h);
        prop_assert!(is_hermitian(&h, 1e-14 * scale));
    }

    #[test]
    fn expm_of_anti_hermitian_is_unitary(entries in proptest::collection::vec(-5.0f64..5.0, 32)) {
        let n = 4;
        let a = CMatrix::from_fn(n, n, |i, j| C64::new(entries[i * n + j], entries[16 + i * n + j]));
        let h = &a + a.adjoint();
        let u = expm(&(h * C64::new(0.0, -1.0)));
        let dev = spectral_norm(&(u.adjoint() * &u - CMatrix::identity(n, n)));
        prop_assert!(dev < 1e-12, "‖U†U - 1‖ = {}", dev);
    }

    #[test]
    fn plane_wave_shift_preserves_norm_inside_window(level in 0usize..2, n in -4i64..=4, steps in -4i64..=4) {
        prop_assume!((n + steps).abs() <= 8);
        let mut f = mwelim::hilbert::FamilyState::zeros(0.25, 2, Window::default());
        f.set(level, n, C64::new(0.6, 0.8)).unwrap();
        let s = StateVector { families: vec![f], norm_tolerance: 1e-9 };
        let out = plane_wave_shift(&s, steps, 0.0).unwrap();
        prop_assert!((out.state.norm_sqr() - 1.0).abs() < 1e-15);
        prop_assert_eq!(out.state.families[0].get(level, n + steps), C64::new(0.6, 0.8));
    }
}
