//! `Ŝ_nj(γ, t) = -i Ω_n*(t) ∫_{t0}^{t} Ω_j(s) e^{-iγ(t-s)} ds`.
//!
//! `γ` is diagonal in momentum, so the integral is evaluated as a scalar for
//! each momentum value.

use crate::error::{Error, Result};
use crate::pulses::PulseShape;
use crate::quadrature::{exp_integral, integrate, QuadOptions};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative distance from a denominator at which the closed form refuses.
pub const POLE_TOLERANCE: f64 = 1e-10;

/// Panel length cap for oscillatory quadrature, in units of `π/|γ|`.
pub const PANEL_FRACTION: f64 = 0.25;

/// `γ(p) = constant + per_momentum · p`, in rad/s with `p` in ladder units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detuning {
    pub constant: f64,
    pub per_momentum: f64,
}

impl Detuning {
    pub fn constant(gamma: f64) -> Self {
        Detuning { constant: gamma, per_momentum: 0.0 }
    }

    pub fn at(&self, p: f64) -> f64 {
        self.constant + self.per_momentum * p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SMode {
    /// Exact closed form, every term kept.
    Closed,
    /// Closed form with the oscillating terms dropped: `-Ω_n(t)Ω_j(t)/γ`.
    Rwa,
    /// Adaptive oscillatory quadrature.
    Quadrature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SIntegralSpec {
    /// Conjugated envelope `Ω_n`.
    pub shape_n: PulseShape,
    /// Integrated envelope `Ω_j`.
    pub shape_j: PulseShape,
    pub gamma: Detuning,
    pub t0: f64,
}

impl SIntegralSpec {
    pub fn new(shape_n: PulseShape, shape_j: PulseShape, gamma: Detuning, t0: f64) -> Self {
        SIntegralSpec { shape_n, shape_j, gamma, t0 }
    }

    pub fn evaluate(&self, p: f64, t: f64, mode: SMode, tol: f64) -> Result<C64> {
        let g = self.gamma.at(p);
        match mode {
            SMode::Closed => s_integral_closed(&self.shape_n, &self.shape_j, g, self.t0, t),
            SMode::Rwa => s_integral_rwa(&self.shape_n, &self.shape_j, g, t),
            SMode::Quadrature => s_integral_quadrature(&self.shape_n, &self.shape_j, g, self.t0, t, tol),
        }
    }
}

fn denominator_name(freq: f64, duration: f64) -> String {
    let m = (freq * duration / (2.0 * PI)).round() as i64;
    match m {
        0 => "γ".to_string(),
        1 => "γ + 2π/T".to_string(),
        -1 => "γ - 2π/T".to_string(),
        m if m > 0 => format!("γ + {}π/T", 2 * m),
        m => format!("γ - {}π/T", -2 * m),
    }
}

/// Checks `γ` against every denominator `γ + ω` of the closed form of `shape`.
pub fn check_poles(shape: &PulseShape, gamma: f64) -> Result<()> {
    let comps = shape
        .components()
        .ok_or_else(|| Error::Unsupported(format!("no closed form for {} envelopes", shape.kind_name())))?;
    for c in comps.iter().filter(|c| c.coeff != 0.0) {
        let d = gamma + c.freq;
        if d.abs() <= POLE_TOLERANCE * gamma.abs().max(c.freq.abs()) || d == 0.0 {
            return Err(Error::Pole { denominator: denominator_name(c.freq, shape.duration), value: d });
        }
    }
    Ok(())
}

/// `2π/(T|γ|)`: how far the oscillating terms are from averaging out. The
/// RWA form needs this to be small.
pub fn rwa_ratio(shape: &PulseShape, gamma: f64) -> f64 {
    2.0 * PI / (shape.duration * gamma.abs())
}

/// Exact closed form for box, sine-squared and Blackman envelopes.
pub fn s_integral_closed(shape_n: &PulseShape, shape_j: &PulseShape, gamma: f64, t0: f64, t: f64) -> Result<C64> {
    check_poles(shape_j, gamma)?;
    let comps = shape_j.components().expect("checked above");
    let wn = shape_n.evaluate(t);
    let a = t0.max(shape_j.t0);
    let b = t.min(shape_j.t_end());
    if wn == 0.0 || b <= a {
        return Ok(C64::new(0.0, 0.0));
    }
    // ∫_a^b c e^{iω(s-tj)} e^{-iγ(t-s)} ds
    //   = c e^{iω(a-tj)} e^{-iγ(t-a)} ∫_0^{b-a} e^{i(ω+γ)v} dv
    let lead = C64::new(0.0, -gamma * (t - a)).exp();
    let mut j = C64::new(0.0, 0.0);
    for c in &comps {
        let phase = C64::new(0.0, c.freq * (a - shape_j.t0)).exp();
        j += c.coeff * phase * exp_integral(c.freq + gamma, 0.0, b - a);
    }
    Ok(C64::new(0.0, -wn) * lead * j)
}

/// `-Ω_n(t)Ω_j(t)/γ`, the closed form with every oscillating term dropped.
pub fn s_integral_rwa(shape_n: &PulseShape, shape_j: &PulseShape, gamma: f64, t: f64) -> Result<C64> {
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(Error::Pole { denominator: "γ".into(), value: gamma });
    }
    Ok(C64::new(-shape_n.evaluate(t) * shape_j.evaluate(t) / gamma, 0.0))
}

/// Adaptive quadrature to absolute tolerance `tol` on `Ŝ`.
pub fn s_integral_quadrature(
    shape_n: &PulseShape,
    shape_j: &PulseShape,
    gamma: f64,
    t0: f64,
    t: f64,
    tol: f64,
) -> Result<C64> {
    let wn = shape_n.evaluate(t);
    let a = t0.max(shape_j.t0);
    let b = t.min(shape_j.t_end());
    if wn == 0.0 || b <= a {
        return Ok(C64::new(0.0, 0.0));
    }
    let mut opts = QuadOptions::new(tol / wn.abs());
    if gamma != 0.0 {
        opts = opts.with_max_panel(PANEL_FRACTION * PI / gamma.abs());
    }
    let f = |s: f64| shape_j.evaluate(s) * C64::new(0.0, -gamma * (t - s)).exp();
    let (j, _) = integrate(&f, a, b, &shape_j.breakpoints(), opts)?;
    Ok(C64::new(0.0, -wn) * j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_returns_to_zero_after_full_period() {
        let s = PulseShape::boxcar(1.0, 0.0, 10.0).unwrap();
        let v = s_integral_closed(&s, &s, 2.0 * PI, 0.0, 1.0).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn box_rwa_value() {
        let s = PulseShape::boxcar(1.0, 0.0, 1e3).unwrap();
        assert_eq!(s_integral_rwa(&s, &s, 100.0, 500.0).unwrap(), C64::new(-0.01, 0.0));
    }

    #[test]
    fn box_closed_is_exact_antiderivative() {
        let (a0, g, tau) = (1.3, 7.0, 0.8);
        let s = PulseShape::boxcar(a0, 0.0, 2.0).unwrap();
        let exact = -(a0 * a0 / g) * (1.0 - C64::new(0.0, -g * tau).exp());
        assert!((s_integral_closed(&s, &s, g, 0.0, tau).unwrap() - exact).norm() < 1e-15);
    }

    #[test]
    fn sine_squared_matches_quadrature() {
        let s = PulseShape::sine_squared(1.0, 0.0, 1.0).unwrap();
        // Evaluated just inside the window so Ω_n(t) ≠ 0.
        let t = 0.9;
        let c = s_integral_closed(&s, &s, 50.0, 0.0, t).unwrap();
        let q = s_integral_quadrature(&s, &s, 50.0, 0.0, t, 1e-14).unwrap();
        assert!((c - q).norm() <= 1e-10 * c.norm());
    }

    #[test]
    fn sine_squared_at_window_end_vanishes() {
        let s = PulseShape::sine_squared(1.0, 0.0, 1.0).unwrap();
        assert!(s_integral_closed(&s, &s, 50.0, 0.0, 1.0).unwrap().norm() < 1e-30);
    }

    #[test]
    fn poles_are_named() {
        let t = 2.0;
        let s = PulseShape::sine_squared(1.0, 0.0, t).unwrap();
        for (g, name) in [(0.0, "γ"), (2.0 * PI / t, "γ - 2π/T"), (-2.0 * PI / t, "γ + 2π/T")] {
            match s_integral_closed(&s, &s, g, 0.0, 1.0) {
                Err(Error::Pole { denominator, .. }) => assert_eq!(denominator, name),
                other => panic!("expected pole at {g}, got {other:?}"),
            }
        }
        let b = PulseShape::blackman(0.42, 0.5, 0.08, 0.0, t).unwrap();
        assert!(s_integral_closed(&b, &b, 4.0 * PI / t, 0.0, 1.0).is_err());
        assert!(s_integral_closed(&b, &b, 4.0 * PI / t * 1.001, 0.0, 1.0).is_ok());
        // The 4π/T pole is absent when a2 = 0.
        let hann = PulseShape::blackman(0.5, 0.5, 0.0, 0.0, t).unwrap();
        assert!(s_integral_closed(&hann, &hann, 4.0 * PI / t, 0.0, 1.0).is_ok());
    }

    #[test]
    fn tabulated_has_no_closed_form() {
        let tab = PulseShape::tabulated(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
        assert!(matches!(s_integral_closed(&tab, &tab, 3.0, 0.0, 1.0), Err(Error::Unsupported(_))));
        assert!(s_integral_quadrature(&tab, &tab, 3.0, 0.0, 1.5, 1e-12).is_ok());
    }

    #[test]
    fn empty_interval_and_zero_envelope() {
        let s = PulseShape::boxcar(1.0, 0.0, 1.0).unwrap();
        assert_eq!(s_integral_quadrature(&s, &s, 3.0, 0.0, 0.0, 1e-12).unwrap(), C64::new(0.0, 0.0));
        let z = PulseShape::boxcar(0.0, 0.0, 1.0).unwrap();
        assert_eq!(s_integral_quadrature(&s, &z, 3.0, 0.0, 0.7, 1e-12).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn momentum_dependent_detuning() {
        let d = Detuning { constant: 10.0, per_momentum: 2.0 };
        assert_eq!(d.at(0.0), 10.0);
        assert_eq!(d.at(-1.5), 7.0);
    }
}
