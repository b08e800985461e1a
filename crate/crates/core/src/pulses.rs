//! Temporal envelopes `Ω_j(t)`, two-photon pulse areas and amplitude
//! calibration.
//!
//! Windowed kinds (box, sine-squared, Blackman) are finite sums of complex
//! exponentials inside their window, which is what the closed-form area and
//! `Ŝ` integrals are built on. Tabulated envelopes are linearly interpolated.

use crate::error::{Error, Result};
use crate::quadrature::{exp_integral, integrate_real, QuadOptions};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseKind {
    Box { a0: f64 },
    /// `a0 sin²(π(t-t0)/T)`.
    SineSquared { a0: f64 },
    /// `a0 - a1 cos(2π(t-t0)/T) + a2 cos(4π(t-t0)/T)`.
    Blackman { a0: f64, a1: f64, a2: f64 },
    /// `(t, value)` knots, strictly increasing in `t`.
    Tabulated { samples: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    pub kind: PulseKind,
    pub t0: f64,
    /// Window length `T`.
    pub duration: f64,
}

/// One Fourier component `coeff · e^{i·freq·(t - t0)}` of a windowed envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub coeff: f64,
    pub freq: f64,
}

fn check_window(t0: f64, duration: f64) -> Result<()> {
    if !t0.is_finite() || !(duration.is_finite() && duration > 0.0) {
        return Err(Error::Invalid(format!("pulse window t0={t0}, T={duration}")));
    }
    Ok(())
}

impl PulseShape {
    pub fn boxcar(a0: f64, t0: f64, duration: f64) -> Result<Self> {
        check_window(t0, duration)?;
        Ok(PulseShape { kind: PulseKind::Box { a0 }, t0, duration })
    }

    pub fn sine_squared(a0: f64, t0: f64, duration: f64) -> Result<Self> {
        check_window(t0, duration)?;
        Ok(PulseShape { kind: PulseKind::SineSquared { a0 }, t0, duration })
    }

    pub fn blackman(a0: f64, a1: f64, a2: f64, t0: f64, duration: f64) -> Result<Self> {
        check_window(t0, duration)?;
        Ok(PulseShape { kind: PulseKind::Blackman { a0, a1, a2 }, t0, duration })
    }

    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Invalid("tabulated pulse needs at least two samples".into()));
        }
        if samples.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::Invalid("tabulated pulse has non-finite samples".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Invalid("tabulated pulse times must increase strictly".into()));
        }
        let t0 = samples[0].0;
        let duration = samples[samples.len() - 1].0 - t0;
        Ok(PulseShape { kind: PulseKind::Tabulated { samples }, t0, duration })
    }

    /// Reads a two-column CSV (`time_s`, `amplitude_rad_per_s`). A header row
    /// and `#` comment lines are skipped.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut samples = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            if rec.len() != 2 {
                return Err(Error::Parse(format!("{}: row {} has {} columns", path.display(), i + 1, rec.len())));
            }
            let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            match parsed {
                (Ok(t), Ok(v)) => samples.push((t, v)),
                _ if i == 0 => continue,
                _ => return Err(Error::Parse(format!("{}: row {} is not numeric", path.display(), i + 1))),
            }
        }
        Self::tabulated(samples)
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.duration
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t0 && t <= self.t_end()
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            PulseKind::Box { .. } => "box",
            PulseKind::SineSquared { .. } => "sine_squared",
            PulseKind::Blackman { .. } => "blackman",
            PulseKind::Tabulated { .. } => "tabulated",
        }
    }

    /// The envelope with all amplitudes multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> PulseShape {
        let kind = match &self.kind {
            PulseKind::Box { a0 } => PulseKind::Box { a0: a0 * factor },
            PulseKind::SineSquared { a0 } => PulseKind::SineSquared { a0: a0 * factor },
            PulseKind::Blackman { a0, a1, a2 } => {
                PulseKind::Blackman { a0: a0 * factor, a1: a1 * factor, a2: a2 * factor }
            }
            PulseKind::Tabulated { samples } => {
                PulseKind::Tabulated { samples: samples.iter().map(|&(t, v)| (t, v * factor)).collect() }
            }
        };
        PulseShape { kind, ..self.clone() }
    }

    /// The same envelope moved to start at `t0`.
    pub fn shifted_to(&self, t0: f64) -> PulseShape {
        let dt = t0 - self.t0;
        let kind = match &self.kind {
            PulseKind::Tabulated { samples } => {
                PulseKind::Tabulated { samples: samples.iter().map(|&(t, v)| (t + dt, v)).collect() }
            }
            k => k.clone(),
        };
        PulseShape { kind, t0, duration: self.duration }
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        if !self.contains(t) {
            return 0.0;
        }
        let u = t - self.t0;
        let x = 2.0 * PI * u / self.duration;
        match &self.kind {
            PulseKind::Box { a0 } => *a0,
            PulseKind::SineSquared { a0 } => {
                let s = (PI * u / self.duration).sin();
                a0 * s * s
            }
            PulseKind::Blackman { a0, a1, a2 } => a0 - a1 * x.cos() + a2 * (2.0 * x).cos(),
            PulseKind::Tabulated { samples } => interpolate(samples, t).0,
        }
    }

    /// `dΩ/dt` inside the window (one-sided at knots; box edges excluded).
    pub fn derivative(&self, t: f64) -> f64 {
        if !self.contains(t) {
            return 0.0;
        }
        let u = t - self.t0;
        let w = 2.0 * PI / self.duration;
        match &self.kind {
            PulseKind::Box { .. } => 0.0,
            PulseKind::SineSquared { a0 } => 0.5 * a0 * w * (w * u).sin(),
            PulseKind::Blackman { a1, a2, .. } => a1 * w * (w * u).sin() - 2.0 * a2 * w * (2.0 * w * u).sin(),
            PulseKind::Tabulated { samples } => interpolate(samples, t).1,
        }
    }

    /// Largest `|Ω|` on a fine grid of the window (exact for box and
    /// sine-squared).
    pub fn peak(&self) -> f64 {
        match &self.kind {
            PulseKind::Box { a0 } | PulseKind::SineSquared { a0 } => a0.abs(),
            PulseKind::Tabulated { samples } => samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max),
            PulseKind::Blackman { .. } => {
                let n = 4096;
                (0..=n)
                    .map(|i| self.evaluate(self.t0 + self.duration * i as f64 / n as f64).abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Fourier components inside the window; `None` for tabulated envelopes.
    pub fn components(&self) -> Option<Vec<Component>> {
        let w = 2.0 * PI / self.duration;
        let c = |coeff, freq| Component { coeff, freq };
        match &self.kind {
            PulseKind::Box { a0 } => Some(vec![c(*a0, 0.0)]),
            PulseKind::SineSquared { a0 } => Some(vec![c(0.5 * a0, 0.0), c(-0.25 * a0, w), c(-0.25 * a0, -w)]),
            PulseKind::Blackman { a0, a1, a2 } => Some(vec![
                c(*a0, 0.0),
                c(-0.5 * a1, w),
                c(-0.5 * a1, -w),
                c(0.5 * a2, 2.0 * w),
                c(0.5 * a2, -2.0 * w),
            ]),
            PulseKind::Tabulated { .. } => None,
        }
    }

    /// Points where the envelope is not smooth: window edges and knots.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            PulseKind::Tabulated { samples } => samples.iter().map(|s| s.0).collect(),
            _ => vec![self.t0, self.t_end()],
        }
    }
}

/// Linear interpolation, returning `(value, slope)`; zero outside the knots.
fn interpolate(samples: &[(f64, f64)], t: f64) -> (f64, f64) {
    let first = samples[0].0;
    let last = samples[samples.len() - 1].0;
    if t < first || t > last {
        return (0.0, 0.0);
    }
    let j = samples.partition_point(|s| s.0 <= t).clamp(1, samples.len() - 1);
    let (ta, va) = samples[j - 1];
    let (tb, vb) = samples[j];
    let slope = (vb - va) / (tb - ta);
    (va + slope * (t - ta), slope)
}

fn area_tolerance(scale: f64) -> f64 {
    1e-13 * scale.max(f64::MIN_POSITIVE)
}

/// `∫_a^b Ω₁Ω₂ dt` in closed form for two windowed envelopes.
fn overlap_closed(s1: &PulseShape, s2: &PulseShape, a: f64, b: f64) -> Option<f64> {
    let (c1, c2) = (s1.components()?, s2.components()?);
    let lo = a.max(s1.t0).max(s2.t0);
    let hi = b.min(s1.t_end()).min(s2.t_end());
    if hi <= lo {
        return Some(0.0);
    }
    // Integrate in time relative to s1.t0.
    let shift = s1.t0 - s2.t0;
    let (ua, ub) = (lo - s1.t0, hi - s1.t0);
    let mut sum = C64::new(0.0, 0.0);
    for x in &c1 {
        for y in &c2 {
            let phase = C64::new(0.0, y.freq * shift).exp();
            sum += x.coeff * y.coeff * phase * exp_integral(x.freq + y.freq, ua, ub);
        }
    }
    Some(sum.re)
}

fn overlap_quadrature(s1: &PulseShape, s2: &PulseShape, a: f64, b: f64) -> Result<(f64, f64)> {
    let lo = a.max(s1.t0).max(s2.t0);
    let hi = b.min(s1.t_end()).min(s2.t_end());
    if hi <= lo {
        return Ok((0.0, 0.0));
    }
    let mut breaks = s1.breakpoints();
    breaks.extend(s2.breakpoints());
    let scale = s1.peak() * s2.peak() * (hi - lo);
    let f = |t: f64| s1.evaluate(t) * s2.evaluate(t);
    integrate_real(&f, lo, hi, &breaks, QuadOptions::new(area_tolerance(scale)))
}

/// `A = ∫_a^b 2Ω₁Ω₂/γ₀ dt`. Closed form for windowed pairs (cross-checked
/// against quadrature), quadrature otherwise.
pub fn pulse_area_between(s1: &PulseShape, s2: &PulseShape, gamma0: f64, a: f64, b: f64) -> Result<f64> {
    if gamma0 == 0.0 || !gamma0.is_finite() {
        return Err(Error::SingularDetuning(format!("pulse area needs γ₀ ≠ 0, got {gamma0}")));
    }
    if b < a {
        return Err(Error::Invalid(format!("pulse area interval [{a}, {b}] is reversed")));
    }
    let (quad, err) = overlap_quadrature(s1, s2, a, b)?;
    let value = match overlap_closed(s1, s2, a, b) {
        Some(closed) => {
            let scale = s1.peak() * s2.peak() * (b - a);
            let tol = 1e-9 * scale + 10.0 * err;
            if (closed - quad).abs() > tol {
                return Err(Error::Quadrature { estimate: format!("{quad}"), error: (closed - quad).abs(), tol });
            }
            closed
        }
        None => quad,
    };
    Ok(2.0 * value / gamma0)
}

/// `A(t_end)` accumulated from the earlier of the two window starts.
pub fn pulse_area(s1: &PulseShape, s2: &PulseShape, gamma0: f64, t_end: f64) -> Result<f64> {
    let start = s1.t0.min(s2.t0);
    if t_end < start {
        return Err(Error::Invalid(format!("t_end = {t_end} precedes pulse start {start}")));
    }
    pulse_area_between(s1, s2, gamma0, start, t_end)
}

/// Rescales `template` so that two copies of it produce pulse area
/// `target_area` against detuning `|γ₀|` over the full window.
pub fn calibrate_amplitude(template: &PulseShape, gamma0: f64, target_area: f64) -> Result<PulseShape> {
    if !(target_area > 0.0 && target_area.is_finite()) {
        return Err(Error::Calibration(format!("target area must be positive, got {target_area}")));
    }
    if gamma0 == 0.0 || !gamma0.is_finite() {
        return Err(Error::SingularDetuning(format!("calibration needs γ₀ ≠ 0, got {gamma0}")));
    }
    let g = gamma0.abs();
    let t = template.duration;
    let area = |s: &PulseShape| pulse_area(s, s, g, s.t_end());
    let shape = match template.kind {
        PulseKind::Box { .. } => PulseShape::boxcar((target_area * g / (2.0 * t)).sqrt(), template.t0, t)?,
        PulseKind::SineSquared { .. } => {
            PulseShape::sine_squared((4.0 * target_area * g / (3.0 * t)).sqrt(), template.t0, t)?
        }
        PulseKind::Blackman { .. } => {
            let unit = area(template)?;
            if unit <= 0.0 {
                return Err(Error::Calibration("template Blackman pulse has no area".into()));
            }
            template.scaled((target_area / unit).sqrt())
        }
        PulseKind::Tabulated { .. } => bisect_scale(template, target_area, &area)?,
    };
    let got = area(&shape)?;
    if ((got - target_area) / target_area).abs() > 1e-10 {
        return Err(Error::Calibration(format!("reached area {got}, wanted {target_area}")));
    }
    Ok(shape)
}

fn bisect_scale(
    template: &PulseShape,
    target: f64,
    area: &dyn Fn(&PulseShape) -> Result<f64>,
) -> Result<PulseShape> {
    // Bisection on λ² where the area is λ²·A(template).
    let f = |l2: f64| -> Result<f64> { Ok(area(&template.scaled(l2.sqrt()))? - target) };
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut grow = 0;
    while f(hi)? < 0.0 {
        hi *= 4.0;
        grow += 1;
        if grow > 200 {
            return Err(Error::Calibration("could not bracket the target area".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-15 * hi {
            break;
        }
    }
    Ok(template.scaled((0.5 * (lo + hi)).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn evaluate_examples() {
        let s = PulseShape::sine_squared(2.0, 1.0, 4.0).unwrap();
        assert_relative_eq!(s.evaluate(3.0), 2.0, epsilon = 1e-15);
        assert_eq!(s.evaluate(1.0), 0.0);
        assert_eq!(s.evaluate(5.5), 0.0);
        let a = 3.0;
        let b = PulseShape::blackman(0.42 * a, 0.5 * a, 0.08 * a, 0.0, 2.0).unwrap();
        assert_relative_eq!(b.evaluate(1.0), a, epsilon = 1e-14);
    }

    #[test]
    fn components_reproduce_envelope() {
        for s in [
            PulseShape::boxcar(1.3, 0.2, 2.0).unwrap(),
            PulseShape::sine_squared(1.3, 0.2, 2.0).unwrap(),
            PulseShape::blackman(0.42, 0.5, 0.08, 0.2, 2.0).unwrap(),
        ] {
            for i in 1..20 {
                let t = 0.2 + 0.1 * i as f64;
                let v: C64 = s
                    .components()
                    .unwrap()
                    .iter()
                    .map(|c| c.coeff * C64::new(0.0, c.freq * (t - 0.2)).exp())
                    .sum();
                assert!((v.re - s.evaluate(t)).abs() < 1e-14 && v.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn box_area() {
        let s = PulseShape::boxcar(3.0, 0.0, 2.0).unwrap();
        assert_relative_eq!(pulse_area(&s, &s, 5.0, 2.0).unwrap(), 2.0 * 9.0 * 2.0 / 5.0, epsilon = 1e-14);
        assert_eq!(pulse_area(&s, &s, 5.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn sine_squared_area_matches_quadrature_oracle() {
        // ∫₀ᵀ sin⁴(πt/T) dt = 3T/8, checked against quadrature directly.
        let t = 1.7;
        let (q, _) = integrate_real(&|x: f64| (PI * x / t).sin().powi(4), 0.0, t, &[], QuadOptions::new(1e-15)).unwrap();
        assert_relative_eq!(q, 3.0 * t / 8.0, epsilon = 1e-14);
        let s = PulseShape::sine_squared(2.0, 0.0, t).unwrap();
        assert_relative_eq!(pulse_area(&s, &s, 7.0, t).unwrap(), 3.0 * 4.0 * t / (4.0 * 7.0), max_relative = 1e-13);
    }

    #[test]
    fn zero_detuning_rejected() {
        let s = PulseShape::boxcar(1.0, 0.0, 1.0).unwrap();
        assert!(matches!(pulse_area(&s, &s, 0.0, 1.0), Err(Error::SingularDetuning(_))));
    }

    #[test]
    fn calibration_examples() {
        let g = 2e6;
        let b = calibrate_amplitude(&PulseShape::boxcar(1.0, 0.0, 1.0).unwrap(), g, PI).unwrap();
        assert_eq!(b.kind, PulseKind::Box { a0: (PI * g / 2.0).sqrt() });
        let s = calibrate_amplitude(&PulseShape::sine_squared(1.0, 0.0, 1.0).unwrap(), g, PI).unwrap();
        match s.kind {
            PulseKind::SineSquared { a0 } => assert_relative_eq!(a0, (4.0 * PI * g / 3.0).sqrt(), max_relative = 1e-15),
            _ => unreachable!(),
        }
        assert!(calibrate_amplitude(&s, g, 0.0).is_err());
    }

    #[test]
    fn calibration_of_blackman_and_tabulated() {
        let b = PulseShape::blackman(0.42, 0.5, 0.08, 0.0, 3.0).unwrap();
        let cb = calibrate_amplitude(&b, 40.0, PI / 2.0).unwrap();
        assert_relative_eq!(pulse_area(&cb, &cb, 40.0, 3.0).unwrap(), PI / 2.0, max_relative = 1e-12);
        let tab = PulseShape::tabulated(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.5), (3.0, 0.0)]).unwrap();
        let ct = calibrate_amplitude(&tab, 40.0, PI).unwrap();
        assert_relative_eq!(pulse_area(&ct, &ct, 40.0, 3.0).unwrap(), PI, max_relative = 1e-10);
    }

    #[test]
    fn tabulated_interpolates_and_rejects_bad_input() {
        let tab = PulseShape::tabulated(vec![(0.0, 0.0), (1.0, 2.0), (3.0, 0.0)]).unwrap();
        assert_relative_eq!(tab.evaluate(0.5), 1.0);
        assert_relative_eq!(tab.evaluate(2.0), 1.0);
        assert_eq!(tab.evaluate(3.5), 0.0);
        assert_relative_eq!(tab.derivative(2.0), -1.0);
        assert!(PulseShape::tabulated(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(PulseShape::tabulated(vec![(0.0, 0.0)]).is_err());
    }

    #[test]
    fn tabulated_csv_roundtrip() {
        let dir = std::env::temp_dir().join(format!("mwelim-pulse-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("pulse.csv");
        std::fs::write(&path, "# measured envelope\ntime_s,amplitude_rad_per_s\n0,0\n1e-6,5.0\n2e-6,0\n").unwrap();
        let p = PulseShape::from_csv(&path).unwrap();
        assert_relative_eq!(p.evaluate(0.5e-6), 2.5);
        assert_eq!(p.duration, 2e-6);
        std::fs::write(&path, "0,0\n1,x\n").unwrap();
        assert!(matches!(PulseShape::from_csv(&path), Err(Error::Parse(_))));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = PulseShape::blackman(0.42, 0.5, 0.08, 0.0, 2.0).unwrap();
        let h = 1e-6;
        for &t in &[0.3, 0.9, 1.4] {
            let fd = (s.evaluate(t + h) - s.evaluate(t - h)) / (2.0 * h);
            assert!((fd - s.derivative(t)).abs() < 1e-8);
        }
    }
}
