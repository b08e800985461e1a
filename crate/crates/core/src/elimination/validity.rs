//! Validity report for the adiabatic elimination.
//!
//! Three conditions must hold: the manifold gap `γ⋆` exceeds the coupling,
//! it exceeds the splittings within each manifold, and the coupling varies
//! slowly on the time scale `π/γ⋆`. The report also evaluates the norm bound
//!
//! ```text
//! (π/γ⋆) sup‖F̃(s)‖ + (t-t0)/2 · sup‖F̃_ab(s) - F̃_ab(s-π/γ⋆) e^{-iπε_ab/γ⋆}‖
//! ```
//!
//! with `F̃ = Ω` in the eigenbases of `Ξ` and `Δ`.
//!
//! The warn threshold (0.1) and the fail rule (a ratio reaching 1) are
//! library policy.

use super::projector::Coupling;
use crate::linalg::{is_hermitian, spectral_norm, CMatrix, HermitianEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const WARN_THRESHOLD: f64 = 0.1;
pub const FAIL_THRESHOLD: f64 = 1.0;
/// Time samples used for the suprema.
pub const SAMPLES: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    /// Minimal gap between the spectra of `Ξ` and `Δ` (rad/s).
    pub gamma_star: f64,
    /// Largest `|ξ - δ| - γ⋆` (rad/s).
    pub epsilon_max: f64,
    /// `π sup‖dΩ/ds‖ (t - t0) / γ⋆`.
    pub smoothness: f64,
    /// `sup‖Ω‖ / γ⋆`.
    pub coupling_ratio: f64,
    pub bound_value: f64,
    pub verdict: Verdict,
    /// Description of the state space the spectra were taken over.
    pub support: String,
    pub t0: f64,
    pub t: f64,
    pub notes: Vec<String>,
}

impl ValidityReport {
    fn finish(mut self) -> Self {
        let finite = [self.gamma_star, self.epsilon_max, self.smoothness, self.coupling_ratio, self.bound_value]
            .iter()
            .all(|x| x.is_finite());
        let gapless = !finite || self.gamma_star <= 0.0;
        self.verdict = if gapless || self.coupling_ratio >= FAIL_THRESHOLD || self.smoothness >= FAIL_THRESHOLD {
            Verdict::Fail
        } else if self.coupling_ratio > WARN_THRESHOLD || self.smoothness > WARN_THRESHOLD {
            Verdict::Warn
        } else {
            Verdict::Pass
        };
        if self.gamma_star > 0.0 && self.epsilon_max / self.gamma_star > WARN_THRESHOLD {
            self.notes.push(format!(
                "intra-manifold splitting is {:.3} of the gap",
                self.epsilon_max / self.gamma_star
            ));
        }
        for x in [&mut self.epsilon_max, &mut self.smoothness, &mut self.coupling_ratio, &mut self.bound_value] {
            if !x.is_finite() {
                *x = f64::MAX;
            }
        }
        self
    }

    /// Worst case over several reports (e.g. one per momentum family).
    pub fn worst(reports: &[ValidityReport], support: &str) -> Option<ValidityReport> {
        let first = reports.first()?;
        let mut r = first.clone();
        r.notes.clear();
        for x in reports {
            r.gamma_star = r.gamma_star.min(x.gamma_star);
            r.epsilon_max = r.epsilon_max.max(x.epsilon_max);
            r.smoothness = r.smoothness.max(x.smoothness);
            r.coupling_ratio = r.coupling_ratio.max(x.coupling_ratio);
            r.bound_value = r.bound_value.max(x.bound_value);
            for n in &x.notes {
                if !r.notes.contains(n) {
                    r.notes.push(n.clone());
                }
            }
        }
        r.support = support.to_string();
        Some(r.finish())
    }
}

fn spectrum(m: &CMatrix, name: &str, notes: &mut Vec<String>) -> (Vec<f64>, CMatrix) {
    if m.nrows() > 0 && is_hermitian(m, 1e-12 * (1.0 + crate::linalg::frobenius(m))) {
        if let Ok(e) = HermitianEigen::new(m) {
            return (e.values, e.vectors);
        }
    }
    notes.push(format!("{name} is not hermitian; its diagonal was used as spectrum"));
    let n = m.nrows();
    ((0..n).map(|i| m[(i, i)].re).collect(), CMatrix::identity(n, n))
}

/// Report for `H = [[Δ, Ω†], [Ω, Ξ]]` over `[t0, t]`.
pub fn validity_report(delta: &CMatrix, xi: &CMatrix, omega: &Coupling, t0: f64, t: f64, support: &str) -> ValidityReport {
    let mut notes = Vec::new();
    let (dv, w) = spectrum(delta, "Δ", &mut notes);
    let (xv, v) = spectrum(xi, "Ξ", &mut notes);
    let mut gamma_star = f64::INFINITY;
    let mut widest: f64 = 0.0;
    for &x in &xv {
        for &d in &dv {
            gamma_star = gamma_star.min((x - d).abs());
            widest = widest.max((x - d).abs());
        }
    }
    if dv.is_empty() || xv.is_empty() {
        gamma_star = 0.0;
        notes.push("one of the manifolds is empty".into());
    }
    let base = ValidityReport {
        gamma_star,
        epsilon_max: widest - gamma_star,
        smoothness: f64::INFINITY,
        coupling_ratio: f64::INFINITY,
        bound_value: f64::INFINITY,
        verdict: Verdict::Fail,
        support: support.to_string(),
        t0,
        t,
        notes,
    };
    if !(gamma_star > 0.0 && gamma_star.is_finite()) {
        return ValidityReport { gamma_star: gamma_star.clamp(0.0, f64::MAX), ..base }.finish();
    }

    let lag = PI / gamma_star;
    let span = (t - t0).max(0.0);
    let n = if span > 0.0 { SAMPLES } else { 1 };
    let h = 1e-6 * lag.min(if span > 0.0 { span } else { lag });
    let rotate = |m: &CMatrix| v.adjoint() * m * &w;
    let phase = CMatrix::from_fn(xv.len(), dv.len(), |a, b| {
        let g = xv[a] - dv[b];
        let eps = g - g.signum() * gamma_star;
        C64::new(0.0, -PI * eps / gamma_star).exp()
    });

    let (mut sup_omega, mut sup_deriv, mut sup_diff): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let s = if span > 0.0 { t0 + span * (i as f64 + 0.5) / n as f64 } else { t0 };
        let om = omega.at(s);
        sup_omega = sup_omega.max(spectral_norm(&om));
        let d = (omega.at(s + h) - omega.at(s - h)) / C64::new(2.0 * h, 0.0);
        sup_deriv = sup_deriv.max(spectral_norm(&d));
        let now = rotate(&om);
        let before = rotate(&omega.at(s - lag)).component_mul(&phase);
        sup_diff = sup_diff.max(spectral_norm(&(now - before)));
    }

    ValidityReport {
        coupling_ratio: sup_omega / gamma_star,
        smoothness: PI * sup_deriv * span / gamma_star,
        bound_value: lag * sup_omega + 0.5 * span * sup_diff,
        ..base
    }
    .finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, real_matrix};

    fn table_one(scale: f64) -> (CMatrix, CMatrix, Coupling) {
        (
            diag(&[-4.1, -4.0, 8.0]),
            diag(&[22.0, 23.0]),
            Coupling::Constant(real_matrix(2, 3, &[1.5, 1.5, 1.5, 1.0, 1.0, 1.0]) * C64::new(scale, 0.0)),
        )
    }

    #[test]
    fn table_one_gap() {
        let (d, x, o) = table_one(1.0);
        let r = validity_report(&d, &x, &o, 0.0, 4.0, "finite matrix");
        assert_eq!(r.gamma_star, 14.0);
        assert!((r.epsilon_max - 13.1).abs() < 1e-12);
        assert!((r.coupling_ratio - 9.75f64.sqrt() / 14.0).abs() < 1e-12);
        assert_eq!(r.smoothness, 0.0);
        assert_eq!(r.verdict, Verdict::Warn);
    }

    #[test]
    fn strong_coupling_fails() {
        let (d, x, o) = table_one(20.0);
        let r = validity_report(&d, &x, &o, 0.0, 4.0, "finite matrix");
        assert!(r.coupling_ratio > 1.0);
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn weak_coupling_passes() {
        let (d, x, o) = table_one(0.05);
        let r = validity_report(&d, &x, &o, 0.0, 0.01, "finite matrix");
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn overlapping_manifolds_fail() {
        let o = Coupling::Constant(real_matrix(1, 2, &[0.1, 0.1]));
        let r = validity_report(&diag(&[0.0, 5.0]), &diag(&[5.0]), &o, 0.0, 1.0, "finite matrix");
        assert_eq!(r.gamma_star, 0.0);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.bound_value.is_finite());
    }

    #[test]
    fn worst_case_combines() {
        let (d, x, o) = table_one(1.0);
        let a = validity_report(&d, &x, &o, 0.0, 1.0, "a");
        let b = validity_report(&d, &x, &o.scaled(20.0), 0.0, 1.0, "b");
        let w = ValidityReport::worst(&[a, b.clone()], "both").unwrap();
        assert_eq!(w.verdict, Verdict::Fail);
        assert_eq!(w.coupling_ratio, b.coupling_ratio);
    }
}
