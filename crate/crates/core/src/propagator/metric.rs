use super::Trajectory;
use crate::error::{Error, Result};
use crate::hilbert::StateVector;
use crate::linalg::CVector;
use num_complex::Complex64 as C64;

/// Amplitude comparisons restricted to a set of levels.
pub trait Amplitudes {
    /// `(Σ|a - b|², ⟨a|b⟩, ‖a‖², ‖b‖²)` over `levels`.
    fn compare(&self, other: &Self, levels: &[usize]) -> Result<(f64, C64, f64, f64)>;
}

impl Amplitudes for CVector {
    fn compare(&self, other: &Self, levels: &[usize]) -> Result<(f64, C64, f64, f64)> {
        let mut acc = (0.0, C64::new(0.0, 0.0), 0.0, 0.0);
        for &l in levels {
            let (a, b) = match (self.get(l), other.get(l)) {
                (Some(a), Some(b)) => (*a, *b),
                _ => return Err(Error::Alignment(format!("level {l} missing from a state"))),
            };
            acc.0 += (a - b).norm_sqr();
            acc.1 += a.conj() * b;
            acc.2 += a.norm_sqr();
            acc.3 += b.norm_sqr();
        }
        Ok(acc)
    }
}

impl Amplitudes for StateVector {
    fn compare(&self, other: &Self, levels: &[usize]) -> Result<(f64, C64, f64, f64)> {
        if self.families.len() != other.families.len() {
            return Err(Error::Alignment("family count differs".into()));
        }
        let mut acc = (0.0, C64::new(0.0, 0.0), 0.0, 0.0);
        for (fa, fb) in self.families.iter().zip(&other.families) {
            if fa.base_momentum != fb.base_momentum {
                return Err(Error::Alignment("families have different base momenta".into()));
            }
            let lo = fa.window.n_min.min(fb.window.n_min);
            let hi = fa.window.n_max.max(fb.window.n_max);
            for &l in levels {
                if l >= fa.n_levels || l >= fb.n_levels {
                    return Err(Error::Alignment(format!("level {l} missing from a state")));
                }
                for n in lo..=hi {
                    let (a, b) = (fa.get(l, n), fb.get(l, n));
                    acc.0 += (a - b).norm_sqr();
                    acc.1 += a.conj() * b;
                    acc.2 += a.norm_sqr();
                    acc.3 += b.norm_sqr();
                }
            }
        }
        Ok(acc)
    }
}

fn aligned<'a, S>(a: &'a Trajectory<S>, b: &'a Trajectory<S>) -> Result<impl Iterator<Item = (&'a S, &'a S)>> {
    if a.times.len() != b.times.len() || a.states.len() != a.times.len() || b.states.len() != b.times.len() {
        return Err(Error::Alignment("trajectories need snapshots at the same number of times".into()));
    }
    for (x, y) in a.times.iter().zip(&b.times) {
        if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1e-300) {
            return Err(Error::Alignment(format!("sample times differ: {x} vs {y}")));
        }
    }
    Ok(a.states.iter().zip(&b.states))
}

/// `δ(t) = sqrt(Σ_{j∈levels} |ψ_a(j,t) - ψ_b(j,t)|²)` on raw amplitudes.
pub fn relative_error<S: Amplitudes>(a: &Trajectory<S>, b: &Trajectory<S>, levels: &[usize]) -> Result<Vec<f64>> {
    aligned(a, b)?.map(|(x, y)| x.compare(y, levels).map(|c| c.0.sqrt())).collect()
}

/// `δ` after removing the best global phase between the two states:
/// `sqrt(‖a‖² + ‖b‖² - 2|⟨a|b⟩|)`. Not part of the standard metric.
pub fn relative_error_phase_aligned<S: Amplitudes>(
    a: &Trajectory<S>,
    b: &Trajectory<S>,
    levels: &[usize],
) -> Result<Vec<f64>> {
    aligned(a, b)?
        .map(|(x, y)| x.compare(y, levels).map(|c| (c.2 + c.3 - 2.0 * c.1.norm()).max(0.0).sqrt()))
        .collect()
}
