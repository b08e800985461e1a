use super::{check_times, IntegratorConfig, MatrixTrajectory};
use crate::error::{Error, Result};
use crate::linalg::{is_hermitian, CMatrix, CVector, HermitianEigen};
use crate::ode::{solve_to, OdeStats};
use num_complex::Complex64 as C64;
use std::cell::RefCell;

fn trajectory(times: &[f64], states: Vec<CVector>, stats: OdeStats, keep_all: bool) -> MatrixTrajectory {
    let populations: Vec<Vec<f64>> = states.iter().map(|s| s.iter().map(|a| a.norm_sqr()).collect()).collect();
    let norms = states.iter().map(|s| s.norm()).collect();
    let states = if keep_all { states } else { states.into_iter().last().into_iter().collect() };
    MatrixTrajectory {
        times: times.to_vec(),
        states,
        populations,
        norms,
        pulse_area_progress: Vec::new(),
        truncation_loss: 0.0,
        stats,
    }
}

/// Solves `i dψ/dt = H(t) ψ` for a finite matrix generator.
pub fn evolve_matrix(
    h: impl Fn(f64) -> Result<CMatrix>,
    psi0: &CVector,
    t0: f64,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<MatrixTrajectory> {
    cfg.validate()?;
    check_times(t0, times)?;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| match h(t) {
        Ok(m) if m.nrows() == y.len() && m.ncols() == y.len() => {
            for (i, d) in dy.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (j, v) in y.iter().enumerate() {
                    acc += m[(i, j)] * v;
                }
                *d = C64::new(acc.im, -acc.re);
            }
        }
        other => {
            let mut slot = failure.borrow_mut();
            if slot.is_none() {
                *slot = Some(match other {
                    Err(e) => e,
                    Ok(m) => Error::Invalid(format!("generator is {}x{}, state has {}", m.nrows(), m.ncols(), y.len())),
                });
            }
            dy.iter_mut().for_each(|d| *d = C64::new(f64::NAN, f64::NAN));
        }
    };
    let sol = solve_to(rhs, t0, psi0.iter().copied().collect(), *times.last().expect("checked"), times, &cfg.ode_options());
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let sol = sol?;
    let states = sol.samples.into_iter().map(|(_, y)| CVector::from_vec(y)).collect();
    Ok(trajectory(times, states, sol.stats, cfg.dense_output))
}

fn one_norm(m: &CMatrix) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(A)` by scaling and squaring with a degree-18 Taylor polynomial.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a / C64::new(2f64.powi(squarings), 0.0);
    let mut result = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..=18 {
        term = &term * &scaled / C64::new(k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `ψ(t) = exp(-iH(t - t0)) ψ0` for a constant generator: eigenvectors when
/// `H` is hermitian, scaling and squaring otherwise.
pub fn expm_evolve(h: &CMatrix, psi0: &CVector, t0: f64, times: &[f64]) -> Result<MatrixTrajectory> {
    check_times(t0, times)?;
    if !h.is_square() || h.nrows() != psi0.len() {
        return Err(Error::Invalid(format!("generator is {}x{}, state has {}", h.nrows(), h.ncols(), psi0.len())));
    }
    let scale = 1e-12 * (1.0 + crate::linalg::frobenius(h));
    let eig = if is_hermitian(h, scale) { HermitianEigen::new(&((h + h.adjoint()) * C64::new(0.5, 0.0))).ok() } else { None };
    let states = times
        .iter()
        .map(|&t| match &eig {
            Some(e) => e.propagator(t - t0) * psi0,
            None => expm(&(h * C64::new(0.0, -(t - t0)))) * psi0,
        })
        .collect();
    Ok(trajectory(times, states, OdeStats::default(), true))
}
