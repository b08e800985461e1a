//! Adaptive Dormand–Prince 5(4) for complex first-order systems
//! `dy/dt = f(t, y)`, with Hairer's fourth-order dense output.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-9, atol: 1e-12, max_step: f64::INFINITY, h0: None, max_steps: 50_000_000 }
    }
}

impl OdeOptions {
    pub fn tolerances(rtol: f64, atol: f64) -> Self {
        OdeOptions { rtol, atol, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::Invalid(format!("rtol and atol must be positive (got {}, {})", self.rtol, self.atol)));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::Invalid("max_step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl std::ops::AddAssign for OdeStats {
    fn add_assign(&mut self, o: Self) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.evaluations += o.evaluations;
    }
}

/// Returned by the step observer after every accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// Time the integration actually reached (`t_end` unless stopped).
    pub t: f64,
    pub y: Vec<C64>,
    /// States at the requested sample times that were reached.
    pub samples: Vec<(f64, Vec<C64>)>,
    pub stats: OdeStats,
    pub stopped: bool,
    /// Last accepted step size, useful for resuming.
    pub last_step: f64,
}

fn axpy(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for i in 0..out.len() {
        let mut acc = C64::new(0.0, 0.0);
        for &(a, k) in terms {
            if a != 0.0 {
                acc += k[i] * a;
            }
        }
        out[i] = y[i] + acc * h;
    }
}

fn error_norm(y0: &[C64], y1: &[C64], err: &[C64], opts: &OdeOptions) -> f64 {
    if y0.is_empty() {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..y0.len() {
        let sc = opts.atol + opts.rtol * y0[i].norm().max(y1[i].norm());
        let r = err[i].norm() / sc;
        s += r * r;
    }
    (s / y0.len() as f64).sqrt()
}

/// Integrates from `(t0, y0)` to `t_end` (which may be below `t0`).
/// `samples` must be monotone in the direction of integration; those inside
/// `[t0, t_end]` are filled by dense output. `observer` sees every accepted
/// step and may stop the integration early.
pub fn solve<F, O>(
    mut f: F,
    t0: f64,
    y0: Vec<C64>,
    t_end: f64,
    samples: &[f64],
    opts: &OdeOptions,
    mut observer: O,
) -> Result<Solution>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(f64, &[C64]) -> Control,
{
    opts.validate()?;
    let n = y0.len();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut stats = OdeStats::default();
    let mut out = Vec::new();
    let mut next_sample = 0;
    let before = |s: f64, t: f64| dir * (s - t) < 0.0;
    while next_sample < samples.len() && before(samples[next_sample], t0) {
        next_sample += 1;
    }
    while next_sample < samples.len() && samples[next_sample] == t0 {
        out.push((t0, y0.clone()));
        next_sample += 1;
    }
    let mut t = t0;
    let mut y = y0;
    if t0 == t_end || n == 0 {
        while next_sample < samples.len() && samples[next_sample] == t_end {
            out.push((t_end, y.clone()));
            next_sample += 1;
        }
        return Ok(Solution { t, y, samples: out, stats, stopped: false, last_step: 0.0 });
    }

    let mut k1 = vec![C64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut k5 = k1.clone();
    let mut k6 = k1.clone();
    let mut k7 = k1.clone();
    let mut tmp = k1.clone();
    let mut y1 = k1.clone();
    let mut errv = k1.clone();

    f(t, &y, &mut k1);
    stats.evaluations += 1;

    let span = (t_end - t0).abs();
    let mut h = match opts.h0 {
        Some(h) => h.abs(),
        None => {
            // Hairer's starting-step heuristic.
            let sc: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.norm()).collect();
            let rms = |v: &[C64]| {
                (v.iter().zip(&sc).map(|(a, s)| (a.norm() / s).powi(2)).sum::<f64>() / n as f64).sqrt()
            };
            let d0 = rms(&y);
            let d1 = rms(&k1);
            let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
            let h0 = h0.min(span).min(opts.max_step);
            axpy(&mut tmp, &y, dir * h0, &[(1.0, &k1)]);
            f(t + dir * h0, &tmp, &mut k2);
            stats.evaluations += 1;
            let diff: Vec<C64> = k2.iter().zip(&k1).map(|(a, b)| (a - b) / h0).collect();
            let d2 = rms(&diff);
            let m = d1.max(d2);
            let h1 = if m <= 1e-15 { (1e-6 * h0).max(1e-3 * h0) } else { (0.01 / m).powf(0.2) };
            (100.0 * h0).min(h1).min(span)
        }
    };
    h = h.min(opts.max_step).max(span * 1e-14);

    let mut last_step;
    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepUnderflow { t, h });
        }
        let remaining = (t_end - t).abs();
        let last = h >= remaining;
        let hs = if last { remaining } else { h };
        let hd = dir * hs;

        axpy(&mut tmp, &y, hd, &[(A21, &k1)]);
        f(t + C2 * hd, &tmp, &mut k2);
        axpy(&mut tmp, &y, hd, &[(A31, &k1), (A32, &k2)]);
        f(t + C3 * hd, &tmp, &mut k3);
        axpy(&mut tmp, &y, hd, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        f(t + C4 * hd, &tmp, &mut k4);
        axpy(&mut tmp, &y, hd, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        f(t + C5 * hd, &tmp, &mut k5);
        axpy(&mut tmp, &y, hd, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let t_new = if last { t_end } else { t + hd };
        f(t_new, &tmp, &mut k6);
        axpy(&mut y1, &y, hd, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        f(t_new, &y1, &mut k7);
        stats.evaluations += 6;
        for i in 0..n {
            errv[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hd;
        }
        let err = error_norm(&y, &y1, &errv, opts);

        if !err.is_finite() || err > 1.0 {
            stats.rejected += 1;
            let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.1 };
            h = hs * factor;
            if h < 1e-14 * t.abs().max(span) {
                return Err(Error::StepUnderflow { t, h });
            }
            continue;
        }

        // Dense output for samples inside this step.
        while next_sample < samples.len() && !before(t_new, samples[next_sample]) {
            let ts = samples[next_sample];
            let theta = (ts - t) / hd;
            let th1 = 1.0 - theta;
            let mut ys = vec![C64::new(0.0, 0.0); n];
            for i in 0..n {
                let r2 = y1[i] - y[i];
                let r3 = k1[i] * hd - r2;
                let r4 = r2 - k7[i] * hd - r3;
                let r5 = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * hd;
                ys[i] = y[i] + (r2 + (r3 + (r4 + r5 * th1) * theta) * th1) * theta;
            }
            if ts == t_new {
                ys.copy_from_slice(&y1);
            }
            out.push((ts, ys));
            next_sample += 1;
        }

        stats.accepted += 1;
        last_step = hs;
        t = t_new;
        std::mem::swap(&mut y, &mut y1);
        std::mem::swap(&mut k1, &mut k7);
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (hs * factor).min(opts.max_step);

        if last {
            return Ok(Solution { t, y, samples: out, stats, stopped: false, last_step });
        }
        if observer(t, &y) == Control::Stop {
            return Ok(Solution { t, y, samples: out, stats, stopped: true, last_step });
        }
    }
}

/// `solve` without an observer.
pub fn solve_to<F>(f: F, t0: f64, y0: Vec<C64>, t_end: f64, samples: &[f64], opts: &OdeOptions) -> Result<Solution>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    solve(f, t0, y0, t_end, samples, opts, |_, _| Control::Continue)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation(w: f64) -> impl FnMut(f64, &[C64], &mut [C64]) {
        move |_t, y, dy| dy[0] = C64::new(0.0, -w) * y[0]
    }

    #[test]
    fn exponential_phase() {
        let w = 3.7;
        let samples: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
        let sol = solve_to(rotation(w), 0.0, vec![C64::new(1.0, 0.0)], 5.0, &samples, &OdeOptions::tolerances(1e-11, 1e-13)).unwrap();
        assert_eq!(sol.samples.len(), samples.len());
        for (t, y) in &sol.samples {
            let exact = C64::new(0.0, -w * t).exp();
            assert!((y[0] - exact).norm() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn dense_output_is_fourth_order_accurate() {
        // Loose tolerance: big steps, so samples come mostly from the interpolant.
        let samples: Vec<f64> = (0..=200).map(|i| i as f64 * 0.01).collect();
        let sol = solve_to(rotation(1.0), 0.0, vec![C64::new(1.0, 0.0)], 2.0, &samples, &OdeOptions::tolerances(1e-6, 1e-8)).unwrap();
        assert!(sol.stats.accepted < 60);
        for (t, y) in &sol.samples {
            assert!((y[0] - C64::new(0.0, -t).exp()).norm() < 1e-5);
        }
    }

    #[test]
    fn backwards_integration() {
        let sol = solve_to(rotation(2.0), 1.0, vec![C64::new(1.0, 0.0)], 0.0, &[], &OdeOptions::default()).unwrap();
        assert!((sol.y[0] - C64::new(0.0, 2.0).exp()).norm() < 1e-8);
    }

    #[test]
    fn observer_can_stop() {
        let sol = solve(rotation(1.0), 0.0, vec![C64::new(1.0, 0.0)], 10.0, &[], &OdeOptions::default(), |t, _| {
            if t > 1.0 { Control::Stop } else { Control::Continue }
        })
        .unwrap();
        assert!(sol.stopped && sol.t > 1.0 && sol.t < 10.0);
    }

    #[test]
    fn nan_right_hand_side_underflows() {
        let r = solve_to(|_, _, dy: &mut [C64]| dy[0] = C64::new(f64::NAN, 0.0), 0.0, vec![C64::new(1.0, 0.0)], 1.0, &[], &OdeOptions::default());
        assert!(matches!(r, Err(Error::StepUnderflow { .. })));
    }

    #[test]
    fn bad_tolerances_rejected() {
        let r = solve_to(rotation(1.0), 0.0, vec![C64::new(1.0, 0.0)], 1.0, &[], &OdeOptions::tolerances(0.0, 1e-9));
        assert!(matches!(r, Err(Error::Invalid(_))));
    }
}
