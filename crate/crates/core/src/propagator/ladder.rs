use super::{check_times, IntegratorConfig, Method, TrajectoryResult};
use crate::error::{Error, Result};
use crate::hilbert::{BlockOperator, FamilyState, StateVector};
use crate::ode::{solve, Control, OdeStats};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

struct FamilyRun {
    /// Samples, each on the window the family had when it was taken.
    samples: Vec<(f64, FamilyState)>,
    edge: f64,
    stats: OdeStats,
}

fn edge_margin(h: &BlockOperator) -> usize {
    h.max_shift().max(1) as usize
}

fn evolve_family(
    h: &BlockOperator,
    psi0: &FamilyState,
    t0: f64,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<FamilyRun> {
    let opts = cfg.ode_options();
    let margin = edge_margin(h);
    let mut fam = psi0.clone();
    let mut t = t0;
    let mut rest = times;
    let mut samples = Vec::with_capacity(times.len());
    let mut stats = OdeStats::default();
    let mut edge: f64 = fam.edge_population(margin);
    loop {
        let can_grow = fam.window.doubled().sites() <= cfg.max_sites;
        let (p0, window) = (fam.base_momentum, fam.window);
        let sites = window.sites();
        let n_levels = fam.n_levels;
        let rhs = |s: f64, y: &[C64], dy: &mut [C64]| {
            h.apply_raw(s, p0, window, y, dy);
            dy.iter_mut().for_each(|v| *v = C64::new(v.im, -v.re));
        };
        let edge_of = |y: &[C64]| -> f64 {
            (0..n_levels)
                .map(|l| {
                    let row = &y[l * sites..(l + 1) * sites];
                    let m = margin.min(sites / 2);
                    row[..m].iter().chain(&row[sites - m..]).map(|a| a.norm_sqr()).sum::<f64>()
                })
                .sum()
        };
        let t_end = *rest.last().expect("checked");
        let sol = solve(rhs, t, fam.amps.clone(), t_end, rest, &opts, |_, y| {
            if can_grow && edge_of(y) > cfg.edge_threshold {
                Control::Stop
            } else {
                Control::Continue
            }
        })?;
        stats += sol.stats;
        for (ts, y) in &sol.samples {
            edge = edge.max(edge_of(y));
            samples.push((*ts, FamilyState { amps: y.clone(), ..fam.clone() }));
        }
        rest = &rest[sol.samples.len()..];
        fam.amps = sol.y;
        edge = edge.max(fam.edge_population(margin));
        if !sol.stopped || rest.is_empty() {
            break;
        }
        t = sol.t;
        fam = fam.resized(fam.window.doubled())?;
    }
    if edge > cfg.truncation_cap {
        return Err(Error::Truncation { lost_norm: edge, cap: cfg.truncation_cap });
    }
    Ok(FamilyRun { samples, edge, stats })
}

/// Solves `i dψ/dt = H(t) ψ` from `t0`, sampling at `times` (ascending, all
/// `≥ t0`). Families that reach their window edge are moved to a doubled
/// window, so snapshots may differ in window between families and times.
pub fn evolve(
    h: &BlockOperator,
    psi0: &StateVector,
    t0: f64,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<TrajectoryResult> {
    cfg.validate()?;
    check_times(t0, times)?;
    if cfg.method == Method::Expm {
        return Err(Error::Unsupported("matrix exponential evolution needs a constant matrix".into()));
    }
    for fam in &psi0.families {
        if fam.n_levels != h.n_levels {
            return Err(Error::Invalid(format!(
                "operator acts on {} levels, state has {}",
                h.n_levels, fam.n_levels
            )));
        }
        if h.max_shift() > fam.window.width() {
            return Err(Error::ShiftTooLarge { shift: h.max_shift(), width: fam.window.width() });
        }
    }
    let run = |f: &FamilyState| evolve_family(h, f, t0, times, cfg);
    let runs: Vec<FamilyRun> = if cfg.parallel {
        psi0.families.par_iter().map(run).collect::<Result<_>>()?
    } else {
        psi0.families.iter().map(run).collect::<Result<_>>()?
    };

    let n_levels = h.n_levels;
    let mut stats = OdeStats::default();
    let mut truncation_loss: f64 = 0.0;
    for r in &runs {
        stats += r.stats;
        truncation_loss = truncation_loss.max(r.edge);
    }
    let mut populations = Vec::with_capacity(times.len());
    let mut norms = Vec::with_capacity(times.len());
    let mut states = Vec::new();
    for (i, _) in times.iter().enumerate() {
        let mut pops = vec![0.0; n_levels];
        for r in &runs {
            let fam = &r.samples[i].1;
            for (l, p) in pops.iter_mut().enumerate() {
                *p += fam.level_population(l);
            }
        }
        norms.push(pops.iter().sum::<f64>().sqrt());
        populations.push(pops);
        if cfg.dense_output || i + 1 == times.len() {
            states.push(StateVector {
                families: runs.iter().map(|r| r.samples[i].1.clone()).collect(),
                norm_tolerance: psi0.norm_tolerance,
            });
        }
    }
    Ok(TrajectoryResult {
        times: times.to_vec(),
        states,
        populations,
        norms,
        pulse_area_progress: Vec::new(),
        truncation_loss,
        stats,
    })
}
