//! Scenario execution: build the system, check validity, propagate, write
//! the artifacts.

use crate::error::CliError;
use crate::output::{num, write_json, CsvOut, DELTA, DENSITY, POPULATIONS};
use crate::scenario::{DetuningChoice, MatrixConfig, PulseConfig, Scenario, ShapeKind};
use mwelim::elimination::projector::Coupling;
use mwelim::elimination::{
    effective_hamiltonian, effective_hamiltonian_over, markov_hamiltonian, paulisch_hamiltonian,
    sanz_hamiltonian, EffectiveBlock, EffectiveMetadata, ValidityReport,
};
use mwelim::hilbert::{StateVector, Window};
use mwelim::linalg::{real_matrix, CMatrix, CVector};
use mwelim::models::{
    bragg_system, double_bragg_system, double_raman_system, five_level_system, raman_system, AtomConstants,
    ComSystem, DoubleRamanDetunings, LadderConfig, LaserSpec, MatrixSystem, RamanOptions, SystemKind, SystemSpec,
};
use mwelim::ode::OdeStats;
use mwelim::propagator::{
    evolve, evolve_matrix, expm_evolve, linspace, relative_error, MatrixTrajectory,
    TrajectoryResult,
};
use mwelim::pulses::PulseShape;
use mwelim::units::wavevector;
use mwelim::C64;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub seed: u64,
    /// Where the scenario came from (a path or `bundled:<name>`).
    pub source: String,
}

/// Files written by a run, in order.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
}

pub fn run(s: &Scenario, opts: &RunOptions) -> Result<Artifacts, CliError> {
    s.integrator.validate()?;
    std::fs::create_dir_all(&opts.out).map_err(|e| CliError::Io(format!("{}: {e}", opts.out.display())))?;
    match s.kind {
        SystemKind::FiveLevel => run_matrix(s, opts),
        _ => run_ladder(s, opts),
    }
}

/// Validity report only, written to `validity.json`.
pub fn validity_only(s: &Scenario, opts: &RunOptions) -> Result<(ValidityReport, Artifacts), CliError> {
    std::fs::create_dir_all(&opts.out).map_err(|e| CliError::Io(format!("{}: {e}", opts.out.display())))?;
    let report = match s.kind {
        SystemKind::FiveLevel => {
            let m = matrix_config(s)?;
            let [t0, t1] = window_s(m)?;
            matrix_system(m)?.validity(t0, t1)
        }
        _ => {
            let l = ladder_setup(s)?;
            l.system.validity(l.system.t_end())
        }
    };
    let path = write_json(&opts.out.join("validity.json"), "validity report", &report)?;
    Ok((report, Artifacts { files: vec![path] }))
}

fn config_err(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config { field: field.into(), message: message.into() }
}

// Matrix (five-level) systems.

fn matrix_config(s: &Scenario) -> Result<&MatrixConfig, CliError> {
    s.matrix.as_ref().ok_or_else(|| config_err("matrix", "required for kind five_level"))
}

fn window_s(m: &MatrixConfig) -> Result<[f64; 2], CliError> {
    let [t0, t1] = m.window_s;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(config_err("matrix.window_s", "need t0 < t1"));
    }
    Ok([t0, t1])
}

fn rows_matrix(field: &str, rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<CMatrix, CliError> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(config_err(field, format!("expected a {nrows}x{ncols} matrix")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(real_matrix(nrows, ncols, &flat))
}

pub fn matrix_system(m: &MatrixConfig) -> Result<MatrixSystem, CliError> {
    let base = match m.preset.as_deref() {
        Some("five_level") => five_level_system(),
        Some(other) => return Err(config_err("matrix.preset", format!("unknown matrix preset `{other}`"))),
        None => {
            let (n, k) = (m.relevant.len(), m.irrelevant.len());
            let delta = rows_matrix("matrix.delta_rad_s", &m.delta_rad_s, n, n)?;
            let xi = rows_matrix("matrix.xi_rad_s", &m.xi_rad_s, k, k)?;
            let omega = rows_matrix("matrix.omega_rad_s", &m.omega_rad_s, k, n)?;
            MatrixSystem::new(m.relevant.clone(), m.irrelevant.clone(), delta, xi, Coupling::Constant(omega))?
        }
    };
    Ok(base.with_xi_shifted(m.xi_shift_rad_s).with_coupling_scaled(m.coupling_scale))
}

fn basis(n: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[i] = C64::new(1.0, 0.0);
    v
}

fn run_matrix(s: &Scenario, opts: &RunOptions) -> Result<Artifacts, CliError> {
    let m = matrix_config(s)?;
    let sys = matrix_system(m)?;
    let [t0, t1] = window_s(m)?;
    let init = sys
        .relevant
        .iter()
        .position(|l| *l == s.initial.level)
        .ok_or_else(|| config_err("initial.level", format!("`{}` is not a relevant level", s.initial.level)))?;
    let n_rel = sys.n_relevant();
    let times = linspace(t0, t1, s.output.samples);
    let mut art = Artifacts::default();

    let report = sys.validity(t0, t1);
    art.files.push(write_json(&opts.out.join("validity.json"), "validity report", &report)?);

    let spec = SystemSpec::Matrix(sys.clone());
    let eff = effective_hamiltonian_over(&spec, s.elimination.order, s.elimination.s_mode, t0, t1)?;
    let EffectiveBlock::Matrix(h_eff) = &eff.block else {
        return Err(CliError::Core(mwelim::Error::Invalid("matrix system gave a ladder operator".into())));
    };
    let ours = evolve_matrix(|t| h_eff.at(t), &basis(n_rel, init), t0, &times, &s.integrator)?;

    let progress = |t: f64| (t - t0) / (t1 - t0);
    let mut pop = CsvOut::create(&opts.out.join("populations.csv"), &POPULATIONS)?;
    for (i, &t) in times.iter().enumerate() {
        for (l, label) in sys.relevant.iter().enumerate() {
            pop.row([num(t), num(progress(t)), label.clone(), num(ours.populations[i][l])])?;
        }
    }
    art.files.push(pop.finish()?);
    // No momentum axis: the density file carries its header only.
    art.files.push(CsvOut::create(&opts.out.join("density.csv"), &DENSITY)?.finish()?);

    let mut full_stats = None;
    if s.compare || s.propagate_full {
        let psi0 = basis(sys.len(), init);
        let full = match &sys.omega {
            Coupling::Constant(_) => expm_evolve(&sys.full_matrix(t0), &psi0, t0, &times)?,
            Coupling::TimeDependent { .. } => {
                evolve_matrix(|t| Ok(sys.full_matrix(t)), &psi0, t0, &times, &s.integrator)?
            }
        };
        full_stats = Some(full.stats);
        let levels: Vec<usize> = (0..n_rel).collect();
        let mut runs: Vec<(&str, MatrixTrajectory)> = Vec::new();
        if s.compare {
            let om = sys.omega.at(t0);
            let rel0 = basis(n_rel, init);
            for (name, h) in [
                ("markov", markov_hamiltonian(&sys.delta, &sys.xi, &om)?),
                ("paulisch", paulisch_hamiltonian(&sys.delta, &sys.xi, &om)?),
                ("sanz", sanz_hamiltonian(&sys.delta, &sys.xi, &om)?),
            ] {
                runs.push((name, expm_evolve(&h, &rel0, t0, &times)?));
            }
        }
        runs.push(("ours", ours.clone()));
        let mut out = CsvOut::create(&opts.out.join("delta.csv"), &DELTA)?;
        for (name, tr) in &runs {
            let d = relative_error(&full, tr, &levels)?;
            for (t, v) in times.iter().zip(d) {
                out.row([num(*t), name.to_string(), num(v)])?;
            }
        }
        art.files.push(out.finish()?);
    }

    let meta = json!({
        "kind": s.kind.name(),
        "window_s": [t0, t1],
        "levels": sys.labels(),
        "ode": { "effective": stats_json(&ours.stats), "full": full_stats.as_ref().map(stats_json) },
    });
    art.files.push(write_meta(s, opts, &eff.metadata, meta)?);
    Ok(art)
}

// Ladder (center-of-mass) systems.

pub struct LadderSetup {
    pub system: ComSystem,
    /// Doppler detuning of each family (rad/s).
    pub doppler: Vec<f64>,
    pub gamma0: f64,
    pub rabi: f64,
    pub resonant_family: usize,
}

fn envelope(p: &PulseConfig, base_dir: &Path) -> Result<PulseShape, CliError> {
    let a = p.amplitude_rad_s.unwrap_or(1.0);
    let d = p.duration_s.unwrap_or(0.0);
    let shape = match p.shape {
        ShapeKind::Box => PulseShape::boxcar(a, p.t0_s, d)?,
        ShapeKind::SineSquared => PulseShape::sine_squared(a, p.t0_s, d)?,
        ShapeKind::Blackman => {
            let [b0, b1, b2] = p.blackman;
            PulseShape::blackman(b0 * a, b1 * a, b2 * a, p.t0_s, d)?
        }
        ShapeKind::Tabulated => {
            let csv = p.csv.as_ref().ok_or_else(|| config_err("pulse.csv", "missing"))?;
            let path = if csv.is_absolute() { csv.clone() } else { base_dir.join(csv) };
            let shape = PulseShape::from_csv(&path)?;
            match p.amplitude_rad_s {
                Some(scale) => shape.scaled(scale),
                None => shape,
            }
        }
    };
    Ok(shape)
}

fn build(
    s: &Scenario,
    atom: &AtomConstants,
    lasers: &[LaserSpec],
    ladder: &LadderConfig,
) -> Result<ComSystem, CliError> {
    let sys = match s.kind {
        SystemKind::Raman => {
            let opts = RamanOptions {
                resonance_momentum: s.elimination.resonance_correction.then_some(s.momentum.resonance_momentum),
            };
            raman_system(atom, &lasers[0], &lasers[1], ladder, &opts)?
        }
        SystemKind::DoubleRaman => {
            let choice = match s.elimination.double_raman_detunings {
                DetuningChoice::Listed => DoubleRamanDetunings::Listed,
                DetuningChoice::Derived => DoubleRamanDetunings::Derived,
            };
            let four: &[LaserSpec; 4] = lasers.try_into().map_err(|_| config_err("lasers", "four lasers required"))?;
            double_raman_system(atom, four, ladder, choice)?
        }
        SystemKind::Bragg => bragg_system(atom, &lasers[0], &lasers[1], ladder)?,
        SystemKind::DoubleBragg => {
            let four: &[LaserSpec; 4] = lasers.try_into().map_err(|_| config_err("lasers", "four lasers required"))?;
            double_bragg_system(atom, four, ladder)?
        }
        SystemKind::FiveLevel => return Err(config_err("kind", "five_level is not a ladder system")),
    };
    Ok(sys)
}

/// Calibrates the pulse on the resonant family, then lays out the families.
pub fn ladder_setup(s: &Scenario) -> Result<LadderSetup, CliError> {
    let atom = s.atom_constants()?;
    let pulse = s.pulse.as_ref().ok_or_else(|| config_err("pulse", "required for ladder systems"))?;
    let env = envelope(pulse, &s.base_dir)?;
    let mut lasers = Vec::with_capacity(s.lasers.len());
    for (i, l) in s.lasers.iter().enumerate() {
        let w = l.omega().map_err(|m| config_err(&format!("lasers[{i}]"), m))?;
        lasers.push(LaserSpec::new(l.direction * wavevector(w), w, env.clone(), &l.from, &l.to));
    }
    let m = &s.momentum;
    let window = Window::new(m.window[0], m.window[1])?;
    let p_res = m.resonance_momentum;
    let probe = build(s, &atom, &lasers, &LadderConfig { base_momenta: vec![p_res], window })?;
    let (unit, gamma0) = match pulse.area_rad {
        Some(area) => probe.calibrated(area, p_res)?,
        None => {
            let g = probe.mean_detuning(p_res);
            (probe, g)
        }
    };
    let rabi = unit.peak_rabi(gamma0);
    if !(rabi > 0.0 && rabi.is_finite()) {
        return Err(CliError::Core(mwelim::Error::Calibration("pulse has no two-photon Rabi frequency".into())));
    }
    for (l, c) in lasers.iter_mut().zip(&unit.couplings) {
        l.envelope = c.envelope.clone();
    }
    let kin = unit.ladder.kinematics;
    let per_step = kin.doppler(kin.k_ref, 1.0);
    let (base, doppler): (Vec<f64>, Vec<f64>) = match &m.base_momenta {
        Some(b) => {
            if b.is_empty() {
                return Err(config_err("momentum.base_momenta", "must not be empty"));
            }
            b.iter().map(|&p| (p, (p - p_res) * per_step)).unzip()
        }
        None => {
            let centre = m.families / 2;
            (0..m.families)
                .map(|i| {
                    let nu = (i as f64 - centre as f64) * m.spacing_over_rabi * rabi;
                    (p_res + nu / per_step, nu)
                })
                .unzip()
        }
    };
    let resonant_family =
        (0..doppler.len()).min_by(|&a, &b| doppler[a].abs().total_cmp(&doppler[b].abs())).unwrap_or(0);
    let system = build(s, &atom, &lasers, &LadderConfig { base_momenta: base, window })?;
    Ok(LadderSetup { system, doppler, gamma0, rabi, resonant_family })
}

/// Sample times, evenly spaced in time or in cumulative pulse area.
fn sample_times(l: &LadderSetup, samples: usize, area_grid: bool) -> Result<Vec<f64>, CliError> {
    let (t0, t1) = (l.system.t_start(), l.system.t_end());
    if !area_grid {
        return Ok(linspace(t0, t1, samples));
    }
    let total = l.system.area_progress(l.gamma0, t1)?;
    if !(total > 0.0) {
        return Err(CliError::Core(mwelim::Error::Calibration("pulse area vanishes".into())));
    }
    let mut times = vec![t0];
    for i in 1..samples {
        let target = total * i as f64 / samples as f64;
        let (mut lo, mut hi) = (*times.last().unwrap_or(&t0), t1);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if l.system.area_progress(l.gamma0, mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        if t > *times.last().unwrap_or(&t0) {
            times.push(t);
        }
    }
    times.push(t1);
    Ok(times)
}

fn run_ladder(s: &Scenario, opts: &RunOptions) -> Result<Artifacts, CliError> {
    let setup = ladder_setup(s)?;
    let sys = &setup.system;
    let mut art = Artifacts::default();
    let report = sys.validity(sys.t_end());
    art.files.push(write_json(&opts.out.join("validity.json"), "validity report", &report)?);

    let level = sys.level(&s.initial.level).map_err(|e| config_err("initial.level", e.to_string()))?;
    let relevant = &sys.internal.relevant;
    if !relevant.contains(&level) {
        return Err(config_err("initial.level", format!("`{}` is not a relevant level", s.initial.level)));
    }
    let families = sys.ladder.base_momenta.len();
    let psi_full = StateVector::uniform_in_level(&sys.ladder, level, &vec![1.0; families])?;
    let times = sample_times(&setup, s.output.samples, s.output.area_grid)?;
    let t0 = sys.t_start();

    let eff = effective_hamiltonian(&SystemSpec::Ladder(sys.clone()), s.elimination.order, s.elimination.s_mode)?;
    let EffectiveBlock::Ladder(op) = &eff.block else {
        return Err(CliError::Core(mwelim::Error::Invalid("ladder system gave a matrix operator".into())));
    };
    let psi = psi_full.select_levels(relevant)?;
    let total_area = sys.area_progress(setup.gamma0, sys.t_end())?;
    let progress = |t: f64| sys.area_progress(setup.gamma0, t).map(|a| a / total_area).unwrap_or(f64::NAN);
    let ours = evolve(op, &psi, t0, &times, &s.integrator)?.with_area_progress(progress);

    let rel_labels: Vec<String> = relevant.iter().map(|&l| sys.internal.labels[l].clone()).collect();
    art.files.push(write_populations(&opts.out.join("populations.csv"), &ours, &rel_labels)?);
    art.files.push(write_density(&opts.out.join("density.csv"), &ours, &rel_labels, &setup)?);

    let mut full_info = Value::Null;
    if s.propagate_full {
        let full = evolve(&sys.full_hamiltonian(), &psi_full, t0, &times, &s.integrator)?.with_area_progress(progress);
        art.files.push(write_populations(&opts.out.join("populations_full.csv"), &full, &sys.internal.labels)?);
        let levels: Vec<usize> = (0..relevant.len()).collect();
        let d = relative_error(&full, &ours, &levels)?;
        let mut out = CsvOut::create(&opts.out.join("delta.csv"), &DELTA)?;
        for (t, v) in times.iter().zip(d) {
            out.row([num(*t), "ours".to_string(), num(v)])?;
        }
        art.files.push(out.finish()?);
        full_info = json!({ "truncation_loss": full.truncation_loss, "ode": stats_json(&full.stats) });
    }

    let resonant = ours.final_state().map(|st| {
        family_sites(st, setup.resonant_family, &rel_labels, sys.ladder.window)
            .into_iter()
            .filter(|(_, p)| *p > 1e-12)
            .collect::<std::collections::BTreeMap<_, _>>()
    });
    let meta = json!({
        "kind": s.kind.name(),
        "families": families,
        "resonant_family": setup.resonant_family,
        "resonant_final_populations": resonant,
        "gamma0_rad_s": setup.gamma0,
        "rabi_rad_s": setup.rabi,
        "pulse_area_rad": total_area,
        "window_s": [t0, sys.t_end()],
        "levels": sys.internal.labels,
        "effective": { "truncation_loss": ours.truncation_loss, "ode": stats_json(&ours.stats) },
        "full": full_info,
    });
    art.files.push(write_meta(s, opts, &eff.metadata, meta)?);
    Ok(art)
}

fn write_populations(path: &Path, tr: &TrajectoryResult, labels: &[String]) -> Result<PathBuf, CliError> {
    let mut out = CsvOut::create(path, &POPULATIONS)?;
    for (i, &t) in tr.times.iter().enumerate() {
        for (l, label) in labels.iter().enumerate() {
            out.row([num(t), num(tr.pulse_area_progress[i]), label.clone(), num(tr.populations[i][l])])?;
        }
    }
    out.finish()
}

/// `label` at ladder site 0, `label[n]` elsewhere.
fn site_label(label: &str, n: i64) -> String {
    if n == 0 {
        label.to_string()
    } else {
        format!("{label}[{n}]")
    }
}

/// Population of every (level, site) of one family, normalised by the
/// family norm, over the configured window.
fn family_sites(state: &StateVector, family: usize, labels: &[String], window: Window) -> Vec<(String, f64)> {
    let f = &state.families[family];
    let norm = f.norm_sqr();
    let mut out = Vec::new();
    for (level, label) in labels.iter().enumerate() {
        for n in window.n_min..=window.n_max {
            out.push((site_label(label, n), f.get(level, n).norm_sqr() / norm));
        }
    }
    out
}

/// Per-family (level, site) populations on the Doppler axis in units of the
/// peak two-photon Rabi frequency.
fn write_density(path: &Path, tr: &TrajectoryResult, labels: &[String], l: &LadderSetup) -> Result<PathBuf, CliError> {
    let mut out = CsvOut::create(path, &DENSITY)?;
    let window = l.system.ladder.window;
    // Without dense output only the final state is kept.
    let skip = tr.times.len() - tr.states.len();
    for (state, area) in tr.states.iter().zip(&tr.pulse_area_progress[skip..]) {
        for (f, nu) in l.doppler.iter().enumerate() {
            for (label, density) in family_sites(state, f, labels, window) {
                out.row([num(*area), num(nu / l.rabi), label, num(density)])?;
            }
        }
    }
    out.finish()
}

fn stats_json(s: &OdeStats) -> Value {
    json!({ "accepted": s.accepted, "rejected": s.rejected, "evaluations": s.evaluations })
}

fn write_meta(s: &Scenario, opts: &RunOptions, m: &EffectiveMetadata, extra: Value) -> Result<PathBuf, CliError> {
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut meta = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "label": s.label,
        "source": opts.source,
        "threads": opts.threads.unwrap_or_else(rayon::current_num_threads),
        "seed": opts.seed,
        "integrator": s.integrator,
        "elimination": {
            "order": s.elimination.order,
            "s_mode": m.s_mode,
            "rwa": m.rwa,
            "rwa_ratio": m.rwa_ratio,
            "validity_verdict": m.validity.verdict,
            "validity_warning": m.validity_warning,
            "notes": m.notes,
        },
        "timestamp_unix": timestamp,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut meta, extra) {
        dst.extend(src);
    }
    write_json(&opts.out.join("run_meta.json"), "run metadata", &meta)
}
