//! Generic first-order elimination for atoms with center-of-mass motion.
//!
//! Each coupling drives `relevant → ancilla` with envelope `Ω_j(t)`, plane
//! wave `e^{ik_j x}` and a residual phase `e^{-i w_j t}` left over by the
//! interaction picture. With diagonal energies `E_l` the effective
//! Hamiltonian on the relevant levels is
//!
//! ```text
//! H_eff = Δ + Σ_{i,j share an ancilla} e^{-ik_i x} e^{ik_j x} e^{i(w_i - w_j)t} Ŝ_ij(γ_j(p), t),
//! γ_j(p) = E_b - E_a + k_j p/m + ħk_j²/2m - w_j,
//! ```
//!
//! where `p` is the momentum before the `e^{ik_j x}` kick.

use super::SystemKind;
use crate::elimination::projector::Coupling;
use crate::elimination::s_integral::{rwa_ratio, s_integral_closed, s_integral_quadrature, s_integral_rwa, Detuning, SMode};
use crate::elimination::validity::{validity_report, ValidityReport};
use crate::error::{Error, Result};
use crate::hilbert::{BlockOperator, InternalSpace, LadderTerm, MomentumLadder};
use crate::linalg::CMatrix;
use crate::pulses::{calibrate_amplitude, pulse_area_between, PulseShape};
use num_complex::Complex64 as C64;
use std::sync::Arc;

/// Shift residuals above this are treated as incommensurate.
pub const COMMENSURATION_TOLERANCE: f64 = 1e-9;

/// Builder-facing description of one coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingInput {
    pub label: String,
    pub relevant: String,
    pub ancilla: String,
    pub envelope: PulseShape,
    /// Signed wavevector (rad/m).
    pub k: f64,
    /// Residual phase frequency `w` (rad/s).
    pub phase_freq: f64,
    /// Replaces the derived detuning when set.
    pub gamma_override: Option<Detuning>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComCoupling {
    pub label: String,
    pub relevant: usize,
    pub ancilla: usize,
    pub envelope: PulseShape,
    pub k: f64,
    pub phase_freq: f64,
    /// Ladder steps from the relevant to the ancilla level.
    pub shift: i64,
    pub gamma: Detuning,
    pub gamma_derived: Detuning,
}

#[derive(Debug, Clone)]
pub struct ComSystem {
    pub kind: SystemKind,
    /// Labels and diagonal energies `E_l` (rad/s, reference removed).
    pub internal: InternalSpace,
    pub ladder: MomentumLadder,
    pub couplings: Vec<ComCoupling>,
    /// Constant removed from every diagonal energy.
    pub reference_energy: f64,
    pub notes: Vec<String>,
}

impl ComSystem {
    pub fn new(
        kind: SystemKind,
        internal: InternalSpace,
        ladder: MomentumLadder,
        inputs: Vec<CouplingInput>,
        reference_energy: f64,
    ) -> Result<Self> {
        if ladder.n_levels() != internal.len() {
            return Err(Error::Grid("one momentum offset per level required".into()));
        }
        let mut sys = ComSystem { kind, internal, ladder, couplings: Vec::new(), reference_energy, notes: Vec::new() };
        for c in inputs {
            let a = sys.level(&c.relevant)?;
            let b = sys.level(&c.ancilla)?;
            if !sys.internal.relevant.contains(&a) || !sys.internal.irrelevant.contains(&b) {
                return Err(Error::Invalid(format!("coupling {} must go from a relevant level to an ancilla", c.label)));
            }
            let kref = sys.ladder.kinematics.k_ref;
            let exact = sys.ladder.offsets[a] - sys.ladder.offsets[b] + c.k / kref;
            let shift = exact.round();
            if (exact - shift).abs() > COMMENSURATION_TOLERANCE * exact.abs().max(1.0) {
                return Err(Error::Grid(format!(
                    "coupling {} shifts by {exact} ladder steps, not an integer",
                    c.label
                )));
            }
            let derived = sys.derived_detuning(a, b, c.k, c.phase_freq);
            sys.couplings.push(ComCoupling {
                label: c.label,
                relevant: a,
                ancilla: b,
                envelope: c.envelope,
                k: c.k,
                phase_freq: c.phase_freq,
                shift: shift as i64,
                gamma: c.gamma_override.unwrap_or(derived),
                gamma_derived: derived,
            });
        }
        let max_shift = sys.couplings.iter().map(|c| c.shift.abs()).max().unwrap_or(0);
        if 2 * max_shift > sys.ladder.window.width() {
            return Err(Error::ShiftTooLarge { shift: 2 * max_shift, width: sys.ladder.window.width() });
        }
        Ok(sys)
    }

    pub fn level(&self, label: &str) -> Result<usize> {
        self.internal.index_of(label).ok_or_else(|| Error::Invalid(format!("unknown level `{label}`")))
    }

    /// `γ(p) = E_b - E_a + ħk p k_ref/m + ħk²/2m - w`.
    pub fn derived_detuning(&self, relevant: usize, ancilla: usize, k: f64, w: f64) -> Detuning {
        let kin = &self.ladder.kinematics;
        Detuning {
            constant: self.internal.frequencies[ancilla] - self.internal.frequencies[relevant] + kin.recoil(k) - w,
            per_momentum: kin.doppler(k, 1.0),
        }
    }

    pub fn t_start(&self) -> f64 {
        self.couplings.iter().map(|c| c.envelope.t0).fold(f64::INFINITY, f64::min)
    }

    pub fn t_end(&self) -> f64 {
        self.couplings.iter().map(|c| c.envelope.t_end()).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same system with every envelope replaced.
    pub fn map_envelopes(&self, f: impl Fn(&ComCoupling) -> PulseShape) -> ComSystem {
        let mut s = self.clone();
        for c in &mut s.couplings {
            c.envelope = f(c);
        }
        s
    }

    /// `γ₀`: mean detuning of all couplings for the family based at `p_res`
    /// (each evaluated at site 0 of its relevant level).
    pub fn mean_detuning(&self, p_res: f64) -> f64 {
        let n = self.couplings.len().max(1) as f64;
        self.couplings.iter().map(|c| c.gamma.at(p_res + self.ladder.offsets[c.relevant])).sum::<f64>() / n
    }

    /// Rescales every envelope so that each one alone gives pulse area
    /// `area` against `γ₀ = mean_detuning(p_res)`. Returns the system and `γ₀`.
    pub fn calibrated(&self, area: f64, p_res: f64) -> Result<(ComSystem, f64)> {
        let gamma0 = self.mean_detuning(p_res);
        let mut s = self.clone();
        for c in &mut s.couplings {
            c.envelope = calibrate_amplitude(&c.envelope, gamma0, area)?;
        }
        Ok((s, gamma0))
    }

    /// Peak two-photon Rabi frequency `2 max Ω₁ max Ω₂ / |γ₀|` of the first
    /// two couplings.
    pub fn peak_rabi(&self, gamma0: f64) -> f64 {
        match self.couplings.as_slice() {
            [a, b, ..] => 2.0 * a.envelope.peak() * b.envelope.peak() / gamma0.abs(),
            _ => 0.0,
        }
    }

    /// Cumulative pulse area of the first two couplings up to `t`.
    pub fn area_progress(&self, gamma0: f64, t: f64) -> Result<f64> {
        match self.couplings.as_slice() {
            [a, b, ..] => {
                let start = self.t_start();
                if t <= start {
                    return Ok(0.0);
                }
                pulse_area_between(&a.envelope, &b.envelope, gamma0.abs(), start, t.min(self.t_end()))
            }
            _ => Ok(0.0),
        }
    }

    fn diagonal_terms(&self, op: &mut BlockOperator, levels: &[usize]) {
        for (row, &l) in levels.iter().enumerate() {
            let kin = self.ladder.kinematics;
            let e = self.internal.frequencies[l];
            let label = format!("Δ[{}]", self.internal.labels[l]);
            op.push(LadderTerm::new(row, row, 0, &label, move |p, _| C64::new(kin.kinetic(p) + e, 0.0)));
        }
    }

    /// `Δ` alone on the relevant levels (in `internal.relevant` order).
    pub fn delta_operator(&self) -> BlockOperator {
        let rel = &self.internal.relevant;
        let mut op = BlockOperator::new(rel.iter().map(|&l| self.ladder.offsets[l]).collect(), false);
        self.diagonal_terms(&mut op, rel);
        op
    }

    /// Full-space matrix of the diagonal part alone, for one family.
    pub fn delta_full(&self, p0: f64) -> CMatrix {
        let all: Vec<usize> = (0..self.internal.len()).collect();
        let mut op = BlockOperator::new(self.ladder.offsets.clone(), false);
        self.diagonal_terms(&mut op, &all);
        op.assemble(0.0, p0, self.ladder.window)
    }

    /// The un-eliminated Hamiltonian on all levels (internal order).
    pub fn full_hamiltonian(&self) -> BlockOperator {
        let all: Vec<usize> = (0..self.internal.len()).collect();
        let mut op = BlockOperator::new(self.ladder.offsets.clone(), true);
        self.diagonal_terms(&mut op, &all);
        for c in &self.couplings {
            let (env, w) = (c.envelope.clone(), c.phase_freq);
            op.push(LadderTerm::new(c.ancilla, c.relevant, c.shift, &c.label, move |_, t| {
                env.evaluate(t) * C64::new(0.0, -w * t).exp()
            }));
            let (env, w) = (c.envelope.clone(), c.phase_freq);
            op.push(LadderTerm::new(c.relevant, c.ancilla, -c.shift, format!("{}†", c.label).as_str(), move |_, t| {
                env.evaluate(t) * C64::new(0.0, w * t).exp()
            }));
        }
        op
    }

    /// Pairs `(i, j)` of couplings through a common ancilla.
    pub fn coupling_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.couplings.len();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.couplings[i].ancilla == self.couplings[j].ancilla)
            .collect()
    }

    /// First-order effective Hamiltonian on the relevant levels. In
    /// quadrature mode `tol` is the absolute tolerance per `Ŝ` value.
    /// Coefficients that hit a pole evaluate to NaN.
    pub fn effective(&self, mode: SMode, tol: f64) -> BlockOperator {
        let rel = &self.internal.relevant;
        let pos = |l: usize| rel.iter().position(|&x| x == l).expect("relevant level");
        let mut op = BlockOperator::new(rel.iter().map(|&l| self.ladder.offsets[l]).collect(), true);
        self.diagonal_terms(&mut op, rel);
        let t0 = self.t_start();
        for (i, j) in self.coupling_pairs() {
            let (ci, cj) = (&self.couplings[i], &self.couplings[j]);
            let (sn, sj, gamma) = (ci.envelope.clone(), cj.envelope.clone(), cj.gamma);
            let dw = ci.phase_freq - cj.phase_freq;
            let label = format!("S[{},{}]", ci.label, cj.label);
            op.push(LadderTerm::new(pos(ci.relevant), pos(cj.relevant), cj.shift - ci.shift, &label, move |p, t| {
                let g = gamma.at(p);
                let s = match mode {
                    SMode::Closed => s_integral_closed(&sn, &sj, g, t0, t),
                    SMode::Rwa => s_integral_rwa(&sn, &sj, g, t),
                    SMode::Quadrature => s_integral_quadrature(&sn, &sj, g, t0, t, tol),
                };
                let phase = if dw == 0.0 { C64::new(1.0, 0.0) } else { C64::new(0.0, dw * t).exp() };
                s.map(|v| v * phase).unwrap_or(C64::new(f64::NAN, f64::NAN))
            }));
        }
        op
    }

    /// Momenta (ladder units) of `level` over the whole configured support.
    fn support_momenta(&self, level: usize) -> impl Iterator<Item = f64> + '_ {
        let w = self.ladder.window;
        self.ladder
            .base_momenta
            .iter()
            .flat_map(move |&p0| (w.n_min..=w.n_max).map(move |n| p0 + self.ladder.offsets[level] + n as f64))
    }

    /// Checks the closed form against its poles over the configured support.
    pub fn check_poles(&self, mode: SMode) -> Result<()> {
        for c in &self.couplings {
            for p in self.support_momenta(c.relevant) {
                let g = c.gamma.at(p);
                match mode {
                    SMode::Closed => crate::elimination::s_integral::check_poles(&c.envelope, g)?,
                    SMode::Rwa if g == 0.0 => return Err(Error::Pole { denominator: "γ".into(), value: 0.0 }),
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Largest `2π/(T|γ|)` over couplings and support momenta.
    pub fn max_rwa_ratio(&self) -> f64 {
        self.couplings
            .iter()
            .flat_map(|c| self.support_momenta(c.relevant).map(move |p| rwa_ratio(&c.envelope, c.gamma.at(p))))
            .fold(0.0, f64::max)
    }

    /// Validity over `[t_start, t]`, worst case over the lowest, highest and
    /// most central base momenta, each on the full ladder window.
    pub fn validity(&self, t: f64) -> ValidityReport {
        let bases = &self.ladder.base_momenta;
        let mut picks: Vec<usize> = Vec::new();
        let by = |f: &dyn Fn(f64, f64) -> bool| {
            (0..bases.len()).fold(0, |best, i| if f(bases[i], bases[best]) { i } else { best })
        };
        picks.push(by(&|a, b| a < b));
        picks.push(by(&|a, b| a > b));
        picks.push(by(&|a, b| a.abs() < b.abs()));
        picks.sort();
        picks.dedup();

        let window = self.ladder.window;
        let sites = window.sites();
        let full = Arc::new(self.full_hamiltonian());
        let index = |levels: &[usize]| -> Vec<usize> {
            levels.iter().flat_map(|&l| (0..sites).map(move |i| l * sites + i)).collect()
        };
        let rel = index(&self.internal.relevant);
        let irr = index(&self.internal.irrelevant);
        let t0 = self.t_start();
        let mut reports = Vec::new();
        for &f in &picks {
            let p0 = bases[f];
            let h0 = full.assemble(t0, p0, window);
            let delta = h0.select_rows(&rel).select_columns(&rel);
            let xi = h0.select_rows(&irr).select_columns(&irr);
            let (full_c, rel_c, irr_c) = (full.clone(), rel.clone(), irr.clone());
            let omega = Coupling::TimeDependent {
                rows: irr.len(),
                cols: rel.len(),
                f: Arc::new(move |s| -> CMatrix {
                    full_c.assemble(s, p0, window).select_rows(&irr_c).select_columns(&rel_c)
                }),
                breaks: self.couplings.iter().flat_map(|c| c.envelope.breakpoints()).collect(),
            };
            reports.push(validity_report(&delta, &xi, &omega, t0, t, ""));
        }
        let support = format!(
            "ladder sites n in [{}, {}] for base momenta {:?} (units of ħk_ref)",
            window.n_min,
            window.n_max,
            picks.iter().map(|&i| bases[i]).collect::<Vec<_>>()
        );
        ValidityReport::worst(&reports, &support).expect("at least one family")
    }
}
