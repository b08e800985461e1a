use super::ladder::Window;
use super::state::{FamilyState, StateVector};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use num_complex::Complex64 as C64;
use std::fmt;
use std::sync::Arc;

/// Momentum-diagonal coefficient `f(p, t)` in rad/s, `p` in units of `ħ k_ref`.
pub type Coefficient = Arc<dyn Fn(f64, f64) -> C64 + Send + Sync>;

/// One entry `|row, n + shift⟩⟨col, n| f(p_col(n), t)` of a block operator.
///
/// The coefficient sees the momentum *before* the shift, i.e. the term is
/// `e^{i shift k_ref x̂} f(p̂, t)` with the exponential to the left.
#[derive(Clone)]
pub struct LadderTerm {
    pub row: usize,
    pub col: usize,
    pub shift: i64,
    pub coeff: Coefficient,
    pub label: String,
}

impl LadderTerm {
    pub fn new(
        row: usize,
        col: usize,
        shift: i64,
        label: impl Into<String>,
        coeff: impl Fn(f64, f64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        LadderTerm { row, col, shift, coeff: Arc::new(coeff), label: label.into() }
    }
}

impl fmt::Debug for LadderTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LadderTerm")
            .field("row", &self.row)
            .field("col", &self.col)
            .field("shift", &self.shift)
            .field("label", &self.label)
            .finish()
    }
}

/// A sum of [`LadderTerm`]s over `n_levels` internal levels.
#[derive(Clone, Debug)]
pub struct BlockOperator {
    pub n_levels: usize,
    /// Momentum offset of each level (units of `ħ k_ref`).
    pub offsets: Vec<f64>,
    pub terms: Vec<LadderTerm>,
    pub time_dependent: bool,
}

impl BlockOperator {
    pub fn new(offsets: Vec<f64>, time_dependent: bool) -> Self {
        BlockOperator { n_levels: offsets.len(), offsets, terms: Vec::new(), time_dependent }
    }

    pub fn push(&mut self, term: LadderTerm) {
        assert!(term.row < self.n_levels && term.col < self.n_levels, "term level out of range");
        self.terms.push(term);
    }

    pub fn with(mut self, term: LadderTerm) -> Self {
        self.push(term);
        self
    }

    pub fn max_shift(&self) -> i64 {
        self.terms.iter().map(|t| t.shift.abs()).max().unwrap_or(0)
    }

    /// Momentum of `level` at site `n` of the family based at `p0`.
    pub fn momentum(&self, p0: f64, level: usize, n: i64) -> f64 {
        p0 + self.offsets[level] + n as f64
    }

    /// `out = B(t) ψ` on one family. Returns the squared norm of the
    /// contributions that fell outside the window.
    pub fn apply_into(&self, t: f64, psi: &FamilyState, out: &mut [C64]) -> f64 {
        self.apply_raw(t, psi.base_momentum, psi.window, &psi.amps, out)
    }

    /// As [`apply_into`](Self::apply_into) on bare level-major amplitudes.
    pub fn apply_raw(&self, t: f64, p0: f64, w: Window, amps: &[C64], out: &mut [C64]) -> f64 {
        let sites = w.sites();
        debug_assert_eq!(out.len(), amps.len());
        out.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        let mut lost = 0.0;
        for term in &self.terms {
            let src = &amps[term.col * sites..(term.col + 1) * sites];
            let dst_base = term.row * sites;
            for (i, &a) in src.iter().enumerate() {
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let n = w.site(i);
                let f = (term.coeff)(self.momentum(p0, term.col, n), t);
                let v = f * a;
                match w.index(n + term.shift) {
                    Some(j) => out[dst_base + j] += v,
                    None => lost += v.norm_sqr(),
                }
            }
        }
        lost
    }

    pub fn apply_family(&self, t: f64, psi: &FamilyState) -> (FamilyState, f64) {
        let mut out = FamilyState::zeros(psi.base_momentum, psi.n_levels, psi.window);
        let lost = self.apply_into(t, psi, &mut out.amps);
        (out, lost)
    }

    /// `B(t) ψ` over all families; errors when the amplitude pushed past a
    /// window edge exceeds `cap` (squared norm).
    pub fn apply(&self, t: f64, state: &StateVector, cap: f64) -> Result<(StateVector, f64)> {
        let mut lost = 0.0;
        let mut families = Vec::with_capacity(state.families.len());
        for fam in &state.families {
            if fam.n_levels != self.n_levels {
                return Err(Error::Invalid(format!(
                    "operator acts on {} levels, state has {}",
                    self.n_levels, fam.n_levels
                )));
            }
            if self.max_shift() > fam.window.width() {
                return Err(Error::ShiftTooLarge { shift: self.max_shift(), width: fam.window.width() });
            }
            let (out, l) = self.apply_family(t, fam);
            lost += l;
            families.push(out);
        }
        if lost > cap {
            return Err(Error::Truncation { lost_norm: lost, cap });
        }
        Ok((StateVector { families, norm_tolerance: state.norm_tolerance }, lost))
    }

    /// Dense matrix of the operator on one family, basis index
    /// `level * sites + (n - n_min)`. Couplings leaving the window are dropped.
    pub fn assemble(&self, t: f64, p0: f64, window: Window) -> CMatrix {
        let sites = window.sites();
        let dim = self.n_levels * sites;
        let mut m = CMatrix::zeros(dim, dim);
        for term in &self.terms {
            for i in 0..sites {
                let n = window.site(i);
                if let Some(j) = window.index(n + term.shift) {
                    let f = (term.coeff)(self.momentum(p0, term.col, n), t);
                    m[(term.row * sites + j, term.col * sites + i)] += f;
                }
            }
        }
        m
    }

    /// Hermitian conjugate as a term list.
    pub fn adjoint(&self) -> BlockOperator {
        let mut out = BlockOperator::new(self.offsets.clone(), self.time_dependent);
        for term in &self.terms {
            let f = term.coeff.clone();
            // The adjoint term starts on `row` at momentum p; the original
            // coefficient must be evaluated at the matching `col` momentum.
            let dp = self.offsets[term.col] - self.offsets[term.row] - term.shift as f64;
            out.push(LadderTerm {
                row: term.col,
                col: term.row,
                shift: -term.shift,
                coeff: Arc::new(move |p, t| f(p + dp, t).conj()),
                label: format!("{}†", term.label),
            });
        }
        out
    }

    /// Terms whose row and column are both in `levels`, re-indexed to that subset.
    pub fn restricted(&self, levels: &[usize]) -> BlockOperator {
        let map = |l: usize| levels.iter().position(|&x| x == l);
        let mut out = BlockOperator::new(
            levels.iter().map(|&l| self.offsets[l]).collect(),
            self.time_dependent,
        );
        for term in &self.terms {
            if let (Some(r), Some(c)) = (map(term.row), map(term.col)) {
                out.push(LadderTerm { row: r, col: c, ..term.clone() });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;

    fn two_level() -> BlockOperator {
        BlockOperator::new(vec![0.0, 0.25], true)
            .with(LadderTerm::new(0, 0, 0, "kin", |p, _| C64::new(p * p, 0.0)))
            .with(LadderTerm::new(1, 0, 1, "up", |p, t| C64::new(p, t)))
            .with(LadderTerm::new(0, 1, -2, "down", |p, t| C64::new(1.0 + t, -p)))
    }

    #[test]
    fn kinetic_acts_diagonally() {
        let op = BlockOperator::new(vec![0.0], false)
            .with(LadderTerm::new(0, 0, 0, "kin", |p, _| C64::new(p * p / 2.0, 0.0)));
        let mut psi = FamilyState::zeros(0.3, 1, Window::default());
        psi.set(0, 2, C64::new(1.0, 0.0)).unwrap();
        let (out, lost) = op.apply_family(0.0, &psi);
        assert_eq!(lost, 0.0);
        let p = 2.3f64;
        assert!((out.get(0, 2) - C64::new(p * p / 2.0, 0.0)).norm() < 1e-14);
        assert!((out.norm_sqr() - (p * p / 2.0).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn single_term_moves_amplitude() {
        let omega0 = C64::new(0.7, -0.1);
        let op = BlockOperator::new(vec![0.0, 0.0], false)
            .with(LadderTerm::new(1, 0, 1, "Ω", move |_, _| omega0));
        let mut psi = FamilyState::zeros(0.0, 2, Window::default());
        psi.set(0, 0, C64::new(1.0, 0.0)).unwrap();
        let (out, _) = op.apply_family(0.0, &psi);
        assert_eq!(out.get(1, 1), omega0);
        assert!((out.norm_sqr() - omega0.norm_sqr()).abs() < 1e-15);
    }

    #[test]
    fn adjoint_matches_conjugate_transpose() {
        let op = two_level();
        let w = Window::default();
        let m = op.assemble(0.4, 0.1, w);
        let ma = op.adjoint().assemble(0.4, 0.1, w);
        assert!(frobenius(&(ma - m.adjoint())) < 1e-13);
    }

    #[test]
    fn loss_reported_at_edge() {
        let op = BlockOperator::new(vec![0.0], false)
            .with(LadderTerm::new(0, 0, 1, "shift", |_, _| C64::new(1.0, 0.0)));
        let mut psi = FamilyState::zeros(0.0, 1, Window::default());
        psi.set(0, 8, C64::new(1.0, 0.0)).unwrap();
        let (out, lost) = op.apply_family(0.0, &psi);
        assert_eq!(out.norm_sqr(), 0.0);
        assert_eq!(lost, 1.0);
        let sv = StateVector { families: vec![psi], norm_tolerance: 1e-9 };
        assert!(matches!(op.apply(0.0, &sv, 0.5), Err(Error::Truncation { .. })));
    }

    #[test]
    fn apply_matches_assembled_matrix() {
        let op = two_level();
        let w = Window::default();
        let mut psi = FamilyState::zeros(-0.2, 2, w);
        for (i, a) in psi.amps.iter_mut().enumerate() {
            *a = C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos());
        }
        let (out, _) = op.apply_family(0.9, &psi);
        let m = op.assemble(0.9, -0.2, w);
        let v = crate::linalg::CVector::from_vec(psi.amps.clone());
        let mv = m * v;
        let diff: f64 = out.amps.iter().zip(mv.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert!(diff.sqrt() < 1e-12);
    }
}
