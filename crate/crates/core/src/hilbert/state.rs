use super::ladder::{MomentumLadder, Window};
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

/// Amplitudes of one momentum family, stored level-major:
/// `amps[level * sites + (n - n_min)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyState {
    pub base_momentum: f64,
    pub n_levels: usize,
    pub window: Window,
    pub amps: Vec<C64>,
}

impl FamilyState {
    pub fn zeros(base_momentum: f64, n_levels: usize, window: Window) -> Self {
        FamilyState {
            base_momentum,
            n_levels,
            window,
            amps: vec![C64::new(0.0, 0.0); n_levels * window.sites()],
        }
    }

    pub fn sites(&self) -> usize {
        self.window.sites()
    }

    pub fn offset(&self, level: usize, n: i64) -> Option<usize> {
        self.window.index(n).map(|i| level * self.sites() + i)
    }

    pub fn get(&self, level: usize, n: i64) -> C64 {
        self.offset(level, n).map_or(C64::new(0.0, 0.0), |i| self.amps[i])
    }

    pub fn set(&mut self, level: usize, n: i64, value: C64) -> Result<()> {
        let i = self
            .offset(level, n)
            .ok_or_else(|| Error::Grid(format!("site {n} outside window")))?;
        self.amps[i] = value;
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn level_population(&self, level: usize) -> f64 {
        let s = self.sites();
        self.amps[level * s..(level + 1) * s].iter().map(|a| a.norm_sqr()).sum()
    }

    /// Same amplitudes on a wider window.
    pub fn resized(&self, window: Window) -> Result<Self> {
        if window.n_min > self.window.n_min || window.n_max < self.window.n_max {
            return Err(Error::Grid("resize would drop sites".into()));
        }
        let mut out = FamilyState::zeros(self.base_momentum, self.n_levels, window);
        for l in 0..self.n_levels {
            for n in self.window.n_min..=self.window.n_max {
                out.set(l, n, self.get(l, n))?;
            }
        }
        Ok(out)
    }

    /// Population stored in the outermost `margin` sites on either side.
    pub fn edge_population(&self, margin: usize) -> f64 {
        let s = self.sites();
        let m = margin.min(s / 2);
        (0..self.n_levels)
            .map(|l| {
                let row = &self.amps[l * s..(l + 1) * s];
                row[..m].iter().chain(&row[s - m..]).map(|a| a.norm_sqr()).sum::<f64>()
            })
            .sum()
    }
}

/// A spinor wavefunction: one [`FamilyState`] per base momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub families: Vec<FamilyState>,
    pub norm_tolerance: f64,
}

impl StateVector {
    pub fn zeros(ladder: &MomentumLadder) -> Self {
        StateVector {
            families: ladder
                .base_momenta
                .iter()
                .map(|&p0| FamilyState::zeros(p0, ladder.n_levels(), ladder.window))
                .collect(),
            norm_tolerance: 1e-9,
        }
    }

    /// All amplitude in `level` at `n = 0`, spread uniformly over families
    /// with the given weights (normalised to unit total norm).
    pub fn uniform_in_level(ladder: &MomentumLadder, level: usize, weights: &[f64]) -> Result<Self> {
        if weights.len() != ladder.base_momenta.len() {
            return Err(Error::Invalid("one weight per family required".into()));
        }
        let total: f64 = weights.iter().map(|w| w * w).sum();
        if !(total > 0.0) {
            return Err(Error::Invalid("weights vanish".into()));
        }
        let mut s = StateVector::zeros(ladder);
        for (fam, &w) in s.families.iter_mut().zip(weights) {
            fam.set(level, 0, C64::new(w / total.sqrt(), 0.0))?;
        }
        Ok(s)
    }

    /// The amplitudes of `levels` only, in that order.
    pub fn select_levels(&self, levels: &[usize]) -> Result<StateVector> {
        let mut families = Vec::with_capacity(self.families.len());
        for f in &self.families {
            let s = f.sites();
            let mut out = FamilyState::zeros(f.base_momentum, levels.len(), f.window);
            for (i, &l) in levels.iter().enumerate() {
                if l >= f.n_levels {
                    return Err(Error::Invalid(format!("level {l} out of range")));
                }
                out.amps[i * s..(i + 1) * s].copy_from_slice(&f.amps[l * s..(l + 1) * s]);
            }
            families.push(out);
        }
        Ok(StateVector { families, norm_tolerance: self.norm_tolerance })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.families.iter().map(FamilyState::norm_sqr).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.families.iter().all(|f| f.amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()))
    }

    pub fn scale(&mut self, a: C64) {
        for f in &mut self.families {
            f.amps.iter_mut().for_each(|x| *x *= a);
        }
    }

    /// `a·self + b·other`; both states must share the family layout.
    pub fn combine(&self, a: C64, other: &StateVector, b: C64) -> Result<StateVector> {
        if self.families.len() != other.families.len() {
            return Err(Error::Invalid("family count mismatch".into()));
        }
        let mut out = self.clone();
        for (fo, fb) in out.families.iter_mut().zip(&other.families) {
            if fo.window != fb.window || fo.n_levels != fb.n_levels {
                return Err(Error::Invalid("family layout mismatch".into()));
            }
            for (x, y) in fo.amps.iter_mut().zip(&fb.amps) {
                *x = a * *x + b * *y;
            }
        }
        Ok(out)
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.families
            .iter()
            .zip(&other.families)
            .flat_map(|(a, b)| a.amps.iter().zip(&b.amps))
            .map(|(x, y)| x.conj() * y)
            .sum()
    }
}
