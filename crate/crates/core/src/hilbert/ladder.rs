use crate::error::{Error, Result};
use crate::units::Kinematics;

/// Inclusive range of ladder indices `n_min..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub n_min: i64,
    pub n_max: i64,
}

impl Window {
    pub fn new(n_min: i64, n_max: i64) -> Result<Self> {
        if n_min >= n_max {
            return Err(Error::Grid(format!("empty ladder window {n_min}..={n_max}")));
        }
        Ok(Window { n_min, n_max })
    }

    pub fn sites(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn width(&self) -> i64 {
        self.n_max - self.n_min
    }

    pub fn index(&self, n: i64) -> Option<usize> {
        (self.n_min..=self.n_max).contains(&n).then(|| (n - self.n_min) as usize)
    }

    pub fn site(&self, idx: usize) -> i64 {
        self.n_min + idx as i64
    }

    /// Doubles the width, growing both sides.
    pub fn doubled(&self) -> Window {
        let pad = (self.width() + 1) / 2;
        Window { n_min: self.n_min - pad, n_max: self.n_max + pad }
    }
}

impl Default for Window {
    fn default() -> Self {
        Window { n_min: -8, n_max: 8 }
    }
}

/// The momentum grid shared by every family of a system.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumLadder {
    pub kinematics: Kinematics,
    /// Base quasi-momenta `p₀`, one per family (units of `ħ k_ref`).
    pub base_momenta: Vec<f64>,
    /// Per-level momentum offsets (units of `ħ k_ref`).
    pub offsets: Vec<f64>,
    pub window: Window,
}

impl MomentumLadder {
    pub fn new(
        kinematics: Kinematics,
        base_momenta: Vec<f64>,
        offsets: Vec<f64>,
        window: Window,
    ) -> Result<Self> {
        if !(kinematics.k_ref.is_finite() && kinematics.k_ref > 0.0) {
            return Err(Error::Grid(format!("k_ref must be positive, got {}", kinematics.k_ref)));
        }
        if !(kinematics.mass_kg > 0.0) {
            return Err(Error::Grid("mass must be positive".into()));
        }
        if base_momenta.is_empty() {
            return Err(Error::Grid("no base momenta".into()));
        }
        let mut sorted = base_momenta.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Grid("base momenta must be distinct".into()));
        }
        Ok(MomentumLadder { kinematics, base_momenta, offsets, window })
    }

    /// Momentum of `level` at ladder index `n` in `family`.
    pub fn momentum(&self, family: usize, level: usize, n: i64) -> f64 {
        self.base_momenta[family] + self.offsets[level] + n as f64
    }

    pub fn n_levels(&self) -> usize {
        self.offsets.len()
    }
}

/// Internal levels with their rest frequencies and the relevant/irrelevant split.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalSpace {
    pub labels: Vec<String>,
    pub frequencies: Vec<f64>,
    pub relevant: Vec<usize>,
    pub irrelevant: Vec<usize>,
}

impl InternalSpace {
    pub fn new(
        labels: Vec<String>,
        frequencies: Vec<f64>,
        relevant: Vec<usize>,
        irrelevant: Vec<usize>,
    ) -> Result<Self> {
        let n = labels.len();
        if frequencies.len() != n {
            return Err(Error::Invalid("one frequency per level required".into()));
        }
        if relevant.is_empty() {
            return Err(Error::Invalid("relevant set is empty".into()));
        }
        let mut seen = vec![false; n];
        for &i in relevant.iter().chain(&irrelevant) {
            if i >= n || seen[i] {
                return Err(Error::Invalid(format!("level index {i} out of range or repeated")));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Invalid("partition does not cover all levels".into()));
        }
        Ok(InternalSpace { labels, frequencies, relevant, irrelevant })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}
