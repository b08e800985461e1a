//! Projector series `P = Σ P_ℓ` solving the Riccati equation
//!
//! ```text
//! i dP/dt = ΞP - PΔ + Ω - PΩ†P,    P(t0) = 0,
//! ```
//!
//! order by order in `Ω`. Each order obeys a Sylvester equation with source
//! `F_ℓ` and is integrated as `P_ℓ(t) = -i ∫ U_Ξ(s,t) F_ℓ(s) U_Δ†(s,t) ds`.
//! For hermitian `Δ`, `Ξ` this is done element-wise in their eigenbases;
//! otherwise the Sylvester ODE is stepped directly.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianEigen};
use crate::ode::{solve_to, OdeOptions};
use crate::quadrature::{exp_integral, integrate_vec, QuadOptions};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Matrix-valued function of time.
pub type MatrixFn = Arc<dyn Fn(f64) -> CMatrix + Send + Sync>;

/// Coupling block `Ω(t)` (irrelevant × relevant).
#[derive(Clone)]
pub enum Coupling {
    Constant(CMatrix),
    TimeDependent { rows: usize, cols: usize, f: MatrixFn, breaks: Vec<f64> },
}

impl std::fmt::Debug for Coupling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coupling::Constant(m) => write!(f, "Coupling::Constant({m})"),
            Coupling::TimeDependent { rows, cols, .. } => write!(f, "Coupling::TimeDependent({rows}x{cols})"),
        }
    }
}

impl Coupling {
    pub fn at(&self, t: f64) -> CMatrix {
        match self {
            Coupling::Constant(m) => m.clone(),
            Coupling::TimeDependent { f, .. } => f(t),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            Coupling::Constant(m) => (m.nrows(), m.ncols()),
            Coupling::TimeDependent { rows, cols, .. } => (*rows, *cols),
        }
    }

    pub fn breaks(&self) -> &[f64] {
        match self {
            Coupling::Constant(_) => &[],
            Coupling::TimeDependent { breaks, .. } => breaks,
        }
    }

    pub fn scaled(&self, factor: f64) -> Coupling {
        match self {
            Coupling::Constant(m) => Coupling::Constant(m * C64::new(factor, 0.0)),
            Coupling::TimeDependent { rows, cols, f, breaks } => {
                let f = f.clone();
                Coupling::TimeDependent {
                    rows: *rows,
                    cols: *cols,
                    f: Arc::new(move |t| f(t) * C64::new(factor, 0.0)),
                    breaks: breaks.clone(),
                }
            }
        }
    }
}

/// Eigenbases of `Ξ` and `Δ` and the detunings `γ_ab = ξ_a - δ_b`.
#[derive(Debug, Clone)]
pub struct Eigenbases {
    pub xi: HermitianEigen,
    pub delta: HermitianEigen,
}

impl Eigenbases {
    pub fn new(delta: &CMatrix, xi: &CMatrix) -> Result<Self> {
        Ok(Eigenbases { xi: HermitianEigen::new(xi)?, delta: HermitianEigen::new(delta)? })
    }

    pub fn gamma(&self, a: usize, b: usize) -> f64 {
        self.xi.values[a] - self.delta.values[b]
    }

    pub fn max_gamma(&self) -> f64 {
        let mut g: f64 = 0.0;
        for a in 0..self.xi.values.len() {
            for b in 0..self.delta.values.len() {
                g = g.max(self.gamma(a, b).abs());
            }
        }
        g
    }

    /// `V† M W`.
    pub fn to_eigen(&self, m: &CMatrix) -> CMatrix {
        self.xi.vectors.adjoint() * m * &self.delta.vectors
    }

    /// `V M W†`.
    pub fn from_eigen(&self, m: &CMatrix) -> CMatrix {
        &self.xi.vectors * m * self.delta.vectors.adjoint()
    }

    /// `-i ∫_{t0}^{t} U_Ξ(s,t) F U_Δ†(s,t) ds` for constant `F`.
    pub fn integrate_constant(&self, f: &CMatrix, t0: f64, t: f64) -> CMatrix {
        let ft = self.to_eigen(f);
        let tau = t - t0;
        let mut p = CMatrix::zeros(ft.nrows(), ft.ncols());
        for a in 0..ft.nrows() {
            for b in 0..ft.ncols() {
                p[(a, b)] = C64::new(0.0, -1.0) * ft[(a, b)] * exp_integral(-self.gamma(a, b), 0.0, tau);
            }
        }
        self.from_eigen(&p)
    }

    /// Same integral for time-dependent `F`, element-wise oscillatory
    /// quadrature to absolute tolerance `tol` (Frobenius).
    pub fn integrate(
        &self,
        f: &dyn Fn(f64) -> CMatrix,
        rows: usize,
        cols: usize,
        t0: f64,
        t: f64,
        breaks: &[f64],
        tol: f64,
    ) -> Result<CMatrix> {
        let n = rows * cols;
        let integrand = |s: f64, out: &mut [C64]| {
            let ft = self.to_eigen(&f(s));
            for b in 0..cols {
                for a in 0..rows {
                    out[a + rows * b] = ft[(a, b)] * C64::new(0.0, -self.gamma(a, b) * (t - s)).exp();
                }
            }
        };
        let g = self.max_gamma();
        let mut opts = QuadOptions::new(tol);
        if g > 0.0 {
            opts = opts.with_max_panel(0.25 * PI / g);
        }
        let (v, _) = integrate_vec(&integrand, n, t0, t, breaks, opts)?;
        let p = CMatrix::from_iterator(rows, cols, v.into_iter().map(|x| C64::new(0.0, -1.0) * x));
        Ok(self.from_eigen(&p))
    }
}

fn check_blocks(delta: &CMatrix, xi: &CMatrix, omega: &Coupling) -> Result<()> {
    let (r, c) = omega.shape();
    if !delta.is_square() || !xi.is_square() || r != xi.nrows() || c != delta.nrows() {
        return Err(Error::Invalid(format!(
            "Ω is {r}x{c} but Ξ is {}x{} and Δ is {}x{}",
            xi.nrows(),
            xi.ncols(),
            delta.nrows(),
            delta.ncols()
        )));
    }
    Ok(())
}

fn from_slice(rows: usize, cols: usize, v: &[C64]) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v)
}

/// Steps `i dP/dt = ΞP - PΔ + F(t)` from `P(t0) = 0`. Works for any
/// (including defective) `Δ`, `Ξ`.
pub fn sylvester_ode(
    delta: &CMatrix,
    xi: &CMatrix,
    f: &dyn Fn(f64) -> CMatrix,
    t0: f64,
    t: f64,
    opts: &OdeOptions,
) -> Result<CMatrix> {
    let (rows, cols) = (xi.nrows(), delta.nrows());
    let rhs = |s: f64, y: &[C64], dy: &mut [C64]| {
        let p = from_slice(rows, cols, y);
        let d = (xi * &p - &p * delta + f(s)) * C64::new(0.0, -1.0);
        dy.copy_from_slice(d.as_slice());
    };
    let sol = solve_to(rhs, t0, vec![C64::new(0.0, 0.0); rows * cols], t, &[], opts)?;
    Ok(from_slice(rows, cols, &sol.y))
}

/// `P₁(t) = -i ∫_{t0}^{t} U_Ξ(s,t) Ω(s) U_Δ†(s,t) ds`.
pub fn projector_first_order(
    delta: &CMatrix,
    xi: &CMatrix,
    omega: &Coupling,
    t0: f64,
    t: f64,
    tol: f64,
) -> Result<CMatrix> {
    check_blocks(delta, xi, omega)?;
    match Eigenbases::new(delta, xi) {
        Ok(bases) => match omega {
            Coupling::Constant(m) => Ok(bases.integrate_constant(m, t0, t)),
            Coupling::TimeDependent { rows, cols, f, breaks } => {
                bases.integrate(f.as_ref(), *rows, *cols, t0, t, breaks, tol)
            }
        },
        Err(Error::Decomposition(_)) => {
            let w = omega.clone();
            sylvester_ode(delta, xi, &move |s| w.at(s), t0, t, &OdeOptions::tolerances(tol, tol))
        }
        Err(e) => Err(e),
    }
}

/// Source term `F_ℓ` from the lower orders evaluated at one time.
pub fn source_term(ell: usize, lower: &[CMatrix], omega: &CMatrix) -> CMatrix {
    let (rows, cols) = (omega.nrows(), omega.ncols());
    match ell {
        0 => CMatrix::zeros(rows, cols),
        1 => {
            let p0 = &lower[0];
            omega - p0 * omega.adjoint() * p0
        }
        _ => {
            let od = omega.adjoint();
            let mut f = CMatrix::zeros(rows, cols);
            for k in 0..ell {
                f -= &lower[ell - 1 - k] * &od * &lower[k];
            }
            f
        }
    }
}

/// `P_ℓ(t)` given the lower orders as functions of time.
pub fn projector_order(
    ell: usize,
    lower: &[MatrixFn],
    delta: &CMatrix,
    xi: &CMatrix,
    omega: &Coupling,
    t0: f64,
    t: f64,
    tol: f64,
) -> Result<CMatrix> {
    check_blocks(delta, xi, omega)?;
    let (rows, cols) = omega.shape();
    if ell == 0 {
        return Ok(CMatrix::zeros(rows, cols));
    }
    if lower.len() < ell {
        return Err(Error::Invalid(format!("order {ell} needs {ell} lower orders, got {}", lower.len())));
    }
    let source = |s: f64| {
        let ps: Vec<CMatrix> = lower[..ell].iter().map(|p| p(s)).collect();
        source_term(ell, &ps, &omega.at(s))
    };
    match Eigenbases::new(delta, xi) {
        Ok(bases) => {
            let mut breaks = omega.breaks().to_vec();
            breaks.sort_by(f64::total_cmp);
            bases.integrate(&source, rows, cols, t0, t, &breaks, tol)
        }
        Err(Error::Decomposition(_)) => sylvester_ode(delta, xi, &source, t0, t, &OdeOptions::tolerances(tol, tol)),
        Err(e) => Err(e),
    }
}

/// Lazily evaluated projector orders for a fixed system.
#[derive(Clone)]
pub struct ProjectorSeries {
    pub delta: CMatrix,
    pub xi: CMatrix,
    pub omega: Coupling,
    pub t0: f64,
    pub tol: f64,
    bases: Option<Arc<Eigenbases>>,
}

impl ProjectorSeries {
    pub fn new(delta: CMatrix, xi: CMatrix, omega: Coupling, t0: f64, tol: f64) -> Result<Self> {
        check_blocks(&delta, &xi, &omega)?;
        let bases = match Eigenbases::new(&delta, &xi) {
            Ok(b) => Some(Arc::new(b)),
            Err(Error::Decomposition(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(ProjectorSeries { delta, xi, omega, t0, tol, bases })
    }

    /// `P_ℓ(t)`; order 1 uses the closed form for constant couplings.
    pub fn order(&self, ell: usize, t: f64) -> Result<CMatrix> {
        let (rows, cols) = self.omega.shape();
        match ell {
            0 => Ok(CMatrix::zeros(rows, cols)),
            1 => match (&self.bases, &self.omega) {
                (Some(b), Coupling::Constant(m)) => Ok(b.integrate_constant(m, self.t0, t)),
                _ => projector_first_order(&self.delta, &self.xi, &self.omega, self.t0, t, self.tol),
            },
            _ => {
                // Lower even orders vanish identically, so only odd ones are
                // integrated.
                let lower: Vec<MatrixFn> = (0..ell)
                    .map(|k| {
                        if k % 2 == 0 {
                            return Arc::new(move |_s: f64| CMatrix::zeros(rows, cols)) as MatrixFn;
                        }
                        let me = self.clone();
                        Arc::new(move |s: f64| me.order(k, s).unwrap_or_else(|_| CMatrix::from_element(rows, cols, C64::new(f64::NAN, 0.0))))
                            as MatrixFn
                    })
                    .collect();
                let p = projector_order(ell, &lower, &self.delta, &self.xi, &self.omega, self.t0, t, self.tol)?;
                if p.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                    return Err(Error::Quadrature { estimate: "non-finite".into(), error: f64::INFINITY, tol: self.tol });
                }
                Ok(p)
            }
        }
    }

    /// `Σ_{ℓ≤N} P_ℓ(t)`.
    pub fn sum(&self, order: usize, t: f64) -> Result<CMatrix> {
        let (rows, cols) = self.omega.shape();
        let mut total = CMatrix::zeros(rows, cols);
        for ell in 1..=order {
            // Even orders vanish identically once P₀ = 0.
            if ell % 2 == 0 {
                continue;
            }
            total += self.order(ell, t)?;
        }
        Ok(total)
    }
}

/// All orders `P_0..=P_max` at time `t` by stepping the coupled Sylvester
/// hierarchy `i dP_ℓ/dt = ΞP_ℓ - P_ℓΔ + F_ℓ` as one ODE system.
pub fn projector_hierarchy_ode(
    delta: &CMatrix,
    xi: &CMatrix,
    omega: &Coupling,
    t0: f64,
    t: f64,
    max_order: usize,
    opts: &OdeOptions,
) -> Result<Vec<CMatrix>> {
    check_blocks(delta, xi, omega)?;
    let (rows, cols) = omega.shape();
    let block = rows * cols;
    let rhs = |s: f64, y: &[C64], dy: &mut [C64]| {
        let om = omega.at(s);
        let mut ps = vec![CMatrix::zeros(rows, cols)];
        for ell in 1..=max_order {
            ps.push(from_slice(rows, cols, &y[(ell - 1) * block..ell * block]));
        }
        for ell in 1..=max_order {
            let f = source_term(ell, &ps, &om);
            let d = (xi * &ps[ell] - &ps[ell] * delta + f) * C64::new(0.0, -1.0);
            dy[(ell - 1) * block..ell * block].copy_from_slice(d.as_slice());
        }
    };
    let sol = solve_to(rhs, t0, vec![C64::new(0.0, 0.0); block * max_order], t, &[], opts)?;
    let mut out = vec![CMatrix::zeros(rows, cols)];
    for ell in 1..=max_order {
        out.push(from_slice(rows, cols, &sol.y[(ell - 1) * block..ell * block]));
    }
    Ok(out)
}

/// Full projector from the Riccati equation, stepped directly.
pub fn riccati_projector(
    delta: &CMatrix,
    xi: &CMatrix,
    omega: &Coupling,
    t0: f64,
    t: f64,
    opts: &OdeOptions,
) -> Result<CMatrix> {
    check_blocks(delta, xi, omega)?;
    let (rows, cols) = omega.shape();
    let rhs = |s: f64, y: &[C64], dy: &mut [C64]| {
        let om = omega.at(s);
        let p = from_slice(rows, cols, y);
        let d = (xi * &p - &p * delta + &om - &p * om.adjoint() * &p) * C64::new(0.0, -1.0);
        dy.copy_from_slice(d.as_slice());
    };
    let sol = solve_to(rhs, t0, vec![C64::new(0.0, 0.0); rows * cols], t, &[], opts)?;
    Ok(from_slice(rows, cols, &sol.y))
}
