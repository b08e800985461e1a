//! Adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.
//!
//! Oscillatory integrands are handled by pre-splitting the interval into
//! panels no longer than a caller-supplied length (a fraction of the
//! oscillation period) before adaptive bisection starts.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Upper bound on panels/subdivisions before giving up.
pub const MAX_SUBDIVISIONS: usize = 2_000_000;

/// Panel errors below this multiple of `ε·∫|f|` are rounding noise.
const ROUNDOFF_FACTOR: f64 = 50.0 * f64::EPSILON;

/// One 15-point Kronrod panel: `(integral, |K15 - G7|)`.
pub fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let (v, e, _) = gk15_floor(f, a, b);
    (v, e)
}

/// `gk15` plus the rounding floor of the panel.
fn gk15_floor<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut abs = fc.norm() * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        let (lo, hi) = (f(c - x), f(c + x));
        let s = lo + hi;
        k += s * WGK[j];
        abs += (lo.norm() + hi.norm()) * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm(), ROUNDOFF_FACTOR * abs * h.abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: C64,
    err: f64,
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Absolute error target.
    pub tol: f64,
    /// Initial panels are no longer than this.
    pub max_panel: f64,
    pub max_subdivisions: usize,
}

impl QuadOptions {
    pub fn new(tol: f64) -> Self {
        QuadOptions { tol, max_panel: f64::INFINITY, max_subdivisions: MAX_SUBDIVISIONS }
    }

    pub fn with_max_panel(mut self, len: f64) -> Self {
        self.max_panel = len;
        self
    }
}

/// Integrates `f` over `[a, b]`, splitting first at `breaks` (points where `f`
/// is not smooth). Returns `(value, error estimate)`.
pub fn integrate<F: Fn(f64) -> C64>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<(C64, f64)> {
    if a == b {
        return Ok((C64::new(0.0, 0.0), 0.0));
    }
    if b < a {
        let (v, e) = integrate(f, b, a, breaks, opts)?;
        return Ok((-v, e));
    }
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut total = C64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut floor = 0.0;
    let mut count = 0usize;
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        let pieces = if opts.max_panel.is_finite() && opts.max_panel > 0.0 {
            (len / opts.max_panel).ceil().max(1.0)
        } else {
            1.0
        };
        if pieces > opts.max_subdivisions as f64 {
            return Err(Error::Quadrature {
                estimate: "n/a".into(),
                error: f64::INFINITY,
                tol: opts.tol,
            });
        }
        let pieces = pieces as usize;
        count += pieces;
        let h = len / pieces as f64;
        for i in 0..pieces {
            let pa = w[0] + i as f64 * h;
            let pb = if i + 1 == pieces { w[1] } else { pa + h };
            let (v, e, r) = gk15_floor(f, pa, pb);
            total += v;
            err += e;
            floor += r;
            heap.push(Panel { a: pa, b: pb, value: v, err: e, floor: r });
        }
    }

    // The target cannot go below the accumulated rounding floor.
    while err > opts.tol.max(floor) {
        if count >= opts.max_subdivisions {
            return Err(Error::Quadrature {
                estimate: format!("{total}"),
                error: err,
                tol: opts.tol,
            });
        }
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // Interval cannot be split further in floating point.
            return Err(Error::Quadrature { estimate: format!("{total}"), error: err, tol: opts.tol });
        }
        let (v1, e1, r1) = gk15_floor(f, p.a, m);
        let (v2, e2, r2) = gk15_floor(f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.err;
        floor += r1 + r2 - p.floor;
        count += 1;
        heap.push(Panel { a: p.a, b: m, value: v1, err: e1, floor: r1 });
        heap.push(Panel { a: m, b: p.b, value: v2, err: e2, floor: r2 });
    }
    // Re-sum to shed the drift of the incremental updates.
    let mut value = C64::new(0.0, 0.0);
    let mut e = 0.0;
    for p in heap {
        value += p.value;
        e += p.err;
    }
    Ok((value, e))
}

fn gk15_vec<F: Fn(f64, &mut [C64])>(f: &F, a: f64, b: f64, n: usize) -> (Vec<C64>, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut buf = vec![C64::new(0.0, 0.0); n];
    let mut buf2 = buf.clone();
    f(c, &mut buf);
    let mut k: Vec<C64> = buf.iter().map(|v| v * WGK[7]).collect();
    let mut g: Vec<C64> = buf.iter().map(|v| v * WG[3]).collect();
    for j in 0..7 {
        let x = h * XGK[j];
        f(c - x, &mut buf);
        f(c + x, &mut buf2);
        for i in 0..n {
            let s = buf[i] + buf2[i];
            k[i] += s * WGK[j];
            if j % 2 == 1 {
                g[i] += s * WG[j / 2];
            }
        }
    }
    let mut err = 0.0;
    for i in 0..n {
        k[i] *= h;
        err += ((k[i] - g[i] * h).norm()).powi(2);
    }
    (k, err.sqrt())
}

struct VecPanel {
    a: f64,
    b: f64,
    value: Vec<C64>,
    err: f64,
}

impl PartialEq for VecPanel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for VecPanel {}
impl PartialOrd for VecPanel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for VecPanel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Vector-valued `integrate`: `f(x, out)` fills `n` components. The error
/// target applies to the Euclidean norm of the error vector.
pub fn integrate_vec<F: Fn(f64, &mut [C64])>(
    f: &F,
    n: usize,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<(Vec<C64>, f64)> {
    if a == b || n == 0 {
        return Ok((vec![C64::new(0.0, 0.0); n], 0.0));
    }
    if b < a {
        let (v, e) = integrate_vec(f, n, b, a, breaks, opts)?;
        return Ok((v.into_iter().map(|x| -x).collect(), e));
    }
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut err = 0.0;
    let mut count = 0usize;
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        let pieces = if opts.max_panel.is_finite() && opts.max_panel > 0.0 {
            (len / opts.max_panel).ceil().max(1.0)
        } else {
            1.0
        };
        if pieces > opts.max_subdivisions as f64 {
            return Err(Error::Quadrature { estimate: "n/a".into(), error: f64::INFINITY, tol: opts.tol });
        }
        let pieces = pieces as usize;
        count += pieces;
        let h = len / pieces as f64;
        for i in 0..pieces {
            let pa = w[0] + i as f64 * h;
            let pb = if i + 1 == pieces { w[1] } else { pa + h };
            let (v, e) = gk15_vec(f, pa, pb, n);
            err += e;
            heap.push(VecPanel { a: pa, b: pb, value: v, err: e });
        }
    }
    while err > opts.tol {
        if count >= opts.max_subdivisions {
            return Err(Error::Quadrature { estimate: "n/a".into(), error: err, tol: opts.tol });
        }
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            return Err(Error::Quadrature { estimate: "n/a".into(), error: err, tol: opts.tol });
        }
        let (v1, e1) = gk15_vec(f, p.a, m, n);
        let (v2, e2) = gk15_vec(f, m, p.b, n);
        err += e1 + e2 - p.err;
        count += 1;
        heap.push(VecPanel { a: p.a, b: m, value: v1, err: e1 });
        heap.push(VecPanel { a: m, b: p.b, value: v2, err: e2 });
    }
    let mut value = vec![C64::new(0.0, 0.0); n];
    let mut e = 0.0;
    for p in heap {
        for i in 0..n {
            value[i] += p.value[i];
        }
        e += p.err;
    }
    Ok((value, e))
}

/// `∫_a^b e^{iωu} du`, stable for small `ω(b-a)`.
pub fn exp_integral(omega: f64, a: f64, b: f64) -> C64 {
    let len = b - a;
    let z = omega * len;
    let start = C64::new(0.0, omega * a).exp();
    let phi = if z.abs() < 1e-4 {
        // (e^{iz} - 1)/(iz) = 1 + iz/2 - z²/6 - iz³/24 + ...
        C64::new(1.0 - z * z / 6.0 + z.powi(4) / 120.0, z / 2.0 - z.powi(3) / 24.0)
    } else {
        (C64::new(0.0, z).exp() - 1.0) / C64::new(0.0, z)
    };
    start * phi * len
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<(f64, f64)> {
    let g = |x: f64| C64::new(f(x), 0.0);
    integrate(&g, a, b, breaks, opts).map(|(v, e)| (v.re, e))
}
