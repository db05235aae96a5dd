//! Generic numerical kernels: adaptive complex quadrature, fixed
//! Gauss–Legendre rules, half-maximum widths, derivative-free maximization
//! and singular values.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SpdcError};

/// Tolerances for [`integrate_complex`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Raised to 4 per extra initial panel when more breaks are given.
    pub max_subdivisions: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 200,
        }
    }
}

impl QuadSpec {
    pub fn tightened(self, factor: f64) -> Self {
        QuadSpec {
            rel_tol: self.rel_tol / factor,
            abs_tol: self.abs_tol / factor,
            max_subdivisions: self.max_subdivisions * 4,
        }
    }
}

// Kronrod 15-point nodes (non-negative half) and weights, with the
// embedded 7-point Gauss weights on the odd-indexed nodes.
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
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    abs_sum: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.norm() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        kronrod += (f1 + f2) * WGK[j];
        abs_sum += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    Panel {
        a,
        b,
        value: kronrod * h,
        error: ((kronrod - gauss) * h).norm(),
        abs_sum: abs_sum * h.abs(),
    }
}

/// Adaptive Gauss–Kronrod (7/15) integration of a complex integrand.
pub fn integrate_complex<F>(f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    integrate_complex_panels(f, &[a, b], spec)
}

/// Like [`integrate_complex`], starting from the panels delimited by the
/// sorted `breaks` (first and last entries are the integration limits).
pub fn integrate_complex_panels<F>(f: F, breaks: &[f64], spec: &QuadSpec) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    assert!(breaks.len() >= 2, "need at least the two integration limits");
    let mut heap: BinaryHeap<Panel> = breaks
        .windows(2)
        .filter(|w| w[1] != w[0])
        .map(|w| gk15(&f, w[0], w[1]))
        .collect();
    // Many initial panels (fast oscillation) each need a few splits.
    let max_subdivisions = spec.max_subdivisions.max(4 * heap.len().saturating_sub(1));
    let mut subdivisions = 0;
    loop {
        let (value, error, abs_sum) = heap.iter().fold(
            (Complex64::new(0.0, 0.0), 0.0, 0.0),
            |(v, e, s), p| (v + p.value, e + p.error, s + p.abs_sum),
        );
        // Differences below this are rounding noise, not truncation error.
        let floor = 50.0 * f64::EPSILON * abs_sum;
        let tol = spec.abs_tol.max(spec.rel_tol * value.norm()).max(floor);
        if error <= tol {
            return Ok(value);
        }
        if subdivisions >= max_subdivisions {
            return Err(SpdcError::NoConvergence {
                subdivisions,
                error,
                tolerance: tol,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(gk15(&f, worst.a, mid));
        heap.push(gk15(&f, mid, worst.b));
        subdivisions += 1;
    }
}

/// Breakpoints splitting [a, b] so that a phase e^{iΦl/2} advances by at
/// most 2π per panel; at most ⌈|Φ|/π⌉ panels on [−1, 1].
pub fn oscillation_breaks(a: f64, b: f64, phi: f64) -> Vec<f64> {
    let turns = (phi.abs() * (b - a) / (4.0 * PI)).ceil().max(1.0) as usize;
    (0..=turns)
        .map(|k| a + (b - a) * k as f64 / turns as f64)
        .collect()
}

/// Gauss–Legendre nodes and weights of order `n` on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Full width at half maximum of a non-negative function around `peak_x`.
pub fn fwhm<F: Fn(f64) -> f64>(f: F, peak_x: f64, search_radius: f64) -> Result<f64> {
    let (lo, hi) = half_max_crossings(f, peak_x, search_radius)?;
    Ok(hi - lo)
}

/// The half-maximum crossings nearest to `peak_x` on either side.
pub fn half_max_crossings<F: Fn(f64) -> f64>(
    f: F,
    peak_x: f64,
    search_radius: f64,
) -> Result<(f64, f64)> {
    let half = 0.5 * f(peak_x);
    let steps = 4096;
    let dx = search_radius / steps as f64;
    let tol = 1e-10 * search_radius;
    let find = |dir: f64, side: &'static str| -> Result<f64> {
        let mut inside = peak_x;
        for k in 1..=steps {
            let x = peak_x + dir * dx * k as f64;
            if f(x) <= half {
                let mut outside = x;
                while (outside - inside).abs() > tol {
                    let mid = 0.5 * (inside + outside);
                    if f(mid) > half {
                        inside = mid;
                    } else {
                        outside = mid;
                    }
                }
                return Ok(0.5 * (inside + outside));
            }
            inside = x;
        }
        Err(SpdcError::NoBracket {
            side,
            radius: search_radius,
        })
    };
    let lo = find(-1.0, "lower")?;
    let hi = find(1.0, "upper")?;
    Ok((lo, hi))
}

/// Sampling of one coordinate in [`maximize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub scale: Scale,
}

impl Axis {
    pub fn linear(lower: f64, upper: f64) -> Self {
        Axis { lower, upper, scale: Scale::Linear }
    }

    pub fn log(lower: f64, upper: f64) -> Self {
        assert!(lower > 0.0, "log axis needs a positive lower bound");
        Axis { lower, upper, scale: Scale::Log }
    }

    fn to_internal(&self, x: f64) -> f64 {
        match self.scale {
            Scale::Linear => x,
            Scale::Log => x.ln(),
        }
    }

    fn from_internal(&self, u: f64) -> f64 {
        match self.scale {
            Scale::Linear => u,
            Scale::Log => u.exp(),
        }
    }

    fn internal_bounds(&self) -> (f64, f64) {
        (self.to_internal(self.lower), self.to_internal(self.upper))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaximizeOptions {
    pub grid_points: usize,
    /// Stop once every simplex vertex is within this (relative) distance of
    /// the best one.
    pub x_tol: f64,
    pub max_evals: usize,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        MaximizeOptions {
            grid_points: 64,
            x_tol: 1e-7,
            max_evals: 20_000,
        }
    }
}

/// Maximizes `f` over a box: grid scan, then Nelder–Mead from the best
/// grid point, working in log coordinates on log axes.
pub fn maximize<F>(f: F, axes: &[Axis], opts: &MaximizeOptions) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = axes.len();
    assert!(n >= 1 && opts.grid_points >= 2);
    let bounds: Vec<(f64, f64)> = axes.iter().map(Axis::internal_bounds).collect();
    let to_user = |u: &[f64]| -> Vec<f64> {
        u.iter().zip(axes).map(|(&v, ax)| ax.from_internal(v)).collect()
    };
    let g = |u: &[f64]| {
        let v = f(&to_user(u));
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };

    let m = opts.grid_points;
    let cell: Vec<f64> = bounds.iter().map(|&(lo, hi)| (hi - lo) / (m - 1) as f64).collect();
    let mut best_u = vec![0.0; n];
    let mut best = f64::NEG_INFINITY;
    let mut idx = vec![0usize; n];
    let mut u = vec![0.0; n];
    'grid: loop {
        for d in 0..n {
            u[d] = bounds[d].0 + cell[d] * idx[d] as f64;
        }
        let v = g(&u);
        if v > best {
            best = v;
            best_u.copy_from_slice(&u);
        }
        for d in 0..n {
            idx[d] += 1;
            if idx[d] < m {
                continue 'grid;
            }
            idx[d] = 0;
        }
        break;
    }

    let (u_star, v_star) = nelder_mead(g, &best_u, &cell, &bounds, opts.x_tol, opts.max_evals);
    if v_star >= best {
        (to_user(&u_star), v_star)
    } else {
        (to_user(&best_u), best)
    }
}

/// Bounded Nelder–Mead maximization (points are clamped into `bounds`).
pub fn nelder_mead<F>(
    f: F,
    start: &[f64],
    step: &[f64],
    bounds: &[(f64, f64)],
    x_tol: f64,
    max_evals: usize,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    let clamp = |x: &mut Vec<f64>| {
        for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
            *v = v.clamp(lo, hi);
        }
    };
    let evals = Cell::new(0usize);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut x0 = start.to_vec();
    clamp(&mut x0);
    let v0 = eval(&x0);
    simplex.push((x0.clone(), v0));
    for d in 0..n {
        let mut x = x0.clone();
        // step away from the nearer wall
        let (lo, hi) = bounds[d];
        x[d] = if x0[d] + step[d] <= hi || x0[d] - step[d] < lo {
            x0[d] + step[d]
        } else {
            x0[d] - step[d]
        };
        clamp(&mut x);
        let v = eval(&x);
        simplex.push((x, v));
    }

    loop {
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let best = &simplex[0].0;
        let spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).abs() / (1.0 + b.abs())))
            .fold(0.0, f64::max);
        if spread <= x_tol || evals.get() >= max_evals {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|(x, _)| x[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            clamp(&mut x);
            x
        };
        let xr = along(1.0);
        let vr = eval(&xr);
        if vr > simplex[0].1 {
            let xe = along(2.0);
            let ve = eval(&xe);
            simplex[n] = if ve > vr { (xe, ve) } else { (xr, vr) };
        } else if vr > simplex[n - 1].1 {
            simplex[n] = (xr, vr);
        } else {
            let (xc, vc) = if vr > worst.1 {
                let x = along(0.5);
                let v = eval(&x);
                (x, v)
            } else {
                let x = along(-0.5);
                let v = eval(&x);
                (x, v)
            };
            if vc > worst.1.max(vr.min(worst.1)) {
                simplex[n] = (xc, vc);
            } else {
                let x_best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = vertex
                        .0
                        .iter()
                        .zip(&x_best)
                        .map(|(x, b)| b + 0.5 * (x - b))
                        .collect();
                    let v = eval(&x);
                    *vertex = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    simplex.swap_remove(0)
}

/// Golden-section maximization of a unimodal function on [lo, hi].
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a).abs() > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Complex matrix product through four real products, which take the
/// blocked real GEMM path and run several times faster than the generic
/// complex one.
pub fn complex_matmul(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex64::new)
}

/// Singular values of a complex matrix, in nonincreasing order.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}
