//! Longitudinal overlap kernels: the focused phase-matching function
//! F(ξ, Φ), its exact counterpart with the quadratic C term, the
//! Laguerre–Gauss overlaps O_n, and the global peak of |F|.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpdcError};
use crate::model::{AuxParams, DimensionlessConfig};
use crate::numerics::{self, Axis, MaximizeOptions, QuadSpec};

/// Location and height of the maximum of |F(ξ, Φ)|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FPeak {
    pub xi_star: f64,
    pub phi_star: f64,
    pub f_star: f64,
}

/// Breakpoints on [−1, 1]: oscillation panels plus a cluster around l = 0,
/// where the kernel pole at l ≈ −i/ξ sits for large ξ.
fn kernel_breaks(xi: f64, phi: f64) -> Vec<f64> {
    let mut b = numerics::oscillation_breaks(-1.0, 1.0, phi);
    b.push(0.0);
    let mut r = 1.0 / xi;
    while r < 1.0 {
        b.push(r);
        b.push(-r);
        r *= 4.0;
    }
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// Kernel 1/(1 − iξl − Cξ²l²).
#[inline]
fn kernel(xi: f64, c: f64, l: f64) -> Complex64 {
    let xl = xi * l;
    Complex64::new(1.0 - c * xl * xl, -xl).inv()
}

/// F(ξ, Φ) = ∫₋₁¹ √ξ e^{iΦl/2}/(1 − iξl) dl, the C = 0 phase-matching function.
pub fn phase_match_f(xi: f64, phi: f64) -> Result<Complex64> {
    phase_match_f_with(xi, phi, &QuadSpec::default())
}

pub fn phase_match_f_with(xi: f64, phi: f64, spec: &QuadSpec) -> Result<Complex64> {
    phase_match_f_exact_with(xi, phi, 0.0, spec)
}

/// The phase-matching integral with the quadratic term kept:
/// ∫₋₁¹ √ξ e^{iΦl/2}/(1 − iξl − Cξ²l²) dl.
///
/// For real ξ and C the denominator's imaginary part −ξl only vanishes at
/// l = 0 where the real part is 1, so it cannot vanish on the path; only
/// non-finite inputs are rejected.
pub fn phase_match_f_exact(xi: f64, phi: f64, c: f64) -> Result<Complex64> {
    phase_match_f_exact_with(xi, phi, c, &QuadSpec::default())
}

pub fn phase_match_f_exact_with(xi: f64, phi: f64, c: f64, spec: &QuadSpec) -> Result<Complex64> {
    if !(xi.is_finite() && c.is_finite() && phi.is_finite()) {
        return Err(SpdcError::SingularDenominator);
    }
    let breaks = kernel_breaks(xi, phi);
    let v = numerics::integrate_complex_panels(
        |l| Complex64::from_polar(1.0, 0.5 * phi * l) * kernel(xi, c, l),
        &breaks,
        spec,
    )?;
    Ok(v * xi.sqrt())
}

/// Fixed quadrature rule for evaluating F at many Φ values at once.
///
/// Composite Gauss–Legendre panels, graded geometrically towards the real
/// parts of the kernel poles and no wider than 32/Φ_max, so that a single
/// node set serves every |Φ| ≤ Φ_max.
#[derive(Debug, Clone)]
pub struct PhaseMatchKernel {
    pub xi: f64,
    pub c: f64,
    nodes: Vec<f64>,
    /// Quadrature weight × √ξ × kernel at each node.
    weights: Vec<Complex64>,
}

const KERNEL_ORDER: usize = 20;

impl PhaseMatchKernel {
    pub fn new(xi: f64, c: f64, phi_max: f64) -> Result<Self> {
        if !(xi.is_finite() && xi > 0.0 && c.is_finite() && phi_max.is_finite()) {
            return Err(SpdcError::SingularDenominator);
        }
        let mut breaks = vec![-1.0, 1.0];
        for pole in kernel_poles(xi, c) {
            let (r, d) = (pole.re, pole.im.abs().max(1e-15));
            breaks.push(r.clamp(-1.0, 1.0));
            let mut off = d;
            while off < 2.0 {
                breaks.push((r - off).clamp(-1.0, 1.0));
                breaks.push((r + off).clamp(-1.0, 1.0));
                off *= 2.0;
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

        let h_max = (32.0 / phi_max.abs().max(1.0)).min(0.5);
        let (gx, gw) = numerics::gauss_legendre(KERNEL_ORDER);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in breaks.windows(2) {
            let pieces = ((w[1] - w[0]) / h_max).ceil().max(1.0) as usize;
            let h = (w[1] - w[0]) / pieces as f64;
            for p in 0..pieces {
                let a = w[0] + h * p as f64;
                for (x, wt) in gx.iter().zip(&gw) {
                    let l = a + 0.5 * h * (x + 1.0);
                    nodes.push(l);
                    weights.push(kernel(xi, c, l) * (0.5 * h * wt * xi.sqrt()));
                }
            }
        }
        Ok(PhaseMatchKernel { xi, c, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn eval(&self, phi: f64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&l, &w)| w * Complex64::from_polar(1.0, 0.5 * phi * l))
            .sum()
    }
}

/// Roots of 1 − iξl − Cξ²l² in the complex l plane.
fn kernel_poles(xi: f64, c: f64) -> Vec<Complex64> {
    if c == 0.0 {
        return vec![Complex64::new(0.0, -1.0 / xi)];
    }
    // Cξ²l² + iξl − 1 = 0
    let a = Complex64::new(c * xi * xi, 0.0);
    let b = Complex64::new(0.0, xi);
    let disc = (b * b + a * 4.0).sqrt();
    // numerically stable pair
    let q = if (b.conj() * disc).re >= 0.0 { -(b + disc) * 0.5 } else { -(b - disc) * 0.5 };
    vec![q / a, Complex64::new(-1.0, 0.0) / q]
}

/// O_n without its dimensional prefactor:
/// ∫₋₁¹ e^{iΦl/2} (A₋ + ilB₋ξ̃)ⁿ / (A₊ − ilB₊ξ̃)ⁿ⁺¹ dl with ξ̃ = ξ_sξ_i/ξ_p.
///
/// For n = 0 this equals F(ξ, Φ)/(A₊√ξ) with the aggregate ξ.
pub fn lg_overlap(n: u32, cfg: &DimensionlessConfig, aux: &AuxParams, phi: f64) -> Result<Complex64> {
    let xt = cfg.xi_s * cfg.xi_i / cfg.xi_p;
    let breaks = kernel_breaks(aux.xi_agg, phi);
    let spec = QuadSpec { max_subdivisions: 400, ..QuadSpec::default() };
    numerics::integrate_complex_panels(|l| lg_integrand(n, aux, xt, phi, l), &breaks, &spec)
}

fn lg_integrand(n: u32, aux: &AuxParams, xt: f64, phi: f64, l: f64) -> Complex64 {
    let num = Complex64::new(aux.a_minus, l * aux.b_minus * xt);
    let den = Complex64::new(aux.a_plus, -l * aux.b_plus * xt);
    Complex64::from_polar(1.0, 0.5 * phi * l) * (num / den).powu(n) / den
}

/// Default search box for the global peak: ξ ∈ [0.05, 200] (log), Φ ∈ [−4π, 2π].
pub const PEAK_BOX: ([f64; 2], [f64; 2]) = ([0.05, 200.0], [-4.0 * PI, 2.0 * PI]);

/// Maximizes |F(ξ, Φ)| over the default box.
pub fn find_f_peak() -> FPeak {
    let ([x0, x1], [p0, p1]) = PEAK_BOX;
    find_f_peak_in(x0, x1, p0, p1, &QuadSpec::default())
}

/// Maximizes |F| over ξ ∈ [xi_lo, xi_hi] (log axis) and Φ ∈ [phi_lo, phi_hi].
pub fn find_f_peak_in(xi_lo: f64, xi_hi: f64, phi_lo: f64, phi_hi: f64, spec: &QuadSpec) -> FPeak {
    let axes = [Axis::log(xi_lo, xi_hi), Axis::linear(phi_lo, phi_hi)];
    let opts = MaximizeOptions { x_tol: 1e-9, ..MaximizeOptions::default() };
    let (x, v) = numerics::maximize(
        |x| phase_match_f_with(x[0], x[1], spec).map_or(f64::NAN, |f| f.norm()),
        &axes,
        &opts,
    );
    FPeak { xi_star: x[0], phi_star: x[1], f_star: v }
}

/// The global peak, computed once per process.
pub fn f_peak() -> FPeak {
    static PEAK: OnceLock<FPeak> = OnceLock::new();
    *PEAK.get_or_init(find_f_peak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::aux_params;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sinc(x: f64) -> f64 {
        if x == 0.0 { 1.0 } else { x.sin() / x }
    }

    #[test]
    fn unit_focus_zero_mismatch() {
        let f = phase_match_f(1.0, 0.0).unwrap();
        assert_relative_eq!(f.re, PI / 2.0, max_relative = 1e-12);
        assert!(f.im.abs() < 1e-13);
    }

    #[test]
    fn weak_focus_is_sinc() {
        let xi = 1e-6;
        let f = phase_match_f(xi, 0.0).unwrap();
        assert_relative_eq!(f.norm(), 2.0 * xi.sqrt(), max_relative = 1e-9);
        let xi = 1e-3;
        let worst = (0..=2000)
            .map(|k| -4.0 * PI + 8.0 * PI * k as f64 / 2000.0)
            .map(|phi| (phase_match_f(xi, phi).unwrap().norm() / (2.0 * xi.sqrt()) - sinc(phi / 2.0).abs()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn zero_c_reduces_to_approximate_kernel() {
        for &(xi, phi) in &[(0.3, -1.0), (2.84, -3.2), (50.0, 7.0)] {
            let a = phase_match_f(xi, phi).unwrap();
            let b = phase_match_f_exact(xi, phi, 0.0).unwrap();
            assert!((a - b).norm() <= 1e-10 * a.norm().max(1e-3));
        }
    }

    #[test]
    fn derivative_in_c_matches_first_order_term() {
        // d/dC of the integrand at C = 0 is √ξ e^{iΦl/2} ξ²l²/(1 − iξl)².
        let (xi, phi) = (2.0, -2.5);
        let spec = QuadSpec::default();
        let analytic = numerics::integrate_complex(
            |l| {
                let d = Complex64::new(1.0, -xi * l);
                Complex64::from_polar(1.0, 0.5 * phi * l) * (xi * xi * l * l) / (d * d)
            },
            -1.0,
            1.0,
            &spec,
        )
        .unwrap()
            * xi.sqrt();
        let h = 1e-5;
        let fd = (phase_match_f_exact(xi, phi, h).unwrap() - phase_match_f_exact(xi, phi, -h).unwrap()) / (2.0 * h);
        assert!((fd - analytic).norm() < 1e-7 * analytic.norm(), "{fd} vs {analytic}");
    }

    #[test]
    fn non_finite_c_is_rejected() {
        assert_eq!(phase_match_f_exact(1.0, 0.0, f64::NAN), Err(SpdcError::SingularDenominator));
    }

    #[test]
    fn fixed_kernel_matches_adaptive() {
        for &(xi, c) in &[(1e-3, 0.0), (1.0, 0.0), (2.84, 0.0), (100.0, 0.0), (1000.0, 0.0), (10.0, -0.1067), (100.0, 0.1067), (5.0, 0.4)] {
            let k = PhaseMatchKernel::new(xi, c, 400.0).unwrap();
            for &phi in &[0.0, -3.3, 17.0, -150.0, 399.0] {
                let exact = phase_match_f_exact(xi, phi, c).unwrap();
                let fast = k.eval(phi);
                let scale = 2.0 * xi.sqrt() * (1.0 + xi).recip().max(0.01);
                assert!((exact - fast).norm() < 1e-11 * scale.max(1e-6), "xi={xi} c={c} phi={phi}: {exact} vs {fast}");
            }
        }
    }

    #[test]
    fn kernel_poles_are_roots() {
        for &(xi, c) in &[(1.0, 0.1), (3.0, -0.2), (10.0, 0.6)] {
            for p in kernel_poles(xi, c) {
                let v = Complex64::new(1.0, 0.0) - Complex64::i() * xi * p - p * p * (c * xi * xi);
                assert!(v.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zeroth_overlap_is_scaled_f() {
        let cfg = DimensionlessConfig::with_foci(0.7, 2.0, 3.0, 0.45, 0.55);
        let aux = aux_params(&cfg);
        for phi in [-4.0, 0.0, 2.5] {
            let o = lg_overlap(0, &cfg, &aux, phi).unwrap();
            let f = phase_match_f(aux.xi_agg, phi).unwrap() / (aux.a_plus * aux.xi_agg.sqrt());
            assert!((o - f).norm() < 1e-10 * f.norm());
        }
    }

    #[test]
    fn overlap_ratio_below_one_and_first_mode_weaker() {
        let cfg = DimensionlessConfig::equal_foci(2.0);
        let aux = aux_params(&cfg);
        let o0 = lg_overlap(0, &cfg, &aux, 0.0).unwrap().norm();
        let o1 = lg_overlap(1, &cfg, &aux, 0.0).unwrap().norm();
        assert!(o1 < o0);
    }

    #[test]
    fn peak_location() {
        let p = f_peak();
        assert!((p.xi_star - 2.84).abs() < 0.01, "{p:?}");
        assert!((p.phi_star / PI + 1.04).abs() < 0.005, "{p:?}");
        assert!((p.f_star - 2.06).abs() < 0.01, "{p:?}");
    }

    #[test]
    fn peak_in_sinc_regime_sits_at_zero_mismatch() {
        let p = find_f_peak_in(1e-4, 1e-3, -4.0 * PI, 2.0 * PI, &QuadSpec::default());
        // residual focusing shift of the peak is O(ξ)
        assert!(p.phi_star.abs() < 5.0 * p.xi_star, "{p:?}");
        assert_relative_eq!(p.xi_star, 1e-3, max_relative = 1e-6);
        assert_relative_eq!(p.f_star, 2.0 * 1e-3f64.sqrt(), max_relative = 1e-6);
    }

    #[test]
    fn peak_stable_under_tighter_quadrature() {
        let base = f_peak();
        let tight = find_f_peak_in(0.05, 200.0, -4.0 * PI, 2.0 * PI, &QuadSpec::default().tightened(10.0));
        assert!(((base.f_star - tight.f_star) / base.f_star).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn panel_split_does_not_change_value(lx in -3.0f64..3.0, phi in -60.0f64..60.0) {
            let xi = 10f64.powf(lx);
            let spec = QuadSpec::default();
            let split = phase_match_f(xi, phi).unwrap();
            let plain = numerics::integrate_complex(
                |l| Complex64::from_polar(1.0, 0.5 * phi * l) / Complex64::new(1.0, -xi * l),
                -1.0, 1.0, &QuadSpec { max_subdivisions: 4000, ..spec },
            ).unwrap() * xi.sqrt();
            prop_assert!((split.norm() - plain.norm()).abs() < 1e-9 * (1.0 + split.norm()));
        }

        #[test]
        fn approximate_kernel_is_real(lx in -3.0f64..3.0, phi in -60.0f64..60.0) {
            let f = phase_match_f(10f64.powf(lx), phi).unwrap();
            prop_assert!(f.im.abs() < 1e-9 * (1.0 + f.norm()));
        }

        #[test]
        fn overlap_ratio_term_bounded(lp in -3.0f64..3.0, ls in -3.0f64..3.0, li in -3.0f64..3.0, ks in 0.2f64..0.8) {
            let cfg = DimensionlessConfig::with_foci(lp.exp(), ls.exp(), li.exp(), ks, 1.0 - ks);
            let aux = aux_params(&cfg);
            let xt = cfg.xi_s * cfg.xi_i / cfg.xi_p;
            for k in 0..=200 {
                let l = -1.0 + k as f64 / 100.0;
                let r = Complex64::new(aux.a_minus, l * aux.b_minus * xt).norm()
                    / Complex64::new(aux.a_plus, -l * aux.b_plus * xt).norm();
                prop_assert!(r < 1.0);
            }
        }
    }
}
