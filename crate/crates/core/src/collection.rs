//! Pair and single-photon collection probabilities, their upper bounds, and
//! heralding ratios.
//!
//! "Relative" probabilities drop the shared dimensional prefactor
//! 64π³ħcε n_s n_i/(ε₀ n_p |n'_s − n'_i|)·(χ_eff/(λ_sλ_i))²·N_p, so that
//! P_si,rel = arctan(ξ)/(A₊B₊) and P_s,rel = arctan(B_sξ_s/A_s)/(A_sB_s).

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpdcError};
use crate::model::{self, aux_params, consts, DimensionlessConfig, PhysicalSource};
use crate::numerics::{self, QuadSpec};
use crate::overlap::PhaseMatchKernel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectionReport {
    /// arctan(ξ)/(A₊B₊).
    pub p_si_rel: f64,
    /// p_si_rel over its asymptotic maximum for these wavenumber ratios.
    pub p_si_frac: f64,
    pub p_s_rel: f64,
    pub p_i_rel: f64,
    pub eta_s: f64,
    pub eta_i: f64,
    pub eta_si: f64,
    /// Absolute pair probability (needs a physical source).
    pub p_si: Option<f64>,
    /// Absolute pair bound, independent of crystal length and waists.
    pub p_si_bound: Option<f64>,
    pub p_s: Option<f64>,
    pub p_i: Option<f64>,
}

/// 64π³ħcε n_s n_i/(ε₀ n_p |n'_s − n'_i|)·(χ_eff/(λ_sλ_i))²·N_p.
pub fn shared_prefactor(src: &PhysicalSource) -> Result<f64> {
    src.validate()?;
    let contrast = src.group_index_contrast().abs();
    if contrast < model::DISPERSION_GUARD {
        return Err(SpdcError::DegenerateDispersion { delta: contrast });
    }
    let chi = src.chi_eff / (src.lambda_s * src.lambda_i);
    Ok(64.0 * PI.powi(3) * consts::HBAR * consts::C * src.epsilon * src.n_s * src.n_i
        / (consts::EPSILON_0 * src.n_p * contrast)
        * chi
        * chi
        * src.pump_photons)
}

pub fn pair_probability_rel(cfg: &DimensionlessConfig) -> f64 {
    let aux = aux_params(cfg);
    aux.xi_agg.atan() / (aux.a_plus * aux.b_plus)
}

/// Supremum of arctan(ξ)/(A₊B₊) over all focal parameters:
/// (π/2)/((1 − d)(1 + √(X_s X_s') + √(X_i X_i'))²), which is π/8 when Δk = 0.
pub fn pair_asymptote_rel(cfg: &DimensionlessConfig) -> f64 {
    let d = cfg.dk_over_kp;
    let (xs, xi) = (cfg.ks_over_kp, cfg.ki_over_kp);
    let (xs_t, xi_t) = ((xs + d) / (1.0 - d), (xi + d) / (1.0 - d));
    let m = 1.0 + (xs * xs_t).sqrt() + (xi * xi_t).sqrt();
    FRAC_PI_2 / ((1.0 - d) * m * m)
}

pub fn signal_probability(cfg: &DimensionlessConfig) -> f64 {
    let aux = aux_params(cfg);
    (aux.b_s * cfg.xi_s / aux.a_s).atan() / (aux.a_s * aux.b_s)
}

pub fn idler_probability(cfg: &DimensionlessConfig) -> f64 {
    let aux = aux_params(cfg);
    (aux.b_i * cfg.xi_i / aux.a_i).atan() / (aux.a_i * aux.b_i)
}

/// Closed-form η_s = (k_i/k_p)(k_s/k_p + 1) for ξ_s = ξ_i = ξ_p.
pub fn equal_foci_eta_s(cfg: &DimensionlessConfig) -> f64 {
    cfg.ki_over_kp * (cfg.ks_over_kp + 1.0)
}

fn equal_foci(cfg: &DimensionlessConfig) -> bool {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    close(cfg.xi_s, cfg.xi_p) && close(cfg.xi_i, cfg.xi_p) && cfg.dk_over_kp == 0.0
}

/// Heralding ratios from the closed-form probabilities.
pub fn heralding_ratios(cfg: &DimensionlessConfig) -> CollectionReport {
    let p_si_rel = pair_probability_rel(cfg);
    let p_s_rel = signal_probability(cfg);
    let p_i_rel = idler_probability(cfg);
    let report = CollectionReport {
        p_si_rel,
        p_si_frac: p_si_rel / pair_asymptote_rel(cfg),
        p_s_rel,
        p_i_rel,
        eta_s: p_si_rel / p_s_rel,
        eta_i: p_si_rel / p_i_rel,
        eta_si: p_si_rel / (p_s_rel * p_i_rel).sqrt(),
        p_si: None,
        p_si_bound: None,
        p_s: None,
        p_i: None,
    };
    if equal_foci(cfg) {
        debug_assert!((report.eta_s - equal_foci_eta_s(cfg)).abs() < 1e-9);
        debug_assert!((report.eta_i - equal_foci_eta_s(&cfg.swapped())).abs() < 1e-9);
    }
    report
}

/// Pair collection report; absolute values are filled in when `src` is
/// given, after checking that it reduces to `cfg`.
pub fn pair_probability(cfg: &DimensionlessConfig, src: Option<&PhysicalSource>) -> Result<CollectionReport> {
    cfg.validate()?;
    let mut report = heralding_ratios(cfg);
    if let Some(src) = src {
        let reduced = model::reduce(src)?;
        let pairs = [
            ("xi_p", reduced.xi_p, cfg.xi_p),
            ("xi_s", reduced.xi_s, cfg.xi_s),
            ("xi_i", reduced.xi_i, cfg.xi_i),
            ("ks_over_kp", reduced.ks_over_kp, cfg.ks_over_kp),
            ("ki_over_kp", reduced.ki_over_kp, cfg.ki_over_kp),
        ];
        for (name, a, b) in pairs {
            if (a - b).abs() > 1e-9 * a.abs().max(b.abs()) {
                return Err(SpdcError::InconsistentInputs(format!("{name}: source gives {a}, configuration has {b}")));
            }
        }
        if (reduced.dk_over_kp - cfg.dk_over_kp).abs() > 1e-9 {
            return Err(SpdcError::InconsistentInputs("dk_over_kp differs from the source".into()));
        }
        let k = shared_prefactor(src)?;
        report.p_si = Some(k * report.p_si_rel);
        report.p_s = Some(k * report.p_s_rel);
        report.p_i = Some(k * report.p_i_rel);
        report.p_si_bound = Some(pair_probability_bound(src)?);
    }
    Ok(report)
}

/// 8π⁴ħcε n_s n_i/(ε₀ n_p |n'_s − n'_i|)·(χ_eff/(λ_sλ_i))²·N_p.
pub fn pair_probability_bound(src: &PhysicalSource) -> Result<f64> {
    Ok(shared_prefactor(src)? * PI / 8.0)
}

/// Upper bound on P_s over all focal parameters:
/// prefactor·(π/2)/min A_sB_s with min A_sB_s = 4(1 − d)√(X_i X_i')(1 + √(X_s X_s')),
/// giving 32π⁴/3·(...) for a degenerate source.
pub fn signal_probability_bound(src: &PhysicalSource) -> Result<f64> {
    let k = shared_prefactor(src)?;
    let (kp, ks, ki) = (src.k_p(), src.k_s(), src.k_i());
    let d = (kp - ks - ki) / kp;
    let (xs, xi) = (ks / kp, ki / kp);
    let (xs_t, xi_t) = ((xs + d) / (1.0 - d), (xi + d) / (1.0 - d));
    let min_ab = 4.0 * (1.0 - d) * (xi * xi_t).sqrt() * (1.0 + (xs * xs_t).sqrt());
    Ok(k * FRAC_PI_2 / min_ab)
}

/// Largest |Φ| tried before the tail is declared unconverged.
pub const EXACT_PHI_LIMIT: f64 = 1e5;

/// Relative pair probability with the quadratic kernel term kept:
/// (1/(8πA₊B₊))∫|F_C(ξ, Φ)|² dΦ.
///
/// The Φ range starts at ±8π and doubles. Beyond |Φ| = M, |F_C|² averages
/// 4(|g(1)|² + |g(−1)|²)/Φ² with g(l) = √ξ/(1 − iξl − Cξ²l²), so the
/// integral over |Φ| > M is estimated as 8(|g(1)|² + |g(−1)|²)/M and added.
/// Doubling stops when the tail-corrected value changes by less than 1e-4
/// of itself.
pub fn pair_probability_exact(cfg: &DimensionlessConfig, c: f64) -> Result<f64> {
    cfg.validate()?;
    let aux = aux_params(cfg);
    let xi = aux.xi_agg;
    let g2 = |l: f64| {
        let xl = xi * l;
        xi / Complex64::new(1.0 - c * xl * xl, -xl).norm_sqr()
    };
    let tail_coeff = 8.0 * (g2(1.0) + g2(-1.0));

    let mut m = 8.0 * PI;
    let mut inner = integrate_density(xi, c, -m, m, m)?;
    let mut previous = inner + tail_coeff / m;
    loop {
        let next = 2.0 * m;
        if next > EXACT_PHI_LIMIT {
            return Err(SpdcError::TailNotConverged { phi_max: m });
        }
        inner += integrate_density(xi, c, -next, -m, next)? + integrate_density(xi, c, m, next, next)?;
        m = next;
        let corrected = inner + tail_coeff / m;
        let settled = (corrected - previous).abs() < 1e-4 * corrected;
        previous = corrected;
        if settled {
            return Ok(corrected / (8.0 * PI * aux.a_plus * aux.b_plus));
        }
    }
}

/// ∫_a^b |F_C(ξ, Φ)|² dΦ by composite Gauss–Legendre over panels of width ≤ π
/// (|F|² contains no Φ-frequency above 1).
fn integrate_density(xi: f64, c: f64, a: f64, b: f64, phi_max: f64) -> Result<f64> {
    let kernel = PhaseMatchKernel::new(xi, c, phi_max)?;
    let (gx, gw) = numerics::gauss_legendre(16);
    let panels = ((b - a) / PI).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (x, w) in gx.iter().zip(&gw) {
            let phi = lo + 0.5 * h * (x + 1.0);
            total += 0.5 * h * w * kernel.eval(phi).norm_sqr();
        }
    }
    Ok(total)
}

/// Same quantity as [`pair_probability_exact`] by Parseval's identity,
/// ∫|F_C|² dΦ = 4π∫₋₁¹|g(l)|² dl; exact for constant C.
pub fn pair_probability_exact_parseval(cfg: &DimensionlessConfig, c: f64) -> Result<f64> {
    let aux = aux_params(cfg);
    let xi = aux.xi_agg;
    let mut breaks = vec![-1.0, 0.0, 1.0];
    let mut r = 1.0 / xi;
    while r < 1.0 {
        breaks.extend([-r, r]);
        r *= 4.0;
    }
    breaks.sort_by(f64::total_cmp);
    let v = numerics::integrate_complex_panels(
        |l| {
            let xl = xi * l;
            Complex64::new(xi / Complex64::new(1.0 - c * xl * xl, -xl).norm_sqr(), 0.0)
        },
        &breaks,
        &QuadSpec::default(),
    )?;
    Ok(v.re / (2.0 * aux.a_plus * aux.b_plus))
}

/// Modes summed before the Laguerre–Gauss series is declared unconverged.
pub const MAX_MODES: usize = 500;

/// P_s,rel as the sum over idler Laguerre–Gauss modes of the collected pair
/// probability, each Φ-integral done analytically:
/// (ξ̃/2) Σ_n ∫₋₁¹ |A₋ + ilB₋ξ̃|^{2n} / |A₊ − ilB₊ξ̃|^{2n+2} dl.
///
/// Terms shrink at least geometrically with ratio q = max_l |N/D|², so the
/// remainder after term T_n is below T_n q/(1 − q); summation stops when
/// that bound drops under `tol` times the partial sum.
pub fn signal_probability_lg_sum(cfg: &DimensionlessConfig, tol: f64) -> Result<f64> {
    cfg.validate()?;
    let aux = aux_params(cfg);
    let xt = cfg.xi_s * cfg.xi_i / cfg.xi_p;
    let ratio = |l: f64| {
        let n = aux.a_minus * aux.a_minus + (aux.b_minus * xt * l).powi(2);
        let d = aux.a_plus * aux.a_plus + (aux.b_plus * xt * l).powi(2);
        n / d
    };
    let q = ratio(0.0).max(ratio(1.0));
    let mut breaks = vec![-1.0, 0.0, 1.0];
    let mut r = aux.a_plus / (aux.b_plus * xt);
    while r < 1.0 {
        breaks.extend([-r, r]);
        r *= 4.0;
    }
    breaks.sort_by(f64::total_cmp);
    let spec = QuadSpec { max_subdivisions: 1000, ..QuadSpec::default() };

    let mut sum = 0.0;
    let mut tail = f64::INFINITY;
    for n in 0..MAX_MODES {
        let term = numerics::integrate_complex_panels(
            |l| {
                let d = aux.a_plus * aux.a_plus + (aux.b_plus * xt * l).powi(2);
                Complex64::new(ratio(l).powi(n as i32) / d, 0.0)
            },
            &breaks,
            &spec,
        )?
        .re
            * 0.5
            * xt;
        sum += term;
        tail = term * q / (1.0 - q);
        if tail < tol * sum {
            return Ok(sum);
        }
    }
    Err(SpdcError::SumNotConverged { modes: MAX_MODES, tail })
}
