//! Physical and dimensionless descriptions of a collinear Gaussian-beam SPDC
//! source, and the auxiliary focusing quantities derived from them.
//!
//! Everything downstream works on [`DimensionlessConfig`]. A
//! [`PhysicalSource`] is only needed when absolute (dimensional) numbers are
//! requested: brightness prefactors, bandwidths in rad/s, confocal lengths.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpdcError};

/// CODATA 2018 values, SI units.
pub mod consts {
    /// Speed of light in vacuum [m/s].
    pub const C: f64 = 299_792_458.0;
    /// Reduced Planck constant [J s].
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Vacuum permittivity [F/m].
    pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
}

/// Below this |n'_s - n'_i| the frequency scale is treated as undefined.
pub const DISPERSION_GUARD: f64 = 1e-12;

/// Full dimensional description of a source. Lengths in metres.
///
/// Serialized field names follow the configuration-file keys
/// (`L`, `Lambda`, `N_p`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalSource {
    pub lambda_p: f64,
    pub lambda_s: f64,
    pub lambda_i: f64,
    pub n_p: f64,
    pub n_s: f64,
    pub n_i: f64,
    /// Group indices n' = c dk/domega.
    pub np_g: f64,
    pub ns_g: f64,
    pub ni_g: f64,
    #[serde(rename = "L")]
    pub length: f64,
    /// Poling period; 0 means unpoled.
    #[serde(rename = "Lambda")]
    pub poling_period: f64,
    /// Quasi-phase-matching order. The sign picks the orientation of the
    /// grating vector, so `-1` compensates a positive wavenumber mismatch.
    pub m_qpm: i32,
    /// Effective nonlinear coefficient [m/V].
    pub chi_eff: f64,
    /// Efficiency factor (Fresnel loss, poling Fourier coefficient).
    pub epsilon: f64,
    /// Mean pump photon number.
    #[serde(rename = "N_p")]
    pub pump_photons: f64,
    pub w_p: f64,
    pub w_s: f64,
    pub w_i: f64,
    /// RMS width of the pump intensity spectrum |s|^2 [rad/s]; 0 = monochromatic.
    pub pump_bw: f64,
}

impl PhysicalSource {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SpdcError::InvalidSource(msg));
        let positive = [
            ("lambda_p", self.lambda_p),
            ("lambda_s", self.lambda_s),
            ("lambda_i", self.lambda_i),
            ("n_p", self.n_p),
            ("n_s", self.n_s),
            ("n_i", self.n_i),
            ("L", self.length),
            ("w_p", self.w_p),
            ("w_s", self.w_s),
            ("w_i", self.w_i),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        for (name, v) in [("np_g", self.np_g), ("ns_g", self.ns_g), ("ni_g", self.ni_g)] {
            if !(v.is_finite() && v >= 1.0) {
                return bad(format!("{name} must be >= 1, got {v}"));
            }
        }
        if !(self.poling_period.is_finite() && self.poling_period >= 0.0) {
            return bad(format!("Lambda must be >= 0, got {}", self.poling_period));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return bad(format!("epsilon must lie in (0, 1], got {}", self.epsilon));
        }
        if !(self.pump_photons.is_finite() && self.pump_photons >= 0.0) {
            return bad(format!("N_p must be >= 0, got {}", self.pump_photons));
        }
        if !(self.pump_bw.is_finite() && self.pump_bw >= 0.0) {
            return bad(format!("pump_bw must be >= 0, got {}", self.pump_bw));
        }
        if !self.chi_eff.is_finite() {
            return bad("chi_eff must be finite".into());
        }
        let lhs = 1.0 / self.lambda_p;
        let rhs = 1.0 / self.lambda_s + 1.0 / self.lambda_i;
        if ((lhs - rhs) / lhs).abs() > 1e-9 {
            return bad(format!(
                "energy conservation violated: 1/lambda_p = {lhs:e}, 1/lambda_s + 1/lambda_i = {rhs:e}"
            ));
        }
        Ok(())
    }

    pub fn k_p(&self) -> f64 {
        2.0 * PI * self.n_p / self.lambda_p
    }

    pub fn k_s(&self) -> f64 {
        2.0 * PI * self.n_s / self.lambda_s
    }

    pub fn k_i(&self) -> f64 {
        2.0 * PI * self.n_i / self.lambda_i
    }

    /// Grating wavenumber m·2π/Λ, zero for an unpoled crystal.
    pub fn grating_k(&self) -> f64 {
        if self.poling_period == 0.0 || self.m_qpm == 0 {
            0.0
        } else {
            self.m_qpm as f64 * 2.0 * PI / self.poling_period
        }
    }

    /// n'_s - n'_i.
    pub fn group_index_contrast(&self) -> f64 {
        self.ns_g - self.ni_g
    }

    /// Same source with signal and idler labels exchanged.
    pub fn swapped(&self) -> PhysicalSource {
        PhysicalSource {
            lambda_s: self.lambda_i,
            lambda_i: self.lambda_s,
            n_s: self.n_i,
            n_i: self.n_s,
            ns_g: self.ni_g,
            ni_g: self.ns_g,
            w_s: self.w_i,
            w_i: self.w_s,
            ..self.clone()
        }
    }
}

/// The reduced parameter set consumed by all figure-of-merit computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessConfig {
    pub xi_p: f64,
    pub xi_s: f64,
    pub xi_i: f64,
    pub ks_over_kp: f64,
    pub ki_over_kp: f64,
    pub dk_over_kp: f64,
    /// Nominal phase mismatch (Δk + mK)L [rad].
    pub phi0: f64,
    /// Group-velocity angle θ in (−π/2, π/2] [rad].
    pub theta: f64,
    /// Frequency scale c/((n'_s − n'_i)L) [rad/s]; signed.
    pub omega: f64,
    /// Pump rms bandwidth over |Ω|.
    pub pump_bw_scaled: f64,
}

impl DimensionlessConfig {
    /// Equal foci ξ_p = ξ_s = ξ_i = `xi`, degenerate wavenumbers, Δk = 0.
    pub fn equal_foci(xi: f64) -> Self {
        DimensionlessConfig {
            xi_p: xi,
            xi_s: xi,
            xi_i: xi,
            ks_over_kp: 0.5,
            ki_over_kp: 0.5,
            dk_over_kp: 0.0,
            phi0: 0.0,
            theta: PI / 4.0,
            omega: 1.0,
            pump_bw_scaled: 0.0,
        }
    }

    /// Focal parameters and wavenumber ratios only (Δk = 0).
    pub fn with_foci(xi_p: f64, xi_s: f64, xi_i: f64, ks_over_kp: f64, ki_over_kp: f64) -> Self {
        DimensionlessConfig {
            xi_p,
            xi_s,
            xi_i,
            ks_over_kp,
            ki_over_kp,
            dk_over_kp: 1.0 - ks_over_kp - ki_over_kp,
            ..Self::equal_foci(1.0)
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = normalize_theta(theta);
        self
    }

    pub fn with_pump_bw(mut self, pump_bw_scaled: f64) -> Self {
        self.pump_bw_scaled = pump_bw_scaled;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SpdcError::InvalidConfig(msg));
        for (name, v) in [("xi_p", self.xi_p), ("xi_s", self.xi_s), ("xi_i", self.xi_i)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if !(self.ks_over_kp > 0.0 && self.ki_over_kp > 0.0) {
            return bad("wavenumber ratios must be positive".into());
        }
        let sum = self.ks_over_kp + self.ki_over_kp + self.dk_over_kp;
        if (sum - 1.0).abs() > 1e-9 {
            return bad(format!("k_s/k_p + k_i/k_p + dk/k_p = {sum}, expected 1"));
        }
        if !(self.theta > -FRAC_PI_2 && self.theta <= FRAC_PI_2) {
            return bad(format!("theta = {} outside (-pi/2, pi/2]", self.theta));
        }
        if !(self.pump_bw_scaled.is_finite() && self.pump_bw_scaled >= 0.0) {
            return bad("pump_bw_scaled must be >= 0".into());
        }
        Ok(())
    }

    /// Same configuration with signal and idler exchanged.
    pub fn swapped(&self) -> Self {
        DimensionlessConfig {
            xi_s: self.xi_i,
            xi_i: self.xi_s,
            ks_over_kp: self.ki_over_kp,
            ki_over_kp: self.ks_over_kp,
            theta: normalize_theta(FRAC_PI_2 - self.theta),
            omega: -self.omega,
            ..*self
        }
    }
}

/// Maps an angle onto (−π/2, π/2]; θ and θ ± π describe the same line.
pub fn normalize_theta(theta: f64) -> f64 {
    let mut t = theta % PI;
    if t <= -FRAC_PI_2 {
        t += PI;
    } else if t > FRAC_PI_2 {
        t -= PI;
    }
    t
}

/// Quantities derived from the focal parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxParams {
    pub a_plus: f64,
    pub a_minus: f64,
    pub b_plus: f64,
    pub b_minus: f64,
    pub c_param: f64,
    /// Aggregate focal parameter ξ = (B₊/A₊) ξ_s ξ_i / ξ_p.
    pub xi_agg: f64,
    pub a_s: f64,
    pub b_s: f64,
    pub a_i: f64,
    pub b_i: f64,
    /// Aggregate confocal length b = L/ξ in units of L.
    pub b_confocal_over_l: f64,
}

pub fn reduce(src: &PhysicalSource) -> Result<DimensionlessConfig> {
    src.validate()?;
    let contrast = src.group_index_contrast();
    if contrast.abs() < DISPERSION_GUARD {
        return Err(SpdcError::DegenerateDispersion { delta: contrast.abs() });
    }
    let (kp, ks, ki) = (src.k_p(), src.k_s(), src.k_i());
    let l = src.length;
    let dk = kp - ks - ki;
    let omega = consts::C / (contrast * l);
    let theta = normalize_theta((src.ns_g - src.np_g).atan2(src.np_g - src.ni_g));
    Ok(DimensionlessConfig {
        xi_p: l / (kp * src.w_p * src.w_p),
        xi_s: l / (ks * src.w_s * src.w_s),
        xi_i: l / (ki * src.w_i * src.w_i),
        ks_over_kp: ks / kp,
        ki_over_kp: ki / kp,
        dk_over_kp: dk / kp,
        phi0: (dk + src.grating_k()) * l,
        theta,
        omega,
        pump_bw_scaled: src.pump_bw / omega.abs(),
    })
}

pub fn aux_params(cfg: &DimensionlessConfig) -> AuxParams {
    let (xp, xs, xi) = (cfg.xi_p, cfg.xi_s, cfg.xi_i);
    let (ks, ki, d) = (cfg.ks_over_kp, cfg.ki_over_kp, cfg.dk_over_kp);
    // (k_j + Δk)/(k_p − Δk)
    let ks_t = (ks + d) / (1.0 - d);
    let ki_t = (ki + d) / (1.0 - d);

    let a_plus = 1.0 + ks * xs / xp + ki * xi / xp;
    let a_minus = 1.0 + ks * xs / xp - ki * xi / xp;
    let b_plus = (1.0 - d) * (1.0 + ks_t * xp / xs + ki_t * xp / xi);
    let b_minus = (1.0 - d) * (1.0 + ks_t * xp / xs - ki_t * xp / xi);
    let c_param = d * xp * xp / (xs * xi) * a_plus / (b_plus * b_plus);
    let xi_agg = b_plus / a_plus * xs * xi / xp;

    let a_s = 2.0 * ((1.0 + ks * xs / xp) * ki).sqrt();
    let b_s = 2.0 * (1.0 - d) * ((1.0 + ks_t * xp / xs) * ki_t).sqrt();
    let a_i = 2.0 * ((1.0 + ki * xi / xp) * ks).sqrt();
    let b_i = 2.0 * (1.0 - d) * ((1.0 + ki_t * xp / xi) * ks_t).sqrt();

    AuxParams {
        a_plus,
        a_minus,
        b_plus,
        b_minus,
        c_param,
        xi_agg,
        a_s,
        b_s,
        a_i,
        b_i,
        b_confocal_over_l: 1.0 / xi_agg,
    }
}

/// Upper bound |Δk| k_p / (4 k_s k_i) on |C|, valid to first order in Δk/k_j.
pub fn c_bound(cfg: &DimensionlessConfig) -> f64 {
    cfg.dk_over_kp.abs() / (4.0 * cfg.ks_over_kp * cfg.ki_over_kp)
}

/// Worst typical value of C for a poled source: the bound evaluated at
/// phase matching (Δk = −mK), carrying the sign of Δk there.
pub fn worst_case_c(src: &PhysicalSource) -> f64 {
    let dk_pm = -src.grating_k();
    dk_pm * src.k_p() / (4.0 * src.k_s() * src.k_i())
}

/// The least favourable source still inside the typical regime: 1 mm
/// crystal, first-order 5 um grating, 1.6 um degenerate signal and idler,
/// 0.8 um pump, all indices 1.5. Waists give ξ = 1 for every beam and the
/// group indices put θ at 45°; pump photon number and nonlinearity are unit
/// placeholders.
pub fn worst_typical_source() -> PhysicalSource {
    let (lp, ls, n, l) = (0.8e-6, 1.6e-6, 1.5, 1e-3);
    let k = |lambda: f64| 2.0 * PI * n / lambda;
    PhysicalSource {
        lambda_p: lp,
        lambda_s: ls,
        lambda_i: ls,
        n_p: n,
        n_s: n,
        n_i: n,
        np_g: 1.6,
        ns_g: 1.65,
        ni_g: 1.55,
        length: l,
        poling_period: 5e-6,
        m_qpm: 1,
        chi_eff: 1e-12,
        epsilon: 1.0,
        pump_photons: 1.0,
        w_p: (l / k(lp)).sqrt(),
        w_s: (l / k(ls)).sqrt(),
        w_i: (l / k(ls)).sqrt(),
        pump_bw: 0.0,
    }
}

/// A violated "typical bulk source" criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TypicalityWarning {
    ShortCrystal { length: f64 },
    ShortPolingPeriod { period: f64 },
    HighQpmOrder { order: i32 },
    LongSignalWavelength { lambda_s: f64 },
    LongPumpWavelength { lambda_p: f64 },
    LowRefractiveIndex { index: f64 },
}

impl fmt::Display for TypicalityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TypicalityWarning::ShortCrystal { length } => {
                write!(f, "crystal length {:.3} mm is below 1 mm", length * 1e3)
            }
            TypicalityWarning::ShortPolingPeriod { period } => write!(
                f,
                "first-order poling period {:.3} um is below 5 um",
                period * 1e6
            ),
            TypicalityWarning::HighQpmOrder { order } => {
                write!(f, "quasi-phase-matching order |m| = {} exceeds 1", order.abs())
            }
            TypicalityWarning::LongSignalWavelength { lambda_s } => {
                write!(f, "signal wavelength {:.4} um exceeds 1.6 um", lambda_s * 1e6)
            }
            TypicalityWarning::LongPumpWavelength { lambda_p } => {
                write!(f, "pump wavelength {:.4} um exceeds 0.8 um", lambda_p * 1e6)
            }
            TypicalityWarning::LowRefractiveIndex { index } => {
                write!(f, "refractive index {index:.4} is below 1.5")
            }
        }
    }
}

/// Checks the source against the regime where the C ≈ 0 and
/// frequency-independence approximations were assessed. Never fails.
pub fn validate_typicality(src: &PhysicalSource) -> Vec<TypicalityWarning> {
    let mut out = Vec::new();
    if src.length < 1e-3 {
        out.push(TypicalityWarning::ShortCrystal { length: src.length });
    }
    if src.poling_period > 0.0 && src.m_qpm.abs() == 1 && src.poling_period < 5e-6 {
        out.push(TypicalityWarning::ShortPolingPeriod { period: src.poling_period });
    }
    if src.m_qpm.abs() > 1 {
        out.push(TypicalityWarning::HighQpmOrder { order: src.m_qpm });
    }
    if src.lambda_s > 1.6e-6 * (1.0 + 1e-12) {
        out.push(TypicalityWarning::LongSignalWavelength { lambda_s: src.lambda_s });
    }
    if src.lambda_p > 0.8e-6 * (1.0 + 1e-12) {
        out.push(TypicalityWarning::LongPumpWavelength { lambda_p: src.lambda_p });
    }
    let min_index = src.n_p.min(src.n_s).min(src.n_i);
    if min_index < 1.5 {
        out.push(TypicalityWarning::LowRefractiveIndex { index: min_index });
    }
    out
}


#[cfg(test)]
mod tests {
    use super::fixtures::reference_source;
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn waists_at_unit_focus_give_unit_xi() {
        let mut src = reference_source();
        let l = src.length;
        src.w_p = (l / src.k_p()).sqrt();
        src.w_s = (l / src.k_s()).sqrt();
        src.w_i = (l / src.k_i()).sqrt();
        let cfg = reduce(&src).unwrap();
        assert_relative_eq!(cfg.xi_p, 1.0, max_relative = 1e-14);
        assert_relative_eq!(cfg.xi_s, 1.0, max_relative = 1e-14);
        assert_relative_eq!(cfg.xi_i, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn pump_group_index_midway_gives_45_degrees() {
        let mut src = reference_source();
        src.np_g = 0.5 * (src.ns_g + src.ni_g);
        let cfg = reduce(&src).unwrap();
        assert_relative_eq!(cfg.theta, PI / 4.0, max_relative = 1e-14);
    }

    #[test]
    fn degenerate_wavenumber_bookkeeping() {
        let mut src = reference_source();
        src.n_s = 1.8;
        src.n_i = 1.8;
        let cfg = reduce(&src).unwrap();
        let expect = 0.5 - cfg.dk_over_kp / 2.0;
        assert_relative_eq!(cfg.ks_over_kp, expect, max_relative = 1e-13);
        assert_relative_eq!(cfg.ki_over_kp, expect, max_relative = 1e-13);
        cfg.validate().unwrap();
    }

    #[test]
    fn equal_group_indices_are_rejected() {
        let mut src = reference_source();
        src.ni_g = src.ns_g;
        assert!(matches!(reduce(&src), Err(SpdcError::DegenerateDispersion { .. })));
    }

    #[test]
    fn invalid_sources_are_rejected() {
        let mut src = reference_source();
        src.lambda_i *= 1.01;
        assert!(matches!(src.validate(), Err(SpdcError::InvalidSource(_))));
        let mut src = reference_source();
        src.epsilon = 1.5;
        assert!(src.validate().is_err());
        let mut src = reference_source();
        src.ni_g = 0.9;
        assert!(src.validate().is_err());
        let mut src = reference_source();
        src.w_s = 0.0;
        assert!(src.validate().is_err());
    }

    #[test]
    fn theta_is_normalized() {
        assert_relative_eq!(normalize_theta(-3.0 * PI / 4.0), PI / 4.0, max_relative = 1e-15);
        assert_relative_eq!(normalize_theta(PI / 2.0), PI / 2.0);
        assert_relative_eq!(normalize_theta(-PI / 2.0), PI / 2.0);
        // n'_s < n'_i with n'_p in between still lands in the first quadrant.
        let mut src = reference_source();
        assert!(src.np_g < src.ns_g && src.np_g > src.ni_g);
        std::mem::swap(&mut src.ns_g, &mut src.ni_g);
        let t = reduce(&src).unwrap().theta;
        assert!(t > 0.0 && t < PI / 2.0);
    }

    #[test]
    fn equal_foci_aux_values() {
        let aux = aux_params(&DimensionlessConfig::equal_foci(1.7));
        assert_eq!(aux.a_plus, 2.0);
        assert_eq!(aux.b_plus, 2.0);
        assert_eq!(aux.xi_agg, 1.7);
        assert_eq!(aux.c_param, 0.0);
        assert_relative_eq!(1.0 / (aux.a_plus * aux.b_plus).sqrt(), 0.5);
    }

    #[test]
    fn c_bound_values() {
        let cfg = DimensionlessConfig::equal_foci(1.0);
        assert_eq!(c_bound(&cfg), 0.0);
        let cfg = DimensionlessConfig {
            dk_over_kp: 0.1,
            ks_over_kp: 0.5,
            ki_over_kp: 0.5,
            ..cfg
        };
        assert_relative_eq!(c_bound(&cfg), 0.1, max_relative = 1e-15);
    }

    #[test]
    fn worst_typical_case_bound_is_about_a_tenth() {
        // 1.6 um signal, 0.8 um pump, 5 um first-order grating, indices 1.5.
        let src = worst_typical_source();
        assert!(validate_typicality(&src).is_empty());
        let c = worst_case_c(&src);
        assert!(c < 0.0);
        assert!((0.08..0.13).contains(&c.abs()), "worst-case C = {c}");
    }

    #[test]
    fn typicality() {
        let mut src = reference_source();
        src.lambda_p = 750e-9;
        src.lambda_s = 1500e-9;
        src.lambda_i = 1500e-9;
        assert!(validate_typicality(&src).is_empty());

        let mut short = src.clone();
        short.length = 0.5e-3;
        assert_eq!(
            validate_typicality(&short),
            vec![TypicalityWarning::ShortCrystal { length: 0.5e-3 }]
        );

        let mut third = src.clone();
        third.m_qpm = 3;
        let w = validate_typicality(&third);
        assert_eq!(w, vec![TypicalityWarning::HighQpmOrder { order: 3 }]);
        assert!(w[0].to_string().contains("3"));

        let mut fine = src.clone();
        fine.poling_period = 3e-6;
        assert_eq!(validate_typicality(&fine).len(), 1);
    }

    #[test]
    fn swapped_source_mirrors_theta() {
        let src = reference_source();
        let a = reduce(&src).unwrap();
        let b = reduce(&src.swapped()).unwrap();
        assert_relative_eq!(normalize_theta(PI / 2.0 - a.theta), b.theta, max_relative = 1e-13);
        assert_relative_eq!(a.omega, -b.omega, max_relative = 1e-13);
        assert_relative_eq!(a.xi_s, b.xi_i, max_relative = 1e-15);
        let sw = a.swapped();
        assert_relative_eq!(sw.theta, b.theta, max_relative = 1e-13);
    }

    proptest! {
        #[test]
        fn reduction_is_scale_invariant(s in 0.05f64..20.0) {
            let src = reference_source();
            let k = 2.0 * PI / src.poling_period;
            let dk = src.k_p() - src.k_s() - src.k_i();
            let mut scaled = src.clone();
            scaled.length *= s;
            scaled.w_p *= s.sqrt();
            scaled.w_s *= s.sqrt();
            scaled.w_i *= s.sqrt();
            scaled.pump_bw = 3.0e11 / s;
            // keep Φ0 fixed: (dk + mK') sL = (dk + mK) L
            let target = (dk + src.m_qpm as f64 * k) / s - dk;
            scaled.poling_period = src.m_qpm as f64 * 2.0 * PI / target;
            let mut base = src.clone();
            base.pump_bw = 3.0e11;
            prop_assume!(scaled.poling_period > 0.0);
            let a = reduce(&base).unwrap();
            let b = reduce(&scaled).unwrap();
            for (x, y) in [(a.xi_p, b.xi_p), (a.xi_s, b.xi_s), (a.xi_i, b.xi_i),
                           (a.phi0, b.phi0), (a.theta, b.theta),
                           (a.pump_bw_scaled, b.pump_bw_scaled)] {
                prop_assert!(((x - y) / x).abs() < 1e-12, "{} vs {}", x, y);
            }
        }

        #[test]
        fn aux_depends_only_on_focus_ratios(
            lp in -3.0f64..3.0, ls in -3.0f64..3.0, li in -3.0f64..3.0, scale in -3.0f64..3.0,
            ks in 0.2f64..0.8,
        ) {
            let base = DimensionlessConfig::with_foci(lp.exp(), ls.exp(), li.exp(), ks, 1.0 - ks);
            let f = scale.exp();
            let scaled = DimensionlessConfig { xi_p: base.xi_p * f, xi_s: base.xi_s * f, xi_i: base.xi_i * f, ..base };
            let (a, b) = (aux_params(&base), aux_params(&scaled));
            for (x, y) in [(a.a_plus, b.a_plus), (a.a_minus, b.a_minus),
                           (a.b_plus, b.b_plus), (a.b_minus, b.b_minus), (a.c_param, b.c_param)] {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
            prop_assert!(((a.xi_agg * f - b.xi_agg) / b.xi_agg).abs() < 1e-12);
            prop_assert!(a.a_plus >= a.a_minus && a.b_plus >= a.b_minus);
        }

        #[test]
        fn exchange_symmetry(lp in -3.0f64..3.0, ls in -3.0f64..3.0, li in -3.0f64..3.0, ks in 0.2f64..0.8) {
            let cfg = DimensionlessConfig::with_foci(lp.exp(), ls.exp(), li.exp(), ks, 1.0 - ks);
            let (a, b) = (aux_params(&cfg), aux_params(&cfg.swapped()));
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(1.0);
            prop_assert!(close(a.a_s, b.a_i) && close(a.b_s, b.b_i));
            prop_assert!(close(a.a_i, b.a_s) && close(a.b_i, b.b_s));
            prop_assert!(close(a.a_plus, b.a_plus) && close(a.b_plus, b.b_plus));
            prop_assert!(close(a.xi_agg, b.xi_agg));
        }

        // The bound is first order in Δk/k_j; allow the matching first-order slack.
        #[test]
        fn c_within_bound_to_first_order(
            lp in -7.0f64..7.0, ls in -7.0f64..7.0, li in -7.0f64..7.0,
            ks in 0.1f64..0.9, d in -1e-3f64..1e-3,
        ) {
            let ki = 1.0 - d - ks;
            let cfg = DimensionlessConfig {
                dk_over_kp: d,
                ..DimensionlessConfig::with_foci(lp.exp(), ls.exp(), li.exp(), ks, ki)
            };
            let aux = aux_params(&cfg);
            let slack = 1.0 + 4.0 * d.abs() / ks.min(ki);
            prop_assert!(aux.c_param.abs() <= c_bound(&cfg) * slack + 1e-300);
        }
    }
}
