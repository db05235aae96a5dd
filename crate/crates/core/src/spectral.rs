//! Peak joint spectral density, its sensitivity to focusing, joint spectral
//! amplitude grids, and photon bandwidths.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpdcError};
use crate::model::{self, consts, aux_params, DimensionlessConfig, PhysicalSource};
use crate::numerics::{self, Axis, MaximizeOptions};
use crate::overlap::{self, PhaseMatchKernel};

/// Edge density allowed on a JSA grid, relative to its maximum density.
pub const EDGE_DENSITY: f64 = 1e-4;
/// Expansion rounds tried before a grid is rejected.
pub const MAX_EXPANSIONS: usize = 4;

/// The Φ at which |F(ξ, Φ)| (with quadratic term `c`) is largest.
pub fn phi_peak(xi: f64, c: f64) -> (f64, f64) {
    let opts = MaximizeOptions { grid_points: 256, x_tol: 1e-10, ..MaximizeOptions::default() };
    let (x, v) = numerics::maximize(
        |x| overlap::phase_match_f_exact(xi, x[0], c).map_or(f64::NAN, |f| f.norm()),
        &[Axis::linear(-8.0 * PI, 4.0 * PI)],
        &opts,
    );
    (x[0], v)
}

/// Peak density (max over Φ) at focal parameters ξ_p and ξ_s = ξ_i for a
/// degenerate source, relative to the global optimum 0.25·f_star².
pub fn relative_peak_density(xi_p: f64, xi_s: f64) -> f64 {
    let cfg = DimensionlessConfig::with_foci(xi_p, xi_s, xi_s, 0.5, 0.5);
    let aux = aux_params(&cfg);
    let (_, f) = phi_peak(aux.xi_agg, 0.0);
    let best = overlap::f_peak().f_star;
    (f * f / (aux.a_plus * aux.b_plus)) / (0.25 * best * best)
}

/// Peak spectral amplitude at optimal focusing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralAmplitude {
    /// max |ψ| [s^(1/2) rad^(-1/2) · (rad/s)^(-1/2)-scaled by s(ω_p)].
    pub amplitude: f64,
    /// max |ψ|² = amplitude².
    pub density: f64,
    /// max |ψ|² / N_p.
    pub density_per_pump_photon: f64,
    /// True when the pump is monochromatic and the value is quoted per unit
    /// pump spectral amplitude s(ω_p).
    pub per_unit_pump_amplitude: bool,
}

/// √(8π²ħε n_s n_i/(ε₀ n_p)) · χ_eff/(λ_sλ_i) · √(N_p L), the dimensional
/// factor multiplying s(ω_p) |F|/√(A₊B₊) in the spectral amplitude.
pub fn amplitude_prefactor(src: &PhysicalSource) -> f64 {
    (8.0 * PI * PI * consts::HBAR * src.epsilon * src.n_s * src.n_i / (consts::EPSILON_0 * src.n_p)).sqrt()
        * src.chi_eff.abs()
        / (src.lambda_s * src.lambda_i)
        * (src.pump_photons * src.length).sqrt()
}

/// Peak of the Gaussian pump spectral amplitude, (2πΔω²)^(−1/4).
pub fn pump_peak_amplitude(rms_bw: f64) -> f64 {
    (2.0 * PI * rms_bw * rms_bw).powf(-0.25)
}

pub fn max_spectral_amplitude(src: &PhysicalSource) -> Result<SpectralAmplitude> {
    src.validate()?;
    let mono = src.pump_bw == 0.0;
    let s = if mono { 1.0 } else { pump_peak_amplitude(src.pump_bw) };
    let amplitude = amplitude_prefactor(src) * s * 0.5 * overlap::f_peak().f_star;
    let density = amplitude * amplitude;
    Ok(SpectralAmplitude {
        amplitude,
        density,
        density_per_pump_photon: if src.pump_photons > 0.0 { density / src.pump_photons } else { 0.0 },
        per_unit_pump_amplitude: mono,
    })
}

/// Sampled joint spectral amplitude.
///
/// `values[(i, j)]` is the amplitude at signal offset `ds_axis[i]` and idler
/// offset `di_axis[j]`, both in units of Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct JsaGrid {
    pub values: DMatrix<Complex64>,
    pub ds_axis: Vec<f64>,
    pub di_axis: Vec<f64>,
    pub config: DimensionlessConfig,
}

impl JsaGrid {
    pub fn max_density(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max)
    }

    /// Largest density on the outer rows and columns, relative to the maximum.
    pub fn edge_ratio(&self) -> f64 {
        edge_ratios(&self.values).0.max(edge_ratios(&self.values).1) / self.max_density()
    }

    pub fn same_axes(&self, other: &JsaGrid) -> bool {
        self.ds_axis == other.ds_axis && self.di_axis == other.di_axis
    }
}

/// (max density on first/last row, max density on first/last column).
fn edge_ratios(m: &DMatrix<Complex64>) -> (f64, f64) {
    let (r, c) = m.shape();
    let rows = (0..c)
        .flat_map(|j| [m[(0, j)], m[(r - 1, j)]])
        .map(|z| z.norm_sqr())
        .fold(0.0, f64::max);
    let cols = (0..r)
        .flat_map(|i| [m[(i, 0)], m[(i, c - 1)]])
        .map(|z| z.norm_sqr())
        .fold(0.0, f64::max);
    (rows, cols)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsaSpec {
    pub n_points: usize,
    /// Initial half-extent along the pump direction, in pump rms widths.
    pub extent_sigmas: f64,
    /// Quadratic kernel term; 0 gives the standard approximation.
    pub c: f64,
}

impl Default for JsaSpec {
    fn default() -> Self {
        JsaSpec { n_points: 512, extent_sigmas: 4.0, c: 0.0 }
    }
}

/// Largest Φ half-range `phi_extent` will scan.
pub const PHI_EXTENT_CAP: f64 = 1e5;

/// Φ range holding the non-negligible part of |F(ξ, Φ)|²: returns
/// (centre, half-width) such that |F|² < `EDGE_DENSITY`·max outside it.
///
/// The scan range starts at the asymptotic tail estimate and doubles until
/// its outer half is below threshold; kernel poles close to the real axis
/// (large ξ with C ≠ 0) make the tail approach its 1/Φ form only slowly.
pub fn phi_extent(xi: f64, c: f64) -> Result<(f64, f64)> {
    let (phi_c, f_max) = phi_peak(xi, c);
    let peak = f_max * f_max;
    let g = |l: f64| {
        let xl = xi * l;
        xi.sqrt() / Complex64::new(1.0 - c * xl * xl, -xl).norm()
    };
    // |F| ≤ (2/|Φ|)(|g(1)| + |g(−1)|) + O(Φ⁻²) far from the peak
    let tail_amp = 2.0 * (g(1.0) + g(-1.0));
    let mut limit = (tail_amp * tail_amp / (0.1 * EDGE_DENSITY * peak)).sqrt().max(8.0 * PI);
    loop {
        let k = PhaseMatchKernel::new(xi, c, limit + phi_c.abs())?;
        let mut reach = 0.0f64;
        for dir in [-1.0, 1.0] {
            let mut d = 0.0;
            while d < limit {
                d += (0.01 * d).clamp(0.05, 1.0);
                if k.eval(phi_c + dir * d).norm_sqr() >= EDGE_DENSITY * peak {
                    reach = reach.max(d);
                }
            }
        }
        if reach <= 0.5 * limit || limit >= PHI_EXTENT_CAP {
            return Ok((phi_c, reach + 1.0));
        }
        limit *= 2.0;
    }
}

/// Builds the JSA s(δω_p)·F(ξ, Φ(δω_s, δω_i)) on a grid that is expanded
/// until every edge density is below `EDGE_DENSITY` of the maximum.
///
/// ξ is the aggregate focal parameter of `cfg`. Scaled offsets x = δω_s/Ω,
/// y = δω_i/Ω map to pump offset p = x + y and
/// Φ = Φ₀ + (−sinθ·x + cosθ·y)/(sinθ + cosθ).
pub fn build_jsa(cfg: &DimensionlessConfig, spec: &JsaSpec) -> Result<JsaGrid> {
    cfg.validate()?;
    if cfg.pump_bw_scaled <= 0.0 {
        return Err(SpdcError::MonochromaticPump);
    }
    if spec.n_points < 2 {
        return Err(SpdcError::InvalidConfig("a JSA grid needs at least 2 points per axis".into()));
    }
    let extent = phi_extent(aux_params(cfg).xi_agg, spec.c)?;
    build_jsa_in(cfg, spec, extent)
}

/// `build_jsa` with a precomputed `phi_extent` for the aggregate ξ of `cfg`
/// and `spec.c`.
pub fn build_jsa_in(cfg: &DimensionlessConfig, spec: &JsaSpec, extent: (f64, f64)) -> Result<JsaGrid> {
    cfg.validate()?;
    if cfg.pump_bw_scaled <= 0.0 {
        return Err(SpdcError::MonochromaticPump);
    }
    if spec.n_points < 2 {
        return Err(SpdcError::InvalidConfig("a JSA grid needs at least 2 points per axis".into()));
    }
    let (phi_c, half) = extent;
    let (sn, cs) = cfg.theta.sin_cos();
    let sum = sn + cs;
    let centre = phi_c - cfg.phi0;
    let pump_half = spec.extent_sigmas * cfg.pump_bw_scaled;
    let mut half_x = pump_half * (cs / sum).abs() + half;
    let mut half_y = pump_half * (sn / sum).abs() + half;
    let (x0, y0) = (-centre, centre);

    let mut ratio = f64::INFINITY;
    for round in 0..=MAX_EXPANSIONS {
        let xs = uniform_axis(x0, half_x, spec.n_points);
        let ys = uniform_axis(y0, half_y, spec.n_points);
        let grid = build_jsa_on(cfg, xs, ys, spec.c)?;
        let max = grid.max_density();
        let (rows, cols) = edge_ratios(&grid.values);
        ratio = rows.max(cols) / max;
        if ratio <= EDGE_DENSITY {
            return Ok(grid);
        }
        if round == MAX_EXPANSIONS {
            break;
        }
        // Rows are constant-x edges, columns constant-y edges.
        if rows > EDGE_DENSITY * max {
            half_x *= 1.5;
        }
        if cols > EDGE_DENSITY * max {
            half_y *= 1.5;
        }
    }
    Err(SpdcError::EdgeCriterionUnmet { ratio, rounds: MAX_EXPANSIONS })
}

fn uniform_axis(centre: f64, half: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| centre - half + 2.0 * half * k as f64 / (n - 1) as f64)
        .collect()
}

/// Builds the JSA for `cfg` on the axes of an existing grid.
pub fn build_jsa_like(cfg: &DimensionlessConfig, like: &JsaGrid, c: f64) -> Result<JsaGrid> {
    build_jsa_on(cfg, like.ds_axis.clone(), like.di_axis.clone(), c)
}

/// Builds the JSA on explicit axes, without any extent check.
pub fn build_jsa_on(cfg: &DimensionlessConfig, ds_axis: Vec<f64>, di_axis: Vec<f64>, c: f64) -> Result<JsaGrid> {
    if cfg.pump_bw_scaled <= 0.0 {
        return Err(SpdcError::MonochromaticPump);
    }
    let xi = aux_params(cfg).xi_agg;
    let (sn, cs) = cfg.theta.sin_cos();
    let sum = sn + cs;
    let a: Vec<f64> = ds_axis.iter().map(|&x| -sn * x / sum).collect();
    let b: Vec<f64> = di_axis.iter().map(|&y| cfg.phi0 + cs * y / sum).collect();
    let span = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let kernel = PhaseMatchKernel::new(xi, c, span(&a) + span(&b))?;
    let (nodes, w) = (kernel.nodes(), kernel.weights());

    // F_ij = Σ_k e^{i a_i l_k/2} w_k e^{i b_j l_k/2}
    let left = DMatrix::from_fn(ds_axis.len(), nodes.len(), |i, k| {
        Complex64::from_polar(1.0, 0.5 * a[i] * nodes[k]) * w[k]
    });
    let right = DMatrix::from_fn(nodes.len(), di_axis.len(), |k, j| Complex64::from_polar(1.0, 0.5 * b[j] * nodes[k]));
    let mut values = numerics::complex_matmul(&left, &right);

    let bw = cfg.pump_bw_scaled;
    let norm = pump_peak_amplitude(bw);
    let (nr, nc) = values.shape();
    values
        .as_mut_slice()
        .par_chunks_mut(nr)
        .enumerate()
        .for_each(|(j, col)| {
            for (i, v) in col.iter_mut().enumerate() {
                let p = ds_axis[i] + di_axis[j];
                *v *= norm * (-p * p / (4.0 * bw * bw)).exp();
            }
        });
    debug_assert_eq!(nc, di_axis.len());
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SpdcError::SingularDenominator);
    }
    Ok(JsaGrid { values, ds_axis, di_axis, config: *cfg })
}

/// FWHM in Φ of |F(ξ, Φ)|² about its peak.
pub fn phi_bandwidth(xi: f64) -> Result<f64> {
    phi_bandwidth_exact(xi, 0.0)
}

/// FWHM in Φ of |F|² with the quadratic term `c` kept.
pub fn phi_bandwidth_exact(xi: f64, c: f64) -> Result<f64> {
    let (phi_c, _) = phi_peak(xi, c);
    let k = PhaseMatchKernel::new(xi, c, 20.0 * PI * (1.0 + xi))?;
    numerics::fwhm(|phi| k.eval(phi).norm_sqr(), phi_c, 10.0 * PI * (1.0 + xi))
}

/// The heuristic 2π·max(1, ξ/10).
pub fn heuristic_phi_bandwidth(xi: f64) -> f64 {
    2.0 * PI * (xi / 10.0).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthReport {
    /// Aggregate focal parameter ξ.
    pub xi: f64,
    /// FWHM of |F|² in Φ [rad].
    pub delta_phi: f64,
    /// Photon bandwidth Δω_s = Δω_i [rad/s].
    pub delta_omega: f64,
    /// 2π·max(1, ξ/10) [rad].
    pub heuristic_phi: f64,
    /// (2πc/|n'_s − n'_i|)·max(1/L, 1/(10b)) [rad/s].
    pub heuristic_omega: f64,
    /// Aggregate confocal length b = L/ξ [m].
    pub confocal_b: f64,
    /// Set when a nonzero pump bandwidth was ignored.
    pub pump_bw_ignored: bool,
}

/// Photon bandwidth for a monochromatic pump.
pub fn photon_bandwidth(src: &PhysicalSource) -> Result<BandwidthReport> {
    let cfg = model::reduce(src)?;
    let xi = aux_params(&cfg).xi_agg;
    let delta_phi = phi_bandwidth(xi)?;
    let contrast = src.group_index_contrast().abs();
    let b = src.length / xi;
    Ok(BandwidthReport {
        xi,
        delta_phi,
        delta_omega: delta_phi * consts::C / (contrast * src.length),
        heuristic_phi: heuristic_phi_bandwidth(xi),
        heuristic_omega: 2.0 * PI * consts::C / contrast * (1.0 / src.length).max(1.0 / (10.0 * b)),
        confocal_b: b,
        pump_bw_ignored: src.pump_bw > 0.0,
    })
}
