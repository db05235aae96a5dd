//! Schmidt decomposition and single-photon spectral purity of sampled JSAs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, SpdcError};
use crate::model::DimensionlessConfig;
use crate::numerics::{complex_matmul, golden_max, singular_values};
use crate::spectral::{build_jsa, build_jsa_in, build_jsa_on, phi_extent, JsaGrid, JsaSpec};

/// Schmidt weights below this are not counted in `n_kept`.
pub const KEPT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtResult {
    /// Schmidt weights, nonincreasing, summing to 1.
    pub sigmas: Vec<f64>,
    pub purity: f64,
    pub schmidt_number: f64,
    pub n_kept: usize,
}

/// Schmidt weights from the singular values of the grid matrix.
pub fn schmidt(grid: &JsaGrid) -> SchmidtResult {
    schmidt_of(&grid.values)
}

pub fn schmidt_of(values: &DMatrix<Complex64>) -> SchmidtResult {
    let sv = singular_values(values);
    let mut sigmas: Vec<f64> = sv.iter().map(|s| s * s).collect();
    sigmas.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = sigmas.iter().sum();
    if total > 0.0 {
        sigmas.iter_mut().for_each(|s| *s /= total);
    }
    let purity = sigmas.iter().map(|s| s * s).sum::<f64>();
    let n_kept = sigmas.iter().filter(|&&s| s > KEPT_THRESHOLD).count();
    SchmidtResult { sigmas, purity, schmidt_number: 1.0 / purity, n_kept }
}

/// Purity as tr(G²)/tr(G)² with G = M†M, without a decomposition.
pub fn purity_gram(values: &DMatrix<Complex64>) -> f64 {
    // Work with the smaller Gram matrix.
    let g = if values.nrows() >= values.ncols() {
        complex_matmul(&values.adjoint(), values)
    } else {
        complex_matmul(values, &values.adjoint())
    };
    let tr: f64 = g.diagonal().iter().map(|z| z.re).sum();
    let tr2: f64 = g.iter().map(|z| z.norm_sqr()).sum();
    tr2 / (tr * tr)
}

/// |⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩) over two grids on identical axes.
pub fn fidelity(a: &JsaGrid, b: &JsaGrid) -> Result<f64> {
    if !a.same_axes(b) {
        return Err(SpdcError::AxisMismatch);
    }
    let mut overlap = Complex64::new(0.0, 0.0);
    let (mut na, mut nb) = (0.0, 0.0);
    for (u, v) in a.values.iter().zip(b.values.iter()) {
        overlap += u.conj() * v;
        na += u.norm_sqr();
        nb += v.norm_sqr();
    }
    Ok((overlap.norm_sqr() / (na * nb)).min(1.0))
}

/// Fidelity between the JSA with quadratic kernel term `c` and the standard
/// approximation (c = 0), sampled on a grid that contains both.
pub fn approximation_fidelity(cfg: &DimensionlessConfig, c: f64, n_points: usize) -> Result<f64> {
    let spec = JsaSpec { n_points, ..JsaSpec::default() };
    let approx = build_jsa(cfg, &spec)?;
    let exact = build_jsa(cfg, &JsaSpec { c, ..spec })?;
    let cover = |a: &[f64], b: &[f64]| {
        let lo = a[0].min(b[0]);
        let hi = a[a.len() - 1].max(b[b.len() - 1]);
        (0..n_points)
            .map(|k| lo + (hi - lo) * k as f64 / (n_points - 1) as f64)
            .collect::<Vec<_>>()
    };
    let xs = cover(&approx.ds_axis, &exact.ds_axis);
    let ys = cover(&approx.di_axis, &exact.di_axis);
    let a = build_jsa_on(cfg, xs.clone(), ys.clone(), 0.0)?;
    let b = build_jsa_on(cfg, xs, ys, c)?;
    fidelity(&a, &b)
}

/// Settings for the pump-bandwidth search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpSearch {
    /// Search interval for Δω_p/Ω.
    pub bw_lo: f64,
    pub bw_hi: f64,
    /// Coarse scan points per decade and grid size for the coarse scan.
    pub per_decade: usize,
    pub n_coarse: usize,
    /// Grid size for the refinement and the reported purity.
    pub n_fine: usize,
    /// Refinement tolerance in log₁₀ bandwidth.
    pub log_tol: f64,
}

impl Default for PumpSearch {
    fn default() -> Self {
        PumpSearch { bw_lo: 1e-2, bw_hi: 1e3, per_decade: 5, n_coarse: 128, n_fine: 512, log_tol: 5e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpOptimum {
    pub bw_star: f64,
    pub purity_star: f64,
    /// Set when the optimum sits at an end of the search interval, where the
    /// true optimum may lie outside it (expected as θ → 0).
    pub at_search_edge: bool,
}

/// Purity of the JSA of `cfg` on an `n_points` grid.
pub fn jsa_purity(cfg: &DimensionlessConfig, n_points: usize) -> Result<f64> {
    let grid = build_jsa(cfg, &JsaSpec { n_points, ..JsaSpec::default() })?;
    Ok(purity_gram(&grid.values))
}

/// Pump bandwidth maximizing purity for equal foci ξ at angle θ.
pub fn optimize_pump_bandwidth(xi: f64, theta: f64) -> Result<PumpOptimum> {
    optimize_pump_bandwidth_with(xi, theta, &PumpSearch::default())
}

pub fn optimize_pump_bandwidth_with(xi: f64, theta: f64, search: &PumpSearch) -> Result<PumpOptimum> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(SpdcError::InvalidConfig(format!("ξ must be positive, got {xi}")));
    }
    if !(search.bw_lo > 0.0 && search.bw_hi > search.bw_lo) {
        return Err(SpdcError::InvalidConfig("empty pump bandwidth interval".into()));
    }
    let base = DimensionlessConfig::equal_foci(xi).with_theta(theta);
    base.validate()?;
    let extent = phi_extent(xi, 0.0)?;
    let at = |log_bw: f64, n_points: usize| {
        let cfg = base.with_pump_bw(10f64.powf(log_bw));
        let grid = build_jsa_in(&cfg, &JsaSpec { n_points, ..JsaSpec::default() }, extent)?;
        Ok::<_, SpdcError>(purity_gram(&grid.values))
    };

    let (lo, hi) = (search.bw_lo.log10(), search.bw_hi.log10());
    let steps = (((hi - lo) * search.per_decade as f64).ceil() as usize).max(2);
    let coarse: Vec<f64> = (0..=steps).map(|k| lo + (hi - lo) * k as f64 / steps as f64).collect();
    let mut best = (0, f64::NEG_INFINITY);
    for (k, &lb) in coarse.iter().enumerate() {
        let p = at(lb, search.n_coarse)?;
        if p > best.1 {
            best = (k, p);
        }
    }
    let k = best.0;
    let a = coarse[k.saturating_sub(1)];
    let b = coarse[(k + 1).min(steps)];

    let mut failure = None;
    let (log_star, p_star) = golden_max(
        |lb| match at(lb, search.n_fine) {
            Ok(p) => p,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        a,
        b,
        search.log_tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    // Golden section never evaluates the interval ends; compare them too.
    let mut star = (log_star, p_star);
    let edge = if k == 0 { Some(lo) } else if k == steps { Some(hi) } else { None };
    if let Some(e) = edge {
        let p = at(e, search.n_fine)?;
        if p >= star.1 {
            star = (e, p);
        }
    }
    let span = search.log_tol.max(1e-9);
    let at_search_edge = (star.0 - lo).abs() <= span || (hi - star.0).abs() <= span;
    Ok(PumpOptimum { bw_star: 10f64.powf(star.0), purity_star: star.1, at_search_edge })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurityPoint {
    pub xi: f64,
    pub bw_star: f64,
    pub purity_star: f64,
    pub at_search_edge: bool,
}

/// Optimized purity at each ξ; entries are independent and run in parallel.
pub fn purity_curve(theta: f64, xis: &[f64]) -> Result<Vec<PurityPoint>> {
    purity_curve_with(theta, xis, &PumpSearch::default())
}

pub fn purity_curve_with(theta: f64, xis: &[f64], search: &PumpSearch) -> Result<Vec<PurityPoint>> {
    xis.par_iter()
        .map(|&xi| {
            let o = optimize_pump_bandwidth_with(xi, theta, search)?;
            Ok(PurityPoint { xi, bw_star: o.bw_star, purity_star: o.purity_star, at_search_edge: o.at_search_edge })
        })
        .collect()
}

/// ξ maximizing the optimized purity over [xi_lo, xi_hi] (golden section in
/// log ξ).
pub fn peak_purity(theta: f64, xi_lo: f64, xi_hi: f64, search: &PumpSearch) -> Result<PurityPoint> {
    let mut failure = None;
    let mut best: Option<PurityPoint> = None;
    golden_max(
        |lx| {
            let xi = 10f64.powf(lx);
            match optimize_pump_bandwidth_with(xi, theta, search) {
                Ok(o) => {
                    if best.is_none_or(|b| o.purity_star > b.purity_star) {
                        best = Some(PurityPoint {
                            xi,
                            bw_star: o.bw_star,
                            purity_star: o.purity_star,
                            at_search_edge: o.at_search_edge,
                        });
                    }
                    o.purity_star
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NEG_INFINITY
                }
            }
        },
        xi_lo.log10(),
        xi_hi.log10(),
        5e-3,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(best.expect("golden section evaluates at least twice")),
    }
}
