//! Brightness–heralding trade-off: focal parameters maximizing a heralding
//! ratio at fixed pair-collection probability.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collection::{heralding_ratios, pair_asymptote_rel};
use crate::error::{Result, SpdcError};
use crate::model::{aux_params, DimensionlessConfig};
use crate::numerics::nelder_mead;

/// Bounds on each focal parameter.
pub const XI_MIN: f64 = 1e-3;
pub const XI_MAX: f64 = 1e3;
/// Nelder–Mead starting points per level.
pub const SEEDS: usize = 8;

const GRID: usize = 49;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// η_s = P_si/P_s
    Signal,
    /// η_si = P_si/√(P_s P_i)
    Symmetric,
}

impl Metric {
    pub fn eta(self, cfg: &DimensionlessConfig) -> f64 {
        let r = heralding_ratios(cfg);
        match self {
            Metric::Signal => r.eta_s,
            Metric::Symmetric => r.eta_si,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Signal => "signal",
            Metric::Symmetric => "symmetric",
        })
    }
}

impl FromStr for Metric {
    type Err = SpdcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signal" => Ok(Metric::Signal),
            "symmetric" => Ok(Metric::Symmetric),
            _ => Err(SpdcError::InvalidConfig(format!("unknown metric `{s}` (expected signal or symmetric)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub xi_p: f64,
    pub xi_s: f64,
    pub xi_i: f64,
    /// Pair probability over its asymptotic maximum.
    pub p_si_rel: f64,
    pub eta: f64,
    pub metric: Metric,
}

/// Foci with ξ_s = r_s ξ_p and ξ_i = r_i ξ_p whose pair probability is
/// `level` times the asymptotic maximum, or `None` when no ξ_p in the box
/// achieves it.
///
/// A₊ and B₊ depend only on the ratios, so arctan(ξ)/(A₊B₊) = target fixes
/// the aggregate ξ and with it ξ_p.
pub fn foci_at_level(level: f64, r_s: f64, r_i: f64, ks_over_kp: f64, ki_over_kp: f64) -> Option<DimensionlessConfig> {
    let base = DimensionlessConfig::with_foci(1.0, r_s, r_i, ks_over_kp, ki_over_kp);
    let aux = aux_params(&base);
    let angle = level * pair_asymptote_rel(&base) * aux.a_plus * aux.b_plus;
    if !(angle > 0.0 && angle < std::f64::consts::FRAC_PI_2) {
        return None;
    }
    // aux.xi_agg is the aggregate ξ per unit ξ_p
    let xi_p = angle.tan() / aux.xi_agg;
    let cfg = DimensionlessConfig::with_foci(xi_p, r_s * xi_p, r_i * xi_p, ks_over_kp, ki_over_kp);
    let inside = |x: f64| (XI_MIN..=XI_MAX).contains(&x);
    (inside(cfg.xi_p) && inside(cfg.xi_s) && inside(cfg.xi_i)).then_some(cfg)
}

fn check_ratios(ks_over_kp: f64, ki_over_kp: f64) -> Result<()> {
    let ok = |x: f64| x > 0.0 && x < 1.0;
    if !(ok(ks_over_kp) && ok(ki_over_kp)) {
        return Err(SpdcError::InvalidConfig(format!(
            "wavenumber ratios must lie in (0, 1), got {ks_over_kp} and {ki_over_kp}"
        )));
    }
    DimensionlessConfig::with_foci(1.0, 1.0, 1.0, ks_over_kp, ki_over_kp).validate()
}

/// Maximizes the metric at one pair-probability level (a fraction of the
/// asymptotic maximum). `warm` adds (ξ_s/ξ_p, ξ_i/ξ_p) as an extra seed.
pub fn optimize_at_level(
    metric: Metric,
    ks_over_kp: f64,
    ki_over_kp: f64,
    level: f64,
    warm: Option<(f64, f64)>,
) -> Result<ParetoPoint> {
    check_ratios(ks_over_kp, ki_over_kp)?;
    if !(level > 0.0 && level < 1.0) {
        return Err(SpdcError::ConstraintInfeasible { level, max: 1.0 });
    }
    let objective = |u: &[f64]| match foci_at_level(level, u[0].exp(), u[1].exp(), ks_over_kp, ki_over_kp) {
        Some(cfg) => metric.eta(&cfg),
        None => f64::NEG_INFINITY,
    };

    // Ratios beyond the ξ box ratio can never be feasible.
    let span = (XI_MAX / XI_MIN).ln();
    let bounds = [(-span, span); 2];
    let cell = 2.0 * span / (GRID - 1) as f64;
    let mut grid: Vec<([f64; 2], f64)> = Vec::with_capacity(GRID * GRID);
    for a in 0..GRID {
        for b in 0..GRID {
            let u = [-span + cell * a as f64, -span + cell * b as f64];
            grid.push((u, objective(&u)));
        }
    }
    grid.sort_by(|x, y| y.1.total_cmp(&x.1));

    // Ratios minimizing A₊B₊; feasible for every level below the maximum.
    let d = 1.0 - ks_over_kp - ki_over_kp;
    let rs0 = ((ks_over_kp + d) / ((1.0 - d) * ks_over_kp)).sqrt();
    let ri0 = ((ki_over_kp + d) / ((1.0 - d) * ki_over_kp)).sqrt();
    let mut seeds: Vec<[f64; 2]> = vec![[rs0.ln(), ri0.ln()]];
    if let Some((rs, ri)) = warm {
        seeds.push([rs.ln(), ri.ln()]);
    }
    seeds.extend(grid.iter().filter(|g| g.1.is_finite()).take(SEEDS - seeds.len()).map(|g| g.0));

    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in &seeds {
        for step in [cell, 0.05 * cell] {
            let (u, v) = nelder_mead(&objective, s, &[step, step], &bounds, 1e-10, 4000);
            if best.as_ref().is_none_or(|b| v > b.1) {
                best = Some((u, v));
            }
        }
    }
    let (u, eta) = best.expect("at least one seed");
    let cfg = foci_at_level(level, u[0].exp(), u[1].exp(), ks_over_kp, ki_over_kp)
        .ok_or(SpdcError::ConstraintInfeasible { level, max: 1.0 })?;
    Ok(ParetoPoint {
        xi_p: cfg.xi_p,
        xi_s: cfg.xi_s,
        xi_i: cfg.xi_i,
        p_si_rel: heralding_ratios(&cfg).p_si_frac,
        eta,
        metric,
    })
}

/// Frontier at levels k/(n+1), k = 1..n, sorted by pair probability.
///
/// Levels are first optimized independently in parallel, then polished by
/// sweeps that seed each level with its neighbours' optimal focus ratios.
pub fn frontier(metric: Metric, ks_over_kp: f64, ki_over_kp: f64, n_points: usize) -> Result<Vec<ParetoPoint>> {
    check_ratios(ks_over_kp, ki_over_kp)?;
    let levels: Vec<f64> = (1..=n_points).map(|k| k as f64 / (n_points + 1) as f64).collect();
    let mut points = levels
        .par_iter()
        .map(|&l| optimize_at_level(metric, ks_over_kp, ki_over_kp, l, None))
        .collect::<Result<Vec<_>>>()?;

    let ratios = |p: &ParetoPoint| (p.xi_s / p.xi_p, p.xi_i / p.xi_p);
    for _ in 0..2 {
        let mut improved = false;
        let order: Vec<usize> = (1..n_points).chain((0..n_points.saturating_sub(1)).rev()).collect();
        for (pass, &k) in order.iter().enumerate() {
            let from = if pass < n_points - 1 { k - 1 } else { k + 1 };
            let cand = optimize_at_level(metric, ks_over_kp, ki_over_kp, levels[k], Some(ratios(&points[from])))?;
            if cand.eta > points[k].eta {
                points[k] = cand;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(points)
}

/// Largest frontier pair probability at which the metric still reaches
/// `eta_min`, or `None` if no point does.
pub fn max_level_with_eta(points: &[ParetoPoint], eta_min: f64) -> Option<f64> {
    points.iter().filter(|p| p.eta >= eta_min).map(|p| p.p_si_rel).reduce(f64::max)
}
