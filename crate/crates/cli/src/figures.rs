//! CSV data for the seven figures.

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use spdc_core::collection::{heralding_ratios, pair_asymptote_rel, pair_probability_exact, pair_probability_rel};
use spdc_core::model::{reduce, worst_case_c, worst_typical_source};
use spdc_core::overlap::PhaseMatchKernel;
use spdc_core::pareto::{frontier, Metric};
use spdc_core::purity::{purity_curve_with, PumpSearch};
use spdc_core::spectral::{heuristic_phi_bandwidth, phi_bandwidth, relative_peak_density};
use spdc_core::DimensionlessConfig;

/// Angles (degrees) of the purity curves.
pub const PURITY_THETAS: [f64; 5] = [-5.0, 0.0, 15.0, 30.0, 45.0];

#[derive(Debug, Clone, Copy, Default)]
pub struct FigureOpts {
    /// Coarse sampling for smoke runs.
    pub quick: bool,
}

impl FigureOpts {
    fn pick(&self, full: usize, quick: usize) -> usize {
        if self.quick {
            quick
        } else {
            full
        }
    }
}

pub struct Csv {
    pub name: &'static str,
    pub header: &'static str,
    pub rows: Vec<String>,
}

/// Nine significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.8e}")
}

fn row(values: &[f64]) -> String {
    values.iter().map(|&v| num(v)).collect::<Vec<_>>().join(",")
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)).collect()
}

/// |F| against Φ at several ξ.
pub fn fig1(opts: &FigureOpts) -> Result<Csv> {
    let n = opts.pick(481, 25);
    let (lo, hi) = (-8.0 * PI, 4.0 * PI);
    let mut rows = Vec::new();
    for xi in [0.1, 0.5, 1.0, 2.84, 10.0, 100.0] {
        let k = PhaseMatchKernel::new(xi, 0.0, lo.abs().max(hi))?;
        for j in 0..n {
            let phi = lo + (hi - lo) * j as f64 / (n - 1) as f64;
            rows.push(row(&[xi, phi, k.eval(phi).norm()]));
        }
    }
    Ok(Csv { name: "fig1.csv", header: "xi [1],phi [rad],absF [1]", rows })
}

/// Peak spectral density relative to its optimum over (ξ_p, ξ_s = ξ_i).
pub fn fig2(opts: &FigureOpts) -> Result<Csv> {
    let axis = log_space(0.1, 100.0, opts.pick(31, 4));
    let rows = axis
        .par_iter()
        .flat_map_iter(|&xp| axis.iter().map(move |&xs| row(&[xp, xs, relative_peak_density(xp, xs)])))
        .collect();
    Ok(Csv { name: "fig2.csv", header: "xi_p [1],xi_s [1],rel_density [1]", rows })
}

/// Φ bandwidth against ξ with the 2π·max(1, ξ/10) heuristic.
pub fn fig3(opts: &FigureOpts) -> Result<Csv> {
    let rows = log_space(1e-2, 1e3, opts.pick(61, 6))
        .par_iter()
        .map(|&xi| Ok(row(&[xi, phi_bandwidth(xi)?, heuristic_phi_bandwidth(xi)])))
        .collect::<Result<_>>()?;
    Ok(Csv { name: "fig3.csv", header: "xi [1],delta_phi [rad],heuristic [rad]", rows })
}

/// Pair probability over its asymptote, standard approximation and exact
/// quadratic kernel for the worst typical source.
pub fn fig4(opts: &FigureOpts) -> Result<Csv> {
    let src = worst_typical_source();
    let c = worst_case_c(&src);
    let base = reduce(&src)?;
    let rows = log_space(1e-2, 1e2, opts.pick(41, 5))
        .par_iter()
        .map(|&xi| {
            let cfg = DimensionlessConfig { xi_p: xi, xi_s: xi, xi_i: xi, ..base };
            let max = pair_asymptote_rel(&cfg);
            let exact = pair_probability_exact(&cfg, c)?;
            Ok(row(&[xi, pair_probability_rel(&cfg) / max, exact / max]))
        })
        .collect::<Result<_>>()?;
    Ok(Csv {
        name: "fig4.csv",
        header: "xi [1],p_rel_approx [fraction of max],p_rel_exact_worstcase [fraction of max]",
        rows,
    })
}

/// Pair probability over its asymptote against (ξ_p, ξ_s = ξ_i).
pub fn fig5(opts: &FigureOpts) -> Result<Csv> {
    let axis = log_space(1e-2, 1e3, opts.pick(41, 4));
    let mut rows = Vec::new();
    for &xp in &axis {
        for &xs in &axis {
            let r = heralding_ratios(&DimensionlessConfig::with_foci(xp, xs, xs, 0.5, 0.5));
            rows.push(row(&[xp, xs, r.p_si_frac]));
        }
    }
    Ok(Csv { name: "fig5.csv", header: "xi_p [1],xi_s [1],p_si_rel [fraction of max]", rows })
}

/// Optimized purity against ξ for several θ.
pub fn fig6(opts: &FigureOpts) -> Result<Csv> {
    let (thetas, xis, search): (Vec<f64>, _, _) = if opts.quick {
        (vec![0.0, 45.0], log_space(0.5, 5.0, 2), PumpSearch { n_coarse: 48, n_fine: 96, per_decade: 2, ..PumpSearch::default() })
    } else {
        (PURITY_THETAS.to_vec(), log_space(0.1, 30.0, 13), PumpSearch::default())
    };
    let mut rows = Vec::new();
    for deg in thetas {
        for p in purity_curve_with(deg.to_radians(), &xis, &search)? {
            rows.push(row(&[deg, p.xi, p.purity_star, p.bw_star]));
        }
    }
    Ok(Csv { name: "fig6.csv", header: "theta_deg [deg],xi [1],purity [1],bw_star [Omega]", rows })
}

/// Pareto frontiers for both metrics at degenerate wavenumbers.
pub fn fig7(opts: &FigureOpts) -> Result<Csv> {
    let n = opts.pick(50, 8);
    let mut rows = Vec::new();
    for metric in [Metric::Signal, Metric::Symmetric] {
        for p in frontier(metric, 0.5, 0.5, n)? {
            rows.push(format!("{metric},{}", row(&[p.xi_p, p.xi_s, p.xi_i, p.p_si_rel, p.eta])));
        }
    }
    Ok(Csv {
        name: "fig7.csv",
        header: "metric,xi_p [1],xi_s [1],xi_i [1],p_si_rel [fraction of max],eta [1]",
        rows,
    })
}

pub const ALL: [fn(&FigureOpts) -> Result<Csv>; 7] = [fig1, fig2, fig3, fig4, fig5, fig6, fig7];

/// Writes `csv` into `dir` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, csv: &Csv) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(csv.name);
    let tmp = dir.join(format!(".{}.{}.tmp", csv.name, std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        writeln!(f, "{}", csv.header)?;
        for r in &csv.rows {
            writeln!(f, "{r}")?;
        }
        f.into_inner()?.sync_all()?;
        std::fs::rename(&tmp, &path)
    };
    write().map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        e
    })
    .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}
