//! Command-line front end for `spdc-core`.

pub mod config;
pub mod figures;

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use spdc_core::collection::{pair_probability, pair_probability_exact, shared_prefactor, signal_probability_bound};
use spdc_core::model::{aux_params, reduce, validate_typicality};
use spdc_core::overlap::f_peak;
use spdc_core::pareto::{frontier, Metric};
use spdc_core::purity::{jsa_purity, purity_curve_with, PumpSearch};
use spdc_core::spectral::{max_spectral_amplitude, photon_bandwidth};
use spdc_core::{PhysicalSource, SpdcError};

use figures::{num, FigureOpts};

pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Figures of merit for collinear Gaussian-beam SPDC photon-pair sources.
#[derive(Parser, Debug)]
#[command(name = "spdc", version)]
pub struct Cli {
    /// Source configuration file (TOML).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory for CSV output.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Override a configuration value, e.g. `--set L=0.02`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal focusing: the maximum of |F| and the peak spectral amplitude.
    Peak,
    /// Photon bandwidth, exact and heuristic.
    Bandwidth,
    /// Pair collection probability and its upper bound.
    Pairs {
        /// Also integrate the phase-matching function with the quadratic term.
        #[arg(long)]
        exact: bool,
    },
    /// Heralding ratios.
    Heralding,
    /// Optimized purity against ξ (equal foci), as CSV on stdout.
    Purity {
        /// Group-index angle θ in degrees.
        #[arg(long, default_value_t = 45.0, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, default_value_t = 0.1)]
        xi_min: f64,
        #[arg(long, default_value_t = 30.0)]
        xi_max: f64,
        #[arg(long, default_value_t = 13)]
        xi_steps: usize,
        /// Grid points per axis for the reported purity.
        #[arg(long, default_value_t = 512)]
        grid: usize,
    },
    /// Brightness–heralding frontier, as CSV on stdout.
    Pareto {
        #[arg(long, value_enum, default_value_t = MetricArg::Signal)]
        metric: MetricArg,
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// Regenerate fig1.csv … fig7.csv in the output directory.
    Figures {
        /// Coarse sampling (seconds instead of minutes).
        #[arg(long)]
        quick: bool,
    },
    /// Every single-point quantity for the configured source.
    Report,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Signal,
    Symmetric,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Signal => Metric::Signal,
            MetricArg::Symmetric => Metric::Symmetric,
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    configure_threads();
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            exit_code(&e)
        }
    }
}

/// Numerical failures exit with 2, everything else with 1.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    match e.chain().find_map(|c| c.downcast_ref::<SpdcError>()) {
        Some(s) if s.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

/// Caps the worker pool at `SPDC_THREADS` when set.
fn configure_threads() {
    if let Some(n) = std::env::var("SPDC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // Fails harmlessly if the pool already exists.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn source(cli: &Cli) -> Result<Option<PhysicalSource>> {
    match &cli.config {
        Some(path) => Ok(Some(config::load_source(path, &cli.set)?)),
        None if !cli.set.is_empty() => bail!("--set needs --config"),
        None => Ok(None),
    }
}

fn require(src: Option<PhysicalSource>) -> Result<PhysicalSource> {
    src.context("this command needs a source configuration (--config FILE)")
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let src = source(cli)?;
    match &cli.command {
        Command::Peak => peak(src.as_ref(), out),
        Command::Bandwidth => bandwidth(&require(src)?, out),
        Command::Pairs { exact } => pairs(&require(src)?, *exact, out),
        Command::Heralding => heralding(&require(src)?, out),
        Command::Purity { theta, xi_min, xi_max, xi_steps, grid } => {
            purity(*theta, *xi_min, *xi_max, *xi_steps, *grid, out)
        }
        Command::Pareto { metric, points } => pareto(src.as_ref(), (*metric).into(), *points, out),
        Command::Figures { quick } => make_figures(&cli.out, FigureOpts { quick: *quick }, out),
        Command::Report => report(&require(src)?, out),
    }
}

fn peak(src: Option<&PhysicalSource>, out: &mut dyn Write) -> Result<()> {
    let p = f_peak();
    writeln!(out, "xi*      = {:.3}", p.xi_star)?;
    writeln!(out, "phi*/pi  = {:.3}", p.phi_star / PI)?;
    writeln!(out, "|F|max   = {:.3}", p.f_star)?;
    if let Some(src) = src {
        let a = max_spectral_amplitude(src)?;
        let unit = if a.per_unit_pump_amplitude { " per unit pump amplitude" } else { "" };
        writeln!(out, "max |psi|          = {}{unit}", num(a.amplitude))?;
        writeln!(out, "max |psi|^2        = {}{unit}", num(a.density))?;
        writeln!(out, "max |psi|^2 / N_p  = {}{unit}", num(a.density_per_pump_photon))?;
    }
    Ok(())
}

fn bandwidth(src: &PhysicalSource, out: &mut dyn Write) -> Result<()> {
    let b = photon_bandwidth(src)?;
    let to_nm = |dw: f64| src.lambda_s * src.lambda_s * dw / (2.0 * PI * spdc_core::model::consts::C) * 1e9;
    writeln!(out, "xi (aggregate)        = {:.4}", b.xi)?;
    writeln!(out, "confocal b [m]        = {}", num(b.confocal_b))?;
    writeln!(out, "delta_phi [rad]       = {:.4}", b.delta_phi)?;
    writeln!(out, "delta_omega [rad/s]   = {}", num(b.delta_omega))?;
    writeln!(out, "delta_lambda_s [nm]   = {:.4}", to_nm(b.delta_omega))?;
    writeln!(out, "heuristic_phi [rad]   = {:.4}", b.heuristic_phi)?;
    writeln!(out, "heuristic_omega [rad/s] = {}", num(b.heuristic_omega))?;
    if b.pump_bw_ignored {
        writeln!(out, "note: pump bandwidth is ignored in the photon bandwidth")?;
    }
    Ok(())
}

fn pairs(src: &PhysicalSource, exact: bool, out: &mut dyn Write) -> Result<()> {
    let cfg = reduce(src)?;
    let r = pair_probability(&cfg, Some(src))?;
    writeln!(out, "P_si relative         = {:.6}", r.p_si_rel)?;
    writeln!(out, "P_si / asymptote      = {:.6}", r.p_si_frac)?;
    writeln!(out, "P_si (absolute)       = {}", num(r.p_si.unwrap_or(f64::NAN)))?;
    writeln!(out, "P_si bound            = {}", num(r.p_si_bound.unwrap_or(f64::NAN)))?;
    if exact {
        let c = aux_params(&cfg).c_param;
        let rel = pair_probability_exact(&cfg, c)?;
        writeln!(out, "C                     = {}", num(c))?;
        writeln!(out, "P_si relative (exact) = {:.6}", rel)?;
        writeln!(out, "P_si (exact)          = {}", num(rel * shared_prefactor(src)?))?;
        writeln!(out, "approximation error   = {:.3e}", 1.0 - r.p_si_rel / rel)?;
    }
    Ok(())
}

fn heralding(src: &PhysicalSource, out: &mut dyn Write) -> Result<()> {
    let r = pair_probability(&reduce(src)?, Some(src))?;
    writeln!(out, "eta_s  = {:.3}", r.eta_s)?;
    writeln!(out, "eta_i  = {:.3}", r.eta_i)?;
    writeln!(out, "eta_si = {:.3}", r.eta_si)?;
    Ok(())
}

fn purity(theta: f64, xi_min: f64, xi_max: f64, steps: usize, grid: usize, out: &mut dyn Write) -> Result<()> {
    if !(xi_min > 0.0 && xi_max >= xi_min && steps >= 1) {
        bail!("need 0 < xi-min <= xi-max and xi-steps >= 1");
    }
    let xis: Vec<f64> = (0..steps)
        .map(|k| {
            let t = if steps == 1 { 0.0 } else { k as f64 / (steps - 1) as f64 };
            xi_min * (xi_max / xi_min).powf(t)
        })
        .collect();
    let search = PumpSearch { n_fine: grid, ..PumpSearch::default() };
    let points = purity_curve_with(theta.to_radians(), &xis, &search)?;
    writeln!(out, "theta_deg [deg],xi [1],purity [1],bw_star [Omega],at_search_edge")?;
    for p in points {
        writeln!(out, "{},{},{},{},{}", num(theta), num(p.xi), num(p.purity_star), num(p.bw_star), p.at_search_edge)?;
    }
    Ok(())
}

fn pareto(src: Option<&PhysicalSource>, metric: Metric, points: usize, out: &mut dyn Write) -> Result<()> {
    let (ks, ki) = match src {
        Some(s) => {
            let c = reduce(s)?;
            (c.ks_over_kp, c.ki_over_kp)
        }
        None => (0.5, 0.5),
    };
    let f = frontier(metric, ks, ki, points)?;
    writeln!(out, "metric,xi_p [1],xi_s [1],xi_i [1],p_si_rel [fraction of max],eta [1]")?;
    for p in f {
        writeln!(out, "{metric},{},{},{},{},{}", num(p.xi_p), num(p.xi_s), num(p.xi_i), num(p.p_si_rel), num(p.eta))?;
    }
    Ok(())
}

fn make_figures(dir: &Path, opts: FigureOpts, out: &mut dyn Write) -> Result<()> {
    for fig in figures::ALL {
        let csv = fig(&opts)?;
        let path = figures::write_atomic(dir, &csv)?;
        writeln!(out, "wrote {} ({} rows)", path.display(), csv.rows.len())?;
    }
    Ok(())
}

fn report(src: &PhysicalSource, out: &mut dyn Write) -> Result<()> {
    let cfg = reduce(src)?;
    let aux = aux_params(&cfg);
    writeln!(out, "[focusing]")?;
    writeln!(out, "xi_p = {:.6}  xi_s = {:.6}  xi_i = {:.6}", cfg.xi_p, cfg.xi_s, cfg.xi_i)?;
    writeln!(out, "xi (aggregate) = {:.6}", aux.xi_agg)?;
    writeln!(out, "k_s/k_p = {:.6}  k_i/k_p = {:.6}  dk/k_p = {:.3e}", cfg.ks_over_kp, cfg.ki_over_kp, cfg.dk_over_kp)?;
    writeln!(out, "phi0 [rad] = {:.6}", cfg.phi0)?;
    writeln!(out, "theta [deg] = {:.4}", cfg.theta.to_degrees())?;
    writeln!(out, "Omega [rad/s] = {}", num(cfg.omega))?;
    writeln!(out, "C = {}", num(aux.c_param))?;
    writeln!(out)?;
    writeln!(out, "[peak]")?;
    peak(Some(src), out)?;
    writeln!(out)?;
    writeln!(out, "[bandwidth]")?;
    bandwidth(src, out)?;
    writeln!(out)?;
    writeln!(out, "[pairs]")?;
    pairs(src, false, out)?;
    writeln!(out, "P_s bound             = {}", num(signal_probability_bound(src)?))?;
    writeln!(out)?;
    writeln!(out, "[heralding]")?;
    heralding(src, out)?;
    if cfg.pump_bw_scaled > 0.0 {
        writeln!(out)?;
        writeln!(out, "[purity]")?;
        writeln!(out, "pump bw / Omega = {:.6}", cfg.pump_bw_scaled)?;
        writeln!(out, "purity (256 grid) = {:.6}", jsa_purity(&cfg, 256)?)?;
    }
    let warnings = validate_typicality(src);
    if !warnings.is_empty() {
        writeln!(out)?;
        writeln!(out, "[warnings]")?;
        for w in warnings {
            writeln!(out, "{w}")?;
        }
    }
    Ok(())
}
