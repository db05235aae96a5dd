//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p spdc-core --test acceptance`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use spdc_core::collection::{
    heralding_ratios, pair_probability_bound, pair_probability_exact, pair_probability_rel, signal_probability,
    signal_probability_lg_sum,
};
use spdc_core::model::{reduce, worst_case_c, worst_typical_source};
use spdc_core::overlap::{find_f_peak, phase_match_f};
use spdc_core::pareto::{frontier, max_level_with_eta, Metric};
use spdc_core::purity::{approximation_fidelity, jsa_purity, optimize_pump_bandwidth, peak_purity, PumpSearch};
use spdc_core::spectral::phi_bandwidth;
use spdc_core::{DimensionlessConfig, PhysicalSource};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo && x <= hi
}

fn f_peak_regression() -> Outcome {
    let p = find_f_peak();
    let ratio = p.phi_star / PI;
    let pass = within(p.xi_star, 2.81, 2.87) && within(ratio, -1.05, -1.03) && within(p.f_star, 2.05, 2.07);
    outcome(pass, format!("xi*={:.4} phi*/pi={:.4} |F|max={:.4}", p.xi_star, ratio, p.f_star))
}

fn sinc_limit() -> Outcome {
    let xi = 1e-3;
    let mut worst = 0.0f64;
    for k in 0..=2000 {
        let phi = -4.0 * PI + 8.0 * PI * k as f64 / 2000.0;
        let f = phase_match_f(xi, phi).expect("F").norm() / (2.0 * xi.sqrt());
        let x = phi / 2.0;
        let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
        worst = worst.max((f - sinc.abs()).abs());
    }
    outcome(worst < 1e-3, format!("max deviation {worst:.3e} (< 1e-3)"))
}

/// FWHM of sinc²(Φ/2) by bisection: independent of the F machinery.
fn sinc_squared_fwhm() -> f64 {
    let g = |phi: f64| {
        let x = phi / 2.0;
        (x.sin() / x).powi(2) - 0.5
    };
    let (mut a, mut b) = (1e-6, PI);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if g(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    a + b
}

fn bandwidth() -> Outcome {
    let oracle = sinc_squared_fwhm();
    let small = phi_bandwidth(1e-3).expect("bandwidth");
    let mut pass = (small - 5.566).abs() <= 0.01 && (small - oracle).abs() <= 0.01;
    let mut detail = format!("dPhi(1e-3)={small:.4} oracle={oracle:.4};");
    for xi in [0.1, 1.0, 3.0, 10.0, 30.0, 100.0] {
        let r = phi_bandwidth(xi).expect("bandwidth") / (2.0 * PI * (xi / 10.0).max(1.0));
        pass &= within(r, 0.5, 1.5);
        detail += &format!(" {xi}:{r:.3}");
    }
    outcome(pass, detail)
}

fn pair_probability() -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    // Equal foci, degenerate: A₊ = B₊ = 2; unequal foci from the definitions.
    for (xp, xs, xi) in [(2.2, 2.2, 2.2), (1.0, 3.0, 0.5), (10.0, 2.0, 7.0)] {
        let cfg = DimensionlessConfig::with_foci(xp, xs, xi, 0.5, 0.5);
        let a = 1.0 + 0.5 * xs / xp + 0.5 * xi / xp;
        let b = 1.0 + 0.5 * xp / xs + 0.5 * xp / xi;
        let closed = (b / a * xs * xi / xp).atan() / (a * b);
        let phi_route = pair_probability_exact(&cfg, 0.0).expect("exact");
        let rel = pair_probability_rel(&cfg);
        pass &= (rel / closed - 1.0).abs() < 1e-12 && (phi_route / rel - 1.0).abs() < 1e-4;
    }
    let frac = heralding_ratios(&DimensionlessConfig::equal_foci(2.2)).p_si_frac;
    pass &= (frac - 0.728).abs() <= 0.005;
    detail += &format!("frac(2.2)={frac:.4};");

    let src = worst_typical_source();
    let base = pair_probability_bound(&src).expect("bound");
    let mut worst = 0.0f64;
    for tweak in 0..4 {
        let mut s = src.clone();
        match tweak {
            0 => s.length *= 10.0,
            1 => s.w_p *= 10.0,
            2 => s.w_s *= 10.0,
            _ => s.w_i *= 10.0,
        }
        worst = worst.max((pair_probability_bound(&s).expect("bound") / base - 1.0).abs());
    }
    pass &= worst < 1e-12;
    detail += &format!(" bound variation {worst:.1e}");
    outcome(pass, detail)
}

fn exact_c_envelope() -> Outcome {
    let src = worst_typical_source();
    let c = worst_case_c(&src);
    let mut pass = true;
    let mut detail = format!("C={c:.4};");
    for (xi, limit) in [(1.0, 0.04 + 0.02), (10.0, 0.13 + 0.05), (100.0, 0.20 + 0.05)] {
        let cfg = reduce(&src).expect("reduce");
        let cfg = DimensionlessConfig { xi_p: xi, xi_s: xi, xi_i: xi, ..cfg };
        let err = (1.0 - pair_probability_rel(&cfg) / pair_probability_exact(&cfg, c).expect("exact")).abs();
        pass &= err <= limit;
        detail += &format!(" {xi}:{err:.4}");
    }
    outcome(pass, detail)
}

fn heralding() -> Outcome {
    let mut worst = 0.0f64;
    for xi in [0.01, 0.5, 2.84, 40.0] {
        let r = heralding_ratios(&DimensionlessConfig::equal_foci(xi));
        worst = worst.max((r.eta_s - 0.75).abs()).max((r.eta_i - 0.75).abs());
    }
    let cases = [
        DimensionlessConfig::equal_foci(0.3),
        DimensionlessConfig::equal_foci(30.0),
        DimensionlessConfig::with_foci(1.0, 2.0, 5.0, 0.5, 0.5),
        DimensionlessConfig::with_foci(3.0, 0.5, 1.0, 0.6, 0.4),
        DimensionlessConfig::with_foci(10.0, 20.0, 3.0, 0.45, 0.55),
    ];
    let mut sum_err = 0.0f64;
    for cfg in cases {
        let s = signal_probability_lg_sum(&cfg, 1e-10).expect("mode sum");
        sum_err = sum_err.max((s / signal_probability(&cfg) - 1.0).abs());
    }
    outcome(
        worst <= 1e-12 && sum_err <= 1e-6,
        format!("|eta-0.75| max {worst:.1e}; mode-sum rel err {sum_err:.1e}"),
    )
}

fn fidelity() -> Outcome {
    let src = worst_typical_source();
    let c = worst_case_c(&src);
    let mut pass = true;
    let mut detail = String::new();
    for (xi, target, tol) in [(1.0, 0.999, 0.005), (10.0, 0.97, 0.01), (100.0, 0.91, 0.02)] {
        let cfg = reduce(&src).expect("reduce");
        let cfg = DimensionlessConfig { xi_p: xi, xi_s: xi, xi_i: xi, ..cfg }.with_pump_bw(3.0);
        let f = approximation_fidelity(&cfg, c, 512).expect("fidelity");
        pass &= (f - target).abs() <= tol;
        detail += &format!(" {xi}:{f:.4}");
    }
    outcome(pass, detail)
}

fn purity() -> Outcome {
    let search = PumpSearch::default();
    let peak = peak_purity(FRAC_PI_4, 1.0, 5.0, &search).expect("purity peak");
    let mut pass = within(peak.purity_star, 0.93, 0.95) && within(peak.xi, 1.9, 2.5);
    let mut detail = format!("peak rho={:.4} at xi={:.3} (bw*={:.3});", peak.purity_star, peak.xi, peak.bw_star);
    for (xi, deg) in [(1.0f64, 20.0f64), (2.2, 30.0), (3.0, 10.0)] {
        let a = optimize_pump_bandwidth(xi, deg.to_radians()).expect("purity");
        let b = optimize_pump_bandwidth(xi, (90.0 - deg).to_radians()).expect("purity");
        let d = (a.purity_star - b.purity_star).abs();
        pass &= d < 1e-3;
        detail += &format!(" {deg}/{}: {d:.1e}", 90.0 - deg);
    }
    outcome(pass, detail)
}

fn pareto() -> Outcome {
    let signal = frontier(Metric::Signal, 0.5, 0.5, 50).expect("frontier");
    let symmetric = frontier(Metric::Symmetric, 0.5, 0.5, 50).expect("frontier");
    let violations = |f: &[spdc_core::pareto::ParetoPoint]| f.windows(2).filter(|w| w[1].eta > w[0].eta).count();
    let s = max_level_with_eta(&signal, 0.95).unwrap_or(f64::NAN);
    let b = max_level_with_eta(&symmetric, 0.95).unwrap_or(f64::NAN);
    let v = violations(&signal) + violations(&symmetric);
    outcome(
        s <= 0.25 * 1.2 && b <= 0.10 * 1.2 && v == 0,
        format!("eta_s>=0.95 up to {s:.4}; eta_si>=0.95 up to {b:.4}; violations {v}"),
    )
}

fn scaled(src: &PhysicalSource, s: f64) -> PhysicalSource {
    let k = 2.0 * PI / src.poling_period;
    let dk = src.k_p() - src.k_s() - src.k_i();
    let mut out = src.clone();
    out.length *= s;
    out.w_p *= s.sqrt();
    out.w_s *= s.sqrt();
    out.w_i *= s.sqrt();
    out.pump_bw /= s;
    // Hold the phase offset (Δk + mK)L fixed.
    let target = (dk + src.m_qpm as f64 * k) / s - dk;
    out.poling_period = src.m_qpm as f64 * 2.0 * PI / target;
    out
}

fn scale_invariance() -> Outcome {
    // PPKTP-like, first-order poling near phase matching.
    let mut src = PhysicalSource {
        lambda_p: 775e-9,
        lambda_s: 1550e-9,
        lambda_i: 1550e-9,
        n_p: 1.8447,
        n_s: 1.8155,
        n_i: 1.7330,
        np_g: 1.8200,
        ns_g: 1.8523,
        ni_g: 1.7553,
        length: 10e-3,
        poling_period: 46.2e-6,
        m_qpm: -1,
        chi_eff: 4.8e-12,
        epsilon: 0.4,
        pump_photons: 1.0,
        w_p: 30e-6,
        w_s: 40e-6,
        w_i: 50e-6,
        pump_bw: 1e12,
    };
    // Poling period giving Φ₀ = (Δk − K)L = −2.5.
    let dk = src.k_p() - src.k_s() - src.k_i();
    src.poling_period = 2.0 * PI / (dk + 2.5 / src.length);
    let base = reduce(&src).expect("reduce");
    let r0 = heralding_ratios(&base);
    let rho0 = jsa_purity(&base, 256).expect("purity");
    let mut worst = 0.0f64;
    for s in [0.1, 0.5, 3.0, 20.0] {
        let cfg = reduce(&scaled(&src, s)).expect("reduce");
        let r = heralding_ratios(&cfg);
        let rho = jsa_purity(&cfg, 256).expect("purity");
        for (a, b) in [(r0.p_si_frac, r.p_si_frac), (r0.eta_s, r.eta_s), (r0.eta_si, r.eta_si), (rho0, rho)] {
            worst = worst.max((a - b).abs());
        }
    }
    outcome(worst <= 1e-9, format!("max change {worst:.1e} (rho={rho0:.4})"))
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check, Option<Duration>); 10] = [
        ("F-peak regression", f_peak_regression, Some(Duration::from_secs(10))),
        ("sinc limit", sinc_limit, Some(Duration::from_secs(5))),
        ("bandwidth", bandwidth, Some(Duration::from_secs(30))),
        ("pair probability", pair_probability, None),
        ("exact-C error envelope", exact_c_envelope, Some(Duration::from_secs(120))),
        ("heralding closed form and mode sum", heralding, None),
        ("fidelity diagnostic", fidelity, Some(Duration::from_secs(120))),
        ("purity landmark and mirror symmetry", purity, Some(Duration::from_secs(300))),
        ("Pareto landmarks", pareto, Some(Duration::from_secs(600))),
        ("scale invariance", scale_invariance, None),
    ];
    let mut failed = 0;
    for (k, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let took = start.elapsed();
        let in_time = limit.is_none_or(|l| took <= l);
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget = limit.map(|l| format!(" / {}s", l.as_secs())).unwrap_or_default();
        println!(
            "[{}] {:>2}. {name}: {} ({:.1}s{budget})",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail,
            took.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
