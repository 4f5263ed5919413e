//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the report is printed even when every
//! criterion passes. A failing criterion is reported, not raised; the process exits non-zero
//! only if the harness itself breaks.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use elliptical_ou::cli::{annual_spec, chandler_spec};
use elliptical_ou::dataio::bundled_polar_motion;
use elliptical_ou::fourier::{dft, dft_with, Band, DftOptions};
use elliptical_ou::sampling::{simulate, ComplexSeries, Scheme, SimConfig};
use elliptical_ou::spectral::{
    aliased_psd, autocovariance, cartesian_spectral_value, comp_spectrum, psd, psd_complex_ou,
    FrequencyGrid,
};
use elliptical_ou::uncertainty::{
    run_monte_carlo, BootstrapConfig, McConfig, McReport, SpectralEstimator, PARAM_NAMES,
};
use elliptical_ou::whittle::{
    estimate_eccentricity_np, estimate_orientation, fit, fit_series, FitSpec, Likelihood, Model,
};
use elliptical_ou::{proper_ar1_map, wrap_orientation, EllipticalParams, GeometricParams};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Report {
    passed: usize,
    failed: Vec<String>,
}

impl Report {
    fn record(&mut self, id: &str, ok: bool, elapsed: Duration, limit: Duration, detail: String) {
        let in_time = elapsed <= limit;
        let verdict = if ok && in_time { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {id}: {detail} [{:.1} s, limit {} s{}]",
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", over time" }
        );
        if ok && in_time {
            self.passed += 1;
        } else {
            self.failed.push(id.to_string());
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn eccentric() -> EllipticalParams {
    EllipticalParams::new(0.02, 1.0, -0.5, -0.3, 2.0)
}

fn slow() -> EllipticalParams {
    EllipticalParams::new(0.002, 0.5, 0.3, 0.3, 0.15)
}

fn random_geometric(rng: &mut ChaCha8Rng) -> GeometricParams {
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    GeometricParams::new(
        rng.random_range(1e-3..2.0),
        sign * rng.random_range(1e-3..3.0),
        rng.random_range(0.05..1.0),
        rng.random_range(-PI / 2.0..PI / 2.0),
        rng.random_range(0.1..10.0),
    )
}

fn mapping_round_trip(report: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut errors = 0;
    for _ in 0..10_000 {
        let g = random_geometric(&mut rng);
        match g.to_elliptical().and_then(|p| p.to_geometric()) {
            Ok(b) => {
                let dpsi = wrap_orientation(b.psi - g.psi).abs() / g.psi.abs();
                for e in [rel(b.alpha, g.alpha), rel(b.beta, g.beta), rel(b.rho, g.rho), dpsi, rel(b.a2, g.a2)] {
                    worst = worst.max(e);
                }
            }
            Err(_) => errors += 1,
        }
    }
    let mut r_err = 0.0f64;
    for (p, want) in [(eccentric(), Complex64::new(0.6, 1.0)), (slow(), Complex64::new(-0.09, -0.09))] {
        let r = p.to_geometric().and_then(|g| g.to_elliptical()).map(|q| q.r);
        r_err = r_err.max(r.map_or(f64::INFINITY, |r| (r - want).norm()));
    }
    report.record(
        "1 mapping round trip",
        errors == 0 && worst <= 1e-10 && r_err <= 1e-12,
        start.elapsed(),
        secs(5),
        format!("max rel err {worst:.2e} (<= 1e-10), failures {errors}, pseudo-variance err {r_err:.1e} (<= 1e-12)"),
    );
}

fn spectral_oracle(report: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let grid = FrequencyGrid::fourier(4096, 1.0).unwrap();
    let (mut worst_s, mut worst_r) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let g = random_geometric(&mut rng);
        for &w in &grid.omegas {
            let o = cartesian_spectral_value(&g, w);
            worst_s = worst_s.max(rel(psd(&g, w), o.s_pos));
            worst_r = worst_r.max((comp_spectrum(&g, w) - o.r_val).norm() / o.r_val.norm());
        }
    }
    let mut worst_circ = 0.0f64;
    for _ in 0..100 {
        let mut g = random_geometric(&mut rng);
        g.rho = 1.0;
        for &w in grid.omegas.iter().step_by(64) {
            worst_circ = worst_circ.max(rel(psd(&g, w), psd_complex_ou(&g, w).unwrap()));
        }
    }
    report.record(
        "2 spectral oracle",
        worst_s <= 1e-12 && worst_r <= 1e-12 && worst_circ == 0.0,
        start.elapsed(),
        secs(10),
        format!(
            "psd {worst_s:.2e}, complementary {worst_r:.2e} (<= 1e-12); circular reduction {worst_circ:.1e} (exact)"
        ),
    );
}

/// `(1/2pi) int S(omega) exp(i omega tau) d omega` by the trapezoid rule on `[-w_max, w_max]`,
/// with the `c / omega^2` tail added back for `tau = 0`.
fn numerical_autocovariance(g: &GeometricParams, taus: &[f64]) -> Vec<Complex64> {
    let h = g.alpha / 8.0;
    let w_max = 200.0 + 2.0 * g.beta.abs();
    let m = (w_max / h).ceil() as i64;
    let mut acc = vec![Complex64::new(0.0, 0.0); taus.len()];
    for k in -m..=m {
        let w = k as f64 * h;
        let weight = if k.abs() == m { 0.5 } else { 1.0 };
        let s = psd(g, w) * weight;
        for (a, &tau) in acc.iter_mut().zip(taus) {
            *a += s * Complex64::from_polar(1.0, w * tau);
        }
    }
    let edge = m as f64 * h;
    let c = 0.5 * edge * edge * (psd(g, edge) + psd(g, -edge));
    acc.iter()
        .zip(taus)
        .map(|(a, &tau)| {
            let tail = if tau == 0.0 { 2.0 * c / edge } else { 0.0 };
            (a * h + tail) / (2.0 * PI)
        })
        .collect()
}

fn autocovariance_check(report: &mut Report) {
    let start = Instant::now();
    let taus = [0.0, 1.0, 2.0, 5.0];
    let mut worst = 0.0f64;
    for p in [eccentric(), slow()] {
        let g = p.to_geometric().unwrap();
        let num = numerical_autocovariance(&g, &taus);
        for (n, &tau) in num.iter().zip(&taus) {
            let exact = autocovariance(&g, tau);
            worst = worst.max((n - exact).norm() / exact.norm());
        }
    }
    report.record(
        "3 autocovariance vs inverse transform",
        worst <= 1e-6,
        start.elapsed(),
        secs(5),
        format!("max rel err {worst:.2e} (<= 1e-6)"),
    );
}

fn simulation_spectrum(report: &mut Report) {
    let start = Instant::now();
    let p = eccentric();
    let g = p.to_geometric().unwrap();
    let n = 1024;
    let runs = 500;
    let mut mean = vec![0.0; n];
    let mut grid = Vec::new();
    for rep in 0..runs {
        let cfg = SimConfig::new(n, 1.0, 4).with_replicate(rep);
        let sd = dft(&simulate(&p, &cfg).unwrap()).unwrap();
        for (m, i) in mean.iter_mut().zip(&sd.periodogram) {
            *m += i / runs as f64;
        }
        grid = sd.grid.omegas;
    }
    let (mut near, mut far) = (0.0f64, 0.0f64);
    let mut near_at = 0.0;
    for (&w, &m) in grid.iter().zip(&mean) {
        if w == 0.0 {
            continue;
        }
        let e = rel(m, aliased_psd(&g, w, 1.0, 10));
        if (w - g.beta).abs() < 0.3 || (w + g.beta).abs() < 0.3 {
            if e > near {
                near = e;
                near_at = w;
            }
        } else {
            far = far.max(e);
        }
    }
    report.record(
        "4 Euler periodogram vs aliased spectrum",
        near <= 0.05 && far <= 0.15,
        start.elapsed(),
        secs(180),
        format!(
            "near peaks max rel dev {near:.3} at omega {near_at:.3} (<= 0.05), elsewhere {far:.3} (<= 0.15)"
        ),
    );
}

fn pct_list(v: &[f64; 5]) -> String {
    PARAM_NAMES
        .iter()
        .zip(v)
        .map(|(n, x)| format!("{n} {x:.2}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn monte_carlo(report: &mut Report) {
    let start = Instant::now();
    let mut cfg = McConfig::new(eccentric(), 200, 1759, 1.0, 5);
    cfg.scheme = Scheme::ExactTransition;
    cfg.fit_specs = vec![
        FitSpec::new(Model::Elliptical, Likelihood::Marginal),
        FitSpec::new(Model::Elliptical, Likelihood::Marginal)
            .with_bands(Band::symmetric(0.725, 0.897).unwrap()),
    ];
    cfg.bootstraps = vec![
        BootstrapConfig::new(100, SpectralEstimator::RawPeriodogram, 6),
        BootstrapConfig::new(100, SpectralEstimator::Epanechnikov { bandwidth: 0.07 }, 6),
    ];
    let mc = run_monte_carlo(&cfg).expect("Monte Carlo run");
    let elapsed = start.elapsed();
    mc_bias(report, &mc, elapsed);
    mc_orientation(report, &mc, elapsed);
    mc_standard_errors(report, &mc, elapsed);
}

fn mc_bias(report: &mut Report, mc: &McReport, elapsed: Duration) {
    let envelope = [35.0, 3.0, 8.0, 10.0, 12.0];
    let full = &mc.methods[0];
    let narrow = &mc.methods[1];
    let within = (0..5).all(|j| full.bias_percent[j].abs() <= envelope[j] && full.rmse_percent[j] <= envelope[j]);
    let narrow_ok = (15.0..=35.0).contains(&narrow.rmse_percent[4]) && narrow.rmse_percent[1] <= 3.0;
    report.record(
        "5 Monte Carlo bias and RMSE",
        within && narrow_ok && full.n_ok > 0,
        elapsed,
        secs(1800),
        format!(
            "full band ({} ok): bias% [{}], RMSE% [{}]; narrowband ({} ok): sigma2 RMSE {:.2}% (15-35), beta1 RMSE {:.2}% (<= 3)",
            full.n_ok,
            pct_list(&full.bias_percent),
            pct_list(&full.rmse_percent),
            narrow.n_ok,
            narrow.rmse_percent[4],
            narrow.rmse_percent[1]
        ),
    );
}

fn mc_orientation(report: &mut Report, mc: &McReport, elapsed: Duration) {
    let m = &mc.methods[0];
    let ok_psi = (m.mean_psi - mc.true_psi).abs() <= 0.05;
    let ok_ecc = (m.mean_eccentricity - mc.true_eccentricity).abs() <= 0.03;
    report.record(
        "6 orientation and eccentricity",
        ok_psi && ok_ecc,
        elapsed,
        secs(1800),
        format!(
            "mean psi {:.4} vs {:.5} (+-0.05), mean eccentricity {:.4} vs {:.5} (+-0.03)",
            m.mean_psi, mc.true_psi, m.mean_eccentricity, mc.true_eccentricity
        ),
    );
}

fn mc_standard_errors(report: &mut Report, mc: &McReport, elapsed: Duration) {
    let mc_se = &mc.methods[0].sd_percent;
    let raw = &mc.bootstraps[0].mean_se_percent;
    let smooth = &mc.bootstraps[1].mean_se_percent;
    let ratios: Vec<f64> = (1..5).map(|j| raw[j] / mc_se[j]).collect();
    let ok_ratio = ratios.iter().all(|r| (1.0 / 1.5..=1.5).contains(r));
    let smaller = (0..5).filter(|&j| smooth[j] < raw[j]).count();
    report.record(
        "7 bootstrap standard errors",
        ok_ratio && smaller >= 4,
        elapsed,
        secs(2700),
        format!(
            "MC SE% [{}]; periodogram SE% [{}]; smoothed SE% [{}]; ratios beta1..sigma2 {:?} (within 1.5x); smoothed smaller for {smaller}/5 (>= 4)",
            pct_list(mc_se),
            pct_list(raw),
            pct_list(smooth),
            ratios.iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    );
}

fn proper_case(report: &mut Report) {
    let start = Instant::now();
    let p = EllipticalParams::new(0.02, 1.0, 0.0, 0.0, 2.0);
    let n = 1_000_000;
    let cfg = SimConfig {
        scheme: Scheme::ExactTransition,
        ..SimConfig::new(n, 1.0, 8)
    };
    let z = simulate(&p, &cfg).unwrap().values;
    let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
    for t in 0..n - 1 {
        num += z[t + 1] * z[t].conj();
        den += z[t].norm_sqr();
    }
    let phi = num / den;
    let resid: f64 = (0..n - 1).map(|t| (z[t + 1] - phi * z[t]).norm_sqr()).sum::<f64>() / (n - 1) as f64;
    let ar = proper_ar1_map(&p, 1.0).unwrap();
    let target = Complex64::from_polar(ar.lambda, ar.zeta);
    // Each real component of the least-squares coefficient has variance (1 - lambda^2) / (2n);
    // |e|^2 of a complex normal innovation has standard deviation equal to its mean.
    let se_phi = ((1.0 - ar.lambda * ar.lambda) / (2.0 * n as f64)).sqrt();
    let se_var = ar.sigma2_ar / (n as f64).sqrt();
    let dz = phi - target;
    let ok = dz.re.abs() <= 3.0 * se_phi && dz.im.abs() <= 3.0 * se_phi && (resid - ar.sigma2_ar).abs() <= 3.0 * se_var;
    report.record(
        "8 proper-case AR(1) map",
        ok,
        start.elapsed(),
        secs(60),
        format!(
            "coefficient {:.5}{:+.5}i vs {:.5}{:+.5}i ({:.1}, {:.1} SE), innovation variance {:.5} vs {:.5} ({:.1} SE)",
            phi.re,
            phi.im,
            target.re,
            target.im,
            dz.re / se_phi,
            dz.im / se_phi,
            resid,
            ar.sigma2_ar,
            (resid - ar.sigma2_ar) / se_var
        ),
    );
}

fn polar_motion(report: &mut Report) {
    let start = Instant::now();
    let series = bundled_polar_motion().expect("bundled snapshot");
    let cpy = 2.0 * PI;
    let chandler = fit_series(&series, &chandler_spec()).map(|(_, r)| r);
    let annual = annual_spec();
    let sd = dft_with(&series, DftOptions::for_fitting()).unwrap();
    let annual_fit = fit(&sd, &annual);
    let np_ecc = estimate_eccentricity_np(&sd, -cpy);
    let np_psi = estimate_orientation(&sd, -cpy);
    let elapsed = start.elapsed();

    let (c_ok, c_text) = match &chandler {
        Ok(r) => {
            let a1 = r.ell.alpha1;
            let b1 = r.ell.beta1 / cpy;
            let s2 = r.ell.sigma2 * series.delta;
            let ok = r.converged
                && (0.0167..=0.102).contains(&a1)
                && (-0.847..=-0.835).contains(&b1)
                && (119.0..=266.0).contains(&s2);
            (
                ok,
                format!(
                    "Chandler alpha1 {a1:.4}/yr [0.0167, 0.102], beta1 {b1:.4} cpy [-0.847, -0.835], sigma2*delta {s2:.1} mas^2 [119, 266]"
                ),
            )
        }
        Err(e) => (false, format!("Chandler fit error: {e}")),
    };
    let (a_ok, a_text) = match &annual_fit {
        Ok(r) => {
            let ecc = r.eccentricity();
            let ok = r.converged && (0.639..=0.915).contains(&ecc) && (r.psi_hat - 0.125).abs() <= 0.03;
            (
                ok,
                format!("annual eccentricity {ecc:.3} [0.639, 0.915], psi {:.4} (0.125 +- 0.03)", r.psi_hat),
            )
        }
        Err(e) => (false, format!("annual fit error: {e}")),
    };
    let (n_ok, n_text) = match (&np_ecc, &np_psi) {
        (Ok(e), Ok(p)) => (
            (e - 0.530).abs() <= 0.03,
            format!("non-parametric eccentricity {e:.3} (0.530 +- 0.03), orientation {p:.4}"),
        ),
        _ => (false, "non-parametric estimate undefined".to_string()),
    };
    report.record(
        "9 polar motion",
        c_ok && a_ok && n_ok,
        elapsed,
        secs(120),
        format!("n = {}; {c_text}; {a_text}; {n_text}", series.values.len()),
    );
}

fn equivariance(report: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let spec = FitSpec::new(Model::Elliptical, Likelihood::Marginal);
    let (mut worst_rel, mut worst_psi) = (0.0f64, 0.0f64);
    let mut problems = 0;
    let mut done = 0;
    while done < 20 {
        let g = GeometricParams::new(
            rng.random_range(0.01..0.2),
            rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 },
            rng.random_range(0.3..0.95),
            rng.random_range(-1.5..1.5),
            rng.random_range(0.5..5.0),
        );
        let scale: f64 = rng.random_range(0.01..100.0);
        let theta: f64 = rng.random_range(-PI..PI);
        let cfg = SimConfig {
            scheme: Scheme::ExactTransition,
            ..SimConfig::new(512, 1.0, 11).with_replicate(done)
        };
        let base = simulate(&g.to_elliptical().unwrap(), &cfg).unwrap();
        let transformed = ComplexSeries::new(
            base.values.iter().map(|z| z * Complex64::from_polar(scale, theta)).collect(),
            base.delta,
            base.t0,
        )
        .unwrap();
        let (Ok((_, a)), Ok((_, b))) = (fit_series(&base, &spec), fit_series(&transformed, &spec)) else {
            problems += 1;
            done += 1;
            continue;
        };
        if !(a.converged && b.converged) {
            problems += 1;
        }
        for (x, y) in [
            (a.geo.alpha, b.geo.alpha),
            (a.geo.beta, b.geo.beta),
            (a.geo.rho, b.geo.rho),
            (a.geo.a2 * scale * scale, b.geo.a2),
        ] {
            worst_rel = worst_rel.max(rel(y, x));
        }
        worst_psi = worst_psi.max(wrap_orientation(b.psi_hat - a.psi_hat - theta).abs());
        done += 1;
    }
    report.record(
        "10 scale and rotation equivariance",
        problems == 0 && worst_rel <= 1e-6 && worst_psi <= 1e-12,
        start.elapsed(),
        secs(300),
        format!("max rel dev {worst_rel:.2e} (<= 1e-6), psi shift error {worst_psi:.1e} rad (<= 1e-12), fit problems {problems}"),
    );
}

fn main() {
    // Optional positional argument: comma-separated criterion numbers to run, e.g. `-- 1,2,9`.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let only: Option<Vec<u32>> = args
        .iter()
        .find(|a| !a.starts_with('-'))
        .map(|a| a.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |ids: &[u32]| only.as_ref().is_none_or(|o| ids.iter().any(|i| o.contains(i)));
    let mut report = Report {
        passed: 0,
        failed: Vec::new(),
    };
    let steps: [(&[u32], fn(&mut Report)); 8] = [
        (&[1], mapping_round_trip),
        (&[2], spectral_oracle),
        (&[3], autocovariance_check),
        (&[4], simulation_spectrum),
        (&[5, 6, 7], monte_carlo),
        (&[8], proper_case),
        (&[9], polar_motion),
        (&[10], equivariance),
    ];
    for (ids, step) in steps {
        if wanted(ids) {
            step(&mut report);
        }
    }
    println!(
        "acceptance: {} passed, {} failed{}",
        report.passed,
        report.failed.len(),
        if report.failed.is_empty() {
            String::new()
        } else {
            format!(" ({})", report.failed.join("; "))
        }
    );
}
