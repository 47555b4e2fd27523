//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

use std::process::ExitCode;
use std::time::Instant;

use ale_kahler::analysis::{default_window, fit_decay_exponent, metric_deviation_samples};
use ale_kahler::energy::{convexity_audit, energy_report};
use ale_kahler::geodesic::*;
use ale_kahler::geometry::*;
use ale_kahler::quadrature::log_space;
use ale_kahler::toric::*;
use ale_kahler::Result;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

fn flat() -> RadialProfile {
    RadialProfile::flat(2, 1).unwrap()
}

fn eguchi_hanson() -> RadialProfile {
    lebrun_profile(2, 1.0).unwrap()
}

fn spec(n: usize, rho_min: f64, rho_max: f64) -> GridSpec {
    GridSpec {
        n_rho: n,
        n_t: n,
        rho_min,
        rho_max,
    }
}

fn exponential() -> BoundaryData {
    BoundaryData::Exponential {
        amplitude: 0.1,
        rate: 2.0,
    }
}

fn solve(bg: &RadialProfile, psi0: &BoundaryData, psi1: &BoundaryData, eps: f64, sp: GridSpec) -> Result<(PathGrid, SolverReport)> {
    solve_epsilon_geodesic(bg, psi0, psi1, &SolverConfig::new(eps, sp))
}

/// υ measured against the linear path's volume.
fn solve_weighted(bg: &RadialProfile, psi0: &BoundaryData, psi1: &BoundaryData, eps: f64, sp: GridSpec) -> Result<(PathGrid, SolverReport)> {
    let mut cfg = SolverConfig::new(eps, sp);
    cfg.upsilon_mode = UpsilonMode::ProfileWeighted;
    solve_epsilon_geodesic(bg, psi0, psi1, &cfg)
}

fn exact_solution() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    let mut ok = true;
    for (bg, sp) in [(flat(), spec(65, 0.0, 6.0)), (eguchi_hanson(), spec(65, -1.0, 8.0))] {
        for eps in [1.0, 0.5, 0.1] {
            let start = Instant::now();
            let (g, rep) = solve(&bg, &BoundaryData::Zero, &BoundaryData::Zero, eps, sp)?;
            let secs = start.elapsed().as_secs_f64();
            let dev = exact_deviation(&g, eps);
            worst = worst.max(dev);
            slowest = slowest.max(secs);
            ok &= rep.converged() && dev <= 1e-8 && secs <= 10.0;
        }
    }
    verdict(ok, format!("max sup|φ − ε·t(t−1)/2| = {worst:.1e}, slowest solve {slowest:.2} s"))
}

struct SuiteRun {
    group: usize,
    eps: f64,
    grid: PathGrid,
    report: SolverReport,
}

/// Flat cone and Eguchi-Hanson, two boundary-data pairs, nested ε.
fn regression_suite() -> Result<Vec<SuiteRun>> {
    let data = [
        (BoundaryData::Zero, exponential()),
        (
            BoundaryData::Gaussian {
                amplitude: 0.1,
                center: 2.0,
                width: 0.7,
            },
            exponential(),
        ),
    ];
    let backgrounds = [(flat(), spec(33, 0.0, 6.0)), (eguchi_hanson(), spec(33, -1.0, 8.0))];
    let mut runs = Vec::new();
    let mut group = 0;
    for (bg, sp) in &backgrounds {
        for (psi0, psi1) in &data {
            for eps in [1.0, 0.5, 0.25, 0.125] {
                let (grid, report) = solve_weighted(bg, psi0, psi1, eps, *sp)?;
                runs.push(SuiteRun {
                    group,
                    eps,
                    grid,
                    report,
                });
            }
            group += 1;
        }
    }
    Ok(runs)
}

fn c0_sandwich(suite: &[SuiteRun]) -> Result<Verdict> {
    let converged: Vec<&SuiteRun> = suite.iter().filter(|r| r.report.converged()).collect();
    let violations: usize = converged.iter().map(|r| r.report.c0.violations).sum();
    let slack = converged
        .iter()
        .map(|r| r.report.c0.min_slack())
        .fold(f64::INFINITY, f64::min);
    verdict(
        converged.len() >= 10 && converged.len() == suite.len() && violations == 0,
        format!(
            "{} of {} runs converged, {violations} violations, smallest slack {slack:.2e}",
            converged.len(),
            suite.len()
        ),
    )
}

fn comparison(suite: &[SuiteRun]) -> Result<Verdict> {
    let mut pairs = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for a in suite {
        for b in suite.iter().filter(|b| b.group == a.group && b.eps < a.eps) {
            let c = comparison_check(&a.grid, &b.grid, 1e-10)?;
            worst = worst.max(c.worst_excess);
            ok &= c.pass;
            pairs += 1;
        }
    }
    verdict(ok && pairs > 0, format!("{pairs} nested pairs, max(φ_a − φ_b) = {worst:.2e}"))
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

fn uniformity() -> Result<Verdict> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, bg, sp) in [("flat", flat(), spec(65, 0.0, 6.0)), ("EH", eguchi_hanson(), spec(65, -1.0, 8.0))] {
        let mut h = Vec::new();
        let mut raw = Vec::new();
        for i in 0..7 {
            let eps = 0.5f64.powi(i);
            let (g, rep) = solve(&bg, &BoundaryData::Zero, &exponential(), eps, sp)?;
            ok &= rep.converged();
            h.push(hessian_sup(&g));
            raw.push(raw_hessian_sup(&g));
        }
        let m = median(&h);
        let within = h.iter().all(|&x| x <= 2.0 * m && x >= 0.5 * m);
        ok &= within;
        let (lo, hi) = h.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        let rm = median(&raw);
        let raw_ratio = raw.iter().map(|&x| (x / rm).max(rm / x)).fold(0.0, f64::max);
        parts.push(format!(
            "{name}: |∇²Φ|_Θ in [{lo:.3}, {hi:.3}], median {m:.3}; Euclidean max/median spread {raw_ratio:.2}"
        ));
    }
    verdict(ok, parts.join("; "))
}

fn scalar_flatness() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for k in 1..=4 {
        for tau_min in [0.5, 1.0, 2.0] {
            let p = lebrun_profile(k, tau_min)?;
            for tau in default_tau_grid(&p, 1e3 * tau_min, 100) {
                worst = worst.max(scalar_curvature(&p, tau)?.abs());
            }
        }
    }
    verdict(worst <= 1e-8, format!("max|R| = {worst:.1e} over 12 profiles × 100 points"))
}

fn mixed_ricci() -> Result<Verdict> {
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [1, 3] {
        let p = lebrun_profile(k, 1.0)?;
        let s = ricci_sign_scan(&p, &default_tau_grid(&p, 1e3, 200), 1e-3)?;
        let margin = match (s.positive, s.negative) {
            (Some(a), Some(b)) => a.eigenvalue.min(-b.eigenvalue),
            _ => 0.0,
        };
        ok &= s.class == RicciSign::Mixed && margin >= 1e-3;
        parts.push(format!("k={k}: {:?}, margin {margin:.3}", s.class));
    }
    let p = lebrun_profile(2, 1.0)?;
    let s = ricci_sign_scan(&p, &default_tau_grid(&p, 1e3, 200), 1e-6)?;
    ok &= s.class == RicciSign::Zero;
    parts.push(format!("k=2: {:?}, max|λ| {:.1e}", s.class, s.max_abs));
    verdict(ok, parts.join("; "))
}

fn intersections() -> Result<Verdict> {
    let start = Instant::now();
    let cal = calibration()?;
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for n in 2..=3usize {
        for k in 1..=3usize {
            let ki = k as i128;
            let t = intersection_numbers(n, k)?;
            ok &= t.d0_power == (-ki).pow(n as u32 - 1);
            ok &= t.d0_power_fiber == (-ki).pow(n as u32 - 2);
            let c = mixed_type_certificate(n, k)?;
            if n == 2 {
                ok &= c.d0_ricci == Rational::from_integer(2 - ki);
                ok &= c.df_ricci == Rational::new(ki - 2, ki);
            }
            ok &= c.opposite_signs == (k != n);
            for (which, exact) in [
                (OracleIntegral::Power, t.d0_power),
                (OracleIntegral::PowerFiber, t.d0_power_fiber),
                (OracleIntegral::RestrictedZero, t.d0_power),
            ] {
                let v = cal * representative_integral_oracle(n, k, which)?.value;
                worst = worst.max((v - exact as f64).abs() / (exact as f64).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        ok && worst <= 1e-2 && secs <= 60.0,
        format!("exact table reproduced: {ok}; calibration {cal:.6}; worst oracle error {worst:.1e}; {secs:.2} s"),
    )
}

fn convexity() -> Result<Verdict> {
    let bg = eguchi_hanson();
    let data = BoundaryData::Gaussian {
        amplitude: 0.2,
        center: 1.0,
        width: 1.0,
    };
    let sp = GridSpec {
        n_rho: 161,
        n_t: 129,
        rho_min: -3.0,
        rho_max: 7.0,
    };
    let mut ok = true;
    let mut grids = Vec::new();
    let mut parts = Vec::new();
    for eps in [0.5, 0.25, 0.125] {
        let (g, rep) = solve(&bg, &BoundaryData::Zero, &data, eps, sp)?;
        ok &= rep.converged();
        let e = energy_report(&g, eps)?;
        ok &= e.min_d2k_dt2 >= -1e-6 && e.identity_defect <= 1e-10 && e.fd_mismatch <= 1e-2;
        parts.push(format!(
            "ε={eps}: min d²K {:.3e}, identity {:.1e}, fd {:.2}%",
            e.min_d2k_dt2,
            e.identity_defect,
            100.0 * e.fd_mismatch
        ));
        grids.push(g);
    }
    ok &= convexity_audit(&grids, 1e-6)?.pass;
    verdict(ok, parts.join("; "))
}

fn decay() -> Result<Verdict> {
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [1, 3, 4] {
        let p = lebrun_profile(k, 1.0)?;
        let dev = metric_deviation_samples(&p, &log_space(1e2, 1e6, 60))?;
        let r_max = dev.last().unwrap().0;
        let series: Vec<(f64, f64)> = dev.iter().map(|d| (d.0, d.1.max(d.2))).collect();
        let e = fit_decay_exponent(&series, default_window(r_max))?.exponent().unwrap_or(f64::NAN);
        ok &= (e + 2.0).abs() <= 0.1;
        parts.push(format!("k={k} metric {e:.3}"));
    }
    for (name, bg, sp) in [("flat", flat(), spec(65, 0.0, 8.0)), ("EH", eguchi_hanson(), spec(65, -1.0, 8.0))] {
        let (g, rep) = solve(&bg, &BoundaryData::Zero, &exponential(), 0.5, sp)?;
        let gamma = -rep.boundary_decay[1].unwrap_or(f64::NAN);
        let samples = far_field_samples(&g, 0.5, (sp.n_t - 1) / 2);
        let r_max = (0.5 * sp.rho_max).exp();
        let slope = fit_decay_exponent(&samples, default_window(r_max))?.exponent().unwrap_or(f64::NAN);
        ok &= rep.converged() && slope <= -gamma + 0.3;
        parts.push(format!("{name} geodesic slope {slope:.2} vs −γ = {:.2}", -gamma));
    }
    verdict(ok, parts.join("; "))
}

fn main() -> ExitCode {
    let suite = regression_suite();
    let criteria: Vec<(&str, Box<dyn Fn() -> Result<Verdict> + '_>)> = vec![
        ("exact-solution reproduction", Box::new(exact_solution)),
        (
            "C0 sandwich",
            Box::new(|| suite.as_ref().map_err(clone_err).and_then(|s| c0_sandwich(s))),
        ),
        ("C11 uniformity probe", Box::new(uniformity)),
        ("scalar-flatness", Box::new(scalar_flatness)),
        ("mixed-type Ricci", Box::new(mixed_ricci)),
        ("intersection table", Box::new(intersections)),
        ("K-energy convexity", Box::new(convexity)),
        ("decay exponents", Box::new(decay)),
        (
            "comparison principle",
            Box::new(|| suite.as_ref().map_err(clone_err).and_then(|s| comparison(s))),
        ),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} [{name}] {detail} ({:.1} s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

fn clone_err(e: &ale_kahler::Error) -> ale_kahler::Error {
    ale_kahler::Error::Hypothesis(format!("regression suite failed: {e}"))
}
