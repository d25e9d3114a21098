//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mclaw_core::analysis::{discrete_tv, l1_distance};
use mclaw_core::call::Call;
use mclaw_core::cli::{convergence_study, execute, paired_run, prepare, scenarios, RunConfig, RunOutcome};
use mclaw_core::solver::{Observer, StepRecord};
use mclaw_core::{NumericalFlux, Result};

/// Checks every catalog run carries, besides the scenario's own.
const COMMON: [&str; 6] = ["mass", "linf", "tv_envelope", "lipschitz", "l1_contraction", "comparison"];
const COMPATIBLE: [&str; 8] = [
    "burgers-flat-circle",
    "burgers-smooth",
    "linear-advection",
    "killing-rotation-torus",
    "viscous-burgers-0.01",
    "viscous-burgers-0.001",
    "riemann-burgers",
    "riemann-burgers-llf",
];
const MOVING: [&str; 4] = ["expanding-circle-compression", "dilation-torus-compression", "expanding-circle-burgers", "dilation-torus-advection"];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

struct CatalogRun {
    flux: NumericalFlux,
    elapsed: Duration,
    outcome: RunOutcome,
}

fn with_common_checks(mut cfg: RunConfig) -> RunConfig {
    for c in COMMON {
        if !cfg.has_check(c) {
            cfg.checks.push(Call::parse(c).unwrap());
        }
    }
    cfg
}

fn catalog_runs() -> Vec<CatalogRun> {
    let mut runs = Vec::new();
    for name in scenarios::names() {
        let native = with_common_checks(scenarios::scenario(name).unwrap());
        let other = match native.numerical_flux {
            NumericalFlux::EngquistOsher => NumericalFlux::LocalLaxFriedrichs,
            NumericalFlux::LocalLaxFriedrichs => NumericalFlux::EngquistOsher,
        };
        let mut variant = native.clone();
        variant.numerical_flux = other;
        variant.checks.retain(|c| COMMON.contains(&c.name.as_str()));
        for cfg in [native, variant] {
            let start = Instant::now();
            let outcome = execute(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
            runs.push(CatalogRun { flux: cfg.numerical_flux, elapsed: start.elapsed(), outcome });
        }
    }
    runs
}

fn label(r: &CatalogRun) -> String {
    format!("{}[{:?}]", r.outcome.config.name, r.flux)
}

fn conservation(runs: &[CatalogRun]) -> Verdict {
    let drift = runs.iter().flat_map(|r| r.outcome.report.mass_drift.iter().copied()).fold(0.0, f64::max);
    let slowest = runs.iter().max_by_key(|r| r.elapsed).unwrap();
    let pass = drift <= 1e-12 && slowest.elapsed <= Duration::from_secs(60);
    verdict(pass, format!("max relative mass drift {drift:.2e}; slowest run {} in {:.1?}", label(slowest), slowest.elapsed))
}

fn linf_envelope(runs: &[CatalogRun]) -> Verdict {
    let mut worst = f64::NEG_INFINITY;
    let mut exact = true;
    for r in runs {
        let rep = &r.outcome.report;
        for (m, e) in rep.measured_linf.iter().zip(&rep.envelope_linf) {
            worst = worst.max(m - e);
        }
        if COMPATIBLE.contains(&r.outcome.config.name.as_str()) {
            let u0 = rep.measured_linf[0];
            exact &= rep.envelope_linf.iter().all(|e| (e - u0).abs() <= 1e-14 * u0);
        }
    }
    verdict(worst <= 1e-10 && exact, format!("max(‖u‖∞ − envelope) = {worst:.2e}; compatible envelopes equal ‖u₀‖∞: {exact}"))
}

fn comparison(runs: &[CatalogRun]) -> Verdict {
    let violations: usize = runs.iter().filter_map(|r| r.outcome.paired.as_ref()).map(|p| p.violations).sum();
    let catalog_steps = runs.iter().filter_map(|r| r.outcome.paired.as_ref()).map(|p| p.steps).max().unwrap_or(0);
    let mut long = scenarios::scenario("burgers-flat-circle").unwrap();
    long.n = 1024;
    long.t_end = 1.0;
    long.output_times = vec![0.0, 1.0];
    let (solver, _, _) = prepare(&long, long.n).unwrap();
    let p = paired_run(&long, &solver).unwrap();
    let pass = violations == 0 && p.violations == 0 && p.steps >= 1000 && catalog_steps >= 1000;
    verdict(
        pass,
        format!("{violations} violations over the catalog (longest pair {catalog_steps} steps); {} over {} steps of Burgers at n = 1024", p.violations, p.steps),
    )
}

fn l1_contraction(runs: &[CatalogRun]) -> Verdict {
    let mut worst_compatible: f64 = 0.0;
    let mut worst_general = f64::NEG_INFINITY;
    for r in runs {
        let Some(p) = &r.outcome.paired else { continue };
        // Static metric and div^x f = 0.
        let name = r.outcome.config.name.as_str();
        if COMPATIBLE.contains(&name) || name == "shear-flat-torus" {
            for w in p.l1.windows(2) {
                worst_compatible = worst_compatible.max((w[1] - w[0]) / p.l1[0]);
            }
        } else {
            let dr = 1.0 / r.outcome.config.n as f64;
            let slack = 5.0 * (dr + r.outcome.trajectory.dt_max);
            for j in 1..p.l1.len() {
                for i in 0..j {
                    worst_general = worst_general.max(p.l1[j] - p.l1[i] - slack * (p.times[j] - p.times[i]));
                }
            }
        }
    }
    verdict(
        worst_compatible <= 1e-12 && worst_general <= 0.0,
        format!("compatible max relative increase {worst_compatible:.2e}; general max excess over 5(Δr+Δt)(t−s) {worst_general:.2e}"),
    )
}

struct TvSteps<'a> {
    complex: &'a mclaw_core::CellComplex,
    max_increase: f64,
}

impl Observer for TvSteps<'_> {
    fn on_step(&mut self, r: &StepRecord<'_>) -> Result<()> {
        let inc = discrete_tv(self.complex, &r.after.u, r.snap_after) - discrete_tv(self.complex, &r.before.u, r.snap_before);
        self.max_increase = self.max_increase.max(inc);
        Ok(())
    }
}

fn tvd_dichotomy() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for name in COMPATIBLE {
        let cfg = scenarios::scenario(name).unwrap();
        let (solver, u0, bounds) = prepare(&cfg, cfg.n).unwrap();
        let complex = solver.complex();
        let defect = (0..complex.cell_count())
            .flat_map(|c| [-bounds.u_max, 0.0, bounds.u_max].map(|u| (c, u)))
            .map(|(c, u)| solver.flux().killing_defect(solver.metric(), mclaw_core::ChartPoint { r: complex.cell_center(c), t: 0.0 }, u).unwrap())
            .fold(0.0, f64::max);
        let mut obs = TvSteps { complex, max_increase: 0.0 };
        solver.run(u0, &cfg.times(), &mut [&mut obs]).unwrap();
        let tol = if cfg.dim == 1 { 1e-12 } else { 1e-8 };
        ok &= defect <= 1e-12 && obs.max_increase <= tol;
        notes.push(format!("{name} {:.1e}", obs.max_increase));
    }
    for n in [64, 128] {
        let mut cfg = scenarios::scenario("shear-flat-torus").unwrap();
        cfg.n = n;
        cfg.checks = vec![Call::parse("tv_envelope").unwrap()];
        let o = execute(&cfg).unwrap();
        let rep = &o.report;
        let grows = rep.measured_tv.iter().any(|&v| v > rep.measured_tv[0]);
        let contained = rep.measured_tv.iter().zip(&rep.envelope_tv).all(|(m, e)| m <= e);
        ok &= grows && contained;
        notes.push(format!("shear n={n} TV {:.3} → {:.3} (envelope {:.3})", rep.measured_tv[0], rep.measured_tv.last().unwrap(), rep.envelope_tv.last().unwrap()));
    }
    verdict(ok, notes.join("; "))
}

fn tv_envelope(runs: &[CatalogRun]) -> Verdict {
    let mut worst = f64::NEG_INFINITY;
    let mut at = String::new();
    for r in runs {
        let rep = &r.outcome.report;
        for (m, e) in rep.measured_tv.iter().zip(&rep.envelope_tv) {
            if m - e > worst {
                worst = m - e;
                at = label(r);
            }
        }
    }
    verdict(worst <= 1e-10, format!("max(TV − envelope) = {worst:.2e} at {at}, {} runs over both numerical fluxes", runs.len()))
}

fn entropy_constant(cfg: &RunConfig) -> (f64, f64) {
    let o = execute(cfg).unwrap();
    let declared = cfg.checks.iter().find(|c| c.name == "entropy").and_then(|c| c.named("c")).and_then(|a| a.as_number()).unwrap();
    (o.entropy_constant, declared)
}

fn entropy() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for name in ["riemann-burgers", "riemann-burgers-llf"] {
        let mut cfg = scenarios::scenario(name).unwrap();
        cfg.checks = vec![Call::parse("entropy").unwrap()];
        let o = execute(&cfg).unwrap();
        let max = o.report.entropy.as_ref().unwrap().max_residual;
        ok &= max <= 1e-10;
        notes.push(format!("{name} max residual {max:.1e}"));
    }
    for name in MOVING {
        let base = scenarios::scenario(name).unwrap();
        let mut c = Vec::new();
        for n in [base.n / 2, base.n] {
            let mut cfg = base.clone();
            cfg.n = n;
            cfg.checks.retain(|c| c.name == "entropy");
            let (measured, declared) = entropy_constant(&cfg);
            ok &= measured <= declared;
            c.push(measured);
        }
        let ratio = c[1].max(c[0]) / c[1].min(c[0]);
        ok &= ratio <= 2.0;
        notes.push(format!("{name} C {:.3} → {:.3}", c[0], c[1]));
    }
    verdict(ok, notes.join("; "))
}

fn oracle_convergence() -> Verdict {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for name in ["burgers-smooth", "linear-advection"] {
        let t = convergence_study(&scenarios::scenario(name).unwrap(), &[64, 128, 256]).unwrap();
        let orders: Vec<f64> = t.orders.iter().map(|o| o.unwrap_or(f64::NAN)).collect();
        ok &= orders.iter().all(|o| (0.75..=1.1).contains(o));
        notes.push(format!("{name} EOC {:.3}, {:.3}", orders[0], orders[1]));
    }
    // f = 0 on the expanding circle: u_K(t) = u_K(0) R(0)/R(t) with R(t) = 1 + t.
    let cfg = scenarios::scenario("expanding-circle-compression").unwrap();
    let mut worst: f64 = 0.0;
    for n in [64, 128, 256] {
        let (solver, u0, _) = prepare(&cfg, n).unwrap();
        let tr = solver.run(u0.clone(), &cfg.times(), &mut []).unwrap();
        for s in &tr.states {
            let scale = 1.0 / (1.0 + s.t);
            for (u, a) in s.u.iter().zip(&u0.u) {
                worst = worst.max((u - a * scale).abs());
            }
        }
    }
    ok &= worst <= 1e-10;
    let elapsed = start.elapsed();
    ok &= elapsed <= Duration::from_secs(300);
    notes.push(format!("expanding circle closed-form error {worst:.1e}; suite {elapsed:.1?}"));
    verdict(ok, notes.join("; "))
}

fn vanishing_viscosity() -> Verdict {
    let mut cfg = RunConfig::new("viscosity-sweep", 1, 512, "flat", "burgers");
    cfg.t_end = 0.5;
    cfg.output_times = vec![0.5];
    let reference = {
        let (solver, u0, _) = prepare(&cfg, 512).unwrap();
        solver.run(u0, &[0.5], &mut []).unwrap()
    };
    let mut distances = Vec::new();
    for eps in [0.04, 0.02, 0.01, 0.005] {
        let mut c = cfg.clone();
        c.epsilon = eps;
        let (solver, u0, _) = prepare(&c, 512).unwrap();
        let tr = solver.run(u0, &[0.5], &mut []).unwrap();
        distances.push(l1_distance(&tr.last().u, &reference.last().u, &tr.snapshots[0]).unwrap());
    }
    let shrink: Vec<f64> = distances.windows(2).map(|w| 1.0 - w[1] / w[0]).collect();
    let distances: Vec<String> = distances.iter().map(|d| format!("{d:.3e}")).collect();
    let shrink_text: Vec<String> = shrink.iter().map(|s| format!("{:.0}%", 100.0 * s)).collect();
    let pass = shrink.iter().all(|&s| s >= 0.35);
    verdict(pass, format!("‖u_ε − u₀‖ = [{}]; shrink per halving [{}]", distances.join(", "), shrink_text.join(", ")))
}

fn lipschitz(runs: &[CatalogRun]) -> Verdict {
    let mut worst = f64::NEG_INFINITY;
    let mut at = String::new();
    for r in runs {
        let l = r.outcome.report.lipschitz;
        // Absolute floor: with f = 0 the weighted state is conserved up to round-off.
        let excess = l.max_quotient - 1.1 * l.bound - 1e-12;
        if excess > worst {
            worst = excess;
            at = label(r);
        }
    }
    verdict(worst <= 0.0, format!("max(quotient − 1.1·bound) = {worst:.2e} at {at}"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let runs = catalog_runs();

    let criteria: Vec<(&str, Verdict)> = vec![
        ("conservation", conservation(&runs)),
        ("L∞ envelope", linf_envelope(&runs)),
        ("comparison principle", comparison(&runs)),
        ("L1 contraction", l1_contraction(&runs)),
        ("TVD dichotomy", tvd_dichotomy()),
        ("TV envelope containment", tv_envelope(&runs)),
        ("entropy inequality", entropy()),
        ("oracle convergence", oracle_convergence()),
        ("vanishing viscosity", vanishing_viscosity()),
        ("Lipschitz in time", lipschitz(&runs)),
    ];
    let mut failed = 0;
    for (k, (name, v)) in criteria.iter().enumerate() {
        println!("{} criterion {:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, k + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {}/{} criteria passed in {:.1?}", criteria.len() - failed, criteria.len(), start.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
