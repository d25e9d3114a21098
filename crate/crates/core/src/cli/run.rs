use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{Reference, RunConfig};
use crate::analysis::{
    a_priori_bounds, discrete_tv, eoc_table, kruzkov_constants, l1_distance, oracle_cell_averages, AprioriBounds, BoundsReport, CheckOutcome, EntropyMonitor,
};
use crate::call::Call;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::flux::{flux_from_call, Profile};
use crate::geometry::{metric_from_call, MetricField};
use crate::grid::{CellComplex, GeometrySnapshot};
use crate::solver::{Observer, Solver, State, StepRecord, Trajectory};

/// Default RK4 steps of the characteristics oracle.
pub const ORACLE_STEPS: usize = 128;

/// Builds the solver of `cfg` at resolution `n`. `u_range` bounds the
/// states the Engquist–Osher breakpoints must cover.
pub fn build_solver(cfg: &RunConfig, n: usize, u_range: (f64, f64)) -> Result<Solver> {
    let metric = MetricField::new(metric_from_call(&cfg.metric, Some(cfg.dim))?);
    let profile = cfg.profile.as_deref().map(Profile::parse).transpose()?;
    let flux = flux_from_call(&cfg.flux, cfg.dim, profile)?.with_u_range(u_range.0, u_range.1);
    let complex = CellComplex::build(cfg.dim, n, cfg.quadrature)?;
    Solver::new(complex, metric, flux, cfg.scheme())
}

/// `u₀` as a callable of the chart point.
pub fn initial_data(cfg: &RunConfig) -> Result<impl Fn([f64; 2]) -> f64 + Sync> {
    let e = Expression::parse(&cfg.u0)?;
    Ok(move |r: [f64; 2]| e.eval(r, 0.0, 0.0))
}

fn upper_data(cfg: &RunConfig) -> Result<impl Fn([f64; 2]) -> f64 + Sync> {
    let e = Expression::parse(&cfg.u0)?;
    let p = Expression::parse(&cfg.perturbation)?;
    Ok(move |r: [f64; 2]| e.eval(r, 0.0, 0.0) + p.eval(r, 0.0, 0.0))
}

/// Solver whose breakpoint range covers the L∞ envelope, with the initial
/// state and the envelopes.
pub fn prepare(cfg: &RunConfig, n: usize) -> Result<(Solver, State, AprioriBounds)> {
    let probe = build_solver(cfg, n, (-1.0, 1.0))?;
    let u0 = initial_data(cfg)?;
    let state = probe.initial_state(&u0)?;
    let tv0 = discrete_tv(probe.complex(), &state.u, &*probe.snapshot(0.0)?);
    let bounds = a_priori_bounds(&probe, state.linf(), tv0, &cfg.times())?;
    let solver = if matches!(probe.flux().profile(), Profile::Expr(_)) {
        let u = bounds.u_max * (1.0 + 1e-9) + 1e-12;
        build_solver(cfg, n, (-u, u))?
    } else {
        probe
    };
    Ok((solver, state, bounds))
}

/// Largest per-step increase of the discrete TV.
#[derive(Default)]
struct TvMonitor<'a> {
    complex: Option<&'a CellComplex>,
    max_increase: f64,
}

impl Observer for TvMonitor<'_> {
    fn on_step(&mut self, r: &StepRecord<'_>) -> Result<()> {
        let c = self.complex.expect("complex set");
        let inc = discrete_tv(c, &r.after.u, r.snap_after) - discrete_tv(c, &r.before.u, r.snap_before);
        self.max_increase = self.max_increase.max(inc);
        Ok(())
    }
}

/// Result of paired runs with ordered initial data.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PairedRun {
    /// `Σ_K |u_K − ũ_K| V_K` after every step (first entry at `t = 0`).
    pub l1: Vec<f64>,
    pub times: Vec<f64>,
    /// Cells with `u_K > ũ_K`, summed over steps.
    pub violations: usize,
    pub steps: usize,
}

/// Runs `u₀` and `u₀ + perturbation` with a common step sequence.
pub fn paired_run(cfg: &RunConfig, solver: &Solver) -> Result<PairedRun> {
    let lower = solver.initial_state(&initial_data(cfg)?)?;
    let upper = solver.initial_state(&upper_data(cfg)?)?;
    let snap0 = solver.snapshot(0.0)?;
    let mut out = PairedRun {
        l1: vec![l1_distance(&lower.u, &upper.u, &snap0)?],
        times: vec![0.0],
        violations: lower.u.iter().zip(&upper.u).filter(|(a, b)| a > b).count(),
        steps: 0,
    };
    solver.run_ensemble(vec![lower, upper], &[cfg.t_end], &mut |step, states| {
        let snap = solver.snapshot(states[0].t)?;
        out.l1.push(l1_distance(&states[0].u, &states[1].u, &snap)?);
        out.times.push(states[0].t);
        out.violations += states[0].u.iter().zip(&states[1].u).filter(|(a, b)| a > b).count();
        out.steps = step;
        Ok(())
    })?;
    Ok(out)
}

/// L¹ error of the state at `t_end` against the characteristics oracle.
pub fn oracle_error(cfg: &RunConfig, n: usize, ode_steps: usize) -> Result<f64> {
    if cfg.epsilon > 0.0 {
        return Err(Error::Usage("the characteristics oracle has no viscous mode".into()));
    }
    let (solver, u0, _) = prepare(cfg, n)?;
    let tr = solver.run(u0, &[cfg.t_end], &mut [])?;
    let data = initial_data(cfg)?;
    let exact = oracle_cell_averages(&data, solver.flux(), solver.metric(), solver.complex(), cfg.t_end, ode_steps)?;
    l1_distance(&tr.last().u, &exact, &tr.snapshots[0])
}

/// Largest decrease of any output cell when one input cell is raised, over
/// `probes` random states.
fn monotonicity_probe(solver: &Solver, probes: usize, seed: u64, u_max: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nc = solver.complex().cell_count();
    let snap = solver.snapshot(0.0)?;
    let coeffs = solver.face_coefficients(&snap, 0.0);
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let mut u: Vec<f64> = (0..nc).map(|_| rng.gen_range(-u_max..=u_max)).collect();
        // Pin the extremes so small bumps stay inside the CFL range.
        u[0] = -u_max;
        u[nc - 1] = u_max;
        let st = solver.state_from_values(u.clone(), 0.0)?;
        let dt = solver.cfl_dt_on(&st, &snap, &coeffs)?;
        let base = solver.advance(&st, &snap, &snap, &coeffs, dt, dt, 0)?;
        for _ in 0..16.min(nc) {
            let k = rng.gen_range(1..nc - 1);
            let mut v = u.clone();
            v[k] = (v[k] + 1e-7 * u_max.max(1e-3)).min(u_max);
            let out = solver.advance(&solver.state_from_values(v, 0.0)?, &snap, &snap, &coeffs, dt, dt, 0)?;
            for (a, b) in out.u.iter().zip(&base.u) {
                worst = worst.max(b - a);
            }
        }
    }
    Ok(worst)
}

/// Everything a run produced, before serialization.
#[derive(Debug)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub report: BoundsReport,
    pub trajectory: Trajectory,
    pub centers: Vec<[f64; 2]>,
    pub paired: Option<PairedRun>,
    /// Entropy defect over `Δr + Δt_max`.
    pub entropy_constant: f64,
    pub pass: bool,
}

impl RunOutcome {
    pub fn failed_checks(&self) -> Vec<&str> {
        self.report.checks.iter().filter(|(_, c)| !c.pass).map(|(k, _)| k.as_str()).collect()
    }
}

fn arg(call: &Call, key: &str) -> Option<f64> {
    call.named(key).and_then(|a| a.as_number())
}

/// Runs `cfg` and evaluates its checks without touching the file system.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let (solver, u0, bounds) = prepare(cfg, cfg.n)?;
    let complex = solver.complex();
    let times = cfg.times();
    let mut entropy = EntropyMonitor::new(&solver, kruzkov_constants(bounds.u_max));
    let mut tv = TvMonitor { complex: Some(complex), max_increase: f64::NEG_INFINITY };
    let trajectory = if cfg.has_check("tv_diminishing") {
        solver.run(u0, &times, &mut [&mut entropy, &mut tv])?
    } else {
        solver.run(u0, &times, &mut [&mut entropy])?
    };
    let summary = entropy.into_summary();
    let mut report = BoundsReport::measure(complex, &trajectory, &bounds, Some(summary.clone()));
    let dr = complex.spacing();
    let dt = if trajectory.steps > 0 { trajectory.dt_max } else { 0.0 };
    let entropy_constant = summary.positive_defect / (dr + dt);
    let paired = if cfg.has_check("l1_contraction") || cfg.has_check("comparison") { Some(paired_run(cfg, &solver)?) } else { None };
    let compatible = solver.metric().is_static() && bounds.c6_max() <= 1e-10 && bounds.constants.iter().all(|c| c.c3 <= 1e-10 && c.c5 <= 1e-10);

    for call in &cfg.checks {
        let outcome = match call.name.as_str() {
            "mass" => {
                let worst = report.mass_drift.iter().copied().fold(0.0, f64::max);
                CheckOutcome::at_most(worst, 0.0, arg(call, "tol").unwrap_or(1e-12))
            }
            "linf" => worst_margin(&report.measured_linf, &report.envelope_linf, arg(call, "tol").unwrap_or(1e-10)),
            "tv_envelope" => worst_margin(&report.measured_tv, &report.envelope_tv, arg(call, "tol").unwrap_or(1e-10)),
            "tv_diminishing" => {
                let tol = arg(call, "tol").unwrap_or(if cfg.dim == 1 { 1e-12 } else { 1e-8 });
                CheckOutcome::at_most(tv.max_increase.max(0.0), 0.0, tol)
            }
            "tv_growth" => {
                let tv0 = report.measured_tv[0];
                let growth = report.measured_tv.iter().map(|v| v - tv0).fold(f64::NEG_INFINITY, f64::max);
                CheckOutcome { pass: growth > 0.0, measured: growth, bound: 0.0, tolerance: 0.0 }
            }
            "entropy" => match arg(call, "c") {
                Some(c) => CheckOutcome::at_most(summary.positive_defect, c * (dr + dt), 0.0),
                None => CheckOutcome::at_most(summary.max_residual, 0.0, arg(call, "tol").unwrap_or(1e-10)),
            },
            "l1_contraction" => {
                let p = paired.as_ref().expect("paired run");
                let slack = if compatible { 0.0 } else { 5.0 * (dr + dt) };
                let tol = arg(call, "tol").unwrap_or(1e-12);
                let worst = p
                    .l1
                    .windows(2)
                    .zip(p.times.windows(2))
                    .map(|(l, t)| l[1] - l[0] - slack * (t[1] - t[0]))
                    .fold(0.0, f64::max);
                CheckOutcome::at_most(worst, 0.0, tol * p.l1[0].max(1.0))
            }
            "comparison" => {
                let p = paired.as_ref().expect("paired run");
                CheckOutcome::at_most(p.violations as f64, 0.0, 0.0)
            }
            "lipschitz" => {
                let l = report.lipschitz;
                CheckOutcome::at_most(l.max_quotient, l.bound, 0.1 * l.bound + 1e-12)
            }
            "oracle_l1" => {
                let n = arg(call, "n").map_or(cfg.n, |v| v as usize);
                let steps = arg(call, "steps").map_or(ORACLE_STEPS, |v| v as usize);
                let err = oracle_error(cfg, n, steps)?;
                CheckOutcome::at_most(err, arg(call, "tol").unwrap_or(1e-2), 0.0)
            }
            "monotone" => {
                let probes = arg(call, "probes").map_or(4, |v| v as usize);
                let worst = monotonicity_probe(&solver, probes, cfg.seed, bounds.u_max)?;
                CheckOutcome::at_most(worst, 0.0, 1e-15)
            }
            other => return Err(Error::Config(format!("unknown check `{other}`"))),
        };
        let key = if cfg.checks.iter().filter(|c| c.name == call.name).count() > 1 { call.to_string() } else { call.name.clone() };
        report.checks.insert(key, outcome);
    }
    report.l1_contraction_series = paired.as_ref().map(|p| p.l1.clone());
    let pass = report.checks.values().all(|c| c.pass);
    let centers = (0..complex.cell_count()).map(|c| complex.cell_center(c)).collect();
    Ok(RunOutcome { config: cfg.clone(), report, trajectory, centers, paired, entropy_constant, pass })
}

/// Check on `measured ≤ envelope` at every time, reported at the time of
/// the smallest margin.
fn worst_margin(measured: &[f64], envelope: &[f64], tol: f64) -> CheckOutcome {
    let (mut m, mut b) = (measured[0], envelope[0]);
    for (x, e) in measured.iter().zip(envelope) {
        if x - e > m - b {
            (m, b) = (*x, *e);
        }
    }
    CheckOutcome::at_most(m, b, tol)
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `series.csv`, `state_<t>.csv` and `report.json` into `dir`.
pub fn write_artifacts(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let r = &outcome.report;
    let mut s = String::from("t,linf,linf_envelope,tv,tv_envelope,mass,entropy_residual_max\n");
    for k in 0..r.times.len() {
        let row = [r.times[k], r.measured_linf[k], r.envelope_linf[k], r.measured_tv[k], r.envelope_tv[k], r.mass[k], r.entropy_residual_max[k]];
        let cols: Vec<String> = row.iter().map(|v| fmt(*v)).collect();
        writeln!(s, "{}", cols.join(",")).expect("write to string");
    }
    fs::write(dir.join("series.csv"), s)?;

    let dim = outcome.config.dim;
    for st in &outcome.trajectory.states {
        let mut s = String::from(if dim == 1 { "cell_index,r1,u\n" } else { "cell_index,r1,r2,u\n" });
        for (k, (u, c)) in st.u.iter().zip(&outcome.centers).enumerate() {
            if dim == 1 {
                writeln!(s, "{k},{},{}", fmt(c[0]), fmt(*u)).expect("write to string");
            } else {
                writeln!(s, "{k},{},{},{}", fmt(c[0]), fmt(c[1]), fmt(*u)).expect("write to string");
            }
        }
        fs::write(dir.join(format!("state_{}.csv", st.t)), s)?;
    }

    let json = serde_json::json!({
        "scenario": outcome.config.name,
        "pass": outcome.pass,
        "checks": r.checks,
        "constants": r.constants,
        "u_max": r.u_max,
        "tv_max": r.tv_max,
        "lipschitz": r.lipschitz,
        "entropy": r.entropy,
        "entropy_constant": outcome.entropy_constant,
        "steps": outcome.trajectory.steps,
        "dt_min": outcome.trajectory.dt_min,
        "dt_max": outcome.trajectory.dt_max,
        "config": outcome.config,
    });
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&json).expect("serializable report"))?;
    Ok(())
}

/// [`execute`] followed by [`write_artifacts`].
pub fn run_scenario(cfg: &RunConfig, dir: &Path) -> Result<RunOutcome> {
    let outcome = execute(cfg)?;
    write_artifacts(&outcome, dir)?;
    Ok(outcome)
}

/// Per-resolution L¹ errors and observed orders.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub resolutions: Vec<usize>,
    pub errors: Vec<f64>,
    /// `None` where both errors are at round-off level.
    pub orders: Vec<Option<f64>>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,l1_error,order\n");
        for (k, (n, e)) in self.resolutions.iter().zip(&self.errors).enumerate() {
            let order = match k.checked_sub(1).map(|j| self.orders[j]) {
                None => String::new(),
                Some(None) => "exact".into(),
                Some(Some(o)) => fmt(o),
            };
            writeln!(s, "{n},{},{order}", fmt(*e)).expect("write to string");
        }
        s
    }
}

/// Cell averages of a fine state on a grid `factor` times coarser.
fn restrict(fine: &[f64], fine_snap: &GeometrySnapshot, dim: usize, n_fine: usize, factor: usize) -> Vec<f64> {
    let n = n_fine / factor;
    let cells = n.pow(dim as u32);
    let (mut num, mut den) = (vec![0.0; cells], vec![0.0; cells]);
    for (k, (u, v)) in fine.iter().zip(&fine_snap.cell_volumes).enumerate() {
        let (i, j) = (k % n_fine, k / n_fine);
        let c = i / factor + n * (j / factor);
        num[c] += u * v;
        den[c] += v;
    }
    num.iter().zip(&den).map(|(a, b)| a / b).collect()
}

/// L¹ errors at `resolutions` against the oracle or a finer reference run.
pub fn convergence_study(cfg: &RunConfig, resolutions: &[usize]) -> Result<ConvergenceTable> {
    cfg.validate()?;
    if resolutions.len() < 2 {
        return Err(Error::Usage("a convergence study needs at least two resolutions".into()));
    }
    let errors = match cfg.reference {
        Reference::Oracle => {
            if cfg.epsilon > 0.0 {
                return Err(Error::Usage("no characteristics oracle for viscous runs; set `reference = fine(4)` in [run]".into()));
            }
            resolutions.iter().map(|&n| oracle_error(cfg, n, ORACLE_STEPS)).collect::<Result<Vec<_>>>()?
        }
        Reference::FineGrid(factor) => {
            let finest = resolutions.iter().copied().max().expect("nonempty");
            let n_ref = finest * factor;
            if resolutions.iter().any(|n| n_ref % n != 0) {
                return Err(Error::Usage(format!("reference resolution {n_ref} is not a multiple of every resolution")));
            }
            let (solver, u0, _) = prepare(cfg, n_ref)?;
            let fine = solver.run(u0, &[cfg.t_end], &mut [])?;
            let fine_snap = fine.snapshots[0].clone();
            resolutions
                .iter()
                .map(|&n| {
                    let (solver, u0, _) = prepare(cfg, n)?;
                    let tr = solver.run(u0, &[cfg.t_end], &mut [])?;
                    let reference = restrict(&fine.last().u, &fine_snap, cfg.dim, n_ref, n_ref / n);
                    l1_distance(&tr.last().u, &reference, &tr.snapshots[0])
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(ConvergenceTable { resolutions: resolutions.to_vec(), orders: eoc_table(&errors), errors })
}
