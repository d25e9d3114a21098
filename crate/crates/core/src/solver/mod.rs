//! Forward-Euler finite-volume scheme for the integral balance
//!
//! ```text
//! u_K(t+Δt) V_K(t+Δt) = u_K(t) V_K(t) − Δt Σ_faces F + Δt ε Σ_faces D
//! ```
//!
//! with monotone two-point fluxes `F`, optional two-point diffusive fluxes
//! `D`, and cell volumes evaluated at both time levels. The compression term
//! `λu` is carried by the change of `V_K`, so no source quadrature enters.
//!
//! Face fluxes use `h(u) = H · φ(u)` with `H = ∫_face ⟨V, n⟩ dV_∂K`
//! integrated by the face quadrature of the [`CellComplex`].

mod numflux;

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

pub use numflux::{engquist_osher, normal_flux, NumericalFlux};

use crate::error::{Error, Result};
use crate::flux::{FluxField, Profile};
use crate::geometry::{diffusive_face_fluxes, MetricField};
use crate::grid::{CellComplex, GeometrySnapshot};

/// Largest relative volume change allowed per step.
pub const VOLUME_CHANGE_CAP: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct State {
    pub u: Vec<f64>,
    pub t: f64,
    /// `Σ u_K V_K(t)`.
    pub mass: f64,
}

impl State {
    pub fn new(u: Vec<f64>, t: f64, snap: &GeometrySnapshot) -> Self {
        let mass = mass_of(&u, snap);
        Self { u, t, mass }
    }

    pub fn linf(&self) -> f64 {
        self.u.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn range(&self) -> (f64, f64) {
        self.u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// `Σ |u_K| V_K(t)`.
    pub fn abs_mass(&self, snap: &GeometrySnapshot) -> f64 {
        self.u.iter().zip(&snap.cell_volumes).map(|(u, v)| u.abs() * v).sum()
    }
}

fn mass_of(u: &[f64], snap: &GeometrySnapshot) -> f64 {
    u.iter().zip(&snap.cell_volumes).map(|(u, v)| u * v).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeConfig {
    pub numerical_flux: NumericalFlux,
    pub cfl: f64,
    pub epsilon: f64,
    pub t_end: f64,
    pub max_steps: usize,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self { numerical_flux: NumericalFlux::EngquistOsher, cfl: 0.45, epsilon: 0.0, t_end: 1.0, max_steps: 2_000_000 }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::Config(format!("epsilon must be ≥ 0, got {}", self.epsilon)));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::Config(format!("t_end must be > 0, got {}", self.t_end)));
        }
        Ok(())
    }
}

/// One completed step, handed to observers.
pub struct StepRecord<'a> {
    pub step: usize,
    pub dt: f64,
    pub before: &'a State,
    pub after: &'a State,
    pub snap_before: &'a GeometrySnapshot,
    pub snap_after: &'a GeometrySnapshot,
    /// `H` per face at the start of the step.
    pub face_coefficients: &'a [f64],
}

/// Analysis hook driven by [`Solver::run`].
pub trait Observer {
    fn on_step(&mut self, _record: &StepRecord<'_>) -> Result<()> {
        Ok(())
    }

    fn on_output(&mut self, _state: &State, _snap: &GeometrySnapshot) -> Result<()> {
        Ok(())
    }
}

/// States at the requested output times.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub snapshots: Vec<Arc<GeometrySnapshot>>,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory has at least one state")
    }
}

#[derive(Clone, Debug)]
pub struct Solver {
    complex: CellComplex,
    metric: MetricField,
    flux: FluxField,
    scheme: SchemeConfig,
    breakpoints: Vec<f64>,
    static_snapshot: Option<Arc<GeometrySnapshot>>,
    static_coefficients: Option<Arc<Vec<f64>>>,
}

impl Solver {
    pub fn new(complex: CellComplex, metric: MetricField, flux: FluxField, scheme: SchemeConfig) -> Result<Self> {
        scheme.validate()?;
        if metric.dim() != complex.dim() || flux.dim() != complex.dim() {
            return Err(Error::Usage(format!(
                "dimension mismatch: grid {}, metric {}, flux {}",
                complex.dim(),
                metric.dim(),
                flux.dim()
            )));
        }
        let metric = metric.with_interval(0.0, scheme.t_end);
        let breakpoints = eo_breakpoints(flux.profile(), flux.u_range_hint());
        let mut solver = Self {
            complex,
            metric,
            flux,
            scheme,
            breakpoints,
            static_snapshot: None,
            static_coefficients: None,
        };
        if solver.metric.is_static() {
            let snap = Arc::new(solver.complex.snapshot(&solver.metric, 0.0)?);
            if solver.flux.is_static() {
                solver.static_coefficients = Some(Arc::new(solver.compute_coefficients(&snap, 0.0)));
            }
            solver.static_snapshot = Some(snap);
        }
        Ok(solver)
    }

    pub fn complex(&self) -> &CellComplex {
        &self.complex
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn flux(&self) -> &FluxField {
        &self.flux
    }

    pub fn scheme(&self) -> &SchemeConfig {
        &self.scheme
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn snapshot(&self, t: f64) -> Result<Arc<GeometrySnapshot>> {
        match &self.static_snapshot {
            Some(s) => Ok(Arc::new(GeometrySnapshot { t, ..(**s).clone() })),
            None => Ok(Arc::new(self.complex.snapshot(&self.metric, t)?)),
        }
    }

    fn snapshot_shared(&self, t: f64) -> Result<Arc<GeometrySnapshot>> {
        match &self.static_snapshot {
            Some(s) => Ok(s.clone()),
            None => Ok(Arc::new(self.complex.snapshot(&self.metric, t)?)),
        }
    }

    /// Cell averages of `u0` at `t = 0`.
    pub fn initial_state(&self, u0: &(dyn Fn([f64; 2]) -> f64 + Sync)) -> Result<State> {
        let u = self.complex.cell_averages(&self.metric, 0.0, u0)?;
        let snap = self.snapshot_shared(0.0)?;
        Ok(State::new(u, 0.0, &snap))
    }

    pub fn state_from_values(&self, u: Vec<f64>, t: f64) -> Result<State> {
        if u.len() != self.complex.cell_count() {
            return Err(Error::Usage(format!("{} values for {} cells", u.len(), self.complex.cell_count())));
        }
        let snap = self.snapshot_shared(t)?;
        Ok(State::new(u, t, &snap))
    }

    /// `H_f = Σ_q W_q V^a(x_q, t)` for every face.
    pub fn face_coefficients(&self, snap: &GeometrySnapshot, t: f64) -> Arc<Vec<f64>> {
        match &self.static_coefficients {
            Some(h) => h.clone(),
            None => Arc::new(self.compute_coefficients(snap, t)),
        }
    }

    fn compute_coefficients(&self, snap: &GeometrySnapshot, t: f64) -> Vec<f64> {
        if self.flux.is_zero() {
            return vec![0.0; self.complex.face_count()];
        }
        let field = self.flux.field();
        (0..self.complex.face_count())
            .into_par_iter()
            .map(|f| {
                let axis = self.complex.face_axis(f);
                snap.face_points(f).map(|(p, w)| w * field.value(p, t)[axis]).sum()
            })
            .collect()
    }

    /// Monotone flux across face `f` for `uL = a`, `uR = b`.
    pub fn face_flux(&self, coeff: f64, a: f64, b: f64) -> f64 {
        normal_flux(self.scheme.numerical_flux, self.flux.profile(), &self.breakpoints, coeff, a, b)
    }

    /// Advective face fluxes of `u`.
    pub fn advective_fluxes(&self, u: &[f64], coeffs: &[f64]) -> Vec<f64> {
        if self.flux.is_zero() {
            return vec![0.0; coeffs.len()];
        }
        (0..self.complex.face_count())
            .into_par_iter()
            .map(|f| {
                let (l, r) = self.complex.face_cells(f);
                self.face_flux(coeffs[f], u[l], u[r])
            })
            .collect()
    }

    /// Largest stable step for `state` on `snap`, before the output-time cap.
    ///
    /// For every cell the rate bounds `Σ_faces ∂F_out/∂u_K` over the state
    /// range, so that `Δt · rate ≤ cfl · V_K` keeps the update monotone.
    pub fn cfl_dt_on(&self, state: &State, snap: &GeometrySnapshot, coeffs: &[f64]) -> Result<f64> {
        let (lo, hi) = state.range();
        let nc = self.complex.cell_count();
        let mut rate = vec![0.0; nc];
        if !self.flux.is_zero() {
            let profile = self.flux.profile();
            match self.scheme.numerical_flux {
                NumericalFlux::EngquistOsher => {
                    let (right, left) = profile.slope_bounds(lo, hi);
                    let mut outward = vec![(0.0, 0.0); nc];
                    for (f, &h) in coeffs.iter().enumerate() {
                        let (l, r) = self.complex.face_cells(f);
                        outward[l].0 += h.max(0.0);
                        outward[l].1 += (-h).max(0.0);
                        outward[r].0 += (-h).max(0.0);
                        outward[r].1 += h.max(0.0);
                    }
                    for (rk, (p, m)) in rate.iter_mut().zip(outward) {
                        *rk = (right * p).max(left * m);
                    }
                }
                NumericalFlux::LocalLaxFriedrichs => {
                    // The local dissipation coefficient varies with the data;
                    // its derivative adds ½ |H| (hi − lo) max|φ″|.
                    let w = profile.max_slope(lo, hi) + 0.5 * (hi - lo) * profile.curvature_bound(lo, hi);
                    for (f, &h) in coeffs.iter().enumerate() {
                        let (l, r) = self.complex.face_cells(f);
                        rate[l] += h.abs() * w;
                        rate[r] += h.abs() * w;
                    }
                }
            }
        }
        let eps = self.scheme.epsilon;
        if eps > 0.0 {
            let h = self.complex.spacing();
            for f in 0..self.complex.face_count() {
                let w = eps * (snap.transmissibility[f] + snap.cross_transmissibility[f].abs() / h);
                let (l, r) = self.complex.face_cells(f);
                rate[l] += w;
                rate[r] += w;
            }
        }
        let mut dt = f64::INFINITY;
        let mut motion: f64 = 0.0;
        for (k, v) in snap.cell_volumes.iter().enumerate() {
            if rate[k] > 0.0 {
                dt = dt.min(self.scheme.cfl * v / rate[k]);
            }
            motion = motion.max((snap.cell_lambda[k] / v).abs());
        }
        if motion > 0.0 {
            dt = dt.min(VOLUME_CHANGE_CAP / motion);
        }
        dt = dt.min(self.scheme.t_end);
        if !(dt >= 1e-12 * self.scheme.t_end) {
            return Err(Error::SolverAbort { step: 0, reason: format!("time step underflow (Δt = {dt:e})") });
        }
        Ok(dt)
    }

    /// Step size for `state` at its own time.
    pub fn cfl_dt(&self, state: &State) -> Result<f64> {
        let snap = self.snapshot_shared(state.t)?;
        let coeffs = self.face_coefficients(&snap, state.t);
        self.cfl_dt_on(state, &snap, &coeffs)
    }

    /// Net face values `F − εD` per face.
    pub fn face_values(&self, u: &[f64], snap: &GeometrySnapshot, coeffs: &[f64]) -> Vec<f64> {
        let mut g = self.advective_fluxes(u, coeffs);
        if self.scheme.epsilon > 0.0 {
            let d = diffusive_face_fluxes(&self.complex, snap, u);
            for (gi, di) in g.iter_mut().zip(d) {
                *gi -= self.scheme.epsilon * di;
            }
        }
        g
    }

    /// Applies the update with step `dt`, producing the state at `t_new`.
    #[allow(clippy::too_many_arguments)]
    pub fn advance(&self, state: &State, before: &GeometrySnapshot, after: &GeometrySnapshot, coeffs: &[f64], dt: f64, t_new: f64, step: usize) -> Result<State> {
        let values = self.face_values(&state.u, before, coeffs);
        let net = self.complex.net_outflow(&values);
        let mut u = Vec::with_capacity(state.u.len());
        for k in 0..state.u.len() {
            let v = (state.u[k] * before.cell_volumes[k] - dt * net[k]) / after.cell_volumes[k];
            if !v.is_finite() {
                return Err(Error::SolverAbort { step, reason: format!("non-finite value in cell {k}") });
            }
            u.push(v);
        }
        Ok(State::new(u, t_new, after))
    }

    /// One CFL-limited step (capped at `t_end`).
    pub fn step(&self, state: &State) -> Result<State> {
        let before = self.snapshot_shared(state.t)?;
        let coeffs = self.face_coefficients(&before, state.t);
        let dt = self.cfl_dt_on(state, &before, &coeffs)?.min(self.scheme.t_end - state.t);
        if !(dt > 0.0) {
            return Err(Error::Usage(format!("state at t = {} is already at t_end", state.t)));
        }
        let after = self.snapshot_shared(state.t + dt)?;
        self.advance(state, &before, &after, &coeffs, dt, state.t + dt, 0)
    }

    /// Integrates to every time in `outputs` (sorted, within `[t, t_end]`),
    /// calling observers after each step and at each output.
    pub fn run(&self, initial: State, outputs: &[f64], observers: &mut [&mut dyn Observer]) -> Result<Trajectory> {
        let mut trajectories = self.drive(vec![initial], outputs, &mut |event| {
            match event {
                Event::Step(records) => {
                    for o in observers.iter_mut() {
                        o.on_step(&records[0])?;
                    }
                }
                Event::Output(states, snap) => {
                    for o in observers.iter_mut() {
                        o.on_output(&states[0], snap)?;
                    }
                }
            }
            Ok(())
        })?;
        Ok(trajectories.remove(0))
    }

    /// Advances several initial states with a common step sequence (the
    /// smallest admissible step of the members). `on_step` sees all members
    /// after every step.
    pub fn run_ensemble(&self, initial: Vec<State>, outputs: &[f64], on_step: &mut dyn FnMut(usize, &[State]) -> Result<()>) -> Result<Vec<Trajectory>> {
        self.drive(initial, outputs, &mut |event| match event {
            Event::Step(records) => {
                let states: Vec<State> = records.iter().map(|r| r.after.clone()).collect();
                on_step(records[0].step, &states)
            }
            Event::Output(..) => Ok(()),
        })
    }

    fn drive(&self, initial: Vec<State>, outputs: &[f64], hook: &mut dyn FnMut(Event<'_>) -> Result<()>) -> Result<Vec<Trajectory>> {
        if initial.is_empty() {
            return Err(Error::Usage("no initial state".into()));
        }
        let t0 = initial[0].t;
        if initial.iter().any(|s| s.t != t0 || s.u.len() != self.complex.cell_count()) {
            return Err(Error::Usage("initial states must share time and grid".into()));
        }
        if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.iter().any(|&o| o < t0 || o > self.scheme.t_end) {
            return Err(Error::Usage(format!("output times must be sorted within [{t0}, {}]", self.scheme.t_end)));
        }
        let members = initial.len();
        let mut trajectories: Vec<Trajectory> = (0..members)
            .map(|_| Trajectory { states: Vec::new(), snapshots: Vec::new(), steps: 0, dt_min: f64::INFINITY, dt_max: 0.0 })
            .collect();
        let mut states = initial;
        let mut t = t0;
        let mut snap = self.snapshot_shared(t)?;
        let mut next_output = 0;
        let mut step = 0;
        loop {
            while next_output < outputs.len() && outputs[next_output] <= t {
                hook(Event::Output(&states, &snap))?;
                for (tr, s) in trajectories.iter_mut().zip(&states) {
                    tr.states.push(s.clone());
                    tr.snapshots.push(snap.clone());
                }
                next_output += 1;
            }
            if next_output == outputs.len() {
                break;
            }
            if step >= self.scheme.max_steps {
                return Err(Error::SolverAbort { step, reason: format!("max_steps = {} reached at t = {t}", self.scheme.max_steps) });
            }
            let coeffs = self.face_coefficients(&snap, t);
            let mut dt = f64::INFINITY;
            for s in &states {
                dt = dt.min(self.cfl_dt_on(s, &snap, &coeffs).map_err(|e| with_step(e, step))?);
            }
            let target = outputs[next_output];
            // Landing within round-off of an output would leave a sliver step.
            let t_next = if t + dt >= target - 1e-12 * target.abs().max(1.0) { target } else { t + dt };
            let dt = t_next - t;
            let after = self.snapshot_shared(t_next)?;
            let new_states = states
                .iter()
                .map(|s| self.advance(s, &snap, &after, &coeffs, dt, t_next, step))
                .collect::<Result<Vec<_>>>()?;
            step += 1;
            {
                let records: Vec<StepRecord<'_>> = states
                    .iter()
                    .zip(&new_states)
                    .map(|(b, a)| StepRecord {
                        step,
                        dt,
                        before: b,
                        after: a,
                        snap_before: &snap,
                        snap_after: &after,
                        face_coefficients: &coeffs,
                    })
                    .collect();
                hook(Event::Step(&records))?;
            }
            for tr in trajectories.iter_mut() {
                tr.steps = step;
                tr.dt_min = tr.dt_min.min(dt);
                tr.dt_max = tr.dt_max.max(dt);
            }
            states = new_states;
            snap = after;
            t = t_next;
        }
        Ok(trajectories)
    }
}

enum Event<'a> {
    Step(&'a [StepRecord<'a>]),
    Output(&'a [State], &'a GeometrySnapshot),
}

fn with_step(e: Error, step: usize) -> Error {
    match e {
        Error::SolverAbort { reason, .. } => Error::SolverAbort { step, reason },
        other => other,
    }
}

/// Sorted `u` values in `range` at which `φ′` changes sign.
pub fn eo_breakpoints(profile: &Profile, range: (f64, f64)) -> Vec<f64> {
    profile.breakpoints(range.0, range.1)
}
