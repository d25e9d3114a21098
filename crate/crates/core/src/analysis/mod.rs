//! Measured quantities of trajectories and the envelopes they must respect.

mod entropy;
mod envelope;
mod oracle;

use std::collections::BTreeMap;

use serde::Serialize;

pub use entropy::{kruzkov_constants, step_residuals, EntropyMonitor, EntropyPair, EntropySummary, KRUZKOV_SAMPLES};
pub use envelope::{a_priori_bounds, linf_envelope, tv_envelope, AprioriBounds, TIME_SAMPLES};
pub use oracle::{characteristics_oracle, oracle_cell_averages, InitialData, FOOT_TOLERANCE};

use crate::error::{Error, Result};
use crate::flux::CConstants;
use crate::grid::{CellComplex, GeometrySnapshot};
use crate::solver::Trajectory;

/// `Σ_faces |u_L − u_R| · |face|`: the jump variation of a piecewise
/// constant state (axis-aligned in two dimensions, face measure one on a
/// curve).
pub fn discrete_tv(complex: &CellComplex, u: &[f64], snap: &GeometrySnapshot) -> f64 {
    (0..complex.face_count())
        .map(|f| {
            let (l, r) = complex.face_cells(f);
            (u[l] - u[r]).abs() * snap.face_measures[f]
        })
        .sum()
}

/// `Σ_K |a_K − b_K| V_K`.
pub fn l1_distance(a: &[f64], b: &[f64], snap: &GeometrySnapshot) -> Result<f64> {
    if a.len() != b.len() || a.len() != snap.cell_volumes.len() {
        return Err(Error::Usage(format!(
            "L¹ distance between states of {} and {} cells on a grid of {}",
            a.len(),
            b.len(),
            snap.cell_volumes.len()
        )));
    }
    Ok(a.iter().zip(b).zip(&snap.cell_volumes).map(|((x, y), v)| (x - y).abs() * v).sum())
}

/// Observed orders `log₂(e_n / e_2n)` between consecutive resolutions.
/// `None` marks pairs at round-off level, where no order is defined.
pub fn eoc_table(errors: &[f64]) -> Vec<Option<f64>> {
    errors
        .windows(2)
        .map(|w| if w[0] <= ROUND_OFF_ERROR || w[1] <= ROUND_OFF_ERROR { None } else { Some((w[0] / w[1]).log2()) })
        .collect()
}

/// Errors at or below this are treated as exact by [`eoc_table`].
pub const ROUND_OFF_ERROR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct LipschitzResult {
    /// `max_{s<t} Σ_K |u_K(t)V_K(t) − u_K(s)V_K(s)| / (t − s)` over stored
    /// times.
    pub max_quotient: f64,
    /// `c₆ + c₇ · tv_max`.
    pub bound: f64,
}

/// Largest difference quotient of `t ↦ u v` in `L¹(g(0))` over the stored
/// states, with `v = V_K(t)/V_K(0)` per cell.
pub fn lipschitz_check(trajectory: &Trajectory, c6: f64, c7: f64, tv_max: f64) -> LipschitzResult {
    let weighted: Vec<Vec<f64>> = trajectory
        .states
        .iter()
        .zip(&trajectory.snapshots)
        .map(|(s, snap)| s.u.iter().zip(&snap.cell_volumes).map(|(u, v)| u * v).collect())
        .collect();
    let times = trajectory.times();
    let mut max_quotient: f64 = 0.0;
    for j in 1..weighted.len() {
        for i in 0..j {
            let dt = times[j] - times[i];
            if dt <= 0.0 {
                continue;
            }
            let d: f64 = weighted[j].iter().zip(&weighted[i]).map(|(a, b)| (a - b).abs()).sum();
            max_quotient = max_quotient.max(d / dt);
        }
    }
    LipschitzResult { max_quotient, bound: c6 + c7 * tv_max }
}

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub pass: bool,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    /// `measured ≤ bound + tolerance`.
    pub fn at_most(measured: f64, bound: f64, tolerance: f64) -> Self {
        Self { pass: measured <= bound + tolerance, measured, bound, tolerance }
    }
}

/// Measured series of a run next to their envelopes.
#[derive(Clone, Debug, Default, Serialize)]
pub struct BoundsReport {
    pub times: Vec<f64>,
    pub measured_linf: Vec<f64>,
    pub envelope_linf: Vec<f64>,
    pub measured_tv: Vec<f64>,
    pub envelope_tv: Vec<f64>,
    pub mass: Vec<f64>,
    /// `|M(t) − M(0)| / Σ|u_K|V_K(t)`.
    pub mass_drift: Vec<f64>,
    pub entropy_residual_max: Vec<f64>,
    pub entropy: Option<EntropySummary>,
    pub l1_contraction_series: Option<Vec<f64>>,
    pub lipschitz: LipschitzResult,
    pub u_max: f64,
    pub tv_max: f64,
    pub constants: Vec<CConstants>,
    pub checks: BTreeMap<String, CheckOutcome>,
}

impl BoundsReport {
    /// Collects the series of `trajectory` against `bounds`, whose sample
    /// times must contain the trajectory's output times.
    pub fn measure(complex: &CellComplex, trajectory: &Trajectory, bounds: &AprioriBounds, entropy: Option<EntropySummary>) -> Self {
        let times = trajectory.times();
        let mass0 = trajectory.states.first().map_or(0.0, |s| s.mass);
        let mut r = BoundsReport {
            envelope_linf: times.iter().map(|&t| bounds.linf_at(t)).collect(),
            envelope_tv: times.iter().map(|&t| bounds.tv_at(t)).collect(),
            times,
            u_max: bounds.u_max,
            tv_max: bounds.tv_max,
            constants: bounds.constants.clone(),
            ..Self::default()
        };
        for (s, snap) in trajectory.states.iter().zip(&trajectory.snapshots) {
            r.measured_linf.push(s.linf());
            r.measured_tv.push(discrete_tv(complex, &s.u, snap));
            r.mass.push(s.mass);
            let scale = s.abs_mass(snap);
            r.mass_drift.push(if scale > 0.0 { (s.mass - mass0).abs() / scale } else { 0.0 });
        }
        r.entropy_residual_max = match &entropy {
            Some(e) => e.at_outputs.clone(),
            None => vec![f64::NAN; r.times.len()],
        };
        r.entropy = entropy;
        r.lipschitz = lipschitz_check(trajectory, bounds.c6_max(), bounds.c7_max(), bounds.tv_max);
        r
    }
}
