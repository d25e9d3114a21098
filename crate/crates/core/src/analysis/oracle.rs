use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flux::FluxField;
use crate::geometry::{ChartPoint, MetricField};
use crate::grid::CellComplex;
use crate::linalg;

/// Foot-point tolerance in chart units.
pub const FOOT_TOLERANCE: f64 = 1e-10;
const MAX_NEWTON: usize = 60;

/// Initial data `r ↦ u₀(r)` accepted by the oracle.
pub type InitialData<'a> = &'a (dyn Fn([f64; 2]) -> f64 + Sync);

/// Periodic difference `a − b` mapped to `[−½, ½)`.
fn periodic_diff(a: f64, b: f64) -> f64 {
    let d = a - b;
    d - (d + 0.5).floor()
}

struct Characteristic<'a> {
    flux: &'a FluxField,
    metric: &'a MetricField,
    dim: usize,
}

impl Characteristic<'_> {
    /// `(dr/dt, du/dt)` at `(r, u, t)`.
    fn rhs(&self, r: [f64; 2], u: f64, t: f64) -> Result<([f64; 2], f64)> {
        let p = ChartPoint::new(&r[..self.dim], t);
        let dr = self.flux.du_components(p.r, t, u);
        let lambda = self.metric.lambda_at(p)?;
        let du = -lambda * u - self.flux.divx_at(self.metric, p, u)?;
        Ok((dr, du))
    }

    /// Classical RK4 from `(ξ, u₀(ξ))` at `t = 0` to `t_end`.
    fn shoot(&self, xi: [f64; 2], u0: f64, t_end: f64, steps: usize) -> Result<([f64; 2], f64)> {
        let h = t_end / steps as f64;
        let (mut r, mut u) = (xi, u0);
        let axpy = |r: [f64; 2], a: f64, k: [f64; 2]| [r[0] + a * k[0], r[1] + a * k[1]];
        for s in 0..steps {
            let t = s as f64 * h;
            let (k1r, k1u) = self.rhs(r, u, t)?;
            let (k2r, k2u) = self.rhs(axpy(r, 0.5 * h, k1r), u + 0.5 * h * k1u, t + 0.5 * h)?;
            let (k3r, k3u) = self.rhs(axpy(r, 0.5 * h, k2r), u + 0.5 * h * k2u, t + 0.5 * h)?;
            let (k4r, k4u) = self.rhs(axpy(r, h, k3r), u + h * k3u, t + h)?;
            for i in 0..2 {
                r[i] += h / 6.0 * (k1r[i] + 2.0 * k2r[i] + 2.0 * k3r[i] + k4r[i]);
            }
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        }
        Ok((r, u))
    }
}

/// Value of the smooth solution at `p` (time `p.t`) by the method of
/// characteristics.
///
/// Characteristics solve `dr/dt = ∂_u f`, `du/dt = −λu − div^x f` and are
/// integrated with `ode_steps` RK4 steps. The foot point is found by Newton
/// iteration on the periodic arrival mismatch with a difference Jacobian.
/// Folded characteristics or a stalled iteration are reported as errors.
pub fn characteristics_oracle(u0: InitialData<'_>, flux: &FluxField, metric: &MetricField, p: ChartPoint, ode_steps: usize) -> Result<f64> {
    let dim = metric.dim();
    let t = p.t;
    if t == 0.0 {
        return Ok(u0(p.r));
    }
    if ode_steps == 0 {
        return Err(Error::Usage("ode_steps must be positive".into()));
    }
    let ch = Characteristic { flux, metric, dim };
    let mismatch = |xi: [f64; 2]| -> Result<([f64; 2], f64)> {
        let (r, u) = ch.shoot(xi, u0(xi), t, ode_steps)?;
        let mut m = [0.0; 2];
        for i in 0..dim {
            m[i] = periodic_diff(r[i], p.r[i]);
        }
        Ok((m, u))
    };
    let speed = flux.du_components(p.r, 0.0, u0(p.r));
    let mut xi = p.r;
    for i in 0..dim {
        xi[i] = p.r[i] - t * speed[i];
    }
    let fd = 1e-7;
    for _ in 0..MAX_NEWTON {
        let (m, u) = mismatch(xi)?;
        let mut jac = [[0.0; 2]; 2];
        for j in 0..dim {
            let mut x = xi;
            x[j] += fd;
            let (mj, _) = mismatch(x)?;
            for i in 0..dim {
                jac[i][j] = periodic_diff(mj[i], m[i]) / fd;
            }
        }
        if dim == 1 {
            jac[1][1] = 1.0;
        }
        // A fold of the characteristic map (non-positive Jacobian) means
        // the data has already steepened into a shock.
        if !(linalg::det(2, &jac) > 1e-8) {
            return Err(Error::Oracle(format!("characteristics cross near r = {:?}, t = {t}", p.r)));
        }
        if m.iter().take(dim).all(|v| v.abs() <= FOOT_TOLERANCE) {
            return Ok(u);
        }
        let inv = linalg::inverse(2, &jac);
        for i in 0..dim {
            let step: f64 = (0..dim).map(|j| inv[i][j] * m[j]).sum();
            xi[i] -= step;
        }
    }
    Err(Error::Oracle(format!("foot-point iteration did not converge at r = {:?}, t = {t}", p.r)))
}

/// `dV`-weighted cell averages of the oracle solution at time `t`.
pub fn oracle_cell_averages(
    u0: InitialData<'_>,
    flux: &FluxField,
    metric: &MetricField,
    complex: &CellComplex,
    t: f64,
    ode_steps: usize,
) -> Result<Vec<f64>> {
    (0..complex.cell_count())
        .into_par_iter()
        .map(|c| {
            let (mut num, mut den) = (0.0, 0.0);
            for (r, w) in complex.cell_quadrature(c) {
                let p = ChartPoint { r, t };
                let s = metric.metric_at(p)?;
                num += w * s.sqrt_det_g * characteristics_oracle(u0, flux, metric, p, ode_steps)?;
                den += w * s.sqrt_det_g;
            }
            Ok(num / den)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;
    use crate::call::Call;
    use crate::geometry::wrap;
    use crate::flux::flux_from_call;
    use crate::geometry::{ExpandingCircle, Flat};

    fn flux(s: &str, dim: usize) -> FluxField {
        flux_from_call(&Call::parse(s).unwrap(), dim, None).unwrap()
    }

    #[test]
    fn pure_compression_on_expanding_circle() {
        let m = MetricField::from_family(ExpandingCircle { r0: 1.0, rate: 1.0 });
        let f = FluxField::zero(1);
        let u0 = |r: [f64; 2]| 1.0 + (TAU * r[0]).sin();
        for &(r, t) in &[(0.1, 0.5), (0.7, 1.0)] {
            let v = characteristics_oracle(&u0, &f, &m, ChartPoint::new(&[r], t), 200).unwrap();
            assert!((v - u0([r, 0.0]) / (1.0 + t)).abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn burgers_matches_implicit_formula() {
        let m = MetricField::from_family(Flat { dim: 1 });
        let f = flux("burgers", 1);
        let u0 = |r: [f64; 2]| 0.1 * (TAU * r[0]).sin();
        for &r in &[0.05, 0.3, 0.5, 0.81] {
            let v = characteristics_oracle(&u0, &f, &m, ChartPoint::new(&[r], 0.5), 20).unwrap();
            // u = u₀(r − u t) by fixed-point iteration.
            let mut w = 0.0;
            for _ in 0..200 {
                w = u0([r - 0.5 * w, 0.0]);
            }
            assert!((v - w).abs() < 1e-9, "{r}: {v} {w}");
        }
    }

    #[test]
    fn linear_advection_translates() {
        let m = MetricField::from_family(Flat { dim: 2 });
        let f = flux("linear_advection(1, 0.5)", 2);
        let u0 = |r: [f64; 2]| (TAU * r[0]).cos() * (TAU * r[1]).sin();
        let p = ChartPoint::new(&[0.2, 0.9], 0.7);
        let v = characteristics_oracle(&u0, &f, &m, p, 10).unwrap();
        let want = u0([wrap(0.2 - 0.7), wrap(0.9 - 0.35)]);
        assert!((v - want).abs() < 1e-12);
    }

    #[test]
    fn shocked_data_is_reported() {
        let m = MetricField::from_family(Flat { dim: 1 });
        let f = flux("burgers", 1);
        let u0 = |r: [f64; 2]| (TAU * r[0]).sin();
        let err = characteristics_oracle(&u0, &f, &m, ChartPoint::new(&[0.5], 0.5), 50).unwrap_err();
        assert!(matches!(err, Error::Oracle(_)));
    }
}
