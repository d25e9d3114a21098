use rayon::prelude::*;
use serde::Serialize;

use super::{FluxField, GRADIENT_FD_STEP};
use crate::error::Result;
use crate::geometry::{ChartPoint, MetricField};
use crate::grid::CellComplex;
use crate::linalg;

/// Evenly spaced `ū` samples in `[−u_max, u_max]`.
pub const U_SAMPLES: usize = 65;

/// Sampled constants of the a-priori bounds at one time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CConstants {
    pub t: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    /// `sup |ric|` over the sample points, in the operator norm relative to `g`.
    pub ricci_sup: f64,
    pub x_samples: usize,
    pub u_samples: usize,
}

struct PointData {
    weight: f64,
    lambda: f64,
    grad_lambda: f64,
    div: f64,
    grad_div: f64,
    dtg_min: f64,
    s_min: f64,
    s_max: f64,
    v_norm: f64,
    ricci: f64,
}

/// Samples `c₂ … c₇` at the cell centers of `complex` (weights `√det g · Δr^d`)
/// and on [`U_SAMPLES`] values of `ū` in `[−u_max, u_max]` plus the
/// profile's critical points.
///
/// The time-derivative part of `c₄` is `−inf ∂_t g(X, X)` over unit `X`
/// when that infimum is nonpositive and `−½ inf ∂_t g(X, X)` when it is
/// positive (uniformly expanding metrics).
pub fn c_constants_sample(flux: &FluxField, metric: &MetricField, t: f64, u_max: f64, complex: &CellComplex) -> Result<CConstants> {
    let d = metric.dim();
    let u_max = u_max.abs();
    let profile = flux.profile();
    let ubar = profile.samples(-u_max, u_max, U_SAMPLES);
    let slopes: Vec<f64> = ubar.iter().map(|&u| profile.derivative(u)).collect();
    let p_min = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let p_max = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slope_sup = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let phi_sup = ubar.iter().fold(0.0f64, |m, &u| m.max(profile.value(u).abs()));
    let phi0 = profile.value(0.0);
    let cell_dv = complex.spacing().powi(d as i32);
    let time_dependent = !metric.is_static();
    let zero = flux.is_zero();

    let points: Vec<PointData> = (0..complex.cell_count())
        .into_par_iter()
        .map(|c| {
            let p = ChartPoint { r: complex.cell_center(c), t };
            let s = metric.metric_at(p)?;
            let mut data = PointData {
                weight: s.sqrt_det_g * cell_dv,
                lambda: 0.0,
                grad_lambda: 0.0,
                div: 0.0,
                grad_div: 0.0,
                dtg_min: 0.0,
                s_min: 0.0,
                s_max: 0.0,
                v_norm: 0.0,
                ricci: 0.0,
            };
            if time_dependent {
                data.lambda = metric.lambda_at(p)?;
                let mut grad = [0.0; 2];
                for (i, gi) in grad.iter_mut().enumerate().take(d) {
                    let (mut a, mut b) = (p, p);
                    a.r[i] -= GRADIENT_FD_STEP;
                    b.r[i] += GRADIENT_FD_STEP;
                    *gi = (metric.lambda_at(b)? - metric.lambda_at(a)?) / (2.0 * GRADIENT_FD_STEP);
                }
                data.grad_lambda = linalg::covector_norm_sq(d, &s.g_inv, &grad).sqrt();
                data.dtg_min = linalg::generalized_eigenvalues(d, &metric.metric_dt_at(p).value, &s.g).0;
            }
            if d == 2 {
                let (lo, hi) = linalg::generalized_eigenvalues(d, &metric.ricci_at(p)?, &s.g);
                data.ricci = lo.abs().max(hi.abs());
            }
            if !zero {
                data.div = flux.div_field_at(metric, p)?;
                let gd = flux.grad_div_field(metric, p)?;
                data.grad_div = linalg::covector_norm_sq(d, &s.g_inv, &gd).sqrt();
                let (lo, hi) = linalg::generalized_eigenvalues(d, &flux.symmetric_gradient(metric, p)?, &s.g);
                data.s_min = lo;
                data.s_max = hi;
                data.v_norm = flux.field_norm(metric, p)?;
            }
            Ok(data)
        })
        .collect::<Result<_>>()?;

    let mut inf_lambda = f64::INFINITY;
    let mut inf_ddiv = f64::INFINITY;
    let mut inf_dtg = f64::INFINITY;
    let mut inf_sym = f64::INFINITY;
    let mut out = CConstants { t, x_samples: points.len(), u_samples: ubar.len(), ..CConstants::default() };
    for q in &points {
        inf_lambda = inf_lambda.min(q.lambda);
        inf_dtg = inf_dtg.min(q.dtg_min);
        if !zero {
            // φ′(ū)·div V and φ′(ū)·S(X, X) are bilinear in (φ′, ·), so their
            // infima sit at the corners of the sampled ranges.
            inf_ddiv = inf_ddiv.min((p_min * q.div).min(p_max * q.div));
            inf_sym = inf_sym.min([p_min * q.s_min, p_min * q.s_max, p_max * q.s_min, p_max * q.s_max].into_iter().fold(f64::INFINITY, f64::min));
            out.c3 = out.c3.max((phi0 * q.div).abs());
            out.c7 = out.c7.max(slope_sup * q.v_norm);
        }
        out.c5 += q.weight * (u_max * q.grad_lambda + phi_sup * q.grad_div);
        out.c6 += q.weight * phi_sup * q.div.abs();
        out.ricci_sup = out.ricci_sup.max(q.ricci);
    }
    if zero {
        inf_ddiv = 0.0;
        inf_sym = 0.0;
    }
    out.c2 = -inf_lambda - inf_ddiv;
    let time_part = if inf_dtg <= 0.0 { -inf_dtg } else { -0.5 * inf_dtg };
    out.c4 = time_part - inf_sym;
    Ok(out)
}
