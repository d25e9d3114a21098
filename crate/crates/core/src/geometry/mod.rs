//! Time-dependent Riemannian metrics on a periodic chart `[0, 1)^d`,
//! `d ∈ {1, 2}`, and the quantities derived from them.
//!
//! A [`MetricField`] wraps a [`MetricFamily`] (an analytic tensor or the
//! pullback of an embedding) and computes, at a [`ChartPoint`]:
//!
//! - `g`, `g⁻¹` and `√det g`;
//! - the compression rate `λ = ∂_t log √det g` (so that `∂_t dV = λ dV`);
//! - Christoffel symbols `Γ^k_ij` of the Levi-Civita connection;
//! - the Ricci tensor.
//!
//! Derivatives come from the family when it supplies them and from centered
//! finite differences with step `fd_step` otherwise.

mod families;
mod laplace;

use std::fmt;
use std::sync::Arc;

pub use families::{
    metric_from_call, CustomEmbedding, Dilation, Embedding, EmbeddedMetric, ExpandingCircle, Flat,
    TorusOfRevolution, WavyCircle, METRIC_FAMILIES,
};
pub use laplace::{laplace_beltrami_apply, laplace_beltrami_with_snapshot};
pub(crate) use laplace::diffusive_face_fluxes;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, ZERO};

/// `Γ^k_ij`, indexed `[k][i][j]`.
pub type Christoffel = [[[f64; 2]; 2]; 2];

/// A point of the periodic chart at a time instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPoint {
    pub r: [f64; 2],
    pub t: f64,
}

impl ChartPoint {
    /// Wraps the coordinates into `[0, 1)`. Missing coordinates are zero.
    pub fn new(r: &[f64], t: f64) -> Self {
        let mut c = [0.0; 2];
        for (dst, src) in c.iter_mut().zip(r) {
            *dst = wrap(*src);
        }
        Self { r: c, t }
    }
}

/// Wraps a coordinate into `[0, 1)`.
pub fn wrap(x: f64) -> f64 {
    let w = x - x.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Source of metric tensors on the chart.
///
/// Families are periodic in every chart coordinate with period one.
pub trait MetricFamily: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn name(&self) -> String;

    /// `g_ij(r, t)`, symmetric.
    fn metric(&self, r: [f64; 2], t: f64) -> Mat;

    /// `∂_t g_ij`, when known in closed form.
    fn metric_dt(&self, _r: [f64; 2], _t: f64) -> Option<Mat> {
        None
    }

    /// `[∂_1 g_ij, ∂_2 g_ij]`, when known in closed form.
    fn metric_dr(&self, _r: [f64; 2], _t: f64) -> Option<[Mat; 2]> {
        None
    }

    fn is_static(&self) -> bool;
}

/// `g`, `g⁻¹` and `√det g` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricSample {
    pub g: Mat,
    pub g_inv: Mat,
    pub sqrt_det_g: f64,
}

/// All metric-derived quantities at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometricSample {
    pub g: Mat,
    pub g_inv: Mat,
    pub sqrt_det_g: f64,
    pub lambda: f64,
    pub christoffel: Christoffel,
    pub ricci: Mat,
    pub dt_g: Mat,
    /// Set when the time stencil was clipped to the configured interval.
    pub dt_clipped: bool,
}

/// A time derivative together with a flag recording whether the centered
/// stencil had to be replaced by a one-sided one at the interval ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeDerivative<T> {
    pub value: T,
    pub clipped: bool,
}

#[derive(Clone)]
pub struct MetricField {
    family: Arc<dyn MetricFamily>,
    fd_step: f64,
    interval: (f64, f64),
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("family", &self.family.name())
            .field("fd_step", &self.fd_step)
            .field("interval", &self.interval)
            .finish()
    }
}

pub const DEFAULT_FD_STEP: f64 = 1e-5;

impl MetricField {
    pub fn new(family: Arc<dyn MetricFamily>) -> Self {
        Self { family, fd_step: DEFAULT_FD_STEP, interval: (f64::NEG_INFINITY, f64::INFINITY) }
    }

    pub fn from_family<F: MetricFamily + 'static>(family: F) -> Self {
        Self::new(Arc::new(family))
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    /// Restricts time stencils to `[t0, t1]`.
    pub fn with_interval(mut self, t0: f64, t1: f64) -> Self {
        self.interval = (t0, t1);
        self
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn name(&self) -> String {
        self.family.name()
    }

    pub fn family(&self) -> &Arc<dyn MetricFamily> {
        &self.family
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn is_static(&self) -> bool {
        self.family.is_static()
    }

    /// Raw tensor without validation.
    pub fn tensor(&self, r: [f64; 2], t: f64) -> Mat {
        self.family.metric(r, t)
    }

    pub fn metric_at(&self, p: ChartPoint) -> Result<MetricSample> {
        let d = self.dim();
        let g = self.family.metric(p.r, p.t);
        let det = linalg::det(d, &g);
        if !(det > 0.0) || !(linalg::min_eigenvalue(d, &g) > 0.0) {
            return Err(Error::NotPositiveDefinite { r1: p.r[0], r2: p.r[1], t: p.t });
        }
        Ok(MetricSample { g, g_inv: linalg::inverse(d, &g), sqrt_det_g: det.sqrt() })
    }

    /// `∂_t g_ij`.
    pub fn metric_dt_at(&self, p: ChartPoint) -> TimeDerivative<Mat> {
        if self.family.is_static() {
            return TimeDerivative { value: ZERO, clipped: false };
        }
        if let Some(dt) = self.family.metric_dt(p.r, p.t) {
            return TimeDerivative { value: dt, clipped: false };
        }
        let (lo, hi, clipped) = self.time_stencil(p.t);
        let a = self.family.metric(p.r, lo);
        let b = self.family.metric(p.r, hi);
        let mut m = ZERO;
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = (b[i][j] - a[i][j]) / (hi - lo);
            }
        }
        TimeDerivative { value: m, clipped }
    }

    fn time_stencil(&self, t: f64) -> (f64, f64, bool) {
        let h = self.fd_step * t.abs().max(1.0);
        let (t0, t1) = self.interval;
        let (mut lo, mut hi, mut clipped) = (t - h, t + h, false);
        if lo < t0 {
            lo = t.max(t0);
            clipped = true;
        }
        if hi > t1 {
            hi = t.min(t1);
            clipped = true;
        }
        if hi <= lo {
            // Degenerate interval: fall back to the unclipped stencil.
            return (t - h, t + h, true);
        }
        (lo, hi, clipped)
    }

    /// Compression rate `λ = ∂_t log √det g`.
    pub fn lambda_at(&self, p: ChartPoint) -> Result<f64> {
        Ok(self.lambda_detailed(p)?.value)
    }

    pub fn lambda_detailed(&self, p: ChartPoint) -> Result<TimeDerivative<f64>> {
        if self.family.is_static() {
            return Ok(TimeDerivative { value: 0.0, clipped: false });
        }
        let d = self.dim();
        if let Some(dt) = self.family.metric_dt(p.r, p.t) {
            // Jacobi: ∂_t log det g = tr(g⁻¹ ∂_t g).
            let s = self.metric_at(p)?;
            return Ok(TimeDerivative { value: 0.5 * linalg::trace_product(d, &s.g_inv, &dt), clipped: false });
        }
        let (lo, hi, clipped) = self.time_stencil(p.t);
        let la = 0.5 * linalg::det(d, &self.family.metric(p.r, lo)).ln();
        let lb = 0.5 * linalg::det(d, &self.family.metric(p.r, hi)).ln();
        Ok(TimeDerivative { value: (lb - la) / (hi - lo), clipped })
    }

    /// `[∂_1 g, ∂_2 g]` (the second entry is zero in one dimension).
    pub fn metric_dr_at(&self, p: ChartPoint) -> [Mat; 2] {
        if let Some(dr) = self.family.metric_dr(p.r, p.t) {
            return dr;
        }
        let h = self.fd_step;
        let mut out = [ZERO; 2];
        for (axis, slot) in out.iter_mut().enumerate().take(self.dim()) {
            let (mut a, mut b) = (p.r, p.r);
            a[axis] -= h;
            b[axis] += h;
            let ga = self.family.metric(a, p.t);
            let gb = self.family.metric(b, p.t);
            for i in 0..2 {
                for j in 0..2 {
                    slot[i][j] = (gb[i][j] - ga[i][j]) / (2.0 * h);
                }
            }
        }
        out
    }

    /// `Γ^k_ij = ½ g^{kl} (∂_i g_jl + ∂_j g_il − ∂_l g_ij)`.
    pub fn christoffel_at(&self, p: ChartPoint) -> Result<Christoffel> {
        let s = self.metric_at(p)?;
        Ok(christoffel_from(self.dim(), &s.g_inv, &self.metric_dr_at(p)))
    }

    /// Ricci tensor `R_ij = ∂_k Γ^k_ij − ∂_j Γ^k_ik + Γ^k_kl Γ^l_ij − Γ^k_jl Γ^l_ik`,
    /// symmetrized. Identically zero on curves.
    pub fn ricci_at(&self, p: ChartPoint) -> Result<Mat> {
        let d = self.dim();
        if d == 1 {
            return Ok(ZERO);
        }
        let gamma = self.christoffel_at(p)?;
        // Second derivatives come from differencing Christoffel symbols; a
        // wider step is used when those are themselves differenced.
        let h = if self.family.metric_dr(p.r, p.t).is_some() { self.fd_step } else { self.fd_step.sqrt() * 0.1 };
        let mut dgamma = [[[[0.0; 2]; 2]; 2]; 2]; // [m][k][i][j] = ∂_m Γ^k_ij
        for (m, slot) in dgamma.iter_mut().enumerate() {
            let (mut a, mut b) = (p.r, p.r);
            a[m] -= h;
            b[m] += h;
            let ga = self.christoffel_at(ChartPoint { r: a, t: p.t })?;
            let gb = self.christoffel_at(ChartPoint { r: b, t: p.t })?;
            for k in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        slot[k][i][j] = (gb[k][i][j] - ga[k][i][j]) / (2.0 * h);
                    }
                }
            }
        }
        let mut ric = ZERO;
        for i in 0..d {
            for j in 0..d {
                let mut s = 0.0;
                for k in 0..d {
                    s += dgamma[k][k][i][j] - dgamma[j][k][i][k];
                    for l in 0..d {
                        s += gamma[k][k][l] * gamma[l][i][j] - gamma[k][j][l] * gamma[l][i][k];
                    }
                }
                ric[i][j] = s;
            }
        }
        Ok(linalg::symmetrized(d, &ric))
    }

    pub fn sample(&self, p: ChartPoint) -> Result<GeometricSample> {
        let s = self.metric_at(p)?;
        let dt = self.metric_dt_at(p);
        let lambda = self.lambda_detailed(p)?;
        Ok(GeometricSample {
            g: s.g,
            g_inv: s.g_inv,
            sqrt_det_g: s.sqrt_det_g,
            lambda: lambda.value,
            christoffel: christoffel_from(self.dim(), &s.g_inv, &self.metric_dr_at(p)),
            ricci: self.ricci_at(p)?,
            dt_g: dt.value,
            dt_clipped: dt.clipped || lambda.clipped,
        })
    }

    /// `∂_i log √det g`, from the spatial metric derivatives.
    pub fn log_volume_gradient(&self, p: ChartPoint, g_inv: &Mat) -> [f64; 2] {
        let d = self.dim();
        let dr = self.metric_dr_at(p);
        let mut out = [0.0; 2];
        for (i, o) in out.iter_mut().enumerate().take(d) {
            *o = 0.5 * linalg::trace_product(d, g_inv, &dr[i]);
        }
        out
    }
}

pub(crate) fn christoffel_from(dim: usize, g_inv: &Mat, dr: &[Mat; 2]) -> Christoffel {
    let mut gamma = [[[0.0; 2]; 2]; 2];
    for k in 0..dim {
        for i in 0..dim {
            for j in 0..dim {
                let mut s = 0.0;
                for l in 0..dim {
                    s += g_inv[k][l] * ((dr[i][j][l] + dr[j][i][l]) - dr[l][i][j]);
                }
                gamma[k][i][j] = 0.5 * s;
            }
        }
    }
    gamma
}

#[cfg(test)]
mod tests;
