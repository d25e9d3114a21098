//! Flux families `f(x, t, u) = φ(u) V(x, t)`.
//!
//! A [`FluxField`] pairs a scalar [`Profile`] `φ` with a [`VectorField`]
//! `V` given in chart components. Separability makes `∂_u f = φ′(u) V` and
//! `div^x f = φ(u) div V` cheap to evaluate and lets the numerical flux
//! integrate `⟨V, n⟩` over each face once per time level.

mod constants;
mod fields;
mod profile;

use std::fmt;
use std::sync::Arc;

pub use constants::{c_constants_sample, CConstants, U_SAMPLES};
pub use fields::{jacobian_of, ConstantField, ExpressionField, Jacobian, ShearField, VectorField};
pub use profile::{Profile, PROFILES};

use crate::call::Call;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::geometry::{ChartPoint, MetricField};
use crate::linalg::{self, Mat, ZERO};

pub const FLUX_FAMILIES: [&str; 6] = ["burgers", "linear_advection", "killing_rotation", "shear", "compressible", "zero"];

/// Step of the centered differences used for spatial derivatives of `V`.
const FIELD_FD_STEP: f64 = 1e-5;
/// Wider step for second derivatives (differences of differences).
const GRADIENT_FD_STEP: f64 = 1e-4;

#[derive(Clone)]
pub struct FluxField {
    profile: Profile,
    field: Arc<dyn VectorField>,
    u_range_hint: (f64, f64),
}

impl fmt::Debug for FluxField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FluxField({})", self.name())
    }
}

impl FluxField {
    pub fn new(profile: Profile, field: Arc<dyn VectorField>) -> Self {
        Self { profile, field, u_range_hint: (-1.0, 1.0) }
    }

    pub fn from_field<V: VectorField + 'static>(profile: Profile, field: V) -> Self {
        Self::new(profile, Arc::new(field))
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_field(Profile::Zero, ConstantField { v: [0.0; 2], dim, label: "zero".into() })
    }

    pub fn with_u_range(mut self, lo: f64, hi: f64) -> Self {
        self.u_range_hint = (lo, hi);
        self
    }

    pub fn u_range_hint(&self) -> (f64, f64) {
        self.u_range_hint
    }

    pub fn name(&self) -> String {
        format!("{} * {}", self.field.name(), self.profile)
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn field(&self) -> &dyn VectorField {
        self.field.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.profile.is_zero() || self.field.is_zero()
    }

    pub fn is_static(&self) -> bool {
        self.field.is_static()
    }

    /// Chart components `f^i(r, t, u)`.
    pub fn components(&self, r: [f64; 2], t: f64, u: f64) -> [f64; 2] {
        let (phi, v) = (self.profile.value(u), self.field.value(r, t));
        [phi * v[0], phi * v[1]]
    }

    /// `∂_u f^i(r, t, u)`.
    pub fn du_components(&self, r: [f64; 2], t: f64, u: f64) -> [f64; 2] {
        let (dphi, v) = (self.profile.derivative(u), self.field.value(r, t));
        [dphi * v[0], dphi * v[1]]
    }

    /// `∂_j V^i` at `p`.
    pub fn field_jacobian(&self, p: ChartPoint) -> Jacobian {
        jacobian_of(self.field.as_ref(), p.r, p.t, FIELD_FD_STEP)
    }

    /// `div V = ∂_i V^i + V^i ∂_i log √det g`.
    pub fn div_field_at(&self, metric: &MetricField, p: ChartPoint) -> Result<f64> {
        if self.field.is_zero() {
            return Ok(0.0);
        }
        let d = self.dim();
        let s = metric.metric_at(p)?;
        let grad = metric.log_volume_gradient(p, &s.g_inv);
        let jac = self.field_jacobian(p);
        let v = self.field.value(p.r, p.t);
        Ok((0..d).map(|i| jac[i][i] + v[i] * grad[i]).sum())
    }

    /// `div^x f(·, t, u) = φ(u) div V`, the divergence at fixed `u`.
    pub fn divx_at(&self, metric: &MetricField, p: ChartPoint, u: f64) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        Ok(self.profile.value(u) * self.div_field_at(metric, p)?)
    }

    /// Chart gradient `∂_i div V` by centered differences.
    pub fn grad_div_field(&self, metric: &MetricField, p: ChartPoint) -> Result<[f64; 2]> {
        let mut out = [0.0; 2];
        if self.field.is_zero() {
            return Ok(out);
        }
        let h = GRADIENT_FD_STEP;
        for (i, o) in out.iter_mut().enumerate().take(self.dim()) {
            let (mut a, mut b) = (p, p);
            a.r[i] -= h;
            b.r[i] += h;
            *o = (self.div_field_at(metric, b)? - self.div_field_at(metric, a)?) / (2.0 * h);
        }
        Ok(out)
    }

    /// Symmetrized covariant differential of `V` with the index lowered:
    /// `S_ij = ½ (g_ik ∇_j V^k + g_jk ∇_i V^k)`, so `S(X, X) = ⟨∇_X V, X⟩`.
    pub fn symmetric_gradient(&self, metric: &MetricField, p: ChartPoint) -> Result<Mat> {
        if self.field.is_zero() {
            return Ok(ZERO);
        }
        let d = self.dim();
        let s = metric.metric_at(p)?;
        let gamma = metric.christoffel_at(p)?;
        let jac = self.field_jacobian(p);
        let v = self.field.value(p.r, p.t);
        let mut cov = ZERO; // cov[k][j] = ∇_j V^k
        for k in 0..d {
            for j in 0..d {
                cov[k][j] = jac[k][j] + (0..d).map(|l| gamma[k][j][l] * v[l]).sum::<f64>();
            }
        }
        let mut lowered = ZERO; // lowered[i][j] = g_ik ∇_j V^k
        for i in 0..d {
            for j in 0..d {
                lowered[i][j] = (0..d).map(|k| s.g[i][k] * cov[k][j]).sum();
            }
        }
        Ok(linalg::symmetrized(d, &lowered))
    }

    /// Largest absolute eigenvalue (relative to `g`) of the symmetrized
    /// covariant differential of `∂_u f(·, t, u)`. Zero exactly when
    /// `∂_u f` is a Killing field at `p`.
    pub fn killing_defect(&self, metric: &MetricField, p: ChartPoint, u: f64) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let s = self.symmetric_gradient(metric, p)?;
        let g = metric.metric_at(p)?.g;
        let (lo, hi) = linalg::generalized_eigenvalues(self.dim(), &s, &g);
        Ok(self.profile.derivative(u).abs() * lo.abs().max(hi.abs()))
    }

    /// `|V|_g` at `p`.
    pub fn field_norm(&self, metric: &MetricField, p: ChartPoint) -> Result<f64> {
        let g = metric.metric_at(p)?.g;
        Ok(linalg::vector_norm_sq(self.dim(), &g, &self.field.value(p.r, p.t)).sqrt())
    }
}

/// Builds a flux from a `name(params...)` selector on a `dim`-dimensional
/// chart. `profile` replaces the family's default profile.
pub fn flux_from_call(call: &Call, dim: usize, profile: Option<Profile>) -> Result<FluxField> {
    let bad = |msg: String| Error::Config(format!("flux {}: {msg}", call.name));
    let numbers = || call.numbers().map_err(bad);
    let vector = |p: &[f64]| -> Result<[f64; 2]> {
        match p.len() {
            0 => Ok(if dim == 1 { [1.0, 0.0] } else { [1.0, 1.0] }),
            n if n == dim => Ok([p[0], p.get(1).copied().unwrap_or(0.0)]),
            n => Err(bad(format!("expected {dim} components, got {n}"))),
        }
    };
    let (default, field): (Profile, Arc<dyn VectorField>) = match call.name.as_str() {
        "burgers" => {
            let v = vector(&numbers()?)?;
            (Profile::Burgers, Arc::new(ConstantField { v, dim, label: call.to_string() }))
        }
        "linear_advection" => {
            let v = vector(&numbers()?)?;
            (Profile::Linear, Arc::new(ConstantField { v, dim, label: call.to_string() }))
        }
        "killing_rotation" => {
            let p = numbers()?;
            if p.len() > 1 {
                return Err(bad("expected at most one parameter (angular speed)".into()));
            }
            let omega = p.first().copied().unwrap_or(1.0);
            (Profile::Linear, Arc::new(ConstantField { v: [omega, 0.0], dim, label: call.to_string() }))
        }
        "shear" => {
            let p = numbers()?;
            if p.len() != 1 {
                return Err(bad("expected one parameter (amplitude)".into()));
            }
            if dim != 2 {
                return Err(bad("shear is defined on the 2-torus only".into()));
            }
            (Profile::Linear, Arc::new(ShearField { amp: p[0] }))
        }
        "compressible" => {
            if call.args.len() != dim {
                return Err(bad(format!("expected {dim} quoted component expressions")));
            }
            let components = call
                .args
                .iter()
                .map(|a| {
                    let text = a.as_text().ok_or_else(|| bad(format!("component {a} must be a quoted expression")))?;
                    let e = Expression::parse(text)?;
                    if e.uses("u") {
                        return Err(bad(format!("component `{text}` may not depend on u; use profile")));
                    }
                    Ok(e)
                })
                .collect::<Result<Vec<_>>>()?;
            (Profile::Linear, Arc::new(ExpressionField { components }))
        }
        "zero" => (Profile::Zero, Arc::new(ConstantField { v: [0.0; 2], dim, label: "zero".into() })),
        other => {
            return Err(Error::Config(format!(
                "unknown flux family `{other}`; available: {}",
                FLUX_FAMILIES.join(", ")
            )))
        }
    };
    Ok(FluxField::new(profile.unwrap_or(default), field))
}
