use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use super::{MetricFamily, DEFAULT_FD_STEP};
use crate::call::Call;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::linalg::{identity, scaled, Mat, ZERO};

pub const METRIC_FAMILIES: [&str; 6] =
    ["flat", "dilation", "expanding_circle", "wavy_circle", "torus_of_revolution", "custom_embedding"];

/// Euclidean metric on the unit circle or the unit flat torus.
#[derive(Clone, Copy, Debug)]
pub struct Flat {
    pub dim: usize,
}

impl MetricFamily for Flat {
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> String {
        format!("flat({})", self.dim)
    }
    fn metric(&self, _r: [f64; 2], _t: f64) -> Mat {
        identity(self.dim)
    }
    fn metric_dt(&self, _r: [f64; 2], _t: f64) -> Option<Mat> {
        Some(ZERO)
    }
    fn metric_dr(&self, _r: [f64; 2], _t: f64) -> Option<[Mat; 2]> {
        Some([ZERO; 2])
    }
    fn is_static(&self) -> bool {
        true
    }
}

/// `g = a(t)² δ` with `a(t) = a0 · e^{rate·t}`.
#[derive(Clone, Copy, Debug)]
pub struct Dilation {
    pub a0: f64,
    pub rate: f64,
    pub dim: usize,
}

impl Dilation {
    pub fn scale(&self, t: f64) -> f64 {
        self.a0 * (self.rate * t).exp()
    }
}

impl MetricFamily for Dilation {
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> String {
        format!("dilation({}, {})", self.a0, self.rate)
    }
    fn metric(&self, _r: [f64; 2], t: f64) -> Mat {
        let a = self.scale(t);
        scaled(&identity(self.dim), a * a)
    }
    fn metric_dt(&self, _r: [f64; 2], t: f64) -> Option<Mat> {
        let a = self.scale(t);
        Some(scaled(&identity(self.dim), 2.0 * self.rate * a * a))
    }
    fn metric_dr(&self, _r: [f64; 2], _t: f64) -> Option<[Mat; 2]> {
        Some([ZERO; 2])
    }
    fn is_static(&self) -> bool {
        self.rate == 0.0
    }
}

/// Round circle of radius `R(t) = r0 + rate·t`, pulled back to `[0, 1)`:
/// `g₁₁ = 4π² R(t)²`.
#[derive(Clone, Copy, Debug)]
pub struct ExpandingCircle {
    pub r0: f64,
    pub rate: f64,
}

impl ExpandingCircle {
    pub fn radius(&self, t: f64) -> f64 {
        self.r0 + self.rate * t
    }
}

impl MetricFamily for ExpandingCircle {
    fn dim(&self) -> usize {
        1
    }
    fn name(&self) -> String {
        format!("expanding_circle({}, {})", self.r0, self.rate)
    }
    fn metric(&self, _r: [f64; 2], t: f64) -> Mat {
        let rad = self.radius(t);
        // A vanishing radius leaves a zero tensor, caught by validation.
        let s = if rad > 0.0 { TAU * rad } else { 0.0 };
        [[s * s, 0.0], [0.0, 0.0]]
    }
    fn metric_dt(&self, _r: [f64; 2], t: f64) -> Option<Mat> {
        Some([[2.0 * TAU * TAU * self.radius(t) * self.rate, 0.0], [0.0, 0.0]])
    }
    fn metric_dr(&self, _r: [f64; 2], _t: f64) -> Option<[Mat; 2]> {
        Some([ZERO; 2])
    }
    fn is_static(&self) -> bool {
        self.rate == 0.0
    }
}

/// Static curve with `g₁₁ = (2 + amp·sin 2πr)²`.
#[derive(Clone, Copy, Debug)]
pub struct WavyCircle {
    pub amp: f64,
}

impl MetricFamily for WavyCircle {
    fn dim(&self) -> usize {
        1
    }
    fn name(&self) -> String {
        format!("wavy_circle({})", self.amp)
    }
    fn metric(&self, r: [f64; 2], _t: f64) -> Mat {
        let s = 2.0 + self.amp * (TAU * r[0]).sin();
        [[s * s, 0.0], [0.0, 0.0]]
    }
    fn metric_dt(&self, _r: [f64; 2], _t: f64) -> Option<Mat> {
        Some(ZERO)
    }
    fn metric_dr(&self, r: [f64; 2], _t: f64) -> Option<[Mat; 2]> {
        let s = 2.0 + self.amp * (TAU * r[0]).sin();
        let ds = self.amp * TAU * (TAU * r[0]).cos();
        Some([[[2.0 * s * ds, 0.0], [0.0, 0.0]], ZERO])
    }
    fn is_static(&self) -> bool {
        true
    }
}

/// Torus of revolution with major radius `rmaj` and minor radius `rmin`.
/// Chart coordinate `r¹` is the azimuth `φ = 2πr¹`, `r²` the poloidal angle
/// `θ = 2πr²`:
///
/// ```text
/// X = ((rmaj + rmin cos θ) cos φ, (rmaj + rmin cos θ) sin φ, rmin sin θ)
/// ```
#[derive(Clone, Copy, Debug)]
pub struct TorusOfRevolution {
    pub rmaj: f64,
    pub rmin: f64,
}

impl TorusOfRevolution {
    pub fn position(&self, r: [f64; 2]) -> [f64; 3] {
        let (phi, theta) = (TAU * r[0], TAU * r[1]);
        let rho = self.rmaj + self.rmin * theta.cos();
        [rho * phi.cos(), rho * phi.sin(), self.rmin * theta.sin()]
    }

    /// Gaussian curvature `cos θ / (rmin (rmaj + rmin cos θ))`.
    pub fn gaussian_curvature(&self, r: [f64; 2]) -> f64 {
        let theta = TAU * r[1];
        theta.cos() / (self.rmin * (self.rmaj + self.rmin * theta.cos()))
    }

    /// Total area `4π² rmaj rmin`.
    pub fn area(&self) -> f64 {
        4.0 * PI * PI * self.rmaj * self.rmin
    }
}

impl MetricFamily for TorusOfRevolution {
    fn dim(&self) -> usize {
        2
    }
    fn name(&self) -> String {
        format!("torus_of_revolution({}, {})", self.rmaj, self.rmin)
    }
    fn metric(&self, r: [f64; 2], _t: f64) -> Mat {
        let rho = self.rmaj + self.rmin * (TAU * r[1]).cos();
        [[TAU * TAU * rho * rho, 0.0], [0.0, TAU * TAU * self.rmin * self.rmin]]
    }
    fn metric_dt(&self, _r: [f64; 2], _t: f64) -> Option<Mat> {
        Some(ZERO)
    }
    fn metric_dr(&self, r: [f64; 2], _t: f64) -> Option<[Mat; 2]> {
        let theta = TAU * r[1];
        let rho = self.rmaj + self.rmin * theta.cos();
        let drho = -self.rmin * TAU * theta.sin();
        Some([ZERO, [[2.0 * TAU * TAU * rho * drho, 0.0], [0.0, 0.0]]])
    }
    fn is_static(&self) -> bool {
        true
    }
}

/// A map `X(r, t)` of the chart into `R^m`, `m ≤ 3`.
pub trait Embedding: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn ambient_dim(&self) -> usize;
    fn name(&self) -> String;
    fn position(&self, r: [f64; 2], t: f64) -> [f64; 3];
    /// `∂_i X^a`, indexed `[i][a]`, when known in closed form.
    fn jacobian(&self, _r: [f64; 2], _t: f64) -> Option<[[f64; 3]; 2]> {
        None
    }
    fn is_static(&self) -> bool;
}

/// Pullback metric `g_ij = Σ_a ∂_i X^a ∂_j X^a` of an embedding.
#[derive(Debug)]
pub struct EmbeddedMetric<E> {
    pub embedding: E,
    pub fd_step: f64,
}

impl<E: Embedding> EmbeddedMetric<E> {
    pub fn new(embedding: E) -> Self {
        Self { embedding, fd_step: DEFAULT_FD_STEP }
    }

    fn jacobian(&self, r: [f64; 2], t: f64) -> [[f64; 3]; 2] {
        if let Some(j) = self.embedding.jacobian(r, t) {
            return j;
        }
        let h = self.fd_step;
        let mut jac = [[0.0; 3]; 2];
        for (i, row) in jac.iter_mut().enumerate().take(self.embedding.dim()) {
            let (mut a, mut b) = (r, r);
            a[i] -= h;
            b[i] += h;
            let (xa, xb) = (self.embedding.position(a, t), self.embedding.position(b, t));
            for k in 0..self.embedding.ambient_dim() {
                row[k] = (xb[k] - xa[k]) / (2.0 * h);
            }
        }
        jac
    }
}

impl<E: Embedding> MetricFamily for EmbeddedMetric<E> {
    fn dim(&self) -> usize {
        self.embedding.dim()
    }
    fn name(&self) -> String {
        self.embedding.name()
    }
    fn metric(&self, r: [f64; 2], t: f64) -> Mat {
        let d = self.embedding.dim();
        let jac = self.jacobian(r, t);
        let mut g = ZERO;
        for i in 0..d {
            for j in 0..d {
                g[i][j] = (0..self.embedding.ambient_dim()).map(|a| jac[i][a] * jac[j][a]).sum();
            }
        }
        g
    }
    fn is_static(&self) -> bool {
        self.embedding.is_static()
    }
}

/// Embedding given by one expression per ambient component, in the chart
/// variables `x`, `y` and time `t`.
#[derive(Debug)]
pub struct CustomEmbedding {
    pub dim: usize,
    pub components: Vec<Expression>,
}

impl Embedding for CustomEmbedding {
    fn dim(&self) -> usize {
        self.dim
    }
    fn ambient_dim(&self) -> usize {
        self.components.len()
    }
    fn name(&self) -> String {
        let c: Vec<String> = self.components.iter().map(|e| format!("\"{}\"", e.source())).collect();
        format!("custom_embedding({})", c.join(", "))
    }
    fn position(&self, r: [f64; 2], t: f64) -> [f64; 3] {
        let mut x = [0.0; 3];
        for (dst, e) in x.iter_mut().zip(&self.components) {
            *dst = e.eval(r, t, 0.0);
        }
        x
    }
    fn is_static(&self) -> bool {
        !self.components.iter().any(|e| e.uses("t"))
    }
}

/// Builds a metric family from a `name(params...)` selector. `dim` is the
/// chart dimension requested by the configuration, if any.
pub fn metric_from_call(call: &Call, dim: Option<usize>) -> Result<Arc<dyn MetricFamily>> {
    let bad = |msg: String| Error::Config(format!("metric {}: {msg}", call.name));
    let numbers = || call.numbers().map_err(bad);
    let arity = |v: &[f64], lo: usize, hi: usize| -> Result<()> {
        if v.len() < lo || v.len() > hi {
            Err(bad(format!("expected {lo}..={hi} parameters, got {}", v.len())))
        } else {
            Ok(())
        }
    };
    let fixed_dim = |want: usize| -> Result<()> {
        match dim {
            Some(d) if d != want => Err(bad(format!("family is {want}-dimensional but dim = {d}"))),
            _ => Ok(()),
        }
    };
    let family: Arc<dyn MetricFamily> = match call.name.as_str() {
        "flat" => {
            let p = numbers()?;
            arity(&p, 0, 1)?;
            let d = p.first().map(|v| *v as usize).or(dim).unwrap_or(1);
            if let Some(want) = dim {
                if want != d {
                    return Err(bad(format!("flat({d}) conflicts with dim = {want}")));
                }
            }
            check_dim(d).map_err(bad)?;
            Arc::new(Flat { dim: d })
        }
        "dilation" => {
            let p = numbers()?;
            arity(&p, 2, 3)?;
            let d = p.get(2).map(|v| *v as usize).or(dim).unwrap_or(2);
            check_dim(d).map_err(bad)?;
            if p[0] <= 0.0 {
                return Err(bad("a0 must be positive".into()));
            }
            Arc::new(Dilation { a0: p[0], rate: p[1], dim: d })
        }
        "expanding_circle" => {
            let p = numbers()?;
            arity(&p, 2, 2)?;
            fixed_dim(1)?;
            if p[0] <= 0.0 {
                return Err(bad("R0 must be positive".into()));
            }
            Arc::new(ExpandingCircle { r0: p[0], rate: p[1] })
        }
        "wavy_circle" => {
            let p = numbers()?;
            arity(&p, 1, 1)?;
            fixed_dim(1)?;
            if p[0].abs() >= 2.0 {
                return Err(bad("|amp| must be below 2".into()));
            }
            Arc::new(WavyCircle { amp: p[0] })
        }
        "torus_of_revolution" => {
            let p = numbers()?;
            arity(&p, 2, 2)?;
            fixed_dim(2)?;
            if !(p[1] > 0.0 && p[0] > p[1]) {
                return Err(bad("need Rmaj > rmin > 0".into()));
            }
            Arc::new(TorusOfRevolution { rmaj: p[0], rmin: p[1] })
        }
        "custom_embedding" => {
            let d = dim.ok_or_else(|| bad("requires an explicit dim".into()))?;
            check_dim(d).map_err(bad)?;
            if call.args.is_empty() || call.args.len() > 3 {
                return Err(bad("expected 1 to 3 component expressions".into()));
            }
            let components = call
                .args
                .iter()
                .map(|a| {
                    let text = a.as_text().ok_or_else(|| bad(format!("component {a} must be a quoted expression")))?;
                    Expression::parse(text)
                })
                .collect::<Result<Vec<_>>>()?;
            Arc::new(EmbeddedMetric::new(CustomEmbedding { dim: d, components }))
        }
        other => {
            return Err(Error::Config(format!(
                "unknown metric family `{other}`; available: {}",
                METRIC_FAMILIES.join(", ")
            )))
        }
    };
    Ok(family)
}

fn check_dim(d: usize) -> std::result::Result<(), String> {
    if d == 1 || d == 2 {
        Ok(())
    } else {
        Err(format!("dimension must be 1 or 2, got {d}"))
    }
}
