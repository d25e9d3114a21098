use std::f64::consts::TAU;
use std::fmt;

use crate::expr::Expression;

/// `∂_j V^i`, indexed `[i][j]`.
pub type Jacobian = [[f64; 2]; 2];

/// Chart components of a time-dependent vector field `V(r, t)`.
pub trait VectorField: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn name(&self) -> String;

    fn value(&self, r: [f64; 2], t: f64) -> [f64; 2];

    /// `∂_j V^i` in closed form, when known.
    fn jacobian(&self, _r: [f64; 2], _t: f64) -> Option<Jacobian> {
        None
    }

    fn is_static(&self) -> bool;

    fn is_zero(&self) -> bool {
        false
    }
}

/// Constant chart components.
#[derive(Clone, Debug)]
pub struct ConstantField {
    pub v: [f64; 2],
    pub dim: usize,
    pub label: String,
}

impl VectorField for ConstantField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> String {
        self.label.clone()
    }
    fn value(&self, _r: [f64; 2], _t: f64) -> [f64; 2] {
        self.v
    }
    fn jacobian(&self, _r: [f64; 2], _t: f64) -> Option<Jacobian> {
        Some([[0.0; 2]; 2])
    }
    fn is_static(&self) -> bool {
        true
    }
    fn is_zero(&self) -> bool {
        self.v == [0.0; 2]
    }
}

/// `V = (amp · sin 2πr², 0)` on the 2-torus.
#[derive(Clone, Copy, Debug)]
pub struct ShearField {
    pub amp: f64,
}

impl VectorField for ShearField {
    fn dim(&self) -> usize {
        2
    }
    fn name(&self) -> String {
        format!("shear({})", self.amp)
    }
    fn value(&self, r: [f64; 2], _t: f64) -> [f64; 2] {
        [self.amp * (TAU * r[1]).sin(), 0.0]
    }
    fn jacobian(&self, r: [f64; 2], _t: f64) -> Option<Jacobian> {
        Some([[0.0, self.amp * TAU * (TAU * r[1]).cos()], [0.0, 0.0]])
    }
    fn is_static(&self) -> bool {
        true
    }
}

/// Components given by expressions in `x`, `y`, `t`.
#[derive(Clone, Debug)]
pub struct ExpressionField {
    pub components: Vec<Expression>,
}

impl VectorField for ExpressionField {
    fn dim(&self) -> usize {
        self.components.len()
    }
    fn name(&self) -> String {
        let c: Vec<String> = self.components.iter().map(|e| format!("\"{}\"", e.source())).collect();
        format!("compressible({})", c.join(", "))
    }
    fn value(&self, r: [f64; 2], t: f64) -> [f64; 2] {
        let mut v = [0.0; 2];
        for (dst, e) in v.iter_mut().zip(&self.components) {
            *dst = e.eval(r, t, 0.0);
        }
        v
    }
    fn is_static(&self) -> bool {
        !self.components.iter().any(|e| e.uses("t"))
    }
}

/// Differentiates `field` by centered differences with step `h`.
pub fn jacobian_of(field: &dyn VectorField, r: [f64; 2], t: f64, h: f64) -> Jacobian {
    if let Some(j) = field.jacobian(r, t) {
        return j;
    }
    let mut jac = [[0.0; 2]; 2];
    for j in 0..field.dim() {
        let (mut a, mut b) = (r, r);
        a[j] -= h;
        b[j] += h;
        let (va, vb) = (field.value(a, t), field.value(b, t));
        for i in 0..field.dim() {
            jac[i][j] = (vb[i] - va[i]) / (2.0 * h);
        }
    }
    jac
}
