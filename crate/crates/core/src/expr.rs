//! Scalar expressions of the chart coordinates, time and density.
//!
//! Expressions use the variables `x`, `y` (chart coordinates `r¹`, `r²`),
//! `t` and `u`. `pi` is accepted as a name for π.

use std::fmt;

use exmex::prelude::*;

use crate::error::{Error, Result};

const KNOWN: [&str; 5] = ["pi", "t", "u", "x", "y"];

#[derive(Clone)]
pub struct Expression {
    source: String,
    compiled: FlatEx<f64>,
    /// For every variable of `compiled` (alphabetical), its slot in
    /// `[pi, t, u, x, y]`.
    slots: Vec<usize>,
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self> {
        let compiled = exmex::parse::<f64>(source).map_err(|e| Error::Expression {
            expr: source.to_string(),
            message: e.to_string(),
        })?;
        let mut slots = Vec::new();
        for name in compiled.var_names() {
            match KNOWN.iter().position(|k| k == name) {
                Some(i) => slots.push(i),
                None => {
                    return Err(Error::Expression {
                        expr: source.to_string(),
                        message: format!("unknown variable `{name}` (allowed: x, y, t, u, pi)"),
                    })
                }
            }
        }
        Ok(Self { source: source.to_string(), compiled, slots })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn uses(&self, var: &str) -> bool {
        KNOWN
            .iter()
            .position(|k| *k == var)
            .is_some_and(|i| self.slots.contains(&i))
    }

    pub fn eval(&self, r: [f64; 2], t: f64, u: f64) -> f64 {
        let all = [std::f64::consts::PI, t, u, r[0], r[1]];
        let mut args = [0.0; 5];
        for (a, &s) in args.iter_mut().zip(&self.slots) {
            *a = all[s];
        }
        self.compiled.eval(&args[..self.slots.len()]).unwrap_or(f64::NAN)
    }
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expression({:?})", self.source)
    }
}
