//! Finite-volume solver and a-priori bound auditing for scalar conservation
//! laws on closed Riemannian manifolds.
//!
//! The conserved density `u` evolves by
//!
//! ```text
//! d/dt ∫_K u dV + ∫_∂K g(f(u), n) dV_∂K = 0
//! ```
//!
//! on every cell `K` of a periodic chart (circle or 2-torus) carrying a
//! possibly time-dependent metric `g(r, t)`. Time dependence of the volume
//! form enters through the cell volumes, so the compression term `λ u` of
//! the differential form is carried exactly.
//!
//! Module map:
//!
//! - [`geometry`]: metric families, λ, Christoffel symbols, Ricci tensor,
//!   Laplace–Beltrami operator.
//! - [`flux`]: flux families `f(x, t, u) = φ(u) V(x, t)`, divergence,
//!   Killing defect and the sampled bound constants.
//! - [`grid`]: periodic cell complex and time-dependent measures.
//! - [`solver`]: monotone finite-volume stepping with optional viscosity.
//! - [`analysis`]: envelopes, TV, entropy residuals, L1 distance,
//!   characteristics oracle, convergence tables.
//! - [`cli`]: run configuration, scenario catalog and report writers.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod call;
pub mod cli;
pub mod error;
pub mod expr;
pub mod flux;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use flux::{FluxField, Profile};
pub use geometry::{ChartPoint, GeometricSample, MetricField};
pub use grid::{CellComplex, GeometrySnapshot};
pub use solver::{NumericalFlux, SchemeConfig, Solver, State};
