//! Periodic structured cell complex on `[0, 1)^d` and its time-dependent
//! measures.
//!
//! Cells are indexed `i + n·j` with `i` along `r¹`. Faces normal to `r¹`
//! come first: face `c` separates cell `c = (i, j)` from `(i + 1, j)`.
//! Faces normal to `r²` follow: face `n^d + c` separates `(i, j)` from
//! `(i, j + 1)`. The first cell of a face is its "left" cell and face
//! normals point from left to right.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ChartPoint, MetricField};
use crate::linalg;
use crate::quadrature::gauss_legendre;

pub const DEFAULT_QUADRATURE_ORDER: usize = 4;

#[derive(Clone, Debug)]
pub struct CellComplex {
    dim: usize,
    n: usize,
    quad_order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CellComplex {
    pub fn build(dim: usize, n: usize, quad_order: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::Config(format!("dim must be 1 or 2, got {dim}")));
        }
        if n < 4 {
            return Err(Error::Config(format!("n must be ≥ 4, got {n}")));
        }
        if quad_order == 0 {
            return Err(Error::Config("quadrature order must be ≥ 1".into()));
        }
        let (nodes, weights) = gauss_legendre(quad_order);
        Ok(Self { dim, n, quad_order, nodes, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn quadrature_order(&self) -> usize {
        self.quad_order
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn cell_count(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn face_count(&self) -> usize {
        self.dim * self.cell_count()
    }

    fn cell_ij(&self, c: usize) -> (usize, usize) {
        (c % self.n, c / self.n)
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        (i % self.n) + self.n * (j % self.n)
    }

    pub fn cell_center(&self, c: usize) -> [f64; 2] {
        let (i, j) = self.cell_ij(c);
        let h = self.spacing();
        let y = if self.dim == 2 { (j as f64 + 0.5) * h } else { 0.0 };
        [(i as f64 + 0.5) * h, y]
    }

    /// Axis the face is normal to.
    pub fn face_axis(&self, f: usize) -> usize {
        f / self.cell_count()
    }

    /// `(left, right)` cells of a face.
    pub fn face_cells(&self, f: usize) -> (usize, usize) {
        let axis = self.face_axis(f);
        let c = f % self.cell_count();
        let (i, j) = self.cell_ij(c);
        let right = if axis == 0 { self.cell_index(i + 1, j) } else { self.cell_index(i, j + 1) };
        (c, right)
    }

    pub fn face_midpoint(&self, f: usize) -> [f64; 2] {
        let axis = self.face_axis(f);
        let (i, j) = self.cell_ij(f % self.cell_count());
        let h = self.spacing();
        let wrap = |x: f64| if x >= 1.0 { x - 1.0 } else { x };
        match (self.dim, axis) {
            (1, _) => [wrap((i + 1) as f64 * h), 0.0],
            (_, 0) => [wrap((i + 1) as f64 * h), (j as f64 + 0.5) * h],
            _ => [(i as f64 + 0.5) * h, wrap((j + 1) as f64 * h)],
        }
    }

    /// Faces of a cell with orientation: `+1` when the cell is the face's
    /// left cell (outward normal agrees with the face normal), `−1` otherwise.
    pub fn cell_faces(&self, c: usize) -> Vec<(usize, f64)> {
        let (i, j) = self.cell_ij(c);
        let n = self.n;
        let nc = self.cell_count();
        let mut faces = vec![(c, 1.0), (self.cell_index(i + n - 1, j), -1.0)];
        if self.dim == 2 {
            faces.push((nc + c, 1.0));
            faces.push((nc + self.cell_index(i, j + n - 1), -1.0));
        }
        faces
    }

    /// Quadrature points and chart weights (summing to the chart cell volume)
    /// of cell `c`.
    pub fn cell_quadrature(&self, c: usize) -> Vec<([f64; 2], f64)> {
        let (i, j) = self.cell_ij(c);
        let h = self.spacing();
        let mut pts = Vec::with_capacity(self.quad_order.pow(self.dim as u32));
        for (a, wa) in self.nodes.iter().zip(&self.weights) {
            let x = (i as f64 + a) * h;
            if self.dim == 1 {
                pts.push(([x, 0.0], wa * h));
            } else {
                for (b, wb) in self.nodes.iter().zip(&self.weights) {
                    pts.push(([x, (j as f64 + b) * h], wa * wb * h * h));
                }
            }
        }
        pts
    }

    /// Quadrature points along a face and their chart weights (summing to the
    /// chart face length, or one for the point faces of a curve).
    pub fn face_quadrature(&self, f: usize) -> Vec<([f64; 2], f64)> {
        if self.dim == 1 {
            return vec![(self.face_midpoint(f), 1.0)];
        }
        let axis = self.face_axis(f);
        let mid = self.face_midpoint(f);
        let h = self.spacing();
        let other = 1 - axis;
        let start = mid[other] - 0.5 * h;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| {
                let mut p = mid;
                p[other] = start + a * h;
                (p, w * h)
            })
            .collect()
    }

    /// `dV`-weighted cell averages of `u0` at time `t`.
    pub fn cell_averages(&self, metric: &MetricField, t: f64, u0: &(dyn Fn([f64; 2]) -> f64 + Sync)) -> Result<Vec<f64>> {
        (0..self.cell_count())
            .into_par_iter()
            .map(|c| {
                let (mut num, mut den) = (0.0, 0.0);
                for (p, w) in self.cell_quadrature(c) {
                    let s = metric.metric_at(ChartPoint { r: p, t })?;
                    num += w * s.sqrt_det_g * u0(p);
                    den += w * s.sqrt_det_g;
                }
                Ok(num / den)
            })
            .collect()
    }

    /// Sum over cells of signed per-face contributions, accumulated face by
    /// face so that each face's two contributions cancel exactly.
    pub fn telescoped_total(&self, face_values: &[f64]) -> f64 {
        let mut total = 0.0;
        for &v in face_values {
            total += v;
            total += -v;
        }
        total
    }

    /// Per-cell net outflow `Σ_faces ± F`, accumulated in face order.
    pub fn net_outflow(&self, face_values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cell_count()];
        for (f, &v) in face_values.iter().enumerate() {
            let (l, r) = self.face_cells(f);
            out[l] += v;
            out[r] -= v;
        }
        out
    }

    pub fn snapshot(&self, metric: &MetricField, t: f64) -> Result<GeometrySnapshot> {
        if metric.dim() != self.dim {
            return Err(Error::Usage(format!(
                "metric dimension {} does not match grid dimension {}",
                metric.dim(),
                self.dim
            )));
        }
        let with_lambda = !metric.is_static();
        let cells: Vec<(f64, f64)> = (0..self.cell_count())
            .into_par_iter()
            .map(|c| {
                let (mut vol, mut lam) = (0.0, 0.0);
                for (p, w) in self.cell_quadrature(c) {
                    let q = ChartPoint { r: p, t };
                    let s = metric.metric_at(q)?;
                    vol += w * s.sqrt_det_g;
                    if with_lambda {
                        lam += w * s.sqrt_det_g * metric.lambda_at(q)?;
                    }
                }
                Ok((vol, lam))
            })
            .collect::<Result<_>>()?;

        let h = self.spacing();
        let dim = self.dim;
        let faces: Vec<FaceData> = (0..self.face_count())
            .into_par_iter()
            .map(|f| {
                let axis = self.face_axis(f);
                let other = 1 - axis;
                let mid = metric.metric_at(ChartPoint { r: self.face_midpoint(f), t })?;
                let mut normal = [0.0; 2];
                normal[axis] = 1.0 / mid.g_inv[axis][axis].sqrt();
                let mut data = FaceData { normal, ..FaceData::default() };
                for (p, w) in self.face_quadrature(f) {
                    let s = metric.metric_at(ChartPoint { r: p, t })?;
                    let flux_w = w * s.sqrt_det_g;
                    data.points.push(p);
                    data.flux_weights.push(flux_w);
                    data.transmissibility += flux_w * s.g_inv[axis][axis] / h;
                    if dim == 2 {
                        data.measure += w * s.g[other][other].sqrt();
                        data.cross += flux_w * s.g_inv[axis][other];
                    }
                }
                if dim == 1 {
                    data.measure = 1.0;
                }
                Ok(data)
            })
            .collect::<Result<_>>()?;

        let ppf = if dim == 1 { 1 } else { self.quad_order };
        let mut snap = GeometrySnapshot {
            t,
            cell_volumes: cells.iter().map(|c| c.0).collect(),
            cell_lambda: cells.iter().map(|c| c.1).collect(),
            face_measures: Vec::with_capacity(faces.len()),
            face_normals: Vec::with_capacity(faces.len()),
            face_points: Vec::with_capacity(faces.len() * ppf),
            face_flux_weights: Vec::with_capacity(faces.len() * ppf),
            transmissibility: Vec::with_capacity(faces.len()),
            cross_transmissibility: Vec::with_capacity(faces.len()),
            points_per_face: ppf,
        };
        for fd in faces {
            snap.face_measures.push(fd.measure);
            snap.face_normals.push(fd.normal);
            snap.face_points.extend(fd.points);
            snap.face_flux_weights.extend(fd.flux_weights);
            snap.transmissibility.push(fd.transmissibility);
            snap.cross_transmissibility.push(fd.cross);
        }
        Ok(snap)
    }
}

#[derive(Default)]
struct FaceData {
    measure: f64,
    normal: [f64; 2],
    points: Vec<[f64; 2]>,
    flux_weights: Vec<f64>,
    transmissibility: f64,
    cross: f64,
}

/// Cell and face measures of a [`CellComplex`] under `g(t)`.
#[derive(Clone, Debug)]
pub struct GeometrySnapshot {
    pub t: f64,
    /// `∫_K dV`.
    pub cell_volumes: Vec<f64>,
    /// `∫_K λ dV`; zero for static metrics.
    pub cell_lambda: Vec<f64>,
    /// `∫_face dV_∂K`; one for the point faces of a curve.
    pub face_measures: Vec<f64>,
    /// Unit conormal covector at the face midpoint, pointing left to right.
    pub face_normals: Vec<[f64; 2]>,
    /// Face quadrature points, `points_per_face` per face.
    pub face_points: Vec<[f64; 2]>,
    /// Weights turning chart flux components into face fluxes:
    /// `∫_face g(f, n) dV_∂K ≈ Σ_q W_q f^a(x_q)`, with `W_q = w_q √det g`.
    pub face_flux_weights: Vec<f64>,
    /// `∫_face g^{aa} √det g dr_b / Δr_a`, the two-point diffusive coefficient.
    pub transmissibility: Vec<f64>,
    /// `∫_face g^{ab} √det g dr_b`, multiplying the tangential derivative.
    pub cross_transmissibility: Vec<f64>,
    pub points_per_face: usize,
}

impl GeometrySnapshot {
    pub fn total_volume(&self) -> f64 {
        self.cell_volumes.iter().sum()
    }

    pub fn face_points(&self, f: usize) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        let k = self.points_per_face;
        self.face_points[f * k..(f + 1) * k].iter().copied().zip(self.face_flux_weights[f * k..(f + 1) * k].iter().copied())
    }

    /// `|ν|_g` of the stored face normal, for diagnostics.
    pub fn normal_norm(&self, metric: &MetricField, complex: &CellComplex, f: usize) -> Result<f64> {
        let s = metric.metric_at(ChartPoint { r: complex.face_midpoint(f), t: self.t })?;
        Ok(linalg::covector_norm_sq(complex.dim(), &s.g_inv, &self.face_normals[f]).sqrt())
    }
}
