//! Finite-volume Laplace–Beltrami operator on a [`CellComplex`].

use super::MetricField;
use crate::error::{Error, Result};
use crate::grid::{CellComplex, GeometrySnapshot};

/// `(1/√det g) ∂_i(√det g g^{ij} ∂_j u)` on cell averages at time `t`.
pub fn laplace_beltrami_apply(metric: &MetricField, complex: &CellComplex, field: &[f64], t: f64) -> Result<Vec<f64>> {
    let snap = complex.snapshot(metric, t)?;
    laplace_beltrami_with_snapshot(complex, &snap, field)
}

/// Same as [`laplace_beltrami_apply`] with precomputed measures.
pub fn laplace_beltrami_with_snapshot(complex: &CellComplex, snap: &GeometrySnapshot, field: &[f64]) -> Result<Vec<f64>> {
    if field.len() != complex.cell_count() {
        return Err(Error::Usage(format!(
            "field has {} values, grid has {} cells",
            field.len(),
            complex.cell_count()
        )));
    }
    let fluxes = diffusive_face_fluxes(complex, snap, field);
    let net = complex.net_outflow(&fluxes);
    Ok(net.iter().zip(&snap.cell_volumes).map(|(q, v)| q / v).collect())
}

/// `∫_face g^{aj} ∂_j u √det g dr_b` per face, oriented left to right
/// (positive when `u` increases across the face).
///
/// The normal derivative uses the two-point difference; in two dimensions
/// the tangential derivative is averaged from centered differences in the
/// two adjacent cells.
pub(crate) fn diffusive_face_fluxes(complex: &CellComplex, snap: &GeometrySnapshot, u: &[f64]) -> Vec<f64> {
    let n = complex.n();
    let h = complex.spacing();
    (0..complex.face_count())
        .map(|f| {
            let (l, r) = complex.face_cells(f);
            let mut q = snap.transmissibility[f] * (u[r] - u[l]);
            let cross = snap.cross_transmissibility[f];
            if complex.dim() == 2 && cross != 0.0 {
                let axis = complex.face_axis(f);
                let tangential = |c: usize| {
                    let (i, j) = (c % n, c / n);
                    let (plus, minus) = if axis == 0 {
                        (complex.cell_index(i, j + 1), complex.cell_index(i, j + n - 1))
                    } else {
                        (complex.cell_index(i + 1, j), complex.cell_index(i + n - 1, j))
                    };
                    u[plus] - u[minus]
                };
                q += cross * (tangential(l) + tangential(r)) / (4.0 * h);
            }
            q
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::geometry::{Dilation, Flat, TorusOfRevolution};

    fn eigen_error(dim: usize, n: usize, metric: &MetricField, expected: f64) -> f64 {
        let c = CellComplex::build(dim, n, 4).unwrap();
        let u: Vec<f64> = (0..c.cell_count()).map(|k| (2.0 * PI * c.cell_center(k)[0]).sin()).collect();
        let lu = laplace_beltrami_apply(metric, &c, &u, 0.0).unwrap();
        lu.iter().zip(&u).map(|(a, b)| (a - expected * b).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn constants_are_annihilated() {
        let m = MetricField::from_family(TorusOfRevolution { rmaj: 2.0, rmin: 1.0 });
        let c = CellComplex::build(2, 8, 4).unwrap();
        let lu = laplace_beltrami_apply(&m, &c, &vec![3.5; c.cell_count()], 0.0).unwrap();
        assert!(lu.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn flat_torus_eigenfunction_second_order() {
        let m = MetricField::from_family(Flat { dim: 2 });
        let e1 = eigen_error(2, 16, &m, -4.0 * PI * PI);
        let e2 = eigen_error(2, 32, &m, -4.0 * PI * PI);
        assert!(e1 < 0.5, "{e1}");
        assert!((e1 / e2).log2() > 1.8, "{e1} {e2}");
    }

    #[test]
    fn scaled_circle_eigenfunction() {
        // g11 = a² constant: Δ sin 2πr = −(4π²/a²) sin 2πr.
        let d = Dilation { a0: 1.5, rate: 0.0, dim: 1 };
        let m = MetricField::from_family(d);
        let c = 1.5f64 * 1.5;
        let e1 = eigen_error(1, 32, &m, -4.0 * PI * PI / c);
        let e2 = eigen_error(1, 64, &m, -4.0 * PI * PI / c);
        assert!((e1 / e2).log2() > 1.9, "{e1} {e2}");
    }

    #[test]
    fn rejects_wrong_length() {
        let m = MetricField::from_family(Flat { dim: 1 });
        let c = CellComplex::build(1, 8, 2).unwrap();
        assert!(laplace_beltrami_apply(&m, &c, &[0.0; 7], 0.0).is_err());
    }
}
