use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::call::Call;

#[derive(Debug)]
struct ExpandingRing;

impl Embedding for ExpandingRing {
    fn dim(&self) -> usize {
        1
    }
    fn ambient_dim(&self) -> usize {
        2
    }
    fn name(&self) -> String {
        "expanding_ring".into()
    }
    fn position(&self, r: [f64; 2], t: f64) -> [f64; 3] {
        let s = 1.0 + t;
        [s * (TAU * r[0]).cos(), s * (TAU * r[0]).sin(), 0.0]
    }
    fn jacobian(&self, r: [f64; 2], t: f64) -> Option<[[f64; 3]; 2]> {
        let s = 1.0 + t;
        Some([[-s * TAU * (TAU * r[0]).sin(), s * TAU * (TAU * r[0]).cos(), 0.0], [0.0; 3]])
    }
    fn is_static(&self) -> bool {
        false
    }
}

fn field(family: impl MetricFamily + 'static) -> MetricField {
    MetricField::from_family(family)
}

fn p(r1: f64, r2: f64, t: f64) -> ChartPoint {
    ChartPoint { r: [r1, r2], t }
}

#[test]
fn chart_points_wrap() {
    let q = ChartPoint::new(&[1.25, -0.25], 0.0);
    assert_eq!(q.r, [0.25, 0.75]);
    assert_eq!(wrap(1.0), 0.0);
    assert!(wrap(-1e-18) < 1.0);
}

#[test]
fn flat_metric_is_identity() {
    let s = field(Flat { dim: 2 }).metric_at(p(0.3, 0.7, 2.0)).unwrap();
    assert_eq!(s.g, linalg::identity(2));
    assert_eq!(s.sqrt_det_g, 1.0);
}

#[test]
fn expanding_circle_embedding_matches_family() {
    let emb = field(EmbeddedMetric::new(ExpandingRing));
    let fd = field(EmbeddedMetric { embedding: CustomEmbedding {
        dim: 1,
        components: vec![
            crate::expr::Expression::parse("(1+t)*cos(2*pi*x)").unwrap(),
            crate::expr::Expression::parse("(1+t)*sin(2*pi*x)").unwrap(),
        ],
    }, fd_step: DEFAULT_FD_STEP });
    let fam = field(ExpandingCircle { r0: 1.0, rate: 1.0 });
    for &(r, t) in &[(0.0, 0.0), (0.3, 0.5), (0.8, 1.0)] {
        let want = 4.0 * PI * PI * (1.0 + t) * (1.0 + t);
        let a = emb.metric_at(p(r, 0.0, t)).unwrap().g[0][0];
        let b = fd.metric_at(p(r, 0.0, t)).unwrap().g[0][0];
        let c = fam.metric_at(p(r, 0.0, t)).unwrap().g[0][0];
        assert!((a - want).abs() < 1e-12 * want);
        assert!((b - want).abs() < 1e-6 * want);
        assert!((c - want).abs() < 1e-12 * want);
    }
}

#[test]
fn dilation_at_time_zero() {
    let m = field(Dilation { a0: 1.0, rate: -1.0, dim: 2 });
    let s = m.metric_at(p(0.1, 0.2, 0.0)).unwrap();
    assert!((s.sqrt_det_g - 1.0).abs() < 1e-15);
    assert_eq!(s.g_inv, linalg::identity(2));
}

#[test]
fn lambda_examples() {
    assert_eq!(field(Flat { dim: 1 }).lambda_at(p(0.4, 0.0, 1.0)).unwrap(), 0.0);
    let circle = field(ExpandingCircle { r0: 1.0, rate: 1.0 });
    assert!((circle.lambda_at(p(0.2, 0.0, 0.0)).unwrap() - 1.0).abs() < 1e-12);
    let dil = field(Dilation { a0: 1.0, rate: -1.0, dim: 2 });
    assert!((dil.lambda_at(p(0.2, 0.6, 0.0)).unwrap() + 2.0).abs() < 1e-12);
    // Embedding without analytic time derivative falls back to differences.
    let emb = field(EmbeddedMetric::new(ExpandingRing));
    assert!((emb.lambda_at(p(0.2, 0.0, 0.0)).unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn lambda_matches_log_volume_difference() {
    let families: Vec<MetricField> = vec![
        field(ExpandingCircle { r0: 0.5, rate: 2.0 }),
        field(Dilation { a0: 2.0, rate: 0.7, dim: 2 }),
        field(Dilation { a0: 1.0, rate: -1.3, dim: 1 }),
    ];
    for m in families {
        for &t in &[0.0, 0.4, 1.0] {
            let q = p(0.3, 0.6, t);
            let h = 1e-5;
            let lv = |t: f64| 0.5 * linalg::det(m.dim(), &m.tensor(q.r, t)).ln();
            let fd = (lv(t + h) - lv(t - h)) / (2.0 * h);
            let l = m.lambda_at(q).unwrap();
            assert!((l - fd).abs() <= 1e-6 * l.abs().max(1e-3), "{} {l} {fd}", m.name());
        }
    }
}

#[test]
fn clipped_stencil_is_flagged() {
    let m = field(EmbeddedMetric::new(ExpandingRing)).with_interval(0.0, 1.0);
    let at_start = m.lambda_detailed(p(0.1, 0.0, 0.0)).unwrap();
    assert!(at_start.clipped);
    assert!((at_start.value - 1.0).abs() < 1e-4);
    let inside = m.lambda_detailed(p(0.1, 0.0, 0.5)).unwrap();
    assert!(!inside.clipped);
    assert!(m.sample(p(0.1, 0.0, 1.0)).unwrap().dt_clipped);
}

#[test]
fn christoffel_examples() {
    let flat = field(Flat { dim: 2 }).christoffel_at(p(0.3, 0.1, 0.0)).unwrap();
    assert!(flat.iter().flatten().flatten().all(|v| *v == 0.0));
    let dil = field(Dilation { a0: 1.0, rate: -1.0, dim: 2 }).christoffel_at(p(0.3, 0.1, 0.5)).unwrap();
    assert!(dil.iter().flatten().flatten().all(|v| *v == 0.0));

    let wavy = field(WavyCircle { amp: 1.0 });
    for &r in &[0.0, 0.1, 0.37, 0.9] {
        let g = |x: f64| (2.0 + (TAU * x).sin()).powi(2);
        let dg = (g(r + 1e-6) - g(r - 1e-6)) / 2e-6;
        let want = dg / (2.0 * g(r));
        let got = wavy.christoffel_at(p(r, 0.0, 0.0)).unwrap()[0][0][0];
        assert!((got - want).abs() < 1e-7, "{got} {want}");
    }
}

#[test]
fn ricci_vanishes_on_curves_and_flat_torus() {
    let m = field(WavyCircle { amp: 0.5 });
    assert_eq!(m.ricci_at(p(0.3, 0.0, 0.0)).unwrap(), linalg::ZERO);
    let flat = field(Flat { dim: 2 });
    let r = flat.ricci_at(p(0.3, 0.4, 0.0)).unwrap();
    assert!(r.iter().flatten().all(|v| v.abs() < 1e-8));
}

#[test]
fn torus_ricci_matches_gauss_curvature() {
    let tor = TorusOfRevolution { rmaj: 2.0, rmin: 1.0 };
    let analytic = field(tor);
    #[derive(Debug)]
    struct Donut(TorusOfRevolution);
    impl Embedding for Donut {
        fn dim(&self) -> usize {
            2
        }
        fn ambient_dim(&self) -> usize {
            3
        }
        fn name(&self) -> String {
            "donut".into()
        }
        fn position(&self, r: [f64; 2], _t: f64) -> [f64; 3] {
            self.0.position(r)
        }
        fn is_static(&self) -> bool {
            true
        }
    }
    let embedded = field(EmbeddedMetric::new(Donut(tor)));
    for &(a, b) in &[(0.1, 0.0), (0.4, 0.25), (0.7, 0.6), (0.2, 0.9)] {
        let k = tor.gaussian_curvature([a, b]);
        let g = analytic.metric_at(p(a, b, 0.0)).unwrap().g;
        for m in [&analytic, &embedded] {
            // ric = K g on surfaces; compare in g-orthonormal components.
            let ric = m.ricci_at(p(a, b, 0.0)).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let got = ric[i][j] / (g[i][i] * g[j][j]).sqrt();
                    let want = if i == j { k } else { 0.0 };
                    assert!((got - want).abs() < 1e-4, "{i}{j}: {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn random_samples_satisfy_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let families: Vec<(MetricField, f64)> = vec![
        (field(Flat { dim: 1 }), 1e-10),
        (field(Flat { dim: 2 }), 1e-10),
        (field(Dilation { a0: 1.0, rate: -1.0, dim: 2 }), 1e-10),
        (field(ExpandingCircle { r0: 1.0, rate: 1.0 }), 1e-10),
        (field(WavyCircle { amp: 1.0 }), 1e-10),
        (field(TorusOfRevolution { rmaj: 2.0, rmin: 1.0 }), 1e-10),
        (field(EmbeddedMetric::new(ExpandingRing)), 1e-6),
    ];
    for (m, tol) in families {
        let d = m.dim();
        for _ in 0..100 {
            let q = p(rng.gen(), rng.gen(), rng.gen_range(0.0..1.0));
            let s = m.sample(q).unwrap();
            assert!(linalg::min_eigenvalue(d, &s.g) > 0.0);
            let prod = linalg::mul(d, &s.g, &s.g_inv);
            for i in 0..d {
                for j in 0..d {
                    assert_eq!(s.g[i][j], s.g[j][i]);
                    let id = if i == j { 1.0 } else { 0.0 };
                    assert!((prod[i][j] - id).abs() < tol, "{}", m.name());
                    assert_eq!(s.ricci[i][j], s.ricci[j][i]);
                    for k in 0..d {
                        assert_eq!(s.christoffel[k][i][j], s.christoffel[k][j][i]);
                    }
                }
            }
            if d == 1 {
                assert_eq!(s.ricci, linalg::ZERO);
            }
        }
    }
}

#[test]
fn non_positive_metric_is_reported() {
    #[derive(Debug)]
    struct Degenerate;
    impl MetricFamily for Degenerate {
        fn dim(&self) -> usize {
            1
        }
        fn name(&self) -> String {
            "degenerate".into()
        }
        fn metric(&self, r: [f64; 2], _t: f64) -> Mat {
            [[r[0] - 0.5, 0.0], [0.0, 0.0]]
        }
        fn is_static(&self) -> bool {
            true
        }
    }
    let err = field(Degenerate).metric_at(p(0.25, 0.0, 0.0)).unwrap_err();
    assert!(matches!(err, Error::NotPositiveDefinite { r1, .. } if r1 == 0.25));
}

#[test]
fn families_from_selectors() {
    let m = metric_from_call(&Call::parse("expanding_circle(1, 1)").unwrap(), None).unwrap();
    assert_eq!(m.dim(), 1);
    let m = metric_from_call(&Call::parse("flat").unwrap(), Some(2)).unwrap();
    assert_eq!(m.dim(), 2);
    let m = metric_from_call(&Call::parse("custom_embedding(\"cos(2*pi*x)\", \"sin(2*pi*x)\")").unwrap(), Some(1)).unwrap();
    let s = MetricField::new(m).metric_at(p(0.1, 0.0, 0.0)).unwrap();
    assert!((s.g[0][0] - TAU * TAU).abs() < 1e-5);
    let err = metric_from_call(&Call::parse("sphere(1)").unwrap(), None).unwrap_err().to_string();
    assert!(err.contains("torus_of_revolution"));
    assert!(metric_from_call(&Call::parse("wavy_circle(3)").unwrap(), None).is_err());
    assert!(metric_from_call(&Call::parse("torus_of_revolution(2, 1)").unwrap(), Some(1)).is_err());
}
