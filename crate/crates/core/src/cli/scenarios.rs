//! Built-in scenario catalog.

use super::config::RunConfig;

fn times(t_end: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|k| t_end * k as f64 / count as f64).collect()
}

struct Entry {
    name: &'static str,
    summary: &'static str,
    build: fn() -> RunConfig,
}

const COMPATIBLE_CHECKS: [&str; 9] = ["mass", "linf", "tv_envelope", "tv_diminishing", "entropy", "l1_contraction", "comparison", "lipschitz", "monotone"];

const CATALOG: &[Entry] = &[
    Entry {
        name: "burgers-flat-circle",
        summary: "Burgers on the unit circle, sine data steepening into a shock",
        build: || {
            let mut c = RunConfig::new("burgers-flat-circle", 1, 256, "flat", "burgers");
            c.t_end = 0.5;
            c.output_times = times(0.5, 5);
            c.with_checks(&COMPATIBLE_CHECKS)
        },
    },
    Entry {
        name: "burgers-smooth",
        summary: "Burgers on the unit circle before shock formation, checked against characteristics",
        build: || {
            let mut c = RunConfig::new("burgers-smooth", 1, 256, "flat", "burgers");
            c.t_end = 0.1;
            c.output_times = times(0.1, 4);
            c.with_checks(&["mass", "linf", "tv_envelope", "tv_diminishing", "entropy", "lipschitz", "oracle_l1(tol=5e-3)"])
        },
    },
    Entry {
        name: "linear-advection",
        summary: "Unit-speed transport on the unit circle",
        build: || {
            let mut c = RunConfig::new("linear-advection", 1, 256, "flat", "linear_advection(1)");
            c.t_end = 1.0;
            c.output_times = times(1.0, 4);
            let mut checks = COMPATIBLE_CHECKS.to_vec();
            checks.push("oracle_l1(tol=0.05)");
            c.with_checks(&checks)
        },
    },
    Entry {
        name: "killing-rotation-torus",
        summary: "Rigid rotation along the symmetry direction of a torus of revolution",
        build: || {
            let mut c = RunConfig::new("killing-rotation-torus", 2, 64, "torus_of_revolution(2, 1)", "killing_rotation");
            c.u0 = "sin(2*pi*x)*cos(2*pi*y)".into();
            c.t_end = 0.5;
            c.output_times = times(0.5, 5);
            c.with_checks(&COMPATIBLE_CHECKS)
        },
    },
    Entry {
        name: "shear-flat-torus",
        summary: "Non-Killing shear flow on the flat torus; total variation grows",
        build: || {
            let mut c = RunConfig::new("shear-flat-torus", 2, 64, "flat(2)", "shear(1)");
            // Oblique data: the axis-aligned TV of sin 2πx grows faster than the envelope allows.
            c.u0 = "sin(2*pi*(x + y))".into();
            c.t_end = 0.5;
            c.output_times = times(0.5, 10);
            c.with_checks(&["mass", "linf", "tv_envelope", "tv_growth", "entropy", "l1_contraction", "comparison", "lipschitz"])
        },
    },
    Entry {
        name: "expanding-circle-compression",
        summary: "Pure dilution on a uniformly growing circle (zero flux)",
        build: || {
            let mut c = RunConfig::new("expanding-circle-compression", 1, 256, "expanding_circle(1, 1)", "zero");
            c.u0 = "1 + 0.5*sin(2*pi*x)".into();
            c.t_end = 1.0;
            c.output_times = times(1.0, 4);
            c.with_checks(&["mass", "linf", "tv_envelope", "entropy(c=4)", "l1_contraction", "comparison", "lipschitz", "oracle_l1(tol=1e-6, n=256)"])
        },
    },
    Entry {
        name: "dilation-torus-compression",
        summary: "Pure concentration on a uniformly shrinking flat torus (zero flux)",
        build: || {
            let mut c = RunConfig::new("dilation-torus-compression", 2, 64, "dilation(1, -1, 2)", "zero");
            c.u0 = "1 + 0.5*sin(2*pi*x)*sin(2*pi*y)".into();
            c.t_end = 1.0;
            c.output_times = times(1.0, 4);
            c.with_checks(&["mass", "linf", "tv_envelope", "entropy(c=4)", "l1_contraction", "comparison", "lipschitz", "oracle_l1(tol=1e-6)"])
        },
    },
    Entry {
        name: "wavy-circle-compressible",
        summary: "Burgers profile times a compressible field on a curve of varying length element",
        build: || {
            let mut c = RunConfig::new("wavy-circle-compressible", 1, 256, "wavy_circle(0.5)", "compressible(\"1 + 0.25*sin(2*pi*x)\")");
            c.profile = Some("burgers".into());
            c.u0 = "0.1*sin(2*pi*x)".into();
            c.t_end = 0.5;
            c.output_times = times(0.5, 5);
            c.with_checks(&["mass", "linf", "tv_envelope", "entropy(c=1)", "l1_contraction", "comparison", "lipschitz", "monotone"])
        },
    },
    Entry {
        name: "expanding-circle-burgers",
        summary: "Burgers on a uniformly growing circle",
        build: || {
            let mut c = RunConfig::new("expanding-circle-burgers", 1, 256, "expanding_circle(1, 1)", "burgers");
            c.u0 = "0.5*sin(2*pi*x)".into();
            c.t_end = 0.5;
            c.output_times = times(0.5, 5);
            c.with_checks(&["mass", "linf", "tv_envelope", "entropy(c=1)", "l1_contraction", "comparison", "lipschitz"])
        },
    },
    Entry {
        name: "dilation-torus-advection",
        summary: "Oblique transport on an expanding flat torus",
        build: || {
            let mut c = RunConfig::new("dilation-torus-advection", 2, 64, "dilation(1, 0.5, 2)", "linear_advection(1, 0.5)");
            c.u0 = "sin(2*pi*x)*sin(2*pi*y)".into();
            c.t_end = 0.5;
            c.output_times = times(0.5, 5);
            c.with_checks(&["mass", "linf", "tv_envelope", "entropy(c=1)", "l1_contraction", "comparison", "lipschitz"])
        },
    },
    Entry {
        name: "viscous-burgers-0.01",
        summary: "Viscous Burgers on the unit circle, epsilon = 0.01",
        build: || viscous("viscous-burgers-0.01", 0.01),
    },
    Entry {
        name: "viscous-burgers-0.001",
        summary: "Viscous Burgers on the unit circle, epsilon = 0.001",
        build: || viscous("viscous-burgers-0.001", 0.001),
    },
    Entry {
        name: "riemann-burgers",
        summary: "Burgers Riemann data: a shock and a rarefaction on the circle",
        build: || {
            let mut c = RunConfig::new("riemann-burgers", 1, 256, "flat", "burgers");
            c.u0 = "signum(0.5 - x)".into();
            c.t_end = 0.25;
            c.output_times = times(0.25, 5);
            c.with_checks(&COMPATIBLE_CHECKS)
        },
    },
    Entry {
        name: "riemann-burgers-llf",
        summary: "Burgers Riemann data with the local Lax-Friedrichs flux",
        build: || {
            let mut c = RunConfig::new("riemann-burgers-llf", 1, 256, "flat", "burgers");
            c.u0 = "signum(0.5 - x)".into();
            c.numerical_flux = crate::solver::NumericalFlux::LocalLaxFriedrichs;
            c.t_end = 0.25;
            c.output_times = times(0.25, 5);
            c.with_checks(&COMPATIBLE_CHECKS)
        },
    },
];

fn viscous(name: &str, epsilon: f64) -> RunConfig {
    let mut c = RunConfig::new(name, 1, 256, "flat", "burgers");
    c.epsilon = epsilon;
    c.t_end = 0.5;
    c.output_times = times(0.5, 5);
    c.with_checks(&COMPATIBLE_CHECKS)
}

/// Configuration of a catalog scenario.
pub fn scenario(name: &str) -> Option<RunConfig> {
    CATALOG.iter().find(|e| e.name == name).map(|e| (e.build)())
}

pub fn names() -> Vec<&'static str> {
    CATALOG.iter().map(|e| e.name).collect()
}

/// `(name, one-line summary)` for every catalog entry.
pub fn summaries() -> Vec<(&'static str, &'static str)> {
    CATALOG.iter().map(|e| (e.name, e.summary)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_entries_validate() {
        assert!(names().len() >= 8);
        for n in names() {
            let c = scenario(n).unwrap();
            assert_eq!(c.name, n);
            c.validate().unwrap_or_else(|e| panic!("{n}: {e}"));
        }
    }
}
