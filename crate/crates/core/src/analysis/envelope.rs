use serde::Serialize;

use crate::error::{Error, Result};
use crate::flux::{c_constants_sample, CConstants};
use crate::solver::Solver;

/// Solves `y′ = a(t) y + b(t)` on the sample times with `a`, `b` replaced on
/// each interval by their larger endpoint value. Exact for constant
/// coefficients and an upper bound whenever the coefficients are monotone
/// between samples.
fn upper_envelope(a: &[f64], b: &[f64], y0: f64, times: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut y = y0;
    out.push(y);
    for k in 1..times.len() {
        let h = times[k] - times[k - 1];
        let (ak, bk) = (a[k - 1].max(a[k]), b[k - 1].max(b[k]));
        let growth = (ak * h).exp();
        // (e^{ah} − 1)/a, continuous at a = 0.
        let integral = if (ak * h).abs() < 1e-8 { h * (1.0 + 0.5 * ak * h) } else { (growth - 1.0) / ak };
        y = y * growth + bk * integral;
        out.push(y);
    }
    out
}

/// `‖u₀‖ e^{∫c₂} + ∫ e^{∫c₂} c₃` at every sample time.
pub fn linf_envelope(c2: &[f64], c3: &[f64], u0_linf: f64, times: &[f64]) -> Vec<f64> {
    upper_envelope(c2, c3, u0_linf, times)
}

/// `e^{∫c₄} tv₀ + ∫ c₅ e^{∫c₄}`, times `exp(ε ∫ ‖ric‖_∞)` when `ε > 0`.
pub fn tv_envelope(c4: &[f64], c5: &[f64], tv0: f64, times: &[f64], epsilon: f64, ricci_sup: &[f64]) -> Vec<f64> {
    let mut env = upper_envelope(c4, c5, tv0, times);
    if epsilon > 0.0 {
        let zero = vec![0.0; times.len()];
        let rate: Vec<f64> = ricci_sup.iter().map(|r| epsilon * r).collect();
        let factor = upper_envelope(&rate, &zero, 1.0, times);
        for (e, f) in env.iter_mut().zip(factor) {
            *e *= f;
        }
    }
    env
}

/// Envelopes of a run together with the constants they were built from.
#[derive(Clone, Debug, Serialize)]
pub struct AprioriBounds {
    /// Times at which the constants were sampled (a superset of the
    /// requested times).
    pub sample_times: Vec<f64>,
    pub constants: Vec<CConstants>,
    /// Envelopes at the sample times.
    pub linf: Vec<f64>,
    pub tv: Vec<f64>,
    pub u_max: f64,
    pub tv_max: f64,
    pub fixed_point_iterations: usize,
}

impl AprioriBounds {
    fn at(&self, series: &[f64], t: f64) -> f64 {
        let k = self.sample_times.iter().position(|s| *s == t).expect("time was sampled");
        series[k]
    }

    pub fn linf_at(&self, t: f64) -> f64 {
        self.at(&self.linf, t)
    }

    pub fn tv_at(&self, t: f64) -> f64 {
        self.at(&self.tv, t)
    }

    /// `max_t c₆(t)`.
    pub fn c6_max(&self) -> f64 {
        self.constants.iter().map(|c| c.c6).fold(0.0, f64::max)
    }

    /// `max_t c₇(t)`.
    pub fn c7_max(&self) -> f64 {
        self.constants.iter().map(|c| c.c7).fold(0.0, f64::max)
    }

    /// Bound on the Lipschitz constant of `t ↦ u v` in `L¹(g(0))`.
    pub fn lipschitz_bound(&self) -> f64 {
        self.c6_max() + self.c7_max() * self.tv_max
    }
}

/// Intervals of the uniform time grid merged with the output times when the
/// constants depend on time.
pub const TIME_SAMPLES: usize = 32;
const MAX_FIXED_POINT_ITERATIONS: usize = 200;

/// Builds both envelopes for a run of `solver` from `t = 0`.
///
/// `c₂ … c₇` need `u_max`, the maximum of the L∞ envelope, which itself
/// depends on `c₂`: the pair is resolved by fixed-point iteration starting
/// from `‖u₀‖_∞`.
pub fn a_priori_bounds(solver: &Solver, u0_linf: f64, tv0: f64, times: &[f64]) -> Result<AprioriBounds> {
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let time_dependent = !solver.metric().is_static() || !solver.flux().is_static();
    let mut sample_times: Vec<f64> = times.to_vec();
    sample_times.push(0.0);
    if time_dependent && t_end > 0.0 {
        sample_times.extend((0..=TIME_SAMPLES).map(|k| t_end * k as f64 / TIME_SAMPLES as f64));
    }
    sample_times.sort_by(f64::total_cmp);
    sample_times.dedup();

    let sample = |u_max: f64| -> Result<Vec<CConstants>> {
        if time_dependent {
            sample_times
                .iter()
                .map(|&t| c_constants_sample(solver.flux(), solver.metric(), t, u_max, solver.complex()))
                .collect()
        } else {
            let c = c_constants_sample(solver.flux(), solver.metric(), 0.0, u_max, solver.complex())?;
            Ok(sample_times.iter().map(|&t| CConstants { t, ..c }).collect())
        }
    };

    let mut u_max = u0_linf;
    let mut iterations = 0;
    let (constants, linf) = loop {
        iterations += 1;
        let constants = sample(u_max)?;
        let c2: Vec<f64> = constants.iter().map(|c| c.c2).collect();
        let c3: Vec<f64> = constants.iter().map(|c| c.c3).collect();
        let linf = linf_envelope(&c2, &c3, u0_linf, &sample_times);
        let next = linf.iter().copied().fold(u0_linf, f64::max);
        if !next.is_finite() {
            return Err(Error::Usage("L∞ envelope is not finite".into()));
        }
        let converged = (next - u_max).abs() <= 1e-12 * next.max(1e-300);
        if !converged && iterations >= MAX_FIXED_POINT_ITERATIONS {
            return Err(Error::Usage(format!(
                "the L∞ envelope does not close: u_max = {u_max:.6e} after {iterations} iterations; shorten t_end or reduce the data"
            )));
        }
        if converged {
            if next > u_max {
                // Constants must cover the final range.
                u_max = next;
                let constants = sample(u_max)?;
                let c2: Vec<f64> = constants.iter().map(|c| c.c2).collect();
                let c3: Vec<f64> = constants.iter().map(|c| c.c3).collect();
                let linf = linf_envelope(&c2, &c3, u0_linf, &sample_times);
                break (constants, linf);
            }
            break (constants, linf);
        }
        u_max = next;
    };
    let c4: Vec<f64> = constants.iter().map(|c| c.c4).collect();
    let c5: Vec<f64> = constants.iter().map(|c| c.c5).collect();
    let ric: Vec<f64> = constants.iter().map(|c| c.ricci_sup).collect();
    let tv = tv_envelope(&c4, &c5, tv0, &sample_times, solver.scheme().epsilon, &ric);
    let tv_max = tv.iter().copied().fold(tv0, f64::max);
    Ok(AprioriBounds {
        sample_times,
        constants,
        linf,
        tv,
        u_max,
        tv_max,
        fixed_point_iterations: iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, t: f64) -> Vec<f64> {
        (0..=n).map(|k| t * k as f64 / n as f64).collect()
    }

    #[test]
    fn compatible_case_is_constant() {
        let t = grid(10, 1.0);
        let z = vec![0.0; t.len()];
        assert!(linf_envelope(&z, &z, 0.7, &t).iter().all(|v| *v == 0.7));
        assert!(tv_envelope(&z, &z, 2.0, &t, 0.0, &z).iter().all(|v| *v == 2.0));
    }

    #[test]
    fn exponential_and_linear_closed_forms() {
        let t = grid(7, 1.5);
        let one = vec![1.0; t.len()];
        let z = vec![0.0; t.len()];
        for (e, s) in linf_envelope(&one, &z, 1.0, &t).iter().zip(&t) {
            assert!((e - s.exp()).abs() < 1e-13 * s.exp());
        }
        for (e, s) in linf_envelope(&z, &one, 0.0, &t).iter().zip(&t) {
            assert!((e - s).abs() < 1e-15);
        }
        let pi = vec![std::f64::consts::PI; t.len()];
        for (e, s) in tv_envelope(&pi, &z, 1.0, &t, 0.0, &z).iter().zip(&t) {
            let want = (std::f64::consts::PI * s).exp();
            assert!((e - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn ricci_factor_is_one_on_flat_torus() {
        let t = grid(5, 1.0);
        let z = vec![0.0; t.len()];
        assert!(tv_envelope(&z, &z, 3.0, &t, 0.01, &z).iter().all(|v| *v == 3.0));
        let ric = vec![2.0; t.len()];
        let e = tv_envelope(&z, &z, 1.0, &t, 0.01, &ric);
        assert!((e[5] - 0.02f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn upper_rule_dominates_varying_rates() {
        // c₂ = −1/(1+t): exact envelope 1/(1+t).
        let t = grid(16, 1.0);
        let c2: Vec<f64> = t.iter().map(|s| -1.0 / (1.0 + s)).collect();
        let z = vec![0.0; t.len()];
        for (e, s) in linf_envelope(&c2, &z, 1.0, &t).iter().zip(&t) {
            assert!(*e >= 1.0 / (1.0 + s));
            assert!(*e <= 1.0 / (1.0 + s) + 0.05);
        }
    }
}
