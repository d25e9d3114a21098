use std::iter::once;

use serde::Serialize;

use crate::flux::Profile;

/// Two-point monotone flux for `h(u) = H · φ(u)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum NumericalFlux {
    #[default]
    EngquistOsher,
    LocalLaxFriedrichs,
}

impl NumericalFlux {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "engquist_osher" | "eo" => Some(Self::EngquistOsher),
            "local_lax_friedrichs" | "llf" => Some(Self::LocalLaxFriedrichs),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::EngquistOsher => "engquist_osher",
            Self::LocalLaxFriedrichs => "local_lax_friedrichs",
        }
    }
}

/// Numerical flux across a face whose flux function is `h(u) = coeff·φ(u)`,
/// with `uL = a` and `uR = b`.
///
/// `breakpoints` must contain every point in the state range where `φ′`
/// changes sign (sorted); the Engquist–Osher integral `∫ min(h′, 0)` is
/// then exact on the resulting partition.
pub fn normal_flux(kind: NumericalFlux, profile: &Profile, breakpoints: &[f64], coeff: f64, a: f64, b: f64) -> f64 {
    if coeff == 0.0 {
        return 0.0;
    }
    match kind {
        NumericalFlux::EngquistOsher => {
            if coeff > 0.0 {
                coeff * engquist_osher(|u| profile.value(u), breakpoints, a, b)
            } else {
                -coeff * engquist_osher(|u| -profile.value(u), breakpoints, a, b)
            }
        }
        NumericalFlux::LocalLaxFriedrichs => {
            let alpha = coeff.abs() * profile.max_slope(a.min(b), a.max(b));
            0.5 * coeff * (profile.value(a) + profile.value(b)) - 0.5 * alpha * (b - a)
        }
    }
}

/// `ψ(a) + ∫_a^b min(ψ′, 0)` with the integral summed over monotone pieces.
pub fn engquist_osher(psi: impl Fn(f64) -> f64, breakpoints: &[f64], a: f64, b: f64) -> f64 {
    let pa = psi(a);
    if a == b {
        return pa;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut sum = 0.0;
    let mut prev = psi(lo);
    for c in breakpoints.iter().copied().filter(|c| *c > lo && *c < hi).chain(once(hi)) {
        let v = psi(c);
        sum += (v - prev).min(0.0);
        prev = v;
    }
    pa + sign * sum
}
