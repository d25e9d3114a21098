use std::fmt;

use crate::error::{Error, Result};
use crate::expr::Expression;

/// Scalar profile `φ(u)` multiplying the flux vector field.
#[derive(Clone)]
pub enum Profile {
    /// `φ(u) = u`.
    Linear,
    /// `φ(u) = u²/2`.
    Burgers,
    /// `φ(u) = u³/3`.
    Cubic,
    /// `φ ≡ 0`.
    Zero,
    /// Arbitrary expression in `u`.
    Expr(Expression),
}

pub const PROFILES: [&str; 4] = ["linear", "burgers", "cubic", "zero"];

impl Profile {
    /// Parses a profile name or a quoted expression in `u`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(inner) = text.strip_prefix('"').and_then(|s| s.strip_suffix('"')) {
            let e = Expression::parse(inner)?;
            if ["x", "y", "t"].iter().any(|v| e.uses(v)) {
                return Err(Error::Config(format!("profile `{inner}` may only depend on u")));
            }
            return Ok(Profile::Expr(e));
        }
        match text {
            "linear" => Ok(Profile::Linear),
            "burgers" => Ok(Profile::Burgers),
            "cubic" => Ok(Profile::Cubic),
            "zero" => Ok(Profile::Zero),
            other => Err(Error::Config(format!(
                "unknown profile `{other}`; available: {} or a quoted expression in u",
                PROFILES.join(", ")
            ))),
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        match self {
            Profile::Linear => u,
            Profile::Burgers => 0.5 * u * u,
            Profile::Cubic => u * u * u / 3.0,
            Profile::Zero => 0.0,
            Profile::Expr(e) => e.eval([0.0; 2], 0.0, u),
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match self {
            Profile::Linear => 1.0,
            Profile::Burgers => u,
            Profile::Cubic => u * u,
            Profile::Zero => 0.0,
            Profile::Expr(e) => {
                let h = 1e-6 * u.abs().max(1.0);
                (e.eval([0.0; 2], 0.0, u + h) - e.eval([0.0; 2], 0.0, u - h)) / (2.0 * h)
            }
        }
    }

    /// Zeros of `φ′` where `φ` changes monotonicity, when known in closed
    /// form.
    pub fn critical_points(&self) -> &'static [f64] {
        match self {
            Profile::Burgers | Profile::Cubic => &[0.0],
            _ => &[],
        }
    }

    /// Points of `(lo, hi)` where `φ′` changes sign, sorted. Expression
    /// profiles are bracketed on a 257-point grid and refined by bisection.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        if !matches!(self, Profile::Expr(_)) {
            return self.critical_points().iter().copied().filter(|c| *c > lo && *c < hi).collect();
        }
        if !(hi > lo) {
            return Vec::new();
        }
        const GRID: usize = 257;
        let at = |k: usize| lo + (hi - lo) * k as f64 / (GRID - 1) as f64;
        let mut roots = Vec::new();
        let mut prev = self.derivative(lo);
        for k in 1..GRID {
            let x = at(k);
            let d = self.derivative(x);
            if prev != 0.0 && d != 0.0 && (prev < 0.0) != (d < 0.0) {
                let (mut a, mut b, mut fa) = (at(k - 1), x, prev);
                for _ in 0..80 {
                    let m = 0.5 * (a + b);
                    let fm = self.derivative(m);
                    if (fm < 0.0) == (fa < 0.0) {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                roots.push(0.5 * (a + b));
            } else if d == 0.0 && k + 1 < GRID {
                roots.push(x);
            }
            prev = d;
        }
        roots
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Profile::Zero)
    }

    /// Evenly spaced samples of `[lo, hi]` (`count ≥ 2`) plus the critical
    /// points inside, sorted.
    pub fn samples(&self, lo: f64, hi: f64, count: usize) -> Vec<f64> {
        let mut v: Vec<f64> = if hi > lo {
            (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
        } else {
            vec![lo]
        };
        v.extend(self.breakpoints(lo, hi));
        v.sort_by(f64::total_cmp);
        v
    }

    /// `(max φ′⁺, max φ′⁻)` over `[lo, hi]`: the largest rightward and
    /// leftward slopes.
    pub fn slope_bounds(&self, lo: f64, hi: f64) -> (f64, f64) {
        match self {
            Profile::Linear => (1.0, 0.0),
            Profile::Zero => (0.0, 0.0),
            Profile::Burgers => (hi.max(0.0), (-lo).max(0.0)),
            Profile::Cubic => (lo.abs().max(hi.abs()).powi(2), 0.0),
            Profile::Expr(_) => self.samples(lo, hi, 17).into_iter().map(|u| self.derivative(u)).fold((0.0, 0.0), |(p, n), d| (p.max(d), n.max(-d))),
        }
    }

    /// `max |φ″|` over `[lo, hi]`, sampled for expression profiles.
    pub fn curvature_bound(&self, lo: f64, hi: f64) -> f64 {
        match self {
            Profile::Linear | Profile::Zero => 0.0,
            Profile::Burgers => 1.0,
            Profile::Cubic => 2.0 * lo.abs().max(hi.abs()),
            Profile::Expr(_) => self
                .samples(lo, hi, 17)
                .into_iter()
                .map(|u| {
                    let h = 1e-4 * u.abs().max(1.0);
                    ((self.derivative(u + h) - self.derivative(u - h)) / (2.0 * h)).abs()
                })
                .fold(0.0, f64::max),
        }
    }

    /// `max |φ′|` over `[lo, hi]`, sampled at 17 points plus critical points.
    pub fn max_slope(&self, lo: f64, hi: f64) -> f64 {
        match self {
            Profile::Linear => 1.0,
            Profile::Zero => 0.0,
            Profile::Burgers => lo.abs().max(hi.abs()),
            Profile::Cubic => lo.abs().max(hi.abs()).powi(2),
            Profile::Expr(_) => self.samples(lo, hi, 17).into_iter().map(|u| self.derivative(u).abs()).fold(0.0, f64::max),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Linear => write!(f, "linear"),
            Profile::Burgers => write!(f, "burgers"),
            Profile::Cubic => write!(f, "cubic"),
            Profile::Zero => write!(f, "zero"),
            Profile::Expr(e) => write!(f, "\"{}\"", e.source()),
        }
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Profile({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_differences() {
        let profiles = [Profile::Linear, Profile::Burgers, Profile::Cubic, Profile::parse("\"sin(u) + u^2\"").unwrap()];
        for p in &profiles {
            for &u in &[-1.3, -0.2, 0.0, 0.7, 2.0] {
                let h = 1e-5;
                let fd = (p.value(u + h) - p.value(u - h)) / (2.0 * h);
                assert!((p.derivative(u) - fd).abs() <= 1e-6 * fd.abs().max(1.0), "{p} at {u}");
            }
        }
    }

    #[test]
    fn max_slope_covers_interior_extrema() {
        let p = Profile::parse("\"cos(u)\"").unwrap();
        let m = p.max_slope(-2.0, 2.0);
        assert!((m - 1.0).abs() < 0.02);
        assert_eq!(Profile::Burgers.max_slope(-0.5, 0.25), 0.5);
    }

    #[test]
    fn parse_rejects_spatial_profiles() {
        assert!(Profile::parse("\"u*x\"").is_err());
        assert!(Profile::parse("quartic").unwrap_err().to_string().contains("burgers"));
    }

    #[test]
    fn samples_include_critical_points() {
        let s = Profile::Burgers.samples(-1.0, 1.0, 4);
        assert!(s.contains(&0.0) && s.len() == 5);
    }
}
