//! Run configuration text format.
//!
//! ```text
//! # comment
//! scenario = burgers-flat-circle   # optional base from the catalog
//!
//! [grid]
//! dim = 1
//! n = 128
//! quadrature = 4
//!
//! [geometry]
//! metric = expanding_circle(1, 1)
//!
//! [flux]
//! family = burgers
//! profile = "sin(u)"
//! numerical_flux = eo
//!
//! [initial]
//! u0 = "sin(2*pi*x)"
//!
//! [scheme]
//! cfl = 0.45
//! epsilon = 0
//! t_end = 0.5
//!
//! [output]
//! times = 0, 0.1, 0.5
//!
//! [checks]
//! run = mass, linf, oracle_l1(tol=1e-6, n=256)
//! ```

use std::fmt;

use serde::Serialize;

use super::scenarios;
use crate::call::{parse_number, split_top_level, Call};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::flux::{flux_from_call, Profile};
use crate::geometry::metric_from_call;
use crate::solver::{NumericalFlux, SchemeConfig};

/// Checks understood by the runner.
pub const CHECKS: [&str; 11] = [
    "mass",
    "linf",
    "tv_envelope",
    "tv_diminishing",
    "tv_growth",
    "entropy",
    "l1_contraction",
    "comparison",
    "lipschitz",
    "oracle_l1",
    "monotone",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Reference {
    Oracle,
    /// Run at this many times the finest resolution.
    FineGrid(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub name: String,
    pub dim: usize,
    pub n: usize,
    pub quadrature: usize,
    #[serde(serialize_with = "as_string")]
    pub metric: Call,
    #[serde(serialize_with = "as_string")]
    pub flux: Call,
    pub profile: Option<String>,
    pub u0: String,
    /// Nonnegative offset defining the upper member of paired runs.
    pub perturbation: String,
    pub numerical_flux: NumericalFlux,
    pub cfl: f64,
    pub epsilon: f64,
    pub t_end: f64,
    pub max_steps: usize,
    pub output_times: Vec<f64>,
    #[serde(serialize_with = "calls_as_strings")]
    pub checks: Vec<Call>,
    pub seed: u64,
    pub reference: Reference,
}

fn as_string<S: serde::Serializer>(c: &Call, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&c.to_string())
}

fn calls_as_strings<S: serde::Serializer>(c: &[Call], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(c.iter().map(|c| c.to_string()))
}

impl RunConfig {
    /// Blank configuration with defaults for every optional key.
    pub fn new(name: &str, dim: usize, n: usize, metric: &str, flux: &str) -> Self {
        Self {
            name: name.to_string(),
            dim,
            n,
            quadrature: 4,
            metric: Call::parse(metric).expect("valid metric selector"),
            flux: Call::parse(flux).expect("valid flux selector"),
            profile: None,
            u0: "sin(2*pi*x)".into(),
            perturbation: DEFAULT_PERTURBATION.into(),
            numerical_flux: NumericalFlux::EngquistOsher,
            cfl: 0.45,
            epsilon: 0.0,
            t_end: 1.0,
            max_steps: SchemeConfig::default().max_steps,
            output_times: Vec::new(),
            checks: Vec::new(),
            seed: 0,
            reference: Reference::Oracle,
        }
    }

    pub fn scheme(&self) -> SchemeConfig {
        SchemeConfig {
            numerical_flux: self.numerical_flux,
            cfl: self.cfl,
            epsilon: self.epsilon,
            t_end: self.t_end,
            max_steps: self.max_steps,
        }
    }

    /// Output times including `0` and `t_end`, sorted and deduplicated.
    pub fn times(&self) -> Vec<f64> {
        let mut t = self.output_times.clone();
        t.push(0.0);
        t.push(self.t_end);
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }

    pub fn with_checks(mut self, checks: &[&str]) -> Self {
        self.checks = checks.iter().map(|c| Call::parse(c).expect("valid check selector")).collect();
        self
    }

    pub fn has_check(&self, name: &str) -> bool {
        self.checks.iter().any(|c| c.name == name)
    }

    /// Re-validates a programmatically built configuration.
    pub fn validate(&self) -> Result<()> {
        let issues = validate(self);
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(issues).into())
        }
    }
}

/// Default offset of the upper member of paired runs.
pub const DEFAULT_PERTURBATION: &str = "0.1 + 0.05*sin(2*pi*(3*x + y))";

/// One configuration problem, with its line when it comes from text.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// Every problem found in a configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", lines.join("\n"))
    }
}

impl From<ConfigErrors> for Error {
    fn from(e: ConfigErrors) -> Self {
        Error::Config(e.to_string())
    }
}

const KEYS: [(&str, &[&str]); 9] = [
    ("", &["scenario", "name"]),
    ("grid", &["dim", "n", "quadrature"]),
    ("geometry", &["metric"]),
    ("flux", &["family", "profile", "numerical_flux"]),
    ("initial", &["u0", "perturbation"]),
    ("scheme", &["cfl", "epsilon", "t_end", "max_steps"]),
    ("output", &["times"]),
    ("checks", &["run"]),
    ("run", &["seed", "reference"]),
];

fn unquote(v: &str) -> &str {
    v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v)
}

/// Drops a trailing `# comment` outside quotes.
fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Parses and validates a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> std::result::Result<RunConfig, ConfigErrors> {
    let mut issues = Vec::new();
    let mut entries: Vec<(usize, String, String, String)> = Vec::new();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            match inner.strip_suffix(']') {
                Some(name) if KEYS.iter().any(|(s, _)| *s == name.trim() && !s.is_empty()) => section = name.trim().to_string(),
                Some(name) => {
                    issues.push(ConfigIssue { line: Some(line_no), message: format!("unknown section [{}]", name.trim()) });
                    section = "?".into();
                }
                None => issues.push(ConfigIssue { line: Some(line_no), message: "malformed section header".into() }),
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            issues.push(ConfigIssue { line: Some(line_no), message: format!("expected `key = value`, got `{line}`") });
            continue;
        };
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if section == "?" {
            continue;
        }
        let known = KEYS.iter().find(|(s, _)| *s == section).is_some_and(|(_, keys)| keys.contains(&key.as_str()));
        if !known {
            let place = if section.is_empty() { "top level".to_string() } else { format!("[{section}]") };
            issues.push(ConfigIssue { line: Some(line_no), message: format!("unknown key `{key}` in {place}") });
            continue;
        }
        if entries.iter().any(|(_, s, k, _)| *s == section && *k == key) {
            issues.push(ConfigIssue { line: Some(line_no), message: format!("duplicate key `{key}`") });
            continue;
        }
        entries.push((line_no, section.clone(), key, value));
    }

    let get = |s: &str, k: &str| entries.iter().find(|(_, es, ek, _)| es == s && ek == k).map(|(l, _, _, v)| (*l, v.as_str()));

    let base = match get("", "scenario") {
        Some((line, name)) => match scenarios::scenario(unquote(name)) {
            Some(c) => Some(c),
            None => {
                issues.push(ConfigIssue {
                    line: Some(line),
                    message: format!("unknown scenario `{name}`; available: {}", scenarios::names().join(", ")),
                });
                None
            }
        },
        None => None,
    };
    let from_scenario = base.is_some();
    let mut cfg = base.unwrap_or_else(|| RunConfig::new("custom", 0, 0, "flat", "zero"));
    if !from_scenario {
        for (s, k) in [("geometry", "metric"), ("flux", "family"), ("grid", "n")] {
            if get(s, k).is_none() {
                issues.push(ConfigIssue { line: None, message: format!("missing required key `{k}` in [{s}]") });
            }
        }
    }

    let mut bad = |line: usize, message: String| issues.push(ConfigIssue { line: Some(line), message });

    if let Some((_, v)) = get("", "name") {
        cfg.name = unquote(v).to_string();
    }
    let mut dim_given = false;
    if let Some((l, v)) = get("grid", "dim") {
        match v.parse::<usize>() {
            Ok(d) => {
                cfg.dim = d;
                dim_given = true;
            }
            Err(_) => bad(l, format!("dim: expected an integer, got `{v}`")),
        }
    }
    let mut n_line = None;
    if let Some((l, v)) = get("grid", "n") {
        n_line = Some(l);
        match v.parse::<usize>() {
            Ok(n) if n < 4 => bad(l, "n must be ≥ 4".into()),
            Ok(n) => cfg.n = n,
            Err(_) => bad(l, format!("n: expected an integer, got `{v}`")),
        }
    }
    if let Some((l, v)) = get("grid", "quadrature") {
        match v.parse::<usize>() {
            Ok(q) => cfg.quadrature = q,
            Err(_) => bad(l, format!("quadrature: expected an integer, got `{v}`")),
        }
    }
    let mut metric_line = None;
    if let Some((l, v)) = get("geometry", "metric") {
        metric_line = Some(l);
        match Call::parse(v) {
            Ok(c) => cfg.metric = c,
            Err(e) => bad(l, format!("metric: {e}")),
        }
    }
    // Infer the dimension from the metric family when not given.
    if !dim_given && !from_scenario {
        if let Ok(m) = metric_from_call(&cfg.metric, None) {
            cfg.dim = m.dim();
        }
    }
    let mut flux_line = None;
    if let Some((l, v)) = get("flux", "family") {
        flux_line = Some(l);
        match Call::parse(v) {
            Ok(c) => cfg.flux = c,
            Err(e) => bad(l, format!("family: {e}")),
        }
    }
    let mut profile_line = None;
    if let Some((l, v)) = get("flux", "profile") {
        profile_line = Some(l);
        cfg.profile = Some(v.to_string());
    }
    if let Some((l, v)) = get("flux", "numerical_flux") {
        match NumericalFlux::parse(unquote(v)) {
            Some(k) => cfg.numerical_flux = k,
            None => bad(l, format!("numerical_flux: expected engquist_osher (eo) or local_lax_friedrichs (llf), got `{v}`")),
        }
    }
    let mut u0_line = None;
    if let Some((l, v)) = get("initial", "u0") {
        u0_line = Some(l);
        cfg.u0 = unquote(v).to_string();
    }
    let mut pert_line = None;
    if let Some((l, v)) = get("initial", "perturbation") {
        pert_line = Some(l);
        cfg.perturbation = unquote(v).to_string();
    }
    let mut scheme_lines = [None; 3];
    for (i, key) in ["cfl", "epsilon", "t_end"].iter().enumerate() {
        if let Some((l, v)) = get("scheme", key) {
            scheme_lines[i] = Some(l);
            match parse_number(v) {
                Some(x) => match i {
                    0 => cfg.cfl = x,
                    1 => cfg.epsilon = x,
                    _ => cfg.t_end = x,
                },
                None => bad(l, format!("{key}: expected a number, got `{v}`")),
            }
        }
    }
    if let Some((l, v)) = get("scheme", "max_steps") {
        match v.parse::<usize>() {
            Ok(m) => cfg.max_steps = m,
            Err(_) => bad(l, format!("max_steps: expected an integer, got `{v}`")),
        }
    }
    let mut times_line = None;
    if let Some((l, v)) = get("output", "times") {
        times_line = Some(l);
        let mut times = Vec::new();
        for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match parse_number(item) {
                Some(x) => times.push(x),
                None => bad(l, format!("times: `{item}` is not a number")),
            }
        }
        cfg.output_times = times;
    }
    let mut checks_line = None;
    if let Some((l, v)) = get("checks", "run") {
        checks_line = Some(l);
        let mut checks = Vec::new();
        for item in split_top_level(v).into_iter().map(str::trim).filter(|s| !s.is_empty()) {
            match Call::parse(item) {
                Ok(c) => checks.push(c),
                Err(e) => bad(l, format!("checks: {e}")),
            }
        }
        cfg.checks = checks;
    }
    if let Some((l, v)) = get("run", "seed") {
        match v.parse::<u64>() {
            Ok(s) => cfg.seed = s,
            Err(_) => bad(l, format!("seed: expected a nonnegative integer, got `{v}`")),
        }
    }
    if let Some((l, v)) = get("run", "reference") {
        match parse_reference(unquote(v)) {
            Some(r) => cfg.reference = r,
            None => bad(l, format!("reference: expected `oracle` or `fine(factor)`, got `{v}`")),
        }
    }

    if issues.is_empty() {
        let lines = LineHints {
            n: n_line,
            metric: metric_line,
            flux: flux_line,
            profile: profile_line,
            u0: u0_line,
            perturbation: pert_line,
            cfl: scheme_lines[0],
            epsilon: scheme_lines[1],
            t_end: scheme_lines[2],
            times: times_line,
            checks: checks_line,
        };
        issues.extend(validate_with_lines(&cfg, &lines));
    }
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(issues))
    }
}

fn parse_reference(s: &str) -> Option<Reference> {
    if s == "oracle" {
        return Some(Reference::Oracle);
    }
    let c = Call::parse(s).ok()?;
    if c.name != "fine" {
        return None;
    }
    let factor = match c.numbers().ok()?.as_slice() {
        [] => 4,
        [f] if *f >= 2.0 && f.fract() == 0.0 => *f as usize,
        _ => return None,
    };
    Some(Reference::FineGrid(factor))
}

#[derive(Default)]
struct LineHints {
    n: Option<usize>,
    metric: Option<usize>,
    flux: Option<usize>,
    profile: Option<usize>,
    u0: Option<usize>,
    perturbation: Option<usize>,
    cfl: Option<usize>,
    epsilon: Option<usize>,
    t_end: Option<usize>,
    times: Option<usize>,
    checks: Option<usize>,
}

fn validate(cfg: &RunConfig) -> Vec<ConfigIssue> {
    validate_with_lines(cfg, &LineHints::default())
}

fn validate_with_lines(cfg: &RunConfig, lines: &LineHints) -> Vec<ConfigIssue> {
    let mut issues = Vec::new();
    let mut bad = |line: Option<usize>, message: String| issues.push(ConfigIssue { line, message });
    if cfg.n < 4 {
        bad(lines.n, "n must be ≥ 4".into());
    }
    if cfg.quadrature == 0 {
        bad(None, "quadrature order must be positive".into());
    }
    if cfg.dim != 1 && cfg.dim != 2 {
        // An unusable metric leaves the inferred dimension unset.
        match metric_from_call(&cfg.metric, None) {
            Err(e) => bad(lines.metric, error_text(e)),
            Ok(_) => bad(None, format!("dim must be 1 or 2, got {}", cfg.dim)),
        }
    } else {
        if let Err(e) = metric_from_call(&cfg.metric, Some(cfg.dim)) {
            bad(lines.metric, error_text(e));
        }
        let profile = match &cfg.profile {
            Some(p) => match Profile::parse(p) {
                Ok(p) => Some(p),
                Err(e) => {
                    bad(lines.profile, error_text(e));
                    None
                }
            },
            None => None,
        };
        if let Err(e) = flux_from_call(&cfg.flux, cfg.dim, profile) {
            bad(lines.flux, error_text(e));
        }
    }
    for (expr, line, what) in [(&cfg.u0, lines.u0, "u0"), (&cfg.perturbation, lines.perturbation, "perturbation")] {
        match Expression::parse(expr) {
            Ok(e) if e.uses("u") || e.uses("t") => bad(line, format!("{what} may depend on x and y only")),
            Ok(e) if cfg.dim == 1 && e.uses("y") && what == "u0" => bad(line, "u0 uses y on a one-dimensional grid".into()),
            Ok(_) => {}
            Err(e) => bad(line, format!("{what}: {}", error_text(e))),
        }
    }
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        bad(lines.cfl, format!("cfl must lie in (0, 1], got {}", cfg.cfl));
    }
    if !(cfg.epsilon >= 0.0) {
        bad(lines.epsilon, format!("epsilon must be ≥ 0, got {}", cfg.epsilon));
    }
    if !(cfg.t_end > 0.0) {
        bad(lines.t_end, format!("t_end must be positive, got {}", cfg.t_end));
    }
    if cfg.output_times.iter().any(|&t| !(0.0..=cfg.t_end).contains(&t)) {
        bad(lines.times, format!("output times must lie in [0, {}]", cfg.t_end));
    }
    for c in &cfg.checks {
        if !CHECKS.contains(&c.name.as_str()) {
            bad(lines.checks, format!("unknown check `{}`; available: {}", c.name, CHECKS.join(", ")));
        }
    }
    issues
}

fn error_text(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[geometry]\nmetric = flat\n[flux]\nfamily = burgers\n[grid]\nn = 64\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!((c.dim, c.n, c.cfl, c.epsilon), (1, 64, 0.45, 0.0));
        assert_eq!(c.numerical_flux, NumericalFlux::EngquistOsher);
        assert_eq!(c.times(), vec![0.0, 1.0]);
    }

    #[test]
    fn small_n_is_reported_with_line() {
        let e = parse_config("[geometry]\nmetric = flat\n[flux]\nfamily = burgers\n[grid]\nn = 3\n").unwrap_err();
        assert_eq!(e.0.len(), 1);
        assert_eq!(e.0[0].line, Some(6));
        assert!(e.0[0].message.contains("n must be ≥ 4"));
    }

    #[test]
    fn unknown_flux_lists_families() {
        let e = parse_config("[geometry]\nmetric = flat\n[flux]\nfamily = quartic\n[grid]\nn = 8\n").unwrap_err();
        let text = e.to_string();
        assert!(text.contains("line 4") && text.contains("linear_advection") && text.contains("killing_rotation"), "{text}");
    }

    #[test]
    fn all_errors_are_collected() {
        let text = "bogus = 1\n[grid]\nn = x\n[scheme]\ncfl = fast\n[nowhere]\na = b\n";
        let e = parse_config(text).unwrap_err();
        let lines: Vec<Option<usize>> = e.0.iter().map(|i| i.line).collect();
        for want in [Some(1), Some(3), Some(5), Some(6)] {
            assert!(lines.contains(&want), "{e}");
        }
        // Missing required keys are reported too.
        assert!(e.to_string().contains("missing required key `metric`"));
    }

    #[test]
    fn scenario_base_is_overridden() {
        let c = parse_config("scenario = burgers-flat-circle # base\n[grid]\nn = 32\n[checks]\nrun = mass, oracle_l1(tol=1e-6, n=64)\n").unwrap();
        assert_eq!(c.n, 32);
        assert_eq!(c.checks.len(), 2);
        assert_eq!(c.checks[1].named("n").and_then(|a| a.as_number()), Some(64.0));
    }

    #[test]
    fn semantic_errors() {
        let e = parse_config("[geometry]\nmetric = torus_of_revolution(1, 2)\n[flux]\nfamily = shear(1)\n[grid]\nn = 8\n[output]\ntimes = 0, 2\n[checks]\nrun = speed\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("Rmaj") && e.contains("output times") && e.contains("unknown check"), "{e}");
    }

    #[test]
    fn references() {
        assert_eq!(parse_reference("fine(8)"), Some(Reference::FineGrid(8)));
        assert_eq!(parse_reference("fine"), Some(Reference::FineGrid(4)));
        assert_eq!(parse_reference("coarse"), None);
    }
}
