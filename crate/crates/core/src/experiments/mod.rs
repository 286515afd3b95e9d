//! Scenario drivers. Each scenario declares its configuration keys, checks
//! them before allocating anything, runs, and returns an [`ExperimentReport`].

mod closed_form;
mod decoherence;
mod ehrenfest;
mod fit;
mod groundstate;
mod localization;
mod spreading;
mod thresholds;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::Serialize;

pub use fit::{fit_cosine, CosineFit};
pub use spreading::{branch_envelope, BranchPair};

use crate::config::{Config, KeySpec, RawConfig};
use crate::error::{ConfigIssue, Error, Result};
use crate::output::fmt_float;
use crate::units::{natural_scales, NaturalUnitScales, PhysicalConstants};

/// One observable sampled in time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(name: impl Into<String>, t: Vec<f64>, values: Vec<f64>) -> Self {
        Self { name: name.into(), t, values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// A fitted or measured quantity with its residual and the window it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fit {
    pub name: String,
    pub value: f64,
    pub uncertainty: f64,
    pub residual: f64,
    pub window: [f64; 2],
    pub unit: String,
}

/// A tolerance test. Missing bounds are open.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

/// A natural-unit result next to its CGS value for the reference body.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Projection {
    pub name: String,
    pub natural: f64,
    pub cgs: f64,
    pub unit: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub scenario: String,
    pub config: BTreeMap<String, String>,
    pub series: Vec<Series>,
    pub tables: Vec<Table>,
    pub fits: Vec<Fit>,
    pub checks: Vec<Check>,
    pub projections: Vec<Projection>,
    pub notes: Vec<String>,
    /// Propagation steps taken across all runs in the scenario.
    pub steps: usize,
    /// Not serialized: it would break byte-identical reruns.
    pub wall_clock: Duration,
}

impl ExperimentReport {
    pub fn new(scenario: impl Into<String>, config: BTreeMap<String, String>) -> Self {
        Self {
            scenario: scenario.into(),
            config,
            series: Vec::new(),
            tables: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            projections: Vec::new(),
            notes: Vec::new(),
            steps: 0,
            wall_clock: Duration::ZERO,
        }
    }

    fn push_check(&mut self, name: &str, value: f64, lower: Option<f64>, upper: Option<f64>) -> bool {
        let passed = value.is_finite() && lower.is_none_or(|l| value >= l) && upper.is_none_or(|u| value <= u);
        self.checks.push(Check { name: name.into(), value, lower, upper, passed });
        passed
    }

    pub fn check_within(&mut self, name: &str, value: f64, lower: f64, upper: f64) -> bool {
        self.push_check(name, value, Some(lower), Some(upper))
    }

    pub fn check_below(&mut self, name: &str, value: f64, upper: f64) -> bool {
        self.push_check(name, value, None, Some(upper))
    }

    pub fn check_above(&mut self, name: &str, value: f64, lower: f64) -> bool {
        self.push_check(name, value, Some(lower), None)
    }

    pub fn fit(&mut self, name: &str, value: f64, uncertainty: f64, residual: f64, window: [f64; 2], unit: &str) {
        self.fits.push(Fit { name: name.into(), value, uncertainty, residual, window, unit: unit.into() });
    }

    pub fn project(&mut self, name: &str, natural: f64, cgs: f64, unit: &str) {
        self.projections.push(Projection { name: name.into(), natural, cgs, unit: unit.into() });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn fit_named(&self, name: &str) -> Option<&Fit> {
        self.fits.iter().find(|f| f.name == name)
    }

    pub fn series_named(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    /// One line per check, for terminals.
    pub fn check_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                let bound = match (c.lower, c.upper) {
                    (Some(l), Some(u)) => format!("[{}, {}]", fmt_float(l), fmt_float(u)),
                    (Some(l), None) => format!(">= {}", fmt_float(l)),
                    (None, Some(u)) => format!("<= {}", fmt_float(u)),
                    (None, None) => "unbounded".into(),
                };
                format!("{} {} = {} {bound}", if c.passed { "PASS" } else { "FAIL" }, c.name, fmt_float(c.value))
            })
            .collect()
    }
}

pub trait Scenario: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn keys(&self) -> &'static [KeySpec];
    /// Domain and stability checks that need no allocation.
    fn validate(&self, _cfg: &Config) -> Vec<ConfigIssue> {
        Vec::new()
    }
    fn run(&self, cfg: &Config) -> Result<ExperimentReport>;
}

pub struct ScenarioRegistry {
    scenarios: Vec<Box<dyn Scenario>>,
}

impl ScenarioRegistry {
    pub fn empty() -> Self {
        Self { scenarios: Vec::new() }
    }

    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(closed_form::Analytic));
        r.register(Box::new(thresholds::Thresholds));
        r.register(Box::new(localization::Localization));
        r.register(Box::new(decoherence::Decoherence));
        r.register(Box::new(spreading::Spreading));
        r.register(Box::new(ehrenfest::Ehrenfest));
        r.register(Box::new(groundstate::GroundStateRadial));
        r
    }

    /// Later registrations shadow earlier ones with the same name.
    pub fn register(&mut self, s: Box<dyn Scenario>) {
        self.scenarios.retain(|x| x.name() != s.name());
        self.scenarios.push(s);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.scenarios.iter().map(|s| s.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Scenario> {
        self.scenarios.iter().map(|s| s.as_ref())
    }

    pub fn get(&self, name: &str) -> Result<&dyn Scenario> {
        self.iter().find(|s| s.name() == name).ok_or_else(|| Error::UnknownScenario(name.into()))
    }

    /// Resolves and validates a configuration for `name`.
    pub fn configure(&self, name: &str, raw: &RawConfig) -> Result<Config> {
        let s = self.get(name)?;
        let cfg = Config::resolve(s.keys(), raw)?;
        let issues = s.validate(&cfg);
        if issues.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(issues))
        }
    }

    pub fn run(&self, name: &str, raw: &RawConfig) -> Result<ExperimentReport> {
        let cfg = self.configure(name, raw)?;
        let start = Instant::now();
        let mut report = self.get(name)?.run(&cfg)?;
        report.wall_clock = start.elapsed();
        Ok(report)
    }
}

impl Default for ScenarioRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

/// Natural→CGS scales for a reference body given in proton masses.
pub(crate) fn reference_scales(cfg: &Config) -> Result<(NaturalUnitScales, PhysicalConstants)> {
    let k = PhysicalConstants::CGS;
    Ok((natural_scales(k.grams(cfg.f64("reference_mass_mp")), &k)?, k))
}

pub(crate) const REFERENCE_KEY: KeySpec = KeySpec::new(
    "reference_mass_mp",
    crate::config::Kind::Float,
    "1e12",
    "reference mass (proton masses) fixing the natural units for the CGS projection",
);

/// Collects an issue unless `ok`.
pub(crate) fn require(issues: &mut Vec<ConfigIssue>, cfg: &Config, ok: bool, key: &str, msg: impl FnOnce() -> String) {
    if !ok {
        issues.push(cfg.issue(key, msg()));
    }
}

pub(crate) fn positive(issues: &mut Vec<ConfigIssue>, cfg: &Config, keys: &[&str]) {
    for &k in keys {
        if let Some(v) = cfg.opt_f64(k) {
            require(issues, cfg, v > 0.0, k, || format!("must be positive, got {v}"));
        }
    }
}

/// Power of two ≥ 16, as the grid requires.
pub(crate) fn grid_points(issues: &mut Vec<ConfigIssue>, cfg: &Config, key: &str, max: usize) {
    let n = cfg.usize(key);
    require(issues, cfg, n >= 16 && n.is_power_of_two() && n <= max, key, || {
        format!("must be a power of two in [16, {max}], got {n}")
    });
}

/// The real-time stability limits, evaluated from closed-form bounds on the
/// potential so that no grid is allocated.
pub(crate) fn dt_limit(vmax: f64, points: usize, extent: f64, mass: f64) -> f64 {
    let k_max = std::f64::consts::PI * points as f64 / extent;
    let kin = k_max * k_max / (2.0 * mass);
    let by_v = if vmax > 0.0 { 0.1 / vmax } else { f64::INFINITY };
    by_v.min(0.5 / kin)
}

/// Least-squares slope of ln y against ln x, with the RMS residual.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return crate::error::domain("log-log fit needs at least two positive pairs");
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return crate::error::domain("log-log fit needs distinct abscissae");
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let rms = (lx.iter().zip(&ly).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum::<f64>() / n).sqrt();
    Ok((slope, rms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_the_seven_scenarios() {
        let r = ScenarioRegistry::standard();
        assert_eq!(
            r.names(),
            ["analytic", "thresholds", "localization", "decohere", "spread", "ehrenfest", "groundstate-radial"]
        );
        assert!(matches!(r.get("nope"), Err(Error::UnknownScenario(_))));
        for s in r.iter() {
            assert!(!s.description().is_empty());
            let mut names: Vec<&str> = s.keys().iter().map(|k| k.name).collect();
            names.sort_unstable();
            names.dedup();
            assert_eq!(names.len(), s.keys().len(), "{}", s.name());
        }
    }

    #[test]
    fn checks_track_bounds() {
        let mut r = ExperimentReport::new("x", BTreeMap::new());
        assert!(r.check_within("a", 1.0, 0.0, 2.0));
        assert!(!r.check_below("b", 3.0, 2.0));
        assert!(!r.check_above("c", f64::NAN, 0.0));
        assert!(!r.passed());
        assert_eq!(r.check_lines()[1], "FAIL b = 3 <= 2");
    }
}
