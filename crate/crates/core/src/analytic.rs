//! Closed-form scales of a self-gravitating body and its hidden partner.
//!
//! All functions take a [`PhysicalConstants`] so that they can be evaluated in
//! CGS or, by passing unit constants, directly in natural units.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::units::PhysicalConstants;

/// Number density of ordinary condensed matter, proton masses per cm³.
pub const ORDINARY_DENSITY_MP_PER_CM3: f64 = 1e24;

/// Default mass above which the metabody pair is treated as interpenetrating
/// plasma-like oscillators, in proton masses.
pub const PLASMA_MASS_FLOOR_MP: f64 = 1e12;

/// Default mass below which the metabodies behave as point particles, in
/// proton masses.
pub const POINT_MASS_CEILING_MP: f64 = 1e10;

/// Ordinary density in g/cm³.
pub fn ordinary_density(k: &PhysicalConstants) -> f64 {
    ORDINARY_DENSITY_MP_PER_CM3 * k.m_p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Geometry {
    Radius(f64),
    Density(f64),
}

/// A homogeneous spherical body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BodySpec {
    mass: f64,
    geometry: Geometry,
}

impl BodySpec {
    pub fn with_radius(mass: f64, radius: f64) -> Result<Self> {
        check_positive("mass", mass)?;
        check_positive("radius", radius)?;
        Ok(Self { mass, geometry: Geometry::Radius(radius) })
    }

    pub fn with_density(mass: f64, density: f64) -> Result<Self> {
        check_positive("mass", mass)?;
        check_positive("density", density)?;
        Ok(Self { mass, geometry: Geometry::Density(density) })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn radius(&self) -> f64 {
        match self.geometry {
            Geometry::Radius(r) => r,
            Geometry::Density(rho) => (3.0 * self.mass / (4.0 * PI * rho)).cbrt(),
        }
    }

    pub fn density(&self) -> f64 {
        match self.geometry {
            Geometry::Density(rho) => rho,
            Geometry::Radius(r) => 3.0 * self.mass / (4.0 * PI * r * r * r),
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be positive and finite, got {v}"))
    }
}

/// Localization length Λ = (ħ² R³ / (α G M³))^(1/4) of the relative ground
/// state in the harmonic regime.
pub fn localization_length(body: &BodySpec, alpha: f64, k: &PhysicalConstants) -> Result<f64> {
    check_positive("alpha", alpha)?;
    let (m, r) = (body.mass(), body.radius());
    Ok((k.hbar * k.hbar * r.powi(3) / (alpha * k.g * m.powi(3))).powf(0.25))
}

/// Width of the exact Gaussian ground state of the relative coordinate,
/// `(ħ²/(k μ))^(1/4)` with spring constant `k = α G M²/R³` and reduced mass
/// `μ = M/2`. Differs from [`localization_length`] by the factor 2^(1/4)
/// coming from the reduced mass.
pub fn relative_ground_width(body: &BodySpec, alpha: f64, k: &PhysicalConstants) -> Result<f64> {
    Ok(localization_length(body, alpha, k)? * 2f64.powf(0.25))
}

/// E_BIND = −G M²/R (negative).
pub fn binding_energy(body: &BodySpec, k: &PhysicalConstants) -> f64 {
    -k.g * body.mass().powi(2) / body.radius()
}

/// Coincident-sphere energy −(6/5) G M²/R of two overlapping uniform spheres.
pub fn coincident_sphere_energy(body: &BodySpec, k: &PhysicalConstants) -> f64 {
    1.2 * binding_energy(body, k)
}

/// |E_BIND|/ħ in s⁻¹.
pub fn coherence_frequency(body: &BodySpec, k: &PhysicalConstants) -> f64 {
    binding_energy(body, k).abs() / k.hbar
}

/// ħc/|E_BIND|: the distance light travels during one coherence oscillation
/// (up to 2π).
pub fn coherence_length(body: &BodySpec, k: &PhysicalConstants) -> f64 {
    k.hbar * k.c / binding_energy(body, k).abs()
}

/// τ = M Λ²/(2πħ).
pub fn spreading_time(body: &BodySpec, alpha: f64, k: &PhysicalConstants) -> Result<f64> {
    let lambda = localization_length(body, alpha, k)?;
    Ok(body.mass() * lambda * lambda / (2.0 * PI * k.hbar))
}

/// Radius a = 2ħ²/(G M³) of the point-like (hydrogen-like) relative ground state.
pub fn hydrogen_like_radius(mass: f64, k: &PhysicalConstants) -> Result<f64> {
    check_positive("mass", mass)?;
    Ok(2.0 * k.hbar * k.hbar / (k.g * mass.powi(3)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    PlasmaOscillation,
    PointLike,
    Intermediate,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::PlasmaOscillation => "PlasmaOscillation",
            Regime::PointLike => "PointLike",
            Regime::Intermediate => "Intermediate",
        }
    }
}

/// Mass thresholds (g) separating the regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeThresholds {
    pub plasma_mass_floor: f64,
    pub point_mass_ceiling: f64,
}

impl RegimeThresholds {
    pub fn new(plasma_mass_floor: f64, point_mass_ceiling: f64) -> Result<Self> {
        check_positive("plasma_mass_floor", plasma_mass_floor)?;
        check_positive("point_mass_ceiling", point_mass_ceiling)?;
        if point_mass_ceiling >= plasma_mass_floor {
            return domain(format!(
                "point-mass ceiling {point_mass_ceiling:e} must lie below plasma floor {plasma_mass_floor:e}"
            ));
        }
        Ok(Self { plasma_mass_floor, point_mass_ceiling })
    }

    pub fn defaults(k: &PhysicalConstants) -> Self {
        Self {
            plasma_mass_floor: PLASMA_MASS_FLOOR_MP * k.m_p,
            point_mass_ceiling: POINT_MASS_CEILING_MP * k.m_p,
        }
    }
}

pub fn classify_regime(body: &BodySpec, thresholds: &RegimeThresholds) -> Result<Regime> {
    let t = RegimeThresholds::new(thresholds.plasma_mass_floor, thresholds.point_mass_ceiling)?;
    let m = body.mass();
    Ok(if m >= t.plasma_mass_floor {
        Regime::PlasmaOscillation
    } else if m <= t.point_mass_ceiling {
        Regime::PointLike
    } else {
        Regime::Intermediate
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ThresholdCriterion {
    /// Coherences oscillate faster than light crosses the body: ħc/|E_BIND| < R.
    InstantaneousOscillation,
    /// Plasma regime holds and τ is shorter than the observation time (s).
    SpreadingTime { observation_time: f64 },
}

/// Log-mass scan used to bracket threshold roots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassScan {
    pub min_mass: f64,
    pub max_mass: f64,
    pub points: usize,
    pub alpha: f64,
    pub regimes: RegimeThresholds,
}

impl MassScan {
    pub fn defaults(k: &PhysicalConstants) -> Self {
        Self {
            min_mass: 1e6 * k.m_p,
            max_mass: 1e30 * k.m_p,
            points: 241,
            alpha: 1.0,
            regimes: RegimeThresholds::defaults(k),
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = (self.min_mass.ln(), self.max_mass.ln());
        let n = self.points.max(2);
        (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Threshold {
    /// Threshold mass (g) and the relative residual of the defining condition
    /// at that mass (zero when the threshold is a regime boundary).
    Found { mass: f64, residual: f64 },
    NotFound,
}

impl Threshold {
    pub fn mass(&self) -> Option<f64> {
        match self {
            Threshold::Found { mass, .. } => Some(*mass),
            Threshold::NotFound => None,
        }
    }
}

pub fn classicality_threshold(
    density: f64,
    criterion: ThresholdCriterion,
    scan: &MassScan,
    k: &PhysicalConstants,
) -> Result<Threshold> {
    check_positive("density", density)?;
    check_positive("scan min mass", scan.min_mass)?;
    if scan.max_mass <= scan.min_mass || scan.points < 2 {
        return domain("mass scan needs max > min and at least two points");
    }
    RegimeThresholds::new(scan.regimes.plasma_mass_floor, scan.regimes.point_mass_ceiling)?;
    match criterion {
        ThresholdCriterion::InstantaneousOscillation => instantaneous_root(density, scan, k),
        ThresholdCriterion::SpreadingTime { observation_time } => {
            check_positive("observation time", observation_time)?;
            spreading_threshold(density, observation_time, scan, k)
        }
    }
}

/// log(ħc/|E_BIND|) − log R, strictly decreasing in log M.
fn oscillation_excess(log_mass: f64, density: f64, k: &PhysicalConstants) -> f64 {
    let body = BodySpec { mass: log_mass.exp(), geometry: Geometry::Density(density) };
    coherence_length(&body, k).ln() - body.radius().ln()
}

fn bisect_log_mass(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    // f(lo) > 0 >= f(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn instantaneous_root(density: f64, scan: &MassScan, k: &PhysicalConstants) -> Result<Threshold> {
    let logs: Vec<f64> = scan.grid().iter().map(|m| m.ln()).collect();
    let f = |lm: f64| oscillation_excess(lm, density, k);
    for w in logs.windows(2) {
        if f(w[0]) > 0.0 && f(w[1]) <= 0.0 {
            let root = bisect_log_mass(w[0], w[1], f);
            let mass = root.exp();
            let body = BodySpec { mass, geometry: Geometry::Density(density) };
            let residual = ((coherence_length(&body, k) - body.radius()) / body.radius()).abs();
            return Ok(Threshold::Found { mass, residual });
        }
    }
    Ok(Threshold::NotFound)
}

fn spreading_threshold(
    density: f64,
    observation_time: f64,
    scan: &MassScan,
    k: &PhysicalConstants,
) -> Result<Threshold> {
    let floor = scan.regimes.plasma_mass_floor;
    let tau = |m: f64| {
        let body = BodySpec { mass: m, geometry: Geometry::Density(density) };
        spreading_time(&body, scan.alpha, k)
    };
    let ok = |m: f64| -> Result<bool> { Ok(m >= floor && tau(m)? <= observation_time) };
    let grid = scan.grid();
    let mut prev: Option<f64> = None;
    for &m in &grid {
        if ok(m)? {
            let Some(p) = prev else {
                return Ok(Threshold::Found { mass: m, residual: 0.0 });
            };
            // The regime floor takes over if it lies in this cell and τ already holds there.
            if floor > p && floor <= m && tau(floor)? <= observation_time {
                return Ok(Threshold::Found { mass: floor, residual: 0.0 });
            }
            let lo = p.max(floor).ln();
            let g = |lm: f64| (tau(lm.exp()).unwrap_or(f64::INFINITY) / observation_time).ln();
            let root = bisect_log_mass(lo, m.ln(), g);
            let mass = root.exp();
            let residual = ((tau(mass)? - observation_time) / observation_time).abs();
            return Ok(Threshold::Found { mass, residual });
        }
        prev = Some(m);
    }
    Ok(Threshold::NotFound)
}
