//! Cross-colour pair potentials, selectable by name.

use std::fmt::Debug;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::sphere_potential::SpherePairPotential;

/// Energy of one green–red pair as a function of the separation `d ≥ 0`.
pub trait CrossPotential: Send + Sync + Debug {
    fn name(&self) -> &'static str;

    fn energy(&self, d: f64) -> f64;

    /// dU/dd.
    fn slope(&self, d: f64) -> f64;
}

impl CrossPotential for SpherePairPotential {
    fn name(&self) -> &'static str {
        "sphere"
    }

    fn energy(&self, d: f64) -> f64 {
        self.energy_unchecked(d)
    }

    fn slope(&self, d: f64) -> f64 {
        self.slope_unchecked(d.abs())
    }
}

/// ½ k d² at every separation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicPotential {
    pub k: f64,
}

impl CrossPotential for HarmonicPotential {
    fn name(&self) -> &'static str {
        "harmonic"
    }

    fn energy(&self, d: f64) -> f64 {
        0.5 * self.k * d * d
    }

    fn slope(&self, d: f64) -> f64 {
        self.k * d.abs()
    }
}

/// −c/√(d² + ε²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SoftenedCoulomb {
    pub coupling: f64,
    pub softening: f64,
}

impl CrossPotential for SoftenedCoulomb {
    fn name(&self) -> &'static str {
        "coulomb"
    }

    fn energy(&self, d: f64) -> f64 {
        -self.coupling / (d * d + self.softening * self.softening).sqrt()
    }

    fn slope(&self, d: f64) -> f64 {
        let d = d.abs();
        self.coupling * d / (d * d + self.softening * self.softening).powf(1.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroPotential;

impl CrossPotential for ZeroPotential {
    fn name(&self) -> &'static str {
        "none"
    }

    fn energy(&self, _d: f64) -> f64 {
        0.0
    }

    fn slope(&self, _d: f64) -> f64 {
        0.0
    }
}

/// Body parameters shared by every potential in the registry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialSpec {
    pub mass: f64,
    pub radius: f64,
    pub g: f64,
    /// Only used by `coulomb`.
    pub softening: f64,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self { mass: 1.0, radius: 1.0, g: 1.0, softening: 0.0 }
    }
}

type Builder = fn(&PotentialSpec) -> Result<Arc<dyn CrossPotential>>;

const REGISTRY: &[(&str, Builder)] = &[
    ("sphere", |s| Ok(Arc::new(SpherePairPotential::new(s.mass, s.radius, s.g)?))),
    ("harmonic", |s| {
        // The harmonic limit of the sphere pair: k = G M²/R³.
        let sphere = SpherePairPotential::new(s.mass, s.radius, s.g)?;
        Ok(Arc::new(HarmonicPotential { k: sphere.spring_constant() }))
    }),
    ("coulomb", |s| {
        if !(s.softening >= 0.0 && s.softening.is_finite()) {
            return domain(format!("softening must be non-negative, got {}", s.softening));
        }
        let sphere = SpherePairPotential::new(s.mass, s.radius, s.g)?;
        if s.softening == 0.0 {
            return domain("coulomb on a grid needs a positive softening length");
        }
        Ok(Arc::new(SoftenedCoulomb { coupling: sphere.coupling() * s.mass * s.mass, softening: s.softening }))
    }),
    ("none", |_| Ok(Arc::new(ZeroPotential))),
];

pub fn potential_names() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|(n, _)| *n)
}

pub fn build_potential(name: &str, spec: &PotentialSpec) -> Result<Arc<dyn CrossPotential>> {
    match REGISTRY.iter().find(|(n, _)| *n == name) {
        Some((_, build)) => build(spec),
        None => domain(format!(
            "unknown potential `{name}` (expected one of {})",
            potential_names().collect::<Vec<_>>().join(", ")
        )),
    }
}
