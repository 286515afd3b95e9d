//! Physical constants (CGS) and the natural unit system ħ = G = M = 1.
//!
//! Every external number is CGS: grams, centimetres, seconds, ergs. The grid
//! solvers work in natural units fixed by a reference mass `M`, in which
//!
//! ```text
//! length = ħ²/(G M³)    time = ħ³/(G² M⁵)    energy = G² M⁵/ħ²
//! ```

use serde::Serialize;

use crate::error::{domain, Result};

/// Fundamental constants in CGS units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// Gravitational constant, cm³ g⁻¹ s⁻².
    pub g: f64,
    /// Reduced Planck constant, erg s.
    pub hbar: f64,
    /// Speed of light, cm/s.
    pub c: f64,
    /// Proton mass, g.
    pub m_p: f64,
}

impl PhysicalConstants {
    pub const CGS: PhysicalConstants = PhysicalConstants {
        g: 6.674e-8,
        hbar: 1.0546e-27,
        c: 2.998e10,
        m_p: 1.6726e-24,
    };

    /// Same constants with a replaced speed of light (used for sensitivity scans).
    pub fn with_c(self, c: f64) -> Self {
        Self { c, ..self }
    }

    pub fn proton_masses(&self, mass_g: f64) -> f64 {
        mass_g / self.m_p
    }

    pub fn grams(&self, mass_mp: f64) -> f64 {
        mass_mp * self.m_p
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CGS
    }
}

/// Conversion factors from natural units (ħ = G = M = 1) to CGS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NaturalUnitScales {
    /// cm per natural length unit.
    pub length_scale: f64,
    /// s per natural time unit.
    pub time_scale: f64,
    /// erg per natural energy unit.
    pub energy_scale: f64,
    /// g per natural mass unit.
    pub mass_scale: f64,
}

pub fn natural_scales(reference_mass: f64, k: &PhysicalConstants) -> Result<NaturalUnitScales> {
    if !(reference_mass > 0.0) || !reference_mass.is_finite() {
        return domain(format!("reference mass must be positive and finite, got {reference_mass}"));
    }
    let m = reference_mass;
    let m3 = m * m * m;
    let m5 = m3 * m * m;
    Ok(NaturalUnitScales {
        length_scale: k.hbar * k.hbar / (k.g * m3),
        time_scale: k.hbar.powi(3) / (k.g * k.g * m5),
        energy_scale: k.g * k.g * m5 / (k.hbar * k.hbar),
        mass_scale: m,
    })
}

impl NaturalUnitScales {
    pub fn length_to_cgs(&self, x: f64) -> f64 {
        x * self.length_scale
    }
    pub fn length_to_natural(&self, cm: f64) -> f64 {
        cm / self.length_scale
    }
    pub fn time_to_cgs(&self, t: f64) -> f64 {
        t * self.time_scale
    }
    pub fn time_to_natural(&self, s: f64) -> f64 {
        s / self.time_scale
    }
    pub fn energy_to_cgs(&self, e: f64) -> f64 {
        e * self.energy_scale
    }
    pub fn energy_to_natural(&self, erg: f64) -> f64 {
        erg / self.energy_scale
    }
    pub fn mass_to_cgs(&self, m: f64) -> f64 {
        m * self.mass_scale
    }
    pub fn mass_to_natural(&self, g: f64) -> f64 {
        g / self.mass_scale
    }
    /// s⁻¹ per natural frequency unit.
    pub fn frequency_to_cgs(&self, w: f64) -> f64 {
        w / self.time_scale
    }
    /// dyn per natural force unit.
    pub fn force_to_cgs(&self, f: f64) -> f64 {
        f * self.energy_scale / self.length_scale
    }
}
