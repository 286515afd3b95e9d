use crate::analytic::{
    binding_energy, classify_regime, coherence_frequency, coherence_length, coincident_sphere_energy,
    hydrogen_like_radius, localization_length, ordinary_density, relative_ground_width, spreading_time, BodySpec,
    RegimeThresholds, ORDINARY_DENSITY_MP_PER_CM3,
};
use crate::config::{Config, KeySpec, Kind};
use crate::error::{ConfigIssue, Result};
use crate::units::{natural_scales, PhysicalConstants};

use super::{loglog_slope, positive, require, Cell, ExperimentReport, Scenario, Table};

pub struct Analytic;

const KEYS: &[KeySpec] = &[
    KeySpec::required("mass_mp", Kind::Float, "body mass in proton masses"),
    KeySpec::optional("density_mp_cm3", Kind::Float, "number density in proton masses per cm³"),
    KeySpec::optional("radius_cm", Kind::Float, "body radius in cm"),
    KeySpec::new("alpha", Kind::Float, "1", "harmonic coefficient α"),
    KeySpec::new("plasma_floor_mp", Kind::Float, "1e12", "plasma-oscillation regime floor (proton masses)"),
    KeySpec::new("point_ceiling_mp", Kind::Float, "1e10", "point-like regime ceiling (proton masses)"),
];

/// Masses for the scaling-law fits, spanning the whole supported range.
fn law_masses(k: &PhysicalConstants) -> Vec<f64> {
    (0..=24).map(|i| k.grams(10f64.powi(6 + i))).collect()
}

impl Analytic {
    fn body(cfg: &Config, k: &PhysicalConstants) -> Result<BodySpec> {
        let m = k.grams(cfg.f64("mass_mp"));
        match cfg.opt_f64("radius_cm") {
            Some(r) => BodySpec::with_radius(m, r),
            None => BodySpec::with_density(m, cfg.f64("density_mp_cm3") * k.m_p),
        }
    }

    /// Checks on the closed forms that hold for every configuration.
    fn laws(report: &mut ExperimentReport, k: &PhysicalConstants) -> Result<()> {
        let rho = ordinary_density(k);
        let masses = law_masses(k);
        let bodies: Vec<BodySpec> = masses.iter().map(|&m| BodySpec::with_density(m, rho)).collect::<Result<_>>()?;
        let e: Vec<f64> = bodies.iter().map(|b| binding_energy(b, k).abs()).collect();
        let lam: Vec<f64> = bodies.iter().map(|b| localization_length(b, 1.0, k)).collect::<Result<_>>()?;
        let a: Vec<f64> = masses.iter().map(|&m| hydrogen_like_radius(m, k)).collect::<Result<_>>()?;
        let window = [masses[0] / k.m_p, masses[masses.len() - 1] / k.m_p];
        for (name, ys, expect) in [("ebind_slope", &e, 5.0 / 3.0), ("lambda_slope", &lam, -0.5), ("a_slope", &a, -3.0)] {
            let (slope, rms) = loglog_slope(&masses, ys)?;
            report.fit(name, slope, 0.0, rms, window, "1");
            report.check_within(name, slope, expect - 1e-6, expect + 1e-6);
        }

        let taus: Vec<f64> = [1e12, 1e14, 1e16]
            .iter()
            .map(|&m| spreading_time(&BodySpec::with_density(k.grams(m), rho)?, 1.0, k))
            .collect::<Result<_>>()?;
        let spread = taus.iter().map(|t| (t / taus[0] - 1.0).abs()).fold(0.0, f64::max);
        report.check_below("tau_mass_independence", spread, 1e-10);
        report.check_within("tau_ordinary_density_s", taus[0], 50.0, 2500.0);

        let lam12 = localization_length(&BodySpec::with_density(k.grams(1e12), rho)?, 1.0, k)?;
        report.check_within("lambda_1e12_mp_cm", lam12, 5e-7, 5e-6);
        let b21 = BodySpec::with_density(k.grams(1e21), rho)?;
        report.check_within("frequency_1e21_mp_hz", coherence_frequency(&b21, k), 5e14, 5e15);
        report.check_below("coherence_length_over_radius_1e21_mp", coherence_length(&b21, k) / b21.radius(), 1e-3);
        let a_mp = hydrogen_like_radius(k.m_p, k)?;
        report.check_within("a_proton_cm", a_mp, 1e25 / 3.0, 3e25);
        Ok(())
    }
}

impl Scenario for Analytic {
    fn name(&self) -> &'static str {
        "analytic"
    }

    fn description(&self) -> &'static str {
        "closed-form scales of one body (Λ, E_BIND, frequencies, τ, a, regime) and their scaling laws"
    }

    fn keys(&self) -> &'static [KeySpec] {
        KEYS
    }

    fn validate(&self, cfg: &Config) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        positive(&mut issues, cfg, &["mass_mp", "density_mp_cm3", "radius_cm", "alpha", "plasma_floor_mp", "point_ceiling_mp"]);
        let geometry = cfg.is_set("density_mp_cm3") as u8 + cfg.is_set("radius_cm") as u8;
        require(&mut issues, cfg, geometry == 1, "density_mp_cm3", || {
            "set exactly one of density_mp_cm3 and radius_cm".into()
        });
        require(&mut issues, cfg, cfg.f64("point_ceiling_mp") < cfg.f64("plasma_floor_mp"), "point_ceiling_mp", || {
            "must lie below plasma_floor_mp".into()
        });
        issues
    }

    fn run(&self, cfg: &Config) -> Result<ExperimentReport> {
        let k = PhysicalConstants::CGS;
        let mut report = ExperimentReport::new(self.name(), cfg.echo());
        let body = Self::body(cfg, &k)?;
        let alpha = cfg.f64("alpha");
        let thresholds =
            RegimeThresholds::new(k.grams(cfg.f64("plasma_floor_mp")), k.grams(cfg.f64("point_ceiling_mp")))?;
        let regime = classify_regime(&body, &thresholds)?;
        let lam = localization_length(&body, alpha, &k)?;
        let rows: Vec<(&str, f64, &str)> = vec![
            ("mass", body.mass(), "g"),
            ("radius", body.radius(), "cm"),
            ("density", body.density(), "g/cm3"),
            ("localization_length", lam, "cm"),
            ("relative_ground_width", relative_ground_width(&body, alpha, &k)?, "cm"),
            ("binding_energy", binding_energy(&body, &k), "erg"),
            ("coincident_sphere_energy", coincident_sphere_energy(&body, &k), "erg"),
            ("coherence_frequency", coherence_frequency(&body, &k), "1/s"),
            ("coherence_length", coherence_length(&body, &k), "cm"),
            ("spreading_time", spreading_time(&body, alpha, &k)?, "s"),
            ("hydrogen_like_radius", hydrogen_like_radius(body.mass(), &k)?, "cm"),
        ];
        let mut table = Table {
            name: "scales".into(),
            columns: vec!["quantity".into(), "value".into(), "unit".into()],
            rows: rows
                .iter()
                .map(|(q, v, u)| vec![Cell::Text(q.to_string()), Cell::Num(*v), Cell::Text(u.to_string())])
                .collect(),
        };
        table.rows.push(vec![Cell::Text("regime".into()), Cell::Text(regime.as_str().into()), Cell::Text("".into())]);
        report.tables.push(table);

        let s = natural_scales(body.mass(), &k)?;
        report.project("localization_length", s.length_to_natural(lam), lam, "cm");
        report.project("radius", s.length_to_natural(body.radius()), body.radius(), "cm");
        let e = binding_energy(&body, &k);
        report.project("binding_energy", s.energy_to_natural(e), e, "erg");
        report.note(format!(
            "regime {} with floor {} m_p and ceiling {} m_p; natural units fixed by the body mass",
            regime.as_str(),
            cfg.f64("plasma_floor_mp"),
            cfg.f64("point_ceiling_mp")
        ));
        report.note(format!(
            "scaling laws and paper-facing values use the ordinary density {ORDINARY_DENSITY_MP_PER_CM3:e} m_p/cm³ and α = 1"
        ));
        Self::laws(&mut report, &k)?;
        Ok(report)
    }
}
