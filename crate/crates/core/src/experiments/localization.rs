use crate::config::{Config, KeySpec, Kind};
use crate::error::{ConfigIssue, Result};
use crate::grid::{
    build_potential, ground_state_imaginary_time, pair_separation, potential_names, GroundStateParams, Grid,
    MetaHamiltonian, MetaWavefunction, PotentialSpec, C64,
};

use super::{grid_points, positive, reference_scales, require, Cell, ExperimentReport, Scenario, Series, Table, REFERENCE_KEY};

pub struct Localization;

const KEYS: &[KeySpec] = &[
    KeySpec::new("potential", Kind::Text, "sphere", "cross potential: sphere or harmonic"),
    KeySpec::new("mass", Kind::Float, "1", "body mass (natural units)"),
    KeySpec::new("radius", Kind::Float, "1e4", "body radius (natural units)"),
    KeySpec::new("g", Kind::Float, "1", "gravitational coupling (natural units)"),
    KeySpec::new("points", Kind::Int, "512", "grid points per axis"),
    KeySpec::new("extent", Kind::AutoFloat, "auto", "grid extent; auto = 12 relative ground widths"),
    KeySpec::new("dt", Kind::AutoFloat, "auto", "imaginary time step; auto = 0.07 / ω"),
    KeySpec::new("seed_width_factor", Kind::Float, "1.5", "seed relative width in units of the exact one"),
    KeySpec::new("tolerance", Kind::Float, "1e-10", "relative energy change per step at convergence"),
    KeySpec::new("check_every", Kind::Int, "20", "steps between energy checks"),
    KeySpec::new("max_steps", Kind::Int, "20000", "imaginary-time step budget"),
    KeySpec::new("width_tolerance", Kind::AutoFloat, "auto", "allowed |width/Λ_rel − 1|; auto = 0.05 harmonic, 0.10 sphere"),
    KeySpec::new("regime_ratio", Kind::Float, "0.3", "sphere potential requires Λ ≤ regime_ratio · R"),
    KeySpec::new("cm_tolerance", Kind::Float, "1e-8", "allowed deviation of the centre-of-mass marginal from flat"),
    REFERENCE_KEY,
];

/// Closed-form scales of the pair in natural units (ħ = 1).
struct Pair {
    mass: f64,
    radius: f64,
    g: f64,
}

impl Pair {
    fn from(cfg: &Config) -> Self {
        Self { mass: cfg.f64("mass"), radius: cfg.f64("radius"), g: cfg.f64("g") }
    }

    /// Λ = (R³/(G M³))^(1/4) with α = 1.
    fn lambda(&self) -> f64 {
        (self.radius.powi(3) / (self.g * self.mass.powi(3))).powf(0.25)
    }

    /// Exact harmonic ground width with reduced mass M/2.
    fn lambda_rel(&self) -> f64 {
        self.lambda() * 2f64.powf(0.25)
    }

    /// Relative oscillation frequency √(k/μ).
    fn omega(&self) -> f64 {
        (2.0 * self.g * self.mass / self.radius.powi(3)).sqrt()
    }

    fn extent(&self, cfg: &Config) -> f64 {
        cfg.auto_f64("extent").unwrap_or(12.0 * self.lambda_rel())
    }
}

fn wrap(d: f64, l: f64) -> f64 {
    d - l * (d / l).round()
}

/// Largest relative deviation of the (X + Y) marginal from uniform.
fn cm_flatness(state: &MetaWavefunction) -> f64 {
    let n = state.grid().points();
    let mut hist = vec![0.0; n];
    for (idx, a) in state.amplitudes().iter().enumerate() {
        hist[(idx / n + idx % n) % n] += a.norm_sqr();
    }
    let mean = hist.iter().sum::<f64>() / n as f64;
    hist.iter().map(|h| (h / mean - 1.0).abs()).fold(0.0, f64::max)
}

impl Scenario for Localization {
    fn name(&self) -> &'static str {
        "localization"
    }

    fn description(&self) -> &'static str {
        "imaginary-time ground state of a body and its partner; relative width against Λ"
    }

    fn keys(&self) -> &'static [KeySpec] {
        KEYS
    }

    fn validate(&self, cfg: &Config) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        positive(
            &mut issues,
            cfg,
            &["mass", "radius", "g", "extent", "dt", "seed_width_factor", "tolerance", "width_tolerance", "regime_ratio", "cm_tolerance", "reference_mass_mp"],
        );
        grid_points(&mut issues, cfg, "points", 1024);
        let pot = cfg.text("potential");
        require(&mut issues, cfg, pot == "sphere" || pot == "harmonic", "potential", || {
            format!("must be sphere or harmonic (registry has {})", potential_names().collect::<Vec<_>>().join(", "))
        });
        for key in ["check_every", "max_steps"] {
            require(&mut issues, cfg, cfg.usize(key) > 0, key, || "must be at least 1".into());
        }
        if !issues.is_empty() {
            return issues;
        }
        let p = Pair::from(cfg);
        if pot == "sphere" {
            let ratio = cfg.f64("regime_ratio");
            require(&mut issues, cfg, p.lambda() <= ratio * p.radius, "radius", || {
                format!(
                    "plasma regime violated: Λ = {:e} > {ratio} R = {:e}; increase radius or mass",
                    p.lambda(),
                    ratio * p.radius
                )
            });
        }
        let l = p.extent(cfg);
        require(&mut issues, cfg, l >= 8.0 * p.lambda_rel(), "extent", || {
            format!("extent {l:e} must be at least 8 relative ground widths ({:e})", 8.0 * p.lambda_rel())
        });
        let dx = l / cfg.usize("points") as f64;
        require(&mut issues, cfg, p.lambda_rel() / 2f64.sqrt() > 2.0 * dx, "points", || {
            format!("spacing {dx:e} does not resolve the ground width {:e}", p.lambda_rel())
        });
        issues
    }

    fn run(&self, cfg: &Config) -> Result<ExperimentReport> {
        let mut report = ExperimentReport::new(self.name(), cfg.echo());
        let p = Pair::from(cfg);
        let pot_name = cfg.text("potential");
        let spec = PotentialSpec { mass: p.mass, radius: p.radius, g: p.g, softening: 0.0 };
        let ham = MetaHamiltonian::all_cross_pairs(vec![p.mass; 2], build_potential(pot_name, &spec)?)?;
        let l = p.extent(cfg);
        let grid = Grid::new(2, cfg.usize("points"), l)?;
        let (lam, lam_rel, omega) = (p.lambda(), p.lambda_rel(), p.omega());
        let s = cfg.f64("seed_width_factor") * lam_rel;
        // flat in X + Y, Gaussian in the nearest-image X − Y
        let seed = MetaWavefunction::from_fn(grid, vec![p.mass; 2], |x| {
            let d = wrap(x[0] - x[1], l);
            C64::new((-d * d / (2.0 * s * s)).exp(), 0.0)
        })?;
        let dt = cfg.auto_f64("dt").unwrap_or(0.07 / omega);
        let params = GroundStateParams {
            dt,
            max_steps: cfg.usize("max_steps"),
            check_every: cfg.usize("check_every"),
            tolerance: cfg.f64("tolerance"),
        };
        let gs = ground_state_imaginary_time(&ham, seed, &params)?;
        report.steps = gs.steps;

        let sep = pair_separation(&gs.state, 0, 1)?;
        let width = (2.0 * sep.variance).sqrt();
        let ratio = width / lam_rel;
        let tol = cfg.auto_f64("width_tolerance").unwrap_or(if pot_name == "harmonic" { 0.05 } else { 0.10 });
        report.fit("relative_width", width, 0.0, gs.residual, [0.0, gs.steps as f64 * dt], "natural length");
        report.check_within("width_over_lambda_rel", ratio, 1.0 - tol, 1.0 + tol);
        report.fit("width_over_lambda", width / lam, 0.0, gs.residual, [0.0, gs.steps as f64 * dt], "1");
        report.check_below("mean_separation", sep.mean.abs(), 1e-6 * lam_rel);

        let rises = gs.history.windows(2).filter(|w| w[1].1 > w[0].1 + 1e-12 * w[0].1.abs()).count();
        report.check_below("energy_increases", rises as f64, 0.0);
        report.check_below("cm_marginal_flatness", cm_flatness(&gs.state), cfg.f64("cm_tolerance"));

        let e_osc = 0.5 * omega;
        let e_ref = if pot_name == "harmonic" { e_osc } else { -1.2 * p.g * p.mass * p.mass / p.radius + e_osc };
        report.fit("ground_energy", gs.energy, 0.0, gs.residual, [0.0, gs.steps as f64 * dt], "natural energy");
        if pot_name == "harmonic" {
            report.check_within("energy_over_oscillator", gs.energy / e_osc, 1.0 - 1e-3, 1.0 + 1e-2);
        }
        report.note(format!(
            "exact relative width Λ_rel = 2^(1/4) Λ = {lam_rel:e} (reduced mass M/2) is gated; Λ = {lam:e} is reported alongside"
        ));
        report.note(format!("reference ground energy {e_ref:e} (coincident-sphere depth plus ω/2 when the potential is the sphere)"));

        let (t, e): (Vec<f64>, Vec<f64>) = gs.history.iter().map(|&(step, e)| (step as f64 * dt, e)).unzip();
        report.series.push(Series::new("energy", t, e));
        let rows = sep
            .separations
            .iter()
            .zip(&sep.distribution)
            .map(|(&d, &prob)| {
                let dx = grid.spacing();
                let oracle = (-d * d / (lam_rel * lam_rel)).exp() / (lam_rel * std::f64::consts::PI.sqrt());
                vec![Cell::Num(d), Cell::Num(prob / dx), Cell::Num(oracle)]
            })
            .collect();
        report.tables.push(Table {
            name: "relative_profile".into(),
            columns: vec!["separation".into(), "density".into(), "gaussian_oracle".into()],
            rows,
        });

        let (sc, _) = reference_scales(cfg)?;
        report.project("relative_width", width, sc.length_to_cgs(width), "cm");
        report.project("lambda", lam, sc.length_to_cgs(lam), "cm");
        report.project("ground_energy", gs.energy, sc.energy_to_cgs(gs.energy), "erg");
        Ok(report)
    }
}
