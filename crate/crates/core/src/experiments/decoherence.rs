use std::f64::consts::PI;

use crate::config::{Config, KeySpec, Kind};
use crate::error::{ConfigIssue, Result};
use crate::grid::{
    build_potential, gaussian_packet, product_state, split_step_evolve, symmetrize, EvolutionParams, Grid,
    MetaHamiltonian, MetaWavefunction, PotentialSpec, C64,
};
use crate::reduced_state::{partial_trace_red, Interval};

use super::{
    dt_limit, fit_cosine, grid_points, positive, reference_scales, require, ExperimentReport, Scenario, Series,
    REFERENCE_KEY,
};

pub struct Decoherence;

const KEYS: &[KeySpec] = &[
    KeySpec::new("mass", Kind::Float, "1", "body mass (natural units)"),
    KeySpec::new("radius", Kind::Float, "1e4", "body radius (natural units)"),
    KeySpec::new("g", Kind::Float, "1", "gravitational coupling (natural units)"),
    KeySpec::new("width", Kind::AutoFloat, "auto", "packet width; auto = relative ground width / √2"),
    KeySpec::new("separation", Kind::AutoFloat, "auto", "branch separation Z; auto = 2 (2R + 6 width)"),
    KeySpec::new("extent", Kind::AutoFloat, "auto", "grid extent; auto = 2Z + 16 width"),
    KeySpec::new("points", Kind::Int, "512", "grid points per axis"),
    KeySpec::new("steps_per_period", Kind::Int, "128", "time steps per coherence period 2πħ/|ΔE|"),
    KeySpec::new("periods", Kind::Float, "2.25", "evolution length in coherence periods"),
    KeySpec::new("sample_every", Kind::Int, "4", "steps between visibility samples"),
    KeySpec::new("control", Kind::Bool, "true", "also run the G = 0 control"),
    KeySpec::new("frequency_tolerance", Kind::Float, "0.05", "allowed |ω_fit/(ΔE/ħ) − 1|"),
    KeySpec::new("first_period_tolerance", Kind::Float, "0.02", "allowed |V − |cos(ΔE t)|| over the first period"),
    KeySpec::new("zero_tolerance", Kind::Float, "0.05", "allowed visibility at the first zero of the cosine"),
    KeySpec::new("control_tolerance", Kind::Float, "1e-6", "allowed |V − 1| in the control"),
    REFERENCE_KEY,
];

struct Geometry {
    mass: f64,
    radius: f64,
    g: f64,
    width: f64,
    z: f64,
    extent: f64,
    points: usize,
}

impl Geometry {
    fn from(cfg: &Config) -> Self {
        let (mass, radius, g) = (cfg.f64("mass"), cfg.f64("radius"), cfg.f64("g"));
        let lam_rel = (2.0 * radius.powi(3) / (g.max(f64::MIN_POSITIVE) * mass.powi(3))).powf(0.25);
        let width = cfg.auto_f64("width").unwrap_or(lam_rel / 2f64.sqrt());
        let z = cfg.auto_f64("separation").unwrap_or(2.0 * (2.0 * radius + 6.0 * width));
        let extent = cfg.auto_f64("extent").unwrap_or(2.0 * z + 16.0 * width);
        Self { mass, radius, g, width, z, extent, points: cfg.usize("points") }
    }

    /// Potential-energy part of the branch gap, known before any allocation.
    fn gap_estimate(&self) -> f64 {
        self.g * self.mass * self.mass * (1.2 / self.radius - 1.0 / self.z)
    }
}

impl Decoherence {
    fn visibility(state: &MetaWavefunction, a: &Interval, b: &Interval) -> Result<(f64, f64)> {
        let rho = partial_trace_red(state)?;
        Ok((rho.coherence_visibility(a, b)?, rho.purity()))
    }
}

impl Scenario for Decoherence {
    fn name(&self) -> &'static str {
        "decohere"
    }

    fn description(&self) -> &'static str {
        "two-position superposition of a body and its partner; coherence visibility against |cos(ΔE t/ħ)|"
    }

    fn keys(&self) -> &'static [KeySpec] {
        KEYS
    }

    fn validate(&self, cfg: &Config) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        positive(
            &mut issues,
            cfg,
            &["mass", "radius", "g", "width", "separation", "extent", "periods", "frequency_tolerance", "first_period_tolerance", "zero_tolerance", "control_tolerance", "reference_mass_mp"],
        );
        grid_points(&mut issues, cfg, "points", 1024);
        let (spp, every) = (cfg.usize("steps_per_period"), cfg.usize("sample_every"));
        require(&mut issues, cfg, every > 0 && spp % (4 * every) == 0, "steps_per_period", || {
            format!("must be a multiple of 4 · sample_every = {} so the first zero is sampled", 4 * every)
        });
        if !issues.is_empty() {
            return issues;
        }
        let geo = Geometry::from(cfg);
        let gap = 2.0 * geo.radius + 6.0 * geo.width;
        require(&mut issues, cfg, geo.z >= gap, "separation", || {
            format!("branches overlap: Z = {:e} < 2R + 6·width = {gap:e}", geo.z)
        });
        require(&mut issues, cfg, geo.z + 8.0 * geo.width < geo.extent / 2.0 + f64::EPSILON * geo.extent, "extent", || {
            format!("extent {:e} must exceed 2 (Z + 8·width) = {:e} so separated branches keep their nearest image", geo.extent, 2.0 * (geo.z + 8.0 * geo.width))
        });
        let dx = geo.extent / geo.points as f64;
        require(&mut issues, cfg, geo.width > 2.0 * dx, "points", || {
            format!("spacing {dx:e} must be below width/2 = {:e}", geo.width / 2.0)
        });
        let gap_e = geo.gap_estimate();
        require(&mut issues, cfg, gap_e > 0.0, "g", || "a positive coupling is needed to define the coherence period".into());
        if gap_e > 0.0 {
            let dt = 2.0 * PI / (gap_e * spp as f64);
            let vmax = 1.2 * geo.g * geo.mass * geo.mass / geo.radius;
            let bound = dt_limit(vmax, geo.points, geo.extent, geo.mass);
            require(&mut issues, cfg, dt <= bound, "steps_per_period", || {
                format!("estimated dt = {dt:e} exceeds the stability bound {bound:e}; raise steps_per_period")
            });
        }
        issues
    }

    fn run(&self, cfg: &Config) -> Result<ExperimentReport> {
        let mut report = ExperimentReport::new(self.name(), cfg.echo());
        let geo = Geometry::from(cfg);
        let grid = Grid::new(2, geo.points, geo.extent)?;
        let spec = PotentialSpec { mass: geo.mass, radius: geo.radius, g: geo.g, softening: 0.0 };
        let ham = MetaHamiltonian::all_cross_pairs(vec![geo.mass; 2], build_potential("sphere", &spec)?)?;
        let a = gaussian_packet(&grid, 0.5 * geo.z, geo.width, 0.0)?;
        let b = gaussian_packet(&grid, -0.5 * geo.z, geo.width, 0.0)?;
        let masses = vec![geo.mass; 2];

        let e_inter = ham.energy(&product_state(grid, &[a.clone(), a.clone()], masses.clone())?)?;
        let e_sep = ham.energy(&product_state(grid, &[a.clone(), b.clone()], masses.clone())?)?;
        let gap = e_inter - e_sep;
        let omega = gap.abs();
        let period = 2.0 * PI / omega;

        // aa + bb + ab + ba, summed explicitly and then projected
        let n = geo.points;
        let mut amps = vec![C64::default(); grid.len()];
        for i in 0..n {
            for j in 0..n {
                amps[i * n + j] = a[i] * a[j] + b[i] * b[j] + a[i] * b[j] + b[i] * a[j];
            }
        }
        let mut state = symmetrize(&MetaWavefunction::from_amplitudes(grid, amps, masses.clone())?)?;
        state.normalize()?;

        let spp = cfg.usize("steps_per_period");
        let dt = period / spp as f64;
        let steps = (cfg.f64("periods") * spp as f64).round() as usize;
        let params = EvolutionParams::real(dt, steps, cfg.usize("sample_every"));
        let half = geo.extent / 2.0;
        let (ra, rb) = (Interval::new(0.0, half)?, Interval::new(-half, 0.0)?);

        let control = if cfg.bool("control") {
            let spec0 = PotentialSpec { g: 0.0, ..spec };
            let ham0 = MetaHamiltonian::all_cross_pairs(masses.clone(), build_potential("sphere", &spec0)?)?;
            let mut psi0 = state.clone();
            let mut worst: f64 = 0.0;
            let mut vis0 = Vec::new();
            let s0 = split_step_evolve(&mut psi0, &ham0, &params, |_, t, s| {
                let (v, _) = Self::visibility(s, &ra, &rb)?;
                worst = worst.max((v - 1.0).abs());
                vis0.push((t, v));
                Ok(())
            })?;
            report.steps += s0.steps;
            Some((worst, vis0))
        } else {
            None
        };

        let (mut ts, mut vis, mut pur) = (Vec::new(), Vec::new(), Vec::new());
        let summary = split_step_evolve(&mut state, &ham, &params, |_, t, s| {
            let (v, p) = Self::visibility(s, &ra, &rb)?;
            ts.push(t);
            vis.push(v);
            pur.push(p);
            Ok(())
        })?;
        report.steps += summary.steps;

        let fit = fit_cosine(&ts, &vis)?;
        let ratio = fit.frequency / omega;
        let tol = cfg.f64("frequency_tolerance");
        report.fit("visibility_frequency", fit.frequency, fit.uncertainty, fit.residual, [0.0, summary.final_time], "1/natural time");
        report.fit("visibility_amplitude", fit.amplitude, 0.0, fit.residual, [0.0, summary.final_time], "1");
        report.check_within("frequency_over_gap", ratio, 1.0 - tol, 1.0 + tol);
        report.check_above("fitted_periods", fit.frequency * summary.final_time / (2.0 * PI), 2.0);

        let cosine: Vec<f64> = ts.iter().map(|t| (omega * t).cos().abs()).collect();
        let first = ts
            .iter()
            .zip(vis.iter().zip(&cosine))
            .filter(|(t, _)| **t <= period * (1.0 + 1e-12))
            .map(|(_, (v, c))| (v - c).abs())
            .fold(0.0, f64::max);
        report.check_below("first_period_deviation", first, cfg.f64("first_period_tolerance"));
        let quarter = ts
            .iter()
            .position(|t| (t - 0.25 * period).abs() <= 1e-9 * period)
            .map(|i| vis[i])
            .unwrap_or(f64::NAN);
        report.check_below("visibility_at_first_zero", quarter, cfg.f64("zero_tolerance"));
        report.check_below("norm_drift_per_1e3_steps", summary.max_norm_drift * 1e3 / steps.max(1000) as f64, 1e-8);
        report.check_below("exchange_asymmetry", state.exchange_asymmetry(), 1e-8);
        if let Some((worst, vis0)) = &control {
            report.check_below("control_visibility_deviation", *worst, cfg.f64("control_tolerance"));
            let (t0, v0) = vis0.iter().cloned().unzip();
            report.series.push(Series::new("control_visibility", t0, v0));
        }

        let unit = geo.g * geo.mass * geo.mass / geo.radius;
        report.fit("branch_gap", gap, 0.0, 0.0, [0.0, 0.0], "natural energy");
        report.fit("frequency_over_ebind", fit.frequency / unit, fit.uncertainty / unit, fit.residual, [0.0, summary.final_time], "1");
        report.fit("frequency_over_coincident", fit.frequency / (1.2 * unit), fit.uncertainty / (1.2 * unit), fit.residual, [0.0, summary.final_time], "1");
        report.note(format!(
            "branch energies: interpenetrating {e_inter:e}, separated {e_sep:e}; gap {gap:e} against −GM²/R = {:e} and −(6/5)GM²/R = {:e}",
            -unit,
            -1.2 * unit
        ));
        report.note(format!("Z = {:e}, width = {:e}, extent = {:e}, dt = {dt:e}, period = {period:e}", geo.z, geo.width, geo.extent));

        report.series.push(Series::new("visibility", ts.clone(), vis));
        report.series.push(Series::new("cos_reference", ts.clone(), cosine));
        report.series.push(Series::new("purity", ts, pur));

        let (sc, _) = reference_scales(cfg)?;
        report.project("branch_gap", gap, sc.energy_to_cgs(gap), "erg");
        report.project("visibility_frequency", fit.frequency, sc.frequency_to_cgs(fit.frequency), "1/s");
        report.project("coherence_period", period, sc.time_to_cgs(period), "s");
        report.project("separation", geo.z, sc.length_to_cgs(geo.z), "cm");
        Ok(report)
    }
}
