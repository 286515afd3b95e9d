use std::sync::Arc;

use crate::analytic::hydrogen_like_radius;
use crate::config::{Config, KeySpec, Kind};
use crate::error::{ConfigIssue, Error, Result};
use crate::grid::{
    build_potential, split_step_evolve, EvolutionParams, Grid, HarmonicPotential, MetaHamiltonian, MetaWavefunction,
    PotentialSpec, SoftenedCoulomb, C64,
};
use crate::radial::{expectation_radius, RadialProblem};
use crate::units::{natural_scales, PhysicalConstants};

use super::{grid_points, positive, require, Cell, ExperimentReport, Scenario, Series, Table};

pub struct GroundStateRadial;

const KEYS: &[KeySpec] = &[
    KeySpec::new("mass", Kind::Float, "1", "body mass (natural units)"),
    KeySpec::new("g", Kind::Float, "1", "gravitational coupling (natural units)"),
    KeySpec::new("radius", Kind::Float, "0.1", "sphere radius for the finite-size ground state"),
    KeySpec::new("r_max", Kind::Float, "60", "outer radius of the radial mesh"),
    KeySpec::new("mesh_points", Kind::Int, "6000", "radial mesh points"),
    KeySpec::new("grid_check", Kind::Bool, "true", "cross-check the sphere energy on the 2D grid"),
    KeySpec::new("grid_points", Kind::Int, "512", "grid points per axis for the cross-check"),
    KeySpec::new("grid_extent", Kind::Float, "64", "grid extent for the cross-check"),
    KeySpec::new("grid_dt", Kind::Float, "0.05", "imaginary time step for the cross-check"),
    KeySpec::new("grid_tolerance", Kind::Float, "1e-10", "relative energy change per step at convergence"),
    KeySpec::new("check_every", Kind::Int, "20", "steps between energy checks and odd projections"),
    KeySpec::new("max_steps", Kind::Int, "20000", "imaginary-time step budget"),
    KeySpec::new("agreement", Kind::Float, "0.02", "allowed relative gap between grid and radial energies"),
    KeySpec::new("mass_mp", Kind::Float, "1", "body mass in proton masses for the CGS projection"),
];

fn wrap(d: f64, l: f64) -> f64 {
    d - l * (d / l).round()
}

/// Lowest state odd under X ↔ Y. Odd relative states of a 1D pair share the
/// s-wave spectrum; the projection is reapplied at every check because
/// round-off otherwise feeds the even ground state.
fn odd_ground_state(ham: &MetaHamiltonian, seed: MetaWavefunction, cfg: &Config) -> Result<(f64, usize, Vec<(usize, f64)>)> {
    let every = cfg.usize("check_every");
    let chunk = EvolutionParams::imaginary(cfg.f64("grid_dt"), every, every);
    let project = |s: &mut MetaWavefunction| -> Result<()> {
        let swapped = s.exchanged();
        s.amplitudes_mut().iter_mut().zip(swapped.amplitudes()).for_each(|(a, b)| *a = 0.5 * (*a - b));
        s.normalize().map(|_| ())
    };
    let mut state = seed;
    project(&mut state)?;
    let mut energy = ham.energy(&state)?;
    let mut history = vec![(0, energy)];
    let mut steps = 0;
    let mut residual = f64::INFINITY;
    while steps < cfg.usize("max_steps") {
        split_step_evolve(&mut state, ham, &chunk, |_, _, _| Ok(()))?;
        project(&mut state)?;
        steps += every;
        let e = ham.energy(&state)?;
        if !e.is_finite() {
            return Err(Error::Unstable { step: steps, detail: "energy became non-finite".into() });
        }
        residual = ((e - energy) / e).abs() / every as f64;
        energy = e;
        history.push((steps, e));
        if residual < cfg.f64("grid_tolerance") {
            return Ok((energy, steps, history));
        }
    }
    Err(Error::NotConverged { steps, residual })
}

impl Scenario for GroundStateRadial {
    fn name(&self) -> &'static str {
        "groundstate-radial"
    }

    fn description(&self) -> &'static str {
        "s-wave ground states: point-mass hydrogen-like benchmark, oscillator benchmark and the finite sphere"
    }

    fn keys(&self) -> &'static [KeySpec] {
        KEYS
    }

    fn validate(&self, cfg: &Config) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        positive(&mut issues, cfg, &["mass", "g", "radius", "r_max", "grid_extent", "grid_dt", "grid_tolerance", "agreement", "mass_mp"]);
        require(&mut issues, cfg, cfg.usize("mesh_points") >= 1000, "mesh_points", || "need at least 1000".into());
        grid_points(&mut issues, cfg, "grid_points", 1024);
        for key in ["check_every", "max_steps"] {
            require(&mut issues, cfg, cfg.usize(key) > 0, key, || "must be at least 1".into());
        }
        if !issues.is_empty() {
            return issues;
        }
        let (m, g) = (cfg.f64("mass"), cfg.f64("g"));
        let a = 2.0 / (g * m.powi(3));
        require(&mut issues, cfg, cfg.f64("r_max") >= 15.0 * a, "r_max", || {
            format!("r_max must cover 15 Bohr-like radii ({:e})", 15.0 * a)
        });
        if cfg.bool("grid_check") {
            require(&mut issues, cfg, cfg.f64("grid_extent") >= 30.0 * a, "grid_extent", || {
                format!("grid extent must cover 30 Bohr-like radii ({:e})", 30.0 * a)
            });
            let dx = cfg.f64("grid_extent") / cfg.usize("grid_points") as f64;
            require(&mut issues, cfg, dx <= a / 8.0, "grid_points", || format!("spacing {dx:e} does not resolve a = {a:e}"));
        }
        issues
    }

    fn run(&self, cfg: &Config) -> Result<ExperimentReport> {
        let mut report = ExperimentReport::new(self.name(), cfg.echo());
        let (m, g, r) = (cfg.f64("mass"), cfg.f64("g"), cfg.f64("radius"));
        let mu = 0.5 * m;
        let coupling = g * m * m;
        let (r_max, mesh_points) = (cfg.f64("r_max"), cfg.usize("mesh_points"));
        let radial = |potential: Arc<dyn crate::grid::CrossPotential>, reduced_mass: f64, r_max: f64, mesh_points: usize| {
            RadialProblem { reduced_mass, potential, r_max, mesh_points }.ground_state()
        };

        let e_h = -mu * coupling * coupling / 2.0;
        let a = 1.0 / (mu * coupling);
        let h = radial(Arc::new(SoftenedCoulomb { coupling, softening: 0.0 }), mu, r_max, mesh_points)?;
        let rh = expectation_radius(&h.u, &h.mesh)?;
        report.fit("point_energy", h.energy, 0.0, h.residual, [0.0, r_max], "natural energy");
        report.check_below("point_energy_error", (h.energy - e_h).abs() / e_h.abs(), 4e-6);
        report.check_below("point_mean_radius_error", (rh - 1.5 * a).abs() / (1.5 * a), 4e-5);
        report.check_below("point_nodes", h.nodes as f64, 0.0);

        let osc = radial(Arc::new(HarmonicPotential { k: 1.0 }), 1.0, 10.0, 4000)?;
        report.check_below("oscillator_energy_error", (osc.energy - 1.5).abs(), 1e-6);

        let spec = PotentialSpec { mass: m, radius: r, g, softening: 0.0 };
        let sphere = radial(build_potential("sphere", &spec)?, mu, r_max, mesh_points)?;
        let rs = expectation_radius(&sphere.u, &sphere.mesh)?;
        let omega = (coupling / (r.powi(3) * mu)).sqrt();
        let e_harm = -1.2 * coupling / r + 1.5 * omega;
        report.fit("sphere_energy", sphere.energy, 0.0, sphere.residual, [0.0, r_max], "natural energy");
        report.fit("sphere_mean_radius", rs, 0.0, sphere.residual, [0.0, r_max], "natural length");
        report.check_within("sphere_energy", sphere.energy, e_h, e_harm);
        report.check_below("sphere_tail_ratio", sphere.tail_ratio, 1e-6);

        if cfg.bool("grid_check") {
            let (n, l) = (cfg.usize("grid_points"), cfg.f64("grid_extent"));
            let grid = Grid::new(2, n, l)?;
            let ham = MetaHamiltonian::all_cross_pairs(vec![m; 2], build_potential("sphere", &spec)?)?;
            let seed = MetaWavefunction::from_fn(grid, vec![m; 2], |x| {
                let d = wrap(x[0] - x[1], l);
                C64::new(d * (-d.abs() / a).exp(), 0.0)
            })?;
            let (e_grid, steps, history) = odd_ground_state(&ham, seed, cfg)?;
            report.steps += steps;
            let tol = cfg.f64("agreement");
            report.fit("grid_odd_energy", e_grid, 0.0, 0.0, [0.0, steps as f64 * cfg.f64("grid_dt")], "natural energy");
            report.check_below("grid_radial_gap", (e_grid / sphere.energy - 1.0).abs(), tol);
            report.check_above("grid_above_radial", e_grid, sphere.energy - tol * sphere.energy.abs());
            let (t, e): (Vec<f64>, Vec<f64>) =
                history.iter().map(|&(s, e)| (s as f64 * cfg.f64("grid_dt"), e)).unzip();
            report.series.push(Series::new("grid_energy", t, e));
        }

        report.tables.push(Table {
            name: "radial_profiles".into(),
            columns: ["r", "u_point", "u_sphere"].map(String::from).to_vec(),
            rows: h
                .mesh
                .iter()
                .zip(h.u.iter().zip(&sphere.u))
                .step_by((mesh_points / 600).max(1))
                .map(|(r, (u1, u2))| vec![Cell::Num(*r), Cell::Num(*u1), Cell::Num(*u2)])
                .collect(),
        });

        let k = PhysicalConstants::CGS;
        let mass_g = k.grams(cfg.f64("mass_mp"));
        let sc = natural_scales(mass_g, &k)?;
        // natural units are fixed by the body itself, so a = 2 there
        let a_cgs = hydrogen_like_radius(mass_g, &k)?;
        report.project("hydrogen_like_radius", 2.0, sc.length_to_cgs(2.0), "cm");
        report.check_below("projection_consistency", (sc.length_to_cgs(2.0) / a_cgs - 1.0).abs(), 1e-12);
        report.project("point_mean_radius", 1.5 * 2.0, sc.length_to_cgs(3.0), "cm");
        report.note(format!(
            "sphere of radius {r} binds at {:e} between the point limit {e_h:e} and the harmonic estimate {e_harm:e}",
            sphere.energy
        ));
        Ok(report)
    }
}
