use crate::config::{Config, KeySpec, Kind};
use crate::error::{ConfigIssue, Result};
use crate::grid::{
    build_potential, gaussian_packet, kinematics, product_state, split_step_evolve, EvolutionParams, Grid,
    MetaHamiltonian, MetaWavefunction, PotentialSpec,
};
use crate::sphere_potential::SpherePairPotential;

use super::{dt_limit, positive, reference_scales, require, ExperimentReport, Scenario, Series, REFERENCE_KEY};

pub struct Ehrenfest;

const KEYS: &[KeySpec] = &[
    KeySpec::new("mass", Kind::Float, "1", "mass of each body (natural units)"),
    KeySpec::new("radius", Kind::Float, "1", "body radius (natural units)"),
    KeySpec::new("g", Kind::Float, "1", "gravitational coupling (natural units)"),
    KeySpec::new("width", Kind::Float, "0.4", "packet width (natural units)"),
    KeySpec::new("separation_widths", Kind::Float, "9", "initial body separation D in packet widths"),
    KeySpec::new("extent_widths", Kind::Float, "30", "grid extent in packet widths"),
    KeySpec::new("points", Kind::Int, "64", "grid points per axis (four axes)"),
    KeySpec::new("dt", Kind::AutoFloat, "auto", "time step; auto = 0.9 of the stability limit"),
    KeySpec::new("steps", Kind::Int, "12", "steps in the early window"),
    KeySpec::new("force_tolerance", Kind::Float, "1e-3", "allowed |d⟨P⟩/dt − ⟨F⟩| relative to max |⟨F⟩|"),
    KeySpec::new("point_force_tolerance", Kind::Float, "0.05", "allowed |d⟨P⟩/dt / F(D) − 1| against the point-sphere force"),
    KeySpec::new("momentum_tolerance", Kind::Float, "1e-10", "allowed drift of the total momentum"),
    KeySpec::new("mirror_tolerance", Kind::Float, "1e-10", "allowed mismatch between a run and its body-swapped mirror"),
    REFERENCE_KEY,
];

struct Setup {
    mass: f64,
    radius: f64,
    g: f64,
    width: f64,
    separation: f64,
    extent: f64,
    points: usize,
}

impl Setup {
    fn from(cfg: &Config) -> Self {
        let (mass, radius, g) = (cfg.f64("mass"), cfg.f64("radius"), cfg.f64("g"));
        let width = cfg.f64("width");
        Self {
            mass,
            radius,
            g,
            width,
            separation: cfg.f64("separation_widths") * width,
            extent: cfg.f64("extent_widths") * width,
            points: cfg.usize("points"),
        }
    }

    fn dt(&self, cfg: &Config) -> f64 {
        // four cross pairs can overlap at the deepest point
        let vmax = 4.0 * 1.2 * self.g * self.mass * self.mass / self.radius;
        cfg.auto_f64("dt").unwrap_or(0.9 * dt_limit(vmax, self.points, self.extent, self.mass))
    }

    /// Body 1 (green X₁, red Y₁) at `c₁`, body 2 (X₂, Y₂) at `−c₁`.
    fn state(&self, grid: Grid, c1: f64) -> Result<MetaWavefunction> {
        let a = gaussian_packet(&grid, c1, self.width, 0.0)?;
        let b = gaussian_packet(&grid, -c1, self.width, 0.0)?;
        product_state(grid, &[a.clone(), b.clone(), a, b], vec![self.mass; 4])
    }
}

#[derive(Default)]
struct Track {
    t: Vec<f64>,
    x: Vec<[f64; 4]>,
    p: Vec<[f64; 4]>,
    force: Vec<f64>,
    total: Vec<f64>,
}

fn track(state: &mut MetaWavefunction, ham: &MetaHamiltonian, params: &EvolutionParams) -> Result<Track> {
    let mut tr = Track::default();
    split_step_evolve(state, ham, params, |_, t, s| {
        let obs = kinematics(s);
        tr.t.push(t);
        tr.x.push([obs.position[0], obs.position[1], obs.position[2], obs.position[3]]);
        tr.p.push([obs.momentum[0], obs.momentum[1], obs.momentum[2], obs.momentum[3]]);
        tr.total.push(obs.total_momentum);
        tr.force.push(ham.mean_force(s, 0)?);
        Ok(())
    })?;
    Ok(tr)
}

impl Scenario for Ehrenfest {
    fn name(&self) -> &'static str {
        "ehrenfest"
    }

    fn description(&self) -> &'static str {
        "two bodies with their partners on a 4D grid; d⟨P⟩/dt against the mean cross force"
    }

    fn keys(&self) -> &'static [KeySpec] {
        KEYS
    }

    fn validate(&self, cfg: &Config) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        positive(
            &mut issues,
            cfg,
            &["mass", "radius", "g", "width", "separation_widths", "extent_widths", "dt", "force_tolerance", "point_force_tolerance", "momentum_tolerance", "mirror_tolerance", "reference_mass_mp"],
        );
        let n = cfg.usize("points");
        require(&mut issues, cfg, (16..=64).contains(&n) && n.is_power_of_two(), "points", || {
            format!("a 4D grid needs a power of two in [16, 64], got {n}")
        });
        require(&mut issues, cfg, cfg.usize("steps") >= 3, "steps", || "central differences need at least 3 steps".into());
        if !issues.is_empty() {
            return issues;
        }
        let s = Setup::from(cfg);
        let dx = s.extent / n as f64;
        require(&mut issues, cfg, s.width > 2.0 * dx, "points", || {
            format!("spacing {dx:e} must be below width/2 = {:e}", s.width / 2.0)
        });
        require(&mut issues, cfg, s.separation / 2.0 + 4.0 * s.width < s.extent / 2.0, "extent_widths", || {
            "packets at ±separation/2 must sit 4 widths inside the box".into()
        });
        require(&mut issues, cfg, s.separation > 2.0 * s.radius, "separation_widths", || {
            format!("bodies must not overlap: D = {:e} ≤ 2R = {:e}", s.separation, 2.0 * s.radius)
        });
        require(&mut issues, cfg, s.separation + 6.0 * s.width <= s.extent / 2.0, "extent_widths", || {
            "D + 6 widths must stay within half the box so the partner is its own nearest image".into()
        });
        let (dt, bound) = (s.dt(cfg), dt_limit(4.8 * s.g * s.mass * s.mass / s.radius, n, s.extent, s.mass));
        require(&mut issues, cfg, dt <= bound, "dt", || format!("dt = {dt:e} exceeds the stability limit {bound:e}"));
        issues
    }

    fn run(&self, cfg: &Config) -> Result<ExperimentReport> {
        let mut report = ExperimentReport::new(self.name(), cfg.echo());
        let s = Setup::from(cfg);
        let grid = Grid::new(4, s.points, s.extent)?;
        let spec = PotentialSpec { mass: s.mass, radius: s.radius, g: s.g, softening: 0.0 };
        let ham = MetaHamiltonian::all_cross_pairs(vec![s.mass; 4], build_potential("sphere", &spec)?)?;
        let dt = s.dt(cfg);
        let params = EvolutionParams::real(dt, cfg.usize("steps"), 1);

        let c1 = -0.5 * s.separation;
        let mut psi = s.state(grid, c1)?;
        let tr = track(&mut psi, &ham, &params)?;
        let mut mirror = s.state(grid, -c1)?;
        let mr = track(&mut mirror, &ham, &params)?;
        report.steps = 2 * params.steps;

        let n = tr.t.len();
        let (mut worst, mut fmax) = (0.0f64, 0.0f64);
        let mut rate = Vec::with_capacity(n - 2);
        for i in 1..n - 1 {
            let d = (tr.p[i + 1][0] - tr.p[i - 1][0]) / (tr.t[i + 1] - tr.t[i - 1]);
            worst = worst.max((d - tr.force[i]).abs());
            fmax = fmax.max(tr.force[i].abs());
            rate.push(d);
        }
        report.check_below("ehrenfest_force_residual", worst / fmax, cfg.f64("force_tolerance"));
        let point = SpherePairPotential::new(s.mass, s.radius, s.g)?.force(s.separation)?.abs();
        let (lo, hi) = rate.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r / point), hi.max(r / point)));
        let tol = cfg.f64("point_force_tolerance");
        report.check_within("rate_over_point_force_min", lo, 1.0 - tol, 1.0 + tol);
        report.check_within("rate_over_point_force_max", hi, 1.0 - tol, 1.0 + tol);

        let drift = tr.total.iter().map(|p| (p - tr.total[0]).abs()).fold(0.0, f64::max);
        report.check_below("total_momentum_drift", drift, cfg.f64("momentum_tolerance"));
        let cm = tr.x.iter().map(|x| (x[0] + x[1]).abs()).fold(0.0, f64::max);
        report.check_below("green_centre_of_mass", cm / s.extent, 1e-10);
        let swap = |v: &[f64; 4]| [v[1], v[0], v[3], v[2]];
        let mismatch = tr
            .p
            .iter()
            .zip(&mr.p)
            .chain(tr.x.iter().zip(&mr.x))
            .flat_map(|(a, b)| a.iter().zip(swap(b)).map(|(u, v)| (u - v).abs()).collect::<Vec<_>>())
            .fold(0.0, f64::max);
        report.check_below("mirror_mismatch", mismatch, cfg.f64("mirror_tolerance"));

        report.fit("mean_force_over_point_force", tr.force[0] / point, 0.0, worst / fmax, [0.0, tr.t[n - 1]], "1");
        report.note(format!(
            "d⟨P₁⟩/dt is gated against the density-averaged cross force and against the point-sphere force at D = {1:e}; their ratio at t = 0 is {0:.4}, close to 1 + 3w²/D² for Gaussian packets",
            tr.force[0] / point,
            s.separation
        ));
        report.note(format!("grid {}⁴ over extent {:e}, dt = {dt:e}", s.points, s.extent));

        report.series.push(Series::new("momentum_x1", tr.t.clone(), tr.p.iter().map(|p| p[0]).collect()));
        report.series.push(Series::new("mean_force_x1", tr.t.clone(), tr.force.clone()));
        report.series.push(Series::new("momentum_rate_x1", tr.t[1..n - 1].to_vec(), rate));
        report.series.push(Series::new("position_x1", tr.t.clone(), tr.x.iter().map(|x| x[0]).collect()));
        report.series.push(Series::new("total_momentum", tr.t.clone(), tr.total.clone()));

        let (sc, _) = reference_scales(cfg)?;
        report.project("mean_force", tr.force[0], sc.force_to_cgs(tr.force[0]), "dyn");
        report.project("separation", s.separation, sc.length_to_cgs(s.separation), "cm");
        Ok(report)
    }
}
