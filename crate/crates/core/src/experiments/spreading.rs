use rustfft::FftPlanner;

use crate::config::{Config, KeySpec, Kind};
use crate::error::{domain, ConfigIssue, Result};
use crate::grid::{
    build_potential, gaussian_packet, product_state, split_step_evolve, EvolutionParams, Grid, MetaHamiltonian,
    PotentialSpec, C64,
};

use super::{dt_limit, grid_points, loglog_slope, positive, reference_scales, require, Cell, ExperimentReport, Scenario, Series, Table, REFERENCE_KEY};
use crate::analytic::{spreading_time, ordinary_density, BodySpec};

pub struct Spreading;

const KEYS: &[KeySpec] = &[
    KeySpec::new("masses", Kind::FloatList, "1,2,4", "body masses to scan (natural units)"),
    KeySpec::new("radius", Kind::Float, "1e4", "body radius (natural units)"),
    KeySpec::new("g", Kind::Float, "1", "gravitational coupling (natural units)"),
    KeySpec::new("points", Kind::Int, "64", "grid points per axis"),
    KeySpec::new("extent_widths", Kind::Float, "25", "grid extent in packet widths"),
    KeySpec::new("duration", Kind::Float, "4", "run length in free spreading times M w²"),
    KeySpec::new("samples", Kind::Int, "200", "envelope samples per mass"),
    KeySpec::new("dt_safety", Kind::Float, "0.9", "fraction of the stability limit used as dt"),
    KeySpec::new("threshold", Kind::Float, "0.9", "envelope level defining τ"),
    KeySpec::new("slope_tolerance", Kind::Float, "0.1", "allowed |slope − 1| of ln τ against ln MΛ²"),
    KeySpec::new("control", Kind::Bool, "true", "also run the G = 0 control"),
    KeySpec::new("control_tolerance", Kind::Float, "1e-4", "allowed |D − 1| in the control"),
    REFERENCE_KEY,
];

/// One interpenetrating branch `π(X, Y)` on an N × N grid and the green
/// packet `s(X)` of the separated branch on the same axis.
#[derive(Debug, Clone)]
pub struct BranchPair {
    pub points: usize,
    pub spacing: f64,
    /// Row-major, green index first.
    pub interpenetrating: Vec<C64>,
    pub separated: Vec<C64>,
}

/// Coherence envelope between the two branches,
/// `D = 2 ∫|s| ∫|g| / ∫∫|ρ|` with `g(X) = ∫ π(X, Y) s*(Y) dY` and the green
/// state `ρ = ∫ π π* dY + s s*`. Equals 1 when `π = s ⊗ s`.
pub fn branch_envelope(pair: &BranchPair) -> Result<f64> {
    let (n, dx) = (pair.points, pair.spacing);
    if pair.interpenetrating.len() != n * n || pair.separated.len() != n {
        return domain(format!("branch pair shapes do not match {n} points"));
    }
    let (pi, s) = (&pair.interpenetrating, &pair.separated);
    let row = |a: usize| &pi[a * n..(a + 1) * n];
    let g: Vec<C64> = (0..n).map(|a| row(a).iter().zip(s).map(|(p, q)| p * q.conj()).sum::<C64>() * dx).collect();
    let mut rho_abs = 0.0;
    for a in 0..n {
        for b in 0..n {
            let c: C64 = row(a).iter().zip(row(b)).map(|(p, q)| p * q.conj()).sum::<C64>() * dx;
            rho_abs += (c + s[a] * s[b].conj()).norm();
        }
    }
    if !(rho_abs > 0.0) {
        return domain("branch pair has an empty green state");
    }
    let s_abs: f64 = s.iter().map(|v| v.norm()).sum::<f64>() * dx;
    let g_abs: f64 = g.iter().map(|v| v.norm()).sum::<f64>() * dx;
    Ok(2.0 * s_abs * g_abs / (rho_abs * dx * dx))
}

/// Exact free evolution of a 1D packet.
struct FreePacket {
    s0: Vec<C64>,
    k2m: Vec<f64>,
}

impl FreePacket {
    fn new(grid: &Grid, s0: Vec<C64>, mass: f64) -> Self {
        let mut spec = s0;
        FftPlanner::new().plan_fft_forward(spec.len()).process(&mut spec);
        let k2m = grid.wavenumbers().iter().map(|k| k * k / (2.0 * mass)).collect();
        Self { s0: spec, k2m }
    }

    fn at(&self, t: f64) -> Vec<C64> {
        let n = self.s0.len();
        let mut v: Vec<C64> = self.s0.iter().zip(&self.k2m).map(|(a, e)| a * C64::from_polar(1.0, -e * t)).collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut v);
        v.iter_mut().for_each(|a| *a /= n as f64);
        v
    }
}

struct Run {
    width: f64,
    lambda: f64,
    spread_time: f64,
    tau: Option<f64>,
    steps: usize,
    dt: f64,
    t: Vec<f64>,
    envelope: Vec<f64>,
}

impl Spreading {
    fn widths(cfg: &Config, mass: f64) -> (f64, f64) {
        let (r, g) = (cfg.f64("radius"), cfg.f64("g"));
        let lambda = (r.powi(3) / (g * mass.powi(3))).powf(0.25);
        // exact relative width 2^(1/4) Λ, one coordinate carries 1/√2 of it
        (lambda, lambda * 2f64.powf(0.25) / 2f64.sqrt())
    }

    fn dt(cfg: &Config, mass: f64, g: f64) -> f64 {
        let (_, w) = Self::widths(cfg, mass);
        let vmax = 1.2 * g * mass * mass / cfg.f64("radius");
        cfg.f64("dt_safety") * dt_limit(vmax, cfg.usize("points"), cfg.f64("extent_widths") * w, mass)
    }

    fn run_mass(cfg: &Config, mass: f64, g: f64) -> Result<Run> {
        let (lambda, w) = Self::widths(cfg, mass);
        let n = cfg.usize("points");
        let grid = Grid::new(2, n, cfg.f64("extent_widths") * w)?;
        let spec = PotentialSpec { mass, radius: cfg.f64("radius"), g, softening: 0.0 };
        let ham = MetaHamiltonian::all_cross_pairs(vec![mass; 2], build_potential("sphere", &spec)?)?;
        let a = gaussian_packet(&grid, 0.0, w, 0.0)?;
        let mut pi = product_state(grid, &[a.clone(), a.clone()], vec![mass; 2])?;
        let free = FreePacket::new(&grid, a, mass);

        let spread_time = mass * w * w;
        // the control keeps the coupled time step
        let dt = Self::dt(cfg, mass, cfg.f64("g"));
        let steps = (cfg.f64("duration") * spread_time / dt).ceil() as usize;
        let every = (steps / cfg.usize("samples")).max(1);
        let threshold = cfg.f64("threshold");
        let (mut t, mut envelope) = (Vec::new(), Vec::new());
        let mut tau = None;
        let params = EvolutionParams::real(dt, steps, every);
        split_step_evolve(&mut pi, &ham, &params, |_, time, state| {
            let pair = BranchPair {
                points: n,
                spacing: grid.spacing(),
                interpenetrating: state.amplitudes().to_vec(),
                separated: free.at(time),
            };
            let d = branch_envelope(&pair)?;
            if tau.is_none() && d < threshold {
                if let (Some(&t0), Some(&d0)) = (t.last(), envelope.last()) {
                    let d0: f64 = d0;
                    tau = Some(t0 + (d0 - threshold) / (d0 - d) * (time - t0));
                }
            }
            t.push(time);
            envelope.push(d);
            Ok(())
        })?;
        Ok(Run { width: w, lambda, spread_time, tau, steps, dt, t, envelope })
    }
}

impl Scenario for Spreading {
    fn name(&self) -> &'static str {
        "spread"
    }

    fn description(&self) -> &'static str {
        "interpenetrating branch under the sphere potential against a freely spreading separated branch; τ against MΛ²"
    }

    fn keys(&self) -> &'static [KeySpec] {
        KEYS
    }

    fn validate(&self, cfg: &Config) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        positive(
            &mut issues,
            cfg,
            &["radius", "g", "extent_widths", "duration", "dt_safety", "threshold", "slope_tolerance", "control_tolerance", "reference_mass_mp"],
        );
        grid_points(&mut issues, cfg, "points", 256);
        let masses = cfg.list("masses");
        require(&mut issues, cfg, masses.len() >= 2 && masses.iter().all(|m| *m > 0.0), "masses", || {
            "need at least two positive masses for the scaling fit".into()
        });
        let mut sorted = masses.to_vec();
        sorted.sort_by(f64::total_cmp);
        require(&mut issues, cfg, sorted.windows(2).all(|w| w[1] > w[0]), "masses", || "masses must be distinct".into());
        require(&mut issues, cfg, cfg.f64("dt_safety") <= 1.0, "dt_safety", || "must not exceed 1".into());
        require(&mut issues, cfg, cfg.f64("threshold") < 1.0, "threshold", || "must lie below 1".into());
        require(&mut issues, cfg, cfg.f64("extent_widths") >= 16.0, "extent_widths", || {
            "packets need at least 16 widths of room".into()
        });
        require(&mut issues, cfg, cfg.usize("samples") >= 16, "samples", || "need at least 16 samples".into());
        if !issues.is_empty() {
            return issues;
        }
        let r = cfg.f64("radius");
        for &m in masses {
            let (lambda, w) = Self::widths(cfg, m);
            require(&mut issues, cfg, lambda <= 0.3 * r, "radius", || {
                format!("plasma regime violated for mass {m}: Λ = {lambda:e} > 0.3 R")
            });
            let dx = cfg.f64("extent_widths") * w / cfg.usize("points") as f64;
            require(&mut issues, cfg, w > 2.0 * dx, "points", || format!("spacing {dx:e} does not resolve width {w:e}"));
        }
        issues
    }

    fn run(&self, cfg: &Config) -> Result<ExperimentReport> {
        let mut report = ExperimentReport::new(self.name(), cfg.echo());
        let threshold = cfg.f64("threshold");
        let mut rows = Vec::new();
        let (mut scale, mut taus) = (Vec::new(), Vec::new());
        for &m in cfg.list("masses") {
            let run = Self::run_mass(cfg, m, cfg.f64("g"))?;
            report.steps += run.steps;
            let ml2 = m * run.lambda * run.lambda;
            let tau = run.tau.unwrap_or(f64::NAN);
            rows.push(vec![
                Cell::Num(m),
                Cell::Num(run.lambda),
                Cell::Num(run.width),
                Cell::Num(run.spread_time),
                Cell::Num(tau),
                Cell::Num(tau / run.spread_time),
                Cell::Num(tau / ml2),
                Cell::Num(run.dt),
                Cell::Num(run.steps as f64),
            ]);
            let last = *run.envelope.last().unwrap_or(&f64::NAN);
            report.check_within(&format!("initial_envelope_m{m}"), run.envelope[0], 1.0 - 1e-12, 1.0 + 1e-12);
            report.check_below(&format!("envelope_crossed_m{m}"), last, threshold);
            report.series.push(Series::new(format!("envelope_m{m}"), run.t, run.envelope));
            if run.tau.is_some() {
                scale.push(ml2);
                taus.push(tau);
            }
        }
        report.tables.push(Table {
            name: "spreading".into(),
            columns: ["mass", "lambda", "width", "spread_time", "tau", "tau_over_spread_time", "tau_over_m_lambda2", "dt", "steps"]
                .map(String::from)
                .to_vec(),
            rows,
        });

        let tol = cfg.f64("slope_tolerance");
        if taus.len() >= 2 {
            let (slope, rms) = loglog_slope(&scale, &taus)?;
            let lo = scale.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = scale.iter().cloned().fold(0.0, f64::max);
            report.fit("tau_slope", slope, 0.0, rms, [lo, hi], "1");
            report.check_within("tau_slope", slope, 1.0 - tol, 1.0 + tol);
        } else {
            report.check_above("masses_with_crossing", taus.len() as f64, 2.0);
        }
        let coeffs: Vec<f64> = taus.iter().zip(&scale).map(|(t, s)| t / s).collect();
        let mean = coeffs.iter().sum::<f64>() / coeffs.len().max(1) as f64;
        report.fit("tau_over_m_lambda2", mean, 0.0, 0.0, [0.0, 0.0], "1");

        if cfg.bool("control") {
            let m = cfg.list("masses")[0];
            let run = Self::run_mass(cfg, m, 0.0)?;
            report.steps += run.steps;
            let worst = run.envelope.iter().map(|d| (d - 1.0).abs()).fold(0.0, f64::max);
            report.check_below("control_envelope_deviation", worst, cfg.f64("control_tolerance"));
            report.series.push(Series::new("control_envelope", run.t, run.envelope));
        }

        let (sc, k) = reference_scales(cfg)?;
        let body = BodySpec::with_density(sc.mass_to_cgs(1.0), ordinary_density(&k))?;
        let lam = crate::analytic::localization_length(&body, 1.0, &k)?;
        let ml2_cgs = body.mass() * lam * lam / k.hbar;
        report.project("tau_ordinary_density", mean, mean * ml2_cgs, "s");
        report.note(format!(
            "τ is where the envelope first drops below {threshold}; the envelope decays algebraically, so the level is not 1/e"
        ));
        report.note(format!(
            "CGS projection: τ = {mean:.4} MΛ²/ħ at ordinary density is {:e} s against the closed-form {:e} s",
            mean * ml2_cgs,
            spreading_time(&body, 1.0, &k)?
        ));
        report.note("the separated branch spreads freely: its mutual attraction is weaker than the sphere depth by the ratio of R to the separation");
        Ok(report)
    }
}
