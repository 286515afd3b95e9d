//! Strang split-step propagation in real and imaginary time.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::fft::FftEngine;
use super::potential::CrossPotential;
use super::{det_sum, Grid, MetaWavefunction, C64};
use crate::error::{domain, Error, Result};

/// Kinetic terms per coordinate plus green–red pair interactions.
#[derive(Debug, Clone)]
pub struct MetaHamiltonian {
    masses: Vec<f64>,
    potential: Arc<dyn CrossPotential>,
    pairs: Vec<(usize, usize)>,
}

impl MetaHamiltonian {
    /// `pairs` lists (green axis, red axis) couples; anything else is rejected.
    pub fn new(masses: Vec<f64>, potential: Arc<dyn CrossPotential>, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let dims = masses.len();
        if dims != 2 && dims != 4 {
            return domain(format!("need 2 or 4 coordinates, got {dims}"));
        }
        if let Some(m) = masses.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return domain(format!("masses must be positive, got {m}"));
        }
        let half = dims / 2;
        for &(g, r) in &pairs {
            if g >= half || r < half || r >= dims {
                return domain(format!(
                    "pair ({g}, {r}) is not green–red: green axes are 0..{half}, red axes {half}..{dims}"
                ));
            }
        }
        Ok(Self { masses, potential, pairs })
    }

    /// Every green coordinate coupled to every red coordinate.
    pub fn all_cross_pairs(masses: Vec<f64>, potential: Arc<dyn CrossPotential>) -> Result<Self> {
        let half = masses.len() / 2;
        let pairs = (0..half).flat_map(|g| (half..2 * half).map(move |r| (g, r))).collect();
        Self::new(masses, potential, pairs)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn potential(&self) -> &Arc<dyn CrossPotential> {
        &self.potential
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.dims() != self.masses.len() {
            return domain(format!("hamiltonian has {} coordinates, grid has {}", self.masses.len(), grid.dims()));
        }
        Ok(())
    }

    /// U and dU/dd tabulated by index difference (a − b) mod N under the
    /// nearest-image convention.
    fn difference_tables(&self, grid: &Grid) -> (Vec<f64>, Vec<f64>) {
        (0..grid.points())
            .map(|j| {
                let d = grid.min_image_index(j, 0);
                let u = self.potential.energy(d.abs());
                (u, self.potential.slope(d.abs()) * d.signum())
            })
            .unzip()
    }

    /// Full potential energy on every grid point.
    pub fn potential_table(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.check_grid(grid)?;
        let (u, _) = self.difference_tables(grid);
        let n = grid.points();
        Ok((0..grid.len())
            .into_par_iter()
            .map_init(
                || vec![0usize; grid.dims()],
                |idx, i| {
                    grid.unravel(i, idx);
                    self.pairs.iter().map(|&(g, r)| u[(idx[g] + n - idx[r]) % n]).sum()
                },
            )
            .collect())
    }

    /// Σ_i k_i²/(2 m_i) in FFT order.
    pub(crate) fn kinetic_table(&self, grid: &Grid) -> Vec<f64> {
        let k2: Vec<f64> = grid.wavenumbers().iter().map(|k| k * k).collect();
        let masses = &self.masses;
        (0..grid.len())
            .into_par_iter()
            .map_init(
                || vec![0usize; grid.dims()],
                |idx, i| {
                    grid.unravel(i, idx);
                    idx.iter().zip(masses).map(|(&j, m)| k2[j] / (2.0 * m)).sum()
                },
            )
            .collect()
    }

    /// ⟨H⟩ for the normalized version of `state`.
    pub fn energy(&self, state: &MetaWavefunction) -> Result<f64> {
        let (kin, pot) = self.energy_parts(state)?;
        Ok(kin + pot)
    }

    /// (⟨T⟩, ⟨V⟩) for the normalized version of `state`.
    pub fn energy_parts(&self, state: &MetaWavefunction) -> Result<(f64, f64)> {
        let grid = state.grid();
        self.check_grid(grid)?;
        let v = self.potential_table(grid)?;
        let t = self.kinetic_table(grid);
        let psi = state.amplitudes();
        let norm = det_sum(psi, |_, a| a.norm_sqr());
        if !(norm > 0.0) {
            return Err(Error::Degenerate("energy of a zero state".into()));
        }
        let pot = det_sum(psi, |i, a| a.norm_sqr() * v[i]) / norm;
        let mut spec = psi.to_vec();
        FftEngine::new(grid).forward(&mut spec);
        let knorm = det_sum(&spec, |_, a| a.norm_sqr());
        let kin = det_sum(&spec, |i, a| a.norm_sqr() * t[i]) / knorm;
        Ok((kin, pot))
    }

    /// ⟨−∂V/∂x_axis⟩, the mean force on one coordinate.
    pub fn mean_force(&self, state: &MetaWavefunction, axis: usize) -> Result<f64> {
        let grid = state.grid();
        self.check_grid(grid)?;
        if axis >= grid.dims() {
            return domain(format!("axis {axis} out of range"));
        }
        let (_, du) = self.difference_tables(grid);
        let n = grid.points();
        let terms: Vec<(usize, usize, f64)> = self
            .pairs
            .iter()
            .filter_map(|&(g, r)| match axis {
                a if a == g => Some((g, r, 1.0)),
                a if a == r => Some((g, r, -1.0)),
                _ => None,
            })
            .collect();
        let psi = state.amplitudes();
        let norm = det_sum(psi, |_, a| a.norm_sqr());
        let f = det_sum(psi, |i, a| {
            let mut idx = [0usize; 4];
            grid.unravel(i, &mut idx[..grid.dims()]);
            let grad: f64 = terms.iter().map(|&(g, r, s)| s * du[(idx[g] + n - idx[r]) % n]).sum();
            -a.norm_sqr() * grad
        });
        Ok(f / norm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    RealTime,
    ImaginaryTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolutionParams {
    pub dt: f64,
    pub steps: usize,
    pub mode: Mode,
    /// Imaginary time only.
    pub renormalize_every: usize,
    /// The observer sees the state at step 0, every `sample_every` steps and
    /// at the last step.
    pub sample_every: usize,
}

impl EvolutionParams {
    pub fn real(dt: f64, steps: usize, sample_every: usize) -> Self {
        Self { dt, steps, mode: Mode::RealTime, renormalize_every: 1, sample_every }
    }

    pub fn imaginary(dt: f64, steps: usize, renormalize_every: usize) -> Self {
        Self { dt, steps, mode: Mode::ImaginaryTime, renormalize_every, sample_every: steps.max(1) }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return domain(format!("dt must be positive, got {}", self.dt));
        }
        if self.steps == 0 || self.sample_every == 0 || self.renormalize_every == 0 {
            return domain("steps, sample_every and renormalize_every must be ≥ 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionSummary {
    pub steps: usize,
    pub final_time: f64,
    /// Largest |‖ψ‖ − 1| seen at a sample (real time).
    pub max_norm_drift: f64,
}

/// Product of dt with the potential and kinetic bounds; both must stay within
/// the documented limits (0.1 and 0.5) for real-time runs.
pub fn stability_bound(grid: &Grid, ham: &MetaHamiltonian, dt: f64) -> Result<(f64, f64)> {
    let v = ham.potential_table(grid)?;
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let m_min = ham.masses().iter().cloned().fold(f64::INFINITY, f64::min);
    let kin = grid.k_max().powi(2) / (2.0 * m_min);
    let (pv, pk) = (dt * vmax, dt * kin);
    if pv > 0.1 {
        return domain(format!("dt = {dt} violates dt·max|V| ≤ 0.1 (max|V| = {vmax:e}, dt ≤ {:e})", 0.1 / vmax));
    }
    if pk > 0.5 {
        return domain(format!("dt = {dt} violates dt·k_max²/(2m) ≤ 0.5 (dt ≤ {:e})", 0.5 / kin));
    }
    Ok((pv, pk))
}

struct Propagator {
    engine: FftEngine,
    half_kin: Vec<C64>,
    full_kin: Vec<C64>,
    pot: Vec<C64>,
}

impl Propagator {
    fn new(grid: &Grid, ham: &MetaHamiltonian, dt: f64, mode: Mode) -> Result<Self> {
        let t = ham.kinetic_table(grid);
        let v = ham.potential_table(grid)?;
        let factor = |e: f64, tau: f64| match mode {
            Mode::RealTime => C64::from_polar(1.0, -e * tau),
            Mode::ImaginaryTime => C64::new((-e * tau).exp(), 0.0),
        };
        Ok(Self {
            engine: FftEngine::new(grid),
            half_kin: t.par_iter().map(|&e| factor(e, 0.5 * dt)).collect(),
            full_kin: t.par_iter().map(|&e| factor(e, dt)).collect(),
            pot: v.par_iter().map(|&e| factor(e, dt)).collect(),
        })
    }

    fn kinetic(&self, psi: &mut [C64], full: bool) {
        let f = if full { &self.full_kin } else { &self.half_kin };
        self.engine.forward(psi);
        psi.par_iter_mut().zip(f.par_iter()).for_each(|(a, b)| *a *= b);
        self.engine.inverse(psi);
    }

    fn potential(&self, psi: &mut [C64]) {
        psi.par_iter_mut().zip(self.pot.par_iter()).for_each(|(a, b)| *a *= b);
    }
}

/// Advances `state` in place. Adjacent half kinetic steps are fused except
/// where the observer or a renormalization needs the completed state.
pub fn split_step_evolve<F>(
    state: &mut MetaWavefunction,
    ham: &MetaHamiltonian,
    params: &EvolutionParams,
    mut observe: F,
) -> Result<EvolutionSummary>
where
    F: FnMut(usize, f64, &MetaWavefunction) -> Result<()>,
{
    params.validate()?;
    let grid = *state.grid();
    if state.masses() != ham.masses() {
        return domain("state masses differ from hamiltonian masses");
    }
    if params.mode == Mode::RealTime {
        stability_bound(&grid, ham, params.dt)?;
    }
    let prop = Propagator::new(&grid, ham, params.dt, params.mode)?;
    let n0 = state.norm();
    let mut max_drift = (n0 - 1.0).abs();
    observe(0, 0.0, state)?;
    let mut pending = false;
    for step in 1..=params.steps {
        prop.kinetic(state.amplitudes_mut(), pending);
        prop.potential(state.amplitudes_mut());
        pending = true;
        let sample = step % params.sample_every == 0 || step == params.steps;
        let renorm = params.mode == Mode::ImaginaryTime && step % params.renormalize_every == 0;
        if sample || renorm {
            prop.kinetic(state.amplitudes_mut(), false);
            pending = false;
            if params.mode == Mode::ImaginaryTime {
                state.normalize()?;
            }
        }
        if sample {
            if params.mode == Mode::RealTime {
                let norm = state.norm();
                if !norm.is_finite() || (norm - n0).abs() > 1e-4 {
                    return Err(Error::Unstable {
                        step,
                        detail: format!("norm drifted from {n0} to {norm}"),
                    });
                }
                max_drift = max_drift.max((norm - 1.0).abs());
            }
            observe(step, step as f64 * params.dt, state)?;
        }
    }
    Ok(EvolutionSummary { steps: params.steps, final_time: params.steps as f64 * params.dt, max_norm_drift: max_drift })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundStateParams {
    pub dt: f64,
    pub max_steps: usize,
    /// Steps between energy evaluations (and renormalizations).
    pub check_every: usize,
    /// Converged once the relative energy change per step drops below this.
    pub tolerance: f64,
}

impl Default for GroundStateParams {
    fn default() -> Self {
        Self { dt: 0.01, max_steps: 200_000, check_every: 50, tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: MetaWavefunction,
    pub energy: f64,
    pub steps: usize,
    pub residual: f64,
    /// (step, energy) at every check.
    pub history: Vec<(usize, f64)>,
}

pub fn ground_state_imaginary_time(
    ham: &MetaHamiltonian,
    seed: MetaWavefunction,
    params: &GroundStateParams,
) -> Result<GroundState> {
    if !(params.tolerance > 0.0) || params.check_every == 0 || params.max_steps == 0 {
        return domain("ground state needs tolerance > 0, check_every ≥ 1, max_steps ≥ 1");
    }
    let mut state = seed;
    state.normalize()?;
    let mut energy = ham.energy(&state)?;
    let mut history = vec![(0, energy)];
    let mut steps = 0;
    let mut residual = f64::INFINITY;
    let chunk = EvolutionParams::imaginary(params.dt, params.check_every, params.check_every);
    while steps < params.max_steps {
        split_step_evolve(&mut state, ham, &chunk, |_, _, _| Ok(()))?;
        steps += params.check_every;
        let e = ham.energy(&state)?;
        if !e.is_finite() {
            return Err(Error::Unstable { step: steps, detail: "energy became non-finite".into() });
        }
        residual = ((e - energy) / e).abs() / params.check_every as f64;
        energy = e;
        history.push((steps, e));
        if residual < params.tolerance {
            return Ok(GroundState { state, energy, steps, residual, history });
        }
    }
    Err(Error::NotConverged { steps, residual })
}
