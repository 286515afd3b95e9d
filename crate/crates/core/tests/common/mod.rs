#![allow(dead_code)]

use std::sync::Arc;

use metagrav::grid::{
    build_potential, gaussian_packet, kinematics, product_state, split_step_evolve, symmetrize, EvolutionParams, Grid,
    HarmonicPotential, MetaHamiltonian, MetaWavefunction, PotentialSpec, SoftenedCoulomb,
};
use metagrav::radial::RadialProblem;

pub fn evolve(mut psi: MetaWavefunction, ham: &MetaHamiltonian, t_end: f64, steps: usize) -> MetaWavefunction {
    split_step_evolve(&mut psi, ham, &EvolutionParams::real(t_end / steps as f64, steps, steps), |_, _, _| Ok(())).unwrap();
    psi
}

pub fn moving_pair(grid: Grid, w: f64) -> MetaWavefunction {
    let a = gaussian_packet(&grid, -1.0, w, 0.8).unwrap();
    let b = gaussian_packet(&grid, 1.5, w, -0.3).unwrap();
    product_state(grid, &[a, b], vec![1.0, 1.0]).unwrap()
}

pub fn sphere(mass: f64, radius: f64) -> MetaHamiltonian {
    let spec = PotentialSpec { mass, radius, g: 1.0, softening: 0.0 };
    MetaHamiltonian::all_cross_pairs(vec![mass; 2], build_potential("sphere", &spec).unwrap()).unwrap()
}

fn sphere_setup() -> (Grid, MetaHamiltonian, f64) {
    let grid = Grid::new(2, 128, 40.0).unwrap();
    let dt = 0.9 * 0.5 / (grid.k_max().powi(2) / 2.0);
    (grid, sphere(1.0, 2.0), dt)
}

/// Observed order from three runs at dt, dt/2, dt/4 under a smooth potential.
pub fn strang_order() -> f64 {
    let grid = Grid::new(2, 32, 16.0).unwrap();
    let ham = MetaHamiltonian::all_cross_pairs(vec![1.0; 2], Arc::new(HarmonicPotential { k: 0.05 })).unwrap();
    let psi = moving_pair(grid, 1.5);
    let runs: Vec<MetaWavefunction> = [50, 100, 200].iter().map(|&n| evolve(psi.clone(), &ham, 1.0, n)).collect();
    (runs[0].distance(&runs[1]) / runs[1].distance(&runs[2])).log2()
}

/// Largest |‖ψ‖ − 1| over 1000 steps under the sphere potential.
pub fn norm_drift_per_1e3() -> f64 {
    let (grid, ham, dt) = sphere_setup();
    let mut psi = moving_pair(grid, 1.5);
    split_step_evolve(&mut psi, &ham, &EvolutionParams::real(dt, 1000, 100), |_, _, _| Ok(())).unwrap().max_norm_drift
}

/// Largest exchange asymmetry of a symmetrized state over 1000 steps.
pub fn exchange_drift_per_1e3() -> f64 {
    let (grid, ham, dt) = sphere_setup();
    let mut psi = symmetrize(&moving_pair(grid, 1.5)).unwrap();
    let mut worst: f64 = 0.0;
    split_step_evolve(&mut psi, &ham, &EvolutionParams::real(dt, 1000, 50), |_, _, s| {
        worst = worst.max(s.exchange_asymmetry());
        Ok(())
    })
    .unwrap();
    worst
}

/// Largest drift of the total momentum of a symmetrized state over 400 steps.
pub fn symmetric_momentum_drift() -> f64 {
    let grid = Grid::new(2, 256, 40.0).unwrap();
    let ham = sphere(1.0, 2.0);
    let dt = 0.9 * 0.5 / (grid.k_max().powi(2) / 2.0);
    let mut psi = symmetrize(&moving_pair(grid, 1.5)).unwrap();
    let p0 = kinematics(&psi).total_momentum;
    let mut worst: f64 = 0.0;
    split_step_evolve(&mut psi, &ham, &EvolutionParams::real(dt, 400, 20), |_, _, s| {
        worst = worst.max((kinematics(s).total_momentum - p0).abs());
        Ok(())
    })
    .unwrap();
    worst
}

/// Orders between successive mesh doublings on the point-mass ground state.
pub fn numerov_orders() -> Vec<f64> {
    let errs: Vec<f64> = [1000, 2000, 4000]
        .iter()
        .map(|&n| {
            let p = RadialProblem {
                reduced_mass: 0.5,
                potential: Arc::new(SoftenedCoulomb { coupling: 1.0, softening: 0.0 }),
                r_max: 60.0,
                mesh_points: n,
            };
            (p.ground_state().unwrap().energy + 0.25).abs()
        })
        .collect();
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
