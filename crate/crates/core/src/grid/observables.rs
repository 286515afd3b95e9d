use rayon::prelude::*;
use serde::Serialize;

use super::fft::FftEngine;
use super::{Grid, MetaHamiltonian, MetaWavefunction, C64, REDUCE_CHUNK};
use crate::error::{domain, Result};

/// Expectation values of a normalized meta-wavefunction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observables {
    pub position: Vec<f64>,
    pub position_var: Vec<f64>,
    pub momentum: Vec<f64>,
    pub momentum_var: Vec<f64>,
    pub total_momentum: f64,
    pub energy: f64,
}

/// Per-axis marginal distributions of |a|², summed chunk by chunk in a fixed
/// order.
fn marginals(grid: &Grid, data: &[C64]) -> Vec<Vec<f64>> {
    let (dims, n) = (grid.dims(), grid.points());
    let partials: Vec<Vec<f64>> = data
        .par_chunks(REDUCE_CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut m = vec![0.0; dims * n];
            let mut idx = [0usize; 4];
            for (i, a) in chunk.iter().enumerate() {
                grid.unravel(c * REDUCE_CHUNK + i, &mut idx[..dims]);
                let p = a.norm_sqr();
                for ax in 0..dims {
                    m[ax * n + idx[ax]] += p;
                }
            }
            m
        })
        .collect();
    let mut total = vec![0.0; dims * n];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total.chunks(n).map(|c| c.to_vec()).collect()
}

fn moments(weights: &[f64], values: &[f64]) -> (f64, f64) {
    let norm: f64 = weights.iter().sum();
    let mean = weights.iter().zip(values).map(|(w, v)| w * v).sum::<f64>() / norm;
    let var = weights.iter().zip(values).map(|(w, v)| w * (v - mean).powi(2)).sum::<f64>() / norm;
    (mean, var)
}

/// Position and momentum moments without the energy, which needs the full
/// potential table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Kinematics {
    pub position: Vec<f64>,
    pub position_var: Vec<f64>,
    pub momentum: Vec<f64>,
    pub momentum_var: Vec<f64>,
    pub total_momentum: f64,
}

pub fn kinematics(state: &MetaWavefunction) -> Kinematics {
    let grid = state.grid();
    let xs = grid.coords();
    let ks = grid.wavenumbers();
    let (position, position_var) = marginals(grid, state.amplitudes()).iter().map(|m| moments(m, &xs)).unzip();
    let mut spec = state.amplitudes().to_vec();
    FftEngine::new(grid).forward(&mut spec);
    let (momentum, momentum_var): (Vec<f64>, Vec<f64>) =
        marginals(grid, &spec).iter().map(|m| moments(m, &ks)).unzip();
    let total_momentum = momentum.iter().sum();
    Kinematics { position, position_var, momentum, momentum_var, total_momentum }
}

pub fn observables(state: &MetaWavefunction, ham: &MetaHamiltonian) -> Result<Observables> {
    let k = kinematics(state);
    Ok(Observables {
        position: k.position,
        position_var: k.position_var,
        momentum: k.momentum,
        momentum_var: k.momentum_var,
        total_momentum: k.total_momentum,
        energy: ham.energy(state)?,
    })
}

/// Statistics of the nearest-image separation x_a − x_b.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSeparation {
    pub mean: f64,
    pub variance: f64,
    /// Probability of each separation, indexed like [`Grid::coords`] shifted to
    /// be centred on zero.
    pub distribution: Vec<f64>,
    pub separations: Vec<f64>,
}

pub fn pair_separation(state: &MetaWavefunction, a: usize, b: usize) -> Result<PairSeparation> {
    let grid = state.grid();
    let (dims, n) = (grid.dims(), grid.points());
    if a >= dims || b >= dims || a == b {
        return domain(format!("invalid axis pair ({a}, {b}) for {dims} coordinates"));
    }
    let partials: Vec<Vec<f64>> = state
        .amplitudes()
        .par_chunks(REDUCE_CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut h = vec![0.0; n];
            let mut idx = [0usize; 4];
            for (i, v) in chunk.iter().enumerate() {
                grid.unravel(c * REDUCE_CHUNK + i, &mut idx[..dims]);
                h[(idx[a] + n - idx[b]) % n] += v.norm_sqr();
            }
            h
        })
        .collect();
    let mut hist = vec![0.0; n];
    for p in partials {
        for (t, v) in hist.iter_mut().zip(p) {
            *t += v;
        }
    }
    // reorder from difference index to ascending separation
    let order: Vec<usize> = (0..n).map(|j| (j + n / 2) % n).collect();
    let separations: Vec<f64> = order.iter().map(|&j| grid.min_image_index(j, 0)).collect();
    let total: f64 = hist.iter().sum();
    let distribution: Vec<f64> = order.iter().map(|&j| hist[j] / total).collect();
    let (mean, variance) = moments(&distribution, &separations);
    Ok(PairSeparation { mean, variance, distribution, separations })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::super::potential::ZeroPotential;
    use super::super::{gaussian_packet, product_state};
    use super::*;

    #[test]
    fn packet_moments_and_symmetry() {
        let g = Grid::new(2, 256, 32.0).unwrap();
        let a = gaussian_packet(&g, -2.0, 1.0, 0.7).unwrap();
        let psi = product_state(g, &[a.clone(), a], vec![1.0; 2]).unwrap();
        let ham = MetaHamiltonian::all_cross_pairs(vec![1.0; 2], Arc::new(ZeroPotential)).unwrap();
        let o = observables(&psi, &ham).unwrap();
        assert!((o.momentum[0] - 0.7).abs() < 0.007);
        assert!((o.position_var[0] - 0.5).abs() < 0.005);
        assert!((o.position[0] + 2.0).abs() < 1e-10);
        assert!((o.position[0] - o.position[1]).abs() < 1e-14);
        assert!((o.momentum[0] - o.momentum[1]).abs() < 1e-14);
        assert!((o.total_momentum - 1.4).abs() < 0.014);
        // kinetic energy of two packets: 2·(p²/2 + 1/(4w²))
        assert!((o.energy - (0.49 + 0.5)).abs() < 1e-6, "{}", o.energy);
    }

    #[test]
    fn separation_of_displaced_product() {
        let g = Grid::new(2, 128, 32.0).unwrap();
        let a = gaussian_packet(&g, 3.0, 1.0, 0.0).unwrap();
        let b = gaussian_packet(&g, -1.0, 1.0, 0.0).unwrap();
        let psi = product_state(g, &[a, b], vec![1.0; 2]).unwrap();
        let s = pair_separation(&psi, 0, 1).unwrap();
        assert!((s.mean - 4.0).abs() < 1e-8);
        assert!((s.variance - 1.0).abs() < 1e-6);
        assert!(pair_separation(&psi, 0, 0).is_err());
    }
}
