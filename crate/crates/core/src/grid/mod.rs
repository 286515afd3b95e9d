//! Uniform periodic position grids and meta-wavefunctions on them.
//!
//! A grid has either two coordinates (green `X`, red `Y`) or four
//! (`X₁, X₂, Y₁, Y₂`). The first half of the axes are green, the second half
//! red. Amplitudes are stored row-major, normalized so that
//! `Σ |ψ|² · dxᵈ = 1`.

mod checkpoint;
mod evolve;
mod fft;
mod observables;
mod potential;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use evolve::{
    ground_state_imaginary_time, split_step_evolve, stability_bound, EvolutionParams, EvolutionSummary,
    GroundState, GroundStateParams, MetaHamiltonian, Mode,
};
pub use observables::{kinematics, observables, pair_separation, Kinematics, Observables, PairSeparation};
pub use potential::{build_potential, potential_names, CrossPotential, HarmonicPotential, PotentialSpec, SoftenedCoulomb, ZeroPotential};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};

pub type C64 = Complex64;

/// Chunk length for deterministic parallel reductions.
pub(crate) const REDUCE_CHUNK: usize = 1 << 12;

/// Sum of `f` over `data` with a fixed association order, so that results do
/// not depend on the thread count.
pub(crate) fn det_sum<T: Sync>(data: &[T], f: impl Fn(usize, &T) -> f64 + Sync) -> f64 {
    data.par_chunks(REDUCE_CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let base = c * REDUCE_CHUNK;
            chunk.iter().enumerate().map(|(i, v)| f(base + i, v)).sum::<f64>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dims: usize,
    points: usize,
    extent: f64,
}

impl Grid {
    pub fn new(dims: usize, points: usize, extent: f64) -> Result<Self> {
        if dims != 2 && dims != 4 {
            return domain(format!("grid must have 2 or 4 coordinates, got {dims}"));
        }
        if points < 16 || !points.is_power_of_two() {
            return domain(format!("points per axis must be a power of two ≥ 16, got {points}"));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return domain(format!("extent must be positive, got {extent}"));
        }
        Ok(Self { dims, points, extent })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.points as f64
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element dxᵈ.
    pub fn measure(&self) -> f64 {
        self.spacing().powi(self.dims as i32)
    }

    pub fn green_axes(&self) -> std::ops::Range<usize> {
        0..self.dims / 2
    }

    pub fn red_axes(&self) -> std::ops::Range<usize> {
        self.dims / 2..self.dims
    }

    /// Axis coordinates `x_j = −L/2 + j·dx`.
    pub fn coords(&self) -> Vec<f64> {
        let dx = self.spacing();
        (0..self.points).map(|j| -0.5 * self.extent + j as f64 * dx).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.points as i64;
        let dk = 2.0 * std::f64::consts::PI / self.extent;
        (0..n)
            .map(|j| if j < n / 2 { j as f64 * dk } else { (j - n) as f64 * dk })
            .collect()
    }

    pub fn k_max(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }

    /// Separation between two axis indices, folded to the nearest periodic image.
    pub fn min_image_index(&self, a: usize, b: usize) -> f64 {
        let n = self.points as i64;
        let mut d = (a as i64 - b as i64).rem_euclid(n);
        if d >= n / 2 {
            d -= n;
        }
        d as f64 * self.spacing()
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dims];
        for ax in (0..self.dims - 1).rev() {
            s[ax] = s[ax + 1] * self.points;
        }
        s
    }

    pub(crate) fn unravel(&self, mut idx: usize, out: &mut [usize]) {
        for ax in (0..self.dims).rev() {
            out[ax] = idx % self.points;
            idx /= self.points;
        }
    }
}

/// Complex amplitude field on a [`Grid`] with one kinetic mass per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaWavefunction {
    grid: Grid,
    amps: Vec<C64>,
    masses: Vec<f64>,
}

impl MetaWavefunction {
    pub fn from_amplitudes(grid: Grid, amps: Vec<C64>, masses: Vec<f64>) -> Result<Self> {
        if amps.len() != grid.len() {
            return domain(format!("expected {} amplitudes, got {}", grid.len(), amps.len()));
        }
        check_masses(&grid, &masses)?;
        Ok(Self { grid, amps, masses })
    }

    /// Fills the grid from a function of the coordinate vector.
    pub fn from_fn(grid: Grid, masses: Vec<f64>, f: impl Fn(&[f64]) -> C64 + Sync) -> Result<Self> {
        check_masses(&grid, &masses)?;
        let xs = grid.coords();
        let amps = (0..grid.len())
            .into_par_iter()
            .map_init(
                || (vec![0usize; grid.dims()], vec![0.0; grid.dims()]),
                |(idx, x), i| {
                    grid.unravel(i, idx);
                    for (xa, &ia) in x.iter_mut().zip(idx.iter()) {
                        *xa = xs[ia];
                    }
                    f(x)
                },
            )
            .collect();
        Ok(Self { grid, amps, masses })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn norm_sq(&self) -> f64 {
        det_sum(&self.amps, |_, a| a.norm_sqr()) * self.grid.measure()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Degenerate(format!("cannot normalize state with norm {n}")));
        }
        let inv = 1.0 / n;
        self.amps.par_iter_mut().for_each(|a| *a *= inv);
        Ok(n)
    }

    /// ⟨self|other⟩ with the grid measure.
    pub fn inner(&self, other: &MetaWavefunction) -> C64 {
        let re = det_sum(&self.amps, |i, a| (a.conj() * other.amps[i]).re);
        let im = det_sum(&self.amps, |i, a| (a.conj() * other.amps[i]).im);
        C64::new(re, im) * self.grid.measure()
    }

    /// L2 distance under the grid measure.
    pub fn distance(&self, other: &MetaWavefunction) -> f64 {
        (det_sum(&self.amps, |i, a| (a - other.amps[i]).norm_sqr()) * self.grid.measure()).sqrt()
    }

    /// The state with green and red coordinates exchanged.
    pub fn exchanged(&self) -> MetaWavefunction {
        let g = self.grid;
        let half = g.dims() / 2;
        let strides = g.strides();
        let amps = (0..g.len())
            .into_par_iter()
            .map_init(
                || vec![0usize; g.dims()],
                |idx, i| {
                    g.unravel(i, idx);
                    let mut src = 0;
                    for ax in 0..g.dims() {
                        let from = (ax + half) % g.dims();
                        src += idx[from] * strides[ax];
                    }
                    self.amps[src]
                },
            )
            .collect();
        let mut masses = self.masses.clone();
        masses.rotate_left(half);
        MetaWavefunction { grid: g, amps, masses }
    }

    /// L2 distance between the state and its green/red exchange.
    pub fn exchange_asymmetry(&self) -> f64 {
        self.distance(&self.exchanged())
    }
}

fn check_masses(grid: &Grid, masses: &[f64]) -> Result<()> {
    if masses.len() != grid.dims() {
        return domain(format!("need {} masses, got {}", grid.dims(), masses.len()));
    }
    if let Some(m) = masses.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
        return domain(format!("masses must be positive, got {m}"));
    }
    Ok(())
}

/// Normalized 1D Gaussian `exp(−(x−c)²/(2w²) + i p x)` sampled on one axis.
pub fn gaussian_packet(grid: &Grid, center: f64, width: f64, momentum: f64) -> Result<Vec<C64>> {
    let dx = grid.spacing();
    if !(width > 2.0 * dx) {
        return domain(format!("packet width {width} must exceed twice the spacing {dx}"));
    }
    if center.abs() + 4.0 * width >= 0.5 * grid.extent() {
        return domain(format!(
            "packet at {center} with width {width} does not fit in [−{h}, {h})",
            h = 0.5 * grid.extent()
        ));
    }
    let mut v: Vec<C64> = grid
        .coords()
        .iter()
        .map(|&x| {
            let u = (x - center) / width;
            C64::from_polar((-0.5 * u * u).exp(), momentum * x)
        })
        .collect();
    normalize_1d(&mut v, dx)?;
    Ok(v)
}

pub(crate) fn normalize_1d(v: &mut [C64], dx: f64) -> Result<()> {
    let n = (v.iter().map(|a| a.norm_sqr()).sum::<f64>() * dx).sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Degenerate("zero-norm 1D factor".into()));
    }
    v.iter_mut().for_each(|a| *a /= n);
    Ok(())
}

/// Outer product of one normalized factor per coordinate.
pub fn product_state(grid: Grid, factors: &[Vec<C64>], masses: Vec<f64>) -> Result<MetaWavefunction> {
    if factors.len() != grid.dims() {
        return domain(format!("need {} factors, got {}", grid.dims(), factors.len()));
    }
    if let Some(f) = factors.iter().find(|f| f.len() != grid.points()) {
        return domain(format!("factor length {} does not match {} grid points", f.len(), grid.points()));
    }
    check_masses(&grid, &masses)?;
    let amps = (0..grid.len())
        .into_par_iter()
        .map_init(
            || vec![0usize; grid.dims()],
            |idx, i| {
                grid.unravel(i, idx);
                idx.iter().zip(factors).fold(C64::new(1.0, 0.0), |acc, (&j, f)| acc * f[j])
            },
        )
        .collect();
    let mut psi = MetaWavefunction { grid, amps, masses };
    psi.normalize()?;
    Ok(psi)
}

/// Projects onto the exchange-symmetric subspace and renormalizes.
pub fn symmetrize(state: &MetaWavefunction) -> Result<MetaWavefunction> {
    let swapped = state.exchanged();
    let amps: Vec<C64> = state
        .amps
        .par_iter()
        .zip(swapped.amps.par_iter())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let mut out = MetaWavefunction { grid: state.grid, amps, masses: state.masses.clone() };
    let before = state.norm();
    let after = out.norm();
    if !(after > 1e-12 * before) {
        return Err(Error::Degenerate("state is exchange-antisymmetric; symmetric projection vanishes".into()));
    }
    out.normalize()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(n: usize, l: f64) -> Grid {
        Grid::new(2, n, l).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(3, 32, 1.0).is_err());
        assert!(Grid::new(2, 8, 1.0).is_err());
        assert!(Grid::new(2, 48, 1.0).is_err());
        assert!(Grid::new(2, 32, 0.0).is_err());
        let g = grid2(32, 8.0);
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.coords()[0], -4.0);
        assert_eq!(g.wavenumbers()[16], -std::f64::consts::PI / 0.25);
        assert_eq!(g.min_image_index(31, 0), -0.25);
        assert_eq!(g.min_image_index(0, 31), 0.25);
    }

    #[test]
    fn packet_moments() {
        let g = grid2(256, 32.0);
        let p = gaussian_packet(&g, 0.0, 1.0, 0.0).unwrap();
        let dx = g.spacing();
        let xs = g.coords();
        let norm: f64 = p.iter().map(|a| a.norm_sqr()).sum::<f64>() * dx;
        assert!((norm - 1.0).abs() < 1e-12);
        let var: f64 = p.iter().zip(&xs).map(|(a, x)| a.norm_sqr() * x * x).sum::<f64>() * dx;
        assert!((var - 0.5).abs() < 0.005);
    }

    #[test]
    fn packet_guards() {
        let g = grid2(256, 32.0);
        assert!(gaussian_packet(&g, 0.0, 0.2, 0.0).is_err());
        assert!(gaussian_packet(&g, 14.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn product_symmetry() {
        let g = grid2(64, 16.0);
        let a = gaussian_packet(&g, -1.0, 1.0, 0.0).unwrap();
        let b = gaussian_packet(&g, 1.5, 1.2, 0.3).unwrap();
        let same = product_state(g, &[a.clone(), a.clone()], vec![1.0; 2]).unwrap();
        assert!(same.exchange_asymmetry() < 1e-14);
        assert!((same.norm() - 1.0).abs() < 1e-12);
        let mixed = product_state(g, &[a.clone(), b.clone()], vec![1.0; 2]).unwrap();
        assert!(mixed.exchange_asymmetry() > 0.1);
        let s = symmetrize(&mixed).unwrap();
        assert!(s.exchange_asymmetry() < 1e-14);
        assert!(s.distance(&mixed) > 1e-3);
        // amplitudes ∝ a(x)b(y) + a(y)b(x)
        let n = g.points();
        let ratio = s.amplitudes()[3 * n + 20] / (a[3] * b[20] + a[20] * b[3]);
        let ratio2 = s.amplitudes()[10 * n + 12] / (a[10] * b[12] + a[12] * b[10]);
        assert!((ratio - ratio2).norm() < 1e-10 * ratio.norm());
        let twice = symmetrize(&s).unwrap();
        assert!(twice.distance(&s) < 1e-12);
    }

    #[test]
    fn antisymmetric_input_is_degenerate() {
        let g = grid2(64, 16.0);
        let a = gaussian_packet(&g, -2.0, 1.0, 0.0).unwrap();
        let b = gaussian_packet(&g, 2.0, 1.0, 0.0).unwrap();
        let ab = product_state(g, &[a.clone(), b.clone()], vec![1.0; 2]).unwrap();
        let ba = product_state(g, &[b, a], vec![1.0; 2]).unwrap();
        let amps = ab.amplitudes().iter().zip(ba.amplitudes()).map(|(x, y)| x - y).collect();
        let anti = MetaWavefunction::from_amplitudes(g, amps, vec![1.0; 2]).unwrap();
        assert!(matches!(symmetrize(&anti), Err(Error::Degenerate(_))));
    }

    #[test]
    fn four_coordinate_exchange() {
        let g = Grid::new(4, 32, 32.0).unwrap();
        let f: Vec<Vec<C64>> = [-3.0, 2.0, -3.0, 2.0]
            .iter()
            .map(|&c| gaussian_packet(&g, c, 2.1, 0.0).unwrap())
            .collect();
        let psi = product_state(g, &f, vec![1.0; 4]).unwrap();
        assert!(psi.exchange_asymmetry() < 1e-14);
        let h: Vec<Vec<C64>> = [-3.0, 2.0, 3.0, 2.0]
            .iter()
            .map(|&c| gaussian_packet(&g, c, 2.1, 0.0).unwrap())
            .collect();
        let asym = product_state(g, &h, vec![1.0; 4]).unwrap();
        assert!(asym.exchange_asymmetry() > 0.5);
        assert!(asym.exchanged().exchanged().distance(&asym) == 0.0);
    }

    #[test]
    fn factor_mismatch_rejected() {
        let g = grid2(64, 16.0);
        let a = gaussian_packet(&g, 0.0, 1.0, 0.0).unwrap();
        assert!(product_state(g, std::slice::from_ref(&a), vec![1.0; 2]).is_err());
        assert!(product_state(g, &[a.clone(), a[..32].to_vec()], vec![1.0; 2]).is_err());
        assert!(product_state(g, &[a.clone(), a], vec![1.0]).is_err());
    }
}
