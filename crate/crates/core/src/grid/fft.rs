//! Multidimensional complex FFT over a row-major grid, one axis at a time.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::{Grid, C64};

/// Lines gathered per task when transforming a strided axis.
const BATCH: usize = 64;

pub(crate) struct FftEngine {
    n: usize,
    dims: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftEngine {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points();
        Self {
            n,
            dims: grid.dims(),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn forward(&self, data: &mut [C64]) {
        for ax in 0..self.dims {
            self.axis(data, ax, &self.forward);
        }
    }

    /// Inverse transform including the 1/Nᵈ normalization.
    pub fn inverse(&self, data: &mut [C64]) {
        for ax in 0..self.dims {
            self.axis(data, ax, &self.inverse);
        }
        let scale = 1.0 / data.len() as f64;
        data.par_iter_mut().for_each(|a| *a *= scale);
    }

    fn axis(&self, data: &mut [C64], ax: usize, fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let stride = n.pow((self.dims - 1 - ax) as u32);
        let scratch_len = fft.get_inplace_scratch_len();
        if stride == 1 {
            data.par_chunks_mut(n * BATCH).for_each_init(
                || vec![C64::default(); scratch_len],
                |scratch, lines| fft.process_with_scratch(lines, scratch),
            );
            return;
        }
        let block = n * stride;
        let tasks: Vec<(usize, usize)> = (0..data.len() / block)
            .flat_map(|b| (0..stride).step_by(BATCH).map(move |j| (b * block, j)))
            .collect();
        let src: &[C64] = data;
        let lines: Vec<Vec<C64>> = tasks
            .par_iter()
            .map_init(
                || vec![C64::default(); scratch_len],
                |scratch, &(base, j0)| {
                    let width = BATCH.min(stride - j0);
                    let mut buf = vec![C64::default(); width * n];
                    for i in 0..n {
                        let row = base + i * stride + j0;
                        for (jj, v) in src[row..row + width].iter().enumerate() {
                            buf[jj * n + i] = *v;
                        }
                    }
                    fft.process_with_scratch(&mut buf, scratch);
                    buf
                },
            )
            .collect();
        for (&(base, j0), buf) in tasks.iter().zip(&lines) {
            let width = buf.len() / n;
            for i in 0..n {
                let row = base + i * stride + j0;
                for jj in 0..width {
                    data[row + jj] = buf[jj * n + i];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_2d(data: &[C64], n: usize) -> Vec<C64> {
        let mut out = vec![C64::default(); n * n];
        let w = -2.0 * std::f64::consts::PI / n as f64;
        for a in 0..n {
            for b in 0..n {
                let mut acc = C64::default();
                for x in 0..n {
                    for y in 0..n {
                        let ph = w * ((a * x + b * y) % n) as f64;
                        acc += data[x * n + y] * C64::from_polar(1.0, ph);
                    }
                }
                out[a * n + b] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft_and_round_trips() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let data: Vec<C64> = (0..256).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let eng = FftEngine::new(&g);
        let mut d = data.clone();
        eng.forward(&mut d);
        let reference = naive_dft_2d(&data, 16);
        let err = d.iter().zip(&reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        eng.inverse(&mut d);
        let err = d.iter().zip(&data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-13);
    }

    #[test]
    fn four_dimensional_plane_wave() {
        let g = Grid::new(4, 16, 1.0).unwrap();
        let n = 16;
        let kv = [1usize, 3, 15, 8];
        let data: Vec<C64> = (0..g.len())
            .map(|i| {
                let mut idx = [0usize; 4];
                g.unravel(i, &mut idx);
                let ph: usize = idx.iter().zip(&kv).map(|(a, k)| a * k).sum();
                C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (ph % n) as f64 / n as f64)
            })
            .collect();
        let mut d = data.clone();
        let eng = FftEngine::new(&g);
        eng.forward(&mut d);
        let peak = ((kv[0] * n + kv[1]) * n + kv[2]) * n + kv[3];
        for (i, v) in d.iter().enumerate() {
            let expect = if i == peak { g.len() as f64 } else { 0.0 };
            assert!((v - C64::new(expect, 0.0)).norm() < 1e-8, "{i}");
        }
        eng.inverse(&mut d);
        assert!(d.iter().zip(&data).all(|(a, b)| (a - b).norm() < 1e-12));
    }
}
