//! Partial trace over the red coordinates and diagnostics of the result.
//!
//! With green configurations `a, b` and red configurations `Y`, the reduced
//! matrix is `ρ(a, b) = Σ_Y Φ(a, Y) Φ*(b, Y) · dY`, so that `Σ_a ρ(a, a) dX = 1`.
//! The operator it represents has matrix elements `ρ(a, b) · dX`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::grid::{MetaWavefunction, C64};

/// Largest green-configuration count for which ρ is stored in full.
pub const MAX_STORED_CONFIGS: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    green_dims: usize,
    coords: Vec<f64>,
    spacing: f64,
    entries: Vec<C64>,
}

/// Half-open interval on the first green coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return domain(format!("empty interval [{lo}, {hi})"));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x < self.hi
    }

    fn overlaps(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }
}

/// The state viewed as a (green configs) × (red configs) matrix.
struct Split<'a> {
    amps: &'a [C64],
    configs: usize,
    green_dims: usize,
    points: usize,
    coords: Vec<f64>,
    spacing: f64,
    /// dY, the red volume element.
    red_measure: f64,
}

impl<'a> Split<'a> {
    fn new(state: &'a MetaWavefunction) -> Self {
        let g = state.grid();
        let green_dims = g.dims() / 2;
        let configs = g.points().pow(green_dims as u32);
        Self {
            amps: state.amplitudes(),
            configs,
            green_dims,
            points: g.points(),
            coords: g.coords(),
            spacing: g.spacing(),
            red_measure: g.spacing().powi(green_dims as i32),
        }
    }

    fn row(&self, a: usize) -> &[C64] {
        &self.amps[a * self.configs..(a + 1) * self.configs]
    }

    /// First coordinate of green (or, by the same layout, red) configuration `a`.
    fn x0(&self, a: usize) -> f64 {
        self.coords[a / self.points.pow(self.green_dims as u32 - 1)]
    }

    fn norm_sq(&self) -> f64 {
        crate::grid::det_sum(self.amps, |_, v| v.norm_sqr()) * self.red_measure * self.red_measure
    }

    fn dot(&self, a: usize, b: usize, red: Option<&[bool]>) -> C64 {
        let (ra, rb) = (self.row(a), self.row(b));
        let mut acc = C64::default();
        match red {
            None => {
                for (x, y) in ra.iter().zip(rb) {
                    acc += x * y.conj();
                }
            }
            Some(mask) => {
                for ((x, y), &m) in ra.iter().zip(rb).zip(mask) {
                    if m {
                        acc += x * y.conj();
                    }
                }
            }
        }
        acc * self.red_measure
    }

    fn members(&self, region: &Interval) -> Vec<usize> {
        (0..self.configs).filter(|&a| region.contains(self.x0(a))).collect()
    }
}

pub fn partial_trace_red(state: &MetaWavefunction) -> Result<ReducedDensityMatrix> {
    let s = Split::new(state);
    if s.configs > MAX_STORED_CONFIGS {
        return Err(Error::MemoryBound(format!(
            "reduced matrix would have {}² entries (limit {}²)",
            s.configs, MAX_STORED_CONFIGS
        )));
    }
    let d = s.configs;
    let upper: Vec<Vec<C64>> = (0..d).into_par_iter().map(|a| (a..d).map(|b| s.dot(a, b, None)).collect()).collect();
    let mut entries = vec![C64::default(); d * d];
    for (a, row) in upper.iter().enumerate() {
        for (off, v) in row.iter().enumerate() {
            let b = a + off;
            entries[a * d + b] = *v;
            entries[b * d + a] = v.conj();
        }
        // the diagonal is real by construction
        entries[a * d + a] = C64::new(entries[a * d + a].re, 0.0);
    }
    Ok(ReducedDensityMatrix { green_dims: s.green_dims, coords: s.coords, spacing: s.spacing, entries })
}

impl ReducedDensityMatrix {
    pub fn configs(&self) -> usize {
        (self.entries.len() as f64).sqrt().round() as usize
    }

    pub fn entry(&self, a: usize, b: usize) -> C64 {
        self.entries[a * self.configs() + b]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    /// dX, the green volume element.
    pub fn measure(&self) -> f64 {
        self.spacing.powi(self.green_dims as i32)
    }

    pub fn trace(&self) -> f64 {
        let d = self.configs();
        (0..d).map(|a| self.entries[a * d + a].re).sum::<f64>() * self.measure()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.configs();
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                worst = worst.max((self.entries[a * d + b] - self.entries[b * d + a].conj()).norm());
            }
        }
        worst
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.measure() * self.measure()
    }

    /// Attempts a Cholesky factorization of ρ·dX + tol·I; success means every
    /// eigenvalue exceeds −tol.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        let d = self.configs();
        let dx = self.measure();
        let mut l = vec![C64::default(); d * d];
        for j in 0..d {
            let mut diag = self.entries[j * d + j].re * dx + tol;
            for k in 0..j {
                diag -= l[j * d + k].norm_sqr();
            }
            if diag <= 0.0 {
                return false;
            }
            let ljj = diag.sqrt();
            l[j * d + j] = C64::new(ljj, 0.0);
            for i in j + 1..d {
                let mut v = self.entries[i * d + j] * dx;
                for k in 0..j {
                    v -= l[i * d + k] * l[j * d + k].conj();
                }
                l[i * d + j] = v / ljj;
            }
        }
        true
    }

    fn first_coord(&self, a: usize) -> f64 {
        self.coords[a / self.coords.len().pow(self.green_dims as u32 - 1)]
    }

    /// Variance of the first green coordinate under the diagonal ρ(X, X).
    pub fn position_spread(&self) -> f64 {
        let d = self.configs();
        let w: Vec<f64> = (0..d).map(|a| self.entries[a * d + a].re).collect();
        let total: f64 = w.iter().sum();
        let mean = (0..d).map(|a| w[a] * self.first_coord(a)).sum::<f64>() / total;
        (0..d).map(|a| w[a] * (self.first_coord(a) - mean).powi(2)).sum::<f64>() / total
    }

    /// Off-diagonal block mass between two regions, normalized by the
    /// geometric mean of the two diagonal block masses.
    pub fn coherence_visibility(&self, region_a: &Interval, region_b: &Interval) -> Result<f64> {
        check_regions(region_a, region_b)?;
        let d = self.configs();
        let ia: Vec<usize> = (0..d).filter(|&a| region_a.contains(self.first_coord(a))).collect();
        let ib: Vec<usize> = (0..d).filter(|&a| region_b.contains(self.first_coord(a))).collect();
        let block = |r: &[usize], c: &[usize]| -> f64 {
            r.iter().map(|&a| c.iter().map(|&b| self.entries[a * d + b].norm()).sum::<f64>()).sum()
        };
        visibility_ratio(block(&ia, &ib), block(&ia, &ia), block(&ib, &ib))
    }
}

fn check_regions(a: &Interval, b: &Interval) -> Result<()> {
    if a.overlaps(b) {
        return domain(format!("regions [{}, {}) and [{}, {}) overlap", a.lo, a.hi, b.lo, b.hi));
    }
    Ok(())
}

fn visibility_ratio(off: f64, aa: f64, bb: f64) -> Result<f64> {
    if !(aa > 0.0 && bb > 0.0) {
        return Err(Error::Degenerate("a visibility region carries no probability".into()));
    }
    Ok((off / (aa * bb).sqrt()).min(1.0))
}

/// Tr ρ² computed row by row without storing ρ.
pub fn purity_by_contraction(state: &MetaWavefunction) -> f64 {
    let s = Split::new(state);
    let d = s.configs;
    let rows: Vec<f64> = (0..d)
        .into_par_iter()
        .map(|a| (0..d).map(|b| s.dot(a, b, None).norm_sqr()).sum())
        .collect();
    let dx = s.red_measure;
    rows.iter().sum::<f64>() * dx * dx / s.norm_sq().powi(2)
}

/// Visibility computed straight from the state. With `red_regions` the
/// off-diagonal block is accumulated separately for each red region (by the
/// first red coordinate) before taking magnitudes, which drops the relative
/// phase between branches that differ only in the red sector. The diagonal
/// blocks always sum over all red configurations.
pub fn coherence_visibility_by_contraction(
    state: &MetaWavefunction,
    region_a: &Interval,
    region_b: &Interval,
    red_regions: Option<&[Interval]>,
) -> Result<f64> {
    check_regions(region_a, region_b)?;
    let s = Split::new(state);
    let masks: Vec<Option<Vec<bool>>> = match red_regions {
        None => vec![None],
        Some(rs) => rs
            .iter()
            .map(|r| Some((0..s.configs).map(|y| r.contains(s.x0(y))).collect()))
            .collect(),
    };
    let (ia, ib) = (s.members(region_a), s.members(region_b));
    let block = |rows: &[usize], cols: &[usize], masks: &[Option<Vec<bool>>]| -> f64 {
        let partial: Vec<f64> = rows
            .par_iter()
            .map(|&a| {
                cols.iter()
                    .map(|&b| masks.iter().map(|m| s.dot(a, b, m.as_deref()).norm()).sum::<f64>())
                    .sum()
            })
            .collect();
        partial.iter().sum()
    };
    let all = [None];
    visibility_ratio(block(&ia, &ib, &masks), block(&ia, &ia, &all), block(&ib, &ib, &all))
}
