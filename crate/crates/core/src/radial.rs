//! s-wave radial eigenproblem `−u''/(2μ) + V(r) u = E u`, `u(0) = 0`, solved by
//! Numerov shooting with bisection on the node count.
//!
//! The first step uses the series `u = r + a₂r² + a₃r³` fitted to
//! `V ≈ c₀/r + v₀` near the origin; without it a Coulomb core drops the scheme
//! to second order.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::grid::CrossPotential;

pub const MAX_NODES: usize = 3;

#[derive(Debug, Clone)]
pub struct RadialProblem {
    pub reduced_mass: f64,
    pub potential: Arc<dyn CrossPotential>,
    pub r_max: f64,
    pub mesh_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialSolution {
    pub energy: f64,
    pub mesh: Vec<f64>,
    /// Normalized so that ∫ u² dr = 1.
    pub u: Vec<f64>,
    pub nodes: usize,
    /// RMS of the discrete Numerov equation over the normalized solution.
    pub residual: f64,
    /// |u| at the outer cut relative to its peak.
    pub tail_ratio: f64,
    pub bisections: usize,
}

impl RadialProblem {
    fn validate(&self) -> Result<()> {
        if !(self.reduced_mass > 0.0 && self.reduced_mass.is_finite()) {
            return domain(format!("reduced mass must be positive, got {}", self.reduced_mass));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return domain(format!("r_max must be positive, got {}", self.r_max));
        }
        if self.mesh_points < 1000 {
            return domain(format!("need at least 1000 mesh points, got {}", self.mesh_points));
        }
        Ok(())
    }

    fn h(&self) -> f64 {
        self.r_max / self.mesh_points as f64
    }

    fn v(&self, r: f64) -> f64 {
        self.potential.energy(r)
    }

    /// Integrates outward; returns (u, sign changes). Stops early once the
    /// solution has clearly diverged.
    fn shoot(&self, e: f64) -> (Vec<f64>, usize) {
        let (mu, h, n) = (self.reduced_mass, self.h(), self.mesh_points);
        let f = |r: f64| 2.0 * mu * (self.v(r) - e);
        let eps = 1e-4 * h;
        let (q1, q2) = (eps * self.v(eps), 2.0 * eps * self.v(2.0 * eps));
        let c0 = 2.0 * q1 - q2;
        let v0 = (q2 - q1) / eps;
        let a2 = mu * c0;
        let a3 = mu * (mu * c0 * c0 + v0 - e) / 3.0;
        let h2 = h * h / 12.0;
        let mut u = Vec::with_capacity(n + 1);
        u.push(0.0);
        u.push(h + a2 * h * h + a3 * h * h * h);
        let mut w_prev = -h2 * 2.0 * mu * c0;
        let mut w = (1.0 - h2 * f(h)) * u[1];
        let mut nodes = 0;
        for i in 1..n {
            let w_next = 2.0 * w - w_prev + h * h * f(i as f64 * h) * u[i];
            let r = (i + 1) as f64 * h;
            let un = w_next / (1.0 - h2 * f(r));
            if un * u[i] < 0.0 {
                nodes += 1;
            }
            u.push(un);
            if !un.is_finite() || un.abs() > 1e250 {
                break;
            }
            w_prev = w;
            w = w_next;
        }
        (u, nodes)
    }

    fn bracket(&self) -> (f64, f64) {
        let h = self.h();
        let mut lo = f64::INFINITY;
        for i in 1..=self.mesh_points {
            lo = lo.min(self.v(i as f64 * h));
        }
        let hi = self.v(self.r_max).max(0.0);
        (lo, hi)
    }

    /// Eigenpair with exactly `nodes` interior nodes (≤ [`MAX_NODES`]).
    pub fn solve(&self, nodes: usize) -> Result<RadialSolution> {
        self.validate()?;
        if nodes > MAX_NODES {
            return domain(format!("node count {nodes} exceeds the supported maximum {MAX_NODES}"));
        }
        let (mut lo, mut hi) = self.bracket();
        if self.shoot(hi).1 <= nodes || self.shoot(lo).1 > nodes {
            return Err(Error::NoBoundState { lower: lo, upper: hi });
        }
        let mut iters = 0;
        while hi - lo > 1e-15 * hi.abs().max(lo.abs()) && iters < 200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.shoot(mid).1 > nodes {
                hi = mid;
            } else {
                lo = mid;
            }
            iters += 1;
        }
        if iters >= 200 {
            return Err(Error::NotConverged { steps: iters, residual: hi - lo });
        }
        let energy = lo;
        let (mut u, _) = self.shoot(energy);
        u.truncate(self.mesh_points + 1);
        let m = self.matching_index(energy);
        if m >= u.len() || !u[m].is_finite() || u[m] == 0.0 {
            return Err(Error::NotConverged { steps: iters, residual: hi - lo });
        }
        let inward = self.shoot_inward(energy, m);
        let scale = u[m] / inward[m];
        u.resize(self.mesh_points + 1, 0.0);
        for i in m..=self.mesh_points {
            u[i] = inward[i] * scale;
        }
        let peak = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        // The inward branch is pinned to zero at r_max, so the largest value in
        // the outer 5% of the mesh bounds the physical tail from above.
        let edge = self.mesh_points - self.mesh_points / 20;
        let tail_ratio = u[edge..].iter().fold(0.0f64, |a, v| a.max(v.abs())) / peak;
        if tail_ratio > 1e-8 {
            return domain(format!(
                "r_max = {} too small: |u| near r_max is {tail_ratio:e} of its peak (need < 1e-8)",
                self.r_max
            ));
        }
        let cut = self.mesh_points;
        let h = self.h();
        let norm = trapezoid(&u.iter().map(|v| v * v).collect::<Vec<_>>(), h).sqrt();
        let sign = if u[1] < 0.0 { -1.0 } else { 1.0 };
        u.iter_mut().for_each(|v| *v *= sign / norm);
        let mesh: Vec<f64> = (0..=self.mesh_points).map(|i| i as f64 * h).collect();
        let residual = self.numerov_residual(&u, energy);
        let found = u[1..cut].windows(2).filter(|w| w[0] * w[1] < 0.0).count();
        Ok(RadialSolution { energy, mesh, u, nodes: found, residual, tail_ratio, bisections: iters })
    }

    /// Outermost classically allowed mesh point, where the outward and inward
    /// integrations are joined.
    fn matching_index(&self, e: f64) -> usize {
        let h = self.h();
        let n = self.mesh_points;
        (1..n).rev().find(|&i| self.v(i as f64 * h) < e).unwrap_or(n / 2).min(n - 2)
    }

    /// Integrates from u(r_max) = 0 down to index `m`.
    fn shoot_inward(&self, e: f64, m: usize) -> Vec<f64> {
        let (mu, h, n) = (self.reduced_mass, self.h(), self.mesh_points);
        let h2 = h * h / 12.0;
        let f = |i: usize| 2.0 * mu * (self.v(i as f64 * h) - e);
        let mut u = vec![0.0; n + 1];
        u[n - 1] = 1e-30;
        let mut w_next = 0.0;
        let mut w = (1.0 - h2 * f(n - 1)) * u[n - 1];
        for i in (m + 1..n).rev() {
            let w_prev = 2.0 * w - w_next + h * h * f(i) * u[i];
            u[i - 1] = w_prev / (1.0 - h2 * f(i - 1));
            w_next = w;
            w = w_prev;
            if u[i - 1].abs() > 1e200 {
                u[i - 1..].iter_mut().for_each(|v| *v *= 1e-200);
                w *= 1e-200;
                w_next *= 1e-200;
            }
        }
        u
    }

    pub fn ground_state(&self) -> Result<RadialSolution> {
        self.solve(0)
    }

    fn numerov_residual(&self, u: &[f64], e: f64) -> f64 {
        let (mu, h) = (self.reduced_mass, self.h());
        let h2 = h * h / 12.0;
        let f = |i: usize| 2.0 * mu * (self.v(i as f64 * h) - e);
        let n = u.len() - 1;
        let sum: f64 = (2..n)
            .map(|i| {
                let r = (1.0 - h2 * f(i + 1)) * u[i + 1] - 2.0 * (1.0 + 5.0 * h2 * f(i)) * u[i]
                    + (1.0 - h2 * f(i - 1)) * u[i - 1];
                r * r
            })
            .sum();
        (sum / (n - 2) as f64).sqrt()
    }
}

fn trapezoid(y: &[f64], h: f64) -> f64 {
    let inner: f64 = y[1..y.len() - 1].iter().sum();
    h * (inner + 0.5 * (y[0] + y[y.len() - 1]))
}

/// ∫ r u² dr for a normalized radial function.
pub fn expectation_radius(u: &[f64], mesh: &[f64]) -> Result<f64> {
    if u.len() != mesh.len() || u.len() < 3 {
        return domain("radial function and mesh must have the same length ≥ 3");
    }
    let h = mesh[1] - mesh[0];
    let y: Vec<f64> = u.iter().zip(mesh).map(|(v, r)| r * v * v).collect();
    Ok(trapezoid(&y, h))
}
