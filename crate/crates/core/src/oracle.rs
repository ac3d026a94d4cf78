//! Brute-force global minimization used to validate the solvers.
//!
//! Only the manifold parameterization and the energy are used: a dense grid
//! over `(x3, h)`, downhill-simplex refinement of the best grid minima, and
//! a direct scan of the `h = 0` curve.

use std::f64::consts::PI;

use argmin::core::{CostFunction, Error as ArgminError, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{boundary_psi, energy_xh, lift_x3, ReducedVolumes, Surface, Tensions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleGrid {
    /// Intervals along `x3 in [-L, L]`, `L = w3^(1/3)`.
    pub n_x3: usize,
    /// Intervals along `h in (0, h_max_factor L]`.
    pub n_h: usize,
    pub h_max_factor: f64,
    pub refine_starts: usize,
    pub simplex_tolerance: f64,
    pub max_iterations: u64,
}

impl Default for OracleGrid {
    fn default() -> Self {
        OracleGrid {
            n_x3: 200,
            n_h: 200,
            h_max_factor: 2.0,
            refine_starts: 10,
            simplex_tolerance: 1e-12,
            max_iterations: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleCandidate {
    pub x3: f64,
    pub h: f64,
    pub x: [f64; 3],
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryScan {
    /// `(surface, position on the h = 0 curve, energy)` at `u1`, `u2`, `u3`.
    pub kinks: [(Surface, f64, f64); 3],
    pub best: Surface,
    pub energy: f64,
    /// No sampled point between the kinks beats the best kink.
    pub kinks_dominate: bool,
    /// Sampled midpoints never fall below their chords.
    pub concave: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleTag {
    Interior,
    Boundary(Surface),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub interior: Option<OracleCandidate>,
    pub boundary: BoundaryScan,
    pub energy: f64,
    pub tag: OracleTag,
    pub grid: OracleGrid,
}

/// Energy on the constraint manifold as a function of `(x3, h)`.
fn manifold_energy(x3: f64, h: f64, t: &Tensions, volumes: &ReducedVolumes) -> f64 {
    let h = h.abs();
    energy_xh(lift_x3(x3, h, volumes), h, t)
}

struct Objective<'a> {
    t: &'a Tensions,
    volumes: &'a ReducedVolumes,
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, ArgminError> {
        Ok(manifold_energy(p[0], p[1], self.t, self.volumes))
    }
}

fn refine(
    start: [f64; 2],
    step: [f64; 2],
    t: &Tensions,
    volumes: &ReducedVolumes,
    grid: &OracleGrid,
) -> Option<OracleCandidate> {
    let simplex = vec![
        vec![start[0], start[1]],
        vec![start[0] + step[0], start[1]],
        vec![start[0], start[1] + step[1]],
    ];
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(grid.simplex_tolerance)
        .ok()?;
    let res = Executor::new(Objective { t, volumes }, solver)
        .configure(|s| s.max_iters(grid.max_iterations))
        .run()
        .ok()?;
    let p = res.state().get_best_param()?;
    let (x3, h) = (p[0], p[1].abs());
    Some(OracleCandidate {
        x3,
        h,
        x: lift_x3(x3, h, volumes),
        energy: res.state().get_best_cost(),
    })
}

/// Global minimum over the constraint manifold by exhaustive search.
pub fn oracle_minimize(
    t: &Tensions,
    volumes: &ReducedVolumes,
    grid: &OracleGrid,
) -> Result<OracleResult> {
    t.validate()?;
    if grid.n_x3 < 2 || grid.n_h < 2 || !(grid.h_max_factor > 0.0) {
        return Err(invalid("oracle grid needs at least 2 intervals per axis and h_max > 0"));
    }
    let l = volumes.w3().cbrt();
    let (nx, nh) = (grid.n_x3, grid.n_h);
    let dx = 2.0 * l / nx as f64;
    let dh = grid.h_max_factor * l / nh as f64;
    let x3_at = |i: usize| -l + dx * i as f64;
    let h_at = |j: usize| dh * j as f64;
    // rows over x3 (i = 0..=nx), columns over h (j = 1..=nh)
    let values: Vec<Vec<f64>> = (0..=nx)
        .into_par_iter()
        .map(|i| (1..=nh).map(|j| manifold_energy(x3_at(i), h_at(j), t, volumes)).collect())
        .collect();

    let mut local: Vec<(f64, usize, usize)> = Vec::new();
    let mut all: Vec<(f64, usize, usize)> = Vec::with_capacity((nx + 1) * nh);
    for i in 0..=nx {
        for j in 0..nh {
            let e = values[i][j];
            all.push((e, i, j));
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 || a > nx as i64 || b >= nh as i64 {
                        continue;
                    }
                    if values[a as usize][b as usize] < e {
                        is_min = false;
                    }
                }
            }
            if is_min {
                local.push((e, i, j));
            }
        }
    }
    let by_energy = |a: &(f64, usize, usize), b: &(f64, usize, usize)| {
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
    };
    local.sort_by(by_energy);
    all.sort_by(by_energy);
    let mut starts: Vec<(f64, usize, usize)> = local.into_iter().take(grid.refine_starts).collect();
    for cand in all {
        if starts.len() >= grid.refine_starts {
            break;
        }
        if !starts.iter().any(|s| s.1 == cand.1 && s.2 == cand.2) {
            starts.push(cand);
        }
    }

    let refined: Vec<OracleCandidate> = starts
        .par_iter()
        .map(|&(e, i, j)| {
            let (x3, h) = (x3_at(i), h_at(j + 1));
            let grid_point = OracleCandidate {
                x3,
                h,
                x: lift_x3(x3, h, volumes),
                energy: e,
            };
            match refine([x3, h], [dx, dh], t, volumes, grid) {
                Some(r) if r.energy <= e => r,
                _ => grid_point,
            }
        })
        .collect();
    let interior = refined
        .into_iter()
        .min_by(|a, b| a.energy.total_cmp(&b.energy));

    let boundary = boundary_scan(t, volumes);
    let (energy, tag) = match interior {
        Some(c) if c.energy < boundary.energy * (1.0 - 1e-12) => (c.energy, OracleTag::Interior),
        _ => (boundary.energy, OracleTag::Boundary(boundary.best)),
    };
    Ok(OracleResult {
        interior,
        boundary,
        energy,
        tag,
        grid: *grid,
    })
}

/// Minimum of the energy along `h = 0`, where only the kinks can be minima.
pub fn boundary_scan(t: &Tensions, volumes: &ReducedVolumes) -> BoundaryScan {
    let psi = |x: f64| PI * boundary_psi(x, t, volumes);
    let (w1, w2) = (volumes.w1, volumes.w2);
    let kinks = [
        (Surface::S1, w1, psi(w1)),
        (Surface::S2, -w2, psi(-w2)),
        (Surface::S3, 0.0, psi(0.0)),
    ];
    let (mut best, mut energy) = (Surface::S1, f64::INFINITY);
    for (k, _, e) in kinks {
        if e < energy {
            energy = e;
            best = k;
        }
    }
    let far = 10.0 * volumes.w3();
    let intervals = [(-w2 - far, -w2), (-w2, 0.0), (0.0, w1), (w1, w1 + far)];
    let samples = 400;
    let slack = 1e-12 * energy;
    let mut kinks_dominate = true;
    let mut concave = true;
    for (a, b) in intervals {
        for s in 1..samples {
            let x = a + (b - a) * s as f64 / samples as f64;
            if psi(x) < energy - slack {
                kinks_dominate = false;
            }
            let half = (b - a) / samples as f64;
            let (l, r) = (x - half, x + half);
            if psi(x) < 0.5 * (psi(l) + psi(r)) - slack {
                concave = false;
            }
        }
    }
    BoundaryScan {
        kinks,
        best,
        energy,
        kinks_dominate,
        concave,
    }
}
