//! Phase diagrams in the `(t1, t2)` plane for fixed `t3`, `kappa` and volumes.
//!
//! Every pair of outer angles `(alpha1, alpha2)` is critical for exactly one
//! pair of tensions, so scanning the angle quadrant and recording the
//! recovered tensions maps the domain where interior minima exist.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, DoubletError, Result};
use crate::geometry::{
    cubic_q, BoundaryState, DoubletState, ReducedVolumes, Surface, Tensions,
};
use crate::line::{
    classify, degeneracy_epsilon, find_critical_points, forward_map, hessian_tangent,
    residual_norm, Classification, CriticalPoint, CriticalSearch,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellGlobal {
    /// The cell's critical point is a local minimum below all boundary energies.
    Interior,
    Boundary(Surface),
}

impl CellGlobal {
    pub fn label(self) -> String {
        match self {
            CellGlobal::Interior => "interior".to_string(),
            CellGlobal::Boundary(k) => format!("u{}", k.label()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub alpha1: f64,
    pub alpha2: f64,
    pub t1: f64,
    pub t2: f64,
    pub y: f64,
    pub z3: f64,
    pub trace: f64,
    pub det: f64,
    pub classification: Classification,
    /// `phi1 > pi`.
    pub bulge1: bool,
    /// `phi2 > pi`.
    pub bulge2: bool,
    pub energy: f64,
    pub boundary_energies: [f64; 3],
    pub global: CellGlobal,
}

fn evaluate_cell(
    alpha1: f64,
    alpha2: f64,
    t3: f64,
    kappa: f64,
    volumes: &ReducedVolumes,
) -> Option<PhaseCell> {
    let z1 = (0.5 * alpha1).tan();
    let z2 = (0.5 * alpha2).tan();
    let img = forward_map(z1, z2, t3, kappa, volumes).ok()?;
    if !(img.t1 > 0.0 && img.t2 > 0.0) {
        return None;
    }
    let t = Tensions::new(img.t1, img.t2, t3, kappa).ok()?;
    let state = DoubletState::from_zy([z1, z2, img.z3], img.y).ok()?;
    let (trace, det) = hessian_tangent(&state, &t);
    let classification = classify(trace, det, degeneracy_epsilon(&t));
    let phi = state.phi();
    let energy = state.energy(&t);
    let boundary = BoundaryState::all(volumes, &t);
    let boundary_energies = boundary.map(|b| b.energy);
    let (mut best, mut best_e) = (Surface::S1, f64::INFINITY);
    for b in &boundary {
        if b.energy < best_e {
            best_e = b.energy;
            best = b.which;
        }
    }
    let global = if classification == Classification::LocalMin && energy < best_e {
        CellGlobal::Interior
    } else {
        CellGlobal::Boundary(best)
    };
    Some(PhaseCell {
        alpha1,
        alpha2,
        t1: img.t1,
        t2: img.t2,
        y: img.y,
        z3: img.z3,
        trace,
        det,
        classification,
        bulge1: phi[0] > PI,
        bulge2: phi[1] > PI,
        energy,
        boundary_energies,
        global,
    })
}

/// Cell-centered `n x n` scan of `(-pi, 0) x (0, pi)`, row-major in `alpha1`.
pub fn scan_angle_grid(
    t3: f64,
    kappa: f64,
    volumes: &ReducedVolumes,
    n: usize,
) -> Result<Vec<PhaseCell>> {
    if n < 2 {
        return Err(invalid(format!("scan grid must be at least 2 (got {n})")));
    }
    if !(t3 > 0.0 && t3.is_finite() && kappa >= 0.0 && kappa.is_finite()) {
        return Err(invalid(format!("need t3 > 0 and kappa >= 0 (got {t3}, {kappa})")));
    }
    let step = PI / n as f64;
    let rows: Vec<Vec<PhaseCell>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let alpha1 = -PI + (i as f64 + 0.5) * step;
            (0..n)
                .filter_map(|j| {
                    let alpha2 = (j as f64 + 0.5) * step;
                    evaluate_cell(alpha1, alpha2, t3, kappa, volumes)
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

pub const CSV_HEADER: &str = "alpha1,alpha2,t1,t2,y,z3,trace,det,class,bulge1,bulge2,E,E1,E2,E3,global";

pub fn write_csv<W: Write>(cells: &[PhaseCell], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.alpha1,
            c.alpha2,
            c.t1,
            c.t2,
            c.y,
            c.z3,
            c.trace,
            c.det,
            c.classification,
            u8::from(c.bulge1),
            u8::from(c.bulge2),
            c.energy,
            c.boundary_energies[0],
            c.boundary_energies[1],
            c.boundary_energies[2],
            c.global.label()
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqualVolumeThresholds {
    /// Above this line tension the minimum domain is bounded.
    pub kappa_bounded: f64,
    /// Above this line tension no interior minimum remains.
    pub kappa_disappear: f64,
    /// Common value of `t1 = t2` where the domain vanishes.
    pub t_singular: f64,
}

fn require_equal_volumes(volumes: &ReducedVolumes) -> Result<()> {
    if (volumes.w1 - volumes.w2).abs() > 1e-12 * volumes.w3() {
        return Err(DoubletError::Unsupported(format!(
            "closed-form thresholds need w1 = w2 (got {}, {})",
            volumes.w1, volumes.w2
        )));
    }
    Ok(())
}

pub fn thresholds_equal_volumes(t3: f64, volumes: &ReducedVolumes) -> Result<EqualVolumeThresholds> {
    require_equal_volumes(volumes)?;
    if !(t3 > 0.0 && t3.is_finite()) {
        return Err(invalid(format!("t3 must be positive (got {t3})")));
    }
    let r65 = 65f64.sqrt();
    let l = volumes.w3().cbrt();
    Ok(EqualVolumeThresholds {
        kappa_bounded: 1.5 * t3 * l,
        kappa_disappear: t3 * l / (4.0 * 14f64.powf(1.0 / 6.0))
            * (43.0 + 5.0 * r65)
            * (25.0 * r65 - 201.0).powf(1.0 / 6.0),
        t_singular: 0.625 * t3 * (25.0 + 3.0 * r65),
    })
}

/// Tensions `t1 = t2` where the symmetric critical point of an equal-volume
/// doublet has a singular tangent Hessian, in increasing order.
pub fn diagonal_singular_tensions(t3: f64, kappa: f64, volumes: &ReducedVolumes) -> Result<Vec<f64>> {
    require_equal_volumes(volumes)?;
    let sym = |z: f64| -> Option<(f64, f64)> {
        let img = forward_map(-z, z, t3, kappa, volumes).ok()?;
        let t = Tensions::new(img.t1, img.t1, t3, kappa).ok()?;
        let s = DoubletState::from_zy([-z, z, 0.0], img.y).ok()?;
        Some((img.t1, hessian_tangent(&s, &t).1))
    };
    let samples = 20_000;
    let (lo, hi): (f64, f64) = (1e-3, 1e3);
    let ratio = (hi / lo).powf(1.0 / samples as f64);
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut z = lo;
    for _ in 0..=samples {
        let cur = sym(z).map(|(_, d)| (z, d));
        if let (Some((za, da)), Some((zb, db))) = (prev, cur) {
            if da.signum() != db.signum() {
                let root = bisect(|x| sym(x).map_or(f64::NAN, |v| v.1), za, zb);
                if let Some((t, _)) = sym(root) {
                    if t > 0.0 {
                        out.push(t);
                    }
                }
            }
        }
        prev = cur;
        z *= ratio;
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa0 = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa0.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `f(x) = 2 cosh(asinh(x) / 3) / sqrt(x^2 + 1) - 1`.
pub fn lemma_f(x: f64) -> f64 {
    2.0 * (x.asinh() / 3.0).cosh() / (x * x + 1.0).sqrt() - 1.0
}

/// `g(x) = -f(x^3) / x`, whose maximum bounds `kappa / t_s`.
pub fn lemma_g(x: f64) -> f64 {
    -lemma_f(x * x * x) / x
}

/// `(omega0, M)`: maximizer and maximum of [`lemma_g`] in closed form.
pub fn lemma_constants() -> (f64, f64) {
    let s3 = 3f64.sqrt();
    let s778 = 778f64.sqrt();
    let omega0 = (32.0
        + 4.0 * s778 / s3 * ((50115.0 * s3 / (3112.0 * s778)).acos() / 3.0).cos())
    .powf(1.0 / 6.0);
    let r = 5f64.sqrt() * 10883f64.sqrt();
    let arg = 101454517.0 / (8.0 * 5f64.powf(1.5) * 10883f64.powf(1.5));
    let m = (4.0f64 / 3.0).powf(1.0 / 6.0)
        * (2.0 * r * (arg.acos() / 3.0 - PI / 3.0).cos() - 239.0).powf(1.0 / 6.0);
    (omega0, m)
}

/// A configuration with `sin(phi1) = 0` exactly (`z3 = -1 / z2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BulgeBoundaryPoint {
    /// Sign of the square root `r = ±sqrt((t1 m)^2 - 4 kappa^2)`.
    pub branch: i8,
    pub t1: f64,
    pub state: DoubletState,
    /// Remaining volume condition at the returned `t1`.
    pub condition: f64,
    /// Normalized residual of the full system.
    pub residual: f64,
}

struct BulgeParts {
    z1: f64,
    z2: f64,
    y: f64,
    condition: f64,
}

fn bulge_parts(t1: f64, t2: f64, t3: f64, kappa: f64, volumes: &ReducedVolumes, branch: f64) -> Option<BulgeParts> {
    let m = volumes.w2.cbrt();
    let a = t2 - t3;
    let disc = (t1 * m).powi(2) - 4.0 * kappa * kappa;
    if disc < 0.0 {
        return None;
    }
    let r = branch * disc.sqrt();
    let v = a * m + r;
    let z2 = (v + (v * v + 4.0 * kappa * kappa).sqrt()) / (2.0 * kappa);
    let y = (1.0 + z2 * z2) / (z2 * m);
    let e2 = 1.0 + z2 * z2;
    let (c2, s2) = ((1.0 - z2 * z2) / e2, 2.0 * z2 / e2);
    let c1 = -(a * c2 + kappa * y) / t1;
    let s1 = -a * s2 / t1;
    let z1 = s1 / (1.0 + c1);
    let condition = -(1.0 + 3.0 * z2 * z2) / z2.powi(3) - cubic_q(z1) - volumes.w1 * y.powi(3);
    (z1.is_finite() && z2 > 0.0).then_some(BulgeParts { z1, z2, y, condition })
}

/// Exact `sin(phi1) = 0` configurations for given `t2`, `t3`, `kappa`, volumes.
///
/// Every root in `t1` of the remaining volume condition on both square-root
/// branches, sorted by decreasing `t1`.
pub fn bulge_boundary_solve(
    t2: f64,
    t3: f64,
    kappa: f64,
    volumes: &ReducedVolumes,
) -> Result<Vec<BulgeBoundaryPoint>> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(invalid(format!("bulge boundary needs kappa > 0 (got {kappa})")));
    }
    if !(t2 > 0.0 && t3 > 0.0) {
        return Err(invalid("tensions must be positive"));
    }
    let t1_min = 2.0 * kappa / volumes.w2.cbrt();
    let samples = 4000;
    let offsets: Vec<f64> = (0..=samples)
        .map(|i| 1e-12 * (1e14f64).powf(i as f64 / samples as f64))
        .collect();
    let mut out = Vec::new();
    for branch in [1.0, -1.0] {
        let g = |t1: f64| bulge_parts(t1, t2, t3, kappa, volumes, branch).map_or(f64::NAN, |p| p.condition);
        for pair in offsets.windows(2) {
            let (ta, tb) = (t1_min + pair[0], t1_min + pair[1]);
            let (ga, gb) = (g(ta), g(tb));
            if !(ga.is_finite() && gb.is_finite()) || ga.signum() == gb.signum() {
                continue;
            }
            let t1 = bisect(g, ta, tb);
            let Some(p) = bulge_parts(t1, t2, t3, kappa, volumes, branch) else { continue };
            let state = DoubletState::from_zy([p.z1, p.z2, -1.0 / p.z2], p.y);
            let Ok(state) = state else { continue };
            let t = Tensions::new(t1, t2, t3, kappa)?;
            let residual = residual_norm(state.z(), state.y(), &t, volumes);
            // sign changes across poles of the condition are not roots
            if residual > 1e-8 {
                continue;
            }
            out.push(BulgeBoundaryPoint {
                branch: branch as i8,
                t1,
                state,
                condition: p.condition,
                residual,
            });
        }
    }
    out.sort_by(|a, b| b.t1.total_cmp(&a.t1));
    Ok(out)
}

/// Tensions and volumes of the largest bulge reported for the model.
pub const MAX_BULGE_TENSIONS: [f64; 4] = [3.544814028, 3.838944848, 1.730430441, 1.0];
pub const MAX_BULGE_VOLUMES: [f64; 2] = [0.820008308, 0.179991692];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxBulge {
    pub point: CriticalPoint,
    /// Raw angle differences in degrees.
    pub phi_degrees: [f64; 3],
}

/// Local minimum with the largest `phi1` at the maximal-bulge parameters.
pub fn max_bulge_probe(opts: &CriticalSearch) -> Result<MaxBulge> {
    let [t1, t2, t3, kappa] = MAX_BULGE_TENSIONS;
    let t = Tensions::new(t1, t2, t3, kappa)?;
    let v = ReducedVolumes::new(MAX_BULGE_VOLUMES[0], MAX_BULGE_VOLUMES[1])?;
    let points = find_critical_points(&t, &v, opts)?;
    let best = points
        .into_iter()
        .filter(|p| p.is_local_min())
        .max_by(|a, b| a.state.phi()[0].total_cmp(&b.state.phi()[0]))
        .ok_or_else(|| DoubletError::NoConfiguration("no local minimum at the probe parameters".into()))?;
    Ok(MaxBulge {
        point: best,
        phi_degrees: best.state.phi().map(f64::to_degrees),
    })
}

/// Bracket `[lo, hi]` of a line-tension threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaBracket {
    pub lo: f64,
    pub hi: f64,
}

/// Bisection on `kappa` for a scan predicate that holds at `lo` and fails at `hi`.
pub fn bisect_kappa(
    t3: f64,
    volumes: &ReducedVolumes,
    n: usize,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    predicate: impl Fn(&[PhaseCell]) -> bool,
) -> Result<KappaBracket> {
    let holds = |k: f64| scan_angle_grid(t3, k, volumes, n).map(|c| predicate(&c));
    if !holds(lo)? || holds(hi)? {
        return Err(invalid(format!(
            "predicate must hold at kappa = {lo} and fail at kappa = {hi}"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(KappaBracket { lo, hi })
}

fn has_local_min(cells: &[PhaseCell]) -> bool {
    cells.iter().any(|c| c.classification == Classification::LocalMin)
}

/// Line tension above which the scan shows no interior minimum.
pub fn kappa_disappear_numeric(
    t3: f64,
    volumes: &ReducedVolumes,
    n: usize,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<KappaBracket> {
    bisect_kappa(t3, volumes, n, lo, hi, tol, has_local_min)
}

/// Line tension above which no scanned minimum has `max(t1, t2) > cap`.
pub fn kappa_bounded_numeric(
    t3: f64,
    volumes: &ReducedVolumes,
    n: usize,
    cap: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<KappaBracket> {
    bisect_kappa(t3, volumes, n, lo, hi, tol, |cells| {
        cells
            .iter()
            .any(|c| c.classification == Classification::LocalMin && c.t1.max(c.t2) > cap)
    })
}
