//! Critical points of the constrained energy with line tension.
//!
//! Fixing `t3`, `kappa` and the volumes, a pair of outer apex ratios
//! `z1 < 0 < z2` determines `y`, `z3` and the two tensions `t1`, `t2` that
//! make it critical (`forward_map`). Critical points for given tensions are
//! found by inverting that map with multistart Newton in the angle variables
//! `(alpha1, alpha2)` over `(-pi, 0) x (0, pi)`.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, DoubletError, Result};
use crate::geometry::{
    cap_root, cubic_q, BoundaryState, DoubletState, PressurePair, ReducedVolumes, Surface,
    Tensions,
};
use crate::surface::pressures_of;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    LocalMin,
    Saddle,
    LocalMax,
    Degenerate,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::LocalMin => "local-min",
            Classification::Saddle => "saddle",
            Classification::LocalMax => "local-max",
            Classification::Degenerate => "degenerate",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Image of `(z1, z2)` under the forward map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardImage {
    pub y: f64,
    pub z3: f64,
    pub t1: f64,
    pub t2: f64,
}

/// Intermediate quantities shared by the map and its Jacobian.
struct ForwardParts {
    z: [f64; 3],
    y: f64,
    c: [f64; 3],
    s: [f64; 3],
    /// `(cos, sin)` of `phi_k = alpha_{k+1} - alpha_{k-1}`.
    cos_phi: [f64; 3],
    sin_phi: [f64; 3],
    q_span: f64,
}

fn rational_cs(z: f64) -> (f64, f64) {
    if z.abs() > 1e150 {
        return (-1.0, 2.0 / z);
    }
    let d = 1.0 + z * z;
    ((1.0 - z * z) / d, 2.0 * z / d)
}

fn forward_parts(z1: f64, z2: f64, volumes: &ReducedVolumes) -> Result<ForwardParts> {
    if !(z1 < 0.0 && z2 > 0.0 && z1.is_finite() && z2.is_finite()) {
        return Err(invalid(format!("forward map needs z1 < 0 < z2 (got {z1}, {z2})")));
    }
    let (q1, q2) = (cubic_q(z1), cubic_q(z2));
    let w3 = volumes.w3();
    let q_span = q2 - q1;
    let y = (q_span / w3).cbrt();
    let q3 = (volumes.w2 * q1 + volumes.w1 * q2) / w3;
    let z3 = cap_root(0.5 * q3);
    let z = [z1, z2, z3];
    let mut c = [0.0; 3];
    let mut s = [0.0; 3];
    for k in 0..3 {
        (c[k], s[k]) = rational_cs(z[k]);
    }
    let mut cos_phi = [0.0; 3];
    let mut sin_phi = [0.0; 3];
    for k in Surface::ALL {
        let (i, n, p) = (k.index(), k.next().index(), k.prev().index());
        cos_phi[i] = c[n] * c[p] + s[n] * s[p];
        sin_phi[i] = s[n] * c[p] - c[n] * s[p];
    }
    Ok(ForwardParts {
        z,
        y,
        c,
        s,
        cos_phi,
        sin_phi,
        q_span,
    })
}

fn image_of(p: &ForwardParts, t3: f64, kappa: f64) -> Result<ForwardImage> {
    let s3 = p.sin_phi[2];
    if s3.abs() < 1e-15 {
        return Err(DoubletError::Singular(format!(
            "sin(phi3) = {s3:e} at z = ({}, {})",
            p.z[0], p.z[1]
        )));
    }
    Ok(ForwardImage {
        y: p.y,
        z3: p.z[2],
        t1: (t3 * p.sin_phi[0] + kappa * p.y * p.s[1]) / s3,
        t2: (t3 * p.sin_phi[1] - kappa * p.y * p.s[0]) / s3,
    })
}

/// Tensions `t1`, `t2` (and `y`, `z3`) for which `(z1, z2)` is critical.
pub fn forward_map(
    z1: f64,
    z2: f64,
    t3: f64,
    kappa: f64,
    volumes: &ReducedVolumes,
) -> Result<ForwardImage> {
    let parts = forward_parts(z1, z2, volumes)?;
    image_of(&parts, t3, kappa)
}

/// Forward map in angle variables together with `d(t1, t2) / d(alpha1, alpha2)`.
pub fn forward_map_angles(
    alpha1: f64,
    alpha2: f64,
    t3: f64,
    kappa: f64,
    volumes: &ReducedVolumes,
) -> Result<(ForwardImage, [[f64; 2]; 2])> {
    let parts = forward_parts((0.5 * alpha1).tan(), (0.5 * alpha2).tan(), volumes)?;
    let img = image_of(&parts, t3, kappa)?;
    let ForwardParts {
        z,
        y,
        c,
        s,
        cos_phi,
        sin_phi,
        q_span,
    } = parts;
    let w3 = volumes.w3();
    let sq = |v: f64| v * v;
    // dq/dalpha = 3/2 (1 + z^2)^2
    let dq1 = 1.5 * sq(1.0 + z[0] * z[0]);
    let dq2 = 1.5 * sq(1.0 + z[1] * z[1]);
    let dy = [-y * dq1 / (3.0 * q_span), y * dq2 / (3.0 * q_span)];
    let e3 = 1.0 + z[2] * z[2];
    let da3 = [
        volumes.w2 / w3 * sq((1.0 + z[0] * z[0]) / e3),
        volumes.w1 / w3 * sq((1.0 + z[1] * z[1]) / e3),
    ];
    let dphi1 = [-da3[0], 1.0 - da3[1]];
    let dphi2 = [da3[0] - 1.0, da3[1]];
    let ds3 = [cos_phi[2], -cos_phi[2]];
    let da1 = [1.0, 0.0];
    let da2 = [0.0, 1.0];
    let n1 = t3 * sin_phi[0] + kappa * y * s[1];
    let n2 = t3 * sin_phi[1] - kappa * y * s[0];
    let s3 = sin_phi[2];
    let mut jac = [[0.0; 2]; 2];
    for j in 0..2 {
        let dn1 = t3 * cos_phi[0] * dphi1[j] + kappa * (dy[j] * s[1] + y * c[1] * da2[j]);
        let dn2 = t3 * cos_phi[1] * dphi2[j] - kappa * (dy[j] * s[0] + y * c[0] * da1[j]);
        jac[0][j] = (dn1 * s3 - n1 * ds3[j]) / (s3 * s3);
        jac[1][j] = (dn2 * s3 - n2 * ds3[j]) / (s3 * s3);
    }
    Ok((img, jac))
}

/// Force-balance and volume residuals of a candidate critical point.
///
/// Components: `sum t_k c_k + kappa y`, `sum t_k s_k`, `w1(z, y) - w1`,
/// `w2(z, y) - w2`.
pub fn residual(z: [f64; 3], y: f64, t: &Tensions, volumes: &ReducedVolumes) -> [f64; 4] {
    let tt = t.surface_array();
    let mut fc = t.kappa * y;
    let mut fs = 0.0;
    for k in 0..3 {
        let (c, s) = rational_cs(z[k]);
        fc += tt[k] * c;
        fs += tt[k] * s;
    }
    let y3 = y * y * y;
    let q = z.map(cubic_q);
    [
        fc,
        fs,
        (q[2] - q[0]) / y3 - volumes.w1,
        (q[1] - q[2]) / y3 - volumes.w2,
    ]
}

/// Largest residual, forces relative to `t_s + kappa y` and volumes relative to `w3`.
pub fn residual_norm(z: [f64; 3], y: f64, t: &Tensions, volumes: &ReducedVolumes) -> f64 {
    let r = residual(z, y, t, volumes);
    let fscale = t.sum() + t.kappa * y;
    let vscale = volumes.w3();
    (r[0].abs() / fscale)
        .max(r[1].abs() / fscale)
        .max(r[2].abs() / vscale)
        .max(r[3].abs() / vscale)
}

/// `2 x 2` matrix `M_H - kappa y I` (without the `2 pi` factor).
fn tangent_matrix(state: &DoubletState, t: &Tensions) -> [[f64; 2]; 2] {
    let c = state.cos();
    let s = state.sin();
    let tt = t.surface_array();
    let mut m = [[0.0; 2]; 2];
    for k in 0..3 {
        let g = tt[k] * (2.0 + c[k]);
        m[0][0] += g * c[k] * c[k];
        m[1][1] += g * s[k] * s[k];
        m[0][1] -= g * c[k] * s[k];
    }
    let ky = t.kappa * state.y();
    m[0][0] -= ky;
    m[1][1] -= ky;
    m[1][0] = m[0][1];
    m
}

/// Trace and determinant of the tangent-plane Hessian `H_T = 2 pi (M_H - kappa y I)`.
pub fn hessian_tangent(state: &DoubletState, t: &Tensions) -> (f64, f64) {
    let m = tangent_matrix(state, t);
    let trace = 2.0 * PI * (m[0][0] + m[1][1]);
    let det = 4.0 * PI * PI * (m[0][0] * m[1][1] - m[0][1] * m[1][0]);
    (trace, det)
}

/// Degeneracy threshold `1e-9 (2 pi t_s)^2` for the determinant.
pub fn degeneracy_epsilon(t: &Tensions) -> f64 {
    1e-9 * (2.0 * PI * t.sum()).powi(2)
}

pub fn classify(trace: f64, det: f64, epsilon: f64) -> Classification {
    if det > epsilon {
        if trace > 0.0 {
            Classification::LocalMin
        } else {
            Classification::LocalMax
        }
    } else if det < -epsilon {
        Classification::Saddle
    } else {
        Classification::Degenerate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub state: DoubletState,
    pub pressures: PressurePair,
    pub energy: f64,
    pub hessian_trace: f64,
    pub hessian_det: f64,
    pub classification: Classification,
    /// Normalized residual, see [`residual_norm`].
    pub residual: f64,
}

impl CriticalPoint {
    pub fn from_state(state: DoubletState, t: &Tensions, volumes: &ReducedVolumes) -> Self {
        let (trace, det) = hessian_tangent(&state, t);
        CriticalPoint {
            state,
            pressures: pressures_of(&state, t),
            energy: state.energy(t),
            hessian_trace: trace,
            hessian_det: det,
            classification: classify(trace, det, degeneracy_epsilon(t)),
            residual: residual_norm(state.z(), state.y(), t, volumes),
        }
    }

    pub fn is_local_min(&self) -> bool {
        self.classification == Classification::LocalMin
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalSearch {
    /// Starts per angle axis.
    pub grid: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub dedup_radius: f64,
    /// Acceptance threshold on [`residual_norm`].
    pub accept_residual: f64,
}

impl Default for CriticalSearch {
    fn default() -> Self {
        CriticalSearch {
            grid: 48,
            tolerance: 1e-13,
            max_iterations: 60,
            dedup_radius: 1e-6,
            accept_residual: 1e-10,
        }
    }
}

fn in_quadrant(a: [f64; 2]) -> bool {
    a[0] > -PI && a[0] < 0.0 && a[1] > 0.0 && a[1] < PI
}

/// Damped Newton on `(t1, t2)(alpha) = (t1, t2)` from one start.
fn newton_from(
    start: [f64; 2],
    t: &Tensions,
    volumes: &ReducedVolumes,
    opts: &CriticalSearch,
) -> Option<[f64; 2]> {
    let scale = t.sum();
    let eval = |a: [f64; 2]| -> Option<([f64; 2], [[f64; 2]; 2])> {
        let (img, jac) = forward_map_angles(a[0], a[1], t.t3, t.kappa, volumes).ok()?;
        let r = [(img.t1 - t.t1) / scale, (img.t2 - t.t2) / scale];
        (r[0].is_finite() && r[1].is_finite()).then_some((r, jac))
    };
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut a = start;
    let (mut r, mut jac) = eval(a)?;
    for _ in 0..opts.max_iterations {
        if norm(r) <= opts.tolerance {
            return Some(a);
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        // jac is in tension units; r was divided by scale
        let rs = [r[0] * scale, r[1] * scale];
        let step = [
            -(jac[1][1] * rs[0] - jac[0][1] * rs[1]) / det,
            -(-jac[1][0] * rs[0] + jac[0][0] * rs[1]) / det,
        ];
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand = [a[0] + lambda * step[0], a[1] + lambda * step[1]];
            if in_quadrant(cand) {
                if let Some((rc, jc)) = eval(cand) {
                    if norm(rc) < norm(r) {
                        accepted = Some((cand, rc, jc));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((cand, rc, jc)) => {
                let moved = (cand[0] - a[0]).abs().max((cand[1] - a[1]).abs());
                a = cand;
                r = rc;
                jac = jc;
                if moved < 1e-16 {
                    break;
                }
            }
            None => break,
        }
    }
    // stalled at rounding level is accepted; the caller re-checks the full residual
    (norm(r) <= opts.tolerance.max(64.0 * f64::EPSILON)).then_some(a)
}

fn state_from_angles(a: [f64; 2], t: &Tensions, volumes: &ReducedVolumes) -> Option<DoubletState> {
    let z1 = (0.5 * a[0]).tan();
    let z2 = (0.5 * a[1]).tan();
    let img = forward_map(z1, z2, t.t3, t.kappa, volumes).ok()?;
    DoubletState::from_zy([z1, z2, img.z3], img.y).ok()
}

/// All critical points reachable from the start grid, deduplicated and classified.
pub fn find_critical_points(
    t: &Tensions,
    volumes: &ReducedVolumes,
    opts: &CriticalSearch,
) -> Result<Vec<CriticalPoint>> {
    t.validate()?;
    if opts.grid == 0 {
        return Err(invalid("start grid must be positive"));
    }
    let n = opts.grid;
    let step = PI / n as f64;
    let found: Vec<Option<CriticalPoint>> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let start = [-PI + (i as f64 + 0.5) * step, (j as f64 + 0.5) * step];
            let a = newton_from(start, t, volumes, opts)?;
            let state = state_from_angles(a, t, volumes)?;
            let cp = CriticalPoint::from_state(state, t, volumes);
            (cp.residual <= opts.accept_residual).then_some(cp)
        })
        .collect();
    Ok(dedup(found.into_iter().flatten(), volumes, opts.dedup_radius))
}

fn dedup_key(cp: &CriticalPoint, volumes: &ReducedVolumes) -> [f64; 4] {
    let z = cp.state.z();
    [z[0], z[1], z[2], cp.state.y() * volumes.w3().cbrt()]
}

fn dedup(
    points: impl Iterator<Item = CriticalPoint>,
    volumes: &ReducedVolumes,
    radius: f64,
) -> Vec<CriticalPoint> {
    let mut out: Vec<CriticalPoint> = Vec::new();
    for cp in points {
        let key = dedup_key(&cp, volumes);
        let near = out.iter().position(|o| {
            let ok = dedup_key(o, volumes);
            (0..4).all(|i| (ok[i] - key[i]).abs() <= radius)
        });
        match near {
            Some(i) if cp.residual < out[i].residual => out[i] = cp,
            Some(_) => {}
            None => out.push(cp),
        }
    }
    out
}

/// Necessary conditions for interior critical points to exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    /// `u = (t_s / kappa) (w3 / 2)^(1/3)`; `None` when `kappa = 0`.
    pub u: Option<f64>,
    /// `u >= 3`.
    pub u_condition: bool,
    /// For each `k` with `t_k >= t_{k+1} + t_{k-1}`: `(lhs, rhs)` of
    /// `t_{k+1} + t_{k-1} >= t_s cosh(asinh(u^3) / 3) / sqrt(u^6 + 1)`.
    pub dominant: [Option<(f64, f64)>; 3],
    /// Lower bound `(4 / w3)^(1/3)` on `y` at any critical point.
    pub y_lower_bound: f64,
    pub feasible: bool,
}

pub fn feasibility_prefilter(t: &Tensions, volumes: &ReducedVolumes) -> Feasibility {
    let w3 = volumes.w3();
    let y_lower_bound = (4.0 / w3).cbrt();
    if t.kappa == 0.0 {
        return Feasibility {
            u: None,
            u_condition: true,
            dominant: [None; 3],
            y_lower_bound,
            feasible: true,
        };
    }
    let ts = t.sum();
    let u = ts / t.kappa * (w3 / 2.0).cbrt();
    let u_condition = u >= 3.0;
    let u3 = u * u * u;
    let bound = ts * ((u3.asinh() / 3.0).cosh() / (u3 * u3 + 1.0).sqrt());
    let tt = t.surface_array();
    let mut dominant = [None; 3];
    let mut feasible = u_condition;
    for k in Surface::ALL {
        let others = tt[k.next().index()] + tt[k.prev().index()];
        if tt[k.index()] >= others {
            dominant[k.index()] = Some((others, bound));
            feasible &= others >= bound;
        }
    }
    Feasibility {
        u: Some(u),
        u_condition,
        dominant,
        y_lower_bound,
        feasible,
    }
}

/// `2 max(t1, t2, t3, kappa y) - (t_s + kappa y)`, non-positive at critical points.
pub fn quadrilateral_excess(t: &Tensions, y: f64) -> f64 {
    let ky = t.kappa * y;
    2.0 * t.t1.max(t.t2).max(t.t3).max(ky) - (t.sum() + ky)
}

/// Residuals of the force-balance relations, relative to `t_s + kappa y`
/// (squared for the quadratic ones).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub cos_relations: [f64; 3],
    pub sin_relations: [f64; 3],
    /// `sum t_k^2 + 2 sum t_{k+1} t_{k-1} cos phi_k - kappa^2 y^2`.
    pub norm_identity: f64,
    /// `cos phi_k` from the state minus its tension expression.
    pub cos_phi: [f64; 3],
}

impl RelationReport {
    pub fn max_abs(&self) -> f64 {
        self.cos_relations
            .iter()
            .chain(&self.sin_relations)
            .chain(&self.cos_phi)
            .chain(std::iter::once(&self.norm_identity))
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

pub fn relation_checks(state: &DoubletState, t: &Tensions) -> RelationReport {
    let c = state.cos();
    let s = state.sin();
    let tt = t.surface_array();
    let ky = t.kappa * state.y();
    let scale = t.sum() + ky;
    let mut cos_phi = [0.0; 3];
    let mut sin_phi = [0.0; 3];
    for k in Surface::ALL {
        let (i, n, p) = (k.index(), k.next().index(), k.prev().index());
        cos_phi[i] = c[n] * c[p] + s[n] * s[p];
        sin_phi[i] = s[n] * c[p] - c[n] * s[p];
    }
    let mut report = RelationReport {
        cos_relations: [0.0; 3],
        sin_relations: [0.0; 3],
        norm_identity: 0.0,
        cos_phi: [0.0; 3],
    };
    let mut identity = -ky * ky;
    for k in Surface::ALL {
        let (i, n, p) = (k.index(), k.next().index(), k.prev().index());
        report.cos_relations[i] =
            (tt[i] + tt[n] * cos_phi[p] + tt[p] * cos_phi[n] + ky * c[i]) / scale;
        report.sin_relations[i] = (tt[n] * sin_phi[p] - tt[p] * sin_phi[n] + ky * s[i]) / scale;
        let law = (tt[i] * tt[i] - tt[p] * tt[p] - tt[n] * tt[n] + ky * (2.0 * tt[i] * c[i] + ky))
            / (2.0 * tt[p] * tt[n]);
        report.cos_phi[i] = (cos_phi[i] - law) * (tt[p] * tt[n]) / (scale * scale);
        identity += tt[i] * tt[i] + 2.0 * tt[n] * tt[p] * cos_phi[i];
    }
    report.norm_identity = identity / (scale * scale);
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GlobalTag {
    /// Index into [`GlobalResult::critical_points`].
    Interior(usize),
    Boundary(Surface),
}

impl fmt::Display for GlobalTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlobalTag::Interior(_) => f.write_str("interior"),
            GlobalTag::Boundary(k) => write!(f, "u{}", k.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalResult {
    pub critical_points: Vec<CriticalPoint>,
    pub boundary: [BoundaryState; 3],
    pub global: GlobalTag,
    pub energy: f64,
}

impl GlobalResult {
    pub fn local_minima(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.critical_points.iter().filter(|c| c.is_local_min())
    }

    pub fn global_point(&self) -> Option<&CriticalPoint> {
        match self.global {
            GlobalTag::Interior(i) => Some(&self.critical_points[i]),
            GlobalTag::Boundary(_) => None,
        }
    }
}

/// Lowest energy among interior local minima and the three boundary points.
pub fn global_minimum(
    t: &Tensions,
    volumes: &ReducedVolumes,
    opts: &CriticalSearch,
) -> Result<GlobalResult> {
    let critical_points = find_critical_points(t, volumes, opts)?;
    let boundary = BoundaryState::all(volumes, t);
    let mut global = GlobalTag::Boundary(Surface::S1);
    let mut energy = f64::INFINITY;
    for b in &boundary {
        if b.energy < energy {
            energy = b.energy;
            global = GlobalTag::Boundary(b.which);
        }
    }
    for (i, cp) in critical_points.iter().enumerate() {
        if cp.is_local_min() && cp.energy < energy {
            energy = cp.energy;
            global = GlobalTag::Interior(i);
        }
    }
    Ok(GlobalResult {
        critical_points,
        boundary,
        global,
        energy,
    })
}
