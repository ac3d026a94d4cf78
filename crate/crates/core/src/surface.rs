//! Volume-constrained doublet without line tension.
//!
//! In the interior regime the three tension forces close a triangle, which
//! fixes the angle differences. One apex ratio is the unique real root of a
//! quintic; it is obtained through the strictly increasing rational function
//! `f(xi) = xi^3 H(xi) / R(xi)`, and the other two ratios follow by Möbius
//! maps. Outside the interior regime one cap vanishes.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DoubletError, Result};
use crate::geometry::{
    cubic_q, BoundaryState, DoubletState, PressurePair, ReducedVolumes, Surface, Tensions,
};
use crate::poly::Polynomial;

/// Which minimizer the surface tensions select.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeLabel {
    Interior,
    /// `t1 >= t2 + t3`: cell 1 engulfed by cell 2 (point `u1`).
    Internalize1,
    /// `t2 >= t1 + t3`: cell 2 engulfed by cell 1 (point `u2`).
    Internalize2,
    /// `t3 >= t1 + t2`: separated cells (point `u3`).
    Externalize,
}

impl RegimeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeLabel::Interior => "interior",
            RegimeLabel::Internalize1 => "internalize-1",
            RegimeLabel::Internalize2 => "internalize-2",
            RegimeLabel::Externalize => "externalize",
        }
    }

    /// The vanished surface for degenerate regimes.
    pub fn vanished(self) -> Option<Surface> {
        match self {
            RegimeLabel::Interior => None,
            RegimeLabel::Internalize1 => Some(Surface::S1),
            RegimeLabel::Internalize2 => Some(Surface::S2),
            RegimeLabel::Externalize => Some(Surface::S3),
        }
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensionRegime {
    pub label: RegimeLabel,
    /// Set when the violated triangle inequality holds with equality.
    pub boundary: bool,
}

impl TensionRegime {
    pub fn is_interior(&self) -> bool {
        self.label == RegimeLabel::Interior
    }
}

/// Relative slack under which `t_k = t_{k+1} + t_{k-1}` is treated as equality.
const EQUALITY_SLACK: f64 = 8.0 * f64::EPSILON;

/// Triangle-inequality classification of three surface tensions.
pub fn regime_of(t: [f64; 3]) -> TensionRegime {
    let ts = t[0] + t[1] + t[2];
    for k in Surface::ALL {
        let tk = t[k.index()];
        let others = t[k.next().index()] + t[k.prev().index()];
        let excess = tk - others;
        if excess >= -EQUALITY_SLACK * ts {
            let label = match k {
                Surface::S1 => RegimeLabel::Internalize1,
                Surface::S2 => RegimeLabel::Internalize2,
                Surface::S3 => RegimeLabel::Externalize,
            };
            return TensionRegime {
                label,
                boundary: excess.abs() <= EQUALITY_SLACK * ts,
            };
        }
    }
    TensionRegime {
        label: RegimeLabel::Interior,
        boundary: false,
    }
}

pub fn classify_regime(t: &Tensions) -> Result<TensionRegime> {
    t.validate()?;
    if t.kappa != 0.0 {
        return Err(DoubletError::WrongSolver(t.kappa));
    }
    Ok(regime_of(t.surface_array()))
}

fn require_interior(t: &Tensions) -> Result<()> {
    let regime = regime_of(t.surface_array());
    if regime.is_interior() {
        Ok(())
    } else {
        Err(DoubletError::Regime {
            tensions: t.surface_array(),
            regime: regime.label.to_string(),
        })
    }
}

/// Angle differences fixed by the tension triangle (interior regime only).
///
/// Here `phi_k` is the angle in `(0, pi)` between the two caps adjacent to
/// cap `k`; for `k = 3` it equals the raw difference plus `2 pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleLaws {
    pub cos_phi: [f64; 3],
    pub sin_phi: [f64; 3],
    pub cos_half: [f64; 3],
    pub sin_half: [f64; 3],
    /// `y_k = cot(phi_k / 2)`.
    pub cot_half: [f64; 3],
    /// Circumradius of the triangle formed by the tension forces.
    pub circumradius: f64,
}

impl AngleLaws {
    pub fn phi(&self) -> [f64; 3] {
        [0, 1, 2].map(|k| self.sin_phi[k].atan2(self.cos_phi[k]))
    }
}

pub fn angle_laws(t: &Tensions) -> Result<AngleLaws> {
    t.validate()?;
    require_interior(t)?;
    let tt = t.surface_array();
    let ts = t.sum();
    // factors of Heron's product
    let a = [0, 1, 2].map(|k| {
        let k = Surface::from_index(k);
        tt[k.next().index()] + tt[k.prev().index()] - tt[k.index()]
    });
    let heron = ts * a[0] * a[1] * a[2];
    let mut laws = AngleLaws {
        cos_phi: [0.0; 3],
        sin_phi: [0.0; 3],
        cos_half: [0.0; 3],
        sin_half: [0.0; 3],
        cot_half: [0.0; 3],
        circumradius: tt[0] * tt[1] * tt[2] / heron.sqrt(),
    };
    for k in Surface::ALL {
        let (i, n, p) = (k.index(), k.next().index(), k.prev().index());
        let denom = 2.0 * tt[n] * tt[p];
        laws.cos_phi[i] = -(tt[n] * tt[n] + tt[p] * tt[p] - tt[i] * tt[i]) / denom;
        laws.sin_phi[i] = heron.sqrt() / denom;
        // (t_k + t_{k+1} - t_{k-1})(t_k + t_{k-1} - t_{k+1}) = a_{k-1} a_{k+1}
        let num = a[n] * a[p];
        laws.cos_half[i] = (num / (2.0 * denom)).sqrt();
        laws.sin_half[i] = (ts * a[i] / (2.0 * denom)).sqrt();
        laws.cot_half[i] = (num / (ts * a[i])).sqrt();
    }
    Ok(laws)
}

/// `(T_k, U_k)` of the pivot quintic.
fn quintic_parts(y_minus: f64, y_plus: f64) -> (Polynomial, Polynomial) {
    let cubed = |r: f64| Polynomial::linear_root(r).pow(3);
    let quad = |shift: f64, y: f64| {
        // (X - shift)^2 + 3/4 y^2 + 1
        Polynomial::new(vec![shift * shift + 0.75 * y * y + 1.0, -2.0 * shift, 1.0])
    };
    let t_part = &cubed(-y_minus) * &quad(1.5 * y_plus, y_plus);
    let u_part = &cubed(y_plus) * &quad(-1.5 * y_minus, y_minus);
    (t_part, u_part)
}

/// Monic quintic whose unique real root is the apex ratio `z_k` of the
/// equilibrium.
pub fn build_quintic(k: Surface, t: &Tensions, volumes: &ReducedVolumes) -> Result<Polynomial> {
    let laws = angle_laws(t)?;
    let y_minus = laws.cot_half[k.prev().index()];
    let y_plus = laws.cot_half[k.next().index()];
    let d = volumes.d(k);
    let (tp, up) = quintic_parts(y_minus, y_plus);
    Ok(&tp.scale(0.5 * (1.0 + d)) + &up.scale(0.5 * (1.0 - d)))
}

/// Coefficients of the numerator and denominator quadratics of `f`.
fn hr_coefficients(ym: f64, yp: f64) -> ([f64; 3], [f64; 3]) {
    let h = [
        yp * yp + 3.0 * ym * ym + 3.0 * yp * ym + 1.0,
        3.0 * ym * ym + yp * ym + 2.0,
        ym * ym + 1.0,
    ];
    let r = [
        yp * yp + 1.0,
        3.0 * yp * yp + yp * ym + 2.0,
        3.0 * yp * yp + ym * ym + 3.0 * yp * ym + 1.0,
    ];
    (h, r)
}

fn quad(c: [f64; 3], x: f64) -> f64 {
    (c[2] * x + c[1]) * x + c[0]
}

/// `f(xi) = xi^3 H(xi) / R(xi)`, a bijection of the real line for `y_± > 0`.
pub fn monotone_map(y_minus: f64, y_plus: f64, xi: f64) -> f64 {
    let (h, r) = hr_coefficients(y_minus, y_plus);
    xi * xi * xi * quad(h, xi) / quad(r, xi)
}

/// Closed-form derivative `f'(xi) = S(xi) / R(xi)^2` with
/// `S = 3 delta xi^2 (xi + 1)^2 ((xi + eta)^2 + theta)`.
pub fn monotone_map_derivative(y_minus: f64, y_plus: f64, xi: f64) -> f64 {
    let (ym, yp) = (y_minus, y_plus);
    let (_, r) = hr_coefficients(ym, yp);
    let delta = (ym * ym + 1.0) * (3.0 * yp * yp + ym * ym + 3.0 * yp * ym + 1.0);
    let eta = (yp * ym * (yp * yp + ym * ym + 3.0 * yp * ym) + yp * yp + ym * ym + 1.0) / delta;
    let theta = (ym + yp).powi(2)
        * (yp * yp + ym * ym + yp * ym + 1.0)
        * (2.0 * yp * yp * ym * ym + 3.0 * yp * yp + 3.0 * ym * ym + yp * ym + 3.0)
        / (delta * delta);
    let s = 3.0 * delta * xi * xi * (xi + 1.0).powi(2) * ((xi + eta).powi(2) + theta);
    let rv = quad(r, xi);
    s / (rv * rv)
}

/// Solves `f(xi) = ratio`: doubling bracket, bisection to width `1e-3`, then
/// safeguarded Newton.
pub fn solve_monotone(y_minus: f64, y_plus: f64, ratio: f64) -> Result<f64> {
    if !(y_minus > 0.0 && y_plus > 0.0) || !ratio.is_finite() {
        return Err(DoubletError::InvalidInput(format!(
            "monotone solve needs y_- > 0, y_+ > 0 and finite ratio (got {y_minus}, {y_plus}, {ratio})"
        )));
    }
    if ratio == 0.0 {
        return Ok(0.0);
    }
    let f = |xi: f64| monotone_map(y_minus, y_plus, xi) - ratio;
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let mut doublings = 0;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 || !hi.is_finite() {
            return Err(convergence("bracket (upper)", doublings, f(hi)));
        }
    }
    while f(lo) > 0.0 {
        hi = lo.min(hi);
        lo *= 2.0;
        doublings += 1;
        if doublings > 2000 || !lo.is_finite() {
            return Err(convergence("bracket (lower)", doublings, f(lo)));
        }
    }
    let mut iterations = 0;
    while hi - lo > 1e-3 * hi.abs().max(lo.abs()).max(1.0) {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let mut xi = 0.5 * (lo + hi);
    for _ in 0..200 {
        iterations += 1;
        let fx = f(xi);
        if fx == 0.0 {
            break;
        }
        if fx < 0.0 {
            lo = xi;
        } else {
            hi = xi;
        }
        let d = monotone_map_derivative(y_minus, y_plus, xi);
        let mut next = xi - fx / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let step = (next - xi).abs();
        xi = next;
        if step <= 1e-14 * xi.abs().max(1e-300) || hi - lo <= 4.0 * f64::EPSILON * xi.abs() {
            break;
        }
    }
    let residual = f(xi).abs();
    if residual > 1e-12 * ratio.abs().max(1.0) {
        return Err(convergence("monotone solve", iterations, residual));
    }
    Ok(xi)
}

fn convergence(context: &str, iterations: usize, residual: f64) -> DoubletError {
    DoubletError::Convergence {
        context: context.to_string(),
        iterations,
        residual,
    }
}

/// Interior equilibrium without line tension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorSolution {
    pub state: DoubletState,
    pub pressures: PressurePair,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SurfaceSolution {
    Interior {
        regime: TensionRegime,
        solution: InteriorSolution,
    },
    Boundary {
        regime: TensionRegime,
        boundary: BoundaryState,
    },
}

impl SurfaceSolution {
    pub fn energy(&self) -> f64 {
        match self {
            SurfaceSolution::Interior { solution, .. } => solution.energy,
            SurfaceSolution::Boundary { boundary, .. } => boundary.energy,
        }
    }

    pub fn regime(&self) -> TensionRegime {
        match self {
            SurfaceSolution::Interior { regime, .. } | SurfaceSolution::Boundary { regime, .. } => {
                *regime
            }
        }
    }

    pub fn interior(&self) -> Option<&InteriorSolution> {
        match self {
            SurfaceSolution::Interior { solution, .. } => Some(solution),
            SurfaceSolution::Boundary { .. } => None,
        }
    }
}

/// Young-Laplace pressures of a state.
pub fn pressures_of(state: &DoubletState, t: &Tensions) -> PressurePair {
    let s = state.sin();
    let y = state.y();
    PressurePair {
        p1: -2.0 * t.t1 * s[0] * y,
        p2: 2.0 * t.t2 * s[1] * y,
    }
}

/// Force-balance residuals `(sum t_k c_k + kappa y, sum t_k s_k)`.
pub fn force_balance(state: &DoubletState, t: &Tensions) -> [f64; 2] {
    let c = state.cos();
    let s = state.sin();
    let tt = t.surface_array();
    [
        tt[0] * c[0] + tt[1] * c[1] + tt[2] * c[2] + t.kappa * state.y(),
        tt[0] * s[0] + tt[1] * s[1] + tt[2] * s[2],
    ]
}

/// Equilibrium with the default pivot `k = 3`, falling back to the other
/// pivots in order of increasing `|d_k|`.
pub fn solve_surface(t: &Tensions, volumes: &ReducedVolumes) -> Result<SurfaceSolution> {
    let first = solve_surface_with_pivot(t, volumes, Surface::S3);
    if first.is_ok() || !matches!(first, Err(DoubletError::Convergence { .. } | DoubletError::Invariant(_))) {
        return first;
    }
    let mut others = [Surface::S1, Surface::S2];
    others.sort_by(|a, b| volumes.d(*a).abs().total_cmp(&volumes.d(*b).abs()));
    for k in others {
        if let Ok(sol) = solve_surface_with_pivot(t, volumes, k) {
            return Ok(sol);
        }
    }
    first
}

pub fn solve_surface_with_pivot(
    t: &Tensions,
    volumes: &ReducedVolumes,
    pivot: Surface,
) -> Result<SurfaceSolution> {
    let regime = classify_regime(t)?;
    if let Some(k) = regime.label.vanished() {
        return Ok(SurfaceSolution::Boundary {
            regime,
            boundary: degenerate_configuration(k, volumes, t),
        });
    }
    // angles are scale free; normalize for conditioning
    let tn = t.scaled(1.0 / t.max_surface());
    let laws = angle_laws(&tn)?;
    let y = laws.cot_half;
    let (k, kp, km) = (pivot.index(), pivot.next().index(), pivot.prev().index());
    let (y_minus, y_plus) = (y[km], y[kp]);
    let g = volumes.g();
    let xi = solve_monotone(y_minus, y_plus, g[km] / g[kp])?;
    let zk = (y_plus - xi * y_minus) / (1.0 + xi);
    let mut z = [0.0; 3];
    z[k] = zk;
    z[kp] = (y_minus * zk - 1.0) / (y_minus + zk);
    z[km] = (y_plus * zk + 1.0) / (y_plus - zk);
    let h = (g[k] / (cubic_q(z[kp]) - cubic_q(z[km]))).cbrt();
    let state = DoubletState::from_zh(z, h)?;

    let fb = force_balance(&state, &tn);
    let (w1, w2) = state.volumes();
    let vol_err = ((w1 - volumes.w1) / volumes.w1)
        .abs()
        .max(((w2 - volumes.w2) / volumes.w2).abs());
    let fb_err = fb[0].abs().max(fb[1].abs());
    if fb_err > 1e-10 || vol_err > 1e-10 {
        return Err(DoubletError::Invariant(format!(
            "surface solution residuals too large: force {fb_err:e}, volume {vol_err:e}"
        )));
    }
    Ok(SurfaceSolution::Interior {
        regime,
        solution: InteriorSolution {
            state,
            pressures: pressures_of(&state, t),
            energy: state.energy(t),
        },
    })
}

/// The boundary point `u_k` together with its energy.
pub fn degenerate_configuration(
    k: Surface,
    volumes: &ReducedVolumes,
    t: &Tensions,
) -> BoundaryState {
    BoundaryState::new(k, volumes, t)
}

/// Angle of 120 degrees, the equal-tension junction angle.
pub const EQUAL_TENSION_ANGLE: f64 = 2.0 * PI / 3.0;
