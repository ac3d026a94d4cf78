//! Configuration representations shared by every solver.
//!
//! A doublet is described by three spherical caps sharing the junction
//! circle of radius `h`. Cap `k` has its apex at `x_k` on the symmetry axis;
//! caps 1 and 2 bound the two cells and cap 3 is the interface between them.
//! The canonical dimensionless form stores `z_k = x_k / h` together with
//! `y = 1 / h`, with the convention `h > 0`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, DoubletError, Result};

/// One of the three spherical caps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Surface {
    /// Outer surface of cell 1.
    S1,
    /// Outer surface of cell 2.
    S2,
    /// Interface between the cells.
    S3,
}

impl Surface {
    pub const ALL: [Surface; 3] = [Surface::S1, Surface::S2, Surface::S3];

    /// Zero-based position of the surface.
    pub fn index(self) -> usize {
        match self {
            Surface::S1 => 0,
            Surface::S2 => 1,
            Surface::S3 => 2,
        }
    }

    pub fn from_index(i: usize) -> Surface {
        Surface::ALL[i % 3]
    }

    /// Parses the 1-based label used in formulas and on the command line.
    pub fn from_label(k: usize) -> Result<Surface> {
        match k {
            1 => Ok(Surface::S1),
            2 => Ok(Surface::S2),
            3 => Ok(Surface::S3),
            _ => Err(invalid(format!("surface index must be 1, 2 or 3 (got {k})"))),
        }
    }

    pub fn label(self) -> usize {
        self.index() + 1
    }

    /// Cyclic successor (`k + 1` modulo 3).
    pub fn next(self) -> Surface {
        Surface::from_index(self.index() + 1)
    }

    /// Cyclic predecessor (`k - 1` modulo 3).
    pub fn prev(self) -> Surface {
        Surface::from_index(self.index() + 2)
    }
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Surface tensions of the three caps and the line tension of the junction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tensions {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub kappa: f64,
}

impl Tensions {
    pub fn new(t1: f64, t2: f64, t3: f64, kappa: f64) -> Result<Self> {
        let t = Tensions { t1, t2, t3, kappa };
        t.validate()?;
        Ok(t)
    }

    /// Tensions without line tension.
    pub fn surface(t1: f64, t2: f64, t3: f64) -> Result<Self> {
        Self::new(t1, t2, t3, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.t1, self.t2, self.t3, self.kappa];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid(format!("tensions must be finite: {all:?}")));
        }
        if self.t1 <= 0.0 || self.t2 <= 0.0 || self.t3 <= 0.0 {
            return Err(invalid(format!(
                "surface tensions must be positive: ({}, {}, {})",
                self.t1, self.t2, self.t3
            )));
        }
        if self.kappa < 0.0 {
            return Err(invalid(format!("line tension must be nonnegative: {}", self.kappa)));
        }
        Ok(())
    }

    pub fn surface_array(&self) -> [f64; 3] {
        [self.t1, self.t2, self.t3]
    }

    pub fn get(&self, k: Surface) -> f64 {
        self.surface_array()[k.index()]
    }

    /// `t_s = t1 + t2 + t3`.
    pub fn sum(&self) -> f64 {
        self.t1 + self.t2 + self.t3
    }

    pub fn max_surface(&self) -> f64 {
        self.t1.max(self.t2).max(self.t3)
    }

    pub fn with_kappa(&self, kappa: f64) -> Tensions {
        Tensions { kappa, ..*self }
    }

    /// Multiplies all four tensions by `factor`.
    pub fn scaled(&self, factor: f64) -> Tensions {
        Tensions {
            t1: self.t1 * factor,
            t2: self.t2 * factor,
            t3: self.t3 * factor,
            kappa: self.kappa * factor,
        }
    }

    pub fn from_array(t: [f64; 3], kappa: f64) -> Result<Self> {
        Self::new(t[0], t[1], t[2], kappa)
    }
}

/// Reduced volumes `w_k = 6 v_k / pi` of the two cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedVolumes {
    pub w1: f64,
    pub w2: f64,
}

impl ReducedVolumes {
    pub fn new(w1: f64, w2: f64) -> Result<Self> {
        if !(w1.is_finite() && w2.is_finite()) || w1 <= 0.0 || w2 <= 0.0 {
            return Err(invalid(format!("volumes must be positive and finite: ({w1}, {w2})")));
        }
        Ok(ReducedVolumes { w1, w2 })
    }

    /// From physical volumes `v1, v2`.
    pub fn from_physical(v1: f64, v2: f64) -> Result<Self> {
        Self::new(6.0 * v1 / PI, 6.0 * v2 / PI)
    }

    pub fn w3(&self) -> f64 {
        self.w1 + self.w2
    }

    /// Signed volume weights `(g1, g2, g3) = (w2, w1, -w3)`; they sum to zero.
    pub fn g(&self) -> [f64; 3] {
        [self.w2, self.w1, -self.w3()]
    }

    /// `d_k = (g_{k-1} - g_{k+1}) / (g_{k-1} + g_{k+1})`.
    pub fn d(&self, k: Surface) -> f64 {
        let g = self.g();
        let gm = g[k.prev().index()];
        let gp = g[k.next().index()];
        (gm - gp) / (gm + gp)
    }

    pub fn scaled(&self, factor: f64) -> ReducedVolumes {
        ReducedVolumes {
            w1: self.w1 * factor,
            w2: self.w2 * factor,
        }
    }
}

/// Relative cell pressures (Lagrange multipliers of the volume constraints).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressurePair {
    pub p1: f64,
    pub p2: f64,
}

impl PressurePair {
    /// Pressure jump across the interface.
    pub fn p3(&self) -> f64 {
        self.p1 - self.p2
    }
}

/// Unique real root of `z (z^2 + 3) = 2 q`.
pub fn cap_root(q: f64) -> f64 {
    let z = 2.0 * (q.asinh() / 3.0).sinh();
    if !z.is_finite() || z == 0.0 {
        return z;
    }
    // one Newton polish on the cubic
    let f = z * (z * z + 3.0) - 2.0 * q;
    let polished = z - f / (3.0 * (z * z + 1.0));
    if polished.is_finite() {
        polished
    } else {
        z
    }
}

/// `q(z) = z (z^2 + 3)`, the cubic appearing in every volume formula.
#[inline]
pub fn cubic_q(z: f64) -> f64 {
    z * (z * z + 3.0)
}

/// Canonical doublet configuration with `h > 0`.
///
/// Stores the apex ratios `z_k` and the junction radius; everything else is
/// derived on demand. The angle differences `phi_k = alpha_{k+1} - alpha_{k-1}`
/// are raw (unwrapped) so a bulged junction with `phi_k > pi` stays
/// representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubletState {
    z: [f64; 3],
    h: f64,
}

impl DoubletState {
    /// Builds a state from apex ratios and inverse junction radius `y = 1/h`.
    pub fn from_zy(z: [f64; 3], y: f64) -> Result<Self> {
        if !(y.is_finite() && y > 0.0) {
            return Err(invalid(format!("inverse junction radius must be positive: {y}")));
        }
        Self::from_zh(z, 1.0 / y)
    }

    pub fn from_zh(z: [f64; 3], h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(invalid(format!("junction radius must be positive: {h}")));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(invalid(format!("apex ratios must be finite: {z:?}")));
        }
        if !(z[0] < z[2] && z[2] < z[1]) {
            return Err(invalid(format!("apex ordering z1 < z3 < z2 violated: {z:?}")));
        }
        Ok(DoubletState { z, h })
    }

    pub fn z(&self) -> [f64; 3] {
        self.z
    }

    pub fn z_of(&self, k: Surface) -> f64 {
        self.z[k.index()]
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn y(&self) -> f64 {
        1.0 / self.h
    }

    pub fn x(&self) -> [f64; 3] {
        self.z.map(|z| z * self.h)
    }

    /// Cap angles `alpha_k = 2 atan z_k` in `(-pi, pi)`.
    pub fn alpha(&self) -> [f64; 3] {
        self.z.map(|z| 2.0 * z.atan())
    }

    /// `c_k = cos alpha_k`, evaluated rationally from `z_k`.
    pub fn cos(&self) -> [f64; 3] {
        self.z.map(|z| {
            if z.abs() > 1e150 {
                -1.0
            } else {
                (1.0 - z * z) / (1.0 + z * z)
            }
        })
    }

    /// `s_k = sin alpha_k`, evaluated rationally from `z_k`.
    pub fn sin(&self) -> [f64; 3] {
        self.z.map(|z| {
            if z.abs() > 1e150 {
                2.0 / z
            } else {
                2.0 * z / (1.0 + z * z)
            }
        })
    }

    /// Raw angle differences `phi_k = alpha_{k+1} - alpha_{k-1}`; they sum to zero.
    pub fn phi(&self) -> [f64; 3] {
        let a = self.alpha();
        [a[1] - a[2], a[2] - a[0], a[0] - a[1]]
    }

    /// The three angles between adjacent caps at the junction, summing to `2 pi`:
    /// `(phi_1, phi_2, phi_3 + 2 pi)`.
    pub fn junction_angles(&self) -> [f64; 3] {
        let p = self.phi();
        [p[0], p[1], p[2] + 2.0 * PI]
    }

    /// Signed radius `r_k = h / s_k`; `None` for a flat cap.
    pub fn radius(&self, k: Surface) -> Option<f64> {
        let s = self.sin()[k.index()];
        (s != 0.0).then(|| self.h / s)
    }

    /// Axial position of the sphere center, `C_k = (x_k^2 - h^2) / (2 x_k)`;
    /// `None` for a flat cap.
    pub fn center(&self, k: Surface) -> Option<f64> {
        let x = self.z[k.index()] * self.h;
        (x != 0.0).then(|| (x * x - self.h * self.h) / (2.0 * x))
    }

    /// Volumes `(w1, w2)` enclosed by this configuration.
    pub fn volumes(&self) -> (f64, f64) {
        volumes_xh(self.x(), self.h)
    }

    pub fn energy(&self, t: &Tensions) -> f64 {
        energy_xh(self.x(), self.h, t)
    }

    /// Same configuration with every length multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> DoubletState {
        DoubletState {
            z: self.z,
            h: self.h * factor,
        }
    }
}

/// Builds the canonical state from apex positions and junction radius.
pub fn state_from_xh(x: [f64; 3], h: f64) -> Result<DoubletState> {
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid(format!("junction radius must be positive: {h}")));
    }
    if !(x[0] < x[2] && x[2] < x[1]) {
        return Err(invalid(format!("apex ordering x1 < x3 < x2 violated: {x:?}")));
    }
    DoubletState::from_zh(x.map(|v| v / h), h)
}

/// Inverse of [`state_from_xh`].
pub fn xh_from_state(state: &DoubletState) -> ([f64; 3], f64) {
    (state.x(), state.h())
}

/// Reduced volumes of the two cells for apex positions `x` and junction radius `h`.
pub fn volumes_xh(x: [f64; 3], h: f64) -> (f64, f64) {
    let h2 = 3.0 * h * h;
    let v = |xk: f64| xk * (h2 + xk * xk);
    (v(x[2]) - v(x[0]), v(x[1]) - v(x[2]))
}

/// `E = pi (t1 x1^2 + t2 x2^2 + t3 x3^2 + t_s h^2 + 2 kappa |h|)`.
pub fn energy_xh(x: [f64; 3], h: f64, t: &Tensions) -> f64 {
    PI * (t.t1 * x[0] * x[0]
        + t.t2 * x[1] * x[1]
        + t.t3 * x[2] * x[2]
        + t.sum() * h * h
        + 2.0 * t.kappa * h.abs())
}

/// `h Z(q / (2 h^3))`, continuous down to `h = 0` where it becomes `cbrt(q)`.
fn scaled_cap_root(q: f64, h: f64) -> f64 {
    if h == 0.0 {
        return q.cbrt();
    }
    let arg = q / (2.0 * h * h * h);
    if !arg.is_finite() || arg.abs() > 1e30 {
        q.cbrt()
    } else {
        h * cap_root(arg)
    }
}

/// Completes `(x3, h)` to a point of the constraint manifold: returns
/// `(x1, x2, x3)` with the prescribed volumes. Accepts `h >= 0`.
pub fn lift_x3(x3: f64, h: f64, volumes: &ReducedVolumes) -> [f64; 3] {
    let h = h.abs();
    let base = x3 * (3.0 * h * h + x3 * x3);
    let x1 = scaled_cap_root(base - volumes.w1, h);
    let x2 = scaled_cap_root(base + volumes.w2, h);
    [x1, x2, x3]
}

/// Point of the constraint manifold parameterized by the interface apex `x3`
/// and the junction radius `h > 0`.
pub fn parameterize_manifold(x3: f64, h: f64, volumes: &ReducedVolumes) -> Result<DoubletState> {
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid(format!("junction radius must be positive: {h}")));
    }
    state_from_xh(lift_x3(x3, h, volumes), h)
}

/// Energy (divided by pi) along the `h = 0` curve, as a function of `x = x3^3`.
pub fn boundary_psi(x: f64, t: &Tensions, volumes: &ReducedVolumes) -> f64 {
    let p = |v: f64| (v * v).cbrt();
    t.t1 * p(x - volumes.w1) + t.t2 * p(x + volumes.w2) + t.t3 * p(x)
}

/// Degenerate configuration with `h = 0` where surface `which` has vanished.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryState {
    pub which: Surface,
    /// Apex positions; `x[which] == 0`.
    pub x: [f64; 3],
    pub energy: f64,
}

impl BoundaryState {
    /// The points `u1` (cell 1 engulfed), `u2` (cell 2 engulfed) and `u3`
    /// (separated cells).
    pub fn new(which: Surface, volumes: &ReducedVolumes, t: &Tensions) -> BoundaryState {
        let (w1, w2, w3) = (volumes.w1, volumes.w2, volumes.w3());
        let x = match which {
            Surface::S1 => [0.0, w3.cbrt(), w1.cbrt()],
            Surface::S2 => [-w3.cbrt(), 0.0, -w2.cbrt()],
            Surface::S3 => [-w1.cbrt(), w2.cbrt(), 0.0],
        };
        BoundaryState {
            which,
            x,
            energy: boundary_energy(which, t, volumes),
        }
    }

    pub fn all(volumes: &ReducedVolumes, t: &Tensions) -> [BoundaryState; 3] {
        Surface::ALL.map(|k| BoundaryState::new(k, volumes, t))
    }
}

/// Energy at the boundary point `u_k`.
pub fn boundary_energy(which: Surface, t: &Tensions, volumes: &ReducedVolumes) -> f64 {
    let p = |v: f64| (v * v).cbrt();
    let (w1, w2, w3) = (volumes.w1, volumes.w2, volumes.w3());
    PI * match which {
        Surface::S1 => t.t2 * p(w3) + t.t3 * p(w1),
        Surface::S2 => t.t1 * p(w3) + t.t3 * p(w2),
        Surface::S3 => t.t1 * p(w1) + t.t2 * p(w2),
    }
}

/// Scale-free parameters of the line-tension problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedVariables {
    /// Volume asymmetry `(w2 - w1) / w3`.
    pub w: f64,
    /// `tau_k = t_k w3^{1/3} / kappa`.
    pub tau: [f64; 3],
}

pub fn reduced_variables(t: &Tensions, volumes: &ReducedVolumes) -> Result<ReducedVariables> {
    if t.kappa == 0.0 {
        return Err(DoubletError::UndefinedReducedTension);
    }
    let l = volumes.w3().cbrt();
    Ok(ReducedVariables {
        w: (volumes.w2 - volumes.w1) / volumes.w3(),
        tau: t.surface_array().map(|tk| tk * l / t.kappa),
    })
}

/// `rho = y w3^{1/3}`.
pub fn reduced_inverse_radius(y: f64, volumes: &ReducedVolumes) -> f64 {
    y * volumes.w3().cbrt()
}
