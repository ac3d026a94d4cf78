//! Tension inference from observed geometry.
//!
//! Without line tension the junction angles fix the tensions up to scale,
//! and five equivalent closed forms are provided. With line tension the
//! tensions compatible with a fixed geometry form a two-parameter family.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, DoubletError, Result};
use crate::geometry::{DoubletState, Surface, Tensions};
use crate::line::{classify, degeneracy_epsilon, hessian_tangent, Classification, CriticalPoint};
use crate::surface::force_balance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngleLaw {
    /// `t_k` proportional to `sin(phi_k)`.
    Sine,
    PerimeterSine,
    PerimeterCosine,
    HalfAngle,
    Cotangent,
}

impl AngleLaw {
    pub const ALL: [AngleLaw; 5] = [
        AngleLaw::Sine,
        AngleLaw::PerimeterSine,
        AngleLaw::PerimeterCosine,
        AngleLaw::HalfAngle,
        AngleLaw::Cotangent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AngleLaw::Sine => "sine",
            AngleLaw::PerimeterSine => "perimeter-sine",
            AngleLaw::PerimeterCosine => "perimeter-cosine",
            AngleLaw::HalfAngle => "half-angle",
            AngleLaw::Cotangent => "cotangent",
        }
    }
}

impl fmt::Display for AngleLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AngleLaw {
    type Err = DoubletError;
    fn from_str(s: &str) -> Result<Self> {
        AngleLaw::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown law '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `t1 + t2 + t3 = 1`.
    UnitSum,
    /// `t3 = 1`.
    UnitT3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub tensions: [f64; 3],
    pub normalization: Normalization,
    /// Smallest `|sin(phi_k)|` for angle-based inference; results degrade
    /// as it approaches zero.
    pub min_sin: Option<f64>,
}

fn check_junction_angles(phi: [f64; 3]) -> Result<()> {
    if phi.iter().any(|p| !(*p > 0.0 && *p < std::f64::consts::PI)) {
        return Err(invalid(format!(
            "junction angles must lie in (0, pi) without line tension (got {phi:?})"
        )));
    }
    let sum: f64 = phi.iter().sum();
    if (sum - std::f64::consts::TAU).abs() > 1e-9 {
        return Err(invalid(format!("junction angles must sum to 2 pi (got {sum})")));
    }
    Ok(())
}

/// Tensions (with `t_s = 1`) from junction angles in `(0, pi)` summing to `2 pi`.
pub fn infer_from_angles(phi: [f64; 3], law: AngleLaw) -> Result<InferenceResult> {
    check_junction_angles(phi)?;
    let s = phi.map(f64::sin);
    let c = phi.map(f64::cos);
    let nx = |k: usize| (k + 1) % 3;
    let pv = |k: usize| (k + 2) % 3;
    let raw: [f64; 3] = match law {
        AngleLaw::Sine => s,
        AngleLaw::PerimeterSine => {
            let beta = (s[0] + s[1] - s[2]) * (s[1] + s[2] - s[0]) * (s[2] + s[0] - s[1])
                / (s[0] * s[1] * s[2]);
            [0, 1, 2].map(|k| beta / (4.0 * s[nx(k)] * s[pv(k)]))
        }
        AngleLaw::PerimeterCosine => [0, 1, 2].map(|k| {
            let (a, b) = (1.0 - c[nx(k)], 1.0 - c[pv(k)]);
            0.5 * (1.0 / a + 1.0 / b - (1.0 - c[k]) / (a * b))
        }),
        AngleLaw::HalfAngle => {
            let h = phi.map(|p| (0.5 * p).sin().powi(2));
            [0, 1, 2].map(|k| {
                let (a, b) = (h[nx(k)], h[pv(k)]);
                0.25 * (1.0 / a + 1.0 / b - h[k] / (a * b))
            })
        }
        AngleLaw::Cotangent => {
            let ct = phi.map(|p| 1.0 / (0.5 * p).tan());
            [0, 1, 2].map(|k| 0.5 * ct[k] * (ct[nx(k)] + ct[pv(k)]))
        }
    };
    let sum: f64 = raw.iter().sum();
    Ok(InferenceResult {
        tensions: raw.map(|t| t / sum),
        normalization: Normalization::UnitSum,
        min_sin: Some(s.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RadiusInference {
    Full(InferenceResult),
    /// One interface is flat; only the ratio of the other two is determined.
    Partial {
        flat: Surface,
        /// `t_{k+1} / t_{k-1}` for the flat surface `k`.
        ratio: f64,
        note: String,
    },
}

/// Tension ratios from radii and axial centers, `t_k ∝ |r_k| |C_{k+1} - C_{k-1}|`.
///
/// `None` marks a flat interface.
pub fn infer_from_radii(radii: [Option<f64>; 3], centers: [Option<f64>; 3]) -> Result<RadiusInference> {
    let flat: Vec<usize> = (0..3).filter(|&k| radii[k].is_none() || centers[k].is_none()).collect();
    if radii.iter().flatten().any(|r| *r == 0.0 || !r.is_finite()) {
        return Err(invalid("radii must be nonzero and finite"));
    }
    match flat.as_slice() {
        [] => {
            let r = radii.map(|r| r.unwrap().abs());
            let c = centers.map(Option::unwrap);
            let raw = [0, 1, 2].map(|k| r[k] * (c[(k + 1) % 3] - c[(k + 2) % 3]).abs());
            Ok(RadiusInference::Full(InferenceResult {
                tensions: raw.map(|t| t / raw[2]),
                normalization: Normalization::UnitT3,
                min_sin: None,
            }))
        }
        [k] => {
            let k = Surface::from_index(*k);
            let (n, p) = (k.next().index(), k.prev().index());
            let ratio = radii[n].unwrap().abs() / radii[p].unwrap().abs();
            Ok(RadiusInference::Partial {
                flat: k,
                ratio,
                note: format!(
                    "interface {} is flat; only t{}/t{} is determined",
                    k.label(),
                    n + 1,
                    p + 1
                ),
            })
        }
        _ => Err(invalid("at most one interface can be flat")),
    }
}

/// Apex ratios below this are treated as flat interfaces.
pub const FLAT_Z: f64 = 1e-12;

/// Radius-based inference applied to a solved state.
pub fn infer_from_state(state: &DoubletState) -> Result<RadiusInference> {
    let flat = |k: Surface| state.z_of(k).abs() < FLAT_Z;
    let radii = Surface::ALL.map(|k| state.radius(k).filter(|_| !flat(k)));
    let centers = Surface::ALL.map(|k| state.center(k).filter(|_| !flat(k)));
    infer_from_radii(radii, centers)
}

/// Tensions `(lambda t + mu sin(phi), lambda kappa)` sharing one critical geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityFamily {
    pub base: Tensions,
    pub state: DoubletState,
    /// `(sin phi1, sin phi2, sin phi3, 0)`.
    pub direction: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemberReport {
    pub lambda: f64,
    pub mu: f64,
    /// `(t1, t2, t3, kappa)` of the member.
    pub tensions: [f64; 4],
    pub positive: bool,
    /// Largest force-balance residual relative to `t_s + kappa y`.
    pub force_residual: f64,
    pub trace: f64,
    pub det: f64,
    pub classification: Option<Classification>,
}

impl MemberReport {
    pub fn is_local_min(&self) -> bool {
        self.classification == Some(Classification::LocalMin)
    }
}

pub fn ambiguity_family(point: &CriticalPoint, base: &Tensions) -> AmbiguityFamily {
    let phi = point.state.phi();
    AmbiguityFamily {
        base: *base,
        state: point.state,
        direction: [phi[0].sin(), phi[1].sin(), phi[2].sin(), 0.0],
    }
}

impl AmbiguityFamily {
    pub fn member_values(&self, lambda: f64, mu: f64) -> [f64; 4] {
        let b = [self.base.t1, self.base.t2, self.base.t3, self.base.kappa];
        [0, 1, 2, 3].map(|i| lambda * b[i] + mu * self.direction[i])
    }

    /// Lower bound on `lambda` for positive surface tensions at `mu > 0`:
    /// `lambda > -mu min_k sin(phi_k) / t_k`.
    pub fn lambda_lower_bound(&self, mu: f64) -> f64 {
        let b = self.base.surface_array();
        -mu * (0..3)
            .map(|k| self.direction[k] / b[k])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn member(&self, lambda: f64, mu: f64) -> Result<Tensions> {
        let v = self.member_values(lambda, mu);
        Tensions::new(v[0], v[1], v[2], v[3])
    }

    pub fn check(&self, lambda: f64, mu: f64) -> MemberReport {
        let v = self.member_values(lambda, mu);
        let positive = v[..3].iter().all(|t| *t > 0.0) && v[3] >= 0.0;
        let raw = Tensions {
            t1: v[0],
            t2: v[1],
            t3: v[2],
            kappa: v[3],
        };
        let fb = force_balance(&self.state, &raw);
        let scale = v[..3].iter().map(|t| t.abs()).sum::<f64>() + v[3].abs() * self.state.y();
        let (trace, det) = hessian_tangent(&self.state, &raw);
        let classification = positive.then(|| classify(trace, det, degeneracy_epsilon(&raw)));
        MemberReport {
            lambda,
            mu,
            tensions: v,
            positive,
            force_residual: fb[0].abs().max(fb[1].abs()) / scale,
            trace,
            det,
            classification,
        }
    }

    /// The `lambda = 0` member, normalized to the base surface-tension sum.
    pub fn lami_member(&self) -> [f64; 3] {
        let s = [self.direction[0], self.direction[1], self.direction[2]];
        let total: f64 = s.iter().sum();
        s.map(|v| v * self.base.sum() / total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ReducedVolumes;
    use crate::line::{find_critical_points, CriticalSearch};
    use crate::surface::{angle_laws, solve_surface};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn junction(t: &Tensions) -> [f64; 3] {
        angle_laws(t).unwrap().phi()
    }

    #[test]
    fn equal_angles() {
        let phi = [2.0 * PI / 3.0; 3];
        for law in AngleLaw::ALL {
            let r = infer_from_angles(phi, law).unwrap();
            for t in r.tensions {
                assert!((t - 1.0 / 3.0).abs() < 1e-15, "{law}");
            }
        }
    }

    #[test]
    fn right_triangle_round_trip() {
        let phi = junction(&Tensions::surface(3.0, 4.0, 5.0).unwrap());
        for law in AngleLaw::ALL {
            let r = infer_from_angles(phi, law).unwrap();
            let want = [0.25, 1.0 / 3.0, 5.0 / 12.0];
            for k in 0..3 {
                assert!((r.tensions[k] - want[k]).abs() < 1e-14, "{law}: {:?}", r.tensions);
            }
        }
    }

    #[test]
    fn flattening_angle() {
        let p1 = 179.9f64.to_radians();
        let rest = (2.0 * PI - p1) / 2.0;
        let r = infer_from_angles([p1, rest, rest], AngleLaw::Sine).unwrap();
        assert!(r.tensions[0] < 1e-3);
        assert!(r.min_sin.unwrap() < 2e-3);
    }

    #[test]
    fn rejects_bad_angles() {
        assert!(infer_from_angles([2.0, 2.0, 2.0], AngleLaw::Sine).is_err());
        assert!(infer_from_angles([3.2, 1.6, 2.0 * PI - 4.8], AngleLaw::Sine).is_err());
        assert!("nope".parse::<AngleLaw>().is_err());
        assert_eq!("half-angle".parse::<AngleLaw>().unwrap(), AngleLaw::HalfAngle);
    }

    #[test]
    fn random_round_trip_and_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let a: f64 = rng.gen_range(0.1..10.0);
            let b: f64 = rng.gen_range(0.1..10.0);
            let (lo, hi) = ((a - b).abs(), a + b);
            let t = Tensions::surface(a, b, lo + (hi - lo) * rng.gen_range(0.02..0.98)).unwrap();
            let phi = junction(&t);
            let ts = t.sum();
            for law in AngleLaw::ALL {
                let r = infer_from_angles(phi, law).unwrap();
                for k in 0..3 {
                    let want = t.surface_array()[k] / ts;
                    assert!((r.tensions[k] - want).abs() <= 1e-9 * want, "{law}");
                }
            }
        }
    }

    #[test]
    fn radius_inference() {
        let v = ReducedVolumes::new(0.4, 0.9).unwrap();
        let t = Tensions::surface(3.0, 4.0, 5.0).unwrap();
        let s = solve_surface(&t, &v).unwrap().interior().unwrap().state;
        let RadiusInference::Full(r) = infer_from_state(&s).unwrap() else { panic!() };
        for k in 0..3 {
            assert!((r.tensions[k] - t.surface_array()[k] / 5.0).abs() < 1e-8);
        }
        let RadiusInference::Full(r2) = infer_from_state(&s.scaled(7.5)).unwrap() else { panic!() };
        for k in 0..3 {
            assert!((r.tensions[k] - r2.tensions[k]).abs() < 1e-12);
        }

        let sym = solve_surface(&Tensions::surface(1.0, 1.0, 1.0).unwrap(), &ReducedVolumes::new(0.5, 0.5).unwrap())
            .unwrap()
            .interior()
            .unwrap()
            .state;
        match infer_from_state(&sym).unwrap() {
            RadiusInference::Partial { flat, ratio, .. } => {
                assert_eq!(flat, Surface::S3);
                assert!((ratio - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    fn example_minimum() -> (Tensions, ReducedVolumes, CriticalPoint) {
        let t = Tensions::new(5.0, 6.0, 4.0, 1.0).unwrap();
        let v = ReducedVolumes::new(0.75, 0.25).unwrap();
        let p = find_critical_points(&t, &v, &CriticalSearch::default())
            .unwrap()
            .into_iter()
            .find(|p| p.is_local_min())
            .unwrap();
        (t, v, p)
    }

    #[test]
    fn family_members() {
        let (t, v, p) = example_minimum();
        let fam = ambiguity_family(&p, &t);
        let id = fam.check(1.0, 0.0);
        assert_eq!(id.tensions, [5.0, 6.0, 4.0, 1.0]);
        assert!(id.is_local_min());
        let lami = fam.lami_member().map(|v| v * 21.6 / t.sum());
        let want = [4.2, 8.5, 8.9];
        for k in 0..3 {
            assert!((lami[k] - want[k]).abs() < 0.05, "{lami:?}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let mu = rng.gen_range(-3.0..3.0);
            let lambda = rng.gen_range(0.0..3.0);
            let r = fam.check(lambda, mu);
            if r.positive {
                assert!(r.force_residual < 1e-10);
            }
        }
        // pure scaling keeps the geometry
        let t2 = fam.member(2.0, 0.0).unwrap();
        let again = find_critical_points(&t2, &v, &CriticalSearch::default()).unwrap();
        let m = again.iter().find(|q| q.is_local_min()).unwrap();
        for k in 0..3 {
            assert!((m.state.z()[k] - p.state.z()[k]).abs() < 1e-10);
        }
        // a generic member still has the frozen geometry as a critical point
        let (lambda, mu) = (0.7, 1.3);
        assert!(lambda > fam.lambda_lower_bound(mu));
        let tg = fam.member(lambda, mu).unwrap();
        let pts = find_critical_points(&tg, &v, &CriticalSearch::default()).unwrap();
        assert!(pts.iter().any(|q| (0..3).all(|k| (q.state.z()[k] - p.state.z()[k]).abs() < 1e-8)
            && (q.state.y() - p.state.y()).abs() < 1e-8));
    }
}
