//! Doublet with prescribed pressures and no line tension.
//!
//! For positive pressures the configuration is unique and given in closed
//! form. Each apex solves a Young-Laplace quadratic; the selected root is
//! evaluated in whichever algebraic form avoids cancellation, so the flat
//! interface limit `P1 -> P2` needs no special case.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, DoubletError, Result};
use crate::geometry::{state_from_xh, DoubletState, PressurePair, Tensions};
use crate::surface::regime_of;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureProblem {
    pub tensions: Tensions,
    pub pressures: PressurePair,
}

impl PressureProblem {
    pub fn new(tensions: Tensions, p1: f64, p2: f64) -> Result<Self> {
        let problem = PressureProblem {
            tensions,
            pressures: PressurePair { p1, p2 },
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        self.tensions.validate()?;
        if self.tensions.kappa != 0.0 {
            return Err(DoubletError::WrongSolver(self.tensions.kappa));
        }
        let PressurePair { p1, p2 } = self.pressures;
        if !(p1 > 0.0 && p1.is_finite() && p2 > 0.0 && p2.is_finite()) {
            return Err(invalid(format!(
                "pressures must be positive and finite (got {p1}, {p2})"
            )));
        }
        let regime = regime_of(self.tensions.surface_array());
        if !regime.is_interior() {
            return Err(DoubletError::NoConfiguration(format!(
                "tensions violate the strict triangle inequalities ({})",
                regime.label
            )));
        }
        Ok(())
    }
}

/// `Delta = sqrt((P1 t2 - P2 t1)^2 + P1 P2 (t1 - t2 + t3)(t2 - t1 + t3))`.
pub fn discriminant_delta(t: &Tensions, p1: f64, p2: f64) -> f64 {
    let a = p1 * t.t2 - p2 * t.t1;
    (a * a + p1 * p2 * (t.t1 - t.t2 + t.t3) * (t.t2 - t.t1 + t.t3)).sqrt()
}

/// Root of `P x^2 - 4 t x + P h^2 = 0` written as `(2t - s) / P` with
/// `s = sqrt(4 t^2 - P^2 h^2)` carrying a sign.
fn young_laplace_root(t: f64, p: f64, s: f64, h2: f64) -> f64 {
    if s > 0.0 {
        p * h2 / (2.0 * t + s)
    } else {
        (2.0 * t - s) / p
    }
}

/// Terms `(h^2, A1/Delta, A2/Delta, B/Delta)` of the closed form.
pub(crate) fn closed_form_terms(t: &Tensions, p1: f64, p2: f64) -> (f64, f64, f64, f64) {
    let (t1, t2, t3) = (t.t1, t.t2, t.t3);
    let delta = discriminant_delta(t, p1, p2);
    let h2 = t.sum() * (t2 + t3 - t1) * (t3 + t1 - t2) * (t1 + t2 - t3) / (delta * delta);
    let c3 = t1 * t1 + t2 * t2 - t3 * t3;
    let a1 = p1 * c3 - 2.0 * p2 * t1 * t1;
    let a2 = p2 * c3 - 2.0 * p1 * t2 * t2;
    let b = p1 * (t2 * t2 + t3 * t3 - t1 * t1) + p2 * (t1 * t1 + t3 * t3 - t2 * t2);
    (h2, a1 / delta, a2 / delta, b / delta)
}

/// The unique equilibrium for the given pressures.
pub fn solve_pressure(problem: &PressureProblem) -> Result<DoubletState> {
    problem.validate()?;
    let t = &problem.tensions;
    let PressurePair { p1, p2 } = problem.pressures;
    let (h2, s1, s2, s3) = closed_form_terms(t, p1, p2);
    // cap 1 bulges toward negative x: mirror its quadratic
    let x1 = -young_laplace_root(t.t1, p1, s1, h2);
    let x2 = young_laplace_root(t.t2, p2, s2, h2);
    let x3 = if p1 == p2 {
        0.0
    } else {
        young_laplace_root(t.t3, p1 - p2, s3, h2)
    };
    let h = h2.sqrt();
    let state = state_from_xh([x1, x2, x3], h).map_err(|e| {
        DoubletError::Invariant(format!("closed-form pressure solution is not ordered: {e}"))
    })?;
    Ok(state)
}
