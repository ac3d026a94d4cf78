//! Dense real polynomials with Sturm-sequence root counting.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Polynomial with `f64` coefficients, stored in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `X - root`.
    pub fn linear_root(root: f64) -> Self {
        Self::new(vec![-root, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::constant(0.0);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(1.0), |acc, _| &acc * self)
    }

    /// `p(a X)`, a rescaling of the variable.
    pub fn compose_scale(&self, a: f64) -> Self {
        let mut f = 1.0;
        Self::new(
            self.coeffs
                .iter()
                .map(|&c| {
                    let v = c * f;
                    f *= a;
                    v
                })
                .collect(),
        )
    }

    fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn normalized(&self) -> Self {
        let m = self.max_abs();
        if m == 0.0 {
            self.clone()
        } else {
            self.scale(1.0 / m)
        }
    }

    /// Remainder of the Euclidean division by `d`; coefficients below
    /// `tol * max|self|` are flushed to zero.
    fn rem_with_tol(&self, d: &Polynomial, tol: f64) -> Polynomial {
        let scale = self.max_abs();
        let mut r = self.coeffs.clone();
        let dd = d.degree();
        let lead = d.leading();
        while r.len() > dd && r.len() > 1 {
            let shift = r.len() - 1 - dd;
            let q = r[r.len() - 1] / lead;
            for (i, &dc) in d.coeffs.iter().enumerate() {
                r[shift + i] -= q * dc;
            }
            r.pop();
        }
        for c in r.iter_mut() {
            if c.abs() <= tol * scale {
                *c = 0.0;
            }
        }
        Polynomial::new(r)
    }

    /// Sturm sequence `p, p', -rem(p, p'), ...`, each term rescaled to unit
    /// max-coefficient (positive scaling keeps the sign pattern).
    pub fn sturm_sequence(&self) -> Vec<Polynomial> {
        const TOL: f64 = 1e-11;
        let mut seq = vec![self.normalized()];
        let d = self.derivative();
        if d.is_zero() {
            return seq;
        }
        seq.push(d.normalized());
        loop {
            let n = seq.len();
            let r = seq[n - 2].rem_with_tol(&seq[n - 1], TOL);
            if r.is_zero() {
                break;
            }
            seq.push((-r).normalized());
            if seq.last().unwrap().degree() == 0 {
                break;
            }
        }
        seq
    }

    /// Number of distinct real roots, counted with a Sturm sequence.
    pub fn count_real_roots(&self) -> usize {
        let seq = self.sturm_sequence();
        let at_pos: Vec<f64> = seq.iter().map(|p| p.leading()).collect();
        let at_neg: Vec<f64> = seq
            .iter()
            .map(|p| if p.degree() % 2 == 0 { p.leading() } else { -p.leading() })
            .collect();
        sign_changes(&at_neg).saturating_sub(sign_changes(&at_pos))
    }

    /// Number of distinct real roots in `(a, b]`.
    pub fn count_roots_in(&self, a: f64, b: f64) -> usize {
        let seq = self.sturm_sequence();
        let va: Vec<f64> = seq.iter().map(|p| p.eval(a)).collect();
        let vb: Vec<f64> = seq.iter().map(|p| p.eval(b)).collect();
        sign_changes(&va).saturating_sub(sign_changes(&vb))
    }

    /// Cauchy bound: every root satisfies `|x| <= bound`.
    pub fn root_bound(&self) -> f64 {
        let lead = self.leading().abs();
        1.0 + self.coeffs[..self.degree()]
            .iter()
            .fold(0.0f64, |m, c| m.max(c.abs() / lead))
    }

    /// Bisection on a sign change of `p` in `[a, b]`.
    pub fn bisect_root(&self, mut a: f64, mut b: f64) -> Option<f64> {
        let mut fa = self.eval(a);
        let fb = self.eval(b);
        if fa == 0.0 {
            return Some(a);
        }
        if fb == 0.0 {
            return Some(b);
        }
        if fa.signum() == fb.signum() {
            return None;
        }
        for _ in 0..2000 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = self.eval(m);
            if fm == 0.0 {
                return Some(m);
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        Some(0.5 * (a + b))
    }

    /// All real roots, isolated by Sturm counts and refined by bisection.
    pub fn real_roots(&self) -> Vec<f64> {
        let bound = self.root_bound();
        let mut out = Vec::new();
        self.isolate(-bound, bound, &mut out, 0);
        out
    }

    fn isolate(&self, a: f64, b: f64, out: &mut Vec<f64>, depth: usize) {
        let n = self.count_roots_in(a, b);
        if n == 0 {
            return;
        }
        if n == 1 || depth > 200 {
            if let Some(r) = self.bisect_root(a, b) {
                out.push(r);
            }
            return;
        }
        let m = 0.5 * (a + b);
        self.isolate(a, m, out, depth + 1);
        self.isolate(m, b, out, depth + 1);
    }
}

fn sign_changes(values: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut n = 0;
    for &v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            n += 1;
        }
        last = v;
    }
    n
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut c = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Polynomial::new(c)
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(0.0)
                        + rhs.coeffs.get(i).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs.clone())
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0.0 && self.degree() > 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}·X")?,
                _ => write!(f, "{c}·X^{i}")?,
            }
        }
        Ok(())
    }
}
