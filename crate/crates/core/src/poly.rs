//! Sparse real polynomials in four variables.

use crate::lin4::Vec4;
use crate::sphere::sphere_monomial_integral;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

pub type Exponent = [u8; 4];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly4 {
    terms: BTreeMap<Exponent, f64>,
}

impl Poly4 {
    pub fn zero() -> Self {
        Poly4::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial([0; 4], c)
    }

    pub fn monomial(e: Exponent, c: f64) -> Self {
        let mut p = Poly4::zero();
        p.add_term(e, c);
        p
    }

    /// The coordinate function `xᵢ` (0-based).
    pub fn var(i: usize) -> Self {
        let mut e = [0; 4];
        e[i] = 1;
        Self::monomial(e, 1.0)
    }

    /// `Σ cᵢ xᵢ`.
    pub fn linear(c: &Vec4) -> Self {
        let mut p = Poly4::zero();
        for i in 0..4 {
            p = p + Poly4::var(i) * c[i];
        }
        p
    }

    pub fn add_term(&mut self, e: Exponent, c: f64) {
        if c == 0.0 {
            return;
        }
        let v = self.terms.entry(e).or_insert(0.0);
        *v += c;
        if *v == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &f64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exponent) -> f64 {
        self.terms.get(e).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().map(|&k| k as u32).sum()).max()
    }

    pub fn eval(&self, x: &Vec4) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut v = *c;
                for i in 0..4 {
                    v *= x[i].powi(e[i] as i32);
                }
                v
            })
            .sum()
    }

    /// `∂/∂xᵢ`.
    pub fn diff(&self, i: usize) -> Self {
        let mut out = Poly4::zero();
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = *e;
                f[i] -= 1;
                out.add_term(f, c * e[i] as f64);
            }
        }
        out
    }

    /// Integral over the unit sphere S³ ⊂ R⁴ with its round measure.
    pub fn sphere_integral(&self) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * sphere_monomial_integral(e))
            .sum()
    }
}

impl Add for Poly4 {
    type Output = Poly4;
    fn add(mut self, o: Poly4) -> Poly4 {
        for (e, c) in o.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl Sub for Poly4 {
    type Output = Poly4;
    fn sub(self, o: Poly4) -> Poly4 {
        self + (-o)
    }
}

impl Neg for Poly4 {
    type Output = Poly4;
    fn neg(self) -> Poly4 {
        self * -1.0
    }
}

impl Mul<f64> for Poly4 {
    type Output = Poly4;
    fn mul(self, s: f64) -> Poly4 {
        let mut out = Poly4::zero();
        for (e, c) in self.terms {
            out.add_term(e, c * s);
        }
        out
    }
}

impl Mul<&Poly4> for &Poly4 {
    type Output = Poly4;
    fn mul(self, o: &Poly4) -> Poly4 {
        let mut out = Poly4::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3]];
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn product_and_derivative() {
        let x = Poly4::var(0);
        let y = Poly4::var(1);
        let p = &(&x * &x) * &y; // x²y
        assert_eq!(p.diff(0), (&x * &y) * 2.0);
        assert_eq!(p.diff(2), Poly4::zero());
        assert_eq!(p.degree(), Some(3));
        assert_eq!(p.eval(&Vec4::new(2.0, 3.0, 0.0, 0.0)), 12.0);
    }

    #[test]
    fn sphere_integral_of_r_squared() {
        let mut r2 = Poly4::zero();
        for i in 0..4 {
            r2 = r2 + &Poly4::var(i) * &Poly4::var(i);
        }
        assert!((r2.sphere_integral() - 2.0 * PI * PI).abs() < 1e-13);
        assert!(((&r2 * &r2).sphere_integral() - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = Poly4::var(0) - Poly4::var(0);
        assert!(p.is_zero());
    }
}
