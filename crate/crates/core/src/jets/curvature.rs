use super::QuadJet;
use crate::lin4::{split_basis, Mat3, Mat4, Mat6, FORM_PAIRS};
use std::ops::{Add, Mul, Sub};

/// Einstein tolerance on `|Ric − Λ euc|`, relative to `max(1, |Ric|)`.
pub const EINSTEIN_TOL: f64 = 1e-10;

/// `R_{abcd}` with `R_{abab}` the sectional curvature of the `(a, b)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureTensor {
    r: [f64; 256],
}

#[inline]
fn idx(a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * 4 + b) * 4 + c) * 4 + d
}

impl CurvatureTensor {
    pub const fn zero() -> Self {
        CurvatureTensor { r: [0.0; 256] }
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut r = [0.0; 256];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        r[idx(a, b, c, d)] = f(a, b, c, d);
                    }
                }
            }
        }
        CurvatureTensor { r }
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.r[idx(a, b, c, d)]
    }

    pub fn max_abs(&self) -> f64 {
        self.r.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Ric_{bd} = g^{ac} R_{abcd}`.
    pub fn ricci_with(&self, ginv: &Mat4) -> Mat4 {
        Mat4::from_fn(|b, d| {
            let mut s = 0.0;
            for a in 0..4 {
                for c in 0..4 {
                    s += ginv[(a, c)] * self.get(a, b, c, d);
                }
            }
            s
        })
    }

    /// Ricci tensor in an orthonormal frame.
    pub fn ricci(&self) -> Mat4 {
        self.ricci_with(&Mat4::identity())
    }

    pub fn scal(&self) -> f64 {
        self.ricci().trace()
    }

    /// Largest violation of the antisymmetries, pair symmetry and first
    /// Bianchi identity.
    pub fn identity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let v = self.get(a, b, c, d);
                        worst = worst
                            .max((v + self.get(b, a, c, d)).abs())
                            .max((v + self.get(a, b, d, c)).abs())
                            .max((v - self.get(c, d, a, b)).abs())
                            .max((v + self.get(a, c, d, b) + self.get(a, d, b, c)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Components `R(e_k, e_m)` on the 2-form basis.
    pub fn form2_matrix(&self) -> Mat6 {
        Mat6::from_fn(|k, m| {
            let (a, b) = FORM_PAIRS[k];
            let (c, d) = FORM_PAIRS[m];
            self.get(a, b, c, d)
        })
    }

    /// Rewrites the tensor in the frame `e'_a = Σ_p A_{pa} e_p`.
    pub fn transform(&self, a: &Mat4) -> Self {
        let mut t = self.r;
        for slot in 0..4 {
            let mut u = [0.0; 256];
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            let mut s = 0.0;
                            for p in 0..4 {
                                let (src, coef) = match slot {
                                    0 => (idx(p, j, k, l), a[(p, i)]),
                                    1 => (idx(i, p, k, l), a[(p, j)]),
                                    2 => (idx(i, j, p, l), a[(p, k)]),
                                    _ => (idx(i, j, k, p), a[(p, l)]),
                                };
                                s += coef * t[src];
                            }
                            u[idx(i, j, k, l)] = s;
                        }
                    }
                }
            }
            t = u;
        }
        CurvatureTensor { r: t }
    }
}

impl Add for CurvatureTensor {
    type Output = CurvatureTensor;
    fn add(mut self, o: CurvatureTensor) -> CurvatureTensor {
        for (x, y) in self.r.iter_mut().zip(o.r) {
            *x += y;
        }
        self
    }
}

impl Sub for CurvatureTensor {
    type Output = CurvatureTensor;
    fn sub(self, o: CurvatureTensor) -> CurvatureTensor {
        self + o * -1.0
    }
}

impl Mul<f64> for CurvatureTensor {
    type Output = CurvatureTensor;
    fn mul(mut self, s: f64) -> CurvatureTensor {
        for x in self.r.iter_mut() {
            *x *= s;
        }
        self
    }
}

/// Curvature at the origin of `euc + H`.
///
/// With `∂_a∂_b g_{cd}(0) = 2 H_{abcd}` and vanishing first derivatives,
/// `R_{abcd} = ½(g_{ad,bc} + g_{bc,ad} − g_{ac,bd} − g_{bd,ac})`.
pub fn curvature_at_origin(h: &QuadJet) -> CurvatureTensor {
    CurvatureTensor::from_fn(|a, b, c, d| {
        h.get(b, c, a, d) + h.get(a, d, b, c) - h.get(a, c, b, d) - h.get(b, d, a, c)
    })
}

/// The curvature operator on 2-forms, in the orthonormal basis
/// `(ω₁, ω₂, ω₃, ω₁⁻, ω₂⁻, ω₃⁻)/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureOperator {
    pub matrix: Mat6,
}

impl CurvatureOperator {
    fn block(&self, r: usize, c: usize) -> Mat3 {
        Mat3::from_fn(|i, j| self.matrix[(r + i, c + j)])
    }

    /// `R⁺ = Scal/12 + W₊`, acting on `(I₁, I₂, I₃)`.
    pub fn rplus(&self) -> Mat3 {
        self.block(0, 0)
    }

    pub fn rminus(&self) -> Mat3 {
        self.block(3, 3)
    }

    /// Off-diagonal block, the trace-free Ricci part.
    pub fn ric0(&self) -> Mat3 {
        self.block(0, 3)
    }

    pub fn scal(&self) -> f64 {
        2.0 * self.matrix.trace()
    }

    pub fn wplus(&self) -> Mat3 {
        let a = self.rplus();
        a - Mat3::identity() * (a.trace() / 3.0)
    }

    pub fn wminus(&self) -> Mat3 {
        let c = self.rminus();
        c - Mat3::identity() * (c.trace() / 3.0)
    }

    pub fn asymmetry(&self) -> f64 {
        (self.matrix - self.matrix.transpose()).amax()
    }
}

pub fn curvature_operator(r: &CurvatureTensor) -> CurvatureOperator {
    let s = split_basis();
    CurvatureOperator {
        matrix: s.transpose() * r.form2_matrix() * s,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EinsteinCheck {
    pub is_einstein: bool,
    pub lambda: f64,
    pub ricci: Mat4,
    pub defect: f64,
}

/// Tests `Ric(H) = Λ euc` at the origin.
pub fn einstein_check(h: &QuadJet) -> EinsteinCheck {
    let ric = curvature_at_origin(h).ricci();
    let lambda = ric.trace() / 4.0;
    let defect = (ric - Mat4::identity() * lambda).amax();
    EinsteinCheck {
        is_einstein: defect <= EINSTEIN_TOL * ric.amax().max(1.0),
        lambda,
        ricci: ric,
        defect,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{complex_hyperbolic_jet, delta_star, real_hyperbolic_jet, CubicVectorField};
    use crate::lin4::{lambda2, sp1_rotation, GaugeElement, Vec3};
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn jet_from(vals: &[f64]) -> QuadJet {
        QuadJet::from_vector(&DVector::from_column_slice(vals))
    }

    fn rotation_from(vals: &[f64]) -> Mat4 {
        let m = Mat4::from_iterator(vals.iter().copied());
        let qr = m.qr();
        let mut q = qr.q();
        if q.determinant() < 0.0 {
            q.column_mut(0).neg_mut();
        }
        q
    }

    /// Second derivatives of the metric by finite differences of the
    /// polynomial, then the coordinate formula.
    fn curvature_oracle(h: &QuadJet) -> CurvatureTensor {
        let eps = 1e-2;
        let g = |x: nalgebra::Vector4<f64>| h.metric(&x);
        let e = |i: usize| {
            let mut v = nalgebra::Vector4::zeros();
            v[i] = eps;
            v
        };
        let d2 = |a: usize, b: usize, c: usize, d: usize| {
            let o = nalgebra::Vector4::zeros();
            let f = |x| g(x)[(c, d)];
            (f(o + e(a) + e(b)) - f(o + e(a) - e(b)) - f(o - e(a) + e(b)) + f(o - e(a) - e(b)))
                / (4.0 * eps * eps)
        };
        CurvatureTensor::from_fn(|a, b, c, d| {
            0.5 * (d2(b, c, a, d) + d2(a, d, b, c) - d2(a, c, b, d) - d2(b, d, a, c))
        })
    }

    #[test]
    fn zero_jet_is_flat() {
        assert_eq!(curvature_at_origin(&QuadJet::zero()), CurvatureTensor::zero());
        let op = curvature_operator(&CurvatureTensor::zero());
        assert_eq!(op.matrix, Mat6::zeros());
    }

    #[test]
    fn coordinate_formula_matches_difference_oracle() {
        let h = jet_from(&(0..100).map(|k| (k as f64 * 0.91).sin()).collect::<Vec<_>>());
        let diff = (curvature_at_origin(&h) - curvature_oracle(&h)).max_abs();
        assert!(diff < 1e-9, "{diff}");
    }

    #[test]
    fn real_hyperbolic_has_sectional_curvature_minus_one() {
        let r = curvature_at_origin(&real_hyperbolic_jet());
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    assert!((r.get(a, b, a, b) + 1.0).abs() < 1e-14);
                }
            }
        }
        let op = curvature_operator(&r);
        assert!((op.rplus() + Mat3::identity()).amax() < 1e-14);
        assert!((op.rminus() + Mat3::identity()).amax() < 1e-14);
        assert!(op.ric0().amax() < 1e-14);
        assert!((op.scal() + 12.0).abs() < 1e-13);
    }

    #[test]
    fn complex_hyperbolic_operator() {
        let h = complex_hyperbolic_jet();
        let op = curvature_operator(&curvature_at_origin(&h));
        let expected = Mat3::from_diagonal(&Vec3::new(-1.5, 0.0, 0.0));
        assert!((op.rplus() - expected).amax() < 1e-14, "{}", op.rplus());
        assert!((op.scal() + 6.0).abs() < 1e-13);
        assert!(op.ric0().amax() < 1e-14);
        let check = einstein_check(&h);
        assert!(check.is_einstein);
        assert!((check.lambda + 1.5).abs() < 1e-14);
    }

    #[test]
    fn generic_jet_is_not_einstein() {
        let h = jet_from(&(0..100).map(|k| (k as f64 * 0.53).cos()).collect::<Vec<_>>());
        assert!(!einstein_check(&h).is_einstein);
        let z = einstein_check(&QuadJet::zero());
        assert!(z.is_einstein && z.lambda == 0.0);
    }

    #[test]
    fn gauge_chart_conjugates_rplus() {
        let h = jet_from(&(0..100).map(|k| (k as f64 * 0.29).sin()).collect::<Vec<_>>());
        let rplus = curvature_operator(&curvature_at_origin(&h)).rplus();
        let phi = GaugeElement::exp(&Vec3::new(0.3, -0.7, 0.4));
        let q = sp1_rotation(&phi);
        let pulled = h.pullback(&phi.chart_matrix());
        let r2 = curvature_operator(&curvature_at_origin(&pulled)).rplus();
        assert!((r2 - q * rplus * q.transpose()).amax() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn algebraic_identities_hold(vals in prop::collection::vec(-1.0f64..1.0, 100)) {
            let r = curvature_at_origin(&jet_from(&vals));
            prop_assert!(r.identity_defect() < 1e-12);
            let op = curvature_operator(&r);
            prop_assert!(op.asymmetry() < 1e-12);
            prop_assert!(op.wplus().trace().abs() < 1e-12);
            prop_assert!(op.wminus().trace().abs() < 1e-12);
            prop_assert!((op.scal() - r.scal()).abs() < 1e-12);
            prop_assert!((op.rplus().trace() - op.rminus().trace()).abs() < 1e-12);
        }

        #[test]
        fn curvature_is_linear(
            a in prop::collection::vec(-1.0f64..1.0, 100),
            b in prop::collection::vec(-1.0f64..1.0, 100),
            s in -3.0f64..3.0,
            t in -3.0f64..3.0,
        ) {
            let (ha, hb) = (jet_from(&a), jet_from(&b));
            let lhs = curvature_at_origin(&(ha * s + hb * t));
            let rhs = curvature_at_origin(&ha) * s + curvature_at_origin(&hb) * t;
            prop_assert!((lhs - rhs).max_abs() < 1e-12);
        }

        #[test]
        fn curvature_is_gauge_invariant(
            a in prop::collection::vec(-1.0f64..1.0, 100),
            v in prop::collection::vec(-1.0f64..1.0, 80),
        ) {
            let h = jet_from(&a);
            let field = CubicVectorField::from_vector(&DVector::from_column_slice(&v));
            let diff = curvature_at_origin(&(h + delta_star(&field))) - curvature_at_origin(&h);
            prop_assert!(diff.max_abs() < 1e-10);
        }

        #[test]
        fn curvature_operator_is_equivariant(
            a in prop::collection::vec(-1.0f64..1.0, 100),
            m in prop::collection::vec(-1.0f64..1.0, 16),
        ) {
            let h = jet_from(&a);
            let rot = rotation_from(&m);
            let pulled = curvature_at_origin(&h.pullback(&rot));
            let moved = curvature_at_origin(&h).transform(&rot);
            prop_assert!((pulled - moved).max_abs() < 1e-10);
            let l = lambda2(&rot);
            let conj = l.transpose() * curvature_at_origin(&h).form2_matrix() * l;
            prop_assert!((pulled.form2_matrix() - conj).amax() < 1e-10);
        }
    }
}
