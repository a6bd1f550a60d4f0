//! Quadratic metric jets `euc + H_{ijkl} xⁱxʲ dxᵏdxˡ` at the origin of R⁴ and
//! the finite-dimensional gauge calculus acting on them.

mod curvature;
mod io;
mod radial;

pub use curvature::{curvature_at_origin, curvature_operator, einstein_check, CurvatureOperator, CurvatureTensor};
pub use io::{format_jet, load_jet, parse_jet};
pub use radial::{
    complex_hyperbolic_jet, radial_basis_coeffs, radial_jet, radialize, real_hyperbolic_jet, rep_decompose,
    rplus_closed_form, RadialCoeffs, RadialDecomposition,
};

use crate::error::{Error, Result};
use crate::lin4::{sym_index, Mat4, SymTensor2, Vec4, SYM_PAIRS};
use crate::poly::Poly4;
use nalgebra::{DMatrix, DVector};
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

/// Residual bound for the exact finite-dimensional solves, relative to the
/// size of the input.
pub const SOLVE_TOL: f64 = 1e-12;

/// Multisets `i ≤ j ≤ k` of indices in 0..4, lexicographic.
pub const TRIPLES: [(usize, usize, usize); 20] = {
    let mut out = [(0, 0, 0); 20];
    let mut n = 0;
    let mut i = 0;
    while i < 4 {
        let mut j = i;
        while j < 4 {
            let mut k = j;
            while k < 4 {
                out[n] = (i, j, k);
                n += 1;
                k += 1;
            }
            j += 1;
        }
        i += 1;
    }
    out
};

pub fn triple_index(i: usize, j: usize, k: usize) -> usize {
    let mut s = [i, j, k];
    s.sort_unstable();
    TRIPLES
        .iter()
        .position(|&t| t == (s[0], s[1], s[2]))
        .expect("indices in range")
}

/// Number of ordered index triples representing the multiset at `t`.
fn triple_multiplicity(t: usize) -> f64 {
    let (i, j, k) = TRIPLES[t];
    if i == j && j == k {
        1.0
    } else if i == j || j == k {
        3.0
    } else {
        6.0
    }
}

/// Coefficients `H_{ijkl}`, symmetric in `(ij)` and in `(kl)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadJet {
    h: [[f64; 10]; 10],
}

impl Default for QuadJet {
    fn default() -> Self {
        QuadJet::zero()
    }
}

impl QuadJet {
    pub const DIM: usize = 100;

    pub const fn zero() -> Self {
        QuadJet { h: [[0.0; 10]; 10] }
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.h[sym_index(i, j)][sym_index(k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.h[sym_index(i, j)][sym_index(k, l)] = v;
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut out = QuadJet::zero();
        for (p, &(i, j)) in SYM_PAIRS.iter().enumerate() {
            for (q, &(k, l)) in SYM_PAIRS.iter().enumerate() {
                out.h[p][q] = f(i, j, k, l);
            }
        }
        out
    }

    /// Symmetrizes an arbitrary 4-index array in `(ij)` and `(kl)`.
    pub fn from_array(a: &[[[[f64; 4]; 4]; 4]; 4]) -> Self {
        Self::from_fn(|i, j, k, l| 0.25 * (a[i][j][k][l] + a[j][i][k][l] + a[i][j][l][k] + a[j][i][l][k]))
    }

    /// Jet of the tensor field `Σ_{kl} P_{kl}(x) dxᵏdxˡ` for quadratic forms
    /// `P_{kl}` given as symmetric matrices `P_{kl}(x) = xᵀ M_{kl} x`.
    pub fn from_quadratic_forms(m: impl Fn(usize, usize) -> Mat4) -> Self {
        Self::from_fn(|i, j, k, l| {
            let a = m(k, l);
            0.5 * (a[(i, j)] + a[(j, i)])
        })
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(100, self.h.iter().flatten().copied())
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        assert_eq!(v.len(), 100);
        let mut out = QuadJet::zero();
        for p in 0..10 {
            for q in 0..10 {
                out.h[p][q] = v[10 * p + q];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.h.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `H_{kl}(x) = Σ_{ij} H_{ijkl} xⁱxʲ`.
    pub fn component(&self, k: usize, l: usize) -> Poly4 {
        let mut p = Poly4::zero();
        for i in 0..4 {
            for j in 0..4 {
                p = p + &Poly4::var(i) * &Poly4::var(j) * self.get(i, j, k, l);
            }
        }
        p
    }

    /// Value of the tensor `H` at `x`.
    pub fn eval(&self, x: &Vec4) -> SymTensor2 {
        let mut out = SymTensor2::zero();
        for (q, &(k, l)) in SYM_PAIRS.iter().enumerate() {
            let mut s = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    s += self.get(i, j, k, l) * x[i] * x[j];
                }
            }
            out.c[q] = s;
        }
        out
    }

    /// The metric `euc + H` at `x`.
    pub fn metric(&self, x: &Vec4) -> Mat4 {
        Mat4::identity() + self.eval(x).to_matrix()
    }

    /// Pullback by the linear map `y ↦ A y`.
    pub fn pullback(&self, a: &Mat4) -> Self {
        // contract one index at a time
        let mut t = [[[[0.0; 4]; 4]; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        t[i][j][k][l] = self.get(i, j, k, l);
                    }
                }
            }
        }
        for slot in 0..4 {
            let mut u = [[[[0.0; 4]; 4]; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            let mut s = 0.0;
                            for p in 0..4 {
                                let (v, coef) = match slot {
                                    0 => (t[p][j][k][l], a[(p, i)]),
                                    1 => (t[i][p][k][l], a[(p, j)]),
                                    2 => (t[i][j][p][l], a[(p, k)]),
                                    _ => (t[i][j][k][p], a[(p, l)]),
                                };
                                s += coef * v;
                            }
                            u[i][j][k][l] = s;
                        }
                    }
                }
            }
            t = u;
        }
        Self::from_array(&t)
    }
}

impl Add for QuadJet {
    type Output = QuadJet;
    fn add(mut self, o: QuadJet) -> QuadJet {
        for p in 0..10 {
            for q in 0..10 {
                self.h[p][q] += o.h[p][q];
            }
        }
        self
    }
}

impl Sub for QuadJet {
    type Output = QuadJet;
    fn sub(self, o: QuadJet) -> QuadJet {
        self + o * -1.0
    }
}

impl Mul<f64> for QuadJet {
    type Output = QuadJet;
    fn mul(mut self, s: f64) -> QuadJet {
        for row in self.h.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        self
    }
}

/// Coefficients `V^m_{ijk}`, fully symmetric in `(ijk)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicVectorField {
    v: [[f64; 20]; 4],
}

impl Default for CubicVectorField {
    fn default() -> Self {
        CubicVectorField::zero()
    }
}

impl CubicVectorField {
    pub const DIM: usize = 80;

    pub const fn zero() -> Self {
        CubicVectorField { v: [[0.0; 20]; 4] }
    }

    pub fn get(&self, m: usize, i: usize, j: usize, k: usize) -> f64 {
        self.v[m][triple_index(i, j, k)]
    }

    pub fn set(&mut self, m: usize, i: usize, j: usize, k: usize, val: f64) {
        self.v[m][triple_index(i, j, k)] = val;
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(80, self.v.iter().flatten().copied())
    }

    pub fn from_vector(x: &DVector<f64>) -> Self {
        assert_eq!(x.len(), 80);
        let mut out = CubicVectorField::zero();
        for m in 0..4 {
            for t in 0..20 {
                out.v[m][t] = x[20 * m + t];
            }
        }
        out
    }

    /// Reads a field from its component polynomials (homogeneous cubics).
    pub fn from_polys(p: &[Poly4; 4]) -> Self {
        let mut out = CubicVectorField::zero();
        for m in 0..4 {
            for t in 0..20 {
                let (i, j, k) = TRIPLES[t];
                let mut e = [0u8; 4];
                e[i] += 1;
                e[j] += 1;
                e[k] += 1;
                out.v[m][t] = p[m].coeff(&e) / triple_multiplicity(t);
            }
        }
        out
    }

    /// `V^m(x)` as a polynomial.
    pub fn component(&self, m: usize) -> Poly4 {
        let mut p = Poly4::zero();
        for t in 0..20 {
            let (i, j, k) = TRIPLES[t];
            let mut e = [0u8; 4];
            e[i] += 1;
            e[j] += 1;
            e[k] += 1;
            p.add_term(e, self.v[m][t] * triple_multiplicity(t));
        }
        p
    }

    pub fn eval(&self, x: &Vec4) -> Vec4 {
        Vec4::from_fn(|m, _| self.component(m).eval(x))
    }

    pub fn max_abs(&self) -> f64 {
        self.v.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Add for CubicVectorField {
    type Output = CubicVectorField;
    fn add(mut self, o: CubicVectorField) -> CubicVectorField {
        for m in 0..4 {
            for t in 0..20 {
                self.v[m][t] += o.v[m][t];
            }
        }
        self
    }
}

impl Mul<f64> for CubicVectorField {
    type Output = CubicVectorField;
    fn mul(mut self, s: f64) -> CubicVectorField {
        for row in self.v.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        self
    }
}

/// Coefficients `b_{jl}` of a linear 1-form `Σ b_{jl} xʲ dxˡ`.
pub type LinearForm = Mat4;

/// `δ*V = ½(∂_k V_l + ∂_l V_k)` with the Euclidean metric.
pub fn delta_star(v: &CubicVectorField) -> QuadJet {
    QuadJet::from_fn(|i, j, k, l| 1.5 * (v.get(l, i, j, k) + v.get(k, i, j, l)))
}

/// `B H = δH + ½ d tr H` for the Euclidean metric, as `b_{jl}` coefficients
/// of `xʲ dxˡ`.
pub fn bianchi_euclidean(h: &QuadJet) -> LinearForm {
    Mat4::from_fn(|j, l| {
        (0..4)
            .map(|k| -2.0 * h.get(k, j, k, l) + h.get(j, l, k, k))
            .sum()
    })
}

/// Radial contraction `x ⌟ H`, a covector with cubic coefficients.
pub fn radial_contraction(h: &QuadJet) -> CubicVectorField {
    let mut out = CubicVectorField::zero();
    for k in 0..4 {
        for (t, &(i, j, l)) in TRIPLES.iter().enumerate() {
            out.v[k][t] = (h.get(i, j, k, l) + h.get(j, l, k, i) + h.get(l, i, k, j)) / 3.0;
        }
    }
    out
}

fn matrix_of(cols: usize, rows: usize, f: impl Fn(usize) -> DVector<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for c in 0..cols {
        m.set_column(c, &f(c));
    }
    m
}

fn unit(n: usize, k: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[k] = 1.0;
    v
}

fn linear_form_vector(b: &LinearForm) -> DVector<f64> {
    DVector::from_iterator(16, b.iter().copied())
}

pub(crate) fn delta_star_matrix() -> &'static DMatrix<f64> {
    static M: OnceLock<DMatrix<f64>> = OnceLock::new();
    M.get_or_init(|| {
        matrix_of(80, 100, |c| delta_star(&CubicVectorField::from_vector(&unit(80, c))).to_vector())
    })
}

pub(crate) fn bianchi_matrix() -> &'static DMatrix<f64> {
    static M: OnceLock<DMatrix<f64>> = OnceLock::new();
    M.get_or_init(|| {
        matrix_of(100, 16, |c| linear_form_vector(&bianchi_euclidean(&QuadJet::from_vector(&unit(100, c)))))
    })
}

pub(crate) fn contraction_matrix() -> &'static DMatrix<f64> {
    static M: OnceLock<DMatrix<f64>> = OnceLock::new();
    M.get_or_init(|| matrix_of(100, 80, |c| radial_contraction(&QuadJet::from_vector(&unit(100, c))).to_vector()))
}

/// Minimum-norm right inverse of the 16×80 map `V ↦ B δ*V`.
fn gauge_fix_pinv() -> &'static DMatrix<f64> {
    static M: OnceLock<DMatrix<f64>> = OnceLock::new();
    M.get_or_init(|| {
        let a = bianchi_matrix() * delta_star_matrix();
        let aat = &a * a.transpose();
        let inv = aat.try_inverse().expect("B∘δ* is surjective on cubic fields");
        a.transpose() * inv
    })
}

/// Finds the minimum-norm cubic `V` with `B(H + δ*V) = 0`.
pub fn bianchi_gauge_fix(h: &QuadJet) -> Result<CubicVectorField> {
    let rhs = -(bianchi_matrix() * h.to_vector());
    let v = gauge_fix_pinv() * &rhs;
    let field = CubicVectorField::from_vector(&v);
    let residual = bianchi_euclidean(&(*h + delta_star(&field))).amax();
    if residual > SOLVE_TOL * (1.0 + h.max_abs()) * 10.0 {
        return Err(Error::Internal(format!("Bianchi gauge residual {residual:e}")));
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lin4::std_structures;
    use proptest::prelude::*;

    fn jet_from(vals: &[f64]) -> QuadJet {
        QuadJet::from_vector(&DVector::from_column_slice(vals))
    }

    fn field_from(vals: &[f64]) -> CubicVectorField {
        CubicVectorField::from_vector(&DVector::from_column_slice(vals))
    }

    /// `β_a β_b` jet built from coefficient polynomials.
    pub(crate) fn beta_product(a: usize, b: usize) -> QuadJet {
        let s = std_structures();
        QuadJet::from_quadratic_forms(|k, l| {
            let ja = s.endo[a];
            let jb = s.endo[b];
            // (J_a x)_k (J_b x)_l symmetrized in (k, l)
            let m1 = ja.row(k).transpose() * jb.row(l);
            let m2 = ja.row(l).transpose() * jb.row(k);
            (m1 + m2) * 0.5
        })
    }

    #[test]
    fn triples_are_complete() {
        assert_eq!(TRIPLES.len(), 20);
        let total: f64 = (0..20).map(triple_multiplicity).sum();
        assert_eq!(total, 64.0);
        assert_eq!(triple_index(3, 1, 2), triple_index(1, 2, 3));
    }

    #[test]
    fn cubic_field_polynomial_round_trip() {
        let v = field_from(&(0..80).map(|k| (k as f64 * 0.37).sin()).collect::<Vec<_>>());
        let polys: [Poly4; 4] = std::array::from_fn(|m| v.component(m));
        let back = CubicVectorField::from_polys(&polys);
        assert!((back.to_vector() - v.to_vector()).amax() < 1e-15);
    }

    #[test]
    fn bianchi_of_zero_and_beta_squared() {
        assert_eq!(bianchi_euclidean(&QuadJet::zero()), Mat4::zeros());
        for i in 0..3 {
            let b = bianchi_euclidean(&beta_product(i, i));
            assert!((b - Mat4::identity() * 2.0).amax() < 1e-15, "B(β{i}²) = {b}");
        }
    }

    #[test]
    fn bianchi_of_mixed_beta_products_vanishes() {
        // ⟨J_i x, J_j x⟩ = 0 and the J_i anticommute, so the displayed
        // formula annihilates β_iβ_j + β_jβ_i for i ≠ j.
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            let h = beta_product(i, j) * 2.0;
            assert!(bianchi_euclidean(&h).amax() < 1e-15);
        }
    }

    #[test]
    fn bianchi_matches_polynomial_divergence() {
        let h = jet_from(&(0..100).map(|k| ((k * 7 % 13) as f64 - 6.0) / 5.0).collect::<Vec<_>>());
        let b = bianchi_euclidean(&h);
        for l in 0..4 {
            let mut form = Poly4::zero();
            let mut trace = Poly4::zero();
            for k in 0..4 {
                form = form - h.component(k, l).diff(k);
                trace = trace + h.component(k, k);
            }
            form = form + trace.diff(l) * 0.5;
            for j in 0..4 {
                let mut e = [0u8; 4];
                e[j] = 1;
                assert!((form.coeff(&e) - b[(j, l)]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn delta_star_matches_term_by_term_differentiation() {
        // V = r² x^m ∂_m
        let mut r2 = Poly4::zero();
        for i in 0..4 {
            r2 = r2 + &Poly4::var(i) * &Poly4::var(i);
        }
        let polys: [Poly4; 4] = std::array::from_fn(|m| &r2 * &Poly4::var(m));
        let v = CubicVectorField::from_polys(&polys);
        let h = delta_star(&v);
        for k in 0..4 {
            for l in 0..4 {
                let oracle = (polys[l].diff(k) + polys[k].diff(l)) * 0.5;
                assert!((h.component(k, l) - oracle).max_abs_coeff() < 1e-14);
            }
        }
    }

    #[test]
    fn gauge_fix_of_beta_squared() {
        let h = beta_product(0, 0);
        let v = bianchi_gauge_fix(&h).unwrap();
        assert!(bianchi_euclidean(&(h + delta_star(&v))).amax() < 1e-12);
    }

    #[test]
    fn gauge_fix_of_gauged_jet_is_trivial() {
        let h = jet_from(&(0..100).map(|k| (k as f64 * 1.3).cos()).collect::<Vec<_>>());
        let v = bianchi_gauge_fix(&h).unwrap();
        let gauged = h + delta_star(&v);
        let w = bianchi_gauge_fix(&gauged).unwrap();
        assert!(bianchi_euclidean(&delta_star(&w)).amax() < 1e-12);
        assert!(bianchi_euclidean(&(gauged + delta_star(&w))).amax() < 1e-12);
    }

    #[test]
    fn pullback_by_identity_and_composition() {
        let h = jet_from(&(0..100).map(|k| (k as f64 * 0.71).sin()).collect::<Vec<_>>());
        assert!((h.pullback(&Mat4::identity()) - h).max_abs() < 1e-15);
        let a = Mat4::from_fn(|i, j| ((i * 4 + j) as f64 * 0.3).cos());
        let b = Mat4::from_fn(|i, j| ((i + 2 * j) as f64 * 0.5).sin());
        let lhs = h.pullback(&a).pullback(&b);
        let rhs = h.pullback(&(a * b));
        assert!((lhs - rhs).max_abs() < 1e-12);
        // pointwise: (A*H)(y) = Aᵀ H(Ay) A
        let y = Vec4::new(0.3, -0.2, 0.9, 0.4);
        let direct = a.transpose() * h.eval(&(a * y)).to_matrix() * a;
        assert!((h.pullback(&a).eval(&y).to_matrix() - direct).amax() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn gauge_fix_residual_vanishes(vals in prop::collection::vec(-1.0f64..1.0, 100)) {
            let h = jet_from(&vals);
            let v = bianchi_gauge_fix(&h).unwrap();
            prop_assert!(bianchi_euclidean(&(h + delta_star(&v))).amax() < 1e-12);
        }

        #[test]
        fn delta_star_is_linear(
            a in prop::collection::vec(-1.0f64..1.0, 80),
            b in prop::collection::vec(-1.0f64..1.0, 80),
            s in -2.0f64..2.0,
        ) {
            let (va, vb) = (field_from(&a), field_from(&b));
            let lhs = delta_star(&(va + vb * s));
            let rhs = delta_star(&va) + delta_star(&vb) * s;
            prop_assert!((lhs - rhs).max_abs() < 1e-13);
        }
    }
}
