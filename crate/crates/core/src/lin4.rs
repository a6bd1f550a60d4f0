//! Constant multilinear algebra on R⁴.
//!
//! Orientation is `dx¹∧dx²∧dx³∧dx⁴`. Two-forms are stored in the ordered
//! basis `(dx¹∧dx², dx¹∧dx³, dx¹∧dx⁴, dx³∧dx⁴, dx⁴∧dx², dx²∧dx³)`, which the
//! Euclidean Hodge star maps to itself by swapping the two halves. The basis
//! `dxⁱ∧dxʲ` (i < j) is taken orthonormal, so `|dx¹∧dx²+dx³∧dx⁴|² = 2`.

use crate::error::{Error, Result};
use nalgebra::{Matrix3, Matrix4, SMatrix, Vector3, Vector4};
use std::ops::{Add, Mul, Neg, Sub};

pub type Vec4 = Vector4<f64>;
pub type Mat4 = Matrix4<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;
pub type Mat6 = SMatrix<f64, 6, 6>;

/// Index pairs of the 2-form basis (0-based).
pub const FORM_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2)];

/// Index pairs `(i ≤ j)` of the symmetric storage, in row-major order.
pub const SYM_PAIRS: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

/// Position of the unordered pair `{i, j}` in [`SYM_PAIRS`].
pub const fn sym_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    // rows hold 4, 3, 2, 1 entries
    let offset = match a {
        0 => 0,
        1 => 4,
        2 => 7,
        _ => 9,
    };
    offset + (b - a)
}

/// A 2-form with constant coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Form2 {
    pub c: [f64; 6],
}

impl Form2 {
    pub const fn new(c: [f64; 6]) -> Self {
        Form2 { c }
    }

    pub const fn zero() -> Self {
        Form2 { c: [0.0; 6] }
    }

    pub fn basis(k: usize) -> Self {
        let mut c = [0.0; 6];
        c[k] = 1.0;
        Form2 { c }
    }

    /// `ω_i = dβ_i / 2`, i.e. `dx¹∧dx²+dx³∧dx⁴`, `dx¹∧dx³+dx⁴∧dx²`, `dx¹∧dx⁴+dx²∧dx³`.
    pub fn self_dual(i: usize) -> Self {
        let mut c = [0.0; 6];
        c[i] = 1.0;
        c[i + 3] = 1.0;
        Form2 { c }
    }

    pub fn anti_self_dual(i: usize) -> Self {
        let mut c = [0.0; 6];
        c[i] = 1.0;
        c[i + 3] = -1.0;
        Form2 { c }
    }

    /// Antisymmetric matrix `F_ab = F(e_a, e_b)`.
    pub fn to_skew(&self) -> Mat4 {
        let mut m = Mat4::zeros();
        for (k, &(a, b)) in FORM_PAIRS.iter().enumerate() {
            m[(a, b)] += self.c[k];
            m[(b, a)] -= self.c[k];
        }
        m
    }

    /// Reads the antisymmetric part of `m`.
    pub fn from_skew(m: &Mat4) -> Self {
        let mut c = [0.0; 6];
        for (k, &(a, b)) in FORM_PAIRS.iter().enumerate() {
            c[k] = 0.5 * (m[(a, b)] - m[(b, a)]);
        }
        Form2 { c }
    }

    /// `a ∧ b` for covectors.
    pub fn wedge(a: &Vec4, b: &Vec4) -> Self {
        let m = a * b.transpose() - b * a.transpose();
        Form2::from_skew(&m)
    }

    /// Euclidean Hodge star.
    pub fn star(&self) -> Self {
        let c = self.c;
        Form2 {
            c: [c[3], c[4], c[5], c[0], c[1], c[2]],
        }
    }

    pub fn dot(&self, other: &Form2) -> f64 {
        self.c.iter().zip(other.c.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Hodge star for the metric `g` (components in the same chart).
    pub fn star_with(&self, g: &Mat4) -> Self {
        let ginv = g.try_inverse().unwrap_or_else(Mat4::zeros);
        let sqrt_det = g.determinant().abs().sqrt();
        let f = self.to_skew();
        let raised = ginv * f * ginv.transpose();
        let mut out = Mat4::zeros();
        for a in 0..4 {
            for b in 0..4 {
                let mut s = 0.0;
                for c in 0..4 {
                    for d in 0..4 {
                        s += raised[(c, d)] * levi_civita(c, d, a, b);
                    }
                }
                out[(a, b)] = 0.5 * sqrt_det * s;
            }
        }
        Form2::from_skew(&out)
    }

    /// Pointwise norm for the metric `g` with the orthonormal-basis convention.
    pub fn norm_sq_with(&self, g: &Mat4) -> f64 {
        let ginv = g.try_inverse().unwrap_or_else(Mat4::zeros);
        let f = self.to_skew();
        let raised = ginv * f * ginv.transpose();
        0.5 * f.component_mul(&raised).sum()
    }
}

impl Add for Form2 {
    type Output = Form2;
    fn add(self, o: Form2) -> Form2 {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c) {
            *x += y;
        }
        Form2 { c }
    }
}

impl Sub for Form2 {
    type Output = Form2;
    fn sub(self, o: Form2) -> Form2 {
        self + (-o)
    }
}

impl Neg for Form2 {
    type Output = Form2;
    fn neg(self) -> Form2 {
        self * -1.0
    }
}

impl Mul<f64> for Form2 {
    type Output = Form2;
    fn mul(self, s: f64) -> Form2 {
        Form2 {
            c: self.c.map(|x| x * s),
        }
    }
}

/// Sign of the permutation `(a, b, c, d)` of `(0, 1, 2, 3)`, or 0.
pub fn levi_civita(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let p = [a, b, c, d];
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] == p[j] {
                return 0.0;
            }
        }
    }
    let mut sign = 1.0;
    let mut q = p;
    for i in 0..4 {
        while q[i] != i {
            let k = q[i];
            q.swap(i, k);
            sign = -sign;
        }
    }
    sign
}

/// Splits `w` into its self-dual and anti-self-dual parts.
pub fn hodge_split(w: &Form2) -> (Form2, Form2) {
    let s = w.star();
    ((*w + s) * 0.5, (*w - s) * 0.5)
}

/// A symmetric 2-tensor, stored as its upper triangle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor2 {
    pub c: [f64; 10],
}

impl SymTensor2 {
    pub const fn zero() -> Self {
        SymTensor2 { c: [0.0; 10] }
    }

    pub fn identity() -> Self {
        Self::from_matrix(&Mat4::identity())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[sym_index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.c[sym_index(i, j)] = v;
    }

    /// Symmetric part of `m`.
    pub fn from_matrix(m: &Mat4) -> Self {
        let mut c = [0.0; 10];
        for (k, &(i, j)) in SYM_PAIRS.iter().enumerate() {
            c[k] = 0.5 * (m[(i, j)] + m[(j, i)]);
        }
        SymTensor2 { c }
    }

    pub fn to_matrix(&self) -> Mat4 {
        Mat4::from_fn(|i, j| self.get(i, j))
    }

    /// `a ⊗ b + b ⊗ a`.
    pub fn sym_product(a: &Vec4, b: &Vec4) -> Self {
        Self::from_matrix(&(a * b.transpose() + b * a.transpose()))
    }

    /// `a ⊗ a`.
    pub fn square(a: &Vec4) -> Self {
        Self::from_matrix(&(a * a.transpose()))
    }

    pub fn trace(&self) -> f64 {
        self.c[0] + self.c[4] + self.c[7] + self.c[9]
    }

    pub fn trace_free(&self) -> Self {
        let t = self.trace() / 4.0;
        let mut out = *self;
        for i in 0..4 {
            out.c[sym_index(i, i)] -= t;
        }
        out
    }

    /// `g^{ab} h_ab`.
    pub fn trace_with(&self, g: &Mat4) -> f64 {
        match g.try_inverse() {
            Some(ginv) => ginv.component_mul(&self.to_matrix()).sum(),
            None => f64::NAN,
        }
    }

    /// `|h|_g² = g^{ac} g^{bd} h_ab h_cd`.
    pub fn norm_sq_with(&self, g: &Mat4) -> f64 {
        match g.try_inverse() {
            Some(ginv) => {
                let h = self.to_matrix();
                let raised = ginv * h * ginv;
                h.component_mul(&raised).sum()
            }
            None => f64::NAN,
        }
    }

    /// Frobenius norm of the Cartesian components.
    pub fn norm(&self) -> f64 {
        self.to_matrix().norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Aᵀ h A`, the pullback by the linear map `A`.
    pub fn pullback(&self, a: &Mat4) -> Self {
        Self::from_matrix(&(a.transpose() * self.to_matrix() * a))
    }
}

impl Add for SymTensor2 {
    type Output = SymTensor2;
    fn add(self, o: SymTensor2) -> SymTensor2 {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c) {
            *x += y;
        }
        SymTensor2 { c }
    }
}

impl Sub for SymTensor2 {
    type Output = SymTensor2;
    fn sub(self, o: SymTensor2) -> SymTensor2 {
        self + o * -1.0
    }
}

impl Mul<f64> for SymTensor2 {
    type Output = SymTensor2;
    fn mul(self, s: f64) -> SymTensor2 {
        SymTensor2 {
            c: self.c.map(|x| x * s),
        }
    }
}

/// The standard hyperkähler triple of R⁴.
#[derive(Debug, Clone, Copy)]
pub struct StdStructures {
    /// `I_i` as endomorphisms: column `a` is `I_i(∂_a)`.
    pub endo: [Mat4; 3],
    /// `ω_i(X, Y) = ⟨I_i X, Y⟩`.
    pub forms: [Form2; 3],
}

/// `I₁`, `I₂`, `I₃` with holomorphic coordinates `(x¹+ix², x³+ix⁴)`,
/// `(x¹+ix³, x²−ix⁴)` and `(x¹+ix⁴, x²+ix³)`.
pub fn std_structures() -> StdStructures {
    let endo = [complex_structure(0), complex_structure(1), complex_structure(2)];
    let forms = [
        Form2::from_skew(&endo[0].transpose()),
        Form2::from_skew(&endo[1].transpose()),
        Form2::from_skew(&endo[2].transpose()),
    ];
    StdStructures { endo, forms }
}

/// Matrix of `I_{i+1}`.
pub fn complex_structure(i: usize) -> Mat4 {
    // (source, target) pairs with I(e_s) = e_t, so I(e_t) = -e_s.
    let pairs: [(usize, usize); 2] = match i {
        0 => [(0, 1), (2, 3)],
        1 => [(0, 2), (3, 1)],
        2 => [(0, 3), (1, 2)],
        _ => panic!("complex structure index {i} out of range"),
    };
    let mut m = Mat4::zeros();
    for (s, t) in pairs {
        m[(t, s)] = 1.0;
        m[(s, t)] = -1.0;
    }
    m
}

/// Tolerance on `|q| − 1` for unit quaternions.
pub const UNIT_TOL: f64 = 1e-12;

/// A unit quaternion `w + x I₁ + y I₂ + z I₃`, i.e. an element of the
/// `Sp₁ ⊂ SO(4)` that fixes the anti-self-dual forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeElement {
    q: [f64; 4],
}

impl GaugeElement {
    pub fn new(q: [f64; 4]) -> Result<Self> {
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidInput(format!(
                "gauge quaternion must have unit norm, got |q| = {n}"
            )));
        }
        Ok(GaugeElement { q })
    }

    /// Normalizes an arbitrary nonzero quaternion.
    pub fn normalized(q: [f64; 4]) -> Result<Self> {
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidInput("zero quaternion".into()));
        }
        Ok(GaugeElement { q: q.map(|v| v / n) })
    }

    pub const fn identity() -> Self {
        GaugeElement {
            q: [1.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn quaternion(&self) -> [f64; 4] {
        self.q
    }

    /// `exp(v₁ I₁ + v₂ I₂ + v₃ I₃)`.
    pub fn exp(v: &Vec3) -> Self {
        let theta = v.norm();
        if theta == 0.0 {
            return Self::identity();
        }
        let s = theta.sin() / theta;
        GaugeElement {
            q: [theta.cos(), s * v[0], s * v[1], s * v[2]],
        }
    }

    pub fn conj(&self) -> Self {
        let [w, x, y, z] = self.q;
        GaugeElement { q: [w, -x, -y, -z] }
    }

    /// Hamilton product.
    pub fn mul(&self, o: &GaugeElement) -> Self {
        let [a1, b1, c1, d1] = self.q;
        let [a2, b2, c2, d2] = o.q;
        GaugeElement {
            q: [
                a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
                a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
                a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
                a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
            ],
        }
    }

    /// The element of SO(4), `w Id + x I₁ + y I₂ + z I₃`.
    pub fn left_matrix(&self) -> Mat4 {
        let [w, x, y, z] = self.q;
        Mat4::identity() * w
            + complex_structure(0) * x
            + complex_structure(1) * y
            + complex_structure(2) * z
    }

    /// Linear chart map whose pullback conjugates the self-dual curvature as
    /// `Q R⁺ Qᵀ` with `Q = sp1_rotation(self)`.
    pub fn chart_matrix(&self) -> Mat4 {
        self.conj().left_matrix()
    }

    /// Recovers the quaternion (up to the sign ambiguity, resolved by `w ≥ 0`)
    /// from a rotation of the self-dual triple.
    pub fn from_rotation(r: &Mat3) -> Result<Self> {
        let orth = (r * r.transpose() - Mat3::identity()).norm();
        if orth > 1e-9 || (r.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("matrix is not in SO(3)".into()));
        }
        let tr = r.trace();
        let q = if tr > 0.0 {
            let s = (tr + 1.0).sqrt() * 2.0;
            [
                0.25 * s,
                (r[(2, 1)] - r[(1, 2)]) / s,
                (r[(0, 2)] - r[(2, 0)]) / s,
                (r[(1, 0)] - r[(0, 1)]) / s,
            ]
        } else if r[(0, 0)] > r[(1, 1)] && r[(0, 0)] > r[(2, 2)] {
            let s = (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).sqrt() * 2.0;
            [
                (r[(2, 1)] - r[(1, 2)]) / s,
                0.25 * s,
                (r[(0, 1)] + r[(1, 0)]) / s,
                (r[(0, 2)] + r[(2, 0)]) / s,
            ]
        } else if r[(1, 1)] > r[(2, 2)] {
            let s = (1.0 + r[(1, 1)] - r[(0, 0)] - r[(2, 2)]).sqrt() * 2.0;
            [
                (r[(0, 2)] - r[(2, 0)]) / s,
                (r[(0, 1)] + r[(1, 0)]) / s,
                0.25 * s,
                (r[(1, 2)] + r[(2, 1)]) / s,
            ]
        } else {
            let s = (1.0 + r[(2, 2)] - r[(0, 0)] - r[(1, 1)]).sqrt() * 2.0;
            [
                (r[(1, 0)] - r[(0, 1)]) / s,
                (r[(0, 2)] + r[(2, 0)]) / s,
                (r[(1, 2)] + r[(2, 1)]) / s,
                0.25 * s,
            ]
        };
        let q = if q[0] < 0.0 { q.map(|v| -v) } else { q };
        GaugeElement::normalized(q)
    }
}

/// Adjoint action of `phi` on `(I₁, I₂, I₃)`: column `k` holds the
/// coefficients of `φ I_k φ⁻¹`.
pub fn sp1_rotation(phi: &GaugeElement) -> Mat3 {
    let [w, x, y, z] = phi.q;
    Mat3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// Eigenspace tolerance for [`asd_sd_product`].
pub const EIGENSPACE_TOL: f64 = 1e-10;

/// The trace-free symmetric endomorphism `M_m ∘ M_p` built from an
/// anti-self-dual `m` and a self-dual `p`.
pub fn asd_sd_product(m: &Form2, p: &Form2) -> Result<SymTensor2> {
    let (m_plus, _) = hodge_split(m);
    let (_, p_minus) = hodge_split(p);
    if m_plus.norm() > EIGENSPACE_TOL * (1.0 + m.norm()) {
        return Err(Error::InvalidInput(
            "first factor is not anti-self-dual".into(),
        ));
    }
    if p_minus.norm() > EIGENSPACE_TOL * (1.0 + p.norm()) {
        return Err(Error::InvalidInput("second factor is not self-dual".into()));
    }
    let prod = m.to_skew() * p.to_skew();
    Ok(SymTensor2::from_matrix(&prod))
}

/// Pushforward `X∧Y ↦ AX∧AY` on the 2-form basis.
pub fn lambda2(a: &Mat4) -> Mat6 {
    let mut out = Mat6::zeros();
    for k in 0..6 {
        let f = Form2::basis(k).to_skew();
        let pushed = Form2::from_skew(&(a * f * a.transpose()));
        for j in 0..6 {
            out[(j, k)] = pushed.c[j];
        }
    }
    out
}

/// Orthonormal change of basis whose columns are the split basis
/// `(ω₁, ω₂, ω₃, ω₁⁻, ω₂⁻, ω₃⁻) / √2` written in the 2-form basis.
pub fn split_basis() -> Mat6 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = Mat6::zeros();
    for i in 0..3 {
        m[(i, i)] = s;
        m[(i + 3, i)] = s;
        m[(i, i + 3)] = s;
        m[(i + 3, i + 3)] = -s;
    }
    m
}

/// Matrix exponential of a 3×3 skew matrix (Rodrigues).
pub fn exp_skew3(xi: &Mat3) -> Mat3 {
    let w = Vec3::new(xi[(2, 1)], xi[(0, 2)], xi[(1, 0)]);
    let theta = w.norm();
    if theta < 1e-300 {
        return Mat3::identity() + xi;
    }
    let (a, b) = if theta < 1e-4 {
        (1.0 - theta * theta / 6.0, 0.5 - theta * theta / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    };
    Mat3::identity() + xi * a + xi * xi * b
}
