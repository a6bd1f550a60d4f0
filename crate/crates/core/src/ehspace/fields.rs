//! Evaluable tensor fields on the Cartesian chart `R⁴ ∖ {0}`.

use crate::error::{Error, Result};
use crate::lin4::{complex_structure, Form2, Mat4, SymTensor2, Vec4};

/// A value that can be flattened into a fixed number of reals.
pub trait Tensorial: Copy + Send + Sync + 'static {
    const N: usize;
    fn write(&self, out: &mut [f64]);
    fn read(src: &[f64]) -> Self;
}

impl Tensorial for f64 {
    const N: usize = 1;
    fn write(&self, out: &mut [f64]) {
        out[0] = *self;
    }
    fn read(src: &[f64]) -> Self {
        src[0]
    }
}

impl Tensorial for Vec4 {
    const N: usize = 4;
    fn write(&self, out: &mut [f64]) {
        out[..4].copy_from_slice(self.as_slice());
    }
    fn read(src: &[f64]) -> Self {
        Vec4::from_column_slice(&src[..4])
    }
}

impl Tensorial for Form2 {
    const N: usize = 6;
    fn write(&self, out: &mut [f64]) {
        out[..6].copy_from_slice(&self.c);
    }
    fn read(src: &[f64]) -> Self {
        Form2::new(std::array::from_fn(|k| src[k]))
    }
}

impl Tensorial for SymTensor2 {
    const N: usize = 10;
    fn write(&self, out: &mut [f64]) {
        out[..10].copy_from_slice(&self.c);
    }
    fn read(src: &[f64]) -> Self {
        SymTensor2 {
            c: std::array::from_fn(|k| src[k]),
        }
    }
}

/// Pointwise evaluator of a tensor field in Cartesian components.
/// One-forms are stored as `Vec4` covectors.
pub trait TensorField: Send + Sync {
    type Value: Tensorial;
    fn eval(&self, x: &Vec4) -> Result<Self::Value>;
}

impl<T: TensorField + ?Sized> TensorField for &T {
    type Value = T::Value;
    fn eval(&self, x: &Vec4) -> Result<T::Value> {
        (**self).eval(x)
    }
}

impl<T: TensorField + ?Sized> TensorField for Box<T> {
    type Value = T::Value;
    fn eval(&self, x: &Vec4) -> Result<T::Value> {
        (**self).eval(x)
    }
}

/// Wraps a closure as a field.
pub struct FnField<F>(pub F);

impl<T, F> TensorField for FnField<F>
where
    T: Tensorial,
    F: Fn(&Vec4) -> Result<T> + Send + Sync,
{
    type Value = T;
    fn eval(&self, x: &Vec4) -> Result<T> {
        (self.0)(x)
    }
}

pub type MetricField = dyn TensorField<Value = SymTensor2>;

/// Rejects the excluded zero section and non-finite points.
pub fn check_point(x: &Vec4) -> Result<f64> {
    let r = x.norm();
    if !r.is_finite() {
        return Err(Error::Domain("non-finite chart point".into()));
    }
    if r == 0.0 {
        return Err(Error::Domain("the chart excludes the zero section r = 0".into()));
    }
    Ok(r)
}

/// `f = √(1 + r⁴)`.
pub fn f_profile(r: f64) -> f64 {
    (1.0 + r.powi(4)).sqrt()
}

/// The vectors `(x, I₁x, I₂x, I₃x)`, Euclidean-orthogonal of length `r`.
pub fn hopf_frame(x: &Vec4) -> [Vec4; 4] {
    [
        *x,
        complex_structure(0) * x,
        complex_structure(1) * x,
        complex_structure(2) * x,
    ]
}

/// `dr`, `α₁`, `α₂`, `α₃` as Cartesian covectors.
pub fn invariant_coframe(x: &Vec4) -> [Vec4; 4] {
    let r2 = x.norm_squared();
    let r = r2.sqrt();
    let u = hopf_frame(x);
    [u[0] / r, u[1] / r2, u[2] / r2, u[3] / r2]
}

/// `A dr`, `A r α₁`, `B α₂`, `B α₃` with `A² = r²/f`, `B² = f`.
pub fn eh_coframe(x: &Vec4) -> Result<[Vec4; 4]> {
    let r = check_point(x)?;
    let f = f_profile(r);
    let a = r / f.sqrt();
    let b = f.sqrt();
    let c = invariant_coframe(x);
    Ok([c[0] * a, c[1] * (a * r), c[2] * b, c[3] * b])
}

fn sum_of_squares(covs: &[(Vec4, f64)]) -> SymTensor2 {
    let mut m = Mat4::zeros();
    for (v, w) in covs {
        m += v * v.transpose() * *w;
    }
    SymTensor2::from_matrix(&m)
}

/// The Eguchi-Hanson metric
/// `r²/f (dr² + r²α₁²) + f (α₂² + α₃²)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct EhMetric;

impl TensorField for EhMetric {
    type Value = SymTensor2;
    fn eval(&self, x: &Vec4) -> Result<SymTensor2> {
        let r = check_point(x)?;
        let f = f_profile(r);
        let u = hopf_frame(x);
        let r4 = r.powi(4);
        Ok(sum_of_squares(&[
            (u[0], 1.0 / f),
            (u[1], 1.0 / f),
            (u[2], f / r4),
            (u[3], f / r4),
        ]))
    }
}

impl EhMetric {
    /// Closed-form `eh⁻¹`; `det eh = 1` in these coordinates. Numerically
    /// inverting `eh` near the zero section loses about `8 log₁₀(1/r)` digits.
    pub fn inverse(&self, x: &Vec4) -> Result<Mat4> {
        let r = check_point(x)?;
        let f = f_profile(r);
        let u = hopf_frame(x);
        let r4 = r.powi(4);
        Ok(sum_of_squares(&[
            (u[0], f / r4),
            (u[1], f / r4),
            (u[2], 1.0 / f),
            (u[3], 1.0 / f),
        ])
        .to_matrix())
    }
}

pub fn eh_metric() -> EhMetric {
    EhMetric
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EuclideanMetric;

impl TensorField for EuclideanMetric {
    type Value = SymTensor2;
    fn eval(&self, _x: &Vec4) -> Result<SymTensor2> {
        Ok(SymTensor2::identity())
    }
}

/// `(sinh²r / r² − 1) / r²`, with its Taylor series near the origin.
pub fn sinh_profile(r: f64) -> f64 {
    if r < 0.5 {
        // (sinh²r/r² − 1)/r² = Σ_{n≥2} 2^{2n−1} r^{2n−4} / (2n)!
        let r2 = r * r;
        let mut term = 1.0 / 3.0; // n = 2
        let mut sum = term;
        for n in 3..14 {
            let n = n as f64;
            term *= 4.0 * r2 / ((2.0 * n) * (2.0 * n - 1.0));
            sum += term;
        }
        sum
    } else {
        let s = r.sinh() / r;
        (s * s - 1.0) / (r * r)
    }
}

/// Hyperbolic metrics in exponential coordinates at a point:
/// `dr² + sinh²r (α₁² + α₂² + α₃²)` (real) or
/// `dr² + sinh²r α₁² + 4 sinh²(r/2)(α₂² + α₃²)` (complex).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyperbolicMetric {
    Real,
    Complex,
}

impl TensorField for HyperbolicMetric {
    type Value = SymTensor2;
    fn eval(&self, x: &Vec4) -> Result<SymTensor2> {
        let r = x.norm();
        if !r.is_finite() {
            return Err(Error::Domain("non-finite chart point".into()));
        }
        let u = hopf_frame(x);
        let a = sinh_profile(r);
        let b = match self {
            HyperbolicMetric::Real => a,
            HyperbolicMetric::Complex => sinh_profile(0.5 * r) / 4.0,
        };
        let mut m = Mat4::identity();
        m += u[1] * u[1].transpose() * a;
        m += (u[2] * u[2].transpose() + u[3] * u[3].transpose()) * b;
        Ok(SymTensor2::from_matrix(&m))
    }
}

/// `Ω = (e⁰∧e¹ − e²∧e³)/(1 + r⁴)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct OmegaForm;

impl TensorField for OmegaForm {
    type Value = Form2;
    fn eval(&self, x: &Vec4) -> Result<Form2> {
        let r = check_point(x)?;
        let e = eh_coframe(x)?;
        let w = Form2::wedge(&e[0], &e[1]) - Form2::wedge(&e[2], &e[3]);
        Ok(w * (1.0 / (1.0 + r.powi(4))))
    }
}

pub fn omega_form() -> OmegaForm {
    OmegaForm
}

/// Kähler forms of the Eguchi-Hanson metric: `e⁰∧e¹ + e²∧e³` for `I₁`, and
/// the constant `ω₂`, `ω₃` of R⁴ for the other two.
pub fn eh_kahler_form(i: usize, x: &Vec4) -> Result<Form2> {
    match i {
        0 => {
            let e = eh_coframe(x)?;
            Ok(Form2::wedge(&e[0], &e[1]) + Form2::wedge(&e[2], &e[3]))
        }
        1 | 2 => {
            check_point(x)?;
            Ok(Form2::self_dual(i))
        }
        _ => Err(Error::InvalidInput(format!("complex structure index {} out of 1..3", i + 1))),
    }
}

/// `I_i` of the Eguchi-Hanson metric at `x`, as a matrix acting on vectors:
/// `ω_i(X, Y) = eh(I_i X, Y)` gives `I_i = −g⁻¹ ω_i`.
pub fn eh_complex_structure(i: usize, x: &Vec4) -> Result<Mat4> {
    Ok(-(EhMetric.inverse(x)? * eh_kahler_form(i, x)?.to_skew()))
}

/// `o_i(X, Y) = Ω(X, I_i Y)`.
#[derive(Debug, Clone, Copy)]
pub struct OTensor {
    pub i: usize,
}

impl TensorField for OTensor {
    type Value = SymTensor2;
    fn eval(&self, x: &Vec4) -> Result<SymTensor2> {
        let omega = OmegaForm.eval(x)?.to_skew();
        let m = omega * eh_complex_structure(self.i, x)?;
        Ok(SymTensor2::from_matrix(&m))
    }
}

pub fn o_tensor(i: usize) -> Result<OTensor> {
    if i >= 3 {
        return Err(Error::InvalidInput(format!("obstruction index {} out of 1..3", i + 1)));
    }
    Ok(OTensor { i })
}

/// Leading terms at infinity of `o_i`:
/// `r⁻² (dr²/r² + α₁² − α₂² − α₃²)`, `r⁻² (dr/r·α₃ + α₁·α₂)`,
/// `r⁻² (−dr/r·α₂ + α₁·α₃)`, with `a·b = a⊗b + b⊗a`.
pub fn o_asymptotic(i: usize, x: &Vec4) -> Result<SymTensor2> {
    let r = check_point(x)?;
    let c = invariant_coframe(x);
    let dr = c[0] / r;
    let out = match i {
        0 => {
            SymTensor2::square(&dr) + SymTensor2::square(&c[1])
                - SymTensor2::square(&c[2])
                - SymTensor2::square(&c[3])
        }
        1 => SymTensor2::sym_product(&dr, &c[3]) + SymTensor2::sym_product(&c[1], &c[2]),
        2 => SymTensor2::sym_product(&c[1], &c[3]) - SymTensor2::sym_product(&dr, &c[2]),
        _ => return Err(Error::InvalidInput(format!("obstruction index {} out of 1..3", i + 1))),
    };
    Ok(out * (1.0 / (r * r)))
}

/// `k̂_i = −(1/12) f³ o_i`.
#[derive(Debug, Clone, Copy)]
pub struct KhatTensor {
    pub i: usize,
}

impl TensorField for KhatTensor {
    type Value = SymTensor2;
    fn eval(&self, x: &Vec4) -> Result<SymTensor2> {
        let r = check_point(x)?;
        let f = f_profile(r);
        Ok(OTensor { i: self.i }.eval(x)? * (-f.powi(3) / 12.0))
    }
}

pub fn khat_tensor(i: usize) -> Result<KhatTensor> {
    o_tensor(i).map(|_| KhatTensor { i })
}

/// Radial profile `φ(r) = (f³ − 1)/r³` of the gauge field in `k₁`, and `φ'`.
fn gauge_profile(r: f64) -> (f64, f64) {
    let f = f_profile(r);
    let f3 = f.powi(3);
    // f³ − 1 = (1 + r⁴)^{3/2} − 1, written to avoid cancellation at small r
    let num = if r < 0.1 {
        let u = r.powi(4);
        u * (1.5 + u * (0.375 - u * 0.0625))
    } else {
        f3 - 1.0
    };
    let phi = num / r.powi(3);
    // d/dr (f³) = 6 r³ f
    let dphi = 6.0 * f - 3.0 * num / r.powi(4);
    (phi, dphi)
}

/// `k₁ = (3/2) k̂₁ − (1/8) f eh + (1/12) δ*(φ ∂_r)` and `k_i = 2 k̂_i`.
///
/// `δ*X = ½ L_X eh`; the Lie derivative uses analytic derivatives of `X` and
/// of the metric profile.
#[derive(Debug, Clone, Copy)]
pub struct KTensor {
    pub i: usize,
}

impl TensorField for KTensor {
    type Value = SymTensor2;
    fn eval(&self, x: &Vec4) -> Result<SymTensor2> {
        let khat = KhatTensor { i: self.i }.eval(x)?;
        if self.i != 0 {
            return Ok(khat * 2.0);
        }
        let r = check_point(x)?;
        let f = f_profile(r);
        let g = EhMetric.eval(x)?;
        Ok(khat * 1.5 - g * (f / 8.0) + half_lie_radial(x)? * (1.0 / 12.0))
    }
}

pub fn k_tensor(i: usize) -> Result<KTensor> {
    o_tensor(i).map(|_| KTensor { i })
}

/// `½ L_X eh` for `X = φ(r) ∂_r`.
///
/// `eh = P/f + (f/r⁴) Q` with `P = xxᵀ + u₁u₁ᵀ`, `Q = u₂u₂ᵀ + u₃u₃ᵀ`, and
/// `X = ψ(r) x` with `ψ = φ/r`. For the dilation-type field `x` the Lie
/// derivatives are `L_x P = 4P`, `L_x Q = 4Q`, `L_x r = r`; the factor `ψ`
/// adds `dψ ⊗ ι_x eh + ι_x eh ⊗ dψ`.
fn half_lie_radial(x: &Vec4) -> Result<SymTensor2> {
    let r = check_point(x)?;
    let f = f_profile(r);
    let fp = 2.0 * r.powi(3) / f;
    let u = hopf_frame(x);
    let p = u[0] * u[0].transpose() + u[1] * u[1].transpose();
    let q = u[2] * u[2].transpose() + u[3] * u[3].transpose();
    let (phi, dphi) = gauge_profile(r);
    let psi = phi / r;
    let dpsi = (dphi - psi) / r; // dψ/dr
    // L_x of the coefficient functions: x·∇c(r) = r c'(r)
    let a = 1.0 / f;
    let da = -fp / (f * f);
    let b = f / r.powi(4);
    let db = fp / r.powi(4) - 4.0 * f / r.powi(5);
    let lx_g = p * (r * da + 4.0 * a) + q * (r * db + 4.0 * b);
    let g = p * a + q * b;
    let iota = g * x; // ι_x eh as a covector
    let grad_psi = (x / r) * dpsi;
    let lie = lx_g * psi + grad_psi * iota.transpose() + iota * grad_psi.transpose();
    Ok(SymTensor2::from_matrix(&(lie * 0.5)))
}

/// `Ξ = −(1/12) f³ Ω`.
#[derive(Debug, Clone, Copy, Default)]
pub struct XiForm;

impl TensorField for XiForm {
    type Value = Form2;
    fn eval(&self, x: &Vec4) -> Result<Form2> {
        let r = check_point(x)?;
        Ok(OmegaForm.eval(x)? * (-f_profile(r).powi(3) / 12.0))
    }
}

/// The function `f = √(1 + r⁴)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FFunction;

impl TensorField for FFunction {
    type Value = f64;
    fn eval(&self, x: &Vec4) -> Result<f64> {
        Ok(f_profile(check_point(x)?))
    }
}

/// `|eh − euc − c(x)|` in the Euclidean norm of components, where
/// `c = (1/2r⁴)(−(dr² + r²α₁²) + r²(α₂² + α₃²))` is the leading term.
pub fn eh_asymptotic_defect(x: &Vec4) -> Result<f64> {
    let r = check_point(x)?;
    if r < 2.0 {
        return Err(Error::Domain(format!("asymptotic defect needs r ≥ 2, got {r}")));
    }
    let c = invariant_coframe(x);
    let leading = (SymTensor2::square(&c[0]) + SymTensor2::square(&c[1]) * (r * r)) * -1.0
        + (SymTensor2::square(&c[2]) + SymTensor2::square(&c[3])) * (r * r);
    let leading = leading * (0.5 / r.powi(4));
    let diff = EhMetric.eval(x)? - SymTensor2::identity() - leading;
    Ok(diff.norm())
}
