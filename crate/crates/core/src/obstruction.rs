//! Obstruction integrals of germs against the `o_i`, the `λ` coefficients,
//! the wall condition `det R⁺ = 0` and gauge alignment by `Sp₁`.

use crate::ehspace::{l2_norm_omega, OTensor, TensorField};
use crate::error::{Error, Result};
use crate::jets::{bianchi_euclidean, curvature_at_origin, curvature_operator, delta_star, radialize, QuadJet};
use crate::lin4::{complex_structure, exp_skew3, sp1_rotation, GaugeElement, Mat3, Mat4, Vec3, Vec4};
use crate::poly::Poly4;
use crate::sphere::hopf_rule;
use nalgebra::SymmetricEigen;
use serde::Serialize;

/// Default wall tolerance, relative to the largest `|eigenvalue|` of `R⁺`.
pub const WALL_TOL: f64 = 1e-9;

/// Largest tolerated `|R⁺ − R⁺ᵀ|` entry.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Relative agreement required between the two Richardson estimates of the
/// quadrature mode.
pub const QUAD_TOL: f64 = 1e-8;

/// Base radius of the quadrature mode; the estimates use `R, 2R, 4R`.
pub const QUAD_RADIUS: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegralMode {
    Exact,
    Quadrature,
}

/// `β_i = I_i x` as linear polynomials.
fn beta_polys() -> [[Poly4; 4]; 3] {
    std::array::from_fn(|i| {
        let j = complex_structure(i);
        std::array::from_fn(|k| Poly4::linear(&j.row(k).transpose()))
    })
}

fn outer_sym(a: &[Poly4; 4], b: &[Poly4; 4]) -> [[Poly4; 4]; 4] {
    std::array::from_fn(|k| std::array::from_fn(|l| &a[k] * &b[l] + &b[k] * &a[l]))
}

/// `r⁶ o_i` at leading order, a quadratic polynomial tensor.
fn o_leading_polys(i: usize) -> [[Poly4; 4]; 4] {
    let x: [Poly4; 4] = std::array::from_fn(Poly4::var);
    let b = beta_polys();
    let half = |m: [[Poly4; 4]; 4]| m.map(|row| row.map(|p| p * 0.5));
    let add = |a: [[Poly4; 4]; 4], c: [[Poly4; 4]; 4], s: f64| -> [[Poly4; 4]; 4] {
        std::array::from_fn(|k| std::array::from_fn(|l| a[k][l].clone() + c[k][l].clone() * s))
    };
    match i {
        0 => {
            let m = add(half(outer_sym(&x, &x)), half(outer_sym(&b[0], &b[0])), 1.0);
            let m = add(m, half(outer_sym(&b[1], &b[1])), -1.0);
            add(m, half(outer_sym(&b[2], &b[2])), -1.0)
        }
        1 => add(outer_sym(&x, &b[2]), outer_sym(&b[0], &b[1]), 1.0),
        _ => add(outer_sym(&b[0], &b[2]), outer_sym(&x, &b[1]), -1.0),
    }
}

fn check_index(i: usize) -> Result<()> {
    if i >= 3 {
        return Err(Error::InvalidInput(format!("obstruction index {} out of 1..3", i + 1)));
    }
    Ok(())
}

/// `lim_{r→∞} ∫_{S_r/Z₂} ((3/r)⟨H, o_i⟩ + o_i(BH, ∂_r)) vol` with
/// Euclidean contractions and `B = B_euc`.
///
/// `Exact` integrates the quartic spherical polynomial obtained from the
/// leading terms of `o_i`; `Quadrature` evaluates the exact `o_i` on spheres
/// of radius `R, 2R, 4R` and extrapolates the `R⁻⁴` correction away.
pub fn raw_obstruction_integral(h: &QuadJet, i: usize, mode: IntegralMode) -> Result<f64> {
    check_index(i)?;
    match mode {
        IntegralMode::Exact => Ok(exact_integral(h, i)),
        IntegralMode::Quadrature => quadrature_integral(h, i),
    }
}

fn exact_integral(h: &QuadJet, i: usize) -> f64 {
    let q = o_leading_polys(i);
    let b = bianchi_euclidean(h);
    let mut integrand = Poly4::zero();
    for k in 0..4 {
        // (BH)_k = Σ_j b_{jk} xʲ
        let bh_k = Poly4::linear(&b.column(k).into_owned());
        for l in 0..4 {
            integrand = integrand + &h.component(k, l) * &q[k][l] * 3.0;
            integrand = integrand + &(&q[k][l] * &bh_k) * &Poly4::var(l);
        }
    }
    0.5 * integrand.sphere_integral()
}

fn sphere_value(h: &QuadJet, o: &OTensor, b: &Mat4, radius: f64, rule: &[(Vec4, f64)]) -> Result<f64> {
    let mut sum = 0.0;
    for (dir, w) in rule {
        let x = dir * radius;
        let om = o.eval(&x)?.to_matrix();
        let hm = h.eval(&x).to_matrix();
        let bh = b.transpose() * x;
        let pairing = 3.0 / radius * om.component_mul(&hm).sum() + bh.dot(&(om * dir));
        sum += w * pairing;
    }
    Ok(0.5 * sum * radius.powi(3))
}

fn quadrature_integral(h: &QuadJet, i: usize) -> Result<f64> {
    let o = OTensor { i };
    let b = bianchi_euclidean(h);
    let rule = hopf_rule(8, 16);
    let v: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|s| sphere_value(h, &o, &b, QUAD_RADIUS * s, &rule))
        .collect::<Result<_>>()?;
    let coarse = (16.0 * v[1] - v[0]) / 15.0;
    let fine = (16.0 * v[2] - v[1]) / 15.0;
    let scale = 1.0 + v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if (fine - coarse).abs() > QUAD_TOL * scale {
        return Err(Error::Accuracy(format!(
            "obstruction quadrature for i = {} did not settle: {coarse:e} vs {fine:e}",
            i + 1
        )));
    }
    Ok(fine)
}

/// `λ_i = −raw_i / ‖Ω‖²`, with the raw integrals kept alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObstructionVector {
    pub lambda: [f64; 3],
    pub raw: [f64; 3],
    pub omega_norm_sq: f64,
}

impl ObstructionVector {
    pub fn from_raw(raw: [f64; 3], omega_norm_sq: f64) -> Result<Self> {
        if !(omega_norm_sq > 0.0 && omega_norm_sq.is_finite()) {
            return Err(Error::InvalidInput(format!("‖Ω‖² must be positive, got {omega_norm_sq}")));
        }
        let v = ObstructionVector {
            lambda: raw.map(|r| -r / omega_norm_sq),
            raw,
            omega_norm_sq,
        };
        v.check()?;
        Ok(v)
    }

    fn check(&self) -> Result<()> {
        for k in 0..3 {
            let d = self.lambda[k] * self.omega_norm_sq + self.raw[k];
            if d.abs() > 1e-12 * (1.0 + self.raw[k].abs()) {
                return Err(Error::Internal(format!("λ_{} inconsistent with its raw integral", k + 1)));
            }
        }
        Ok(())
    }

    pub fn as_vec3(&self) -> Vec3 {
        Vec3::from(self.lambda)
    }
}

/// `λ(H)`, computed on the radial representative `H + δ*V` of `H`.
pub fn lambda_coefficients(h: &QuadJet) -> Result<ObstructionVector> {
    lambda_coefficients_with(h, IntegralMode::Exact)
}

pub fn lambda_coefficients_with(h: &QuadJet, mode: IntegralMode) -> Result<ObstructionVector> {
    let radial = *h + delta_star(&radialize(h)?);
    let mut raw = [0.0; 3];
    for (i, r) in raw.iter_mut().enumerate() {
        *r = raw_obstruction_integral(&radial, i, mode)?;
    }
    ObstructionVector::from_raw(raw, l2_norm_omega()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    /// `det R⁺ ≠ 0`.
    OffWall,
    /// Exactly one eigenvalue vanishes.
    Nondegenerate,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WallReport {
    pub rplus: [[f64; 3]; 3],
    /// Sorted by increasing `|value|`.
    pub eigenvalues: [f64; 3],
    pub det: f64,
    pub tolerance: f64,
    pub on_wall: bool,
    pub kernel_dim: usize,
    /// Orthonormal kernel vectors in the `(I₁, I₂, I₃)` basis.
    pub kernel: Vec<[f64; 3]>,
    pub degeneracy: Degeneracy,
}

fn check_symmetric(m: &Mat3) -> Result<()> {
    let a = (m - m.transpose()).amax();
    if !a.is_finite() || a > SYMMETRY_TOL {
        return Err(Error::InvalidInput(format!("R⁺ is not symmetric: |R − Rᵀ| = {a:e}")));
    }
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("R⁺ has non-finite entries".into()));
    }
    Ok(())
}

/// Eigenpairs sorted by `|value|`, with eigenvectors as columns.
fn sorted_eigen(m: &Mat3) -> (Vec3, Mat3) {
    let sym = (m + m.transpose()) * 0.5;
    let e = SymmetricEigen::new(sym);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| e.eigenvalues[a].abs().total_cmp(&e.eigenvalues[b].abs()).then(a.cmp(&b)));
    let vals = Vec3::from_fn(|k, _| e.eigenvalues[idx[k]]);
    let vecs = Mat3::from_fn(|r, c| e.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

fn threshold(vals: &Vec3, tol: f64) -> f64 {
    tol * vals.amax()
}

/// Flips `v` so its largest-magnitude entry is positive (first index wins ties).
fn orient(v: Vec3) -> Vec3 {
    let k = v.iamax();
    if v[k] < 0.0 {
        -v
    } else {
        v
    }
}

/// Orthonormal basis of the span of the columns `cols`, with the first vector
/// chosen to maximize `|⟨·, I₁⟩|`.
fn kernel_basis(vecs: &Mat3, cols: &[usize]) -> Vec<Vec3> {
    let span: Vec<Vec3> = cols.iter().map(|&c| vecs.column(c).into_owned()).collect();
    if span.len() == 1 {
        return vec![orient(span[0])];
    }
    let e1 = Vec3::x();
    let proj: Vec3 = span.iter().map(|v| v * v.dot(&e1)).sum();
    let mut seeds: Vec<Vec3> = Vec::new();
    if proj.norm() > 1e-8 {
        seeds.push(proj);
    }
    if span.len() == 3 {
        seeds.extend([Vec3::x(), Vec3::y(), Vec3::z()]);
    } else {
        seeds.extend(span.iter().copied());
    }
    let mut out: Vec<Vec3> = Vec::new();
    for s in seeds {
        if out.len() == span.len() {
            break;
        }
        // project into the span, then Gram-Schmidt against what we have
        let mut v: Vec3 = span.iter().map(|b| b * b.dot(&s)).sum();
        for u in &out {
            v -= u * u.dot(&v);
        }
        if v.norm() > 1e-8 {
            out.push(orient(v.normalize()));
        }
    }
    out
}

pub fn wall_condition(rplus: &Mat3, tol: f64) -> Result<WallReport> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidInput(format!("wall tolerance must be positive, got {tol}")));
    }
    check_symmetric(rplus)?;
    let (vals, vecs) = sorted_eigen(rplus);
    let thr = threshold(&vals, tol);
    let zero: Vec<usize> = (0..3).filter(|&k| vals[k].abs() <= thr).collect();
    let kernel = kernel_basis(&vecs, &zero);
    let degeneracy = match zero.len() {
        0 => Degeneracy::OffWall,
        1 => Degeneracy::Nondegenerate,
        _ => Degeneracy::Degenerate,
    };
    Ok(WallReport {
        rplus: std::array::from_fn(|r| std::array::from_fn(|c| rplus[(r, c)])),
        eigenvalues: [vals[0], vals[1], vals[2]],
        det: rplus.determinant(),
        tolerance: tol,
        on_wall: !zero.is_empty(),
        kernel_dim: zero.len(),
        kernel: kernel.iter().map(|v| [v[0], v[1], v[2]]).collect(),
        degeneracy,
    })
}

/// `R⁺` of the jet `H` at the origin.
pub fn rplus_of(h: &QuadJet) -> Mat3 {
    curvature_operator(&curvature_at_origin(h)).rplus()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub phi: GaugeElement,
    /// `Q R⁺ Qᵀ` with `Q = sp1_rotation(phi)`.
    pub conjugated: Mat3,
    pub rotation: Mat3,
}

/// Rotates the kernel direction of `R⁺` onto `I₁` and diagonalizes.
pub fn align_gauge(rplus: &Mat3) -> Result<Alignment> {
    align_gauge_with(rplus, WALL_TOL)
}

pub fn align_gauge_with(rplus: &Mat3, tol: f64) -> Result<Alignment> {
    let report = wall_condition(rplus, tol)?;
    if !report.on_wall {
        return Err(Error::Precondition(format!(
            "R⁺ has no vanishing eigenvalue (smallest |λ| = {:e})",
            report.eigenvalues[0].abs()
        )));
    }
    let (_, vecs) = sorted_eigen(rplus);
    let first = Vec3::from(report.kernel[0]);
    // remaining directions: other kernel vectors, then the non-kernel
    // eigenvectors, each ordered by the axis they are closest to
    let mut rest: Vec<Vec3> = report.kernel[1..].iter().map(|v| Vec3::from(*v)).collect();
    rest.extend((report.kernel_dim..3).map(|c| orient(vecs.column(c).into_owned())));
    rest.sort_by_key(|v| v.iamax());
    // among the sign choices giving a rotation, take the smallest angle
    let rows = [first, rest[0], rest[1]];
    let mut q = Mat3::identity();
    let mut best = f64::NEG_INFINITY;
    for mask in 0..8u32 {
        let mut c = Mat3::zeros();
        for (k, v) in rows.iter().enumerate() {
            let s = if mask >> k & 1 == 1 { -1.0 } else { 1.0 };
            c.set_row(k, &(v * s).transpose());
        }
        if c.determinant() > 0.0 && c.trace() > best + 1e-12 {
            best = c.trace();
            q = c;
        }
    }
    let phi = GaugeElement::from_rotation(&q)?;
    let rotation = sp1_rotation(&phi);
    let conjugated = rotation * rplus * rotation.transpose();
    Ok(Alignment {
        phi,
        conjugated,
        rotation,
    })
}

/// `λ` in the frame where the kernel of `R⁺` sits on `I₁`.
pub fn aligned_lambda(h: &QuadJet, alignment: &Alignment) -> Result<ObstructionVector> {
    lambda_coefficients(&h.pullback(&alignment.phi.chart_matrix()))
}

fn xi_generator(xi: &[f64; 2]) -> Mat3 {
    let mut m = Mat3::zeros();
    for (j, &v) in xi.iter().enumerate() {
        m[(0, j + 1)] = v;
        m[(j + 1, 0)] = -v;
    }
    m
}

fn check_aligned(r: &Mat3) -> Result<()> {
    check_symmetric(r)?;
    let scale = r.amax().max(1.0);
    let off = (0..3)
        .flat_map(|a| (0..3).map(move |b| (a, b)))
        .filter(|(a, b)| a != b)
        .fold(0.0f64, |m, (a, b)| m.max(r[(a, b)].abs()));
    if off > 1e-9 * scale || r[(0, 0)].abs() > 1e-9 * scale {
        return Err(Error::Precondition(
            "R⁺ is not of the aligned form diag(0, a₂, a₃)".into(),
        ));
    }
    Ok(())
}

/// Derivative of the first column of `Q R⁺ Qᵀ` along `Q = exp(sΞ)`,
/// `Ξ₁ⱼ = −Ξⱼ₁ = ξⱼ`, at `s = 0`: this is `(0, a₂ξ₂, a₃ξ₃)`.
pub fn gauge_derivative(rplus: &Mat3, xi: &[f64; 2]) -> Result<Vec3> {
    check_aligned(rplus)?;
    if !xi.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("ξ must be finite".into()));
    }
    Ok(Vec3::new(0.0, rplus[(1, 1)] * xi[0], rplus[(2, 2)] * xi[1]))
}

/// The same derivative by central differences of the conjugation.
pub fn gauge_derivative_fd(rplus: &Mat3, xi: &[f64; 2], step: f64) -> Result<Vec3> {
    check_aligned(rplus)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!("step must be positive, got {step}")));
    }
    let g = xi_generator(xi);
    let col = |s: f64| -> Vec3 {
        let q = exp_skew3(&(g * s));
        (q * rplus * q.transpose()).column(0).into_owned()
    };
    // fourth-order stencil
    Ok((col(-2.0 * step) - col(-step) * 8.0 + col(step) * 8.0 - col(2.0 * step)) / (12.0 * step))
}

/// The gauge element realizing `exp(sΞ)` on the `(I₁, I₂, I₃)` triple.
pub fn gauge_curve(xi: &[f64; 2], s: f64) -> Result<GaugeElement> {
    GaugeElement::from_rotation(&exp_skew3(&(xi_generator(xi) * s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ehspace::o_asymptotic;
    use crate::jets::{complex_hyperbolic_jet, radial_jet, real_hyperbolic_jet, rplus_closed_form, CubicVectorField};
    use crate::sphere::S3_MOD_Z2_VOLUME;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_jet(rng: &mut ChaCha8Rng) -> QuadJet {
        let mut a = [[[[0.0; 4]; 4]; 4]; 4];
        for v in a.iter_mut().flatten().flatten().flatten() {
            *v = rng.random_range(-1.0..1.0);
        }
        QuadJet::from_array(&a)
    }

    fn random_sym3(rng: &mut ChaCha8Rng) -> Mat3 {
        let m = Mat3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        (m + m.transpose()) * 0.5
    }

    #[test]
    fn leading_polynomials_match_asymptotic_field() {
        let x = Vec4::new(0.3, -1.2, 0.7, 2.0);
        let r6 = x.norm().powi(6);
        for i in 0..3 {
            let q = o_leading_polys(i);
            let o = o_asymptotic(i, &x).unwrap().to_matrix() * r6;
            for k in 0..4 {
                for l in 0..4 {
                    assert!((q[k][l].eval(&x) - o[(k, l)]).abs() < 1e-12, "{i} {k}{l}");
                }
            }
        }
    }

    #[test]
    fn beta_one_squared_gives_five_volumes() {
        let h = radial_jet(&Mat3::from_diagonal(&Vec3::new(1.0, 0.0, 0.0)));
        let v = raw_obstruction_integral(&h, 0, IntegralMode::Exact).unwrap();
        assert!((v - 5.0 * S3_MOD_Z2_VOLUME).abs() < 1e-10);
        let q = raw_obstruction_integral(&h, 0, IntegralMode::Quadrature).unwrap();
        assert!((q - 5.0 * PI * PI).abs() < 1e-8, "{q}");
    }

    #[test]
    fn closed_form_coefficients() {
        // ∫(5H₁₁ − H₂₂ − H₃₃) and ∫6H₁ᵢ on S³/Z₂
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let m = random_sym3(&mut rng);
            let h = radial_jet(&m);
            let e = [
                PI * PI * (5.0 * m[(0, 0)] - m[(1, 1)] - m[(2, 2)]),
                6.0 * PI * PI * m[(0, 1)],
                6.0 * PI * PI * m[(0, 2)],
            ];
            for (i, &ei) in e.iter().enumerate() {
                let v = raw_obstruction_integral(&h, i, IntegralMode::Exact).unwrap();
                assert!((v - ei).abs() < 1e-10, "i = {i}: {v} vs {ei}");
            }
        }
    }

    #[test]
    fn zero_jet_has_no_obstruction() {
        for mode in [IntegralMode::Exact, IntegralMode::Quadrature] {
            for i in 0..3 {
                assert_eq!(raw_obstruction_integral(&QuadJet::zero(), i, mode).unwrap(), 0.0);
            }
        }
        assert_eq!(lambda_coefficients(&QuadJet::zero()).unwrap().lambda, [0.0; 3]);
        assert!(matches!(
            raw_obstruction_integral(&QuadJet::zero(), 3, IntegralMode::Exact),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn modes_agree_on_general_jets() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..5 {
            let h = random_jet(&mut rng);
            for i in 0..3 {
                let a = raw_obstruction_integral(&h, i, IntegralMode::Exact).unwrap();
                let b = raw_obstruction_integral(&h, i, IntegralMode::Quadrature).unwrap();
                assert!((a - b).abs() < 1e-7 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn raw_integral_ignores_the_gauge() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..5 {
            let h = random_jet(&mut rng);
            let radial = h + delta_star(&radialize(&h).unwrap());
            for i in 0..3 {
                let a = raw_obstruction_integral(&h, i, IntegralMode::Exact).unwrap();
                let b = raw_obstruction_integral(&radial, i, IntegralMode::Exact).unwrap();
                assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn lambda_is_twice_first_column_of_rplus() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..10 {
            let m = random_sym3(&mut rng);
            let lam = lambda_coefficients(&radial_jet(&m)).unwrap().as_vec3();
            let col = rplus_closed_form(&m).column(0).into_owned();
            assert!((lam - col * 2.0).amax() < 1e-8);
        }
    }

    #[test]
    fn hyperbolic_lambdas() {
        let real = lambda_coefficients(&real_hyperbolic_jet()).unwrap();
        assert!((real.as_vec3() - Vec3::new(-2.0, 0.0, 0.0)).amax() < 1e-8);
        // kernel of R⁺ is (I₂, I₃) here, so λ₁ only vanishes after alignment
        let h = complex_hyperbolic_jet();
        let input = lambda_coefficients(&h).unwrap();
        assert!((input.as_vec3() - Vec3::new(-3.0, 0.0, 0.0)).amax() < 1e-8);
        let al = align_gauge(&rplus_of(&h)).unwrap();
        let aligned = aligned_lambda(&h, &al).unwrap();
        assert!(aligned.as_vec3().amax() < 1e-8, "{:?}", aligned.lambda);
    }

    #[test]
    fn wall_examples() {
        let w = wall_condition(&Mat3::from_diagonal(&Vec3::new(-1.5, 0.0, 0.0)), WALL_TOL).unwrap();
        assert!(w.on_wall);
        assert_eq!(w.kernel_dim, 2);
        assert_eq!(w.degeneracy, Degeneracy::Degenerate);
        let w = wall_condition(&-Mat3::identity(), WALL_TOL).unwrap();
        assert!(!w.on_wall);
        assert_eq!(w.degeneracy, Degeneracy::OffWall);
        let w = wall_condition(&Mat3::from_diagonal(&Vec3::new(0.0, 2.0, -3.0)), WALL_TOL).unwrap();
        assert_eq!(w.degeneracy, Degeneracy::Nondegenerate);
        assert!((Vec3::from(w.kernel[0]) - Vec3::x()).amax() < 1e-14);
        let w = wall_condition(&Mat3::zeros(), WALL_TOL).unwrap();
        assert_eq!(w.kernel_dim, 3);
        let mut m = Mat3::identity();
        m[(0, 1)] = 1e-6;
        assert!(matches!(wall_condition(&m, WALL_TOL), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn degenerate_kernel_prefers_i1() {
        // kernel spanned by (1,1,0)/√2 and e₃
        let v = Vec3::new(1.0, -1.0, 0.0).normalize();
        let m = v * v.transpose() * 4.0;
        let w = wall_condition(&m, WALL_TOL).unwrap();
        assert_eq!(w.kernel_dim, 2);
        let k0 = Vec3::from(w.kernel[0]);
        assert!((k0 - Vec3::new(1.0, 1.0, 0.0).normalize()).amax() < 1e-12);
        assert!(k0.dot(&Vec3::from(w.kernel[1])).abs() < 1e-12);
    }

    #[test]
    fn alignment_examples() {
        let a = align_gauge(&Mat3::from_diagonal(&Vec3::new(0.0, 2.0, -3.0))).unwrap();
        assert_eq!(a.phi.quaternion(), [1.0, 0.0, 0.0, 0.0]);
        let a = align_gauge(&Mat3::from_diagonal(&Vec3::new(2.0, 0.0, -3.0))).unwrap();
        assert!((a.conjugated - Mat3::from_diagonal(&Vec3::new(0.0, 2.0, -3.0))).amax() < 1e-12);
        let q = a.phi.quaternion();
        // a quarter turn of the self-dual plane is a half-angle quaternion
        assert!((q[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(matches!(align_gauge(&Mat3::identity()), Err(Error::Precondition(_))));
    }

    #[test]
    fn alignment_of_complex_hyperbolic_is_identity_like() {
        let r = rplus_of(&complex_hyperbolic_jet());
        let a = align_gauge(&r).unwrap();
        assert!(a.conjugated[(0, 0)].abs() < 1e-10);
    }

    #[test]
    fn gauge_derivative_examples() {
        let r = Mat3::from_diagonal(&Vec3::new(0.0, 2.0, -3.0));
        assert_eq!(gauge_derivative(&r, &[1.0, 0.0]).unwrap(), Vec3::new(0.0, 2.0, 0.0));
        assert_eq!(gauge_derivative(&r, &[0.0, 0.0]).unwrap(), Vec3::zeros());
        let fd = gauge_derivative_fd(&r, &[0.3, -0.7], 1e-3).unwrap();
        assert!((fd - gauge_derivative(&r, &[0.3, -0.7]).unwrap()).amax() < 1e-9);
        assert!(matches!(gauge_derivative(&Mat3::identity(), &[1.0, 0.0]), Err(Error::Precondition(_))));
    }

    #[test]
    fn gauge_curve_conjugates_the_jet() {
        // moving along the curve changes λ at the rate of the gauge derivative
        let r = Mat3::from_diagonal(&Vec3::new(0.0, 0.2, -0.4));
        // invert R⁺ = (tr H) Id − 6H: tr H = −tr R⁺ / 3
        let h = (Mat3::identity() * (-r.trace() / 3.0) - r) / 6.0;
        assert!((rplus_closed_form(&h) - r).amax() < 1e-12);
        let jet = radial_jet(&h);
        let xi = [0.4, 0.9];
        let s = 1e-3;
        let lam = |s: f64| {
            let phi = gauge_curve(&xi, s).unwrap();
            lambda_coefficients(&jet.pullback(&phi.chart_matrix())).unwrap().as_vec3()
        };
        let fd = (lam(s) - lam(-s)) / (2.0 * s);
        let d = gauge_derivative(&r, &xi).unwrap() * 2.0;
        assert!((fd - d).amax() < 1e-6, "{fd} vs {d}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn lambda_is_gauge_invariant(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_jet(&mut rng);
            let v = CubicVectorField::from_vector(&nalgebra::DVector::from_fn(80, |_, _| rng.random_range(-1.0..1.0)));
            let a = lambda_coefficients(&h).unwrap().as_vec3();
            let b = lambda_coefficients(&(h + delta_star(&v))).unwrap().as_vec3();
            prop_assert!((a - b).amax() < 1e-8);
        }

        #[test]
        fn alignment_is_orthogonal_and_diagonalizes(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_sym3(&mut rng);
            let e = SymmetricEigen::new(m);
            let mut vals = e.eigenvalues;
            vals[rng.random_range(0..3)] = 0.0;
            let r = e.eigenvectors * Mat3::from_diagonal(&vals) * e.eigenvectors.transpose();
            let r = (r + r.transpose()) * 0.5;
            let a = align_gauge(&r).unwrap();
            prop_assert!((a.rotation * a.rotation.transpose() - Mat3::identity()).amax() < 1e-12);
            let c = a.conjugated;
            prop_assert!(c[(0, 0)].abs() < 1e-10);
            prop_assert!((c - Mat3::from_diagonal(&c.diagonal())).amax() < 1e-10);
        }
    }
}
