use super::{
    contraction_matrix, curvature_at_origin, curvature_operator, delta_star, delta_star_matrix, radial_contraction,
    CubicVectorField, QuadJet, SOLVE_TOL,
};
use crate::error::{Error, Result};
use crate::lin4::{complex_structure, Mat3, Mat6, Vec4};
use crate::poly::Poly4;
use crate::sphere::S3_VOLUME;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use std::sync::OnceLock;

/// Tolerance on `|x ⌟ H|` for a jet to count as radial.
pub const RADIAL_TOL: f64 = 1e-10;

/// `Σ_{ij} H_{ij} β_iβ_j` for a constant symmetric `H_{ij}`.
pub fn radial_jet(hij: &Mat3) -> QuadJet {
    let h = (hij + hij.transpose()) * 0.5;
    let j = [complex_structure(0), complex_structure(1), complex_structure(2)];
    QuadJet::from_fn(|a, b, k, l| {
        let mut s = 0.0;
        for p in 0..3 {
            for q in 0..3 {
                s += h[(p, q)] * (j[p][(k, a)] * j[q][(l, b)] + j[p][(k, b)] * j[q][(l, a)]);
            }
        }
        0.5 * s
    })
}

/// Jet of `dr² + sinh²r (α₁² + α₂² + α₃²)`.
pub fn real_hyperbolic_jet() -> QuadJet {
    radial_jet(&(Mat3::identity() / 3.0))
}

/// Jet of `dr² + sinh²r α₁² + 4 sinh²(r/2)(α₂² + α₃²)`.
pub fn complex_hyperbolic_jet() -> QuadJet {
    radial_jet(&Mat3::from_diagonal(&nalgebra::Vector3::new(1.0 / 3.0, 1.0 / 12.0, 1.0 / 12.0)))
}

fn radial_gauge_inverse() -> &'static DMatrix<f64> {
    static M: OnceLock<DMatrix<f64>> = OnceLock::new();
    M.get_or_init(|| {
        let a = contraction_matrix() * delta_star_matrix();
        a.try_inverse().expect("contraction of δ* is invertible on cubic fields")
    })
}

/// The unique cubic `V` with `x ⌟ (H + δ*V) = 0`.
pub fn radialize(h: &QuadJet) -> Result<CubicVectorField> {
    let rhs = -(contraction_matrix() * h.to_vector());
    let v = CubicVectorField::from_vector(&(radial_gauge_inverse() * rhs));
    let residual = radial_contraction(&(*h + delta_star(&v))).max_abs();
    if residual > SOLVE_TOL * (1.0 + h.max_abs()) * 10.0 {
        return Err(Error::Internal(format!("radial gauge residual {residual:e}")));
    }
    Ok(v)
}

fn check_radial(h: &QuadJet) -> Result<()> {
    let c = radial_contraction(h).max_abs();
    if c > RADIAL_TOL * (1.0 + h.max_abs()) {
        return Err(Error::InvalidInput(format!("jet is not radial: |x⌟H| = {c:e}")));
    }
    Ok(())
}

/// Coefficients of a radial jet in the `β_iβ_j` basis. Each `H_{ij}` is
/// homogeneous of degree 0 and is stored as the quartic `Q_{ij} = r⁴ H_{ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialCoeffs {
    pub quartic: [[Poly4; 3]; 3],
}

impl RadialCoeffs {
    pub fn eval(&self, x: &Vec4) -> Result<Mat3> {
        let r2 = x.norm_squared();
        if r2 == 0.0 {
            return Err(Error::Domain("radial coefficients at the origin".into()));
        }
        Ok(Mat3::from_fn(|i, j| self.quartic[i][j].eval(x) / (r2 * r2)))
    }

    /// The constant matrix `H_{ij}` when every coefficient is constant.
    pub fn constant(&self, tol: f64) -> Option<Mat3> {
        let r4 = r_power4();
        // on the unit sphere r⁴ = 1, so the mean of Q_ij is the candidate
        let c = Mat3::from_fn(|i, j| self.quartic[i][j].sphere_integral() / S3_VOLUME);
        let defect = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| (self.quartic[i][j].clone() - r4.clone() * c[(i, j)]).max_abs_coeff())
            .fold(0.0, f64::max);
        (defect <= tol).then_some(c)
    }
}

fn r_power4() -> Poly4 {
    let mut r2 = Poly4::zero();
    for i in 0..4 {
        r2 = r2 + &Poly4::var(i) * &Poly4::var(i);
    }
    &r2 * &r2
}

pub fn radial_basis_coeffs(h: &QuadJet) -> Result<RadialCoeffs> {
    check_radial(h)?;
    let j = [complex_structure(0), complex_structure(1), complex_structure(2)];
    let jx: Vec<[Poly4; 4]> = j
        .iter()
        .map(|m| std::array::from_fn(|k| Poly4::linear(&m.row(k).transpose())))
        .collect();
    let comps: Vec<Vec<Poly4>> = (0..4).map(|k| (0..4).map(|l| h.component(k, l)).collect()).collect();
    let quartic = std::array::from_fn(|p| {
        std::array::from_fn(|q| {
            let mut s = Poly4::zero();
            for k in 0..4 {
                for l in 0..4 {
                    s = s + &(&comps[k][l] * &jx[p][k]) * &jx[q][l];
                }
            }
            s
        })
    });
    Ok(RadialCoeffs { quartic })
}

/// `R⁺` of `Σ H_{ij} β_iβ_j` for constant `H_{ij}`.
pub fn rplus_closed_form(h: &Mat3) -> Mat3 {
    let t = h.trace();
    Mat3::from_fn(|i, j| if i == j { t - 6.0 * h[(i, i)] } else { -6.0 * h[(i, j)] })
}

/// Splitting of a radial jet along the irreducible curvature blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialDecomposition {
    pub scalar: QuadJet,
    pub ric0: QuadJet,
    pub wplus: QuadJet,
    pub wminus: QuadJet,
}

impl RadialDecomposition {
    pub fn sum(&self) -> QuadJet {
        self.scalar + self.ric0 + self.wplus + self.wminus
    }
}

/// Orthonormal basis of the radial jets, and the curvature map on it.
struct RadialSpace {
    basis: DMatrix<f64>,
    curvature: DMatrix<f64>,
}

fn radial_space() -> &'static RadialSpace {
    static S: OnceLock<RadialSpace> = OnceLock::new();
    S.get_or_init(|| {
        let c = contraction_matrix();
        let eig = SymmetricEigen::new(c.transpose() * c);
        let mut order: Vec<usize> = (0..100).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let basis = DMatrix::from_fn(100, 20, |r, k| eig.eigenvectors[(r, order[k])]);
        let curvature = DMatrix::from_fn(36, 20, |r, k| {
            let jet = QuadJet::from_vector(&basis.column(k).into_owned());
            curvature_operator(&curvature_at_origin(&jet)).matrix[(r / 6, r % 6)]
        });
        RadialSpace { basis, curvature }
    })
}

fn solve_piece(space: &RadialSpace, target: &Mat6) -> Result<QuadJet> {
    let rhs = DVector::from_fn(36, |r, _| target[(r / 6, r % 6)]);
    let svd = space.curvature.clone().svd(true, true);
    let c = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Internal(format!("radial curvature solve: {e}")))?;
    let residual = (&space.curvature * &c - &rhs).amax();
    if residual > 1e-10 * (1.0 + rhs.amax()) {
        return Err(Error::Internal(format!("curvature block outside the radial image: {residual:e}")));
    }
    Ok(QuadJet::from_vector(&(&space.basis * c)))
}

pub fn rep_decompose(h: &QuadJet) -> Result<RadialDecomposition> {
    check_radial(h)?;
    let op = curvature_operator(&curvature_at_origin(h));
    let scal = op.scal();
    let mut scalar = Mat6::identity() * (scal / 12.0);
    let mut wplus = Mat6::zeros();
    let mut wminus = Mat6::zeros();
    let mut ric0 = Mat6::zeros();
    let (wp, wm, b) = (op.wplus(), op.wminus(), op.ric0());
    for i in 0..3 {
        for j in 0..3 {
            wplus[(i, j)] = wp[(i, j)];
            wminus[(i + 3, j + 3)] = wm[(i, j)];
            ric0[(i, j + 3)] = b[(i, j)];
            ric0[(j + 3, i)] = b[(i, j)];
        }
    }
    // keep the exact symmetric form of the scalar block
    scalar = (scalar + scalar.transpose()) * 0.5;
    let space = radial_space();
    Ok(RadialDecomposition {
        scalar: solve_piece(space, &scalar)?,
        ric0: solve_piece(space, &ric0)?,
        wplus: solve_piece(space, &wplus)?,
        wminus: solve_piece(space, &wminus)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::curvature_operator;
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(rng: &mut ChaCha8Rng) -> Mat3 {
        let m = Mat3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        (m + m.transpose()) * 0.5
    }

    #[test]
    fn radial_space_has_dimension_twenty() {
        let c = contraction_matrix();
        let sv = c.clone().svd(false, false).singular_values;
        let rank = sv.iter().filter(|&&s| s > 1e-10).count();
        assert_eq!(rank, 80);
        let a = contraction_matrix() * delta_star_matrix();
        let s = a.svd(false, false).singular_values;
        assert!(s.min() > 1e-3);
    }

    #[test]
    fn radial_jets_are_radial() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let h = radial_jet(&random_sym(&mut rng));
            assert!(radial_contraction(&h).max_abs() < 1e-15);
            let v = radialize(&h).unwrap();
            assert!(v.max_abs() < 1e-12);
        }
    }

    #[test]
    fn radialize_removes_radial_part() {
        // dr²-type jet: x_k x_l dx^k dx^l
        let h = QuadJet::from_fn(|i, j, k, l| {
            let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            0.5 * (d(i, k) * d(j, l) + d(i, l) * d(j, k))
        });
        let v = radialize(&h).unwrap();
        let gauged = h + delta_star(&v);
        assert!(radial_contraction(&gauged).max_abs() < 1e-12);
        let before = curvature_at_origin(&h);
        let after = curvature_at_origin(&gauged);
        assert!((before - after).max_abs() < 1e-12);
    }

    #[test]
    fn basis_coefficients_of_beta_squared_and_catalog() {
        let mut e11 = Mat3::zeros();
        e11[(0, 0)] = 1.0;
        let c = radial_basis_coeffs(&radial_jet(&e11)).unwrap().constant(1e-12).unwrap();
        assert!((c - e11).amax() < 1e-14);
        let c = radial_basis_coeffs(&complex_hyperbolic_jet()).unwrap().constant(1e-12).unwrap();
        let expected = Mat3::from_diagonal(&Vector3::new(1.0 / 3.0, 1.0 / 12.0, 1.0 / 12.0));
        assert!((c - expected).amax() < 1e-14);
    }

    #[test]
    fn basis_coefficients_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let m = random_sym(&mut rng);
            let c = radial_basis_coeffs(&radial_jet(&m)).unwrap();
            let x = Vec4::new(0.2, -0.7, 1.1, 0.4);
            assert!((c.eval(&x).unwrap() - m).amax() < 1e-12);
            let back = radial_jet(&c.constant(1e-12).unwrap());
            assert!((back - radial_jet(&m)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn basis_coefficients_reject_non_radial() {
        let h = QuadJet::from_fn(|i, j, k, l| if i == j && k == l { 1.0 } else { 0.0 });
        assert!(matches!(radial_basis_coeffs(&h), Err(Error::InvalidInput(_))));
        assert!(matches!(rep_decompose(&h), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn closed_form_examples() {
        let mut e11 = Mat3::zeros();
        e11[(0, 0)] = 1.0;
        assert_eq!(rplus_closed_form(&e11), Mat3::from_diagonal(&Vector3::new(-5.0, 1.0, 1.0)));
        let id = rplus_closed_form(&(Mat3::identity() / 3.0));
        assert!((id + Mat3::identity()).amax() < 1e-15);
        let ch = rplus_closed_form(&Mat3::from_diagonal(&Vector3::new(1.0 / 3.0, 1.0 / 12.0, 1.0 / 12.0)));
        assert!((ch - Mat3::from_diagonal(&Vector3::new(-1.5, 0.0, 0.0))).amax() < 1e-15);
    }

    #[test]
    fn closed_form_matches_curvature() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let m = random_sym(&mut rng);
            let op = curvature_operator(&curvature_at_origin(&radial_jet(&m)));
            assert!((op.rplus() - rplus_closed_form(&m)).amax() < 1e-12);
        }
    }

    #[test]
    fn decomposition_of_catalog_jets() {
        let d = rep_decompose(&complex_hyperbolic_jet()).unwrap();
        assert!(d.wminus.max_abs() < 1e-12);
        assert!((d.sum() - complex_hyperbolic_jet()).max_abs() < 1e-10);
        let d = rep_decompose(&real_hyperbolic_jet()).unwrap();
        assert!(d.wplus.max_abs() < 1e-12 && d.wminus.max_abs() < 1e-12 && d.ric0.max_abs() < 1e-12);
        assert!((d.scalar - real_hyperbolic_jet()).max_abs() < 1e-12);
    }

    #[test]
    fn decomposition_components_land_in_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let v = CubicVectorField::from_vector(&DVector::from_fn(80, |_, _| rng.random_range(-1.0..1.0)));
        let mut h = QuadJet::from_vector(&DVector::from_fn(100, |_, _| rng.random_range(-1.0..1.0)));
        h = h + delta_star(&v);
        let h = h + delta_star(&radialize(&h).unwrap());
        let d = rep_decompose(&h).unwrap();
        assert!((d.sum() - h).max_abs() < 1e-10);
        let op = |j: &QuadJet| curvature_operator(&curvature_at_origin(j));
        let s = op(&d.scalar);
        assert!((s.matrix - Mat6::identity() * (s.scal() / 12.0)).amax() < 1e-10);
        let wp = op(&d.wplus);
        assert!(wp.scal().abs() < 1e-10 && wp.ric0().amax() < 1e-10 && wp.rminus().amax() < 1e-10);
        let wm = op(&d.wminus);
        assert!(wm.scal().abs() < 1e-10 && wm.ric0().amax() < 1e-10 && wm.rplus().amax() < 1e-10);
        let r0 = op(&d.ric0);
        assert!(r0.rplus().amax() < 1e-10 && r0.rminus().amax() < 1e-10);
    }
}
