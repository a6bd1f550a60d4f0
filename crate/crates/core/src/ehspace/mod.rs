//! The Eguchi-Hanson metric and its distinguished tensors on the chart
//! `R⁴ ∖ {0}`, with numerical covariant calculus and `L²` quadrature.

pub mod calculus;
pub mod fields;
pub mod verify;

pub use calculus::{
    codifferential2, exterior_d1, exterior_d2, geometry, jet1, jet2, laplacian0, numeric_connection,
    numeric_curvature, operator_b, operator_p, ricci, Christoffel, DiffConfig, Estimate, Geometry,
};
pub use fields::{
    eh_asymptotic_defect, eh_coframe, eh_complex_structure, eh_kahler_form, eh_metric, f_profile, invariant_coframe, k_tensor,
    khat_tensor, o_asymptotic, o_tensor, omega_form, EhMetric, EuclideanMetric, FFunction, FnField,
    HyperbolicMetric, KTensor, KhatTensor, MetricField, OTensor, OmegaForm, TensorField, Tensorial, XiForm,
};
pub use verify::{verify_identities, IdentityRow, VerifyGrid, VerifyReport};

use crate::error::{Error, Result};
use crate::jets::CurvatureTensor;
use crate::lin4::{Mat4, SymTensor2, Vec4};
use crate::sphere::{gauss_legendre, hopf_rule, S3_MOD_Z2_VOLUME};
use std::sync::OnceLock;

/// Smallest radius used by grid scans; the Cartesian chart degenerates at
/// the zero section.
pub const MIN_SCAN_RADIUS: f64 = 0.1;

/// Requested accuracy of `‖Ω‖²`.
pub const OMEGA_NORM_TOL: f64 = 1e-10;

/// Gauss–Legendre nodes per radial panel.
const PANEL_NODES: usize = 20;

/// Geometric radial panels `[0, 1/4], [1/4, 1/2], …, [R/2, R]`.
fn radial_panels(r_max: f64) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.25)];
    let mut a = 0.25;
    while a < r_max {
        let b = (2.0 * a).min(r_max);
        out.push((a, b));
        a = b;
    }
    out
}

fn radial_quadrature(r_max: f64, nodes: usize) -> Vec<(f64, f64)> {
    let (z, w) = gauss_legendre(nodes);
    let mut out = Vec::new();
    for (a, b) in radial_panels(r_max) {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (zi, wi) in z.iter().zip(&w) {
            out.push((mid + half * zi, half * wi));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormValue {
    pub value: f64,
    /// Analytic bound on the discarded tail `∫_{R}^∞`.
    pub tail_bound: f64,
    pub cutoff: f64,
}

/// `∫_{R⁴/Z₂} |Ω|²_eh dvol_eh` truncated at `r_max`.
///
/// `|Ω|²` and the volume density are `U(2)`-invariant, so the integrand is
/// evaluated on one ray and multiplied by `Vol(S³/Z₂) = π²`. The tail uses
/// `|Ω|² ≤ 2 r⁻⁸`.
pub fn l2_norm_omega_with(r_max: f64) -> Result<NormValue> {
    if !(r_max > 1.0 && r_max.is_finite()) {
        return Err(Error::InvalidInput(format!("radial cutoff must exceed 1, got {r_max}")));
    }
    let dir = Vec4::new(0.5, 0.5, 0.5, 0.5);
    let mut sum = 0.0;
    for (r, w) in radial_quadrature(r_max, PANEL_NODES) {
        let x = dir * r;
        let ginv = EhMetric.inverse(&x)?;
        let f = OmegaForm.eval(&x)?.to_skew();
        let n2 = 0.5 * (ginv * f * ginv).component_mul(&f).sum();
        sum += w * n2 * r.powi(3);
    }
    let tail_bound = S3_MOD_Z2_VOLUME / (2.0 * r_max.powi(4));
    Ok(NormValue {
        value: S3_MOD_Z2_VOLUME * sum,
        tail_bound,
        cutoff: r_max,
    })
}

/// Default cutoff for `‖Ω‖²`.
pub const OMEGA_NORM_CUTOFF: f64 = 1024.0;

/// `‖Ω‖²_{L²}` with the orthonormal `dxⁱ∧dxʲ` convention; cached.
pub fn l2_norm_omega() -> Result<f64> {
    static CACHE: OnceLock<Result<f64>> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let v = l2_norm_omega_with(OMEGA_NORM_CUTOFF)?;
            if v.tail_bound > OMEGA_NORM_TOL {
                return Err(Error::Accuracy(format!(
                    "tail bound {:e} of the Ω norm exceeds {OMEGA_NORM_TOL:e}",
                    v.tail_bound
                )));
            }
            Ok(v.value)
        })
        .clone()
}

/// `∫_{R⁴/Z₂} ⟨a, b⟩_eh dvol_eh` by a Hopf product rule on spheres and
/// Gauss–Legendre panels in `r ≤ r_max`.
pub fn l2_inner_sym<A, B>(a: &A, b: &B, r_max: f64) -> Result<f64>
where
    A: TensorField<Value = SymTensor2> + ?Sized,
    B: TensorField<Value = SymTensor2> + ?Sized,
{
    let sphere = hopf_rule(6, 10);
    let mut sum = 0.0;
    for (r, w) in radial_quadrature(r_max, 12) {
        let mut shell = 0.0;
        for (dir, ws) in &sphere {
            let x = dir * r;
            let ginv = EhMetric.inverse(&x)?;
            let (am, bm) = (a.eval(&x)?.to_matrix(), b.eval(&x)?.to_matrix());
            shell += ws * (ginv * am * ginv).component_mul(&bm).sum();
        }
        sum += w * r.powi(3) * shell;
    }
    // the full-sphere rule counts each Z₂ orbit twice
    Ok(0.5 * sum)
}

/// Orthonormal coframe, metric and numeric curvature of `eh` at a point.
#[derive(Debug, Clone)]
pub struct FrameData {
    pub x: Vec4,
    pub coframe: [Vec4; 4],
    pub metric: Mat4,
    pub christoffel: Christoffel,
    pub curvature: CurvatureTensor,
}

pub fn frame_data(x: &Vec4, cfg: &DiffConfig) -> Result<FrameData> {
    let geo = geometry(&EhMetric, x, cfg)?;
    Ok(FrameData {
        x: *x,
        coframe: eh_coframe(x)?,
        metric: geo.g,
        christoffel: geo.gamma,
        curvature: geo.riemann,
    })
}
