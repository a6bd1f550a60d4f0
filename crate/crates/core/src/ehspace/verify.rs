//! Pointwise residuals of the Eguchi-Hanson identities on a sample grid.

use super::calculus::{codifferential2, exterior_d1, exterior_d2, laplacian0, operator_b, operator_p, ricci, DiffConfig};
use super::fields::{
    eh_kahler_form,
    check_point, f_profile, invariant_coframe, EhMetric, FFunction, FnField, KTensor, KhatTensor, OTensor, OmegaForm,
    TensorField, XiForm,
};
use crate::error::{Error, Result};
use crate::lin4::Vec4;
use crate::parallel::ordered_map;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyGrid {
    pub points: Vec<Vec4>,
}

impl VerifyGrid {
    /// `n` points with log-spaced radii in `[r_min, r_max]` and seeded random
    /// directions.
    pub fn log_radial(n: usize, r_min: f64, r_max: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("empty sample grid".into()));
        }
        if !(r_min >= super::MIN_SCAN_RADIUS && r_max >= r_min && r_max.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "grid radii must satisfy {} ≤ r_min ≤ r_max, got [{r_min}, {r_max}]",
                super::MIN_SCAN_RADIUS
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..n)
            .map(|k| {
                let s = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
                let r = r_min * (r_max / r_min).powf(s);
                loop {
                    let v = Vec4::from_fn(|_, _| rng.random_range(-1.0..1.0));
                    let n2 = v.norm_squared();
                    if n2 > 1e-2 && n2 <= 1.0 {
                        break v / n2.sqrt() * r;
                    }
                }
            })
            .collect();
        Ok(VerifyGrid { points })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRow {
    pub name: String,
    pub tolerance: f64,
    pub max_residual: f64,
    pub worst_radius: f64,
    pub residuals: Vec<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub radii: Vec<f64>,
    pub rows: Vec<IdentityRow>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    /// One line per (identity, point): `identity,point,r,residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("identity,point,r,residual\n");
        for row in &self.rows {
            for (k, (r, v)) in self.radii.iter().zip(&row.residuals).enumerate() {
                out.push_str(&format!("{},{},{:.16e},{:.16e}\n", row.name, k, r, v));
            }
        }
        out
    }
}

/// Named identity with its default tolerance.
pub const IDENTITIES: [(&str, f64); 10] = [
    ("ricci_flat", 1e-6),
    ("omega_closed", 1e-7),
    ("omega_anti_self_dual", 1e-9),
    ("codifferential_xi", 1e-8),
    ("d_codifferential_xi", 1e-6),
    ("laplacian_f", 1e-6),
    ("p_kernel_o", 1e-5),
    ("p_khat_equals_o", 1e-5),
    ("bianchi_o", 1e-6),
    ("trace_k", 1e-8),
];

fn residuals_at(x: &Vec4, cfg: &DiffConfig) -> Result<[f64; 10]> {
    let r = check_point(x)?;
    let g = EhMetric.eval(x)?.to_matrix();
    let ric = ricci(&EhMetric, x, cfg)?.value.norm_sq_with(&g).sqrt();
    let d_omega = exterior_d2(&OmegaForm, x, cfg)?.value.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let w = OmegaForm.eval(x)?;
    let asd = (w.star_with(&g) + w).max_abs();
    let alpha1 = invariant_coframe(x)[1];
    let expected7 = alpha1 * (r.powi(4) / (2.0 * f_profile(r)));
    let eq7 = (codifferential2(&EhMetric, &XiForm, x, cfg)?.value - expected7).amax();
    let codiff = FnField(|y: &Vec4| -> Result<Vec4> { Ok(codifferential2(&EhMetric, &XiForm, y, cfg)?.value) });
    let dd = exterior_d1(&codiff, x, &DiffConfig { max_error: cfg.max_error * 10.0, ..*cfg })?.value;
    let eq8 = (dd - eh_kahler_form(0, x)? - w).max_abs();
    let lap = (laplacian0(&EhMetric, &FFunction, x, cfg)?.value + 8.0).abs();
    let mut p_o: f64 = 0.0;
    let mut p_k: f64 = 0.0;
    let mut b_o: f64 = 0.0;
    let mut tr_k: f64 = 0.0;
    for i in 0..3 {
        let o = OTensor { i };
        p_o = p_o.max(operator_p(&EhMetric, &o, x, cfg)?.value.norm_sq_with(&g).sqrt());
        let pk = operator_p(&EhMetric, &KhatTensor { i }, x, cfg)?.value - o.eval(x)?;
        p_k = p_k.max(pk.norm_sq_with(&g).sqrt());
        b_o = b_o.max(operator_b(&EhMetric, &o, x, cfg)?.value.amax());
        tr_k = tr_k.max(KTensor { i }.eval(x)?.trace_with(&g).abs());
    }
    Ok([ric, d_omega, asd, eq7, eq8, lap, p_o, p_k, b_o, tr_k])
}

/// Evaluates every identity at every grid point. `tolerance`, when given,
/// replaces all default tolerances.
pub fn verify_identities(grid: &VerifyGrid, cfg: &DiffConfig, tolerance: Option<f64>) -> Result<VerifyReport> {
    if grid.points.is_empty() {
        return Err(Error::InvalidInput("empty sample grid".into()));
    }
    if let Some(t) = tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {t}")));
        }
    }
    let per_point: Vec<Result<[f64; 10]>> = ordered_map(&grid.points, |x| residuals_at(x, cfg));
    let mut table = Vec::with_capacity(per_point.len());
    for res in per_point {
        table.push(res?);
    }
    let radii: Vec<f64> = grid.points.iter().map(|x| x.norm()).collect();
    let rows = IDENTITIES
        .iter()
        .enumerate()
        .map(|(k, (name, default_tol))| {
            let residuals: Vec<f64> = table.iter().map(|row| row[k]).collect();
            let (worst, max_residual) = residuals
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |acc, (j, &v)| if v > acc.1 || v.is_nan() { (j, v) } else { acc });
            let tol = tolerance.unwrap_or(*default_tol);
            IdentityRow {
                name: name.to_string(),
                tolerance: tol,
                max_residual,
                worst_radius: radii[worst],
                residuals,
                passed: max_residual <= tol,
            }
        })
        .collect();
    Ok(VerifyReport { radii, rows })
}
