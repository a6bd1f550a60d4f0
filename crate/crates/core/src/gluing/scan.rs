//! Residual scans `t ↦ sup |Ric(g_t) − Λ g_t|_eh` and their log-log slopes.

use super::{glue, tensor_norm, transition_annulus, Builder, GluedMetric, OrbifoldChart};
use crate::ehspace::{geometry, DiffConfig, TensorField};
use crate::error::{Error, Result};
use crate::lin4::{GaugeElement, SymTensor2, Vec4};
use crate::parallel::ordered_map;
use crate::sphere::cell24_directions;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Fewest `t` values accepted by a slope fit.
pub const MIN_T_VALUES: usize = 4;

/// Smallest accepted `log₁₀(t_max / t_min)`.
pub const MIN_DECADES: f64 = 1.5;

/// Product grid: log-spaced radii in `[r_min, 2t^{−1/4}]` times fixed
/// directions on `S³`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanGrid {
    pub n_radii: usize,
    pub r_min: f64,
    #[serde(skip)]
    pub directions: Vec<Vec4>,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid::new(24)
    }
}

impl ScanGrid {
    pub fn new(n_radii: usize) -> Self {
        ScanGrid {
            n_radii,
            r_min: 0.3,
            directions: cell24_directions(),
        }
    }

    pub fn radii(&self, t: f64) -> Result<Vec<f64>> {
        if self.n_radii < 2 || self.directions.is_empty() {
            return Err(Error::InvalidInput("scan grid needs at least 2 radii and 1 direction".into()));
        }
        let (_, outer) = transition_annulus(t)?;
        if !(self.r_min > 0.0 && self.r_min < outer) {
            return Err(Error::InvalidInput(format!(
                "grid start {} must lie in (0, {outer})",
                self.r_min
            )));
        }
        let n = self.n_radii;
        Ok((0..n)
            .map(|k| self.r_min * (outer / self.r_min).powf(k as f64 / (n - 1) as f64))
            .collect())
    }

    pub fn points(&self, t: f64) -> Result<Vec<Vec4>> {
        Ok(self
            .radii(t)?
            .into_iter()
            .flat_map(|r| self.directions.iter().map(move |d| d * r))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub t: f64,
    pub sup_residual: f64,
    pub argmax_r: f64,
    pub grid_size: usize,
    pub annulus: [f64; 2],
    pub argmax_in_annulus: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% Student-t interval for the slope.
    pub ci: [f64; 2],
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualScan {
    pub chart: String,
    pub builder: Builder,
    pub gauge: [f64; 4],
    pub grid: ScanGrid,
    pub rows: Vec<ScanRow>,
    pub fit: SlopeFit,
}

impl ResidualScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,sup_residual,argmax_r\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::report::fmt_f64(r.t),
                crate::report::fmt_f64(r.sup_residual),
                crate::report::fmt_f64(r.argmax_r)
            ));
        }
        out
    }
}

/// Least-squares fit of `log y = a + s log t`.
pub fn fit_slope(t: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if t.len() != y.len() {
        return Err(Error::InvalidInput("slope fit needs matching t and residual lists".into()));
    }
    if t.len() < MIN_T_VALUES {
        return Err(Error::InvalidInput(format!(
            "slope fit needs at least {MIN_T_VALUES} values of t, got {}",
            t.len()
        )));
    }
    if t.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput("slope fit needs positive finite values".into()));
    }
    let (lo, hi) = t.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let decades = (hi / lo).log10();
    if decades < MIN_DECADES - 1e-12 {
        return Err(Error::InvalidInput(format!(
            "t values span {decades:.3} decades; at least {MIN_DECADES} are needed"
        )));
    }
    let lx: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let df = n - 2.0;
    let stderr = (sse / df / sxx).sqrt();
    let q = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::Internal(format!("Student-t quantile: {e}")))?
        .inverse_cdf(0.975);
    Ok(SlopeFit {
        slope,
        intercept,
        ci: [slope - q * stderr, slope + q * stderr],
        stderr,
    })
}

struct Rescaled<'a>(&'a GluedMetric);

impl TensorField for Rescaled<'_> {
    type Value = SymTensor2;
    fn eval(&self, x: &Vec4) -> Result<SymTensor2> {
        self.0.rescaled(x)
    }
}

/// `|Ric(g) − Λ g − t Σ λ_j χ_t o_j|_eh` at `x`.
pub fn residual_at(g: &GluedMetric, x: &Vec4, cfg: &DiffConfig) -> Result<f64> {
    let geo = geometry(&Rescaled(g), x, cfg)?;
    let ric = SymTensor2::from_matrix(&geo.ricci());
    let lambda_g = SymTensor2::from_matrix(&geo.g) * (g.chart.lambda * g.t);
    let res = ric - lambda_g - g.obstruction_term(x)?;
    tensor_norm(&res, &g.reference_eh(x)?.to_matrix())
}

/// Sup of the Einstein residual of the glued metric over the scan grid for
/// each `t`, with a log-log slope fit.
pub fn residual_scan(
    builder: Builder,
    chart: &OrbifoldChart,
    phi: GaugeElement,
    t_list: &[f64],
    grid: &ScanGrid,
    cfg: &DiffConfig,
) -> Result<ResidualScan> {
    if t_list.is_empty() {
        return Err(Error::InvalidInput("empty t list".into()));
    }
    let metrics: Vec<GluedMetric> = t_list
        .iter()
        .map(|&t| glue(chart, t, phi, builder))
        .collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for (k, &t) in t_list.iter().enumerate() {
        for x in grid.points(t)? {
            jobs.push((k, x));
        }
    }
    let values: Vec<f64> = ordered_map(&jobs, |(k, x)| {
        residual_at(&metrics[*k], x, cfg).map_err(|e| match e {
            Error::Accuracy(m) => Error::Accuracy(format!("t = {}, r = {}: {m}", t_list[*k], x.norm())),
            other => other,
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(t_list.len());
    for (k, &t) in t_list.iter().enumerate() {
        let mut sup = (f64::NEG_INFINITY, 0.0);
        let mut count = 0;
        for ((kj, x), v) in jobs.iter().zip(&values) {
            if *kj != k {
                continue;
            }
            count += 1;
            if *v > sup.0 {
                sup = (*v, x.norm());
            }
        }
        let (lo, hi) = transition_annulus(t)?;
        rows.push(ScanRow {
            t,
            sup_residual: sup.0,
            argmax_r: sup.1,
            grid_size: count,
            annulus: [lo, hi],
            argmax_in_annulus: (lo..=hi).contains(&sup.1),
        });
    }
    let fit = fit_slope(
        &rows.iter().map(|r| r.t).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.sup_residual).collect::<Vec<_>>(),
    )?;
    Ok(ResidualScan {
        chart: chart.name().to_string(),
        builder,
        gauge: phi.quaternion(),
        grid: grid.clone(),
        rows,
        fit,
    })
}
