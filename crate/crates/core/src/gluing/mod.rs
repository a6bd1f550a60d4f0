//! Gluing `t·eh` into an orbifold chart: cutoff and weight profiles, the
//! catalog of model charts, the naive and corrected glued metrics and the
//! weighted `C⁰` norm.

pub mod scan;

pub use scan::{fit_slope, residual_scan, ScanGrid, ScanRow, ResidualScan, SlopeFit, MIN_DECADES, MIN_T_VALUES};

use crate::ehspace::{EhMetric, EuclideanMetric, HyperbolicMetric, OTensor, TensorField};
use crate::error::{Error, Result};
use crate::jets::{complex_hyperbolic_jet, einstein_check, real_hyperbolic_jet, QuadJet};
use crate::lin4::{GaugeElement, Mat4, SymTensor2, Vec4};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

fn psi(u: f64) -> (f64, f64, f64) {
    // exp(−1/u) and its first two derivatives, zero for u ≤ 0
    if u <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let e = (-1.0 / u).exp();
    let u2 = u * u;
    (e, e / u2, e * (1.0 / (u2 * u2) - 2.0 / (u2 * u)))
}

/// `χ₁` and its first two derivatives: `1` on `s ≤ 1`, `0` on `s ≥ 2`,
/// `ψ(2−s) / (ψ(2−s) + ψ(s−1))` in between with `ψ(u) = e^{−1/u}`.
pub fn chi1(s: f64) -> [f64; 3] {
    if s <= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    if s >= 2.0 {
        return [0.0, 0.0, 0.0];
    }
    let (a, a1, a2) = psi(2.0 - s);
    let (b, b1, b2) = psi(s - 1.0);
    // d/ds ψ(2−s) = −ψ'(2−s)
    let (da, dda) = (-a1, a2);
    let d = a + b;
    let dd = da + b1;
    let n = da * b - a * b1;
    let dn = dda * b - a * b2;
    [a / d, n / (d * d), dn / (d * d) - 2.0 * n * dd / (d * d * d)]
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("gluing parameter must be positive, got t = {t}")));
    }
    Ok(())
}

/// `χ_t(r) = χ₁(t^{1/4} r)` with `∂_r χ_t` and `∂_r² χ_t`.
pub fn cutoff_chi(t: f64, r: f64) -> Result<[f64; 3]> {
    check_t(t)?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be nonnegative, got {r}")));
    }
    let s = t.powf(0.25);
    let [c, c1, c2] = chi1(s * r);
    Ok([c, c1 * s, c2 * s * s])
}

/// `ρ = 1 + S(r − 1)(r − 1)` with `S(u) = 1 − χ₁(u + 1)`: `1` on `r ≤ 1`,
/// `r` on `r ≥ 2`, increasing.
pub fn rho_weight(r: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be nonnegative, got {r}")));
    }
    let u = r - 1.0;
    Ok(1.0 + (1.0 - chi1(u + 1.0)[0]) * u.max(0.0))
}

/// Inner and outer radius of the transition annulus `½t^{−1/4} ≤ r ≤ 2t^{−1/4}`.
pub fn transition_annulus(t: f64) -> Result<(f64, f64)> {
    check_t(t)?;
    let s = t.powf(-0.25);
    Ok((0.5 * s, 2.0 * s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartKind {
    Flat,
    RealHyperbolic,
    ComplexHyperbolic,
}

impl ChartKind {
    pub const ALL: [ChartKind; 3] = [ChartKind::Flat, ChartKind::RealHyperbolic, ChartKind::ComplexHyperbolic];

    pub fn name(&self) -> &'static str {
        match self {
            ChartKind::Flat => "flat",
            ChartKind::RealHyperbolic => "real-hyperbolic",
            ChartKind::ComplexHyperbolic => "complex-hyperbolic",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown chart {name:?}; expected one of flat, real-hyperbolic, complex-hyperbolic"
                ))
            })
    }
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An Einstein metric on a ball around a `Z₂`-orbifold point, in a chart
/// `y` with `g₀ = euc + H + O(|y|⁴)`, optionally rotated by a fixed
/// `F ∈ SO(4)`: `g₀'(y) = Fᵀ g₀(F y) F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbifoldChart {
    pub kind: ChartKind,
    pub lambda: f64,
    pub radius: f64,
    frame: Mat4,
}

/// Ball radius of the catalog charts.
pub const CHART_RADIUS: f64 = 1.0;

impl OrbifoldChart {
    pub fn catalog(kind: ChartKind) -> Result<Self> {
        let lambda = match kind {
            ChartKind::Flat => 0.0,
            ChartKind::RealHyperbolic => -3.0,
            ChartKind::ComplexHyperbolic => -1.5,
        };
        let chart = OrbifoldChart {
            kind,
            lambda,
            radius: CHART_RADIUS,
            frame: Mat4::identity(),
        };
        let check = einstein_check(&chart.jet());
        if !check.is_einstein || (check.lambda - lambda).abs() > 1e-8 {
            return Err(Error::Internal(format!("catalog jet of {kind} is not Einstein with Λ = {lambda}")));
        }
        Ok(chart)
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Self::catalog(ChartKind::from_name(name)?)
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn frame(&self) -> Mat4 {
        self.frame
    }

    /// The same metric in the chart `y ↦ F y`.
    pub fn rotated(&self, f: &Mat4) -> Result<Self> {
        let orth = (f.transpose() * f - Mat4::identity()).amax();
        if orth > 1e-12 || f.determinant() < 0.0 {
            return Err(Error::InvalidInput("chart rotation must lie in SO(4)".into()));
        }
        Ok(OrbifoldChart {
            frame: self.frame * f,
            ..*self
        })
    }

    /// Degree-2 Taylor coefficients `H` of `g₀` at the orbifold point.
    pub fn jet(&self) -> QuadJet {
        let base = match self.kind {
            ChartKind::Flat => QuadJet::zero(),
            ChartKind::RealHyperbolic => real_hyperbolic_jet(),
            ChartKind::ComplexHyperbolic => complex_hyperbolic_jet(),
        };
        base.pullback(&self.frame)
    }

    fn base_metric(&self, y: &Vec4) -> Result<SymTensor2> {
        match self.kind {
            ChartKind::Flat => EuclideanMetric.eval(y),
            ChartKind::RealHyperbolic => HyperbolicMetric::Real.eval(y),
            ChartKind::ComplexHyperbolic => HyperbolicMetric::Complex.eval(y),
        }
    }
}

impl TensorField for OrbifoldChart {
    type Value = SymTensor2;
    fn eval(&self, y: &Vec4) -> Result<SymTensor2> {
        if !(y.norm() <= self.radius) {
            return Err(Error::Domain(format!(
                "point at |y| = {} lies outside the {} chart of radius {}",
                y.norm(),
                self.name(),
                self.radius
            )));
        }
        Ok(self.base_metric(&(self.frame * y))?.pullback(&self.frame))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Builder {
    Naive,
    Corrected,
}

impl Builder {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "naive" => Ok(Builder::Naive),
            "corrected" => Ok(Builder::Corrected),
            _ => Err(Error::InvalidInput(format!("unknown builder {name:?}; expected naive or corrected"))),
        }
    }
}

pub type SharedField = Arc<dyn TensorField<Value = SymTensor2> + Send + Sync>;

/// An externally supplied correction `h` on Eguchi-Hanson together with the
/// obstruction coefficients `λ` it was solved with.
#[derive(Clone)]
pub struct Correction {
    pub h: SharedField,
    pub lambda: [f64; 3],
}

impl Correction {
    pub fn zero() -> Self {
        Correction {
            h: Arc::new(crate::ehspace::FnField(|_: &Vec4| Ok(SymTensor2::zero()))),
            lambda: [0.0; 3],
        }
    }
}

impl fmt::Debug for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Correction").field("lambda", &self.lambda).finish_non_exhaustive()
    }
}

/// Radii per probe direction for the admissibility check.
const PROBE_RADII: usize = 16;

/// A glued metric over `EH^t`, in Eguchi-Hanson chart coordinates `x`.
/// The orbifold zone is reached through `y = √t A x`, `A = φ.chart_matrix()`.
#[derive(Debug, Clone)]
pub struct GluedMetric {
    pub t: f64,
    pub phi: GaugeElement,
    pub chart: OrbifoldChart,
    pub builder: Builder,
    pub correction: Option<Correction>,
    a: Mat4,
}

fn pull(t: &SymTensor2, a: &Mat4) -> SymTensor2 {
    t.pullback(a)
}

impl GluedMetric {
    fn new(chart: &OrbifoldChart, t: f64, phi: GaugeElement, builder: Builder, correction: Option<Correction>) -> Result<Self> {
        check_t(t)?;
        let (_, outer) = transition_annulus(t)?;
        let reach = t.sqrt() * outer;
        if reach > chart.radius {
            return Err(Error::Admissibility(format!(
                "t = {t} needs the {} chart out to |y| = {reach:.6}, beyond its radius {}",
                chart.name(),
                chart.radius
            )));
        }
        let g = GluedMetric {
            t,
            phi,
            chart: *chart,
            builder,
            correction,
            a: phi.chart_matrix(),
        };
        g.probe()?;
        Ok(g)
    }

    fn probe(&self) -> Result<()> {
        let (_, outer) = transition_annulus(self.t)?;
        let dirs = crate::sphere::cell24_directions();
        for k in 0..PROBE_RADII {
            let r = 0.1 * (outer / 0.1).powf(k as f64 / (PROBE_RADII - 1) as f64);
            for d in &dirs {
                let x = d * r;
                let m = self.rescaled(&x)?.to_matrix();
                if m.cholesky().is_none() {
                    return Err(Error::Admissibility(format!(
                        "glued metric for t = {} is not positive definite at r = {r}",
                        self.t
                    )));
                }
            }
        }
        Ok(())
    }

    /// `(1/t)·(φ*s_t*g₀)` at `x`, i.e. `Aᵀ g₀(√t A x) A`.
    pub fn orbifold_piece(&self, x: &Vec4) -> Result<SymTensor2> {
        let y = self.a * x * self.t.sqrt();
        Ok(pull(&self.chart.eval(&y)?, &self.a))
    }

    /// `(1/t) s_t*g₀` without the gauge, used by the corrected builder.
    fn unrotated_orbifold_piece(&self, x: &Vec4) -> Result<SymTensor2> {
        self.chart.eval(&(x * self.t.sqrt()))
    }

    /// Pushforward `φ_*T` at `x`: `A T(Aᵀx) Aᵀ`.
    fn push<F: TensorField<Value = SymTensor2> + ?Sized>(&self, f: &F, x: &Vec4) -> Result<SymTensor2> {
        let at = self.a.transpose();
        Ok(pull(&f.eval(&(at * x))?, &at))
    }

    /// The Eguchi-Hanson metric as it sits in the glued chart: `eh` for the
    /// naive builder, `φ_*eh` for the corrected one.
    pub fn reference_eh(&self, x: &Vec4) -> Result<SymTensor2> {
        match self.builder {
            Builder::Naive => EhMetric.eval(x),
            Builder::Corrected => self.push(&EhMetric, x),
        }
    }

    /// `g/t`, which has the same Ricci tensor as `g`.
    pub fn rescaled(&self, x: &Vec4) -> Result<SymTensor2> {
        let [chi, _, _] = cutoff_chi(self.t, x.norm())?;
        match self.builder {
            Builder::Naive => {
                let inner = if chi > 0.0 { EhMetric.eval(x)? * chi } else { SymTensor2::zero() };
                let outer = if chi < 1.0 { self.orbifold_piece(x)? * (1.0 - chi) } else { SymTensor2::zero() };
                Ok(inner + outer)
            }
            Builder::Corrected => {
                let mut inner = SymTensor2::zero();
                if chi > 0.0 {
                    inner = self.push(&EhMetric, x)?;
                    if let Some(c) = &self.correction {
                        inner = inner + self.push(c.h.as_ref(), x)? * self.t;
                    }
                    inner = inner * chi;
                }
                let outer = if chi < 1.0 {
                    self.unrotated_orbifold_piece(x)? * (1.0 - chi)
                } else {
                    SymTensor2::zero()
                };
                Ok(inner + outer)
            }
        }
    }

    /// `t Σ λ_j χ_t φ_*o_j`, subtracted from the corrected residual.
    pub fn obstruction_term(&self, x: &Vec4) -> Result<SymTensor2> {
        let Some(c) = &self.correction else {
            return Ok(SymTensor2::zero());
        };
        if self.builder != Builder::Corrected || c.lambda == [0.0; 3] {
            return Ok(SymTensor2::zero());
        }
        let [chi, _, _] = cutoff_chi(self.t, x.norm())?;
        let mut out = SymTensor2::zero();
        for (j, &l) in c.lambda.iter().enumerate() {
            if l != 0.0 {
                out = out + self.push(&OTensor { i: j }, x)? * l;
            }
        }
        Ok(out * (self.t * chi))
    }
}

impl TensorField for GluedMetric {
    type Value = SymTensor2;
    fn eval(&self, x: &Vec4) -> Result<SymTensor2> {
        Ok(self.rescaled(x)? * self.t)
    }
}

/// `g⁰_{t,φ} = χ_t t eh + (1 − χ_t) φ*g₀`.
pub fn naive_glue(chart: &OrbifoldChart, t: f64, phi: GaugeElement) -> Result<GluedMetric> {
    GluedMetric::new(chart, t, phi, Builder::Naive, None)
}

/// `t[(1 − χ_t) s_t*g₀/t + χ_t φ_*(eh + t h)]`. With `h = 0` this is the
/// naive glue transported by `φ`, not the naive glue itself.
pub fn corrected_glue(chart: &OrbifoldChart, t: f64, phi: GaugeElement, h: Correction) -> Result<GluedMetric> {
    GluedMetric::new(chart, t, phi, Builder::Corrected, Some(h))
}

pub fn glue(chart: &OrbifoldChart, t: f64, phi: GaugeElement, builder: Builder) -> Result<GluedMetric> {
    match builder {
        Builder::Naive => naive_glue(chart, t, phi),
        Builder::Corrected => corrected_glue(chart, t, phi, Correction::zero()),
    }
}

/// `sup |(1/t) φ*s_t*g₀ − h_{t,φ}|_euc` over points of the transition annulus,
/// with `h_{t,φ} = eh + t h`.
pub fn matching_discrepancy(chart: &OrbifoldChart, t: f64, phi: GaugeElement, h: &Correction, grid: &[Vec4]) -> Result<f64> {
    let g = naive_glue(chart, t, phi)?;
    let (lo, hi) = transition_annulus(t)?;
    let mut sup = 0.0f64;
    let mut any = false;
    for x in grid {
        let r = x.norm();
        if r < lo || r > hi {
            continue;
        }
        any = true;
        let hx = EhMetric.eval(x)? + h.h.eval(x)? * t;
        let d = g.orbifold_piece(x)? - hx;
        sup = sup.max(d.norm());
    }
    if !any {
        return Err(Error::InvalidInput("no grid point lies in the transition annulus".into()));
    }
    Ok(sup)
}

/// Weights of the glued `C⁰` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedNormSpec {
    pub delta0: f64,
    pub delta_inf: f64,
    pub t: f64,
    /// Conformal weight of the bundle; `−2` for symmetric 2-tensors.
    pub ell: f64,
}

impl WeightedNormSpec {
    pub const DEFAULT_WEIGHT: f64 = 0.1;

    pub fn new(t: f64) -> Self {
        WeightedNormSpec {
            delta0: Self::DEFAULT_WEIGHT,
            delta_inf: Self::DEFAULT_WEIGHT,
            t,
            ell: -2.0,
        }
    }

    fn validate(&self) -> Result<()> {
        check_t(self.t)?;
        if !(self.delta0 > 0.0 && self.delta_inf > 0.0) {
            return Err(Error::InvalidInput("weights δ₀, δ_∞ must be positive".into()));
        }
        if self.ell != -2.0 {
            return Err(Error::InvalidInput(format!(
                "symmetric 2-tensors have conformal weight −2, got ℓ = {}",
                self.ell
            )));
        }
        Ok(())
    }
}

/// `r̃` on the orbifold: `|y|` on `|y| ≤ R/2`, `1` outside `|y| ≤ R`.
pub fn r_tilde(y_norm: f64, radius: f64) -> f64 {
    let half = 0.5 * radius;
    if y_norm <= half {
        return y_norm;
    }
    let s = 1.0 - chi1(1.0 + (y_norm - half) / half)[0];
    (1.0 - s) * y_norm + s
}

/// `|s|_g² = g^{ac} g^{bd} s_ab s_cd`.
pub fn tensor_norm(s: &SymTensor2, g: &Mat4) -> Result<f64> {
    let ginv = g
        .try_inverse()
        .ok_or_else(|| Error::Internal("singular metric in a tensor norm".into()))?;
    let m = s.to_matrix();
    Ok((ginv * m * ginv).component_mul(&m).sum().max(0.0).sqrt())
}

/// Discrete weighted `C⁰` norm of a symmetric 2-tensor `s` given in the
/// glued chart coordinates `x`:
/// `t^{(δ₀+ℓ)/2} sup ρ^{δ₀}|χ_t s|_eh + sup r̃^{δ₀}|(1 − χ_t)s|_{g₀}`.
/// The charts are local, so the boundary weight `x^{−δ_∞}` is `1`.
pub fn weighted_norm<F>(field: &F, chart: &OrbifoldChart, spec: &WeightedNormSpec, grid: &[Vec4]) -> Result<f64>
where
    F: TensorField<Value = SymTensor2> + ?Sized,
{
    spec.validate()?;
    if grid.is_empty() {
        return Err(Error::InvalidInput("weighted norm needs a nonempty grid".into()));
    }
    let t = spec.t;
    let (mut eh_sup, mut m0_sup) = (0.0f64, 0.0f64);
    let (mut hits_eh, mut hits_m0) = (false, false);
    for x in grid {
        let r = x.norm();
        let [chi, _, _] = cutoff_chi(t, r)?;
        let s = field.eval(x)?;
        if chi > 0.0 {
            hits_eh = true;
            let n = tensor_norm(&(s * chi), &EhMetric.eval(x)?.to_matrix())?;
            eh_sup = eh_sup.max(rho_weight(r)?.powf(spec.delta0) * n);
        }
        if chi < 1.0 {
            hits_m0 = true;
            let y = x * t.sqrt();
            // dx = dy/√t, so covariant components scale by t^{ℓ/2}
            let sy = s * ((1.0 - chi) * t.powf(0.5 * spec.ell));
            let n = tensor_norm(&sy, &chart.eval(&y)?.to_matrix())?;
            m0_sup = m0_sup.max(r_tilde(y.norm(), chart.radius).powf(spec.delta0) * n);
        }
    }
    if !(hits_eh && hits_m0) {
        return Err(Error::InvalidInput("grid must meet both the Eguchi-Hanson and the orbifold zone".into()));
    }
    Ok(t.powf(0.5 * (spec.delta0 + spec.ell)) * eh_sup + m0_sup)
}
