//! Numerical covariant calculus by central differences.
//!
//! Derivatives use fourth-order stencils (five points per axis, a 4×4 product
//! stencil for mixed second derivatives) at steps `h` and `h/2`, combined by
//! one Richardson step. The difference between the two levels, divided by
//! 15, is reported as the error estimate.

use super::fields::{FnField, Tensorial, TensorField};
use crate::error::{Error, Result};
use crate::jets::CurvatureTensor;
use crate::lin4::{Form2, Mat4, SymTensor2, Vec4};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffConfig {
    /// Base step, scaled by `max(1, |x|)`.
    pub step: f64,
    /// Combine the steps `h` and `h/2`; otherwise `h/2` alone is used.
    pub richardson: bool,
    /// Largest accepted error estimate, relative to `max(1, |derivative|)`.
    pub max_error: f64,
}

impl Default for DiffConfig {
    fn default() -> Self {
        DiffConfig {
            step: 1e-3,
            richardson: true,
            max_error: 1e-5,
        }
    }
}

impl DiffConfig {
    fn step_at(&self, x: &Vec4) -> Result<f64> {
        let h = self.step * x.norm().max(1.0);
        if !(h.is_finite() && h > 1e-9) {
            return Err(Error::Accuracy(format!("difference step {h:e} underflows")));
        }
        Ok(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

/// Value, gradient and Hessian of a flattened field.
#[derive(Debug, Clone)]
pub struct Jet2 {
    pub value: Vec<f64>,
    pub d1: [Vec<f64>; 4],
    pub d2: [[Vec<f64>; 4]; 4],
    pub err1: f64,
    pub err2: f64,
}

#[derive(Debug, Clone)]
pub struct Jet1 {
    pub value: Vec<f64>,
    pub d1: [Vec<f64>; 4],
    pub err1: f64,
}

fn flat<F: TensorField + ?Sized>(f: &F, x: &Vec4) -> Result<Vec<f64>> {
    let v = f.eval(x)?;
    let mut out = vec![0.0; F::Value::N];
    v.write(&mut out);
    Ok(out)
}

fn axis(a: usize, s: f64) -> Vec4 {
    let mut v = Vec4::zeros();
    v[a] = s;
    v
}

const OFFSETS: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];
const FIRST_W: [f64; 4] = [1.0, -8.0, 8.0, -1.0];

fn combine(fine: &[f64], coarse: &[f64], richardson: bool) -> (Vec<f64>, f64) {
    let mut err: f64 = 0.0;
    let out = fine
        .iter()
        .zip(coarse)
        .map(|(f, c)| {
            err = err.max((f - c).abs() / 15.0);
            if richardson {
                (16.0 * f - c) / 15.0
            } else {
                *f
            }
        })
        .collect();
    (out, err)
}

fn first_level<F: TensorField + ?Sized>(f: &F, x: &Vec4, h: f64) -> Result<[Vec<f64>; 4]> {
    let n = F::Value::N;
    let mut d1: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
    for a in 0..4 {
        for (s, w) in OFFSETS.iter().zip(FIRST_W) {
            let v = flat(f, &(x + axis(a, s * h)))?;
            for k in 0..n {
                d1[a][k] += w * v[k] / (12.0 * h);
            }
        }
    }
    Ok(d1)
}

type Level2 = ([Vec<f64>; 4], [[Vec<f64>; 4]; 4]);

fn second_level<F: TensorField + ?Sized>(f: &F, x: &Vec4, h: f64, center: &[f64]) -> Result<Level2> {
    let n = F::Value::N;
    let mut d1: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
    let mut d2: [[Vec<f64>; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| vec![0.0; n]));
    const PURE_W: [f64; 4] = [-1.0, 16.0, 16.0, -1.0];
    for a in 0..4 {
        for (j, s) in OFFSETS.iter().enumerate() {
            let v = flat(f, &(x + axis(a, s * h)))?;
            for k in 0..n {
                d1[a][k] += FIRST_W[j] * v[k] / (12.0 * h);
                d2[a][a][k] += PURE_W[j] * v[k] / (12.0 * h * h);
            }
        }
        for k in 0..n {
            d2[a][a][k] -= 30.0 * center[k] / (12.0 * h * h);
        }
    }
    for a in 0..4 {
        for b in a + 1..4 {
            let mut acc = vec![0.0; n];
            for (p, sp) in OFFSETS.iter().enumerate() {
                for (q, sq) in OFFSETS.iter().enumerate() {
                    let v = flat(f, &(x + axis(a, sp * h) + axis(b, sq * h)))?;
                    let w = FIRST_W[p] * FIRST_W[q] / (144.0 * h * h);
                    for k in 0..n {
                        acc[k] += w * v[k];
                    }
                }
            }
            d2[a][b] = acc.clone();
            d2[b][a] = acc;
        }
    }
    Ok((d1, d2))
}

fn check(err: f64, scale: f64, cfg: &DiffConfig, what: &str, x: &Vec4) -> Result<()> {
    if !err.is_finite() || err > cfg.max_error * scale.max(1.0) {
        return Err(Error::Accuracy(format!(
            "{what} at x = ({:.6}, {:.6}, {:.6}, {:.6}): error estimate {err:e} exceeds {:e}",
            x[0],
            x[1],
            x[2],
            x[3],
            cfg.max_error * scale.max(1.0)
        )));
    }
    Ok(())
}

fn max_abs(vs: &[Vec<f64>]) -> f64 {
    vs.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn jet1<F: TensorField + ?Sized>(f: &F, x: &Vec4, cfg: &DiffConfig) -> Result<Jet1> {
    let h = cfg.step_at(x)?;
    let value = flat(f, x)?;
    let coarse = first_level(f, x, h)?;
    let fine = first_level(f, x, 0.5 * h)?;
    let mut err1: f64 = 0.0;
    let d1 = std::array::from_fn(|a| {
        let (v, e) = combine(&fine[a], &coarse[a], cfg.richardson);
        err1 = err1.max(e);
        v
    });
    check(err1, max_abs(&d1), cfg, "first derivative", x)?;
    Ok(Jet1 { value, d1, err1 })
}

pub fn jet2<F: TensorField + ?Sized>(f: &F, x: &Vec4, cfg: &DiffConfig) -> Result<Jet2> {
    let h = cfg.step_at(x)?;
    let value = flat(f, x)?;
    let (c1, c2) = second_level(f, x, h, &value)?;
    let (f1, f2) = second_level(f, x, 0.5 * h, &value)?;
    let mut err1: f64 = 0.0;
    let mut err2: f64 = 0.0;
    let d1 = std::array::from_fn(|a| {
        let (v, e) = combine(&f1[a], &c1[a], cfg.richardson);
        err1 = err1.max(e);
        v
    });
    let d2 = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let (v, e) = combine(&f2[a][b], &c2[a][b], cfg.richardson);
            err2 = err2.max(e);
            v
        })
    });
    check(err1, max_abs(&d1), cfg, "first derivative", x)?;
    let flat2: Vec<Vec<f64>> = d2.iter().flat_map(|r: &[Vec<f64>; 4]| r.iter().cloned()).collect();
    check(err2, max_abs(&flat2), cfg, "second derivative", x)?;
    Ok(Jet2 {
        value,
        d1,
        d2,
        err1,
        err2,
    })
}

fn sym(v: &[f64]) -> Mat4 {
    SymTensor2::read(v).to_matrix()
}

pub type Christoffel = [[[f64; 4]; 4]; 4];

/// Metric, Levi-Civita connection and curvature at a point.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub g: Mat4,
    pub ginv: Mat4,
    /// `dg[e] = ∂_e g`.
    pub dg: [Mat4; 4],
    /// `Γ^a_{bc}` as `gamma[a][b][c]`.
    pub gamma: Christoffel,
    /// `∂_e Γ^a_{bc}` as `dgamma[e][a][b][c]`.
    pub dgamma: [Christoffel; 4],
    pub riemann: CurvatureTensor,
    /// Error estimates of the first and second derivatives of `g`.
    pub err1: f64,
    pub err2: f64,
}

pub fn geometry<G: TensorField<Value = SymTensor2> + ?Sized>(g: &G, x: &Vec4, cfg: &DiffConfig) -> Result<Geometry> {
    let jet = jet2(g, x, cfg)?;
    let gm = sym(&jet.value);
    let ginv = gm
        .try_inverse()
        .ok_or_else(|| Error::Domain("metric is singular".into()))?;
    let dg: [Mat4; 4] = std::array::from_fn(|e| sym(&jet.d1[e]));
    let ddg: [[Mat4; 4]; 4] = std::array::from_fn(|e| std::array::from_fn(|f| sym(&jet.d2[e][f])));
    let dginv: [Mat4; 4] = std::array::from_fn(|e| -(ginv * dg[e] * ginv));
    let mut gamma = [[[0.0; 4]; 4]; 4];
    let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let mut s = 0.0;
                for d in 0..4 {
                    s += ginv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                }
                gamma[a][b][c] = 0.5 * s;
                for e in 0..4 {
                    let mut t = 0.0;
                    for d in 0..4 {
                        t += dginv[e][(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)])
                            + ginv[(a, d)] * (ddg[e][b][(d, c)] + ddg[e][c][(d, b)] - ddg[e][d][(b, c)]);
                    }
                    dgamma[e][a][b][c] = 0.5 * t;
                }
            }
        }
    }
    // R^a_{bcd} = ∂_cΓ^a_{db} − ∂_dΓ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}
    let mut up = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut s = dgamma[c][a][d][b] - dgamma[d][a][c][b];
                    for e in 0..4 {
                        s += gamma[a][c][e] * gamma[e][d][b] - gamma[a][d][e] * gamma[e][c][b];
                    }
                    up[a][b][c][d] = s;
                }
            }
        }
    }
    let riemann = CurvatureTensor::from_fn(|a, b, c, d| (0..4).map(|e| gm[(a, e)] * up[e][b][c][d]).sum());
    Ok(Geometry {
        g: gm,
        ginv,
        dg,
        gamma,
        dgamma,
        riemann,
        err1: jet.err1,
        err2: jet.err2,
    })
}

impl Geometry {
    pub fn ricci(&self) -> Mat4 {
        self.riemann.ricci_with(&self.ginv)
    }

    pub fn scal(&self) -> f64 {
        self.ginv.component_mul(&self.ricci()).sum()
    }

    /// Crude bound on the error of curvature quantities.
    pub fn curvature_error(&self) -> f64 {
        let s = self.ginv.amax();
        s * s * (self.err2 + self.err1 * (1.0 + self.err1))
    }

    /// `(R̊h)_{bd} = R_{abcd} h^{ac}`.
    pub fn curvature_action(&self, h: &Mat4) -> Mat4 {
        let raised = self.ginv * h * self.ginv;
        Mat4::from_fn(|b, d| {
            let mut s = 0.0;
            for a in 0..4 {
                for c in 0..4 {
                    s += self.riemann.get(a, b, c, d) * raised[(a, c)];
                }
            }
            s
        })
    }
}

pub fn numeric_connection<G: TensorField<Value = SymTensor2> + ?Sized>(
    g: &G,
    x: &Vec4,
    cfg: &DiffConfig,
) -> Result<Estimate<Christoffel>> {
    let geo = geometry(g, x, cfg)?;
    Ok(Estimate {
        value: geo.gamma,
        error: geo.ginv.amax() * geo.err1,
    })
}

pub fn numeric_curvature<G: TensorField<Value = SymTensor2> + ?Sized>(
    g: &G,
    x: &Vec4,
    cfg: &DiffConfig,
) -> Result<Estimate<CurvatureTensor>> {
    let geo = geometry(g, x, cfg)?;
    Ok(Estimate {
        value: geo.riemann,
        error: geo.curvature_error(),
    })
}

pub fn ricci<G: TensorField<Value = SymTensor2> + ?Sized>(g: &G, x: &Vec4, cfg: &DiffConfig) -> Result<Estimate<SymTensor2>> {
    let geo = geometry(g, x, cfg)?;
    Ok(Estimate {
        value: SymTensor2::from_matrix(&geo.ricci()),
        error: geo.curvature_error(),
    })
}

/// First and second covariant derivatives of a symmetric 2-tensor.
struct CovariantJet {
    h: Mat4,
    /// `nabla[a] = ∇_a h`.
    nabla: [Mat4; 4],
    /// `nabla2[a][b] = ∇_a ∇_b h`.
    nabla2: [[Mat4; 4]; 4],
    err: f64,
}

fn covariant_jet<H: TensorField<Value = SymTensor2> + ?Sized>(
    geo: &Geometry,
    h: &H,
    x: &Vec4,
    cfg: &DiffConfig,
) -> Result<CovariantJet> {
    let jet = jet2(h, x, cfg)?;
    let hm = sym(&jet.value);
    let dh: [Mat4; 4] = std::array::from_fn(|e| sym(&jet.d1[e]));
    let ddh: [[Mat4; 4]; 4] = std::array::from_fn(|e| std::array::from_fn(|f| sym(&jet.d2[e][f])));
    let gm = &geo.gamma;
    let dgm = &geo.dgamma;
    let nabla: [Mat4; 4] = std::array::from_fn(|a| {
        Mat4::from_fn(|b, c| {
            let mut s = dh[a][(b, c)];
            for d in 0..4 {
                s -= gm[d][a][b] * hm[(d, c)] + gm[d][a][c] * hm[(b, d)];
            }
            s
        })
    });
    // ∂_a(∇_b h_cd)
    let d_nabla: [[Mat4; 4]; 4] = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            Mat4::from_fn(|c, d| {
                let mut s = ddh[a][b][(c, d)];
                for e in 0..4 {
                    s -= dgm[a][e][b][c] * hm[(e, d)]
                        + gm[e][b][c] * dh[a][(e, d)]
                        + dgm[a][e][b][d] * hm[(c, e)]
                        + gm[e][b][d] * dh[a][(c, e)];
                }
                s
            })
        })
    });
    let nabla2 = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            Mat4::from_fn(|c, d| {
                let mut s = d_nabla[a][b][(c, d)];
                for e in 0..4 {
                    s -= gm[e][a][b] * nabla[e][(c, d)]
                        + gm[e][a][c] * nabla[b][(e, d)]
                        + gm[e][a][d] * nabla[b][(c, e)];
                }
                s
            })
        })
    });
    let scale = hm.amax().max(max_abs(&jet.d1));
    Ok(CovariantJet {
        h: hm,
        nabla,
        nabla2,
        err: jet.err2 + jet.err1 + scale * geo.curvature_error(),
    })
}

/// `P h = ½ ∇*∇ h − R̊ h` with `∇*∇ = −g^{ab} ∇_a ∇_b`.
pub fn operator_p<G, H>(g: &G, h: &H, x: &Vec4, cfg: &DiffConfig) -> Result<Estimate<SymTensor2>>
where
    G: TensorField<Value = SymTensor2> + ?Sized,
    H: TensorField<Value = SymTensor2> + ?Sized,
{
    let geo = geometry(g, x, cfg)?;
    let cj = covariant_jet(&geo, h, x, cfg)?;
    let mut rough = Mat4::zeros();
    for a in 0..4 {
        for b in 0..4 {
            rough -= cj.nabla2[a][b] * geo.ginv[(a, b)];
        }
    }
    let p = rough * 0.5 - geo.curvature_action(&cj.h);
    Ok(Estimate {
        value: SymTensor2::from_matrix(&p),
        error: cj.err * geo.ginv.amax(),
    })
}

/// `B h = δh + ½ d tr h` with `(δh)_b = −g^{ac} ∇_a h_{cb}`.
pub fn operator_b<G, H>(g: &G, h: &H, x: &Vec4, cfg: &DiffConfig) -> Result<Estimate<Vec4>>
where
    G: TensorField<Value = SymTensor2> + ?Sized,
    H: TensorField<Value = SymTensor2> + ?Sized,
{
    let geo = geometry(g, x, cfg)?;
    let cj = covariant_jet(&geo, h, x, cfg)?;
    let out = Vec4::from_fn(|b, _| {
        let mut div = 0.0;
        for a in 0..4 {
            for c in 0..4 {
                div -= geo.ginv[(a, c)] * cj.nabla[a][(c, b)];
            }
        }
        // metric compatibility: ∂_b tr h = g^{pq} ∇_b h_pq
        let dtr: f64 = geo.ginv.component_mul(&cj.nabla[b]).sum();
        div + 0.5 * dtr
    });
    Ok(Estimate {
        value: out,
        error: cj.err * geo.ginv.amax(),
    })
}

/// Exterior derivative of a 1-form field.
pub fn exterior_d1<A: TensorField<Value = Vec4> + ?Sized>(a: &A, x: &Vec4, cfg: &DiffConfig) -> Result<Estimate<Form2>> {
    let jet = jet1(a, x, cfg)?;
    let m = Mat4::from_fn(|i, j| jet.d1[i][j] - jet.d1[j][i]);
    Ok(Estimate {
        value: Form2::from_skew(&m),
        error: 2.0 * jet.err1,
    })
}

/// Exterior derivative of a 2-form field, as the components
/// `(dω)_{123}, (dω)_{124}, (dω)_{134}, (dω)_{234}`.
pub fn exterior_d2<W: TensorField<Value = Form2> + ?Sized>(
    w: &W,
    x: &Vec4,
    cfg: &DiffConfig,
) -> Result<Estimate<[f64; 4]>> {
    let jet = jet1(w, x, cfg)?;
    let d: [Mat4; 4] = std::array::from_fn(|e| Form2::read(&jet.d1[e]).to_skew());
    let triples = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)];
    let out = triples.map(|(a, b, c)| d[a][(b, c)] + d[b][(c, a)] + d[c][(a, b)]);
    Ok(Estimate {
        value: out,
        error: 3.0 * jet.err1,
    })
}

/// `d*ω = −∇^a ω_{ab}`, computed as `−g_{cb} |g|^{-½} ∂_a(|g|^{½} ω^{ab})`.
pub fn codifferential2<G, W>(g: &G, w: &W, x: &Vec4, cfg: &DiffConfig) -> Result<Estimate<Vec4>>
where
    G: TensorField<Value = SymTensor2> + ?Sized,
    W: TensorField<Value = Form2> + ?Sized,
{
    let density = FnField(|y: &Vec4| -> Result<Form2> {
        let gm = g.eval(y)?.to_matrix();
        let ginv = gm
            .try_inverse()
            .ok_or_else(|| Error::Domain("metric is singular".into()))?;
        let raised = ginv * w.eval(y)?.to_skew() * ginv;
        Ok(Form2::from_skew(&raised) * gm.determinant().abs().sqrt())
    });
    let jet = jet1(&density, x, cfg)?;
    let gm = g.eval(x)?.to_matrix();
    let sqrt_det = gm.determinant().abs().sqrt();
    let div = Vec4::from_fn(|b, _| {
        (0..4)
            .map(|a| Form2::read(&jet.d1[a]).to_skew()[(a, b)])
            .sum::<f64>()
            / sqrt_det
    });
    Ok(Estimate {
        value: -(gm * div),
        error: 4.0 * jet.err1 * gm.amax() / sqrt_det,
    })
}

/// `Δf = −|g|^{-½} ∂_a(|g|^{½} g^{ab} ∂_b f)`.
pub fn laplacian0<G, F>(g: &G, f: &F, x: &Vec4, cfg: &DiffConfig) -> Result<Estimate<f64>>
where
    G: TensorField<Value = SymTensor2> + ?Sized,
    F: TensorField<Value = f64> + ?Sized,
{
    let geo = geometry(g, x, cfg)?;
    let jet = jet2(f, x, cfg)?;
    let mut s = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let mut hess = jet.d2[a][b][0];
            for c in 0..4 {
                hess -= geo.gamma[c][a][b] * jet.d1[c][0];
            }
            s += geo.ginv[(a, b)] * hess;
        }
    }
    Ok(Estimate {
        value: -s,
        error: geo.ginv.amax() * (jet.err2 + jet.err1) * 16.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ehspace::fields::{EuclideanMetric, HyperbolicMetric};
    use crate::jets::{bianchi_euclidean, curvature_at_origin, QuadJet};
    use nalgebra::DVector;

    fn poly_field(x: &Vec4) -> Result<f64> {
        Ok(x[0].sin() * x[1].exp() + x[2] * x[3].powi(3))
    }

    #[test]
    fn derivatives_of_analytic_function() {
        let x = Vec4::new(0.3, -0.2, 0.5, 0.8);
        let f = FnField(poly_field);
        let jet = jet2(&f, &x, &DiffConfig::default()).unwrap();
        let grad = [
            x[0].cos() * x[1].exp(),
            x[0].sin() * x[1].exp(),
            x[3].powi(3),
            3.0 * x[2] * x[3].powi(2),
        ];
        for a in 0..4 {
            assert!((jet.d1[a][0] - grad[a]).abs() < 1e-10);
        }
        assert!((jet.d2[0][1][0] - x[0].cos() * x[1].exp()).abs() < 1e-9);
        assert!((jet.d2[0][0][0] + x[0].sin() * x[1].exp()).abs() < 1e-9);
        assert!((jet.d2[3][3][0] - 6.0 * x[2] * x[3]).abs() < 1e-9);
    }

    #[test]
    fn convergence_order_is_at_least_four() {
        // without extrapolation the error of the 4th-order stencil drops by ~16
        // per halving
        let x = Vec4::new(0.3, -0.2, 0.5, 0.8);
        let f = FnField(|y: &Vec4| -> Result<f64> { Ok((y[0] * 2.0).sin()) });
        let exact1 = 2.0 * (2.0 * x[0]).cos();
        let exact2 = -4.0 * (2.0 * x[0]).sin();
        let err = |h: f64| {
            let cfg = DiffConfig {
                step: h,
                richardson: false,
                max_error: f64::INFINITY,
            };
            let j = jet2(&f, &x, &cfg).unwrap();
            ((j.d1[0][0] - exact1).abs(), (j.d2[0][0][0] - exact2).abs())
        };
        let (a1, a2) = err(0.1);
        let (b1, b2) = err(0.05);
        assert!((a1 / b1).log2() > 3.8, "first-derivative order {}", (a1 / b1).log2());
        assert!((a2 / b2).log2() > 3.8, "second-derivative order {}", (a2 / b2).log2());
    }

    #[test]
    fn euclidean_is_flat() {
        let x = Vec4::new(0.3, 0.1, -0.4, 0.9);
        let r = ricci(&EuclideanMetric, &x, &DiffConfig::default()).unwrap();
        assert!(r.value.max_abs() < 1e-8);
        let b = operator_b(&EuclideanMetric, &EuclideanMetric, &x, &DiffConfig::default()).unwrap();
        assert!(b.value.amax() < 1e-8);
        let p = operator_p(&EuclideanMetric, &FnField(|_: &Vec4| Ok(SymTensor2::identity() * 3.0)), &x, &DiffConfig::default())
            .unwrap();
        assert!(p.value.max_abs() < 1e-8);
    }

    #[test]
    fn hyperbolic_chart_is_einstein() {
        for (metric, lambda) in [(HyperbolicMetric::Real, -3.0), (HyperbolicMetric::Complex, -1.5)] {
            for x in [Vec4::new(0.3, 0.1, -0.4, 0.2), Vec4::new(0.05, 0.01, 0.0, -0.02), Vec4::new(0.6, -0.5, 0.3, 0.4)] {
                let geo = geometry(&metric, &x, &DiffConfig::default()).unwrap();
                let defect = (geo.ricci() - geo.g * lambda).amax();
                assert!(defect < 1e-6, "{metric:?} at {x}: {defect:e}");
            }
        }
    }

    #[test]
    fn numeric_curvature_of_jet_metric_matches_exact_at_origin() {
        let h = QuadJet::from_vector(&(DVector::from_fn(100, |k, _| ((k * 3 % 11) as f64 - 5.0) / 7.0) * 0.3));
        let metric = FnField(move |y: &Vec4| Ok(SymTensor2::from_matrix(&h.metric(y))));
        let r = numeric_curvature(&metric, &Vec4::zeros(), &DiffConfig::default()).unwrap();
        assert!((r.value - curvature_at_origin(&h)).max_abs() < 1e-8);
    }

    #[test]
    fn euclidean_bianchi_matches_jet_formula() {
        let h = QuadJet::from_vector(&DVector::from_fn(100, |k, _| ((k * 7 % 13) as f64 - 6.0) / 5.0));
        let field = FnField(move |y: &Vec4| Ok(h.eval(y)));
        let b = bianchi_euclidean(&h);
        let x = Vec4::new(0.4, -0.3, 0.2, 0.7);
        let num = operator_b(&EuclideanMetric, &field, &x, &DiffConfig::default()).unwrap();
        let exact = b.transpose() * x; // Σ_j b_{jl} x^j
        assert!((num.value - exact).amax() < 1e-9);
    }

    #[test]
    fn step_underflow_is_an_accuracy_error() {
        let cfg = DiffConfig {
            step: 1e-12,
            ..DiffConfig::default()
        };
        let res = jet1(&FnField(poly_field), &Vec4::new(0.1, 0.0, 0.0, 0.0), &cfg);
        assert!(matches!(res, Err(Error::Accuracy(_))));
    }
}
