//! Integration on the unit sphere S³ ⊂ R⁴.

use crate::lin4::Vec4;
use std::f64::consts::PI;

/// Volume of the round unit S³.
pub const S3_VOLUME: f64 = 2.0 * PI * PI;

/// Volume of S³/Z₂ (antipodal quotient).
pub const S3_MOD_Z2_VOLUME: f64 = PI * PI;

/// `∫_{S³} x^α = 2 Π Γ((αᵢ+1)/2) / Γ((|α|+4)/2)`, zero when some αᵢ is odd.
///
/// For even exponents this is `2π² Π(αᵢ−1)!! / (2^{|α|/2} (|α|/2+1)!)`.
pub fn sphere_monomial_integral(alpha: &[u8; 4]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let half: u32 = alpha.iter().map(|&a| a as u32).sum::<u32>() / 2;
    let mut num = 1.0;
    for &a in alpha {
        let mut k = a as i32 - 1;
        while k > 1 {
            num *= k as f64;
            k -= 2;
        }
    }
    let mut den = 2f64.powi(half as i32);
    for k in 2..=half + 1 {
        den *= k as f64;
    }
    S3_VOLUME * num / den
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Product rule in Hopf coordinates
/// `x = (cos η cos ξ₁, cos η sin ξ₁, sin η cos ξ₂, sin η sin ξ₂)`:
/// Gauss–Legendre in `u = sin²η` and `n_xi` equispaced nodes in each angle.
/// Exact for polynomials of degree `< min(2 n_u, n_xi)`; weights sum to `2π²`.
pub fn hopf_rule(n_u: usize, n_xi: usize) -> Vec<(Vec4, f64)> {
    let (nodes, weights) = gauss_legendre(n_u);
    let dxi = 2.0 * PI / n_xi as f64;
    let mut out = Vec::with_capacity(n_u * n_xi * n_xi);
    for (z, w) in nodes.iter().zip(weights.iter()) {
        let u = 0.5 * (z + 1.0);
        let wu = 0.5 * w;
        let (s, c) = (u.sqrt(), (1.0 - u).sqrt());
        for a in 0..n_xi {
            let xi1 = (a as f64 + 0.5) * dxi;
            for b in 0..n_xi {
                let xi2 = (b as f64 + 0.5) * dxi;
                let x = Vec4::new(c * xi1.cos(), c * xi1.sin(), s * xi2.cos(), s * xi2.sin());
                out.push((x, 0.5 * wu * dxi * dxi));
            }
        }
    }
    out
}

/// The 24 vertices of the 24-cell: `±eᵢ` and `(±½, ±½, ±½, ±½)`.
pub fn cell24_directions() -> Vec<Vec4> {
    let mut out = Vec::with_capacity(24);
    for i in 0..4 {
        for s in [1.0, -1.0] {
            let mut v = Vec4::zeros();
            v[i] = s;
            out.push(v);
        }
    }
    for mask in 0..16u32 {
        let v = Vec4::from_fn(|i, _| if mask >> i & 1 == 1 { -0.5 } else { 0.5 });
        out.push(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly4;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for k in 0..14 {
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((approx - exact).abs() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn monomial_formula_low_orders() {
        assert!((sphere_monomial_integral(&[0, 0, 0, 0]) - S3_VOLUME).abs() < 1e-14);
        // ∫ x₁² = Vol / 4
        assert!((sphere_monomial_integral(&[2, 0, 0, 0]) - S3_VOLUME / 4.0).abs() < 1e-14);
        // ∫ x₁⁴ = 3 Vol / 24, ∫ x₁² x₂² = Vol / 24
        assert!((sphere_monomial_integral(&[4, 0, 0, 0]) - S3_VOLUME / 8.0).abs() < 1e-14);
        assert!((sphere_monomial_integral(&[2, 2, 0, 0]) - S3_VOLUME / 24.0).abs() < 1e-14);
        assert_eq!(sphere_monomial_integral(&[1, 1, 0, 0]), 0.0);
    }

    #[test]
    fn hopf_rule_matches_monomial_formula() {
        let rule = hopf_rule(6, 14);
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((total - S3_VOLUME).abs() < 1e-12);
        let exps: [[u8; 4]; 6] = [[2, 0, 0, 0], [0, 0, 2, 2], [4, 0, 0, 2], [2, 2, 2, 2], [1, 1, 1, 1], [6, 0, 2, 0]];
        for e in exps {
            let p = Poly4::monomial(e, 1.0);
            let q: f64 = rule.iter().map(|(x, w)| w * p.eval(x)).sum();
            assert!((q - p.sphere_integral()).abs() < 1e-13, "{e:?}");
        }
    }

    #[test]
    fn cell24_is_on_sphere_and_even() {
        let d = cell24_directions();
        assert_eq!(d.len(), 24);
        for v in &d {
            assert!((v.norm() - 1.0).abs() < 1e-15);
            assert!(d.iter().any(|w| (w + v).norm() < 1e-15));
        }
    }
}
