//! Product quadrature on the unit sphere and on the ball B(0,2).
//!
//! The sphere rule is Gauss–Legendre in the polar cosine crossed with an
//! equispaced azimuth, so a rule with `n_polar × n_azimuthal` nodes integrates
//! spherical polynomials up to degree `min(2·n_polar − 1, n_azimuthal − 1)`
//! exactly. The ball grid is a radial Gauss–Legendre rule on (0,2), with the
//! r² volume Jacobian folded into the radial weights, crossed with a sphere
//! rule for the angular part. All summation is Kahan-compensated in a fixed
//! order.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Compensated scalar accumulator (Kahan).
#[derive(Debug, Default, Clone, Copy)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Compensated complex accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanComplex {
    re: Kahan,
    im: Kahan,
}

impl KahanComplex {
    pub fn add(&mut self, v: Complex64) {
        self.re.add(v.re);
        self.im.add(v.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

/// Gauss–Legendre nodes (ascending) and weights on (-1, 1).
///
/// Newton iteration from the Tricomi cosine guess; nodes are exactly
/// symmetric about 0 by construction.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..60 {
            let (p, d) = legendre_and_deriv(n, x);
            deriv = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        if n % 2 == 1 && i == half - 1 {
            // Middle root of an odd rule is exactly zero.
            x = 0.0;
            deriv = legendre_and_deriv(n, 0.0).1;
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        // i counts down from the largest root.
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped onto (a, b).
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let scale = 0.5 * (b - a);
    let nodes = t.iter().map(|&ti| mid + scale * ti).collect();
    let weights = w.iter().map(|&wi| scale * wi).collect();
    (nodes, weights)
}

/// Fixed quadrature rule on the unit sphere.
///
/// Nodes are stored ring-major: index `i * n_azimuthal + j` is polar ring `i`
/// (ascending in cos θ), azimuth step `j`.
#[derive(Debug)]
pub struct SphereQuadrature {
    nodes: Vec<Vector3<f64>>,
    weights: Vec<f64>,
    degree: usize,
    n_polar: usize,
    n_azimuthal: usize,
    polar_cos: Vec<f64>,
    polar_sin: Vec<f64>,
    polar_weights: Vec<f64>,
    azimuth: Vec<f64>,
}

impl SphereQuadrature {
    pub fn nodes(&self) -> &[Vector3<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest polynomial degree the rule integrates exactly.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_polar(&self) -> usize {
        self.n_polar
    }

    pub fn n_azimuthal(&self) -> usize {
        self.n_azimuthal
    }

    pub fn polar_cos(&self) -> &[f64] {
        &self.polar_cos
    }

    pub fn polar_sin(&self) -> &[f64] {
        &self.polar_sin
    }

    pub fn polar_weights(&self) -> &[f64] {
        &self.polar_weights
    }

    pub fn azimuth(&self) -> &[f64] {
        &self.azimuth
    }

    pub fn node_index(&self, ring: usize, step: usize) -> usize {
        ring * self.n_azimuthal + step
    }

    /// Index of the node antipodal to `idx`. The rule maps onto itself under
    /// x ↦ -x only when the azimuth count is even.
    pub fn antipode_index(&self, idx: usize) -> Option<usize> {
        if self.n_azimuthal % 2 != 0 {
            return None;
        }
        let ring = idx / self.n_azimuthal;
        let step = idx % self.n_azimuthal;
        let ring_a = self.n_polar - 1 - ring;
        let step_a = (step + self.n_azimuthal / 2) % self.n_azimuthal;
        Some(self.node_index(ring_a, step_a))
    }

    /// True when both rules were built with the same construction sizes.
    pub fn same_shape(&self, other: &SphereQuadrature) -> bool {
        self.n_polar == other.n_polar && self.n_azimuthal == other.n_azimuthal
    }
}

pub fn build_sphere_quadrature(n_polar: usize, n_azimuthal: usize) -> Result<Arc<SphereQuadrature>> {
    if n_polar < 2 {
        return Err(Error::invalid("n_polar", format!("must be ≥ 2, got {n_polar}")));
    }
    if n_azimuthal < 4 {
        return Err(Error::invalid(
            "n_azimuthal",
            format!("must be ≥ 4, got {n_azimuthal}"),
        ));
    }
    let (polar_cos, gl_weights) = gauss_legendre(n_polar);
    let polar_sin: Vec<f64> = polar_cos.iter().map(|t| (1.0 - t * t).sqrt()).collect();
    let azimuth_step = 2.0 * PI / n_azimuthal as f64;
    let azimuth: Vec<f64> = (0..n_azimuthal).map(|j| j as f64 * azimuth_step).collect();

    let mut nodes = Vec::with_capacity(n_polar * n_azimuthal);
    let mut weights = Vec::with_capacity(n_polar * n_azimuthal);
    for i in 0..n_polar {
        let t = polar_cos[i];
        let s = polar_sin[i];
        let w = gl_weights[i] * azimuth_step;
        for &phi in &azimuth {
            nodes.push(Vector3::new(s * phi.cos(), s * phi.sin(), t));
            weights.push(w);
        }
    }
    Ok(Arc::new(SphereQuadrature {
        nodes,
        weights,
        degree: (2 * n_polar - 1).min(n_azimuthal - 1),
        n_polar,
        n_azimuthal,
        polar_cos,
        polar_sin,
        polar_weights: gl_weights,
        azimuth,
    }))
}

/// Integral of a sampled function over the sphere: Σ wᵢ vᵢ, compensated, in
/// node order.
pub fn integrate_sphere(q: &SphereQuadrature, values: &[Complex64]) -> Result<Complex64> {
    if values.len() != q.len() {
        return Err(Error::SizeMismatch {
            expected: q.len(),
            got: values.len(),
        });
    }
    let mut acc = KahanComplex::default();
    for (w, v) in q.weights.iter().zip(values) {
        acc.add(v * w);
    }
    Ok(acc.value())
}

/// Radial × angular product grid on the ball B(0,2).
///
/// Radial weights already contain the r² Jacobian, so a plain weighted sum of
/// sampled values is the volume integral. Values are stored radial-major:
/// index `i_r * angular.len() + i_ang`.
#[derive(Debug)]
pub struct BallGrid {
    radial_nodes: Vec<f64>,
    radial_weights: Vec<f64>,
    angular: Arc<SphereQuadrature>,
}

impl BallGrid {
    pub fn radial_nodes(&self) -> &[f64] {
        &self.radial_nodes
    }

    /// Radial weights, r² Jacobian included.
    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    pub fn angular(&self) -> &Arc<SphereQuadrature> {
        &self.angular
    }

    pub fn n_radial(&self) -> usize {
        self.radial_nodes.len()
    }

    pub fn len(&self) -> usize {
        self.radial_nodes.len() * self.angular.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radial_nodes.is_empty()
    }

    pub fn position(&self, idx: usize) -> Vector3<f64> {
        let n_ang = self.angular.len();
        self.radial_nodes[idx / n_ang] * self.angular.nodes()[idx % n_ang]
    }

    pub fn weight(&self, idx: usize) -> f64 {
        let n_ang = self.angular.len();
        self.radial_weights[idx / n_ang] * self.angular.weights()[idx % n_ang]
    }
}

pub fn build_ball_grid(n_radial: usize, angular: Arc<SphereQuadrature>) -> Result<Arc<BallGrid>> {
    if n_radial < 4 {
        return Err(Error::invalid(
            "n_radial",
            format!("must be ≥ 4, got {n_radial}"),
        ));
    }
    let (radial_nodes, gl_weights) = gauss_legendre_on(0.0, 2.0, n_radial);
    let radial_weights = radial_nodes
        .iter()
        .zip(&gl_weights)
        .map(|(r, w)| w * r * r)
        .collect();
    Ok(Arc::new(BallGrid {
        radial_nodes,
        radial_weights,
        angular,
    }))
}

/// Volume integral of a sampled function over B(0,2).
pub fn integrate_ball(g: &BallGrid, values: &[Complex64]) -> Result<Complex64> {
    if values.len() != g.len() {
        return Err(Error::SizeMismatch {
            expected: g.len(),
            got: values.len(),
        });
    }
    let n_ang = g.angular.len();
    let ang_weights = g.angular.weights();
    let mut acc = KahanComplex::default();
    for (i_r, &wr) in g.radial_weights.iter().enumerate() {
        for (i_a, &wa) in ang_weights.iter().enumerate() {
            acc.add(values[i_r * n_ang + i_a] * (wr * wa));
        }
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn real_field(q: &SphereQuadrature, f: impl Fn(Vector3<f64>) -> f64) -> Vec<Complex64> {
        q.nodes().iter().map(|&p| Complex64::new(f(p), 0.0)).collect()
    }

    #[test]
    fn gl_matches_tabulated_five_point_rule() {
        let (x, w) = gauss_legendre(5);
        let x_ref = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        let w_ref = [
            0.236_926_885_056_189,
            0.478_628_670_499_366,
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
        ];
        for i in 0..5 {
            assert!((x[i] - x_ref[i]).abs() < 1e-14);
            assert!((w[i] - w_ref[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn gl_is_symmetric_and_normalized() {
        for n in [2, 3, 8, 33, 200, 512] {
            let (x, w) = gauss_legendre(n);
            let mut total = Kahan::default();
            for i in 0..n {
                assert_eq!(x[i], -x[n - 1 - i]);
                assert_eq!(w[i], w[n - 1 - i]);
                assert!(w[i] > 0.0);
                if i > 0 {
                    assert!(x[i] > x[i - 1]);
                }
                total.add(w[i]);
            }
            assert_relative_eq!(total.value(), 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn sphere_nodes_are_unit_and_weights_sum_to_full_area() {
        let q = build_sphere_quadrature(9, 20).unwrap();
        for p in q.nodes() {
            assert!((p.norm() - 1.0).abs() <= 1e-14);
        }
        let mut total = Kahan::default();
        for &w in q.weights() {
            assert!(w > 0.0);
            total.add(w);
        }
        assert!((total.value() - 4.0 * PI).abs() <= 1e-12);
    }

    #[test]
    fn sphere_rejects_degenerate_sizes() {
        assert!(build_sphere_quadrature(1, 16).is_err());
        assert!(build_sphere_quadrature(8, 3).is_err());
    }

    #[test]
    fn sphere_integrates_basic_fields() {
        let q = build_sphere_quadrature(8, 16).unwrap();
        let one = real_field(&q, |_| 1.0);
        assert!((integrate_sphere(&q, &one).unwrap().re - 4.0 * PI).abs() <= 1e-12);

        let z2 = real_field(&q, |p| p.z * p.z);
        assert!((integrate_sphere(&q, &z2).unwrap().re - 4.0 * PI / 3.0).abs() <= 1e-12);

        let x1 = real_field(&q, |p| p.x);
        assert!(integrate_sphere(&q, &x1).unwrap().norm() <= 1e-13);

        // |Y₂⁰|² with Y₂⁰ = √(5/16π)(3t² − 1) integrates to 1.
        let y20 = real_field(&q, |p| {
            let c = (5.0 / (16.0 * PI)).sqrt();
            let v = c * (3.0 * p.z * p.z - 1.0);
            v * v
        });
        assert!((integrate_sphere(&q, &y20).unwrap().re - 1.0).abs() <= 1e-12);
    }

    fn double_factorial(n: i64) -> f64 {
        let mut acc = 1.0;
        let mut k = n;
        while k > 1 {
            acc *= k as f64;
            k -= 2;
        }
        acc
    }

    /// Closed form for ∫ x^a y^b z^c dσ: zero if any exponent is odd, else
    /// 4π (a−1)!!(b−1)!!(c−1)!!/(a+b+c+1)!!.
    fn monomial_integral(a: u32, b: u32, c: u32) -> f64 {
        if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
            return 0.0;
        }
        let num = double_factorial(a as i64 - 1)
            * double_factorial(b as i64 - 1)
            * double_factorial(c as i64 - 1);
        4.0 * PI * num / double_factorial((a + b + c) as i64 + 1)
    }

    #[test]
    fn sphere_rule_is_exact_to_its_advertised_degree() {
        for (n_polar, n_azimuthal) in [(2, 4), (3, 8), (5, 9), (6, 24)] {
            let q = build_sphere_quadrature(n_polar, n_azimuthal).unwrap();
            let degree = q.degree();
            assert_eq!(degree, (2 * n_polar - 1).min(n_azimuthal - 1));
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    for c in 0..=(degree as u32 - a - b) {
                        let field = real_field(&q, |p| {
                            p.x.powi(a as i32) * p.y.powi(b as i32) * p.z.powi(c as i32)
                        });
                        let got = integrate_sphere(&q, &field).unwrap();
                        let want = monomial_integral(a, b, c);
                        assert!(
                            (got.re - want).abs() <= 1e-12 && got.im.abs() <= 1e-13,
                            "monomial ({a},{b},{c}) on {n_polar}x{n_azimuthal}: got {}, want {want}",
                            got.re
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sphere_refinement_converges_on_a_smooth_integrand() {
        // ∫ exp(x₃) dσ = 4π sinh 1.
        let exact = 4.0 * PI * 1.0_f64.sinh();
        let mut last_err = f64::INFINITY;
        for n_polar in [4, 6, 8, 12] {
            let q = build_sphere_quadrature(n_polar, 2 * n_polar).unwrap();
            let field = real_field(&q, |p| p.z.exp());
            let err = (integrate_sphere(&q, &field).unwrap().re - exact).abs();
            assert!(err < last_err || err <= 1e-12);
            last_err = err;
        }
        assert!(last_err <= 1e-12);
    }

    #[test]
    fn antipode_mapping_matches_negated_nodes() {
        let q = build_sphere_quadrature(7, 12).unwrap();
        for (idx, p) in q.nodes().iter().enumerate() {
            let a = q.antipode_index(idx).unwrap();
            assert!((q.nodes()[a] + p).norm() <= 1e-13);
            assert_eq!(q.weights()[a], q.weights()[idx]);
        }
        let odd = build_sphere_quadrature(4, 9).unwrap();
        assert!(odd.antipode_index(0).is_none());
    }

    #[test]
    fn ball_grid_shape_and_total_mass() {
        let angular = build_sphere_quadrature(6, 12).unwrap();
        let g = build_ball_grid(10, angular).unwrap();
        for window in g.radial_nodes().windows(2) {
            assert!(window[0] < window[1]);
        }
        assert!(g.radial_nodes()[0] > 0.0);
        assert!(*g.radial_nodes().last().unwrap() < 2.0);

        let mut radial = Kahan::default();
        for &w in g.radial_weights() {
            radial.add(w);
        }
        let mut angular_total = Kahan::default();
        for &w in g.angular().weights() {
            angular_total.add(w);
        }
        let total = radial.value() * angular_total.value();
        assert!((total - 32.0 * PI / 3.0).abs() <= 1e-10);

        assert!(build_ball_grid(3, g.angular().clone()).is_err());
    }

    #[test]
    fn ball_integrates_radial_powers_exactly() {
        let angular = build_sphere_quadrature(4, 8).unwrap();
        let g = build_ball_grid(8, angular).unwrap();
        let eval = |f: &dyn Fn(f64) -> f64| {
            let values: Vec<Complex64> = (0..g.len())
                .map(|idx| Complex64::new(f(g.position(idx).norm()), 0.0))
                .collect();
            integrate_ball(&g, &values).unwrap().re
        };
        // r² weights turn |z|⁻² into the plain radial measure.
        assert!((eval(&|r| 1.0 / (r * r)) - 8.0 * PI).abs() <= 1e-10);
        assert!((eval(&|r| 1.0 / r) - 8.0 * PI).abs() <= 1e-10);
        assert!((eval(&|r| r) - 16.0 * PI).abs() <= 1e-10);
    }

    #[test]
    fn ball_integrates_squared_reciprocal_profile() {
        // (2π/|z|)² integrates to 32π³; the radial factor is exactly the
        // constant (2π)² after the Jacobian, so this checks the weight layout.
        let angular = build_sphere_quadrature(4, 8).unwrap();
        let g = build_ball_grid(6, angular).unwrap();
        let values: Vec<Complex64> = (0..g.len())
            .map(|idx| {
                let r = g.position(idx).norm();
                let v = 2.0 * PI / r;
                Complex64::new(v * v, 0.0)
            })
            .collect();
        let got = integrate_ball(&g, &values).unwrap().re;
        assert_relative_eq!(got, 32.0 * PI.powi(3), max_relative = 1e-8);
    }

    #[test]
    fn integrate_rejects_wrong_lengths() {
        let q = build_sphere_quadrature(4, 8).unwrap();
        assert!(matches!(
            integrate_sphere(&q, &[Complex64::default(); 3]),
            Err(Error::SizeMismatch { .. })
        ));
        let g = build_ball_grid(4, q).unwrap();
        assert!(matches!(
            integrate_ball(&g, &[Complex64::default(); 5]),
            Err(Error::SizeMismatch { .. })
        ));
    }
}
