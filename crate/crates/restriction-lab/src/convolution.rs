//! Convolution of sphere-carried densities: (fσ*gσ) on B(0,2) and the
//! triple product restricted back to the sphere.
//!
//! For |z| ∈ (0,2) the pair convolution collapses to a circle integral,
//! (fσ*gσ)(z) = (2π/|z|) · avg over the circle {x : |x| = |z−x| = 1} of
//! f(x)g(z−x), discretized by an equispaced rule that is exact once the
//! circle count exceeds the combined band limit. Off-grid values are always
//! recomputed from this formula, never interpolated; the sphere factors are
//! evaluated through their harmonic spectra.

use std::io::Write;
use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonics::{analyze, HarmonicSpectrum, SphereField};
use crate::par;
use crate::quadrature::{gauss_legendre_on, BallGrid, Kahan, KahanComplex};

/// Calibration target for the constant-density law 2π/|z|.
pub const CONSTANT_LAW_REL_TOL: f64 = 1e-8;

/// Deterministic orthonormal frame perpendicular to a unit vector: the
/// coordinate axis least aligned with it (smallest index on ties) is
/// projected out and the second leg closes a right-handed triple.
pub fn orthonormal_frame(unit: Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let a = [unit.x.abs(), unit.y.abs(), unit.z.abs()];
    let mut axis_idx = 0;
    if a[1] < a[axis_idx] {
        axis_idx = 1;
    }
    if a[2] < a[axis_idx] {
        axis_idx = 2;
    }
    let mut axis = Vector3::zeros();
    axis[axis_idx] = 1.0;
    let e1 = (axis - unit * unit.dot(&axis)).normalize();
    let e2 = unit.cross(&e1);
    (e1, e2)
}

/// The n pairs (x, x′) with x + x′ = z on the circle |x| = |z − x| = 1,
/// equispaced in the circle angle.
pub fn circle_points(z: Vector3<f64>, n: usize) -> Result<Vec<(Vector3<f64>, Vector3<f64>)>> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one circle point"));
    }
    let r = z.norm();
    if !(r > 0.0 && r < 2.0) {
        return Err(Error::invalid(
            "z",
            format!("|z| must lie in (0,2), got {r}"),
        ));
    }
    let rho = (1.0 - 0.25 * r * r).max(0.0).sqrt();
    let (e1, e2) = orthonormal_frame(z / r);
    let center = 0.5 * z;
    Ok((0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let x = center + rho * (theta.cos() * e1 + theta.sin() * e2);
            (x, z - x)
        })
        .collect())
}

/// How one convolution factor is sampled at circle points.
#[derive(Debug, Clone)]
pub enum FieldEval {
    Spectrum(Arc<HarmonicSpectrum>),
    /// |f(p)| through f's own spectrum; keeps pointwise domination bounds
    /// exact even though |f| itself is not band-limited.
    Modulus(Arc<HarmonicSpectrum>),
}

impl FieldEval {
    #[inline]
    pub fn eval(&self, p: Vector3<f64>) -> Complex64 {
        match self {
            FieldEval::Spectrum(s) => s.eval_at(p),
            FieldEval::Modulus(s) => Complex64::new(s.eval_at(p).norm(), 0.0),
        }
    }
}

/// Evaluator for (fσ*gσ) at arbitrary points of B(0,2).
#[derive(Debug, Clone)]
pub struct PairSource {
    f: FieldEval,
    g: FieldEval,
    n_circle: usize,
    circle_cos: Vec<f64>,
    circle_sin: Vec<f64>,
}

impl PairSource {
    pub fn new(f: FieldEval, g: FieldEval, n_circle: usize) -> Result<Self> {
        if n_circle < 8 {
            return Err(Error::invalid(
                "n_circle",
                format!("must be ≥ 8, got {n_circle}"),
            ));
        }
        let (circle_cos, circle_sin) = (0..n_circle)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / n_circle as f64;
                (theta.cos(), theta.sin())
            })
            .unzip();
        Ok(PairSource {
            f,
            g,
            n_circle,
            circle_cos,
            circle_sin,
        })
    }

    pub fn n_circle(&self) -> usize {
        self.n_circle
    }

    /// (fσ*gσ)(z); zero outside 0 < |z| < 2.
    pub fn eval(&self, z: Vector3<f64>) -> Complex64 {
        let r = z.norm();
        if !(r > 0.0 && r < 2.0) {
            return Complex64::default();
        }
        let rho = (1.0 - 0.25 * r * r).max(0.0).sqrt();
        let (e1, e2) = orthonormal_frame(z / r);
        let center = 0.5 * z;
        let mut acc = KahanComplex::default();
        for k in 0..self.n_circle {
            let offset = rho * (self.circle_cos[k] * e1 + self.circle_sin[k] * e2);
            let x = center + offset;
            acc.add(self.f.eval(x) * self.g.eval(z - x));
        }
        acc.value() * (2.0 * std::f64::consts::PI / (r * self.n_circle as f64))
    }
}

/// (fσ*gσ) sampled on a ball grid, carrying its evaluator for off-grid
/// queries.
#[derive(Debug, Clone)]
pub struct BallField {
    grid: Arc<BallGrid>,
    values: Vec<Complex64>,
    source: Option<PairSource>,
}

impl BallField {
    /// Bare samples without an off-grid evaluator (norms and dumps only).
    pub fn from_values(grid: Arc<BallGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(BallField {
            grid,
            values,
            source: None,
        })
    }

    pub fn grid(&self) -> &Arc<BallGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn source(&self) -> Option<&PairSource> {
        self.source.as_ref()
    }
}

/// Samples a pair source on every grid node.
pub fn convolve_sources(source: PairSource, grid: Arc<BallGrid>) -> BallField {
    let values = par::map_indexed(grid.len(), |idx| source.eval(grid.position(idx)));
    BallField {
        grid,
        values,
        source: Some(source),
    }
}

/// (fσ*gσ) on the grid. Both fields are analyzed at `band_limit` and then
/// evaluated spectrally at the circle points.
pub fn convolve_pair(
    f: &SphereField,
    g: &SphereField,
    grid: Arc<BallGrid>,
    n_circle: usize,
    band_limit: usize,
) -> Result<BallField> {
    let spec_f = Arc::new(analyze(f, band_limit)?);
    let spec_g = Arc::new(analyze(g, band_limit)?);
    let source = PairSource::new(
        FieldEval::Spectrum(spec_f),
        FieldEval::Spectrum(spec_g),
        n_circle,
    )?;
    Ok(convolve_sources(source, grid))
}

/// (|f|σ*|f|σ) with the modulus taken at each circle point.
pub fn convolve_pair_modulus(
    f: &SphereField,
    grid: Arc<BallGrid>,
    n_circle: usize,
    band_limit: usize,
) -> Result<BallField> {
    let spec = Arc::new(analyze(f, band_limit)?);
    let source = PairSource::new(
        FieldEval::Modulus(spec.clone()),
        FieldEval::Modulus(spec),
        n_circle,
    )?;
    Ok(convolve_sources(source, grid))
}

/// Doubles the circle count until the constant-density law 2π/|z| holds to
/// `CONSTANT_LAW_REL_TOL` on the grid.
pub fn calibrate_n_circle(grid: &Arc<BallGrid>, start: usize) -> Result<usize> {
    let mut n = start.max(8);
    loop {
        let one = HarmonicSpectrum::from_coeffs(
            0,
            vec![Complex64::new((4.0 * std::f64::consts::PI).sqrt(), 0.0)],
        )?;
        let source = PairSource::new(
            FieldEval::Spectrum(Arc::new(one.clone())),
            FieldEval::Spectrum(Arc::new(one)),
            n,
        )?;
        let worst = (0..grid.len())
            .map(|idx| {
                let z = grid.position(idx);
                let want = 2.0 * std::f64::consts::PI / z.norm();
                (source.eval(z).re - want).abs() / want
            })
            .fold(0.0, f64::max);
        if worst <= CONSTANT_LAW_REL_TOL {
            return Ok(n);
        }
        n *= 2;
        if n > 1024 {
            return Err(Error::Degenerate(format!(
                "circle rule failed to calibrate below {CONSTANT_LAW_REL_TOL:.1e} by n = 1024 (worst {worst:.3e})"
            )));
        }
    }
}

/// x ↦ ∫ h(y)·pair(x−y) dσ(y) on h's grid.
///
/// The y-integral runs in chordal coordinates about each output node x:
/// Gauss–Legendre in u = |x−y| on (0,2) crossed with an equispaced azimuth,
/// where dσ(y) = u du dφ cancels the 1/|x−y| factor of the pair kernel, so
/// the summand stays bounded and the rule converges spectrally. The pair
/// field is recomputed from its circle formula at every query point.
pub fn triple_restrict(h: &SphereField, pair: &BallField, band_limit: usize) -> Result<SphereField> {
    let source = pair.source().ok_or(Error::NotEvaluable)?;
    let spec_h = analyze(h, band_limit)?;
    let q = h.quadrature();
    let n_u = q.n_polar().max(8);
    let n_phi = q.n_azimuthal().max(2 * band_limit + 2);
    let (u_nodes, u_weights) = gauss_legendre_on(0.0, 2.0, n_u);
    let (phi_cos, phi_sin): (Vec<f64>, Vec<f64>) = (0..n_phi)
        .map(|j| {
            let a = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
            (a.cos(), a.sin())
        })
        .unzip();
    let w_phi = 2.0 * std::f64::consts::PI / n_phi as f64;

    let nodes = q.nodes();
    let values = par::map_indexed(nodes.len(), |i| {
        let x = nodes[i];
        let (e1, e2) = orthonormal_frame(x);
        let mut acc = KahanComplex::default();
        for (iu, &u) in u_nodes.iter().enumerate() {
            // y at chordal distance u from x: cos α = 1 − u²/2.
            let cos_a = 1.0 - 0.5 * u * u;
            let sin_a = u * (1.0 - 0.25 * u * u).max(0.0).sqrt();
            let w_u = u_weights[iu] * u * w_phi;
            for j in 0..n_phi {
                let y = cos_a * x + sin_a * (phi_cos[j] * e1 + phi_sin[j] * e2);
                let z = x - y;
                acc.add(spec_h.eval_at(y) * source.eval(z) * w_u);
            }
        }
        acc.value()
    });
    SphereField::new(q.clone(), values)
}

/// L² norm over the ball, radial Jacobian already in the weights.
pub fn l2_norm_ball(v: &BallField) -> f64 {
    let mut acc = Kahan::default();
    for (idx, value) in v.values().iter().enumerate() {
        acc.add(v.grid().weight(idx) * value.norm_sqr());
    }
    acc.value().max(0.0).sqrt()
}

/// Writes `r,theta_index,phi_index,re,im` rows, one per grid node.
pub fn write_ball_csv<W: Write>(v: &BallField, mut out: W) -> Result<()> {
    writeln!(out, "r,theta_index,phi_index,re,im")?;
    let n_az = v.grid().angular().n_azimuthal();
    let n_ang = v.grid().angular().len();
    for (idx, value) in v.values().iter().enumerate() {
        let r = v.grid().radial_nodes()[idx / n_ang];
        let ang = idx % n_ang;
        writeln!(
            out,
            "{:.16e},{},{},{:.16e},{:.16e}",
            r,
            ang / n_az,
            ang % n_az,
            value.re,
            value.im
        )?;
    }
    Ok(())
}
