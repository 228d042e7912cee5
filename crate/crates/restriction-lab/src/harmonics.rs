//! Real orthonormal spherical harmonics: sampled fields, spectra, and the
//! transforms between them.
//!
//! The basis is Y_{l,0} = q_l⁰, Y_{l,±m} = √2·q_lᵐ·{cos,sin}(mφ) for m > 0,
//! where q_lᵐ is the fully normalized associated Legendre function (no
//! Condon–Shortley sign), so ∫ Y_{l,m}Y_{l',m'} dσ = δ. Analysis and synthesis
//! separate into an azimuthal trig stage and a polar recurrence stage, which
//! keeps them exact on product rules of degree ≥ 2·band limit.

use std::io::{BufRead, Write};
use std::sync::Arc;

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par;
use crate::quadrature::{integrate_sphere, Kahan, KahanComplex, SphereQuadrature};

pub const MAX_BAND_LIMIT: usize = 128;

/// Flat index of coefficient (l, m), m signed: l² + l + m.
#[inline]
pub fn lm_index(l: usize, m: i64) -> usize {
    (l * l) as i64 as usize + (l as i64 + m) as usize
}

/// Recurrence coefficients for the normalized Legendre chain at one band
/// limit, shared by every evaluation site.
#[derive(Debug)]
pub struct BasisTable {
    band_limit: usize,
    /// diag_prod[m] = Π_{k≤m} √((2k+1)/(2k)); q_mᵐ = √(1/4π)·diag_prod[m]·sᵐ.
    diag_prod: Vec<f64>,
    /// sub[m] = √(2m+3); q_{m+1}ᵐ = sub[m]·t·q_mᵐ.
    sub: Vec<f64>,
    /// Three-term factors for l ≥ m+2, stored at lm_index(l, m).
    a: Vec<f64>,
    b: Vec<f64>,
}

impl BasisTable {
    fn new(band_limit: usize) -> Self {
        let n = (band_limit + 1) * (band_limit + 1);
        let mut diag_prod = vec![1.0; band_limit + 1];
        for m in 1..=band_limit {
            let mf = m as f64;
            diag_prod[m] = diag_prod[m - 1] * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
        }
        let sub = (0..=band_limit)
            .map(|m| (2.0 * m as f64 + 3.0).sqrt())
            .collect();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for m in 0..=band_limit {
            for l in (m + 2)..=band_limit {
                let lf = l as f64;
                let mf = m as f64;
                let idx = lm_index(l, m as i64);
                a[idx] = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let lp = lf - 1.0;
                b[idx] = ((lp * lp - mf * mf) / (4.0 * lp * lp - 1.0)).sqrt();
            }
        }
        BasisTable {
            band_limit,
            diag_prod,
            sub,
            a,
            b,
        }
    }

    /// Walks q_lᵐ(t) for l = m..=band_limit, calling `visit(l, q)` per degree.
    #[inline]
    fn chain<F: FnMut(usize, f64)>(&self, m: usize, t: f64, q_mm: f64, mut visit: F) {
        let mut cur = q_mm;
        visit(m, cur);
        if m + 1 > self.band_limit {
            return;
        }
        let mut prev = cur;
        cur = self.sub[m] * t * cur;
        visit(m + 1, cur);
        for l in (m + 2)..=self.band_limit {
            let idx = lm_index(l, m as i64);
            let next = self.a[idx] * (t * cur - self.b[idx] * prev);
            prev = cur;
            cur = next;
            visit(l, cur);
        }
    }

    #[inline]
    fn q_mm(&self, m: usize, s: f64) -> f64 {
        const Q00: f64 = 0.282_094_791_773_878_14; // √(1/4π)
        Q00 * self.diag_prod[m] * s.powi(m as i32)
    }
}

/// Single basis value Y_{l,m}(p). Convenience path for tests and field
/// construction; the transforms use the chained evaluation instead.
pub fn real_spherical_harmonic(l: usize, m: i64, p: Vector3<f64>) -> f64 {
    assert!(m.unsigned_abs() as usize <= l);
    let table = BasisTable::new(l);
    let t = p.z;
    let s = p.x.hypot(p.y);
    let ma = m.unsigned_abs() as usize;
    let mut out = 0.0;
    table.chain(ma, t, table.q_mm(ma, s), |ll, q| {
        if ll == l {
            out = q;
        }
    });
    if m == 0 {
        return out;
    }
    let phi = p.y.atan2(p.x);
    let angle = ma as f64 * phi;
    let trig = if m > 0 { angle.cos() } else { angle.sin() };
    std::f64::consts::SQRT_2 * out * trig
}

/// Complex-valued samples on a fixed sphere quadrature.
#[derive(Debug, Clone)]
pub struct SphereField {
    quadrature: Arc<SphereQuadrature>,
    values: Vec<Complex64>,
}

impl SphereField {
    pub fn new(quadrature: Arc<SphereQuadrature>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != quadrature.len() {
            return Err(Error::SizeMismatch {
                expected: quadrature.len(),
                got: values.len(),
            });
        }
        Ok(SphereField { quadrature, values })
    }

    pub fn constant(quadrature: Arc<SphereQuadrature>, value: Complex64) -> Self {
        let n = quadrature.len();
        SphereField {
            quadrature,
            values: vec![value; n],
        }
    }

    pub fn from_fn(
        quadrature: Arc<SphereQuadrature>,
        f: impl Fn(Vector3<f64>) -> Complex64,
    ) -> Self {
        let values = quadrature.nodes().iter().map(|&p| f(p)).collect();
        SphereField { quadrature, values }
    }

    pub fn quadrature(&self) -> &Arc<SphereQuadrature> {
        &self.quadrature
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn l2_norm(&self) -> f64 {
        let mut acc = Kahan::default();
        for (w, v) in self.quadrature.weights().iter().zip(&self.values) {
            acc.add(w * v.norm_sqr());
        }
        acc.value().max(0.0).sqrt()
    }

    /// Quadrature inner product ⟨f, g⟩ = Σ w f ḡ.
    pub fn inner(&self, other: &SphereField) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let mut acc = KahanComplex::default();
        for ((w, a), b) in self
            .quadrature
            .weights()
            .iter()
            .zip(&self.values)
            .zip(&other.values)
        {
            acc.add(a * b.conj() * *w);
        }
        Ok(acc.value())
    }

    pub fn scaled(&self, c: Complex64) -> SphereField {
        SphereField {
            quadrature: self.quadrature.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &SphereField) -> Result<SphereField> {
        self.check_same_grid(other)?;
        Ok(SphereField {
            quadrature: self.quadrature.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &SphereField) -> Result<SphereField> {
        self.check_same_grid(other)?;
        Ok(SphereField {
            quadrature: self.quadrature.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Node-wise |f|.
    pub fn modulus(&self) -> SphereField {
        SphereField {
            quadrature: self.quadrature.clone(),
            values: self
                .values
                .iter()
                .map(|v| Complex64::new(v.norm(), 0.0))
                .collect(),
        }
    }

    pub fn conjugate(&self) -> SphereField {
        SphereField {
            quadrature: self.quadrature.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// f(-x) by the node permutation; needs an even azimuth count.
    pub fn antipodal(&self) -> Result<SphereField> {
        let mut values = vec![Complex64::default(); self.values.len()];
        for (idx, v) in self.values.iter().enumerate() {
            let a = self.quadrature.antipode_index(idx).ok_or_else(|| {
                Error::invalid("n_azimuthal", "must be even for the antipodal map")
            })?;
            values[a] = *v;
        }
        Ok(SphereField {
            quadrature: self.quadrature.clone(),
            values,
        })
    }

    pub fn min_real(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn check_same_grid(&self, other: &SphereField) -> Result<()> {
        if !self.quadrature.same_shape(&other.quadrature) {
            return Err(Error::GridMismatch(format!(
                "{}x{} vs {}x{}",
                self.quadrature.n_polar(),
                self.quadrature.n_azimuthal(),
                other.quadrature.n_polar(),
                other.quadrature.n_azimuthal()
            )));
        }
        Ok(())
    }
}

/// Coefficients a_{l,m} for 0 ≤ l ≤ band limit, |m| ≤ l.
#[derive(Debug, Clone)]
pub struct HarmonicSpectrum {
    band_limit: usize,
    coeffs: Vec<Complex64>,
    table: Arc<BasisTable>,
}

impl HarmonicSpectrum {
    pub fn zero(band_limit: usize) -> Self {
        HarmonicSpectrum {
            band_limit,
            coeffs: vec![Complex64::default(); (band_limit + 1) * (band_limit + 1)],
            table: Arc::new(BasisTable::new(band_limit)),
        }
    }

    pub fn from_coeffs(band_limit: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let expected = (band_limit + 1) * (band_limit + 1);
        if coeffs.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                got: coeffs.len(),
            });
        }
        Ok(HarmonicSpectrum {
            band_limit,
            coeffs,
            table: Arc::new(BasisTable::new(band_limit)),
        })
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        self.coeffs[lm_index(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, value: Complex64) {
        self.coeffs[lm_index(l, m)] = value;
    }

    /// Σ_m |a_{l,m}|² per degree, length band limit + 1.
    pub fn per_degree_energy(&self) -> Vec<f64> {
        (0..=self.band_limit)
            .map(|l| {
                let mut acc = Kahan::default();
                for m in -(l as i64)..=(l as i64) {
                    acc.add(self.get(l, m).norm_sqr());
                }
                acc.value()
            })
            .collect()
    }

    pub fn total_energy(&self) -> f64 {
        let mut acc = Kahan::default();
        for c in &self.coeffs {
            acc.add(c.norm_sqr());
        }
        acc.value()
    }

    /// Copy with all degrees above `cut` zeroed.
    pub fn truncated(&self, cut: usize) -> HarmonicSpectrum {
        let mut out = self.clone();
        for l in (cut + 1)..=self.band_limit {
            for m in -(l as i64)..=(l as i64) {
                out.set(l, m, Complex64::default());
            }
        }
        out
    }

    /// Point evaluation Σ a_{l,m} Y_{l,m}(p). This is the hot path of the
    /// convolution kernels; it allocates nothing.
    pub fn eval_at(&self, p: Vector3<f64>) -> Complex64 {
        let table = &*self.table;
        let t = p.z;
        let s = p.x.hypot(p.y);
        let (cos_phi, sin_phi) = if s > 0.0 {
            (p.x / s, p.y / s)
        } else {
            (1.0, 0.0)
        };
        let mut acc_re = 0.0;
        let mut acc_im = 0.0;

        // m = 0 column.
        table.chain(0, t, table.q_mm(0, s), |l, q| {
            let c = self.coeffs[lm_index(l, 0)];
            acc_re += q * c.re;
            acc_im += q * c.im;
        });

        // cos(mφ), sin(mφ) by angle addition.
        let mut cos_m = 1.0;
        let mut sin_m = 0.0;
        for m in 1..=self.band_limit {
            let (c_new, s_new) = (
                cos_m * cos_phi - sin_m * sin_phi,
                sin_m * cos_phi + cos_m * sin_phi,
            );
            cos_m = c_new;
            sin_m = s_new;
            let u = std::f64::consts::SQRT_2 * cos_m;
            let v = std::f64::consts::SQRT_2 * sin_m;
            table.chain(m, t, table.q_mm(m, s), |l, q| {
                let cp = self.coeffs[lm_index(l, m as i64)];
                let cm = self.coeffs[lm_index(l, -(m as i64))];
                acc_re += q * (cp.re * u + cm.re * v);
                acc_im += q * (cp.im * u + cm.im * v);
            });
        }
        Complex64::new(acc_re, acc_im)
    }
}

fn trig_tables(n_azimuthal: usize) -> (Vec<f64>, Vec<f64>) {
    let step = 2.0 * std::f64::consts::PI / n_azimuthal as f64;
    (0..n_azimuthal)
        .map(|k| {
            let a = k as f64 * step;
            (a.cos(), a.sin())
        })
        .unzip()
}

/// Forward transform: a_{l,m} = ∫ f Ȳ_{l,m} dσ by quadrature. The rule must
/// integrate degree 2·band_limit exactly.
pub fn analyze(f: &SphereField, band_limit: usize) -> Result<HarmonicSpectrum> {
    if band_limit > MAX_BAND_LIMIT {
        return Err(Error::invalid(
            "band_limit",
            format!("must be ≤ {MAX_BAND_LIMIT}, got {band_limit}"),
        ));
    }
    let q = &**f.quadrature();
    if q.degree() < 2 * band_limit {
        return Err(Error::DegreeTooLow {
            required: 2 * band_limit,
            available: q.degree(),
        });
    }
    let n_polar = q.n_polar();
    let n_az = q.n_azimuthal();
    let weight_phi = 2.0 * std::f64::consts::PI / n_az as f64;
    let (cos_tab, sin_tab) = trig_tables(n_az);

    // Azimuthal stage: per-ring trig moments, already carrying the φ weight.
    let ring_moments: Vec<Vec<(Complex64, Complex64)>> = par::map_indexed(n_polar, |i| {
        let row = &f.values()[i * n_az..(i + 1) * n_az];
        (0..=band_limit)
            .map(|m| {
                let mut c = KahanComplex::default();
                let mut s = KahanComplex::default();
                for (j, v) in row.iter().enumerate() {
                    let k = (m * j) % n_az;
                    c.add(v * (cos_tab[k] * weight_phi));
                    s.add(v * (sin_tab[k] * weight_phi));
                }
                (c.value(), s.value())
            })
            .collect()
    });

    // Polar stage: one independent m-column at a time.
    let table = Arc::new(BasisTable::new(band_limit));
    let polar_cos = q.polar_cos();
    let polar_sin = q.polar_sin();
    let polar_w = q.polar_weights();
    let columns: Vec<Vec<(Complex64, Complex64)>> = {
        let table = &table;
        par::map_indexed(band_limit + 1, move |m| {
            let mut acc = vec![(KahanComplex::default(), KahanComplex::default()); band_limit + 1 - m];
            for i in 0..n_polar {
                let (c_m, s_m) = ring_moments[i][m];
                let w = polar_w[i];
                table.chain(m, polar_cos[i], table.q_mm(m, polar_sin[i]), |l, qv| {
                    let slot = &mut acc[l - m];
                    slot.0.add(c_m * (qv * w));
                    slot.1.add(s_m * (qv * w));
                });
            }
            acc.iter().map(|(c, s)| (c.value(), s.value())).collect()
        })
    };

    let mut spec = HarmonicSpectrum {
        band_limit,
        coeffs: vec![Complex64::default(); (band_limit + 1) * (band_limit + 1)],
        table,
    };
    for (m, column) in columns.iter().enumerate() {
        for (offset, &(c, s)) in column.iter().enumerate() {
            let l = m + offset;
            if m == 0 {
                spec.coeffs[lm_index(l, 0)] = c;
            } else {
                let root2 = std::f64::consts::SQRT_2;
                spec.coeffs[lm_index(l, m as i64)] = c * root2;
                spec.coeffs[lm_index(l, -(m as i64))] = s * root2;
            }
        }
    }
    Ok(spec)
}

/// Inverse transform: sample Σ a_{l,m} Y_{l,m} on a quadrature's nodes.
pub fn synthesize(spec: &HarmonicSpectrum, quadrature: Arc<SphereQuadrature>) -> SphereField {
    let q = &*quadrature;
    let n_polar = q.n_polar();
    let n_az = q.n_azimuthal();
    let band_limit = spec.band_limit;
    let (cos_tab, sin_tab) = trig_tables(n_az);
    let polar_cos = q.polar_cos();
    let polar_sin = q.polar_sin();
    let table = &*spec.table;

    let rows: Vec<Vec<Complex64>> = par::map_indexed(n_polar, |i| {
        // Per-ring azimuthal profile coefficients.
        let mut a_m = vec![Complex64::default(); band_limit + 1];
        let mut b_m = vec![Complex64::default(); band_limit + 1];
        for m in 0..=band_limit {
            let mut ac = KahanComplex::default();
            let mut bc = KahanComplex::default();
            table.chain(m, polar_cos[i], table.q_mm(m, polar_sin[i]), |l, qv| {
                ac.add(spec.coeffs[lm_index(l, m as i64)] * qv);
                if m > 0 {
                    bc.add(spec.coeffs[lm_index(l, -(m as i64))] * qv);
                }
            });
            let scale = if m == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
            a_m[m] = ac.value() * scale;
            b_m[m] = bc.value() * scale;
        }
        (0..n_az)
            .map(|j| {
                let mut acc = KahanComplex::default();
                acc.add(a_m[0]);
                for m in 1..=band_limit {
                    let k = (m * j) % n_az;
                    acc.add(a_m[m] * cos_tab[k] + b_m[m] * sin_tab[k]);
                }
                acc.value()
            })
            .collect()
    });

    let mut values = Vec::with_capacity(n_polar * n_az);
    for row in rows {
        values.extend(row);
    }
    SphereField { quadrature, values }
}

/// (Σ (1 + l(l+1))^order |a_{l,m}|²)^{1/2}.
pub fn sobolev_norm(spec: &HarmonicSpectrum, order: f64) -> f64 {
    let mut acc = Kahan::default();
    for l in 0..=spec.band_limit {
        let factor = (1.0 + (l * (l + 1)) as f64).powf(order);
        for m in -(l as i64)..=(l as i64) {
            acc.add(factor * spec.get(l, m).norm_sqr());
        }
    }
    acc.value().max(0.0).sqrt()
}

fn orthogonality_defect(rot: &Matrix3<f64>) -> f64 {
    (rot.transpose() * rot - Matrix3::identity()).norm()
}

/// Largest band limit a field's quadrature can analyze exactly.
pub fn max_band_limit(q: &SphereQuadrature) -> usize {
    (q.degree() / 2).min(MAX_BAND_LIMIT)
}

/// f(Θx) sampled on f's own grid, through the spectrum at the grid's full
/// band limit.
pub fn rotate_field(f: &SphereField, rot: &Matrix3<f64>) -> Result<SphereField> {
    let defect = orthogonality_defect(rot);
    if defect > 1e-12 {
        return Err(Error::NotARotation(defect));
    }
    let spec = analyze(f, max_band_limit(f.quadrature()))?;
    let nodes = f.quadrature().nodes();
    let values = par::map_indexed(nodes.len(), |i| spec.eval_at(rot * nodes[i]));
    Ok(SphereField {
        quadrature: f.quadrature().clone(),
        values,
    })
}

/// sup over the supplied rotations of |Θ − I|⁻ˢ · ‖f∘Θ − f‖₂ (Frobenius
/// distance). Identity rotations are skipped.
pub fn rotation_modulus(f: &SphereField, rotations: &[Matrix3<f64>], order: f64) -> Result<f64> {
    if !(order > 0.0 && order < 1.0) {
        return Err(Error::invalid(
            "order",
            format!("must lie in (0,1), got {order}"),
        ));
    }
    let mut best = 0.0_f64;
    for rot in rotations {
        let dist = (rot - Matrix3::identity()).norm();
        if dist == 0.0 {
            continue;
        }
        let moved = rotate_field(f, rot)?;
        let diff = moved.sub(f)?.l2_norm();
        best = best.max(dist.powf(-order) * diff);
    }
    Ok(best)
}

/// Fixed diagnostic set: 20 rotations with Fibonacci-spiral axes and angles
/// log-spaced over [1e-3, 1].
pub fn standard_rotation_set() -> Vec<Matrix3<f64>> {
    const COUNT: usize = 20;
    const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;
    (0..COUNT)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / COUNT as f64;
            let s = (1.0 - z * z).sqrt();
            let phi = GOLDEN_ANGLE * k as f64;
            let axis = Vector3::new(s * phi.cos(), s * phi.sin(), z);
            let angle = 10f64.powf(-3.0 * (1.0 - k as f64 / (COUNT - 1) as f64));
            *Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle).matrix()
        })
        .collect()
}

/// Result of splitting f into a low-degree part and the node-wise remainder.
#[derive(Debug)]
pub struct SmoothSplit {
    pub phi: SphereField,
    pub remainder: SphereField,
    pub cut_degree: usize,
}

/// f = φ + g with φ the lowest-degree truncation whose remainder satisfies
/// ‖g‖₂ < eps; g is formed node-wise so φ + g = f exactly on the grid.
pub fn smooth_split(f: &SphereField, eps: f64) -> Result<SmoothSplit> {
    if !(eps > 0.0) {
        return Err(Error::invalid("eps", format!("must be > 0, got {eps}")));
    }
    let band_limit = max_band_limit(f.quadrature());
    let spec = analyze(f, band_limit)?;
    let energies = spec.per_degree_energy();
    let norm_sq = {
        let mut acc = Kahan::default();
        for (w, v) in f.quadrature().weights().iter().zip(f.values()) {
            acc.add(w * v.norm_sqr());
        }
        acc.value()
    };
    // Discrete Pythagoras: the beyond-band residual is orthogonal to every
    // resolved harmonic under the quadrature inner product.
    let beyond_band = (norm_sq - energies.iter().sum::<f64>()).max(0.0);
    let mut cut = None;
    let mut tail_sq = beyond_band;
    for l in (0..=band_limit).rev() {
        if tail_sq.sqrt() < eps {
            cut = Some(l);
        } else {
            break;
        }
        tail_sq += energies[l];
    }
    // Dropping every degree may itself satisfy the bound.
    let cut = if tail_sq.sqrt() < eps {
        usize::MAX
    } else {
        match cut {
            Some(c) => c,
            None => {
                return Err(Error::ResolutionExhausted {
                    requested: eps,
                    achievable: beyond_band.sqrt(),
                })
            }
        }
    };
    let (phi, cut_degree) = if cut == usize::MAX {
        (
            SphereField::constant(f.quadrature().clone(), Complex64::default()),
            0,
        )
    } else {
        (synthesize(&spec.truncated(cut), f.quadrature().clone()), cut)
    };
    let remainder = f.sub(&phi)?;
    Ok(SmoothSplit {
        phi,
        remainder,
        cut_degree,
    })
}

/// Writes `l,m,re,im` rows at 17 significant digits (exact f64 round-trip).
pub fn write_spectrum_csv<W: Write>(spec: &HarmonicSpectrum, mut out: W) -> Result<()> {
    writeln!(out, "l,m,re,im")?;
    for l in 0..=spec.band_limit {
        for m in -(l as i64)..=(l as i64) {
            let c = spec.get(l, m);
            writeln!(out, "{l},{m},{:.16e},{:.16e}", c.re, c.im)?;
        }
    }
    Ok(())
}

/// Reads a spectrum written by `write_spectrum_csv`. The band limit is the
/// largest degree present; absent coefficients are zero.
pub fn read_spectrum_csv<R: BufRead>(input: R) -> Result<HarmonicSpectrum> {
    let mut entries = Vec::new();
    let mut max_l = 0usize;
    for (line_no, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || (line_no == 0 && trimmed.starts_with('l')) {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                format!("spectrum line {}", line_no + 1),
                format!("expected 4 comma-separated fields, got {}", fields.len()),
            ));
        }
        let l: usize = fields[0]
            .trim()
            .parse()
            .map_err(|e| Error::parse(format!("spectrum line {}", line_no + 1), format!("l: {e}")))?;
        let m: i64 = fields[1]
            .trim()
            .parse()
            .map_err(|e| Error::parse(format!("spectrum line {}", line_no + 1), format!("m: {e}")))?;
        let re: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|e| Error::parse(format!("spectrum line {}", line_no + 1), format!("re: {e}")))?;
        let im: f64 = fields[3]
            .trim()
            .parse()
            .map_err(|e| Error::parse(format!("spectrum line {}", line_no + 1), format!("im: {e}")))?;
        if m.unsigned_abs() as usize > l {
            return Err(Error::parse(
                format!("spectrum line {}", line_no + 1),
                format!("|m| = {} exceeds l = {l}", m.unsigned_abs()),
            ));
        }
        if l > MAX_BAND_LIMIT {
            return Err(Error::parse(
                format!("spectrum line {}", line_no + 1),
                format!("degree {l} exceeds the supported maximum {MAX_BAND_LIMIT}"),
            ));
        }
        max_l = max_l.max(l);
        entries.push((l, m, Complex64::new(re, im)));
    }
    if entries.is_empty() {
        return Err(Error::parse("spectrum file", "no coefficient rows"));
    }
    let mut spec = HarmonicSpectrum::zero(max_l);
    for (l, m, c) in entries {
        spec.set(l, m, c);
    }
    Ok(spec)
}

/// Parseval check value: quadrature ‖f‖₂² minus spectrum energy.
pub fn parseval_defect(f: &SphereField, spec: &HarmonicSpectrum) -> f64 {
    let mut acc = Kahan::default();
    for (w, v) in f.quadrature().weights().iter().zip(f.values()) {
        acc.add(w * v.norm_sqr());
    }
    (acc.value() - spec.total_energy()).abs()
}

/// ∫ f dσ convenience wrapper.
pub fn mean_value(f: &SphereField) -> Complex64 {
    integrate_sphere(f.quadrature(), f.values()).expect("field length matches its quadrature")
}
