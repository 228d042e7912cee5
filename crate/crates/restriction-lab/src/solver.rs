//! Critical-point search for the quartic functional: a normalized
//! fixed-point iteration on the Euler–Lagrange map T(f) = (fσ*fσ*fσ)|_{S²},
//! a Picard contraction on the smooth/small decomposition of a near-critical
//! field, and a seeded perturbation study around the constant.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::convolution::{convolve_pair, l2_norm_ball, triple_restrict};
use crate::error::{Error, Result};
use crate::functional::{el_residual_with_map, EvalSettings};
use crate::harmonics::{analyze, smooth_split, synthesize, HarmonicSpectrum, SphereField};
use crate::quadrature::{build_ball_grid, build_sphere_quadrature};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Resolution {
    pub n_polar: usize,
    pub n_azimuthal: usize,
    pub n_radial: usize,
    pub n_circle: usize,
    #[serde(rename = "L")]
    pub band_limit: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            n_polar: 12,
            n_azimuthal: 24,
            n_radial: 12,
            n_circle: 16,
            band_limit: 6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub tol_residual: f64,
    pub eps_split: f64,
    pub ball_radius_exponent: f64,
    pub seed: u64,
    pub resolution: Resolution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 200,
            tol_residual: 1e-8,
            eps_split: 0.05,
            ball_radius_exponent: 0.75,
            seed: 1,
            resolution: Resolution::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be positive"));
        }
        if !(self.tol_residual > 0.0) {
            return Err(Error::invalid("tol_residual", "must be positive"));
        }
        if !(self.eps_split > 0.0 && self.eps_split <= 1.0) {
            return Err(Error::invalid("eps_split", "must lie in (0, 1]"));
        }
        if !(self.ball_radius_exponent > 0.0 && self.ball_radius_exponent < 1.0) {
            return Err(Error::invalid(
                "ball_radius_exponent",
                "must lie in (0, 1)",
            ));
        }
        let r = &self.resolution;
        if r.n_polar > 512 {
            return Err(Error::invalid("n_polar", "must be ≤ 512"));
        }
        if r.band_limit > 128 {
            return Err(Error::invalid("L", "must be ≤ 128"));
        }
        let degree = (2 * r.n_polar).saturating_sub(1).min(r.n_azimuthal.saturating_sub(1));
        if degree < 2 * r.band_limit {
            return Err(Error::invalid(
                "L",
                format!(
                    "band limit {} needs quadrature degree ≥ {}, but (n_polar, n_azimuthal) = ({}, {}) reaches {}",
                    r.band_limit,
                    2 * r.band_limit,
                    r.n_polar,
                    r.n_azimuthal,
                    degree
                ),
            ));
        }
        Ok(())
    }

    /// Working ball grid and convolution sizes on the given sphere rule.
    pub fn settings(&self, f: &SphereField) -> Result<EvalSettings> {
        let q = f.quadrature();
        if q.n_polar() != self.resolution.n_polar || q.n_azimuthal() != self.resolution.n_azimuthal
        {
            return Err(Error::GridMismatch(format!(
                "field on ({}, {}) but resolution asks ({}, {})",
                q.n_polar(),
                q.n_azimuthal(),
                self.resolution.n_polar,
                self.resolution.n_azimuthal
            )));
        }
        Ok(EvalSettings::new(
            build_ball_grid(self.resolution.n_radial, q.clone())?,
            self.resolution.n_circle,
            self.resolution.band_limit,
        ))
    }

    /// Sphere rule for this resolution.
    pub fn sphere_quadrature(&self) -> Result<Arc<crate::quadrature::SphereQuadrature>> {
        build_sphere_quadrature(self.resolution.n_polar, self.resolution.n_azimuthal)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iter: usize,
    pub residual: f64,
    pub q: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct CriticalPointReport {
    pub final_field: SphereField,
    pub lambda: f64,
    pub q: f64,
    pub residual_history: Vec<f64>,
    pub spectrum_tail: Vec<f64>,
    pub evenness_defect: f64,
    pub min_value: f64,
    pub converged: bool,
    pub history: Vec<HistoryRow>,
    /// Per-Picard-step L² distance of the iterate from 𝓛; empty for the
    /// power iteration.
    pub ball_distances: Vec<f64>,
}

impl CriticalPointReport {
    pub fn to_json(&self) -> serde_json::Value {
        let q = self.final_field.quadrature();
        json!({
            "final_field": {
                "n_polar": q.n_polar(),
                "n_azimuthal": q.n_azimuthal(),
                "re": self.final_field.values().iter().map(|v| v.re).collect::<Vec<_>>(),
                "im": self.final_field.values().iter().map(|v| v.im).collect::<Vec<_>>(),
            },
            "lambda": self.lambda,
            "q": self.q,
            "residual_history": self.residual_history,
            "spectrum_tail": self.spectrum_tail,
            "evenness_defect": self.evenness_defect,
            "min_value": self.min_value,
            "converged": self.converged,
            "ball_distances": self.ball_distances,
        })
    }
}

/// `iter,residual,q,lambda` rows of the recorded iteration history.
pub fn write_history_csv<W: Write>(report: &CriticalPointReport, mut out: W) -> Result<()> {
    writeln!(out, "iter,residual,q,lambda")?;
    for row in &report.history {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e}",
            row.iter, row.residual, row.q, row.lambda
        )?;
    }
    Ok(())
}

fn diagnostics(
    f: &SphereField,
    band_limit: usize,
) -> Result<(Vec<f64>, f64, f64, HarmonicSpectrum)> {
    let spec = analyze(f, band_limit)?;
    let tail = spec.per_degree_energy();
    let evenness = f.sub(&f.antipodal()?)?.l2_norm() / f.l2_norm();
    Ok((tail, evenness, f.min_real(), spec))
}

/// Iterates f ← T(f)/‖T(f)‖₂ until the Euler–Lagrange residual at the
/// estimated multiplier drops below tolerance. Stalls (no relative
/// improvement of 1e-15 over 25 iterations) stop the run unconverged.
pub fn power_iterate(f0: &SphereField, cfg: &SolverConfig) -> Result<CriticalPointReport> {
    cfg.validate()?;
    let s = cfg.settings(f0)?;
    let n0 = f0.l2_norm();
    if n0 <= 0.0 {
        return Err(Error::ZeroField);
    }
    let mut f = f0.scaled(Complex64::new(1.0 / n0, 0.0));

    let mut residual_history = Vec::new();
    let mut history = Vec::new();
    let mut converged = false;
    let mut best_residual = f64::INFINITY;
    let mut last_improvement = 0usize;
    let mut lambda = 0.0;
    let mut q = 0.0;

    for iter in 1..=cfg.max_iters {
        let pair = convolve_pair(&f, &f, s.grid.clone(), s.n_circle, s.band_limit)?;
        let t = triple_restrict(&f, &pair, s.band_limit)?;
        let tn = t.l2_norm();
        if tn <= 1e-12 {
            return Err(Error::Degenerate(
                "Euler–Lagrange map vanished on the iterate".into(),
            ));
        }
        // ‖f‖₂ = 1 along the whole iteration.
        q = l2_norm_ball(&pair);
        lambda = t.inner(&f)?.re;
        let residual = el_residual_with_map(&f, &t, lambda)?;
        residual_history.push(residual);
        history.push(HistoryRow {
            iter,
            residual,
            q,
            lambda,
        });

        if residual < cfg.tol_residual {
            converged = true;
            break;
        }
        if residual < best_residual * (1.0 - 1e-15) {
            best_residual = residual;
            last_improvement = iter;
        } else if iter - last_improvement >= 25 {
            break;
        }
        f = t.scaled(Complex64::new(1.0 / tn, 0.0));
    }

    let (spectrum_tail, evenness_defect, min_value, _) = diagnostics(&f, s.band_limit)?;
    Ok(CriticalPointReport {
        final_field: f,
        lambda,
        q,
        residual_history,
        spectrum_tail,
        evenness_defect,
        min_value,
        converged,
        history,
        ball_distances: Vec::new(),
    })
}

/// T₃(u,v,w) = (uσ*vσ*wσ)|_{S²} in the pairing used by the Picard scheme.
fn t3(
    u: &SphereField,
    v: &SphereField,
    w: &SphereField,
    s: &EvalSettings,
) -> Result<SphereField> {
    let pair = convolve_pair(u, v, s.grid.clone(), s.n_circle, s.band_limit)?;
    triple_restrict(w, &pair, s.band_limit)
}

/// Picard iteration for the small correction h in f = φ + g ≈ φ + h:
/// h ← 𝓛 + 𝓝(φ,h) with 𝓛 = −φ + a·T₃(φ,φ,φ) + 3a·T₃(φ,φ,g) and
/// 𝓝(φ,h) = 3a·T₃(φ,h,h) + a·T₃(h,h,h), a = 1/(λ‖f‖₂²). The report's
/// residual history holds the increment norms ‖h_{k+1}−h_k‖₂; converged
/// requires both increment convergence and every iterate staying within
/// eps^(ball_radius_exponent)·‖f‖₂ of 𝓛.
pub fn contraction_solve(f: &SphereField, cfg: &SolverConfig) -> Result<CriticalPointReport> {
    cfg.validate()?;
    let s = cfg.settings(f)?;
    let norm_f = f.l2_norm();
    if norm_f <= 0.0 {
        return Err(Error::ZeroField);
    }

    let pair_ff = convolve_pair(f, f, s.grid.clone(), s.n_circle, s.band_limit)?;
    let t_f = triple_restrict(f, &pair_ff, s.band_limit)?;
    let lambda0 = t_f.inner(f)?.re / norm_f.powi(4);
    if lambda0 <= 0.0 {
        return Err(Error::NonPositiveMultiplier(lambda0));
    }
    let a = 1.0 / (lambda0 * norm_f * norm_f);

    let split = smooth_split(f, cfg.eps_split * norm_f)?;
    let phi = split.phi;
    let g = split.remainder;

    let pair_phi = convolve_pair(&phi, &phi, s.grid.clone(), s.n_circle, s.band_limit)?;
    let t_ppp = triple_restrict(&phi, &pair_phi, s.band_limit)?;
    let t_ppg = triple_restrict(&g, &pair_phi, s.band_limit)?;
    let l_field = phi
        .scaled(Complex64::new(-1.0, 0.0))
        .add(&t_ppp.scaled(Complex64::new(a, 0.0)))?
        .add(&t_ppg.scaled(Complex64::new(3.0 * a, 0.0)))?;

    let radius = cfg.eps_split.powf(cfg.ball_radius_exponent) * norm_f;
    let max_picard = cfg.max_iters.min(60);
    let mut h = SphereField::constant(f.quadrature().clone(), Complex64::default());
    let mut increments = Vec::new();
    let mut ball_distances = Vec::new();
    let mut in_ball = true;
    let mut settled = false;

    for _ in 1..=max_picard {
        let t_phh = t3(&phi, &h, &h, &s)?;
        let t_hhh = t3(&h, &h, &h, &s)?;
        let next = l_field
            .add(&t_phh.scaled(Complex64::new(3.0 * a, 0.0)))?
            .add(&t_hhh.scaled(Complex64::new(a, 0.0)))?;
        let step = next.sub(&h)?.l2_norm();
        increments.push(step);
        let distance = next.sub(&l_field)?.l2_norm();
        ball_distances.push(distance);
        if distance > radius {
            in_ball = false;
        }
        h = next;
        if step < cfg.tol_residual * norm_f {
            settled = true;
            break;
        }
    }

    let refined = phi.add(&h)?;
    let norm_ref = refined.l2_norm();
    let pair_ref = convolve_pair(
        &refined,
        &refined,
        s.grid.clone(),
        s.n_circle,
        s.band_limit,
    )?;
    let q = l2_norm_ball(&pair_ref) / (norm_ref * norm_ref);
    let t_ref = triple_restrict(&refined, &pair_ref, s.band_limit)?;
    let lambda = t_ref.inner(&refined)?.re / norm_ref.powi(4);
    let (spectrum_tail, evenness_defect, min_value, _) = diagnostics(&refined, s.band_limit)?;

    Ok(CriticalPointReport {
        final_field: refined,
        lambda,
        q,
        residual_history: increments,
        spectrum_tail,
        evenness_defect,
        min_value,
        converged: settled && in_ball,
        history: Vec::new(),
        ball_distances,
    })
}

/// Random real perturbation supported on even degrees 2..=L, unit L² norm.
pub fn even_perturbation(
    quad: Arc<crate::quadrature::SphereQuadrature>,
    band_limit: usize,
    seed: u64,
) -> Result<SphereField> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut spec = HarmonicSpectrum::zero(band_limit);
    for l in (2..=band_limit).step_by(2) {
        for m in -(l as i64)..=(l as i64) {
            spec.set(l, m, Complex64::new(rng.gen_range(-1.0..1.0), 0.0));
        }
    }
    let total = spec.total_energy().sqrt();
    if total <= 0.0 {
        return Err(Error::invalid(
            "L",
            "no even degrees ≥ 2 available for perturbations",
        ));
    }
    let f = synthesize(&spec, quad);
    Ok(f.scaled(Complex64::new(1.0 / total, 0.0)))
}

/// Power iteration from 1 + amplitude·(seeded even perturbation), one run
/// per trial with consecutive seeds.
pub fn perturbation_study(
    n_trials: usize,
    amplitude: f64,
    cfg: &SolverConfig,
) -> Result<Vec<CriticalPointReport>> {
    if n_trials == 0 {
        return Err(Error::invalid("n_trials", "need at least one trial"));
    }
    cfg.validate()?;
    let quad = cfg.sphere_quadrature()?;
    let mut reports = Vec::with_capacity(n_trials);
    for trial in 0..n_trials {
        let f0 = if amplitude == 0.0 {
            SphereField::constant(quad.clone(), Complex64::new(1.0, 0.0))
        } else {
            let pert = even_perturbation(
                quad.clone(),
                cfg.resolution.band_limit,
                cfg.seed.wrapping_add(trial as u64),
            )?;
            SphereField::constant(quad.clone(), Complex64::new(1.0, 0.0))
                .add(&pert.scaled(Complex64::new(amplitude, 0.0)))?
        };
        reports.push(power_iterate(&f0, cfg)?);
    }
    Ok(reports)
}

/// Upper-triangle pairwise L² distances between final fields, row-major.
pub fn pairwise_distances(reports: &[CriticalPointReport]) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            out.push(
                reports[i]
                    .final_field
                    .sub(&reports[j].final_field)?
                    .l2_norm(),
            );
        }
    }
    Ok(out)
}
