//! The acceptance suite: ten quantitative criteria with pinned tolerances,
//! runnable at full or quick resolution. Each criterion reports expected,
//! actual, tolerance, and a pass flag; the integration test and the CLI
//! `accept` command both run through here.

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convolution::{
    convolve_pair, convolve_pair_modulus, convolve_sources, triple_restrict, FieldEval,
    PairSource,
};
use crate::functional::{
    el_residual, lambda_oracle, lambda_value, multiplier_estimate, q_value, EvalSettings,
};
use crate::harmonics::{
    analyze, real_spherical_harmonic, rotate_field, sobolev_norm, standard_rotation_set,
    synthesize, HarmonicSpectrum, SphereField,
};
use crate::phase::{factorization_defect, fit_character, modulate};
use crate::quadrature::{build_ball_grid, build_sphere_quadrature, BallGrid, SphereQuadrature};
use crate::solver::{
    contraction_solve, even_perturbation, power_iterate, CriticalPointReport, Resolution,
    SolverConfig,
};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const PI: f64 = std::f64::consts::PI;

/// Recorded reference maxima for the trilinear ratio regression; regenerate
/// with the ignored `print_reference_baselines` test.
const TRILINEAR_H0_BASELINE: f64 = 1.419729;
const TRILINEAR_H05_BASELINE: f64 = 0.696595;
const TRILINEAR_H0_BASELINE_QUICK: f64 = 1.215298;
const TRILINEAR_H05_BASELINE_QUICK: f64 = 0.594563;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub index: usize,
    pub name: &'static str,
    pub expected: String,
    pub actual: String,
    pub tolerance: String,
    pub passed: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AcceptanceOutcome {
    pub criteria: Vec<CriterionResult>,
    pub all_passed: bool,
}

pub const CRITERION_NAMES: [&str; 10] = [
    "constant-density law",
    "constant critical point",
    "constant functional values",
    "symmetry invariance",
    "pointwise domination",
    "solver convergence",
    "contraction illustration",
    "phase factorization",
    "oracle equivalence",
    "trilinear regression",
];

/// Per-criterion wall-clock budgets in seconds; exceeding one fails the
/// criterion even when its numbers are in tolerance.
pub const CRITERION_BUDGETS: [f64; 10] =
    [10.0, 30.0, 120.0, 120.0, 60.0, 180.0, 120.0, 60.0, 180.0, 180.0];

pub fn run_all(quick: bool) -> AcceptanceOutcome {
    let criteria: Vec<CriterionResult> = (1..=10).map(|k| run_criterion(k, quick)).collect();
    let all_passed = criteria.iter().all(|c| c.passed);
    AcceptanceOutcome {
        criteria,
        all_passed,
    }
}

pub fn run_criterion(index: usize, quick: bool) -> CriterionResult {
    let start = Instant::now();
    let (expected, mut actual, tolerance, mut passed) = match index {
        1 => constant_density_law(quick),
        2 => constant_critical_point(quick),
        3 => constant_functional_values(quick),
        4 => symmetry_invariance(quick),
        5 => pointwise_domination(quick),
        6 => solver_convergence(quick),
        7 => contraction_illustration(quick),
        8 => phase_factorization(quick),
        9 => oracle_equivalence(quick),
        10 => trilinear_regression(quick),
        _ => panic!("criterion index {index} out of range 1..=10"),
    };
    let seconds = start.elapsed().as_secs_f64();
    let budget = CRITERION_BUDGETS[index - 1];
    if seconds > budget {
        passed = false;
        actual.push_str(&format!("; took {seconds:.1}s of the {budget:.0}s budget"));
    }
    CriterionResult {
        index,
        name: CRITERION_NAMES[index - 1],
        expected,
        actual,
        tolerance,
        passed,
        seconds,
    }
}

/// Fixed-width table of the outcome, one criterion per line.
pub fn format_table(outcome: &AcceptanceOutcome) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>2}  {:<28} {:<34} {:<34} {:<22} {:<6} {:>8}\n",
        "#", "criterion", "expected", "actual", "tolerance", "status", "seconds"
    ));
    for c in &outcome.criteria {
        out.push_str(&format!(
            "{:>2}  {:<28} {:<34} {:<34} {:<22} {:<6} {:>8.2}\n",
            c.index,
            c.name,
            c.expected,
            c.actual,
            c.tolerance,
            if c.passed { "PASS" } else { "FAIL" },
            c.seconds
        ));
    }
    out.push_str(if outcome.all_passed {
        "all criteria passed\n"
    } else {
        "FAILURES PRESENT\n"
    });
    out
}

fn ball(n_radial: usize, n_polar: usize, n_az: usize) -> Arc<BallGrid> {
    let q = build_sphere_quadrature(n_polar, n_az).expect("valid quadrature sizes");
    build_ball_grid(n_radial, q).expect("valid radial size")
}

fn constant_on(q: Arc<SphereQuadrature>) -> SphereField {
    SphereField::constant(q, Complex64::new(1.0, 0.0))
}

fn random_spectrum(band: usize, seed: u64, complex: bool) -> HarmonicSpectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = HarmonicSpectrum::zero(band);
    for l in 0..=band {
        for m in -(l as i64)..=(l as i64) {
            let re = rng.gen_range(-1.0..1.0);
            let im = if complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
            spec.set(l, m, Complex64::new(re, im));
        }
    }
    spec
}

// 1. Pair convolution of constants reproduces 2π/|z| on every node, and a
// seeded Monte Carlo histogram of |x+x′| re-measures the circle constant.
fn constant_density_law(quick: bool) -> (String, String, String, bool) {
    let grid = if quick {
        ball(8, 8, 16)
    } else {
        ball(24, 16, 32)
    };
    let one = constant_on(grid.angular().clone());
    let pair = convolve_pair(&one, &one, grid.clone(), 64, 0).expect("constant pair");
    let mut worst = 0.0_f64;
    for (idx, v) in pair.values().iter().enumerate() {
        let want = TWO_PI / grid.position(idx).norm();
        worst = worst.max((v.re - want).abs() / want);
    }
    let law_ok = worst <= 1e-8;

    let samples = if quick { 1_000_000 } else { 10_000_000 };
    let bins = 20usize;
    let mut counts = vec![0u64; bins];
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_101);
    for _ in 0..samples {
        let t1: f64 = rng.gen_range(-1.0..1.0);
        let p1: f64 = rng.gen_range(0.0..TWO_PI);
        let t2: f64 = rng.gen_range(-1.0..1.0);
        let p2: f64 = rng.gen_range(0.0..TWO_PI);
        let s1 = (1.0 - t1 * t1).sqrt();
        let s2 = (1.0 - t2 * t2).sqrt();
        let r = (Vector3::new(s1 * p1.cos(), s1 * p1.sin(), t1)
            + Vector3::new(s2 * p2.cos(), s2 * p2.sin(), t2))
        .norm();
        let bin = ((r / 2.0) * bins as f64) as usize;
        counts[bin.min(bins - 1)] += 1;
    }
    let mut worst_sigmas = 0.0_f64;
    for (b, &count) in counts.iter().enumerate() {
        let lo = 2.0 * b as f64 / bins as f64;
        let hi = 2.0 * (b + 1) as f64 / bins as f64;
        let mass = count as f64 / samples as f64;
        let scale = 8.0 * PI / (hi * hi - lo * lo);
        let c0 = mass * scale;
        let sigma = (mass * (1.0 - mass) / samples as f64).sqrt() * scale;
        worst_sigmas = worst_sigmas.max((c0 - TWO_PI).abs() / sigma);
    }
    let mc_ok = worst_sigmas <= 5.0;

    (
        "2π/|z| law; MC bins at 2π".into(),
        format!("max rel err {worst:.2e}; worst bin {worst_sigmas:.2}σ"),
        "1e-8; 5σ per bin".into(),
        law_ok && mc_ok,
    )
}

// 2. T(1) = 8π²·1, residual and multiplier at the constant critical point.
fn constant_critical_point(quick: bool) -> (String, String, String, bool) {
    let (grid, n_circle) = if quick {
        (ball(8, 8, 16), 16)
    } else {
        (ball(16, 16, 32), 32)
    };
    let s = EvalSettings::new(grid, n_circle, 0);
    let one = constant_on(s.grid.angular().clone());
    let pair = convolve_pair(&one, &one, s.grid.clone(), s.n_circle, 0).expect("pair");
    let t = triple_restrict(&one, &pair, 0).expect("triple");
    let want = 8.0 * PI * PI;
    let mut worst = 0.0_f64;
    for v in t.values() {
        worst = worst.max((v - Complex64::new(want, 0.0)).norm() / want);
    }
    let residual = el_residual(&one, TWO_PI, &s).expect("residual");
    let mult = multiplier_estimate(&one, &s).expect("multiplier");
    let ok = worst <= 1e-6 && residual <= 1e-6 && (mult - TWO_PI).abs() <= 1e-6;
    (
        "T(1)=8π²; residual 0; multiplier 2π".into(),
        format!(
            "dev {worst:.2e}; residual {residual:.2e}; mult off {:.2e}",
            (mult - TWO_PI).abs()
        ),
        "1e-6 each".into(),
        ok,
    )
}

// 3. q and Λ at the constant, Fourier-side cross-check within its tail bound.
fn constant_functional_values(quick: bool) -> (String, String, String, bool) {
    let (grid, n_circle) = if quick {
        (ball(8, 8, 16), 16)
    } else {
        (ball(16, 16, 32), 32)
    };
    let s = EvalSettings::new(grid, n_circle, 0);
    let one = constant_on(s.grid.angular().clone());
    let q = q_value(&one, &s).expect("q");
    let lambda = lambda_value(&one, &s).expect("lambda");
    let exact_lambda = 16.0 * PI.powi(4);
    let (xi_max, n_xi) = if quick { (20.0, 48) } else { (40.0, 96) };
    let oracle = lambda_oracle(&one, xi_max, n_xi).expect("oracle");
    let q_ok = (q - TWO_PI.sqrt()).abs() <= 1e-6;
    let l_ok = (lambda - exact_lambda).abs() <= 1e-4 * exact_lambda;
    let o_ok = (oracle.value - exact_lambda).abs() <= oracle.tail_bound;
    (
        "q=√(2π); Λ=16π⁴; oracle in tail".into(),
        format!(
            "q off {:.2e}; Λ rel {:.2e}; oracle off {:.3e} vs bound {:.3e}",
            (q - TWO_PI.sqrt()).abs(),
            (lambda - exact_lambda).abs() / exact_lambda,
            (oracle.value - exact_lambda).abs(),
            oracle.tail_bound
        ),
        "1e-6; 1e-4 rel; tail bound".into(),
        q_ok && l_ok && o_ok,
    )
}

// 4. Λ is blind to scaling, rotation, conjugation, the antipodal map, and
// modulation for five fixed fields.
fn symmetry_invariance(quick: bool) -> (String, String, String, bool) {
    // Modulation by |ξ| = 2 needs the full band even in quick mode; only the
    // ball resolution shrinks there.
    let (grid, n_circle, band) = if quick {
        (ball(8, 11, 22), 24, 10)
    } else {
        (ball(12, 12, 24), 24, 10)
    };
    let s = EvalSettings::new(grid, n_circle, band);
    let quad = s.grid.angular().clone();

    let fields: Vec<SphereField> = vec![
        constant_on(quad.clone()),
        SphereField::from_fn(quad.clone(), |p| {
            Complex64::new(1.0 + 0.3 * real_spherical_harmonic(2, 0, p), 0.0)
        }),
        SphereField::from_fn(quad.clone(), |p| {
            Complex64::new(
                1.0 + 0.2 * real_spherical_harmonic(2, 2, p),
                0.1 * real_spherical_harmonic(1, 0, p),
            )
        }),
        SphereField::from_fn(quad.clone(), |p| {
            Complex64::new(
                0.8 + 0.25 * real_spherical_harmonic(1, 1, p),
                0.3 * real_spherical_harmonic(2, -1, p),
            )
        }),
        synthesize(&random_spectrum(3, 1001, true), quad.clone()),
    ];
    let rotations = standard_rotation_set();
    let used_rotations = [&rotations[0], &rotations[7], &rotations[19]];
    let modulations = [Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 2.0, 0.0)];

    let mut worst = 0.0_f64;
    for f in &fields {
        let base = lambda_value(f, &s).expect("lambda");
        let mut check = |g: &SphereField| {
            let v = lambda_value(g, &s).expect("lambda");
            worst = worst.max((v - base).abs() / base);
        };
        check(&f.scaled(Complex64::new(-0.7, 0.4)));
        check(&f.conjugate());
        check(&f.antipodal().expect("even azimuth count"));
        for rot in used_rotations {
            check(&rotate_field(f, rot).expect("rotation"));
        }
        for xi in &modulations {
            check(&modulate(f, *xi));
        }
    }
    (
        "Λ invariant under the symmetry group".into(),
        format!("worst rel drift {worst:.2e}"),
        "1e-6 relative".into(),
        worst <= 1e-6,
    )
}

// 5. |fσ*fσ| never exceeds |f|σ*|f|σ node-wise for five complex fields.
fn pointwise_domination(quick: bool) -> (String, String, String, bool) {
    let (grid, n_circle, band) = if quick {
        (ball(6, 8, 16), 16, 3)
    } else {
        (ball(10, 10, 20), 24, 4)
    };
    let quad = grid.angular().clone();
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..5u64 {
        let f = synthesize(&random_spectrum(band, 500 + seed, true), quad.clone());
        let pair = convolve_pair(&f, &f, grid.clone(), n_circle, band).expect("pair");
        let dominating =
            convolve_pair_modulus(&f, grid.clone(), n_circle, band).expect("modulus pair");
        for (a, b) in pair.values().iter().zip(dominating.values()) {
            worst = worst.max(a.norm() - b.re);
        }
    }
    (
        "|pair(f,f)| ≤ pair(|f|,|f|) node-wise".into(),
        format!("worst excess {worst:.2e}"),
        "1e-10".into(),
        worst <= 1e-10,
    )
}

fn baseline_config(quick: bool) -> SolverConfig {
    SolverConfig {
        seed: 2026,
        resolution: if quick {
            Resolution {
                n_polar: 8,
                n_azimuthal: 16,
                n_radial: 8,
                n_circle: 12,
                band_limit: 4,
            }
        } else {
            Resolution {
                n_polar: 12,
                n_azimuthal: 24,
                n_radial: 12,
                n_circle: 16,
                band_limit: 6,
            }
        },
        ..SolverConfig::default()
    }
}

fn perturbed_start(cfg: &SolverConfig, amplitude: f64) -> SphereField {
    let quad = cfg.sphere_quadrature().expect("resolution validated");
    let pert = even_perturbation(quad.clone(), cfg.resolution.band_limit, cfg.seed)
        .expect("even degrees available")
        .scaled(Complex64::new(amplitude, 0.0));
    constant_on(quad).add(&pert).expect("same grid")
}

fn converged_baseline(quick: bool) -> Result<Arc<CriticalPointReport>, String> {
    static FULL: OnceLock<Result<Arc<CriticalPointReport>, String>> = OnceLock::new();
    static QUICK: OnceLock<Result<Arc<CriticalPointReport>, String>> = OnceLock::new();
    let cell = if quick { &QUICK } else { &FULL };
    cell.get_or_init(|| {
        let cfg = baseline_config(quick);
        let f0 = perturbed_start(&cfg, 0.05);
        power_iterate(&f0, &cfg)
            .map(Arc::new)
            .map_err(|e| e.to_string())
    })
    .clone()
}

// 6. Power iteration from a seeded even perturbation of the constant:
// converged residual, rapidly decaying spectrum, positive minimum, evenness.
fn solver_convergence(quick: bool) -> (String, String, String, bool) {
    let report = match converged_baseline(quick) {
        Ok(r) => r,
        Err(e) => {
            return (
                "residual <1e-8 within 200 iters".into(),
                format!("solver error: {e}"),
                "see expected".into(),
                false,
            )
        }
    };
    let band = baseline_config(quick).resolution.band_limit;
    let total: f64 = report.spectrum_tail.iter().sum();
    let high: f64 = report.spectrum_tail[band / 2 + 1..].iter().sum();
    let tail_frac = high / total;
    let ok = report.converged
        && report.residual_history.len() <= 200
        && *report.residual_history.last().unwrap() < 1e-8
        && tail_frac < 1e-10
        && report.min_value >= 1e-3
        && report.evenness_defect < 1e-8;
    (
        "residual<1e-8; tail<1e-10; min≥1e-3; even".into(),
        format!(
            "{} iters, residual {:.2e}, tail {:.2e}, min {:.3}, evenness {:.2e}",
            report.residual_history.len(),
            report.residual_history.last().unwrap(),
            tail_frac,
            report.min_value,
            report.evenness_defect
        ),
        "200 iters; 1e-8; 1e-10; 1e-3; 1e-8".into(),
        ok,
    )
}

// 7. Picard refinement of the converged field contracts geometrically and
// stays inside the ε^{3/4} ball.
fn contraction_illustration(quick: bool) -> (String, String, String, bool) {
    let baseline = match converged_baseline(quick) {
        Ok(r) => r,
        Err(e) => {
            return (
                "contraction ratio < 1".into(),
                format!("baseline error: {e}"),
                "ratio < 1; in ball".into(),
                false,
            )
        }
    };
    let cfg = baseline_config(quick);
    let report = match contraction_solve(&baseline.final_field, &cfg) {
        Ok(r) => r,
        Err(e) => {
            return (
                "contraction ratio < 1".into(),
                format!("solve error: {e}"),
                "ratio < 1; in ball".into(),
                false,
            )
        }
    };
    let radius = cfg.eps_split.powf(cfg.ball_radius_exponent) * baseline.final_field.l2_norm();
    let in_ball = report.ball_distances.iter().all(|&d| d <= radius);
    let mut max_ratio = 0.0_f64;
    for w in report.residual_history.windows(2) {
        if w[0] > 1e-13 {
            max_ratio = max_ratio.max(w[1] / w[0]);
        }
    }
    let ok = report.converged && in_ball && max_ratio < 1.0 && !report.residual_history.is_empty();
    (
        "geometric decay inside ε^(3/4) ball".into(),
        format!(
            "{} steps, max ratio {max_ratio:.3}, max dist {:.3e} vs radius {radius:.3e}",
            report.residual_history.len(),
            report
                .ball_distances
                .iter()
                .cloned()
                .fold(0.0_f64, f64::max)
        ),
        "ratio < 1; dist ≤ radius".into(),
        ok,
    )
}

// 8. The character fit recovers a planted modulation of the converged field
// and its defect is modulation-invariant.
fn phase_factorization(quick: bool) -> (String, String, String, bool) {
    let baseline = match converged_baseline(quick) {
        Ok(r) => r,
        Err(e) => {
            return (
                "recover ξ=(0,2,0)".into(),
                format!("baseline error: {e}"),
                "1e-3; 1e-6; 1e-8".into(),
                false,
            )
        }
    };
    let f = &baseline.final_field;
    let xi0 = Vector3::new(0.0, 2.0, 0.0);
    let fit = match fit_character(&modulate(f, xi0), 8.0) {
        Ok(fit) => fit,
        Err(e) => {
            return (
                "recover ξ=(0,2,0)".into(),
                format!("fit error: {e}"),
                "1e-3; 1e-6; 1e-8".into(),
                false,
            )
        }
    };
    let xi_err = (fit.xi_vec() - xi0).norm();
    let defect_plain = factorization_defect(f, 8.0).unwrap_or(f64::NAN);
    let defect_shifted =
        factorization_defect(&modulate(f, Vector3::new(1.0, 1.0, 0.0)), 8.0).unwrap_or(f64::NAN);
    let drift = (defect_plain - defect_shifted).abs();
    let ok = xi_err <= 1e-3 && fit.residual_rel < 1e-6 && drift <= 1e-8;
    (
        "ξ recovered; tiny residual; stable defect".into(),
        format!(
            "ξ err {xi_err:.2e}, residual {:.2e}, defect drift {drift:.2e}",
            fit.residual_rel
        ),
        "1e-3; 1e-6; 1e-8".into(),
        ok,
    )
}

// 9. Convolution-side and Fourier-side Λ agree for random band-limited
// fields within the tail bound plus 1e-4 relative.
fn oracle_equivalence(quick: bool) -> (String, String, String, bool) {
    let field_quad = build_sphere_quadrature(5, 10).expect("field grid");
    let (grid, n_circle, xi_max, n_xi) = if quick {
        (ball(8, 8, 16), 20, 20.0, 48)
    } else {
        (ball(16, 12, 24), 24, 30.0, 72)
    };
    let s = EvalSettings::new(grid, n_circle, 4);
    let mut worst_margin = f64::NEG_INFINITY;
    let mut detail = String::new();
    for seed in 0..3u64 {
        let f = synthesize(&random_spectrum(4, 900 + seed, true), field_quad.clone());
        let conv = lambda_value(&f, &s).expect("lambda");
        let oracle = lambda_oracle(&f, xi_max, n_xi).expect("oracle");
        let allowed = oracle.tail_bound + 1e-4 * conv;
        let margin = (conv - oracle.value).abs() - allowed;
        worst_margin = worst_margin.max(margin);
        if seed > 0 {
            detail.push_str("; ");
        }
        detail.push_str(&format!("Δ{:.1e}/allow{:.1e}", (conv - oracle.value).abs(), allowed));
    }
    (
        "|Λ_conv − Λ_oracle| within allowance".into(),
        detail,
        "tail bound + 1e-4 rel".into(),
        worst_margin <= 0.0,
    )
}

fn trilinear_tier(quick: bool) -> (usize, usize, usize, usize, usize) {
    // (n_polar, n_azimuthal, band, n_circle, n_triples)
    if quick {
        (7, 14, 6, 14, 20)
    } else {
        (9, 18, 8, 18, 100)
    }
}

/// Max over seeded random triples of
/// ‖T₃(h₁,h₂,h₃)‖_{H^s} / (‖h₁‖_{H^s}‖h₂‖_{H^s}‖h₃‖_{H^s}) at s ∈ {0, ½}.
fn trilinear_ratios(quick: bool) -> (f64, f64) {
    let (n_polar, n_az, band, n_circle, n_triples) = trilinear_tier(quick);
    let quad = build_sphere_quadrature(n_polar, n_az).expect("triple grid");
    // The ball samples are never read by the chordal rule; keep them cheap.
    let source_grid = ball(4, 4, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(7_070_707);
    let mut max_h0 = 0.0_f64;
    let mut max_h05 = 0.0_f64;
    for _ in 0..n_triples {
        let mut specs = Vec::with_capacity(3);
        let mut fields = Vec::with_capacity(3);
        for _ in 0..3 {
            let l_max = rng.gen_range(1..=band);
            let spec = random_spectrum(l_max, rng.gen(), true);
            fields.push(synthesize(&spec, quad.clone()));
            specs.push(spec);
        }
        let source = PairSource::new(
            FieldEval::Spectrum(Arc::new(analyze(&fields[0], band).expect("analyze"))),
            FieldEval::Spectrum(Arc::new(analyze(&fields[1], band).expect("analyze"))),
            n_circle,
        )
        .expect("circle count");
        let pair = convolve_sources(source, source_grid.clone());
        let t = triple_restrict(&fields[2], &pair, band).expect("triple");
        let t_spec = analyze(&t, band).expect("analyze output");
        for (order, slot) in [(0.0, &mut max_h0), (0.5, &mut max_h05)] {
            let denom: f64 = specs.iter().map(|sp| sobolev_norm(sp, order)).product();
            *slot = (*slot).max(sobolev_norm(&t_spec, order) / denom);
        }
    }
    (max_h0, max_h05)
}

// 10. The trilinear H⁰ and H^{1/2} ratios stay below their recorded maxima
// with 5% headroom.
fn trilinear_regression(quick: bool) -> (String, String, String, bool) {
    let (max_h0, max_h05) = trilinear_ratios(quick);
    let (base_h0, base_h05) = if quick {
        (TRILINEAR_H0_BASELINE_QUICK, TRILINEAR_H05_BASELINE_QUICK)
    } else {
        (TRILINEAR_H0_BASELINE, TRILINEAR_H05_BASELINE)
    };
    let ok = max_h0 <= 1.05 * base_h0 && max_h05 <= 1.05 * base_h05;
    (
        format!("H⁰ ≤ {base_h0:.4}, H½ ≤ {base_h05:.4} (+5%)"),
        format!("H⁰ {max_h0:.4}, H½ {max_h05:.4}"),
        "baseline × 1.05".into(),
        ok,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    // Regenerates every pinned regression number; run with
    // `cargo test --release print_reference_baselines -- --ignored --nocapture`.
    #[test]
    #[ignore]
    fn print_reference_baselines() {
        let (h0, h05) = trilinear_ratios(false);
        println!("TRILINEAR_H0_BASELINE = {h0:.6}");
        println!("TRILINEAR_H05_BASELINE = {h05:.6}");
        let (h0q, h05q) = trilinear_ratios(true);
        println!("TRILINEAR_H0_BASELINE_QUICK = {h0q:.6}");
        println!("TRILINEAR_H05_BASELINE_QUICK = {h05q:.6}");

        let report = converged_baseline(false).expect("baseline run");
        println!(
            "baseline λ = {:.9}, q = {:.9}, iters = {}",
            report.lambda,
            report.q,
            report.residual_history.len()
        );
    }

    #[test]
    fn quick_mode_names_and_indices_line_up() {
        let result = run_criterion(5, true);
        assert_eq!(result.index, 5);
        assert_eq!(result.name, "pointwise domination");
        assert!(result.passed, "{}", result.actual);
    }
}
