//! Command-line front end: evaluate the functional on a chosen field, run
//! the critical-point solver, fit a modulation character, or run the
//! acceptance suite. Every report echoes the effective configuration; all
//! validation happens before any output file is touched.
//!
//! Exit codes: 0 success, 2 invalid configuration or input, 3 solver did
//! not converge (the report is still written), 4 acceptance failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::json;

use crate::acceptance::{format_table, run_all};
use crate::convolution::write_ball_csv;
use crate::error::{Error, Result};
use crate::functional::{functional_report_with_fields, lambda_oracle};
use crate::harmonics::{
    analyze, read_spectrum_csv, synthesize, write_spectrum_csv, SphereField,
};
use crate::quadrature::SphereQuadrature;
use crate::phase::{fit_character, modulate};
use crate::solver::{
    contraction_solve, even_perturbation, power_iterate, write_history_csv, Resolution,
    SolverConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNCONVERGED: i32 = 3;
pub const EXIT_ACCEPTANCE: i32 = 4;

const THREADS_ENV: &str = "RESTRICTION_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "restriction-lab",
    version,
    about = "Numerical laboratory for the adjoint restriction functional on the sphere"
)]
pub struct Cli {
    /// TOML configuration file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for the parallel build (also honours RESTRICTION_LAB_THREADS).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// Seed for every random draw.
    #[arg(long, global = true, value_name = "SEED")]
    pub seed: Option<u64>,

    #[command(flatten)]
    pub resolution: ResolutionArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ResolutionArgs {
    /// Polar nodes of the sphere rule.
    #[arg(long, global = true, value_name = "N")]
    pub n_polar: Option<usize>,

    /// Azimuthal nodes of the sphere rule.
    #[arg(long, global = true, value_name = "N")]
    pub n_azimuthal: Option<usize>,

    /// Radial nodes of the ball rule.
    #[arg(long, global = true, value_name = "N")]
    pub n_radial: Option<usize>,

    /// Points per convolution circle.
    #[arg(long, global = true, value_name = "N")]
    pub n_circle: Option<usize>,

    /// Spherical-harmonic band limit L.
    #[arg(long, global = true, value_name = "L")]
    pub band_limit: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate q, Λ, the multiplier estimate, and the critical-point residual.
    Eval {
        /// constant | harmonic:l,m | modulated-constant:x,y,z | spectrum CSV path
        #[arg(long, default_value = "constant")]
        field: String,

        /// Cross-check Λ against the Fourier-side quadrature and report its tail bound.
        #[arg(long)]
        oracle: bool,

        /// Radial cutoff of the oracle integral.
        #[arg(long, value_name = "R")]
        xi_max: Option<f64>,

        /// Radial quadrature points of the oracle integral.
        #[arg(long, value_name = "N")]
        n_xi: Option<usize>,

        /// Write the JSON report here as well as to stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,

        /// Dump the field's harmonic coefficients as CSV.
        #[arg(long, value_name = "FILE")]
        dump_spectrum: Option<PathBuf>,

        /// Dump the pair convolution on the ball as CSV.
        #[arg(long, value_name = "FILE")]
        dump_ball: Option<PathBuf>,
    },

    /// Power-iterate to a critical point, optionally refining by contraction.
    Solve {
        /// constant | perturbed:amplitude
        #[arg(long, default_value = "perturbed:0.05")]
        init: String,

        /// Follow the power iteration with the contraction refinement.
        #[arg(long)]
        refine: bool,

        /// Iteration cap for the power stage.
        #[arg(long, value_name = "N")]
        max_iters: Option<usize>,

        /// Relative residual declared converged.
        #[arg(long, value_name = "TOL")]
        tol_residual: Option<f64>,

        /// Relative cut amplitude for the smooth/remainder split.
        #[arg(long, value_name = "EPS")]
        eps_split: Option<f64>,

        /// Exponent in the ε^a contraction ball radius.
        #[arg(long, value_name = "A")]
        ball_radius_exponent: Option<f64>,

        /// Directory receiving solve_report.json, solve_history.csv, solve_spectrum.csv.
        #[arg(long, default_value = ".", value_name = "DIR")]
        out_dir: PathBuf,
    },

    /// Fit the best modulation character e^{i x·ξ} and report the defect.
    Phase {
        /// constant | harmonic:l,m | modulated-constant:x,y,z | spectrum CSV path
        #[arg(long, default_value = "constant")]
        field: String,

        /// Search box half-width for the frequency ξ.
        #[arg(long, value_name = "R")]
        xi_max: Option<f64>,

        /// Write the JSON report here as well as to stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Run the acceptance criteria and print one line per criterion.
    Accept {
        /// Reduced-resolution run of the same criteria.
        #[arg(long)]
        quick: bool,

        /// Emit the outcome as JSON instead of a table.
        #[arg(long)]
        json: bool,

        /// Write the output here as well as to stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    threads: Option<usize>,
    resolution: Option<ResolutionPatch>,
    solver: Option<SolverPatch>,
    eval: Option<EvalPatch>,
    phase: Option<PhasePatch>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResolutionPatch {
    n_polar: Option<usize>,
    n_azimuthal: Option<usize>,
    n_radial: Option<usize>,
    n_circle: Option<usize>,
    #[serde(alias = "L")]
    band_limit: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverPatch {
    max_iters: Option<usize>,
    tol_residual: Option<f64>,
    eps_split: Option<f64>,
    ball_radius_exponent: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalPatch {
    xi_max: Option<f64>,
    n_xi: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhasePatch {
    xi_max: Option<f64>,
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Parse {
        what: format!("config file {}", path.display()),
        detail: e.to_string(),
    })
}

fn resolve_resolution(default: Resolution, file: &FileConfig, cli: &ResolutionArgs) -> Resolution {
    let patch = file.resolution.as_ref();
    let pick = |flag: Option<usize>, filed: Option<usize>, fallback: usize| {
        flag.or(filed).unwrap_or(fallback)
    };
    Resolution {
        n_polar: pick(cli.n_polar, patch.and_then(|p| p.n_polar), default.n_polar),
        n_azimuthal: pick(
            cli.n_azimuthal,
            patch.and_then(|p| p.n_azimuthal),
            default.n_azimuthal,
        ),
        n_radial: pick(
            cli.n_radial,
            patch.and_then(|p| p.n_radial),
            default.n_radial,
        ),
        n_circle: pick(
            cli.n_circle,
            patch.and_then(|p| p.n_circle),
            default.n_circle,
        ),
        band_limit: pick(
            cli.band_limit,
            patch.and_then(|p| p.band_limit),
            default.band_limit,
        ),
    }
}

fn eval_tier() -> Resolution {
    Resolution {
        n_polar: 24,
        n_azimuthal: 48,
        n_radial: 24,
        n_circle: 64,
        band_limit: 12,
    }
}

fn resolve_threads(flag: Option<usize>, file: Option<usize>) -> Result<Option<usize>> {
    let env = match std::env::var(THREADS_ENV) {
        Ok(raw) => Some(raw.parse::<usize>().map_err(|_| Error::Parse {
            what: format!("environment variable {THREADS_ENV}"),
            detail: format!("`{raw}` is not a thread count"),
        })?),
        Err(_) => None,
    };
    let n = flag.or(env).or(file);
    if n == Some(0) {
        return Err(Error::invalid("threads", "must be at least 1"));
    }
    Ok(n)
}

#[cfg(feature = "parallel")]
fn install_thread_pool(threads: Option<usize>) {
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn install_thread_pool(_threads: Option<usize>) {}

#[derive(Debug, Clone)]
enum FieldSource {
    Constant,
    Harmonic { l: usize, m: i64 },
    ModulatedConstant(Vector3<f64>),
    Spectrum(PathBuf),
}

fn parse_triple(text: &str, what: &str) -> Result<Vector3<f64>> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Parse {
            what: what.to_string(),
            detail: format!("`{text}` is not three comma-separated numbers"),
        });
    }
    let mut v = [0.0; 3];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part.trim().parse::<f64>().map_err(|_| Error::Parse {
            what: what.to_string(),
            detail: format!("`{part}` is not a number"),
        })?;
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Parse {
            what: what.to_string(),
            detail: "components must be finite".to_string(),
        });
    }
    Ok(Vector3::new(v[0], v[1], v[2]))
}

fn parse_field_source(text: &str) -> Result<FieldSource> {
    if text == "constant" {
        return Ok(FieldSource::Constant);
    }
    if let Some(rest) = text.strip_prefix("harmonic:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::Parse {
                what: "field source".to_string(),
                detail: format!("`{text}`: expected harmonic:l,m"),
            });
        }
        let l = parts[0].trim().parse::<usize>().map_err(|_| Error::Parse {
            what: "field source".to_string(),
            detail: format!("`{}` is not a degree", parts[0]),
        })?;
        let m = parts[1].trim().parse::<i64>().map_err(|_| Error::Parse {
            what: "field source".to_string(),
            detail: format!("`{}` is not an order", parts[1]),
        })?;
        if m.unsigned_abs() as usize > l {
            return Err(Error::invalid("field", "harmonic order |m| must be ≤ l"));
        }
        return Ok(FieldSource::Harmonic { l, m });
    }
    if let Some(rest) = text.strip_prefix("modulated-constant:") {
        return Ok(FieldSource::ModulatedConstant(parse_triple(
            rest,
            "modulation frequency",
        )?));
    }
    Ok(FieldSource::Spectrum(PathBuf::from(text)))
}

fn build_field(
    source: &FieldSource,
    quad: Arc<SphereQuadrature>,
    band_limit: usize,
) -> Result<SphereField> {
    match source {
        FieldSource::Constant => Ok(SphereField::constant(quad, Complex64::new(1.0, 0.0))),
        FieldSource::Harmonic { l, m } => {
            if *l > band_limit {
                return Err(Error::invalid(
                    "field",
                    format!("harmonic degree {l} exceeds the band limit {band_limit}"),
                ));
            }
            let mut spec = crate::harmonics::HarmonicSpectrum::zero(*l);
            spec.set(*l, *m, Complex64::new(1.0, 0.0));
            Ok(synthesize(&spec, quad))
        }
        FieldSource::ModulatedConstant(xi) => {
            let one = SphereField::constant(quad, Complex64::new(1.0, 0.0));
            Ok(modulate(&one, *xi))
        }
        FieldSource::Spectrum(path) => {
            let file = fs::File::open(path).map_err(|e| Error::Parse {
                what: format!("spectrum file {}", path.display()),
                detail: e.to_string(),
            })?;
            let spec = read_spectrum_csv(std::io::BufReader::new(file))?;
            if spec.band_limit() > band_limit {
                return Err(Error::invalid(
                    "field",
                    format!(
                        "spectrum band limit {} exceeds the configured L = {band_limit}",
                        spec.band_limit()
                    ),
                ));
            }
            Ok(synthesize(&spec, quad))
        }
    }
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

fn solver_config(
    seed: u64,
    resolution: Resolution,
    file: &FileConfig,
    max_iters: Option<usize>,
    tol_residual: Option<f64>,
    eps_split: Option<f64>,
    ball_radius_exponent: Option<f64>,
) -> SolverConfig {
    let patch = file.solver.as_ref();
    let defaults = SolverConfig::default();
    SolverConfig {
        max_iters: max_iters
            .or(patch.and_then(|p| p.max_iters))
            .unwrap_or(defaults.max_iters),
        tol_residual: tol_residual
            .or(patch.and_then(|p| p.tol_residual))
            .unwrap_or(defaults.tol_residual),
        eps_split: eps_split
            .or(patch.and_then(|p| p.eps_split))
            .unwrap_or(defaults.eps_split),
        ball_radius_exponent: ball_radius_exponent
            .or(patch.and_then(|p| p.ball_radius_exponent))
            .unwrap_or(defaults.ball_radius_exponent),
        seed,
        resolution,
    }
}

/// Parses the process arguments, runs the chosen command, and returns the
/// process exit code, reporting errors on stderr.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    let file = load_file_config(cli.config.as_deref())?;
    let threads = resolve_threads(cli.threads, file.threads)?;
    install_thread_pool(threads);
    let seed = cli.seed.or(file.seed).unwrap_or(1);

    match &cli.command {
        Command::Eval {
            field,
            oracle,
            xi_max,
            n_xi,
            out,
            dump_spectrum,
            dump_ball,
        } => {
            let resolution = resolve_resolution(eval_tier(), &file, &cli.resolution);
            let cfg = solver_config(seed, resolution.clone(), &file, None, None, None, None);
            cfg.validate()?;
            let xi_max = xi_max
                .or(file.eval.as_ref().and_then(|p| p.xi_max))
                .unwrap_or(40.0);
            let n_xi = n_xi
                .or(file.eval.as_ref().and_then(|p| p.n_xi))
                .unwrap_or(96);
            let source = parse_field_source(field)?;
            let quad = cfg.sphere_quadrature()?;
            let f = build_field(&source, quad, resolution.band_limit)?;
            let settings = cfg.settings(&f)?;
            let (report, pair, _) = functional_report_with_fields(&f, &settings)?;
            let oracle_report = if *oracle {
                Some(lambda_oracle(&f, xi_max, n_xi)?)
            } else {
                None
            };

            let mut doc = json!({
                "command": "eval",
                "config": {
                    "field": field,
                    "n_xi": n_xi,
                    "oracle": oracle,
                    "resolution": resolution,
                    "seed": seed,
                    "threads": threads,
                    "xi_max": xi_max,
                },
                "report": report,
                "timestamp": timestamp(),
            });
            if let Some(o) = &oracle_report {
                doc["oracle"] = serde_json::to_value(o).expect("oracle serializes");
            }
            let rendered = serde_json::to_string_pretty(&doc).expect("report serializes");
            println!("{rendered}");
            if let Some(path) = out {
                write_text(path, &rendered)?;
            }
            if let Some(path) = dump_spectrum {
                let spec = analyze(&f, resolution.band_limit)?;
                let mut buf = Vec::new();
                write_spectrum_csv(&spec, &mut buf)?;
                write_text(path, std::str::from_utf8(&buf).expect("ascii csv"))?;
            }
            if let Some(path) = dump_ball {
                let mut buf = Vec::new();
                write_ball_csv(&pair, &mut buf)?;
                write_text(path, std::str::from_utf8(&buf).expect("ascii csv"))?;
            }
            Ok(EXIT_OK)
        }

        Command::Solve {
            init,
            refine,
            max_iters,
            tol_residual,
            eps_split,
            ball_radius_exponent,
            out_dir,
        } => {
            let resolution = resolve_resolution(Resolution::default(), &file, &cli.resolution);
            let cfg = solver_config(
                seed,
                resolution.clone(),
                &file,
                *max_iters,
                *tol_residual,
                *eps_split,
                *ball_radius_exponent,
            );
            cfg.validate()?;

            let quad = cfg.sphere_quadrature()?;
            let f0 = if init == "constant" {
                SphereField::constant(quad, Complex64::new(1.0, 0.0))
            } else if let Some(rest) = init.strip_prefix("perturbed:") {
                let amplitude = rest.trim().parse::<f64>().map_err(|_| Error::Parse {
                    what: "init".to_string(),
                    detail: format!("`{rest}` is not an amplitude"),
                })?;
                if !(amplitude.is_finite() && amplitude >= 0.0) {
                    return Err(Error::invalid("init", "amplitude must be finite and ≥ 0"));
                }
                let one = SphereField::constant(quad.clone(), Complex64::new(1.0, 0.0));
                let pert = even_perturbation(quad, resolution.band_limit, seed)?
                    .scaled(Complex64::new(amplitude, 0.0));
                one.add(&pert)?
            } else {
                return Err(Error::invalid(
                    "init",
                    format!("`{init}` is neither `constant` nor `perturbed:amplitude`"),
                ));
            };

            let power = power_iterate(&f0, &cfg)?;
            let refined = if *refine {
                Some(contraction_solve(&power.final_field, &cfg)?)
            } else {
                None
            };

            let mut doc = json!({
                "command": "solve",
                "config": {
                    "ball_radius_exponent": cfg.ball_radius_exponent,
                    "eps_split": cfg.eps_split,
                    "init": init,
                    "max_iters": cfg.max_iters,
                    "refine": refine,
                    "resolution": resolution,
                    "seed": seed,
                    "threads": threads,
                    "tol_residual": cfg.tol_residual,
                },
                "power": power.to_json(),
                "timestamp": timestamp(),
            });
            if let Some(r) = &refined {
                doc["refine"] = r.to_json();
            }
            let rendered = serde_json::to_string_pretty(&doc).expect("report serializes");
            println!("{rendered}");

            fs::create_dir_all(out_dir)?;
            write_text(&out_dir.join("solve_report.json"), &rendered)?;
            let mut history = Vec::new();
            write_history_csv(&power, &mut history)?;
            write_text(
                &out_dir.join("solve_history.csv"),
                std::str::from_utf8(&history).expect("ascii csv"),
            )?;
            let final_field = refined
                .as_ref()
                .map(|r| &r.final_field)
                .unwrap_or(&power.final_field);
            let spec = analyze(final_field, resolution.band_limit)?;
            let mut spectrum = Vec::new();
            write_spectrum_csv(&spec, &mut spectrum)?;
            write_text(
                &out_dir.join("solve_spectrum.csv"),
                std::str::from_utf8(&spectrum).expect("ascii csv"),
            )?;

            let converged =
                power.converged && refined.as_ref().map(|r| r.converged).unwrap_or(true);
            Ok(if converged { EXIT_OK } else { EXIT_UNCONVERGED })
        }

        Command::Phase { field, xi_max, out } => {
            let resolution = resolve_resolution(eval_tier(), &file, &cli.resolution);
            let cfg = solver_config(seed, resolution.clone(), &file, None, None, None, None);
            cfg.validate()?;
            let xi_max = xi_max
                .or(file.phase.as_ref().and_then(|p| p.xi_max))
                .unwrap_or(10.0);
            let source = parse_field_source(field)?;
            let quad = cfg.sphere_quadrature()?;
            let f = build_field(&source, quad, resolution.band_limit)?;
            let fit = fit_character(&f, xi_max)?;

            let doc = json!({
                "command": "phase",
                "config": {
                    "field": field,
                    "resolution": resolution,
                    "seed": seed,
                    "threads": threads,
                    "xi_max": xi_max,
                },
                "fit": fit,
                "timestamp": timestamp(),
            });
            let rendered = serde_json::to_string_pretty(&doc).expect("report serializes");
            println!("{rendered}");
            if let Some(path) = out {
                write_text(path, &rendered)?;
            }
            Ok(EXIT_OK)
        }

        Command::Accept { quick, json, out } => {
            let outcome = run_all(*quick);
            let rendered = if *json {
                let doc = json!({
                    "all_passed": outcome.all_passed,
                    "criteria": outcome.criteria,
                    "quick": quick,
                    "timestamp": timestamp(),
                });
                serde_json::to_string_pretty(&doc).expect("outcome serializes")
            } else {
                format_table(&outcome)
            };
            println!("{rendered}");
            if let Some(path) = out {
                write_text(path, &rendered)?;
            }
            Ok(if outcome.all_passed {
                EXIT_OK
            } else {
                EXIT_ACCEPTANCE
            })
        }
    }
}
