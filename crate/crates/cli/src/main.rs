//! Batch front-end: loads scenario files, runs validate/solve/spectrum/
//! verify/sweep pipelines, and writes machine-readable reports.
//!
//! Exit codes: 0 success, 2 validation error, 3 solvability condition
//! failed, 4 convergence failure, 5 theorem-check failure. Every failure is
//! also reported as structured JSON on stderr.

mod report;
mod scenario_io;
mod svg;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use sheetsolve_core::contour::{build_contour, Contour, PathSpec, QuadratureRule, SheetIndex};
use sheetsolve_core::fixtures::default_geometry;
use sheetsolve_core::model::SpectralScenario;
use sheetsolve_core::solver::{solve_basic_equation, SheetSolution, SolveError, SolveOptions};
use sheetsolve_core::spectral::sheet_spectrum;
use sheetsolve_core::verify::{run_verification, VerifyConfig, VerifyError};

use report::emit_error;
use scenario_io::LoadedScenario;

const EXIT_OK: i32 = 0;
const EXIT_VALIDATION: i32 = 2;
const EXIT_SOLVABILITY: i32 = 3;
const EXIT_CONVERGENCE: i32 = 4;
const EXIT_THEOREM: i32 = 5;

#[derive(Parser)]
#[command(
    name = "sheetsolve",
    about = "Resonances and spectral decompositions of 2x2 operator matrices by \
             analytic continuation of the transfer function",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every scenario invariant and report derived metadata
    Validate(CommonArgs),
    /// Solve the basic equation on one sheet; writes solution.json
    Solve(SheetArgs),
    /// Classify the sheet spectrum; writes spectrum.csv and spectrum.svg
    Spectrum(SheetArgs),
    /// Run the theorem-check matrix; writes verify.json
    Verify(SheetArgs),
    /// Scale the coupling over a grid and track the spectrum; writes sweep.csv
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario JSON file
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for report artifacts
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for randomized property checks; recorded in every report
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SheetArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sheet string, one of '+'/'-' per branch (default: all '-')
    #[arg(long, allow_hyphen_values = true)]
    sheet: Option<String>,
    /// Solver tolerance override
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    sheet_args: SheetArgs,
    /// Coupling scale grid A:B:N (N points from A to B inclusive)
    #[arg(long)]
    scale: String,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate(args) => cmd_validate(&args),
        Command::Solve(args) => cmd_solve(&args),
        Command::Spectrum(args) => cmd_spectrum(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Sweep(args) => cmd_sweep(&args),
    };
    std::process::exit(code);
}

fn load_or_exit(path: &Path) -> Result<LoadedScenario, i32> {
    scenario_io::load(path).map_err(|msg| {
        emit_error("scenario", msg);
        EXIT_VALIDATION
    })
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<(), i32> {
    if let Err(e) = std::fs::create_dir_all(dir) {
        emit_error("io", format!("cannot create {}: {e}", dir.display()));
        return Err(EXIT_VALIDATION);
    }
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| {
        emit_error("io", format!("cannot write {}: {e}", path.display()));
        EXIT_VALIDATION
    })
}

fn parse_sheet(arg: &Option<String>, branches: usize) -> Result<SheetIndex, i32> {
    match arg {
        None => Ok(SheetIndex::all_minus(branches)),
        Some(text) => {
            let idx = SheetIndex::parse(text).map_err(|e| {
                emit_error("sheet", e.to_string());
                EXIT_VALIDATION
            })?;
            if idx.len() != branches {
                emit_error(
                    "sheet",
                    format!(
                        "sheet string has {} signs, scenario has {branches} branches",
                        idx.len()
                    ),
                );
                return Err(EXIT_VALIDATION);
            }
            Ok(idx)
        }
    }
}

fn geometry_for<'a>(
    loaded: &'a LoadedScenario,
    sheet: &SheetIndex,
) -> std::borrow::Cow<'a, [PathSpec]> {
    match loaded.contours.get(&sheet.to_string()) {
        Some(specs) => std::borrow::Cow::Borrowed(specs),
        None => std::borrow::Cow::Owned(default_geometry(&loaded.scenario, 1.0)),
    }
}

fn build_or_exit(
    s: &SpectralScenario,
    sheet: SheetIndex,
    geometry: &[PathSpec],
    rule: QuadratureRule,
) -> Result<Contour, i32> {
    build_contour(s, sheet, geometry, rule).map_err(|e| {
        emit_error("contour", e.to_string());
        EXIT_VALIDATION
    })
}

fn solve_or_exit(
    s: &SpectralScenario,
    c: &Contour,
    opts: SolveOptions,
) -> Result<SheetSolution, i32> {
    solve_basic_equation(s, c, opts).map_err(|e| {
        let code = match &e {
            SolveError::ConditionFailed { .. } => EXIT_SOLVABILITY,
            SolveError::NonConvergence { .. } | SolveError::Transfer(_) => EXIT_CONVERGENCE,
            SolveError::CertificateViolated { .. } => EXIT_THEOREM,
            SolveError::EmptyAdmissibleFamily => EXIT_SOLVABILITY,
        };
        emit_error("solve", e.to_string());
        code
    })
}

fn cmd_validate(args: &CommonArgs) -> i32 {
    let loaded = match load_or_exit(&args.scenario) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let report = loaded.scenario.validate();
    let dto = report::ValidateReport {
        valid: report.is_valid(),
        errors: report.errors.iter().map(|e| e.to_string()).collect(),
        warnings: report.warnings.clone(),
        a1_eigenvalues: report.a1_eigenvalues.clone(),
        poles: report.poles.iter().map(|p| [p.re, p.im]).collect(),
        seed: args.seed,
    };
    let json = serde_json::to_string_pretty(&dto).expect("serializable");
    if let Err(code) = write_artifact(&args.out, "validate.json", &json) {
        return code;
    }
    println!("{json}");
    if report.is_valid() {
        EXIT_OK
    } else {
        emit_error(
            "validation",
            format!("{} invariant violations", report.errors.len()),
        );
        EXIT_VALIDATION
    }
}

fn solve_pipeline(args: &SheetArgs) -> Result<(LoadedScenario, Contour, SheetSolution), i32> {
    let loaded = load_or_exit(&args.common.scenario)?;
    let validation = loaded.scenario.validate();
    if !validation.is_valid() {
        for e in &validation.errors {
            emit_error("validation", e.to_string());
        }
        return Err(EXIT_VALIDATION);
    }
    let sheet = parse_sheet(&args.sheet, loaded.scenario.num_branches())?;
    let geometry = geometry_for(&loaded, &sheet);
    let contour = build_or_exit(&loaded.scenario, sheet, &geometry, loaded.rule)?;
    let mut opts = SolveOptions::default();
    if let Some(t) = args.tol {
        opts.tol = t;
    }
    let solution = solve_or_exit(&loaded.scenario, &contour, opts)?;
    Ok((loaded, contour, solution))
}

fn cmd_solve(args: &SheetArgs) -> i32 {
    let (_, _, solution) = match solve_pipeline(args) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let tolerance = args.tol.unwrap_or(SolveOptions::default().tol);
    let dto = report::SolutionReport::new(&solution, tolerance, args.common.seed);
    let json = serde_json::to_string_pretty(&dto).expect("serializable");
    if let Err(code) = write_artifact(&args.common.out, "solution.json", &json) {
        return code;
    }
    println!("{json}");
    EXIT_OK
}

fn cmd_spectrum(args: &SheetArgs) -> i32 {
    let (loaded, contour, solution) = match solve_pipeline(args) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let spectrum = match sheet_spectrum(&loaded.scenario, &contour, &solution) {
        Ok(spec) => spec,
        Err(e) => {
            emit_error("spectral", e.to_string());
            return EXIT_CONVERGENCE;
        }
    };
    let csv = report::spectrum_csv(&spectrum);
    if let Err(code) = write_artifact(&args.common.out, "spectrum.csv", &csv) {
        return code;
    }
    let image = svg::render(&loaded.scenario, &contour, &spectrum);
    if let Err(code) = write_artifact(&args.common.out, "spectrum.svg", &image) {
        return code;
    }
    print!("{csv}");
    EXIT_OK
}

fn cmd_verify(args: &SheetArgs) -> i32 {
    let loaded = match load_or_exit(&args.common.scenario) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let branches = loaded.scenario.num_branches();
    if let Err(code) = parse_sheet(&args.sheet, branches) {
        return code;
    }
    let mut cfg = VerifyConfig {
        rule: loaded.rule,
        seed: args.common.seed,
        geometry: loaded
            .contours
            .get(&SheetIndex::all_minus(branches).to_string())
            .cloned(),
        ..VerifyConfig::default()
    };
    if let Some(t) = args.tol {
        cfg.solve.tol = t;
    }
    let verification = match run_verification(&loaded.scenario, &cfg) {
        Ok(v) => v,
        Err(e) => {
            let code = match &e {
                VerifyError::Invalid(_) | VerifyError::Contour(_) => EXIT_VALIDATION,
                VerifyError::Solve(SolveError::ConditionFailed { .. }) => EXIT_SOLVABILITY,
                VerifyError::Solve(SolveError::NonConvergence { .. }) => EXIT_CONVERGENCE,
                _ => EXIT_THEOREM,
            };
            emit_error("verify", e.to_string());
            return code;
        }
    };
    let dto = report::VerifyReport::new(&verification);
    let json = serde_json::to_string_pretty(&dto).expect("serializable");
    if let Err(code) = write_artifact(&args.common.out, "verify.json", &json) {
        return code;
    }
    println!("{json}");
    if verification.all_pass() {
        EXIT_OK
    } else {
        let failing: Vec<String> = verification
            .failures()
            .iter()
            .map(|c| c.name.clone())
            .collect();
        emit_error(
            "theorem-check",
            format!("failing checks: {}", failing.join(", ")),
        );
        EXIT_THEOREM
    }
}

fn parse_scale(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("scale grid {text:?} is not of the form A:B:N"));
    }
    let a: f64 = parts[0].parse().map_err(|e| format!("scale start: {e}"))?;
    let b: f64 = parts[1].parse().map_err(|e| format!("scale end: {e}"))?;
    let n: usize = parts[2].parse().map_err(|e| format!("scale count: {e}"))?;
    if n == 0 {
        return Err("scale count must be at least 1".into());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect())
}

fn cmd_sweep(args: &SweepArgs) -> i32 {
    let loaded = match load_or_exit(&args.sheet_args.common.scenario) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let validation = loaded.scenario.validate();
    if !validation.is_valid() {
        for e in &validation.errors {
            emit_error("validation", e.to_string());
        }
        return EXIT_VALIDATION;
    }
    let scales = match parse_scale(&args.scale) {
        Ok(v) => v,
        Err(msg) => {
            emit_error("scale", msg);
            return EXIT_VALIDATION;
        }
    };
    let sheet = match parse_sheet(&args.sheet_args.sheet, loaded.scenario.num_branches()) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let mut opts = SolveOptions::default();
    if let Some(t) = args.sheet_args.tol {
        opts.tol = t;
    }

    let mut csv = String::from("scale,re,im,alg_mult,geo_mult,class,branch\n");
    for &t in &scales {
        let scaled = loaded.scenario.scaled(t);
        let geometry = geometry_for(&loaded, &sheet);
        let contour = match build_or_exit(&scaled, sheet.clone(), &geometry, loaded.rule) {
            Ok(c) => c,
            Err(code) => return code,
        };
        let solution = match solve_or_exit(&scaled, &contour, opts) {
            Ok(s) => s,
            Err(code) => {
                emit_error("sweep", format!("failed at scale {t}"));
                return code;
            }
        };
        let spectrum = match sheet_spectrum(&scaled, &contour, &solution) {
            Ok(spec) => spec,
            Err(e) => {
                emit_error("spectral", format!("at scale {t}: {e}"));
                return EXIT_CONVERGENCE;
            }
        };
        for e in &spectrum {
            let branch = e.branch.map(|b| b.to_string()).unwrap_or_default();
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                t,
                e.value.re,
                e.value.im,
                e.algebraic_multiplicity,
                e.geometric_multiplicity,
                e.class.as_str(),
                branch
            ));
        }
    }
    if let Err(code) = write_artifact(&args.sheet_args.common.out, "sweep.csv", &csv) {
        return code;
    }
    print!("{csv}");
    EXIT_OK
}
