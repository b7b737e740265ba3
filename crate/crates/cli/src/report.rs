//! Serializable report types written by the CLI commands. Field order is
//! fixed by the struct definitions, so identical runs produce byte-identical
//! JSON.

use serde::Serialize;

use sheetsolve_core::solver::{SheetSolution, SolvabilityCertificate};
use sheetsolve_core::spectral::ClassifiedEigenvalue;
use sheetsolve_core::verify::VerificationReport;
use sheetsolve_core::CMatrix;

pub fn matrix_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

#[derive(Serialize)]
pub struct ValidateReport {
    pub valid: bool,
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    pub a1_eigenvalues: Vec<f64>,
    pub poles: Vec<[f64; 2]>,
    pub seed: u64,
}

#[derive(Serialize)]
pub struct CertificateDto {
    pub v0: f64,
    pub v0_error: f64,
    pub d0: f64,
    pub condition_ok: bool,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub contraction_rate: Option<f64>,
}

impl From<&SolvabilityCertificate> for CertificateDto {
    fn from(c: &SolvabilityCertificate) -> Self {
        CertificateDto {
            v0: c.v0,
            v0_error: c.v0_error,
            d0: c.d0,
            condition_ok: c.condition_ok,
            r_min: c.r_min,
            r_max: c.r_max,
            contraction_rate: c.contraction_rate,
        }
    }
}

#[derive(Serialize)]
pub struct SolutionReport {
    pub sheet: String,
    pub dim: usize,
    pub x: Vec<Vec<[f64; 2]>>,
    pub h1: Vec<Vec<[f64; 2]>>,
    pub certificate: CertificateDto,
    pub iterations: usize,
    pub final_residual: f64,
    pub quadrature_error: f64,
    pub step_ratios: Vec<f64>,
    pub uncertified: bool,
    /// `Ω` for this sheet, when the factor stage has attached it.
    pub omega: Option<Vec<Vec<[f64; 2]>>>,
    pub tolerance: f64,
    pub seed: u64,
}

impl SolutionReport {
    pub fn new(sol: &SheetSolution, tolerance: f64, seed: u64) -> Self {
        SolutionReport {
            sheet: sol.sheet.to_string(),
            dim: sol.x.nrows(),
            x: matrix_pairs(&sol.x),
            h1: matrix_pairs(&sol.h1),
            certificate: CertificateDto::from(&sol.certificate),
            iterations: sol.iterations,
            final_residual: sol.final_residual,
            quadrature_error: sol.quadrature_error,
            step_ratios: sol.step_ratios.clone(),
            uncertified: sol.uncertified,
            omega: sol.omega.as_ref().map(matrix_pairs),
            tolerance,
            seed,
        }
    }
}

#[derive(Serialize)]
pub struct CheckDto {
    pub name: String,
    pub pass: bool,
    pub applicable: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub note: String,
}

#[derive(Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub primary_sheet: String,
    pub seed: u64,
    pub checks: Vec<CheckDto>,
}

impl VerifyReport {
    pub fn new(report: &VerificationReport) -> Self {
        VerifyReport {
            pass: report.all_pass(),
            primary_sheet: report.primary_sheet.clone(),
            seed: report.seed,
            checks: report
                .checks
                .iter()
                .map(|c| CheckDto {
                    name: c.name.clone(),
                    pass: c.pass,
                    applicable: c.applicable,
                    measured: c.measured,
                    tolerance: c.tolerance,
                    note: c.note.clone(),
                })
                .collect(),
        }
    }
}

/// CSV lines for a classified spectrum: `re,im,alg_mult,geo_mult,class,branch`.
pub fn spectrum_csv(spectrum: &[ClassifiedEigenvalue]) -> String {
    let mut out = String::from("re,im,alg_mult,geo_mult,class,branch\n");
    for e in spectrum {
        let branch = e.branch.map(|b| b.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.value.re,
            e.value.im,
            e.algebraic_multiplicity,
            e.geometric_multiplicity,
            e.class.as_str(),
            branch
        ));
    }
    out
}

/// Structured error for the error stream.
#[derive(Serialize)]
pub struct ErrorReport<'a> {
    pub kind: &'a str,
    pub message: String,
}

pub fn emit_error(kind: &str, message: impl Into<String>) {
    let payload = serde_json::json!({ "error": ErrorReport { kind, message: message.into() } });
    eprintln!("{payload}");
}
