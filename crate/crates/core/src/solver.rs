//! Contraction solver for the basic equation `X = V₁(A₁+X, Γ)`.
//!
//! Solvability is certified by `𝒱₀(B,Γ) < d₀²(Γ)/4`; the solution then lies
//! in the ball of radius `r_min(Γ) = d₀/2 − √(d₀²/4 − 𝒱₀)` and the Picard
//! map contracts at rate `q = 𝒱₀/(d₀ − r_min)²`. Plain Picard iteration from
//! `X₀ = 0` is the certified path; warm starts inside the uniqueness ball
//! `r < r_max(Γ) = d₀ − √𝒱₀` reach the same fixed point.

use thiserror::Error;

use crate::contour::{contour_variation, separation_d0, Contour, Sheet};
use crate::linalg::{self, CMatrix};
use crate::model::SpectralScenario;
use crate::transfer::{apply_v1_operator, TransferError};

/// Certificate for the solvability condition and the contraction radii.
#[derive(Debug, Clone, Copy)]
pub struct SolvabilityCertificate {
    /// Modified variation `𝒱₀(B,Γ_l)`.
    pub v0: f64,
    /// Separation `d₀(Γ)`.
    pub d0: f64,
    /// Exactly `v0 < d0²/4`.
    pub condition_ok: bool,
    /// `d₀/2 − √(d₀²/4 − 𝒱₀)`; `None` when the condition fails.
    pub r_min: Option<f64>,
    /// `d₀ − √𝒱₀`; `None` when the condition fails.
    pub r_max: Option<f64>,
    /// Contraction rate `q = 𝒱₀/(d₀ − r_min)²`; `None` when the condition fails.
    pub contraction_rate: Option<f64>,
    /// Quadrature error carried by `v0`.
    pub v0_error: f64,
}

impl SolvabilityCertificate {
    /// Direct evaluation of the closed forms from given `v0`, `d0`.
    pub fn from_values(v0: f64, d0: f64) -> Self {
        let condition_ok = v0 < d0 * d0 / 4.0;
        let (r_min, r_max, contraction_rate) = if condition_ok {
            let disc = (d0 * d0 / 4.0 - v0).sqrt();
            let r_min = d0 / 2.0 - disc;
            let r_max = d0 - v0.sqrt();
            let q = v0 / ((d0 - r_min) * (d0 - r_min));
            (Some(r_min), Some(r_max), Some(q))
        } else {
            (None, None, None)
        };
        SolvabilityCertificate {
            v0,
            d0,
            condition_ok,
            r_min,
            r_max,
            contraction_rate,
            v0_error: 0.0,
        }
    }
}

/// Computes the certificate for a scenario/contour pair.
pub fn solvability_report(s: &SpectralScenario, c: &Contour) -> SolvabilityCertificate {
    let variation = contour_variation(s, c);
    let d0 = separation_d0(s, c);
    let mut cert = SolvabilityCertificate::from_values(variation.total, d0.value);
    cert.v0_error = variation.quadrature_error;
    cert
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Solve even when the solvability condition fails (exploratory runs);
    /// recorded in the solution.
    pub allow_uncertified: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-12,
            max_iter: 200,
            allow_uncertified: false,
        }
    }
}

/// A converged sheet solution `X^{(l)}`, `H₁^{(l)} = A₁ + X^{(l)}`.
#[derive(Debug, Clone)]
pub struct SheetSolution {
    pub sheet: Sheet,
    pub x: CMatrix,
    pub h1: CMatrix,
    pub certificate: SolvabilityCertificate,
    pub iterations: usize,
    /// `‖X − V₁(A₁+X,Γ)‖` after convergence.
    pub final_residual: f64,
    /// Observed per-step contraction ratios.
    pub step_ratios: Vec<f64>,
    /// Quadrature error of the final operator application.
    pub quadrature_error: f64,
    /// Set when the solvability condition was overridden.
    pub uncertified: bool,
    /// `Ω^{(l)}`, attached once the factor module has computed it.
    pub omega: Option<CMatrix>,
}

impl SheetSolution {
    /// Attaches the operator `Ω^{(l)}` produced by the factor module.
    pub fn with_omega(mut self, omega: CMatrix) -> Self {
        self.omega = Some(omega);
        self
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("solvability condition failed: v0 = {v0:.6e} ≥ d0²/4 = {quarter:.6e}")]
    ConditionFailed { v0: f64, quarter: f64 },
    #[error("no convergence after {iterations} iterations; last step {last_delta:.3e}")]
    NonConvergence { iterations: usize, last_delta: f64 },
    #[error("certificate violated: {check} measured {measured:.6e} allowed {allowed:.6e}")]
    CertificateViolated {
        check: &'static str,
        measured: f64,
        allowed: f64,
    },
    #[error("empty admissible contour family")]
    EmptyAdmissibleFamily,
    #[error(transparent)]
    Transfer(#[from] TransferError),
}

/// Solves `X = V₁(A₁+X,Γ)` by Picard iteration from `X₀ = 0`, certifying
/// the contraction rate and the ball containment.
pub fn solve_basic_equation(
    s: &SpectralScenario,
    c: &Contour,
    opts: SolveOptions,
) -> Result<SheetSolution, SolveError> {
    let x0 = CMatrix::zeros(s.dim(), s.dim());
    solve_from(s, c, opts, x0, true)
}

/// Solves from an arbitrary start inside the uniqueness ball; ratio and
/// ball certification are skipped since the certificate constants apply to
/// the `X₀ = 0` path.
pub fn solve_with_start(
    s: &SpectralScenario,
    c: &Contour,
    opts: SolveOptions,
    x0: CMatrix,
) -> Result<SheetSolution, SolveError> {
    solve_from(s, c, opts, x0, false)
}

fn solve_from(
    s: &SpectralScenario,
    c: &Contour,
    opts: SolveOptions,
    x0: CMatrix,
    certify: bool,
) -> Result<SheetSolution, SolveError> {
    let certificate = solvability_report(s, c);
    if !certificate.condition_ok && !opts.allow_uncertified {
        return Err(SolveError::ConditionFailed {
            v0: certificate.v0,
            quarter: certificate.d0 * certificate.d0 / 4.0,
        });
    }

    let mut x = x0;
    let mut step_ratios = Vec::new();
    let mut prev_delta: Option<f64> = None;
    let mut converged_at = None;
    let mut last_delta = f64::INFINITY;
    let mut last_error = 0.0;
    for k in 1..=opts.max_iter {
        let y = &s.a1 + &x;
        let img = apply_v1_operator(s, c, &y)?;
        if !img.bound.holds {
            return Err(SolveError::CertificateViolated {
                check: "operator norm bound",
                measured: img.bound.result_norm,
                allowed: img.bound.bound,
            });
        }
        let delta = linalg::spectral_norm(&(&img.value - &x));
        let scale = linalg::spectral_norm(&img.value).max(1.0);
        if let Some(p) = prev_delta {
            if p > 1e-14 * scale {
                step_ratios.push(delta / p);
            }
        }
        prev_delta = Some(delta);
        last_delta = delta;
        last_error = img.quadrature_error;
        x = img.value;
        if delta <= opts.tol * scale {
            converged_at = Some(k);
            break;
        }
    }
    let iterations = converged_at.ok_or(SolveError::NonConvergence {
        iterations: opts.max_iter,
        last_delta,
    })?;

    // fixed-point residual with a fresh application
    let final_img = apply_v1_operator(s, c, &(&s.a1 + &x))?;
    let final_residual = linalg::spectral_norm(&(&final_img.value - &x));
    let x_norm = linalg::spectral_norm(&x);

    if certify && certificate.condition_ok {
        let q = certificate.contraction_rate.unwrap();
        let allowed = q + 0.05;
        for (i, &r) in step_ratios.iter().enumerate() {
            // ratios measured at the convergence floor are noise
            let informative = i + 2 < iterations;
            if informative && r > allowed {
                return Err(SolveError::CertificateViolated {
                    check: "per-step contraction ratio",
                    measured: r,
                    allowed,
                });
            }
        }
        let r_min = certificate.r_min.unwrap();
        if x_norm > r_min + 10.0 * opts.tol {
            return Err(SolveError::CertificateViolated {
                check: "ball containment ‖X‖ ≤ r_min",
                measured: x_norm,
                allowed: r_min + 10.0 * opts.tol,
            });
        }
        let residual_allowed = (opts.tol * x_norm.max(1.0)).max(10.0 * last_error);
        if final_residual > residual_allowed {
            return Err(SolveError::CertificateViolated {
                check: "fixed-point residual",
                measured: final_residual,
                allowed: residual_allowed,
            });
        }
    }

    let h1 = &s.a1 + &x;
    Ok(SheetSolution {
        sheet: c.sheet.clone(),
        x,
        h1,
        certificate,
        iterations,
        final_residual,
        step_ratios,
        quadrature_error: final_img.quadrature_error,
        uncertified: !certificate.condition_ok,
        omega: None,
    })
}

/// Upper bound on `r₀(B)` over a contour family: the least `r_min(Γ)` among
/// admissible members.
#[derive(Debug, Clone, Copy)]
pub struct R0Estimate {
    pub r0_upper: f64,
    pub best_index: usize,
    pub admissible: usize,
}

pub fn estimate_r0(s: &SpectralScenario, family: &[Contour]) -> Result<R0Estimate, SolveError> {
    let mut best: Option<(f64, usize)> = None;
    let mut admissible = 0;
    for (i, c) in family.iter().enumerate() {
        let cert = solvability_report(s, c);
        if let Some(r_min) = cert.r_min {
            admissible += 1;
            if best.is_none_or(|(r, _)| r_min < r) {
                best = Some((r_min, i));
            }
        }
    }
    let (r0_upper, best_index) = best.ok_or(SolveError::EmptyAdmissibleFamily)?;
    Ok(R0Estimate {
        r0_upper,
        best_index,
        admissible,
    })
}
