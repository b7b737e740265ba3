//! Factorization of the continued transfer function:
//! `M₁(z,Γ_l) = W₁(z,Γ_l)·(H₁^{(l)} − z)` with
//! `W₁(z,Γ_l) = I − ∫ K_B(dμ)(μ−z)⁻¹(H₁^{(l)}−μ)⁻¹`, the operator
//! `Ω^{(l)} = ∫ (H₁^{(−l)*}−μ)⁻¹ K_B(dμ) (H₁^{(l)}−μ)⁻¹`, and the moment
//! functionals `−(2πi)⁻¹∮ zᵏ [M₁(z,Γ_l)]⁻¹ dz`, k = 0, 1.

use num_complex::Complex64;
use thiserror::Error;

use crate::contour::{distance_to_integration_set, Contour, Sheet};
use crate::linalg::{self, CMatrix};
use crate::model::SpectralScenario;
use crate::solver::SheetSolution;
use crate::transfer::{eval_m1_sheet, TransferError};

/// Condition-number cap on `M₁(z)` at moment-quadrature nodes.
pub const CONDITION_CAP: f64 = 1e12;

#[derive(Debug, Error)]
pub enum FactorError {
    #[error("evaluation point within {distance:.3e} of the integration set")]
    OnIntegrationSet { distance: f64 },
    #[error("resolvent solve failed at μ = {mu} (spectral collision with the set)")]
    SolveFailure { mu: Complex64 },
    #[error("the two sheet solutions are not on opposite sheets")]
    SheetMismatch,
    #[error("contour sheet does not match the solution sheet")]
    ContourMismatch,
    #[error("M₁ is near-singular on the moment contour at z = {z} (cond ≈ {cond:.3e})")]
    NearSingularNode { z: Complex64, cond: f64 },
    #[error("moment circle {index} invalid: {reason}")]
    BadCircle { index: usize, reason: String },
    #[error("eigenvalue {value} of H₁ is not enclosed by exactly one moment circle")]
    UncoveredEigenvalue { value: Complex64 },
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// `W₁(z,Γ_l)` together with the factorization residual at `z`.
#[derive(Debug, Clone)]
pub struct FactorizationReport {
    pub z: Complex64,
    pub w1: CMatrix,
    /// `‖M₁(z,Γ) − W₁(z,Γ)(H₁−z)‖`.
    pub residual: f64,
    /// `‖W₁⁻¹‖`, computed when `dist(z,σ(A₁)) ≤ d₀/2`.
    pub w1_inverse_norm: Option<f64>,
    /// The theorem bound `(1 − 𝒱₀/(d₀²/4))⁻¹`.
    pub inverse_bound: f64,
    pub quadrature_error: f64,
}

/// Evaluates `W₁` at `z` and checks the factorization against `M₁(z,Γ)`.
pub fn eval_w1(
    s: &SpectralScenario,
    c: &Contour,
    sol: &SheetSolution,
    z: Complex64,
) -> Result<FactorizationReport, FactorError> {
    if sol.sheet != c.sheet {
        return Err(FactorError::ContourMismatch);
    }
    let dist = distance_to_integration_set(s, c, z);
    if dist <= 1e-12 {
        return Err(FactorError::OnIntegrationSet { distance: dist });
    }
    let n = s.dim();
    let id = linalg::identity(n);
    let h = &sol.h1;

    let sum_over = |nodes: &[crate::contour::ContourNode]| -> Result<CMatrix, FactorError> {
        let mut acc = CMatrix::zeros(n, n);
        for node in nodes {
            let shifted = h - &id * node.mu;
            let r =
                linalg::lu_solve(&shifted, &id).ok_or(FactorError::SolveFailure { mu: node.mu })?;
            let f = node.weight / (node.mu - z);
            acc += (&node.kprime * r).map(|x| x * f);
        }
        Ok(acc)
    };
    let mut atoms = CMatrix::zeros(n, n);
    for atom in &s.atoms {
        let mu = Complex64::from(atom.position);
        let shifted = h - &id * mu;
        let r = linalg::lu_solve(&shifted, &id).ok_or(FactorError::SolveFailure { mu })?;
        atoms += (&atom.weight * r).map(|x| x / (mu - z));
    }
    let fine = sum_over(c.nodes())?;
    let coarse = sum_over(c.nodes_coarse())?;
    let h_reach = h.diagonal().iter().map(|d| d.norm()).fold(0.0f64, f64::max);
    let tail = c.tail_factor2(z.re.abs(), h_reach);
    let quadrature_error = linalg::spectral_norm(&(&fine - &coarse)) + tail;

    let w1 = &id - &atoms - &fine;
    let m1 = eval_m1_sheet(s, c, z)?;
    let residual = linalg::spectral_norm(&(&m1.value - &w1 * (h - &id * z)));

    let spectrum = s.a1_spectrum();
    let dist_a1 = spectrum
        .values
        .iter()
        .map(|&ev| (z - Complex64::from(ev)).norm())
        .fold(f64::INFINITY, f64::min);
    let cert = &sol.certificate;
    let quarter = cert.d0 * cert.d0 / 4.0;
    let inverse_bound = if cert.v0 < quarter {
        1.0 / (1.0 - cert.v0 / quarter)
    } else {
        f64::INFINITY
    };
    let w1_inverse_norm = if dist_a1 <= cert.d0 / 2.0 {
        linalg::lu_inverse(&w1).map(|inv| linalg::spectral_norm(&inv))
    } else {
        None
    };

    Ok(FactorizationReport {
        z,
        w1,
        residual,
        w1_inverse_norm,
        inverse_bound,
        quadrature_error: quadrature_error + m1.quadrature_error,
    })
}

/// `Ω^{(l)}` with the norm bound from the factorization theorem.
#[derive(Debug, Clone)]
pub struct OmegaReport {
    pub omega: CMatrix,
    pub norm: f64,
    /// `𝒱₀(B,Γ_l)/(d₀/2)²`; the theorem keeps `‖Ω‖` strictly below it and 1.
    pub bound: f64,
    pub bound_holds: bool,
    pub quadrature_error: f64,
}

/// Computes `Ω^{(l)}` by quadrature over the contour of `sol_l`.
pub fn compute_omega(
    s: &SpectralScenario,
    c: &Contour,
    sol_l: &SheetSolution,
    sol_minus_l: &SheetSolution,
) -> Result<OmegaReport, FactorError> {
    if sol_l.sheet != c.sheet {
        return Err(FactorError::ContourMismatch);
    }
    let opposite = match (&sol_l.sheet, &sol_minus_l.sheet) {
        (Sheet::Physical, Sheet::Physical) => true,
        (Sheet::Unphysical(a), Sheet::Unphysical(b)) => a.flipped() == *b,
        _ => false,
    };
    if !opposite {
        return Err(FactorError::SheetMismatch);
    }

    let n = s.dim();
    let id = linalg::identity(n);
    let left_op = sol_minus_l.h1.adjoint();
    let right_op = &sol_l.h1;

    let term_at =
        |mu: Complex64, weight_matrix: &CMatrix, w: Complex64| -> Result<CMatrix, FactorError> {
            let left = linalg::lu_solve(&(&left_op - &id * mu), weight_matrix)
                .ok_or(FactorError::SolveFailure { mu })?;
            let prod = linalg::lu_solve_right(&left, &(right_op - &id * mu))
                .ok_or(FactorError::SolveFailure { mu })?;
            Ok(prod.map(|x| x * w))
        };

    let mut total = CMatrix::zeros(n, n);
    for atom in &s.atoms {
        total += term_at(
            Complex64::from(atom.position),
            &atom.weight,
            Complex64::from(1.0),
        )?;
    }
    let mut fine = CMatrix::zeros(n, n);
    for node in c.nodes() {
        fine += term_at(node.mu, &node.kprime, node.weight)?;
    }
    let mut coarse = CMatrix::zeros(n, n);
    for node in c.nodes_coarse() {
        coarse += term_at(node.mu, &node.kprime, node.weight)?;
    }
    let h_reach = right_op
        .diagonal()
        .iter()
        .map(|d| d.norm())
        .fold(0.0f64, f64::max);
    let tail = c.tail_factor2(h_reach, h_reach);
    let quadrature_error = linalg::spectral_norm(&(&fine - &coarse)) + tail;
    total += fine;

    let norm = linalg::spectral_norm(&total);
    let cert = &sol_l.certificate;
    let bound = cert.v0 / ((cert.d0 / 2.0) * (cert.d0 / 2.0));
    Ok(OmegaReport {
        omega: total,
        norm,
        bound,
        bound_holds: norm < bound && norm < 1.0,
        quadrature_error,
    })
}

/// A circle of the moment contour `γ`.
#[derive(Debug, Clone, Copy)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

impl Circle {
    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

/// Builds the moment contour: one circle per eigenvalue cluster of
/// `H₁^{(l)}`, inflated to the largest radius that keeps each circle inside
/// `𝒪_{d₀/2}(A₁)`, clear of the integration set, and disjoint from the
/// other circles.
pub fn auto_moment_circles(
    s: &SpectralScenario,
    c: &Contour,
    sol: &SheetSolution,
) -> Result<Vec<Circle>, FactorError> {
    let eigs = linalg::complex_eigenvalues(&sol.h1)?;
    let scale = linalg::spectral_norm(&sol.h1).max(1.0);
    let d0 = sol.certificate.d0;

    let merge_dist = (d0 / 8.0).max(1e-8 * scale);
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for ev in eigs {
        let mut joined = false;
        for cl in clusters.iter_mut() {
            if cl.iter().any(|e| (*e - ev).norm() <= merge_dist) {
                cl.push(ev);
                joined = true;
                break;
            }
        }
        if !joined {
            clusters.push(vec![ev]);
        }
    }

    let spectrum = s.a1_spectrum();
    let centers: Vec<Complex64> = clusters
        .iter()
        .map(|cl| cl.iter().sum::<Complex64>() / cl.len() as f64)
        .collect();
    let mut circles = Vec::with_capacity(clusters.len());
    for (i, cl) in clusters.iter().enumerate() {
        let center = centers[i];
        let spread = cl
            .iter()
            .map(|e| (*e - center).norm())
            .fold(0.0f64, f64::max);
        let dist_a1 = spectrum
            .values
            .iter()
            .map(|&ev| (center - Complex64::from(ev)).norm())
            .fold(f64::INFINITY, f64::min);
        let dist_set = distance_to_integration_set(s, c, center);
        let dist_others = centers
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, other)| (center - other).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = 0.95
            * (d0 / 2.0 - dist_a1)
                .min(dist_set - c.rule.pole_margin)
                .min(dist_others / 2.0);
        // negated so a NaN radius is rejected as well
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(radius > spread + 1e-10 * scale) {
            return Err(FactorError::BadCircle {
                index: i,
                reason: format!(
                    "cluster radius {spread:.3e} does not fit the admissible radius {radius:.3e}"
                ),
            });
        }
        circles.push(Circle { center, radius });
    }
    Ok(circles)
}

/// The two contour moments of `[M₁(·,Γ_l)]⁻¹`.
#[derive(Debug, Clone)]
pub struct MomentReport {
    /// `−(2πi)⁻¹ ∮ [M₁]⁻¹ dz`.
    pub p0: CMatrix,
    /// `−(2πi)⁻¹ ∮ z·[M₁]⁻¹ dz`.
    pub p1: CMatrix,
    pub quadrature_error: f64,
    pub circles: Vec<Circle>,
}

/// Trapezoidal contour quadrature of the inverse transfer function over
/// circles enclosing `σ(H₁^{(l)})` inside `𝒪_{d₀/2}(A₁)`.
pub fn moment_functionals(
    s: &SpectralScenario,
    c: &Contour,
    sol: &SheetSolution,
    circles: &[Circle],
    nodes_per_circle: usize,
) -> Result<MomentReport, FactorError> {
    if sol.sheet != c.sheet {
        return Err(FactorError::ContourMismatch);
    }
    let n = s.dim();
    let m = nodes_per_circle.max(8);
    let spectrum = s.a1_spectrum();
    let d0 = sol.certificate.d0;

    let eigs = linalg::complex_eigenvalues(&sol.h1)?;
    for ev in &eigs {
        let covering = circles.iter().filter(|ci| ci.contains(*ev)).count();
        if covering != 1 {
            return Err(FactorError::UncoveredEigenvalue { value: *ev });
        }
    }
    for (i, circle) in circles.iter().enumerate() {
        let dist_a1 = spectrum
            .values
            .iter()
            .map(|&ev| (circle.center - Complex64::from(ev)).norm())
            .fold(f64::INFINITY, f64::min);
        if dist_a1 + circle.radius > d0 / 2.0 + 1e-9 {
            return Err(FactorError::BadCircle {
                index: i,
                reason: "circle leaves the d0/2-vicinity of σ(A₁)".into(),
            });
        }
        let dist_set = distance_to_integration_set(s, c, circle.center);
        if dist_set <= circle.radius {
            return Err(FactorError::BadCircle {
                index: i,
                reason: "circle meets the integration set".into(),
            });
        }
    }

    let mut p0 = CMatrix::zeros(n, n);
    let mut p1 = CMatrix::zeros(n, n);
    let mut p0_half = CMatrix::zeros(n, n);
    let mut p1_half = CMatrix::zeros(n, n);
    let mut node_error = 0.0f64;
    let id = linalg::identity(n);
    for circle in circles {
        for k in 0..m {
            let theta = std::f64::consts::TAU * k as f64 / m as f64;
            let phase = Complex64::from_polar(1.0, theta);
            let z = circle.center + phase * circle.radius;
            let m1 = eval_m1_sheet(s, c, z)?;
            let inv = linalg::lu_solve(&m1.value, &id).ok_or(FactorError::NearSingularNode {
                z,
                cond: f64::INFINITY,
            })?;
            let inv_norm = linalg::spectral_norm(&inv);
            let cond = inv_norm * linalg::spectral_norm(&m1.value);
            if cond > CONDITION_CAP {
                return Err(FactorError::NearSingularNode { z, cond });
            }
            node_error = node_error.max(circle.radius * inv_norm * inv_norm * m1.quadrature_error);
            let scaled = inv.map(|x| x * (phase * circle.radius / m as f64));
            p0 -= &scaled;
            p1 -= &scaled.map(|x| x * z);
            if k % 2 == 0 {
                let scaled2 = scaled.map(|x| x * 2.0);
                p0_half -= &scaled2;
                p1_half -= &scaled2.map(|x| x * z);
            }
        }
    }
    let trap_error =
        linalg::spectral_norm(&(&p0 - &p0_half)).max(linalg::spectral_norm(&(&p1 - &p1_half)));
    Ok(MomentReport {
        p0,
        p1,
        quadrature_error: trap_error + node_error,
        circles: circles.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{
        build_contour, physical_contour, reflect_contour, PathSpec, QuadratureRule, SheetIndex,
    };
    use crate::fixtures;
    use crate::linalg::cplx;
    use crate::solver::{solve_basic_equation, SolveOptions};

    fn l1_setup() -> (
        SpectralScenario,
        Contour,
        SheetSolution,
        Contour,
        SheetSolution,
    ) {
        let s = fixtures::scenario_l1();
        let rule = QuadratureRule::default();
        let c = build_contour(&s, SheetIndex::all_minus(1), &[PathSpec::depth(0.5)], rule).unwrap();
        let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
        let cr = reflect_contour(&s, &c).unwrap();
        let solr = solve_basic_equation(&s, &cr, SolveOptions::default()).unwrap();
        (s, c, sol, cr, solr)
    }

    #[test]
    fn zero_coupling_w1_is_identity() {
        let s = fixtures::zero_coupling();
        let c = physical_contour(&s, QuadratureRule::default()).unwrap();
        let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
        let rep = eval_w1(&s, &c, &sol, cplx(0.0, 2.0)).unwrap();
        assert!((rep.w1 - linalg::identity(2)).norm() < 1e-14);
        assert!(rep.residual < 1e-14);
    }

    #[test]
    fn l1_w1_matches_scalar_division() {
        let (s, c, sol, _, _) = l1_setup();
        let z = cplx(0.1, 0.0);
        let rep = eval_w1(&s, &c, &sol, z).unwrap();
        let m1 = eval_m1_sheet(&s, &c, z).unwrap();
        let w1_div = m1.value[(0, 0)] / (sol.h1[(0, 0)] - z);
        assert!(
            (rep.w1[(0, 0)] - w1_div).norm() < 1e-9,
            "{} vs {}",
            rep.w1[(0, 0)],
            w1_div
        );
        assert!(rep.residual < 1e-9);
    }

    #[test]
    fn l1_w1_inverse_bound_on_the_rim() {
        let (s, c, sol, _, _) = l1_setup();
        let d0 = sol.certificate.d0;
        let z = cplx(0.0, 1.0) * (d0 / 2.0);
        let rep = eval_w1(&s, &c, &sol, z).unwrap();
        let inv_norm = rep.w1_inverse_norm.expect("inside the d0/2 vicinity");
        assert!(
            inv_norm <= rep.inverse_bound + 1e-9,
            "{} vs {}",
            inv_norm,
            rep.inverse_bound
        );
    }

    #[test]
    fn l1_omega_closed_form() {
        let (s, c, sol, _, solr) = l1_setup();
        let rep = compute_omega(&s, &c, &sol, &solr).unwrap();
        // κ/(h+i)² with h = i(−1+√0.8)/2, frozen from the residue calculus
        let expected = cplx(-0.05572809000084122, 0.0);
        assert!(
            (rep.omega[(0, 0)] - expected).norm() < 1e-9,
            "{} vs {}",
            rep.omega[(0, 0)],
            expected
        );
        assert!(rep.bound_holds);
    }

    #[test]
    fn omega_adjoint_relation() {
        let (s, c, sol, cr, solr) = l1_setup();
        let om_l = compute_omega(&s, &c, &sol, &solr).unwrap();
        let om_ml = compute_omega(&s, &cr, &solr, &sol).unwrap();
        let diff = (&om_ml.omega - om_l.omega.adjoint()).norm();
        assert!(diff <= 10.0 * (om_l.quadrature_error + om_ml.quadrature_error) + 1e-12);
    }

    #[test]
    fn zero_coupling_moments_are_resolvent_moments() {
        let s = fixtures::zero_coupling();
        let c = physical_contour(&s, QuadratureRule::default()).unwrap();
        let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
        let circles = auto_moment_circles(&s, &c, &sol).unwrap();
        let rep = moment_functionals(&s, &c, &sol, &circles, 256).unwrap();
        assert!((&rep.p0 - linalg::identity(2)).norm() < 1e-10);
        assert!((&rep.p1 - &s.a1).norm() < 1e-10);
    }

    #[test]
    fn l1_moment_identities() {
        let (s, c, sol, _, solr) = l1_setup();
        let om = compute_omega(&s, &c, &sol, &solr).unwrap();
        let circles = auto_moment_circles(&s, &c, &sol).unwrap();
        let rep = moment_functionals(&s, &c, &sol, &circles, 256).unwrap();
        let one_plus = linalg::identity(1) + &om.omega;
        let p0_expected = linalg::lu_inverse(&one_plus).unwrap();
        assert!(
            (&rep.p0 - &p0_expected).norm() < 1e-8,
            "P0 {} vs (1+Ω)⁻¹ {}",
            rep.p0[(0, 0)],
            p0_expected[(0, 0)]
        );
        // frozen closed forms
        assert!((rep.p0[(0, 0)] - cplx(1.0590169943749475, 0.0)).norm() < 1e-8);
        assert!((rep.p1[(0, 0)] - cplx(0.0, -0.05590169943749475)).norm() < 1e-8);
        let p1_left = &p0_expected * solr.h1.adjoint();
        let p1_right = &sol.h1 * &p0_expected;
        assert!((&rep.p1 - &p1_left).norm() < 1e-8);
        assert!((&rep.p1 - &p1_right).norm() < 1e-8);
    }

    #[test]
    fn moment_identities_3x3_two_sheets() {
        let s = fixtures::gap_3x3();
        let rule = QuadratureRule::default();
        let geom = fixtures::default_geometry(&s, 1.0);
        let c = build_contour(&s, SheetIndex::all_minus(2), &geom, rule).unwrap();
        let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
        let cr = reflect_contour(&s, &c).unwrap();
        let solr = solve_basic_equation(&s, &cr, SolveOptions::default()).unwrap();
        let circles = auto_moment_circles(&s, &c, &sol).unwrap();
        let rep = moment_functionals(&s, &c, &sol, &circles, 256).unwrap();
        // P1·P0⁻¹ = H₁^{(l)} and P0⁻¹·P1 = H₁^{(−l)*}
        let p0_inv = linalg::lu_inverse(&rep.p0).unwrap();
        let left = &rep.p1 * &p0_inv;
        let right = &p0_inv * &rep.p1;
        assert!(
            (&left - &sol.h1).norm() < 1e-8,
            "err {}",
            (&left - &sol.h1).norm()
        );
        let target = solr.h1.adjoint();
        assert!(
            (&right - &target).norm() < 1e-8,
            "err {}",
            (&right - &target).norm()
        );
    }
}
