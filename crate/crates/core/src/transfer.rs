//! The continued transfer function `M₁(z,Γ_l) = A₁ − z + V₁(z,Γ_l)` and the
//! operator-argument map `Y ↦ V₁(Y,Γ)` that drives the basic equation.
//!
//! `V₁(z,Γ_l) = Σ_s K_s/(z−μ_s) + ∫_{Γ_l} K′_B(μ)/(z−μ) dμ`, evaluated by
//! the contour's composite quadrature. Passing the degenerate contour whose
//! paths equal the real intervals yields the physical-sheet values.

use num_complex::Complex64;
use thiserror::Error;

use crate::contour::{contour_variation, distance_to_integration_set, Contour, Sheet};
use crate::linalg::{self, CMatrix};
use crate::model::SpectralScenario;

/// Minimal distance from an evaluation point to the integration set.
pub const POINT_SEPARATION: f64 = 1e-12;
/// Minimal distance from the spectrum of an operator argument to the set.
pub const SPECTRUM_SEPARATION: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("evaluation point within {distance:.3e} of the integration set")]
    OnIntegrationSet { distance: f64 },
    #[error("spectrum of the operator argument within {distance:.3e} of the integration set")]
    SpectralCollision { distance: f64 },
    #[error("linear solve against (Y − μ) failed at node μ = {mu}")]
    SolveFailure { mu: Complex64 },
    #[error(transparent)]
    Eigensolver(#[from] linalg::LinalgError),
}

/// A transfer-function value with its quadrature error estimate.
#[derive(Debug, Clone)]
pub struct TransferEvaluation {
    pub value: CMatrix,
    pub quadrature_error: f64,
    pub sheet: Sheet,
}

/// `V₁(z,Γ_l)`.
pub fn eval_v1_point(
    s: &SpectralScenario,
    c: &Contour,
    z: Complex64,
) -> Result<TransferEvaluation, TransferError> {
    let dist = distance_to_integration_set(s, c, z);
    if dist <= POINT_SEPARATION {
        return Err(TransferError::OnIntegrationSet { distance: dist });
    }
    let n = s.dim();
    let atom_part = {
        let mut acc = CMatrix::zeros(n, n);
        for atom in &s.atoms {
            let f = (z - Complex64::from(atom.position)).inv();
            acc += atom.weight.map(|k| k * f);
        }
        acc
    };
    let sum_nodes = |nodes: &[crate::contour::ContourNode]| -> CMatrix {
        let mut acc = CMatrix::zeros(n, n);
        for node in nodes {
            let f = node.weight / (z - node.mu);
            acc += node.kprime.map(|k| k * f);
        }
        acc
    };
    let fine = sum_nodes(c.nodes());
    let coarse = sum_nodes(c.nodes_coarse());
    let tail = c.tail_factor(z.re.abs());
    let quadrature_error = linalg::spectral_norm(&(&fine - &coarse)) + tail;
    Ok(TransferEvaluation {
        value: atom_part + fine,
        quadrature_error,
        sheet: c.sheet.clone(),
    })
}

/// `M₁(z,Γ_l) = A₁ − z + V₁(z,Γ_l)`.
pub fn eval_m1_sheet(
    s: &SpectralScenario,
    c: &Contour,
    z: Complex64,
) -> Result<TransferEvaluation, TransferError> {
    let mut ev = eval_v1_point(s, c, z)?;
    ev.value += &s.a1 - CMatrix::identity(s.dim(), s.dim()) * z;
    Ok(ev)
}

/// Norm bound report for an operator-argument application:
/// `‖V₁(Y,Γ)‖ ≤ 𝒱₀(B,Γ)·sup‖(Y−μ)⁻¹‖` over the integration set.
#[derive(Debug, Clone, Copy)]
pub struct BoundReport {
    pub variation: f64,
    pub sup_resolvent: f64,
    pub bound: f64,
    pub result_norm: f64,
    pub holds: bool,
}

/// Result of `V₁(Y,Γ)` for a matrix argument.
#[derive(Debug, Clone)]
pub struct OperatorImage {
    pub value: CMatrix,
    pub quadrature_error: f64,
    pub bound: BoundReport,
}

/// `V₁(Y,Γ) = Σ_s K_s (Y−μ_s)⁻¹ + ∫ K′_B(μ) (Y−μ)⁻¹ dμ` with one dense
/// solve per node. Requires the spectrum of `Y` separated from the set.
pub fn apply_v1_operator(
    s: &SpectralScenario,
    c: &Contour,
    y: &CMatrix,
) -> Result<OperatorImage, TransferError> {
    let n = s.dim();
    let eigs = linalg::complex_eigenvalues(y)?;
    let mut spectral_dist = f64::INFINITY;
    let mut max_re = 0.0f64;
    for ev in &eigs {
        spectral_dist = spectral_dist.min(distance_to_integration_set(s, c, *ev));
        max_re = max_re.max(ev.re.abs());
    }
    if spectral_dist <= SPECTRUM_SEPARATION {
        return Err(TransferError::SpectralCollision {
            distance: spectral_dist,
        });
    }

    let id = linalg::identity(n);
    let mut sup_resolvent = 0.0f64;
    let mut resolvent_at = |mu: Complex64| -> Result<CMatrix, TransferError> {
        let shifted = y - &id * mu;
        let inv = linalg::lu_solve(&shifted, &id).ok_or(TransferError::SolveFailure { mu })?;
        sup_resolvent = sup_resolvent.max(linalg::spectral_norm(&inv));
        Ok(inv)
    };

    let mut atom_part = CMatrix::zeros(n, n);
    for atom in &s.atoms {
        let r = resolvent_at(Complex64::from(atom.position))?;
        atom_part += &atom.weight * r;
    }
    let mut fine = CMatrix::zeros(n, n);
    for node in c.nodes() {
        let r = resolvent_at(node.mu)?;
        fine += (&node.kprime * r).map(|x| x * node.weight);
    }
    let mut coarse = CMatrix::zeros(n, n);
    for node in c.nodes_coarse() {
        let r = resolvent_at(node.mu)?;
        coarse += (&node.kprime * r).map(|x| x * node.weight);
    }

    let variation = contour_variation(s, c).total;
    let tail = c.tail_factor(max_re);
    let quadrature_error = linalg::spectral_norm(&(&fine - &coarse)) + tail;
    let value = atom_part + fine;
    let result_norm = linalg::spectral_norm(&value);
    let bound = variation * sup_resolvent;
    Ok(OperatorImage {
        value,
        quadrature_error,
        bound: BoundReport {
            variation,
            sup_resolvent,
            bound,
            result_norm,
            holds: result_norm <= bound + quadrature_error + 1e-14,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{build_contour, physical_contour, PathSpec, QuadratureRule, SheetIndex};
    use crate::fixtures;
    use crate::linalg::cplx;

    #[test]
    fn zero_coupling_v1_vanishes() {
        let s = fixtures::zero_coupling();
        let c = physical_contour(&s, QuadratureRule::default()).unwrap();
        let ev = eval_v1_point(&s, &c, cplx(0.0, 2.0)).unwrap();
        assert_eq!(ev.value.norm(), 0.0);
        let m1 = eval_m1_sheet(&s, &c, cplx(0.0, 2.0)).unwrap();
        let expected = &s.a1 - crate::linalg::identity(2) * cplx(0.0, 2.0);
        assert!((m1.value - expected).norm() < 1e-15);
    }

    #[test]
    fn polybump_cauchy_transform_closed_form() {
        // κ[(1−z²)·Log((z+1)/(z−1)) + 2z] at z = 2i, physical sheet
        let kappa = 0.02;
        let s = fixtures::polybump_scalar(kappa, 0.0);
        let c = physical_contour(&s, QuadratureRule::default()).unwrap();
        let z = cplx(0.0, 2.0);
        let ev = eval_v1_point(&s, &c, z).unwrap();
        let closed = {
            let one = Complex64::from(1.0);
            kappa * ((one - z * z) * ((z + one) / (z - one)).ln() + 2.0 * z)
        };
        assert!(
            (ev.value[(0, 0)] - closed).norm() < 1e-10,
            "{} vs {}",
            ev.value[(0, 0)],
            closed
        );
    }

    #[test]
    fn l1_physical_value_at_i() {
        let s = fixtures::scenario_l1();
        let c = physical_contour(&s, QuadratureRule::default()).unwrap();
        let z = cplx(0.0, 1.0);
        let ev = eval_v1_point(&s, &c, z).unwrap();
        // κ/(z+i) = 0.05/(2i) = −0.025i
        assert!((ev.value[(0, 0)] - cplx(0.0, -0.025)).norm() < 1e-10);
    }

    #[test]
    fn l1_sheet_value_matches_residue_form() {
        let s = fixtures::scenario_l1();
        let rule = QuadratureRule::default();
        let c = build_contour(&s, SheetIndex::all_minus(1), &[PathSpec::depth(0.5)], rule).unwrap();
        let z = cplx(0.0, -0.2);
        let m1 = eval_m1_sheet(&s, &c, z).unwrap();
        // continued closed form −z + κ/(z+i)
        let closed = -z + 0.05 / (z + cplx(0.0, 1.0));
        assert!(
            (m1.value[(0, 0)] - closed).norm() < 1e-10,
            "{} vs {}",
            m1.value[(0, 0)],
            closed
        );
        // and the residue identity M₁(z,Γ) = M₁(z) + 2πi·l·K′(z)
        let phys = physical_contour(&s, rule).unwrap();
        let m1_phys = eval_m1_sheet(&s, &phys, z).unwrap();
        let kprime = s.branches[0].eval_density(z, 1).unwrap();
        let residue =
            m1_phys.value[(0, 0)] + cplx(0.0, 2.0 * std::f64::consts::PI) * (-1.0) * kprime[(0, 0)];
        assert!((m1.value[(0, 0)] - residue).norm() < 1e-10);
    }

    #[test]
    fn sheet_eval_coincides_with_physical_off_pocket() {
        let s = fixtures::polybump_scalar(0.02, 0.0);
        let rule = QuadratureRule::default();
        let c = build_contour(&s, SheetIndex::all_minus(1), &[PathSpec::depth(0.4)], rule).unwrap();
        let phys = physical_contour(&s, rule).unwrap();
        for z in [cplx(2.0, 1.0), cplx(-0.3, 0.8), cplx(0.1, -1.5)] {
            let a = eval_m1_sheet(&s, &c, z).unwrap();
            let b = eval_m1_sheet(&s, &phys, z).unwrap();
            let tol = (a.quadrature_error + b.quadrature_error).max(1e-12) * 10.0;
            assert!((a.value - b.value).norm() < tol, "z = {z}");
        }
    }

    #[test]
    fn rejects_point_on_contour() {
        let s = fixtures::polybump_scalar(0.02, 0.0);
        let c = physical_contour(&s, QuadratureRule::default()).unwrap();
        let err = eval_v1_point(&s, &c, cplx(0.3, 0.0)).unwrap_err();
        assert!(matches!(err, TransferError::OnIntegrationSet { .. }));
    }

    #[test]
    fn operator_map_scalar_closed_form() {
        // scalar argument Y = [0] on sheet −: continued f(y) = κ/(y+i)
        let s = fixtures::scenario_l1();
        let rule = QuadratureRule::default();
        let c = build_contour(&s, SheetIndex::all_minus(1), &[PathSpec::depth(0.5)], rule).unwrap();
        let y = CMatrix::from_element(1, 1, cplx(0.0, 0.0));
        let img = apply_v1_operator(&s, &c, &y).unwrap();
        assert!((img.value[(0, 0)] - cplx(0.0, -0.05)).norm() < 1e-10);
        assert!(img.bound.holds);
    }

    #[test]
    fn operator_map_zero_coupling() {
        let s = fixtures::zero_coupling();
        let c = physical_contour(&s, QuadratureRule::default()).unwrap();
        let img = apply_v1_operator(&s, &c, &s.a1.clone()).unwrap();
        assert_eq!(img.value.norm(), 0.0);
    }

    #[test]
    fn operator_map_diagonalizes_entrywise() {
        // Y = A₁ diagonal: V₁(A₁) must match eval_v1_point at each eigenvalue
        let s = fixtures::gap_3x3();
        let rule = QuadratureRule::default();
        let geom = fixtures::default_geometry(&s, 1.0);
        let c = build_contour(&s, SheetIndex::all_minus(2), &geom, rule).unwrap();
        let spec = s.a1_spectrum();
        let basis = &spec.vectors;
        let diag = CMatrix::from_diagonal(&crate::CVector::from_iterator(
            3,
            spec.values.iter().map(|&v| cplx(v, 0.0)),
        ));
        let y = basis * &diag * basis.adjoint();
        let img = apply_v1_operator(&s, &c, &y).unwrap();
        // rotate into the eigenbasis and compare column action
        for (k, &ev) in spec.values.iter().enumerate() {
            let point = eval_v1_point(&s, &c, cplx(ev, 0.0)).unwrap();
            let expect = point.value * basis.column(k);
            let got = &img.value * basis.column(k);
            let tol = 10.0 * (img.quadrature_error + point.quadrature_error) + 1e-11;
            assert!((expect - got).norm() < tol, "eigenvalue {ev}");
        }
    }

    #[test]
    fn operator_map_rejects_spectral_collision() {
        let s = fixtures::polybump_scalar(0.02, 0.0);
        let c = physical_contour(&s, QuadratureRule::default()).unwrap();
        // Y with an eigenvalue on the branch interval
        let y = CMatrix::from_element(1, 1, cplx(0.5, 0.0));
        let err = apply_v1_operator(&s, &c, &y).unwrap_err();
        assert!(matches!(err, TransferError::SpectralCollision { .. }));
    }

    #[test]
    fn linearity_in_the_measure() {
        let s = fixtures::gap_3x3();
        let doubled = s.scaled(2.0);
        let rule = QuadratureRule::default();
        let geom = fixtures::default_geometry(&s, 1.0);
        let c1 = build_contour(&s, SheetIndex::all_minus(2), &geom, rule).unwrap();
        let c2 = build_contour(&doubled, SheetIndex::all_minus(2), &geom, rule).unwrap();
        let z = cplx(0.1, 0.7);
        let a = eval_v1_point(&s, &c1, z).unwrap();
        let b = eval_v1_point(&doubled, &c2, z).unwrap();
        assert!((b.value - a.value.map(|x| x * 2.0)).norm() < 1e-13);
    }
}
