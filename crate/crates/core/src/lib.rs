//! Resonances and spectral decompositions of 2×2 self-adjoint operator
//! matrices, computed by analytic continuation of the transfer function
//! across the absolutely continuous spectrum of the diagonal entry.
//!
//! The library works with a finite Hermitian entry `A₁` coupled to a
//! measure `K_B(dμ)` made of discrete atoms plus analytic densities on
//! open intervals. The continued transfer function
//! `M₁(z,Γ) = A₁ − z + V₁(z,Γ)` is evaluated by contour quadrature on
//! deformed integration paths, and the non-linear operator equation
//! `X = V₁(A₁+X,Γ)` is solved by certified contraction iteration. The
//! solutions `H₁ = A₁ + X` reproduce the spectrum of `M₁(·,Γ)` near
//! `σ(A₁)`, including resonances on the neighboring unphysical sheets.
//!
//! Module map:
//! - [`model`] — scenario data: `A₁`, atoms, branches, analytic densities
//! - [`contour`] — sheet indices, deformed paths, quadrature, variation
//! - [`transfer`] — `V₁(z,Γ)`, `M₁(z,Γ)`, and the operator map `V₁(Y,Γ)`
//! - [`solver`] — solvability certificates and the contraction solver
//! - [`factor`] — the factor `W₁`, the operator `Ω`, moment functionals
//! - [`spectral`] — eigenvalue classification, zero census, projections
//! - [`oracle`] — independent finite discretization of the full matrix
//! - [`verify`] — the theorem-check matrix run against a scenario
//! - [`fixtures`] — canonical scenarios used in tests and examples

pub mod contour;
pub mod factor;
pub mod fixtures;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod solver;
pub mod spectral;
pub mod transfer;
pub mod verify;

pub use linalg::{CMatrix, CVector};
