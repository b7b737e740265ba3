//! Independent ground truth: a finite Hermitian discretization of the full
//! 2×2 matrix, built from quadrature nodes on the real branches and exact
//! atoms. Its spectrum is computed by Hermitian eigensolves or inertia
//! bisection on the arrowhead structure — no contour deformation, no
//! fixed-point iteration — so it can referee the sheet solutions.

use num_complex::Complex64;
use thiserror::Error;

use crate::contour::{physical_contour, QuadratureRule};
use crate::linalg::{self, CMatrix, CVector};
use crate::model::{ModelError, SpectralScenario};

/// Eigenvalue floor for retaining a rank direction of a node weight.
pub const RANK_FLOOR: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("scenario is invalid: {0:?}")]
    InvalidScenario(Vec<ModelError>),
    #[error("discretization needs N ≥ 16, got {0}")]
    TooCoarse(usize),
    #[error("node weight at μ = {mu} is indefinite: min eigenvalue {min_eig:.3e}")]
    IndefiniteNode { mu: f64, min_eig: f64 },
    #[error("resolvent blow-up at node μ = {mu}: coupling {coupling:.3e} not annihilated")]
    ResolventBlowup { mu: f64, coupling: f64 },
    #[error("contour machinery failed during discretization: {0}")]
    Contour(String),
    #[error("full matrix too large for a dense eigensolve ({0} rows)")]
    TooLarge(usize),
}

/// The discretized full matrix in arrowhead form: diagonal `A₀` block of
/// node/atom positions, coupling columns `b_q` with `Σ b_q b_q*` matching
/// the measure, and the original `A₁` block.
#[derive(Debug, Clone)]
pub struct DiscretizedH {
    /// Diagonal of the discretized `A₀` block (positions, repeated per rank).
    pub a0_diag: Vec<f64>,
    /// `B₁₀`, one column per retained rank direction (n × n₀).
    pub b10: CMatrix,
    pub a1: CMatrix,
    pub nodes_per_branch: Vec<usize>,
    /// Discretization error estimate for the induced `V₁` (Richardson).
    pub est_error: f64,
    /// Variation of the discretized measure: `Σ_s ‖K_s‖ + Σ_q ‖W_q‖`.
    pub variation: f64,
}

/// Discretizes every branch with composite Gauss–Legendre panels of order 2
/// (N nodes per finite branch; graded panels on truncated infinite ones) and
/// factorizes `K′_B(μ_q)·w_q` into PSD rank columns. Atoms append exactly.
pub fn discretize_full(
    s: &SpectralScenario,
    n_per_branch: usize,
) -> Result<DiscretizedH, OracleError> {
    let report = s.validate();
    if !report.is_valid() {
        return Err(OracleError::InvalidScenario(report.errors));
    }
    if n_per_branch < 16 {
        return Err(OracleError::TooCoarse(n_per_branch));
    }
    let (positions, columns, nodes_per_branch, variation) = assemble(s, n_per_branch)?;
    let est_error = estimate_error(s, n_per_branch)?;

    let n = s.dim();
    let n0 = positions.len();
    let mut b10 = CMatrix::zeros(n, n0);
    for (q, col) in columns.iter().enumerate() {
        b10.set_column(q, col);
    }
    Ok(DiscretizedH {
        a0_diag: positions,
        b10,
        a1: s.a1.clone(),
        nodes_per_branch,
        est_error,
        variation,
    })
}

type Assembly = (Vec<f64>, Vec<CVector>, Vec<usize>, f64);

fn assemble(s: &SpectralScenario, n_per_branch: usize) -> Result<Assembly, OracleError> {
    let rule = QuadratureRule {
        order: 2,
        panels: (n_per_branch / 2).max(8),
        ..QuadratureRule::default()
    };
    let grid = physical_contour(s, rule).map_err(|e| OracleError::Contour(e.to_string()))?;

    let mut positions = Vec::new();
    let mut columns: Vec<CVector> = Vec::new();
    let mut nodes_per_branch = vec![0usize; s.num_branches()];
    let mut variation = 0.0;

    let mut push_psd = |mu: f64, weight: &CMatrix| -> Result<(), OracleError> {
        let norm = linalg::spectral_norm(weight);
        let (eigs, vecs) = linalg::hermitian_eigen(weight);
        if let Some(&min_eig) = eigs.first() {
            if min_eig < -1e-12 * norm.max(1e-300) {
                return Err(OracleError::IndefiniteNode { mu, min_eig });
            }
        }
        variation += eigs.iter().fold(0.0f64, |m, &e| m.max(e));
        for (r, &e) in eigs.iter().enumerate() {
            if e > RANK_FLOOR * norm.max(1e-300) {
                let col = vecs.column(r).map(|x| x * Complex64::from(e.sqrt()));
                positions.push(mu);
                columns.push(CVector::from_column_slice(col.as_slice()));
            }
        }
        Ok(())
    };

    for atom in &s.atoms {
        push_psd(atom.position, &atom.weight)?;
    }
    for node in grid.nodes() {
        debug_assert!(node.mu.im == 0.0 && node.weight.im == 0.0 && node.weight.re > 0.0);
        let w = node.kprime.map(|x| x * node.weight.re);
        nodes_per_branch[node.branch] += 1;
        push_psd(node.mu.re, &w)?;
    }
    Ok((positions, columns, nodes_per_branch, variation))
}

/// Richardson error estimate: compare the induced `V₁(z)` against the
/// half-resolution discretization at five test points above the spectrum.
fn estimate_error(s: &SpectralScenario, n_per_branch: usize) -> Result<f64, OracleError> {
    if n_per_branch < 32 {
        return Ok(f64::INFINITY);
    }
    let (pos_f, col_f, _, _) = assemble(s, n_per_branch)?;
    let (pos_c, col_c, _, _) = assemble(s, n_per_branch / 2)?;
    let test_points: Vec<Complex64> = (0..5)
        .map(|k| Complex64::new(0.4 * k as f64 - 0.8, 1.5 + 0.25 * k as f64))
        .collect();
    let v_at = |positions: &[f64], columns: &[CVector], z: Complex64| -> CMatrix {
        let n = s.dim();
        let mut acc = CMatrix::zeros(n, n);
        for (q, col) in columns.iter().enumerate() {
            let f = (z - Complex64::from(positions[q])).inv();
            acc += (col * col.adjoint()).map(|x| x * f);
        }
        acc
    };
    let mut diff = 0.0f64;
    for &z in &test_points {
        let d = linalg::spectral_norm(&(v_at(&pos_f, &col_f, z) - v_at(&pos_c, &col_c, z)));
        diff = diff.max(d);
    }
    // composite order-2 Gauss panels converge at h⁴; the fine-grid error is
    // ≈ diff/15, kept with a safety factor
    Ok(diff / 4.0 + 1e-14)
}

impl DiscretizedH {
    /// Dimension of the discretized `A₀` block.
    pub fn dim0(&self) -> usize {
        self.a0_diag.len()
    }

    pub fn dim(&self) -> usize {
        self.a0_diag.len() + self.a1.nrows()
    }

    /// `‖B₀₁‖²` of the discretized coupling.
    pub fn coupling_norm_sq(&self) -> f64 {
        let s = linalg::spectral_norm(&self.b10);
        s * s
    }

    /// `‖B₀₁‖₂²` (squared Hilbert–Schmidt norm).
    pub fn coupling_hs_sq(&self) -> f64 {
        self.b10.norm_squared()
    }

    /// Dense Hermitian form of the full matrix.
    pub fn full_matrix(&self) -> CMatrix {
        let n0 = self.dim0();
        let n = self.a1.nrows();
        let mut h = CMatrix::zeros(n0 + n, n0 + n);
        for q in 0..n0 {
            h[(q, q)] = Complex64::from(self.a0_diag[q]);
        }
        let b01 = self.b10.adjoint();
        h.view_mut((0, n0), (n0, n)).copy_from(&b01);
        h.view_mut((n0, 0), (n, n0)).copy_from(&self.b10);
        h.view_mut((n0, n0), (n, n)).copy_from(&self.a1);
        h
    }

    /// Structure-exploiting matrix–vector product.
    pub fn apply(&self, v: &CVector) -> CVector {
        let n0 = self.dim0();
        let n = self.a1.nrows();
        let v0 = v.rows(0, n0).into_owned();
        let v1 = v.rows(n0, n).into_owned();
        let mut out = CVector::zeros(n0 + n);
        let top = self.b10.adjoint() * &v1;
        for q in 0..n0 {
            out[q] = Complex64::from(self.a0_diag[q]) * v0[q] + top[q];
        }
        let bottom = &self.b10 * &v0 + &self.a1 * &v1;
        for i in 0..n {
            out[n0 + i] = bottom[i];
        }
        out
    }

    /// Schur complement `A₁ − z − B₁₀(A₀−z)⁻¹B₀₁` of the discretized matrix,
    /// which equals `A₁ − z + Σ_q b_q b_q*/(z − μ_q)`.
    pub fn schur_m1(&self, z: Complex64) -> CMatrix {
        let n = self.a1.nrows();
        let mut acc = &self.a1 - linalg::identity(n) * z;
        for q in 0..self.dim0() {
            let col = self.b10.column(q);
            let f = (z - Complex64::from(self.a0_diag[q])).inv();
            acc += (col * col.adjoint()).map(|x| x * f);
        }
        acc
    }

    /// Number of eigenvalues strictly below `lambda`, by inertia additivity
    /// on the arrowhead split.
    pub fn count_below(&self, lambda: f64) -> usize {
        let scale = self
            .a0_diag
            .iter()
            .fold(linalg::spectral_norm(&self.a1), |m, &p| m.max(p.abs()))
            .max(1.0);
        let mut lam = lambda;
        // nudge off exact node collisions; inertia is undefined on them
        while self
            .a0_diag
            .iter()
            .any(|&p| (p - lam).abs() < 1e-13 * scale)
        {
            lam += 3.0e-13 * scale;
        }
        let mut count = self.a0_diag.iter().filter(|&&p| p < lam).count();
        let schur = self.schur_m1(Complex64::from(lam));
        let (eigs, _) = linalg::hermitian_eigen(&schur);
        count += eigs.iter().filter(|&&e| e < 0.0).count();
        count
    }

    /// All eigenvalues in `(lo, hi)` by inertia bisection, ascending,
    /// repeated per multiplicity.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
        let c_lo = self.count_below(lo);
        let c_hi = self.count_below(hi);
        let mut out = Vec::with_capacity(c_hi.saturating_sub(c_lo));
        for k in c_lo..c_hi {
            let mut a = lo;
            let mut b = hi;
            for _ in 0..200 {
                if b - a <= tol {
                    break;
                }
                let mid = 0.5 * (a + b);
                if self.count_below(mid) <= k {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            out.push(0.5 * (a + b));
        }
        out
    }

    /// Dense Hermitian eigendecomposition, ascending.
    pub fn full_spectrum(&self) -> Result<(Vec<f64>, CMatrix), OracleError> {
        let dim = self.dim();
        if dim > 3000 {
            return Err(OracleError::TooLarge(dim));
        }
        Ok(linalg::hermitian_eigen(&self.full_matrix()))
    }

    /// Lifts a transfer-function eigenvector `ψ₁` at a real eigenvalue to a
    /// full-space eigenvector `Ψ = (ψ₀, ψ₁)` with `ψ₀ = −R₀(λ)B₀₁ψ₁`.
    /// Returns the full vector and the relative residual `‖HΨ−λΨ‖/‖Ψ‖`.
    pub fn lift_eigenvector(
        &self,
        lambda: f64,
        psi1: &CVector,
    ) -> Result<(CVector, f64), OracleError> {
        let n0 = self.dim0();
        let n = self.a1.nrows();
        let coupling = self.b10.adjoint() * psi1;
        let psi_scale = psi1.norm().max(1e-300);
        let scale = self.a0_diag.iter().fold(1.0f64, |m, &p| m.max(p.abs()));
        let mut full = CVector::zeros(n0 + n);
        for q in 0..n0 {
            let c = coupling[q];
            if c.norm() == 0.0 {
                continue;
            }
            let gap = self.a0_diag[q] - lambda;
            if gap.abs() < 1e-8 * scale && c.norm() > 1e-8 * psi_scale {
                return Err(OracleError::ResolventBlowup {
                    mu: self.a0_diag[q],
                    coupling: c.norm(),
                });
            }
            full[q] = -c / Complex64::from(gap);
        }
        for i in 0..n {
            full[n0 + i] = psi1[i];
        }
        let image = self.apply(&full);
        let residual = (&image - &full * Complex64::from(lambda)).norm() / full.norm();
        Ok((full, residual))
    }
}
