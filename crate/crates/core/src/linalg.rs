//! Dense complex linear algebra shared across the crate.
//!
//! Everything is sized for desk-scale operators (n ≲ 50): spectral norms
//! and ranks go through full SVD, Hermitian eigenproblems through
//! tridiagonalization, and general complex spectra through the Schur form.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("eigensolver failed to converge")]
    EigensolverFailure,
    #[error("matrix is singular or near-singular")]
    Singular,
}

pub fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Spectral 2-norm (largest singular value).
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].norm();
    }
    let svd = nalgebra::SVD::new(m.clone(), false, false);
    svd.singular_values.max()
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues with
/// matching orthonormal eigenvector columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 1 {
        return (vec![m[(0, 0)].re], CMatrix::identity(1, 1));
    }
    let se = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &se.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Eigenvalues of a general complex matrix via the Schur form.
pub fn complex_eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>, LinalgError> {
    let n = m.nrows();
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = m
        .clone()
        .try_schur(1.0e-14, 100_000)
        .ok_or(LinalgError::EigensolverFailure)?;
    let vals = schur.eigenvalues().ok_or(LinalgError::EigensolverFailure)?;
    Ok(vals.iter().copied().collect())
}

/// Matrix inverse through LU, `None` when the factorization breaks down.
pub fn lu_inverse(m: &CMatrix) -> Option<CMatrix> {
    m.clone().lu().try_inverse()
}

/// Solves `m x = rhs` column-wise through LU.
pub fn lu_solve(m: &CMatrix, rhs: &CMatrix) -> Option<CMatrix> {
    m.clone().lu().solve(rhs)
}

/// Solves `x m = lhs`, i.e. right division `lhs · m⁻¹`.
pub fn lu_solve_right(lhs: &CMatrix, m: &CMatrix) -> Option<CMatrix> {
    m.transpose()
        .lu()
        .solve(&lhs.transpose())
        .map(|x| x.transpose())
}

/// Numerical rank at a relative singular-value threshold.
pub fn rank(m: &CMatrix, rel_tol: f64) -> usize {
    let svd = nalgebra::SVD::new(m.clone(), false, false);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&s| s > rel_tol * smax)
        .count()
}

/// Orthonormal basis of the (numerical) nullspace, as matrix columns.
pub fn nullspace(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let svd = nalgebra::SVD::new(m.clone(), false, true);
    let vt = svd.v_t.expect("requested v_t");
    let smax = svd.singular_values.max().max(f64::MIN_POSITIVE);
    let mut cols = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= rel_tol * smax {
            cols.push(vt.row(i).adjoint());
        }
    }
    // rows of v_t beyond the singular-value count span the trailing nullspace
    for i in svd.singular_values.len()..vt.nrows() {
        cols.push(vt.row(i).adjoint());
    }
    let n = m.ncols();
    let mut out = CMatrix::zeros(n, cols.len());
    for (k, c) in cols.iter().enumerate() {
        out.set_column(k, c);
    }
    out
}

/// log|det| and the accumulated argument of det, via LU. The argument is
/// only defined modulo 2π; callers tracking winding must unwrap it.
pub fn log_det(m: &CMatrix) -> Option<(f64, f64)> {
    let lu = m.clone().lu();
    let (p, _l, u) = lu.unpack();
    let mut log_abs = 0.0;
    let mut arg = if p.determinant::<Complex64>().re < 0.0 {
        std::f64::consts::PI
    } else {
        0.0
    };
    for i in 0..m.nrows() {
        let d = u[(i, i)];
        if d == Complex64::ZERO {
            return None;
        }
        log_abs += d.norm().ln();
        arg += d.arg();
    }
    Some((log_abs, arg))
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_sided = |xs: &[Complex64], ys: &[Complex64]| -> f64 {
        xs.iter()
            .map(|x| {
                ys.iter()
                    .map(|y| (x - y).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    one_sided(a, b).max(one_sided(b, a))
}

/// Max elementwise absolute deviation from Hermitian symmetry.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Identity matrix shorthand.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}
