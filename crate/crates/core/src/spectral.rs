//! Eigen-analysis of the sheet solutions: resonance extraction and
//! classification, the argument-principle census of `det M₁(·,Γ_l)`,
//! Riesz/cluster projections against the orthogonal projections of `A₁`,
//! and the real-eigenvalue tests (density annihilation, Ω-form positivity,
//! lifted-vector orthonormality).

use num_complex::Complex64;
use thiserror::Error;

use crate::contour::{distance_to_integration_set, region_winding, Contour};
use crate::factor::Circle;
use crate::linalg::{self, CMatrix, CVector};
use crate::model::SpectralScenario;
use crate::oracle::{DiscretizedH, OracleError};
use crate::solver::SheetSolution;
use crate::transfer::{eval_m1_sheet, TransferError};

/// Relative eigenvalue clustering tolerance.
pub const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Eigensolver(#[from] linalg::LinalgError),
    #[error("ambiguous clustering at {value}: expected nullity {expected}, found {found}")]
    AmbiguousClustering {
        value: Complex64,
        expected: usize,
        found: usize,
    },
    #[error("census boundary is invalid: {reason}")]
    CensusBoundary { reason: String },
    #[error("determinant magnitude under the floor at boundary node z = {z}")]
    NearZeroDeterminant { z: Complex64 },
    #[error("winding unresolved after refinement")]
    UnresolvedWinding,
    #[error("separation radius r = {r} does not dominate ‖X‖ = {x_norm}")]
    RadiusTooSmall { r: f64, x_norm: f64 },
    #[error("eigenvalue {value} lies on a projection circle")]
    EigenvalueOnCircle { value: Complex64 },
    #[error("eigenvalue {value} not enclosed by exactly one projection circle")]
    UnclusteredEigenvalue { value: Complex64 },
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Classification of an `H₁^{(l)}` eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenClass {
    /// Real, in the resolvent set of `A₀`.
    RealIsolated,
    /// Real, inside some AC branch interval.
    RealEmbedded,
    /// Non-real: a resonance of the continued transfer function.
    Resonance,
}

impl EigenClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            EigenClass::RealIsolated => "real_isolated",
            EigenClass::RealEmbedded => "real_embedded",
            EigenClass::Resonance => "resonance",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassifiedEigenvalue {
    pub value: Complex64,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
    pub class: EigenClass,
    /// Enclosing branch: the interval containing a real embedded eigenvalue,
    /// or the pocket containing a resonance.
    pub branch: Option<usize>,
    /// Orthonormal basis of the algebraic eigenspace (n × algebraic mult).
    pub root_vectors: CMatrix,
}

/// Dense eigendecomposition of `H₁^{(l)}` with clustering, classification,
/// and root-vector extraction.
pub fn sheet_spectrum(
    s: &SpectralScenario,
    c: &Contour,
    sol: &SheetSolution,
) -> Result<Vec<ClassifiedEigenvalue>, SpectralError> {
    let n = s.dim();
    let scale = linalg::spectral_norm(&sol.h1).max(1.0);
    let tol = CLUSTER_TOL * scale;
    let eigs = linalg::complex_eigenvalues(&sol.h1)?;

    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for ev in eigs {
        let mut joined = false;
        for cl in clusters.iter_mut() {
            if cl.iter().any(|e| (*e - ev).norm() <= tol) {
                cl.push(ev);
                joined = true;
                break;
            }
        }
        if !joined {
            clusters.push(vec![ev]);
        }
    }

    let mut out = Vec::with_capacity(clusters.len());
    let id = linalg::identity(n);
    for cl in clusters {
        let value = cl.iter().sum::<Complex64>() / cl.len() as f64;
        let algebraic = cl.len();
        // nullspace of the cluster product gives the algebraic eigenspace
        let mut product = id.clone();
        for ev in &cl {
            product = &product * (&sol.h1 - &id * *ev);
        }
        let root_vectors = linalg::nullspace(&product, CLUSTER_TOL);
        if root_vectors.ncols() != algebraic {
            return Err(SpectralError::AmbiguousClustering {
                value,
                expected: algebraic,
                found: root_vectors.ncols(),
            });
        }
        let geometric = n - linalg::rank(&(&sol.h1 - &id * value), CLUSTER_TOL);

        let (class, branch) = if value.im.abs() <= tol {
            let x = value.re;
            match s.branches.iter().position(|b| b.interval.contains(x)) {
                Some(k) => (EigenClass::RealEmbedded, Some(k)),
                None => (EigenClass::RealIsolated, None),
            }
        } else {
            let pocket = region_winding(c, value).ok().and_then(|w| w.branch);
            (EigenClass::Resonance, pocket)
        };
        out.push(ClassifiedEigenvalue {
            value,
            algebraic_multiplicity: algebraic,
            geometric_multiplicity: geometric,
            class,
            branch,
            root_vectors,
        });
    }
    out.sort_by(|a, b| {
        (a.value.re, a.value.im)
            .partial_cmp(&(b.value.re, b.value.im))
            .unwrap()
    });
    Ok(out)
}

/// Counts the zeros of `det M₁(·,Γ_l)` inside a circle by the argument
/// principle, with automatic node refinement until every phase step is
/// resolved. Returns the winding number (zeros counted with multiplicity).
pub fn m1_zero_census(
    s: &SpectralScenario,
    c: &Contour,
    boundary: Circle,
    nodes: usize,
) -> Result<i64, SpectralError> {
    let dist = distance_to_integration_set(s, c, boundary.center);
    if dist <= boundary.radius {
        return Err(SpectralError::CensusBoundary {
            reason: "circle meets the integration set".into(),
        });
    }
    let mut m = nodes.max(16);
    for _ in 0..5 {
        match census_pass(s, c, boundary, m)? {
            Some(w) => return Ok(w),
            None => m *= 2,
        }
    }
    Err(SpectralError::UnresolvedWinding)
}

fn census_pass(
    s: &SpectralScenario,
    c: &Contour,
    boundary: Circle,
    m: usize,
) -> Result<Option<i64>, SpectralError> {
    let n = s.dim();
    let mut phases = Vec::with_capacity(m);
    for k in 0..m {
        let theta = std::f64::consts::TAU * k as f64 / m as f64;
        let z = boundary.center + Complex64::from_polar(boundary.radius, theta);
        let m1 = eval_m1_sheet(s, c, z)?;
        let (log_abs, arg) =
            linalg::log_det(&m1.value).ok_or(SpectralError::NearZeroDeterminant { z })?;
        // relative determinant floor: |det| ≥ 1e-14 · (‖M₁‖_F/√n)ⁿ
        let row_scale = (m1.value.norm() / (n as f64).sqrt()).max(1e-300).ln();
        if log_abs - n as f64 * row_scale < (1e-14f64).ln() {
            return Err(SpectralError::NearZeroDeterminant { z });
        }
        phases.push(arg);
    }
    let mut total = 0.0;
    for k in 0..m {
        let next = phases[(k + 1) % m];
        let mut d = next - phases[k];
        while d > std::f64::consts::PI {
            d -= std::f64::consts::TAU;
        }
        while d < -std::f64::consts::PI {
            d += std::f64::consts::TAU;
        }
        if d.abs() > std::f64::consts::FRAC_PI_2 {
            return Ok(None); // unresolved step, refine
        }
        total += d;
    }
    let winding = total / std::f64::consts::TAU;
    if (winding - winding.round()).abs() > 0.25 {
        return Ok(None);
    }
    Ok(Some(winding.round() as i64))
}

/// Riesz projections of `H₁^{(l)}` on the circle system built from the
/// `A₁` clusters, against the orthogonal spectral projections of `A₁`.
#[derive(Debug, Clone)]
pub struct ClusterProjections {
    pub circles: Vec<Circle>,
    /// Riesz projections `Q_i = −(2πi)⁻¹∮(H₁−z)⁻¹dz`.
    pub q: Vec<CMatrix>,
    /// Orthogonal projections `P_i` of `A₁` on the same circles.
    pub p: Vec<CMatrix>,
    pub q_ranks: Vec<usize>,
    pub p_ranks: Vec<usize>,
    pub r: f64,
    /// `max_{i,j} ‖Q_iQ_j − δ_{ij}Q_i‖`.
    pub idempotency_defect: f64,
    /// `‖Σ_i Q_i − I‖`.
    pub sum_defect: f64,
    /// `Σ_i ‖Q_i − P_i‖_F²` (quadratic closeness).
    pub quadratic_closeness: f64,
    /// `max_i ‖Q_i − P_i‖`.
    pub max_deviation: f64,
    /// Whether the stronger separation `2r > 4·r_min` held.
    pub rank_condition: bool,
}

/// Builds the circle system around the `A₁` eigenvalue clusters at
/// separation radius `r` (one head circle over the leading cluster, then
/// radius-`r` circles where consecutive gaps exceed `2r`) and computes the
/// projections by trapezoidal quadrature.
pub fn riesz_projections(
    s: &SpectralScenario,
    sol: &SheetSolution,
    r: f64,
    nodes: usize,
) -> Result<ClusterProjections, SpectralError> {
    let x_norm = linalg::spectral_norm(&sol.x);
    if r <= x_norm {
        return Err(SpectralError::RadiusTooSmall { r, x_norm });
    }
    let spectrum = s.a1_spectrum();
    let distinct: Vec<f64> = spectrum.clusters.iter().map(|&(v, _)| v).collect();

    // head split: the largest prefix whose internal gaps are ≤ 2r
    let mut head_end = 0;
    for j in 1..distinct.len() {
        if distinct[j] - distinct[j - 1] <= 2.0 * r {
            head_end = j;
        }
    }
    let mut circles = Vec::new();
    let head_center = 0.5 * (distinct[0] + distinct[head_end]);
    let head_radius = 0.5 * (distinct[head_end] - distinct[0]) + r;
    circles.push(Circle {
        center: Complex64::from(head_center),
        radius: head_radius,
    });
    for &v in &distinct[head_end + 1..] {
        circles.push(Circle {
            center: Complex64::from(v),
            radius: r,
        });
    }
    for pair in circles.windows(2) {
        let gap = (pair[1].center - pair[0].center).norm();
        if gap <= pair[0].radius + pair[1].radius {
            return Err(SpectralError::CensusBoundary {
                reason: format!(
                    "projection circles overlap: gap {gap} vs radii {} + {}",
                    pair[0].radius, pair[1].radius
                ),
            });
        }
    }

    let h_eigs = linalg::complex_eigenvalues(&sol.h1)?;
    let scale = linalg::spectral_norm(&sol.h1).max(1.0);
    for ev in &h_eigs {
        let mut covering = 0;
        for circle in &circles {
            let d = (ev - circle.center).norm();
            if (d - circle.radius).abs() < 1e-8 * scale {
                return Err(SpectralError::EigenvalueOnCircle { value: *ev });
            }
            if d < circle.radius {
                covering += 1;
            }
        }
        if covering != 1 {
            return Err(SpectralError::UnclusteredEigenvalue { value: *ev });
        }
    }

    let n = s.dim();
    let id = linalg::identity(n);
    let m = nodes.max(16);
    let mut q = Vec::with_capacity(circles.len());
    for circle in &circles {
        let mut acc = CMatrix::zeros(n, n);
        for k in 0..m {
            let theta = std::f64::consts::TAU * k as f64 / m as f64;
            let phase = Complex64::from_polar(1.0, theta);
            let z = circle.center + phase * circle.radius;
            let resolvent = linalg::lu_solve(&(&sol.h1 - &id * z), &id)
                .ok_or(SpectralError::EigenvalueOnCircle { value: z })?;
            acc -= resolvent.map(|x| x * (phase * circle.radius / m as f64));
        }
        q.push(acc);
    }
    let p: Vec<CMatrix> = circles
        .iter()
        .map(|circle| {
            let mut acc = CMatrix::zeros(n, n);
            for (k, &ev) in spectrum.values.iter().enumerate() {
                if circle.contains(Complex64::from(ev)) {
                    let v = spectrum.vectors.column(k);
                    acc += v * v.adjoint();
                }
            }
            acc
        })
        .collect();

    let q_ranks: Vec<usize> = q
        .iter()
        .map(|qi| {
            let tr = qi.diagonal().iter().map(|d| d.re).sum::<f64>();
            tr.round().max(0.0) as usize
        })
        .collect();
    let p_ranks: Vec<usize> = p
        .iter()
        .map(|pi| {
            pi.diagonal()
                .iter()
                .map(|d| d.re)
                .sum::<f64>()
                .round()
                .max(0.0) as usize
        })
        .collect();

    let mut idempotency_defect = 0.0f64;
    for (i, qi) in q.iter().enumerate() {
        for (j, qj) in q.iter().enumerate() {
            let prod = qi * qj;
            let target = if i == j {
                qi.clone()
            } else {
                CMatrix::zeros(n, n)
            };
            idempotency_defect = idempotency_defect.max(linalg::spectral_norm(&(prod - target)));
        }
    }
    let mut total = CMatrix::zeros(n, n);
    for qi in &q {
        total += qi;
    }
    let sum_defect = linalg::spectral_norm(&(total - &id));
    let quadratic_closeness: f64 = q
        .iter()
        .zip(p.iter())
        .map(|(qi, pi)| (qi - pi).norm_squared())
        .sum();
    let max_deviation = q
        .iter()
        .zip(p.iter())
        .map(|(qi, pi)| linalg::spectral_norm(&(qi - pi)))
        .fold(0.0f64, f64::max);

    let rank_condition = sol
        .certificate
        .r_min
        .map(|r_min| {
            let min_gap = distinct
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min);
            2.0 * r > 4.0 * r_min && (distinct.len() == 1 || 2.0 * r < min_gap || head_end > 0)
        })
        .unwrap_or(false);

    Ok(ClusterProjections {
        circles,
        q,
        p,
        q_ranks,
        p_ranks,
        r,
        idempotency_defect,
        sum_defect,
        quadratic_closeness,
        max_deviation,
        rank_condition,
    })
}

/// Stacks all root vectors and reports the smallest/largest singular value:
/// full numerical rank certifies completeness of the root-vector system.
pub fn completeness_ratio(spectrum: &[ClassifiedEigenvalue], n: usize) -> (f64, f64) {
    let total: usize = spectrum.iter().map(|e| e.algebraic_multiplicity).sum();
    let mut stacked = CMatrix::zeros(n, total);
    let mut col = 0;
    for entry in spectrum {
        for j in 0..entry.root_vectors.ncols() {
            stacked.set_column(col, &entry.root_vectors.column(j));
            col += 1;
        }
    }
    let svd = nalgebra::SVD::new(stacked, false, false);
    let smax = svd.singular_values.max();
    let smin = svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    (smin, smax)
}

/// Per-eigenvalue results of the real-point analysis.
#[derive(Debug, Clone)]
pub struct RealPointEntry {
    pub lambda: f64,
    pub class: EigenClass,
    pub branch: Option<usize>,
    pub multiplicity: usize,
    /// `max_ψ ‖K′_B(λ)ψ‖/(‖density‖·‖ψ‖)` for embedded eigenvalues.
    pub kprime_annihilation: Option<f64>,
    /// `max |Im⟨Ωu,u⟩|/‖u‖²` over random `u` in the eigenvector span.
    pub omega_im_max: f64,
    /// `min Re⟨Ωu,u⟩/‖u‖²` over the same sample.
    pub omega_re_min: f64,
    /// Relative residuals `‖HΨ−λΨ‖/‖Ψ‖` of the lifted eigenvectors.
    pub lifted_residuals: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct RealPointReport {
    pub entries: Vec<RealPointEntry>,
    /// `‖[⟨(I+Ω)ψ_a, ψ_b⟩] − I‖` over the lift-orthonormalized family.
    pub bari_gram_defect: Option<f64>,
    /// Tolerance the Bari-Gram defect is judged against.
    pub oracle_tolerance: Option<f64>,
}

/// Runs the real-eigenvalue checks: density annihilation for embedded
/// points, the Ω-form sign tests on the eigenvector span, and (with an
/// oracle) eigenvector lifting plus the Bari-Gram orthonormality test.
pub fn real_point_analysis(
    s: &SpectralScenario,
    c: &Contour,
    sol: &SheetSolution,
    omega: &CMatrix,
    oracle: Option<&DiscretizedH>,
    seed: u64,
) -> Result<RealPointReport, SpectralError> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    let spectrum = sheet_spectrum(s, c, sol)?;
    let n = s.dim();
    let mut entries = Vec::new();
    let mut lifted_family: Vec<(CVector, CVector)> = Vec::new(); // (ψ1, Ψ)

    for entry in spectrum.iter().filter(|e| e.class != EigenClass::Resonance) {
        let lambda = entry.value.re;
        let vectors = &entry.root_vectors;

        let kprime_annihilation = match (entry.class, entry.branch) {
            (EigenClass::RealEmbedded, Some(k)) => {
                let density = s.branches[k].eval_density(Complex64::from(lambda), n).ok();
                let scale = s.branches[k].density_scale(n).max(1e-300);
                density.map(|kp| {
                    (0..vectors.ncols())
                        .map(|j| {
                            let psi = vectors.column(j);
                            (&kp * psi).norm() / (scale * psi.norm())
                        })
                        .fold(0.0f64, f64::max)
                })
            }
            _ => None,
        };

        let mut omega_im_max = 0.0f64;
        let mut omega_re_min = f64::INFINITY;
        for _ in 0..100 {
            let mut u = CVector::zeros(n);
            for j in 0..vectors.ncols() {
                let coeff =
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                u += vectors.column(j).map(|x| x * coeff);
            }
            let norm2 = u.norm_squared();
            if norm2 < 1e-30 {
                continue;
            }
            let form = (u.adjoint() * omega * &u)[(0, 0)];
            omega_im_max = omega_im_max.max(form.im.abs() / norm2);
            omega_re_min = omega_re_min.min(form.re / norm2);
        }
        if omega_re_min == f64::INFINITY {
            omega_re_min = 0.0;
        }

        let lifted_residuals = match oracle {
            Some(h) => {
                let mut residuals = Vec::new();
                let mut lifts = Vec::new();
                for j in 0..vectors.ncols() {
                    let psi1 = CVector::from_column_slice(vectors.column(j).as_slice());
                    let (full, residual) = h.lift_eigenvector(lambda, &psi1)?;
                    residuals.push(residual);
                    lifts.push((psi1, full));
                }
                // orthonormalize the lifted vectors within this eigenvalue,
                // applying the same transform to the ψ1 parts
                let mut ortho: Vec<(CVector, CVector)> = Vec::new();
                for (mut psi1, mut full) in lifts {
                    for (p_done, f_done) in &ortho {
                        let coeff = f_done.dotc(&full);
                        full -= f_done.map(|x| x * coeff);
                        psi1 -= p_done.map(|x| x * coeff);
                    }
                    let norm = full.norm();
                    if norm > 1e-12 {
                        full /= Complex64::from(norm);
                        psi1 /= Complex64::from(norm);
                        ortho.push((psi1, full));
                    }
                }
                lifted_family.extend(ortho);
                Some(residuals)
            }
            None => None,
        };

        entries.push(RealPointEntry {
            lambda,
            class: entry.class,
            branch: entry.branch,
            multiplicity: entry.algebraic_multiplicity,
            kprime_annihilation,
            omega_im_max,
            omega_re_min,
            lifted_residuals,
        });
    }

    let (bari_gram_defect, oracle_tolerance) = match oracle {
        Some(h) if !lifted_family.is_empty() => {
            let k = lifted_family.len();
            let mut gram = CMatrix::zeros(k, k);
            let one_plus: CMatrix = linalg::identity(n) + omega;
            for (a, (psi_a, _)) in lifted_family.iter().enumerate() {
                let lhs = &one_plus * psi_a;
                for (b, (psi_b, _)) in lifted_family.iter().enumerate() {
                    gram[(a, b)] = psi_b.dotc(&lhs);
                }
            }
            let defect = linalg::spectral_norm(&(gram - linalg::identity(k)));
            let max_residual = entries
                .iter()
                .flat_map(|e| e.lifted_residuals.iter().flatten())
                .fold(0.0f64, |m, &r| m.max(r));
            let tol = (100.0 * max_residual + 10.0 * h.est_error).max(1e-8);
            (Some(defect), Some(tol))
        }
        _ => (None, None),
    };

    Ok(RealPointReport {
        entries,
        bari_gram_defect,
        oracle_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{
        build_contour, physical_contour, reflect_contour, PathSpec, QuadratureRule, SheetIndex,
    };
    use crate::factor::compute_omega;
    use crate::fixtures;
    use crate::linalg::cplx;
    use crate::solver::{solve_basic_equation, SolveOptions};

    #[test]
    fn zero_coupling_spectrum_is_a1() {
        let s = fixtures::zero_coupling();
        let c = physical_contour(&s, QuadratureRule::default()).unwrap();
        let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
        let spec = sheet_spectrum(&s, &c, &sol).unwrap();
        assert_eq!(spec.len(), 2);
        assert!(spec.iter().all(|e| e.class == EigenClass::RealIsolated));
        assert!((spec[0].value - cplx(1.0, 0.0)).norm() < 1e-12);
        assert!((spec[1].value - cplx(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn l1_single_resonance() {
        let s = fixtures::scenario_l1();
        let c = build_contour(
            &s,
            SheetIndex::all_minus(1),
            &[PathSpec::depth(0.5)],
            QuadratureRule::default(),
        )
        .unwrap();
        let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
        let spec = sheet_spectrum(&s, &c, &sol).unwrap();
        assert_eq!(spec.len(), 1);
        assert_eq!(spec[0].class, EigenClass::Resonance);
        assert_eq!(spec[0].branch, Some(0));
        assert!((spec[0].value - cplx(0.0, -0.052786404500042066)).norm() < 1e-10);
    }

    #[test]
    fn decoupled_embedded_classification() {
        let fx = fixtures::decoupled_embedded();
        let s = &fx.scenario;
        let c = build_contour(
            s,
            SheetIndex::all_minus(1),
            &fixtures::default_geometry(s, 1.0),
            QuadratureRule::default(),
        )
        .unwrap();
        let sol = solve_basic_equation(s, &c, SolveOptions::default()).unwrap();
        let spec = sheet_spectrum(s, &c, &sol).unwrap();
        let embedded: Vec<_> = spec
            .iter()
            .filter(|e| e.class == EigenClass::RealEmbedded)
            .collect();
        assert_eq!(embedded.len(), 1);
        assert_eq!(embedded[0].branch, Some(0));
        assert!((embedded[0].value - cplx(fx.lambda, 0.0)).norm() < 1e-13);
        assert!(spec.iter().any(|e| e.class == EigenClass::RealIsolated));
    }

    #[test]
    fn census_counts_the_l1_resonance() {
        let s = fixtures::scenario_l1();
        let c = build_contour(
            &s,
            SheetIndex::all_minus(1),
            &[PathSpec::depth(0.5)],
            QuadratureRule::default(),
        )
        .unwrap();
        let resonance = cplx(0.0, -0.052786404500042066);
        let count = m1_zero_census(
            &s,
            &c,
            Circle {
                center: resonance,
                radius: 0.1,
            },
            64,
        )
        .unwrap();
        assert_eq!(count, 1);
        // the d0/2 disk holds exactly the same zero and nothing else
        let big = m1_zero_census(
            &s,
            &c,
            Circle {
                center: cplx(0.0, 0.0),
                radius: 0.25,
            },
            128,
        )
        .unwrap();
        assert_eq!(big, 1);
    }

    #[test]
    fn census_empty_region() {
        let s = fixtures::scenario_l1();
        let c = build_contour(
            &s,
            SheetIndex::all_minus(1),
            &[PathSpec::depth(0.5)],
            QuadratureRule::default(),
        )
        .unwrap();
        let count = m1_zero_census(
            &s,
            &c,
            Circle {
                center: cplx(0.15, 0.1),
                radius: 0.04,
            },
            64,
        )
        .unwrap();
        assert_eq!(count, 0);
    }

    #[test]
    fn census_zero_coupling_multiplicity() {
        // A1 with a double eigenvalue: census around it must report 2
        let s = crate::model::SpectralScenario::new(
            CMatrix::from_diagonal(&CVector::from_vec(vec![cplx(3.0, 0.0), cplx(3.0, 0.0)])),
            vec![],
            vec![crate::model::ACBranch::new(
                crate::model::Interval::new(-0.5, 0.5),
                crate::model::AnalyticDensity::default(),
            )],
        );
        let c = physical_contour(&s, QuadratureRule::default()).unwrap();
        let count = m1_zero_census(
            &s,
            &c,
            Circle {
                center: cplx(3.0, 0.0),
                radius: 0.2,
            },
            64,
        )
        .unwrap();
        assert_eq!(count, 2);
    }

    #[test]
    fn projections_zero_coupling_match_exactly() {
        let s = fixtures::zero_coupling();
        let c = physical_contour(&s, QuadratureRule::default()).unwrap();
        let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
        let proj = riesz_projections(&s, &sol, 0.3, 128).unwrap();
        assert_eq!(proj.circles.len(), 2);
        for (qi, pi) in proj.q.iter().zip(proj.p.iter()) {
            assert!((qi - pi).norm() < 1e-10);
        }
        assert!(proj.sum_defect < 1e-10);
        assert!(proj.idempotency_defect < 1e-10);
        assert_eq!(proj.q_ranks, vec![1, 1]);
        assert_eq!(proj.p_ranks, vec![1, 1]);
    }

    #[test]
    fn projections_gap_scenario() {
        let s = fixtures::gap_3x3();
        let c = build_contour(
            &s,
            SheetIndex::all_minus(2),
            &fixtures::default_geometry(&s, 1.0),
            QuadratureRule::default(),
        )
        .unwrap();
        let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
        let r_min = sol.certificate.r_min.unwrap();
        let proj = riesz_projections(&s, &sol, 2.5 * r_min, 256).unwrap();
        assert!(proj.sum_defect < 1e-9, "sum defect {}", proj.sum_defect);
        assert!(proj.idempotency_defect < 1e-10);
        let total_q: usize = proj.q_ranks.iter().sum();
        assert_eq!(total_q, 3);
        if proj.rank_condition {
            assert_eq!(proj.q_ranks, proj.p_ranks);
            assert!(proj.max_deviation < 1.0);
        }
    }

    #[test]
    fn completeness_of_root_vectors() {
        let s = fixtures::two_branch_resonance();
        let c = build_contour(
            &s,
            SheetIndex::all_minus(2),
            &fixtures::default_geometry(&s, 1.0),
            QuadratureRule::default(),
        )
        .unwrap();
        let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
        let spec = sheet_spectrum(&s, &c, &sol).unwrap();
        assert!(spec.iter().all(|e| e.class == EigenClass::Resonance));
        let (smin, smax) = completeness_ratio(&spec, s.dim());
        assert!(smin > 1e-8 * smax, "rank collapse: {smin} vs {smax}");
    }

    #[test]
    fn real_point_zero_coupling_is_trivial() {
        let s = fixtures::zero_coupling();
        let c = physical_contour(&s, QuadratureRule::default()).unwrap();
        let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
        let omega = CMatrix::zeros(2, 2);
        let h = crate::oracle::discretize_full(&s, 32).unwrap();
        let report = real_point_analysis(&s, &c, &sol, &omega, Some(&h), 3).unwrap();
        assert_eq!(report.entries.len(), 2);
        assert!(report
            .entries
            .iter()
            .all(|e| e.class == EigenClass::RealIsolated));
        assert!(report
            .entries
            .iter()
            .all(|e| e.omega_im_max == 0.0 && e.omega_re_min == 0.0));
        // with Ω = 0 the Bari-Gram matrix is the plain Gram of the ψ's,
        // which the lift orthonormalization makes exactly the identity
        assert!(report.bari_gram_defect.unwrap() < 1e-12);
    }

    #[test]
    fn lifted_family_is_orthonormal_across_eigenvalues() {
        let s = fixtures::gap_3x3();
        let c = build_contour(
            &s,
            SheetIndex::all_minus(2),
            &fixtures::default_geometry(&s, 1.0),
            QuadratureRule::default(),
        )
        .unwrap();
        let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
        let spec = sheet_spectrum(&s, &c, &sol).unwrap();
        let h = crate::oracle::discretize_full(&s, 512).unwrap();
        let mut lifted = Vec::new();
        for e in spec.iter().filter(|e| e.class == EigenClass::RealIsolated) {
            for j in 0..e.root_vectors.ncols() {
                let psi = CVector::from_column_slice(e.root_vectors.column(j).as_slice());
                let (full, _) = h.lift_eigenvector(e.value.re, &psi).unwrap();
                let norm = full.norm();
                lifted.push(full / Complex64::from(norm));
            }
        }
        assert_eq!(lifted.len(), 3);
        for (a, va) in lifted.iter().enumerate() {
            for (b, vb) in lifted.iter().enumerate().skip(a + 1) {
                let overlap = vb.dotc(va).norm();
                assert!(
                    overlap <= 50.0 * h.est_error.max(1e-10),
                    "⟨Ψ{a},Ψ{b}⟩ = {overlap} vs est {}",
                    h.est_error
                );
            }
        }
    }

    #[test]
    fn real_point_analysis_decoupled() {
        let fx = fixtures::decoupled_embedded();
        let s = &fx.scenario;
        let c = build_contour(
            s,
            SheetIndex::all_minus(1),
            &fixtures::default_geometry(s, 1.0),
            QuadratureRule::default(),
        )
        .unwrap();
        let sol = solve_basic_equation(s, &c, SolveOptions::default()).unwrap();
        let cr = reflect_contour(s, &c).unwrap();
        let solr = solve_basic_equation(s, &cr, SolveOptions::default()).unwrap();
        let om = compute_omega(s, &c, &sol, &solr).unwrap();
        let h = crate::oracle::discretize_full(s, 256).unwrap();
        let report = real_point_analysis(s, &c, &sol, &om.omega, Some(&h), 11).unwrap();
        assert_eq!(report.entries.len(), 2);
        let embedded = report
            .entries
            .iter()
            .find(|e| e.class == EigenClass::RealEmbedded)
            .unwrap();
        // the decoupled channel annihilates the density exactly
        assert_eq!(embedded.kprime_annihilation.unwrap(), 0.0);
        assert!(embedded.omega_im_max <= 1e-9);
        assert!(embedded.omega_re_min >= -1e-9);
        for e in &report.entries {
            for &resid in e.lifted_residuals.iter().flatten() {
                assert!(resid < 1e-6, "lift residual {resid}");
            }
        }
        let defect = report.bari_gram_defect.unwrap();
        assert!(
            defect <= report.oracle_tolerance.unwrap(),
            "Bari-Gram defect {} vs tol {}",
            defect,
            report.oracle_tolerance.unwrap()
        );
    }
}
