//! The theorem-check matrix: every invariant the library claims, run
//! against one scenario and reported with its measured value and the
//! tolerance it was judged at. This is what the CLI `verify` command and
//! the batch reports consume.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::contour::{
    build_contour, contour_variation, distance_to_integration_set, physical_contour,
    region_winding, Contour, ContourError, PathSpec, QuadratureRule, SheetIndex,
};
use crate::factor::{self, FactorError};
use crate::fixtures::default_geometry;
use crate::linalg::{self, CMatrix};
use crate::model::{ModelError, SpectralScenario};
use crate::oracle::{self, OracleError};
use crate::solver::{self, SheetSolution, SolveError, SolveOptions};
use crate::spectral::{self, EigenClass, SpectralError};
use crate::transfer::{apply_v1_operator, eval_m1_sheet, TransferError};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("scenario invalid: {0:?}")]
    Invalid(Vec<ModelError>),
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
}

/// One verified invariant.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// False when the scenario lacks the feature the check needs.
    pub applicable: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub note: String,
}

impl CheckResult {
    fn ok(name: &str, measured: f64, tolerance: f64, note: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            pass: measured <= tolerance,
            applicable: true,
            measured,
            tolerance,
            note: note.into(),
        }
    }

    fn flag(
        name: &str,
        pass: bool,
        measured: f64,
        tolerance: f64,
        note: impl Into<String>,
    ) -> Self {
        CheckResult {
            name: name.into(),
            pass,
            applicable: true,
            measured,
            tolerance,
            note: note.into(),
        }
    }

    fn skipped(name: &str, note: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            pass: true,
            applicable: false,
            measured: 0.0,
            tolerance: 0.0,
            note: note.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub rule: QuadratureRule,
    pub solve: SolveOptions,
    pub seed: u64,
    /// Nodes per branch for the discretized oracle.
    pub oracle_n: usize,
    pub moment_nodes: usize,
    pub projection_nodes: usize,
    /// Geometry for the all-minus sheet; other sheets use sign-mirrored
    /// depth geometry. `None` picks the scenario defaults.
    pub geometry: Option<Vec<PathSpec>>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            rule: QuadratureRule::default(),
            solve: SolveOptions::default(),
            seed: 1,
            oracle_n: 256,
            moment_nodes: 256,
            projection_nodes: 256,
            geometry: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
    pub seed: u64,
    /// Sheet string of the primary solution the single-sheet checks used.
    pub primary_sheet: String,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

struct SheetData {
    contour: Contour,
    solution: SheetSolution,
}

/// Margin for sampling evaluation points near a contour: panels of length
/// `ℓ` resolve a Cauchy kernel at distance `d` only when `ℓ/(4d)` is well
/// under 1, so keep `d ≥ ℓ/1.7`.
fn sampling_margin(s: &SpectralScenario, c: &Contour, branch: usize) -> f64 {
    let path = &c.paths[branch];
    let mut max_panel = 0.0f64;
    for pair in path.vertices.windows(2) {
        max_panel = max_panel.max((pair[1] - pair[0]).norm() / c.rule.panels as f64);
    }
    if path.left_ray || path.right_ray {
        // dyadic macro panels start at unit width
        max_panel = max_panel.max(1.0 / c.rule.panels as f64);
    }
    let iv = s.branches[branch].interval;
    if iv.is_finite() {
        max_panel = max_panel.max((iv.b - iv.a) / c.rule.panels as f64);
    } else {
        max_panel = max_panel.max(1.0 / c.rule.panels as f64);
    }
    max_panel / 1.7
}

/// Adapts all-minus-sheet geometry to another sheet: explicit vertices are
/// conjugated on every branch whose sign flips to `+1`; depth geometry is
/// sign-agnostic.
fn mirror_geometry(base: &[PathSpec], sheet: &SheetIndex) -> Vec<PathSpec> {
    base.iter()
        .enumerate()
        .map(|(k, spec)| match spec {
            PathSpec::Depth { .. } => spec.clone(),
            PathSpec::Vertices(v) => {
                if sheet.sign(k) > 0 {
                    PathSpec::Vertices(v.iter().map(|z| z.conj()).collect())
                } else {
                    PathSpec::Vertices(v.clone())
                }
            }
        })
        .collect()
}

/// Rejection-samples `count` points inside the pockets `D(Γ_l)`, at a safe
/// margin from both the deformed path and the real interval.
pub fn sample_pocket_points(
    s: &SpectralScenario,
    c: &Contour,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let branches: Vec<usize> = (0..s.num_branches()).collect();
    while out.len() < count && attempts < 200 * count.max(1) {
        attempts += 1;
        let k = branches[attempts % branches.len()];
        let path = &c.paths[k];
        let depth = path
            .vertices
            .iter()
            .map(|v| v.im.abs())
            .fold(0.0f64, f64::max);
        if depth == 0.0 {
            continue;
        }
        let margin = sampling_margin(s, c, k).max(0.08 * depth);
        if margin >= 0.45 * depth {
            continue; // pocket too thin to sample safely at this rule
        }
        let iv = s.branches[k].interval;
        let (lo, hi) = if iv.is_finite() {
            (iv.a + 0.1 * (iv.b - iv.a), iv.b - 0.1 * (iv.b - iv.a))
        } else {
            (-3.0f64.min(iv.b), 3.0f64.max(iv.a))
        };
        let sign = path
            .vertices
            .iter()
            .map(|v| v.im)
            .find(|im| *im != 0.0)
            .map(|im| im.signum())
            .unwrap_or(-1.0);
        let re = rng.random_range(lo..hi);
        let im = sign * rng.random_range(margin..(depth - margin));
        let z = Complex64::new(re, im);
        if distance_to_integration_set(s, c, z) < margin || z.im.abs() < margin {
            continue;
        }
        if region_winding(c, z).map(|w| w.inside).unwrap_or(false) {
            out.push(z);
        }
    }
    out
}

/// Runs the full theorem-check matrix against one scenario.
pub fn run_verification(
    s: &SpectralScenario,
    cfg: &VerifyConfig,
) -> Result<VerificationReport, VerifyError> {
    let report = s.validate();
    if !report.is_valid() {
        return Err(VerifyError::Invalid(report.errors));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = s.num_branches();
    let n = s.dim();
    let mut checks: Vec<CheckResult> = Vec::new();

    // ---- model invariants ------------------------------------------------
    {
        let mut worst = 0.0f64;
        for branch in &s.branches {
            let scale = branch.density_scale(n).max(1e-300);
            let (lo, hi) = if branch.interval.is_finite() {
                (branch.interval.a, branch.interval.b)
            } else {
                (-10.0, 10.0)
            };
            for _ in 0..1000 {
                let x = rng.random_range(lo..hi);
                if let Ok(kp) = branch.eval_density(Complex64::from(x), n) {
                    let (eigs, _) = linalg::hermitian_eigen(&kp.map(|v| (v + v.conj()) * 0.5));
                    if let Some(&min_eig) = eigs.first() {
                        worst = worst.max((-min_eig / scale).max(0.0));
                    }
                }
            }
        }
        checks.push(CheckResult::ok(
            "density-psd",
            worst,
            1e-12,
            "min eig K'(μ) ≥ −tol·scale",
        ));
    }
    {
        let mut worst = 0.0f64;
        for branch in &s.branches {
            let strip = branch.density.strip_halfwidth().min(2.0);
            let (lo, hi) = if branch.interval.is_finite() {
                (branch.interval.a, branch.interval.b)
            } else {
                (-5.0, 5.0)
            };
            for _ in 0..200 {
                let z = Complex64::new(
                    rng.random_range(lo..hi),
                    rng.random_range(-0.9 * strip..0.9 * strip),
                );
                let (Ok(a), Ok(b)) = (branch.eval_density(z.conj(), n), branch.eval_density(z, n))
                else {
                    continue;
                };
                let scale = linalg::spectral_norm(&b).max(1e-300);
                worst = worst.max(linalg::spectral_norm(&(a - b.adjoint())) / scale);
            }
        }
        checks.push(CheckResult::ok(
            "density-schwarz",
            worst,
            1e-13,
            "K'(conj μ) = K'(μ)* relative defect",
        ));
    }
    {
        let h = oracle::discretize_full(s, cfg.oracle_n.max(64))?;
        let lower = h.coupling_norm_sq();
        let upper = h.coupling_hs_sq();
        let slack = 1e-10 * upper.max(1.0);
        checks.push(CheckResult::flag(
            "variation-sandwich",
            lower <= h.variation + slack && h.variation <= upper + slack,
            h.variation,
            upper + slack,
            format!("‖B01‖² = {lower:.6e} ≤ 𝒱₀ ≤ ‖B01‖₂² = {upper:.6e} on the discretized measure"),
        ));
    }

    // ---- contours and solutions on all sheets -----------------------------
    let base_geometry = cfg
        .geometry
        .clone()
        .unwrap_or_else(|| default_geometry(s, 1.0));
    let mut sheets: Vec<SheetData> = Vec::new();
    let mut sheet_indices = SheetIndex::enumerate(m);
    if sheet_indices.is_empty() {
        sheet_indices.push(SheetIndex::all_minus(0));
    }
    for idx in &sheet_indices {
        let geometry = mirror_geometry(&base_geometry, idx);
        let contour = build_contour(s, idx.clone(), &geometry, cfg.rule)?;
        let solution = solver::solve_basic_equation(s, &contour, cfg.solve)?;
        sheets.push(SheetData { contour, solution });
    }
    let primary_pos = sheet_indices
        .iter()
        .position(|idx| *idx == SheetIndex::all_minus(m))
        .unwrap_or(0);
    let flip_of = |i: usize| -> usize {
        sheet_indices
            .iter()
            .position(|idx| *idx == sheet_indices[i].flipped())
            .expect("flip closed")
    };
    let primary = &sheets[primary_pos];
    let minus_pos = flip_of(primary_pos);
    let phys = physical_contour(s, cfg.rule)?;

    // ---- contour invariants -----------------------------------------------
    {
        let v = contour_variation(s, &primary.contour);
        let reflected = crate::contour::reflect_contour(s, &primary.contour)?;
        let vr = contour_variation(s, &reflected);
        let rel = (v.total - vr.total).abs() / v.total.max(1e-300);
        checks.push(CheckResult::ok(
            "variation-reflection",
            rel,
            1e-13,
            "𝒱₀(Γ_l) vs 𝒱₀(Γ_{−l})",
        ));

        let finer_rule = QuadratureRule {
            panels: cfg.rule.panels * 2,
            ..cfg.rule
        };
        let finer = build_contour(
            s,
            sheet_indices[primary_pos].clone(),
            &base_geometry,
            finer_rule,
        )?;
        let vf = contour_variation(s, &finer);
        checks.push(CheckResult::ok(
            "quadrature-convergence",
            (v.total - vf.total).abs(),
            v.quadrature_error.max(1e-14),
            "variation at (g,p) vs (g,2p) within the attached estimate",
        ));
    }

    // ---- transfer invariants ----------------------------------------------
    {
        let points = sample_pocket_points(s, &primary.contour, 100, &mut rng);
        if points.is_empty() {
            checks.push(CheckResult::skipped(
                "residue-relation",
                "no safely samplable pocket",
            ));
        } else {
            let mut worst = 0.0f64;
            let mut tol = 1e-9f64;
            for &z in &points {
                let cont = eval_m1_sheet(s, &primary.contour, z)?;
                let phys_val = eval_m1_sheet(s, &phys, z)?;
                let w = region_winding(&primary.contour, z).map_err(VerifyError::Contour)?;
                let k = w.branch.expect("sampled inside a pocket");
                let sign = sheet_indices[primary_pos].sign(k) as f64;
                let kprime = s.branches[k]
                    .eval_density(z, n)
                    .map_err(|e| VerifyError::Contour(ContourError::Density(e)))?;
                let residue =
                    kprime.map(|x| x * Complex64::new(0.0, 2.0 * std::f64::consts::PI * sign));
                let defect = linalg::spectral_norm(&(&cont.value - &phys_val.value - residue));
                worst = worst.max(defect);
                tol = tol.max(10.0 * (cont.quadrature_error + phys_val.quadrature_error));
            }
            checks.push(CheckResult::ok(
                "residue-relation",
                worst,
                tol,
                format!(
                    "M₁(z,Γ) − M₁(z) − 2πi·l·K'(z) over {} pocket points",
                    points.len()
                ),
            ));
        }
    }
    {
        let shallow_geometry = default_geometry(s, 0.55);
        let shallow = build_contour(
            s,
            sheet_indices[primary_pos].clone(),
            &shallow_geometry,
            cfg.rule,
        )?;
        let mut worst = 0.0f64;
        let mut tol = 1e-9f64;
        let mut used = 0;
        let points = sample_pocket_points(s, &shallow, 20, &mut rng);
        for &z in &points {
            let a = crate::transfer::eval_v1_point(s, &primary.contour, z)?;
            let b = crate::transfer::eval_v1_point(s, &shallow, z)?;
            worst = worst.max(linalg::spectral_norm(&(&a.value - &b.value)));
            tol = tol.max(10.0 * (a.quadrature_error + b.quadrature_error));
            used += 1;
        }
        if used == 0 {
            checks.push(CheckResult::skipped(
                "deformation-invariance",
                "no samplable points",
            ));
        } else {
            checks.push(CheckResult::ok(
                "deformation-invariance",
                worst,
                tol,
                format!("V₁ agreement across two same-sheet contours at {used} points"),
            ));
        }
    }
    {
        let img = apply_v1_operator(s, &primary.contour, &primary.solution.h1)?;
        checks.push(CheckResult::flag(
            "operator-norm-bound",
            img.bound.holds,
            img.bound.result_norm,
            img.bound.bound + img.quadrature_error,
            "‖V₁(Y,Γ)‖ ≤ 𝒱₀·sup‖(Y−μ)⁻¹‖ at Y = H₁",
        ));
    }

    // ---- solver invariants ------------------------------------------------
    {
        let sol = &primary.solution;
        let cert = &sol.certificate;
        if let (Some(q), Some(r_min)) = (cert.contraction_rate, cert.r_min) {
            let informative = sol.iterations.saturating_sub(2);
            let max_ratio = sol
                .step_ratios
                .iter()
                .take(informative)
                .fold(0.0f64, |m, &r| m.max(r));
            checks.push(CheckResult::ok(
                "contraction-certificate",
                max_ratio,
                q + 0.05,
                format!("observed ratios over {} informative steps", informative),
            ));
            checks.push(CheckResult::ok(
                "ball-containment",
                linalg::spectral_norm(&sol.x),
                r_min + 10.0 * cfg.solve.tol,
                "‖X‖ ≤ r_min + 10·tol",
            ));
            let mut compounded: f64 = 1.0;
            let mut worst = 0.0f64;
            for (k, &r) in sol.step_ratios.iter().take(informative).enumerate() {
                compounded *= r;
                let allowed = (q + 0.05).powi(k as i32 + 1);
                worst = worst.max(compounded / allowed);
            }
            checks.push(CheckResult::ok(
                "geometric-convergence",
                worst,
                1.0 + 1e-9,
                "error_k ≤ error_0·(q+0.05)^k",
            ));
        } else {
            checks.push(CheckResult::skipped(
                "contraction-certificate",
                "condition not satisfied",
            ));
        }
        checks.push(CheckResult::ok(
            "fixed-point-residual",
            sol.final_residual,
            (cfg.solve.tol * linalg::spectral_norm(&sol.x).max(1.0))
                .max(10.0 * sol.quadrature_error),
            "‖X − V₁(A₁+X,Γ)‖",
        ));
    }
    {
        let deep_geometry = default_geometry(s, 0.75);
        let other = build_contour(
            s,
            sheet_indices[primary_pos].clone(),
            &deep_geometry,
            cfg.rule,
        )?;
        match solver::solve_basic_equation(s, &other, cfg.solve) {
            Ok(sol2) => {
                let diff = linalg::spectral_norm(&(&sol2.x - &primary.solution.x));
                let tol =
                    (10.0 * (sol2.quadrature_error + primary.solution.quadrature_error)).max(1e-9);
                checks.push(CheckResult::ok(
                    "contour-independence",
                    diff,
                    tol,
                    "X from two admissible same-sheet contours",
                ));
            }
            Err(SolveError::ConditionFailed { .. }) => {
                checks.push(CheckResult::skipped(
                    "contour-independence",
                    "alternate contour not admissible",
                ));
            }
            Err(e) => return Err(e.into()),
        }
    }
    {
        let reference = &primary.solution;
        let r_max = reference.certificate.r_max.unwrap_or(0.0);
        if r_max > 0.0 {
            let mut worst = 0.0f64;
            for _ in 0..20 {
                let mut x0 = CMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        x0[(i, j)] = Complex64::new(
                            rng.random_range(-1.0..1.0),
                            rng.random_range(-1.0..1.0),
                        );
                    }
                }
                let norm = linalg::spectral_norm(&x0).max(1e-300);
                let target = 0.9 * r_max * rng.random_range(0.0..1.0);
                x0 = x0.map(|v| v * (target / norm));
                let sol = solver::solve_with_start(s, &primary.contour, cfg.solve, x0)?;
                worst = worst.max(linalg::spectral_norm(&(&sol.x - &reference.x)));
            }
            checks.push(CheckResult::ok(
                "uniqueness-warm-starts",
                worst,
                10.0 * cfg.solve.tol,
                "20 random starts inside r_max reach the same fixed point",
            ));
        } else {
            checks.push(CheckResult::skipped(
                "uniqueness-warm-starts",
                "no certified ball",
            ));
        }
    }

    // ---- factorization / Ω / moments ---------------------------------------
    let spectrum_a1 = s.a1_spectrum();
    {
        let cert = &primary.solution.certificate;
        let d0 = cert.d0;
        let lo = spectrum_a1.values.first().copied().unwrap_or(0.0) - d0;
        let hi = spectrum_a1.values.last().copied().unwrap_or(0.0) + d0;
        let mut worst = 0.0f64;
        let mut tol = 1e-9f64;
        let mut inv_worst = 0.0f64;
        let mut inv_bound = f64::INFINITY;
        let margin = (0..m)
            .map(|k| sampling_margin(s, &primary.contour, k))
            .fold(0.05 * d0, f64::max);
        let mut used = 0;
        for i in 0..10 {
            for j in 0..10 {
                let z = Complex64::new(
                    lo + (hi - lo) * i as f64 / 9.0,
                    -d0 + 2.0 * d0 * j as f64 / 9.0,
                );
                if distance_to_integration_set(s, &primary.contour, z) < margin {
                    continue;
                }
                let rep = factor::eval_w1(s, &primary.contour, &primary.solution, z)?;
                worst = worst.max(rep.residual);
                tol = tol.max(10.0 * rep.quadrature_error);
                if let Some(invn) = rep.w1_inverse_norm {
                    inv_worst = inv_worst.max(invn);
                    inv_bound = rep.inverse_bound;
                }
                used += 1;
            }
        }
        checks.push(CheckResult::ok(
            "factorization-residual",
            worst,
            tol,
            format!("‖M₁ − W₁(H₁−z)‖ on a {used}-point grid"),
        ));
        if inv_bound.is_finite() {
            checks.push(CheckResult::ok(
                "w1-inverse-bound",
                inv_worst,
                inv_bound * (1.0 + 1e-9),
                "‖W₁⁻¹‖ inside the d0/2-vicinity",
            ));
        } else {
            checks.push(CheckResult::skipped(
                "w1-inverse-bound",
                "no grid point in the vicinity",
            ));
        }
    }
    let omega_rep = factor::compute_omega(
        s,
        &primary.contour,
        &primary.solution,
        &sheets[minus_pos].solution,
    )?;
    {
        checks.push(CheckResult::flag(
            "omega-bound",
            omega_rep.bound_holds,
            omega_rep.norm,
            omega_rep.bound.min(1.0),
            "‖Ω‖ < 𝒱₀/(d₀/2)² and < 1",
        ));
        let omega_back = factor::compute_omega(
            s,
            &sheets[minus_pos].contour,
            &sheets[minus_pos].solution,
            &primary.solution,
        )?;
        let defect = linalg::spectral_norm(&(&omega_back.omega - omega_rep.omega.adjoint()));
        checks.push(CheckResult::ok(
            "omega-adjoint",
            defect,
            (10.0 * (omega_rep.quadrature_error + omega_back.quadrature_error)).max(1e-9),
            "Ω^{(−l)} = Ω^{(l)*}",
        ));
    }
    {
        let circles = factor::auto_moment_circles(s, &primary.contour, &primary.solution)?;
        let rep = factor::moment_functionals(
            s,
            &primary.contour,
            &primary.solution,
            &circles,
            cfg.moment_nodes,
        )?;
        let one_plus = linalg::identity(n) + &omega_rep.omega;
        let inv = linalg::lu_inverse(&one_plus).expect("I+Ω invertible under the Ω bound");
        let d0_check = linalg::spectral_norm(&(&rep.p0 - &inv));
        let left = &inv * sheets[minus_pos].solution.h1.adjoint();
        let right = &primary.solution.h1 * &inv;
        let d1_left = linalg::spectral_norm(&(&rep.p1 - left));
        let d1_right = linalg::spectral_norm(&(&rep.p1 - right));
        checks.push(CheckResult::ok(
            "moment-identities",
            d0_check.max(d1_left).max(d1_right),
            1e-8,
            "P0 = (I+Ω)⁻¹, P1 = (I+Ω)⁻¹H₁^{(−l)*} = H₁^{(l)}(I+Ω)⁻¹",
        ));
    }
    {
        let mut worst = 0.0f64;
        let mut tol = 1e-9f64;
        let cert = &primary.solution.certificate;
        let id = linalg::identity(n);
        let reflected = &sheets[minus_pos];
        let margin = (0..m)
            .map(|k| sampling_margin(s, &primary.contour, k))
            .fold(0.05 * cert.d0, f64::max);
        let mut used = 0;
        let lo = spectrum_a1.values.first().copied().unwrap_or(0.0) - 2.0 * cert.d0;
        let hi = spectrum_a1.values.last().copied().unwrap_or(0.0) + 2.0 * cert.d0;
        while used < 20 {
            let z = Complex64::new(
                rng.random_range(lo..hi),
                rng.random_range(-2.0 * cert.d0..2.0 * cert.d0),
            );
            if distance_to_integration_set(s, &primary.contour, z) < margin {
                continue;
            }
            let w_l = factor::eval_w1(s, &primary.contour, &primary.solution, z)?;
            let w_ml = factor::eval_w1(s, &reflected.contour, &reflected.solution, z.conj())?;
            let lhs = &w_l.w1 * (&primary.solution.h1 - &id * z);
            let rhs = (reflected.solution.h1.adjoint() - &id * z) * w_ml.w1.adjoint();
            worst = worst.max(linalg::spectral_norm(&(lhs - rhs)));
            tol = tol.max(10.0 * (w_l.quadrature_error + w_ml.quadrature_error));
            used += 1;
        }
        checks.push(CheckResult::ok(
            "adjoint-identity",
            worst,
            tol,
            "W₁(z,Γ_l)(H₁^{(l)}−z) = (H₁^{(−l)*}−z)W₁(z̄,Γ_{(−l)})* at random z",
        ));
    }

    // ---- spectral invariants ------------------------------------------------
    let all_spectra: Vec<Vec<spectral::ClassifiedEigenvalue>> = sheets
        .iter()
        .map(|sd| spectral::sheet_spectrum(s, &sd.contour, &sd.solution))
        .collect::<Result<_, _>>()?;
    {
        let mut worst = 0.0f64;
        let mut pocket_ok = true;
        for (sd, spec) in sheets.iter().zip(all_spectra.iter()) {
            let r_min = sd.solution.certificate.r_min.unwrap_or(f64::INFINITY);
            for e in spec {
                let dist = spectrum_a1
                    .values
                    .iter()
                    .map(|&v| (e.value - Complex64::from(v)).norm())
                    .fold(f64::INFINITY, f64::min);
                worst = worst.max(dist - r_min);
                if e.class == EigenClass::Resonance {
                    let inside = region_winding(&sd.contour, e.value)
                        .map(|w| w.inside)
                        .unwrap_or(false);
                    pocket_ok &= inside;
                }
            }
        }
        checks.push(CheckResult::flag(
            "localization",
            worst <= 1e-9 && pocket_ok,
            worst.max(0.0),
            1e-9,
            "σ(H₁) within r_min of σ(A₁); non-real spectrum inside D(Γ_l)",
        ));
    }
    {
        let mut worst = 0.0f64;
        for i in 0..sheets.len() {
            let j = flip_of(i);
            let a: Vec<Complex64> = all_spectra[i].iter().map(|e| e.value).collect();
            let b: Vec<Complex64> = all_spectra[j].iter().map(|e| e.value.conj()).collect();
            worst = worst.max(linalg::hausdorff(&a, &b));
        }
        checks.push(CheckResult::ok(
            "adjoint-spectra",
            worst,
            1e-8,
            "Hausdorff(σ(H₁^{(l)}), conj σ(H₁^{(−l)}))",
        ));
    }
    {
        let reals: Vec<Vec<Complex64>> = all_spectra
            .iter()
            .map(|spec| {
                spec.iter()
                    .filter(|e| e.class != EigenClass::Resonance)
                    .flat_map(|e| std::iter::repeat_n(e.value, e.algebraic_multiplicity))
                    .collect()
            })
            .collect();
        if reals[primary_pos].is_empty() {
            checks.push(CheckResult::skipped(
                "cross-sheet-real",
                "no real eigenvalues",
            ));
        } else {
            let mut worst = 0.0f64;
            let counts_equal = reals.iter().all(|r| r.len() == reals[0].len());
            for r in &reals {
                worst = worst.max(linalg::hausdorff(r, &reals[0]));
            }
            checks.push(CheckResult::flag(
                "cross-sheet-real",
                counts_equal && worst <= 1e-8,
                worst,
                1e-8,
                "real eigenvalues and multiplicities agree across all sheets",
            ));
        }
    }
    {
        let mut worst = 0.0f64;
        let mut compared = 0;
        for k in 0..m {
            for sign in [-1i8, 1] {
                let members: Vec<usize> = (0..sheets.len())
                    .filter(|&i| sheet_indices[i].sign(k) == sign)
                    .collect();
                let pocket_sets: Vec<Vec<Complex64>> = members
                    .iter()
                    .map(|&i| {
                        all_spectra[i]
                            .iter()
                            .filter(|e| e.class == EigenClass::Resonance && e.branch == Some(k))
                            .map(|e| e.value)
                            .collect()
                    })
                    .collect();
                for pair in pocket_sets.windows(2) {
                    if pair[0].is_empty() && pair[1].is_empty() {
                        continue;
                    }
                    compared += 1;
                    worst = worst.max(linalg::hausdorff(&pair[0], &pair[1]));
                }
            }
        }
        if compared == 0 {
            checks.push(CheckResult::skipped(
                "cross-sheet-pocket",
                "no shared pocket spectra",
            ));
        } else {
            checks.push(CheckResult::ok(
                "cross-sheet-pocket",
                worst,
                1e-8,
                "spectra inside a shared D_k^{l_k} coincide across sheets",
            ));
        }
    }
    {
        let circles = factor::auto_moment_circles(s, &primary.contour, &primary.solution)?;
        let mut ok = true;
        let mut note = String::new();
        for circle in &circles {
            let census = spectral::m1_zero_census(s, &primary.contour, *circle, cfg.moment_nodes)?;
            let mults: usize = all_spectra[primary_pos]
                .iter()
                .filter(|e| circle.contains(e.value))
                .map(|e| e.algebraic_multiplicity)
                .sum();
            if census != mults as i64 {
                ok = false;
                note = format!(
                    "census {census} vs multiplicities {mults} at {}",
                    circle.center
                );
                break;
            }
        }
        checks.push(CheckResult::flag(
            "census-agreement",
            ok,
            0.0,
            0.0,
            if note.is_empty() {
                "det M₁ winding matches multiplicities".into()
            } else {
                note
            },
        ));
    }
    {
        let (smin, smax) = spectral::completeness_ratio(&all_spectra[primary_pos], n);
        checks.push(CheckResult::flag(
            "completeness",
            smin > 1e-8 * smax,
            smin / smax.max(1e-300),
            1e-8,
            "stacked root vectors have full numerical rank (measured is σ_min/σ_max, pass when above tolerance)",
        ));
    }
    {
        let sol = &primary.solution;
        match sol.certificate.r_min {
            Some(r_min) => {
                let r = 2.5 * r_min.max(1e-6);
                match spectral::riesz_projections(s, sol, r, cfg.projection_nodes) {
                    Ok(proj) => {
                        checks.push(CheckResult::ok(
                            "projection-sum",
                            proj.sum_defect,
                            1e-9,
                            "ΣQ_i = I",
                        ));
                        checks.push(CheckResult::ok(
                            "projection-orthogonality",
                            proj.idempotency_defect,
                            1e-10,
                            "Q_iQ_j = δ_ij Q_i",
                        ));
                        if proj.rank_condition {
                            checks.push(CheckResult::flag(
                                "projection-ranks",
                                proj.q_ranks == proj.p_ranks && proj.max_deviation < 1.0,
                                proj.max_deviation,
                                1.0,
                                format!(
                                    "rank Q = rank P under 2r > 4·r_min; Σ‖Q_i−P_i‖_F² = {:.3e}",
                                    proj.quadratic_closeness
                                ),
                            ));
                        } else {
                            checks.push(CheckResult::skipped(
                                "projection-ranks",
                                "separation 2r > 4·r_min unavailable",
                            ));
                        }
                    }
                    Err(SpectralError::CensusBoundary { reason }) => {
                        checks.push(CheckResult::skipped("projection-sum", reason));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            None => checks.push(CheckResult::skipped("projection-sum", "no certificate")),
        }
    }
    {
        let has_real = all_spectra[primary_pos]
            .iter()
            .any(|e| e.class != EigenClass::Resonance);
        if has_real {
            let h = oracle::discretize_full(s, cfg.oracle_n)?;
            let rp = spectral::real_point_analysis(
                s,
                &primary.contour,
                &primary.solution,
                &omega_rep.omega,
                Some(&h),
                cfg.seed.wrapping_add(17),
            )?;
            let mut kp_worst = 0.0f64;
            let mut im_worst = 0.0f64;
            let mut re_worst = 0.0f64;
            let mut lift_worst = 0.0f64;
            for e in &rp.entries {
                if let Some(v) = e.kprime_annihilation {
                    kp_worst = kp_worst.max(v);
                }
                im_worst = im_worst.max(e.omega_im_max);
                re_worst = re_worst.max((-e.omega_re_min).max(0.0));
                for &r in e.lifted_residuals.iter().flatten() {
                    lift_worst = lift_worst.max(r);
                }
            }
            checks.push(CheckResult::ok(
                "real-embedded-annihilation",
                kp_worst,
                1e-8,
                "‖K'(λ)ψ‖ ≤ tol·‖density‖·‖ψ‖ for embedded eigenvalues",
            ));
            checks.push(CheckResult::ok(
                "omega-form-real",
                im_worst.max(re_worst),
                1e-9,
                "Im⟨Ωu,u⟩ ≈ 0 and Re⟨Ωu,u⟩ ≥ 0 on the real-eigenvector span",
            ));
            let lift_tol = (100.0 * h.est_error).max(1e-6);
            checks.push(CheckResult::ok(
                "lifted-eigenvectors",
                lift_worst,
                lift_tol,
                "‖HΨ−λΨ‖/‖Ψ‖ for lifted eigenvectors",
            ));
            match (rp.bari_gram_defect, rp.oracle_tolerance) {
                (Some(defect), Some(tol)) => {
                    checks.push(CheckResult::ok(
                        "bari-gram",
                        defect,
                        tol,
                        "⟨(I+Ω)ψ_a, ψ_b⟩ = δ_ab over the lifted family",
                    ));
                }
                _ => checks.push(CheckResult::skipped("bari-gram", "no lifted family")),
            }
        } else {
            checks.push(CheckResult::skipped(
                "real-embedded-annihilation",
                "no real eigenvalues",
            ));
            checks.push(CheckResult::skipped(
                "omega-form-real",
                "no real eigenvalues",
            ));
        }
    }
    {
        let isolated: Vec<f64> = all_spectra[primary_pos]
            .iter()
            .filter(|e| e.class == EigenClass::RealIsolated)
            .map(|e| e.value.re)
            .collect();
        if isolated.is_empty() {
            checks.push(CheckResult::skipped(
                "oracle-agreement",
                "no real isolated eigenvalues",
            ));
        } else {
            let h = oracle::discretize_full(s, cfg.oracle_n.max(256))?;
            let mut worst = 0.0f64;
            for &lam in &isolated {
                let window = 0.5 * primary.solution.certificate.d0;
                let found = h.eigenvalues_in(lam - window, lam + window, 1e-12);
                let best = found
                    .iter()
                    .map(|&x| (x - lam).abs())
                    .fold(f64::INFINITY, f64::min);
                worst = worst.max(best);
            }
            let tol = (20.0 * h.est_error).max(1e-6);
            checks.push(CheckResult::ok(
                "oracle-agreement",
                worst,
                tol,
                format!(
                    "isolated eigenvalues vs discretized spectrum at N = {}",
                    cfg.oracle_n
                ),
            ));
        }
    }

    Ok(VerificationReport {
        checks,
        seed: cfg.seed,
        primary_sheet: sheet_indices[primary_pos].to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn assert_all_pass(s: &SpectralScenario, cfg: &VerifyConfig) {
        let report = run_verification(s, cfg).unwrap();
        for c in &report.checks {
            assert!(
                c.pass,
                "check {} failed: measured {:.3e} vs tol {:.3e} ({})",
                c.name, c.measured, c.tolerance, c.note
            );
        }
    }

    #[test]
    fn l1_full_matrix_passes() {
        let s = fixtures::scenario_l1();
        let cfg = VerifyConfig {
            oracle_n: 128,
            ..Default::default()
        };
        assert_all_pass(&s, &cfg);
    }

    #[test]
    fn decoupled_full_matrix_passes() {
        let fx = fixtures::decoupled_embedded();
        let cfg = VerifyConfig {
            oracle_n: 256,
            ..Default::default()
        };
        assert_all_pass(&fx.scenario, &cfg);
    }

    #[test]
    fn gap_full_matrix_passes() {
        let s = fixtures::gap_3x3();
        let cfg = VerifyConfig {
            oracle_n: 256,
            ..Default::default()
        };
        assert_all_pass(&s, &cfg);
    }

    #[test]
    fn two_branch_full_matrix_passes() {
        let s = fixtures::two_branch_resonance();
        let cfg = VerifyConfig {
            oracle_n: 128,
            ..Default::default()
        };
        assert_all_pass(&s, &cfg);
    }

    #[test]
    fn invalid_scenario_is_rejected() {
        let mut s = fixtures::zero_coupling();
        s.atoms.push(crate::model::Atom {
            position: 0.0,
            weight: CMatrix::from_element(2, 2, Complex64::from(0.1)),
        });
        let err = run_verification(&s, &VerifyConfig::default()).unwrap_err();
        assert!(matches!(err, VerifyError::Invalid(_)));
    }
}
