//! Acceptance suite: every exit criterion with its pinned tolerance, one
//! pass/fail line per criterion (visible with `--nocapture`).

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sheetsolve_core::contour::{
    build_contour, physical_contour, reflect_contour, region_winding, Contour, PathSpec,
    QuadratureRule, SheetIndex,
};
use sheetsolve_core::factor::{
    auto_moment_circles, compute_omega, eval_w1, moment_functionals, Circle,
};
use sheetsolve_core::fixtures;
use sheetsolve_core::linalg::{self, cplx};
use sheetsolve_core::model::SpectralScenario;
use sheetsolve_core::oracle::discretize_full;
use sheetsolve_core::solver::{solve_basic_equation, SheetSolution, SolveOptions};
use sheetsolve_core::spectral::{
    completeness_ratio, m1_zero_census, real_point_analysis, riesz_projections, sheet_spectrum,
    EigenClass,
};
use sheetsolve_core::transfer::eval_m1_sheet;
use sheetsolve_core::verify::sample_pocket_points;

fn criterion(id: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPT-{id:02} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "ACCEPT-{id:02} {name}: {detail}");
}

fn l1_solution() -> (SpectralScenario, Contour, SheetSolution) {
    let s = fixtures::scenario_l1();
    let c = build_contour(
        &s,
        SheetIndex::all_minus(1),
        &[PathSpec::depth(0.5)],
        QuadratureRule::default(),
    )
    .unwrap();
    let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
    (s, c, sol)
}

fn default_solution(s: &SpectralScenario) -> (Contour, SheetSolution) {
    let c = build_contour(
        s,
        SheetIndex::all_minus(s.num_branches()),
        &fixtures::default_geometry(s, 1.0),
        QuadratureRule::default(),
    )
    .unwrap();
    let sol = solve_basic_equation(s, &c, SolveOptions::default()).unwrap();
    (c, sol)
}

#[test]
fn accept_01_scalar_lorentzian_resonance() {
    let (s, c, sol) = l1_solution();
    let expected = cplx(0.0, 0.5 * (-1.0 + (1.0f64 - 4.0 * 0.05).sqrt()));
    let got = sol.h1[(0, 0)];
    let err = (got - expected).norm();
    let small = m1_zero_census(
        &s,
        &c,
        Circle {
            center: expected,
            radius: 0.1,
        },
        128,
    )
    .unwrap();
    let d0_half = sol.certificate.d0 / 2.0;
    let big = m1_zero_census(
        &s,
        &c,
        Circle {
            center: cplx(0.0, 0.0),
            radius: d0_half,
        },
        256,
    )
    .unwrap();
    criterion(
        1,
        "scalar-lorentzian-resonance",
        err <= 1e-9 && small == 1 && big == 1,
        &format!(
            "|H1 − closed form| = {err:.3e} ≤ 1e-9; census 0.1-disk = {small}, d0/2-disk = {big}"
        ),
    );
}

#[test]
fn accept_02_residue_relation() {
    let rule = QuadratureRule {
        panels: 16,
        ..QuadratureRule::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut total = 0usize;
    for (s, geometry) in [
        (fixtures::polybump_scalar(0.02, 0.0), PathSpec::depth(0.4)),
        (fixtures::scenario_l1(), PathSpec::depth(0.5)),
    ] {
        let sheet = SheetIndex::all_minus(1);
        let c = build_contour(&s, sheet.clone(), &[geometry], rule).unwrap();
        let phys = physical_contour(&s, rule).unwrap();
        let points = sample_pocket_points(&s, &c, 100, &mut rng);
        assert!(points.len() == 100, "sampled {} points", points.len());
        for &z in &points {
            let cont = eval_m1_sheet(&s, &c, z).unwrap();
            let ph = eval_m1_sheet(&s, &phys, z).unwrap();
            let k = region_winding(&c, z).unwrap().branch.unwrap();
            let sign = sheet.sign(k) as f64;
            let kp = s.branches[k].eval_density(z, s.dim()).unwrap();
            let residue = kp.map(|x| x * Complex64::new(0.0, 2.0 * std::f64::consts::PI * sign));
            let defect = linalg::spectral_norm(&(&cont.value - &ph.value - residue));
            worst = worst.max(defect);
        }
        total += points.len();
    }
    criterion(
        2,
        "residue-relation",
        worst <= 1e-9,
        &format!("max defect over {total} pocket points = {worst:.3e} ≤ 1e-9"),
    );
}

#[test]
fn accept_03_certified_contraction() {
    let mut pass = true;
    let mut detail = String::new();
    for (name, s, geom) in [
        ("L1", fixtures::scenario_l1(), vec![PathSpec::depth(0.5)]),
        (
            "gap3x3",
            fixtures::gap_3x3(),
            fixtures::default_geometry(&fixtures::gap_3x3(), 1.0),
        ),
    ] {
        let c = build_contour(
            &s,
            SheetIndex::all_minus(s.num_branches()),
            &geom,
            QuadratureRule::default(),
        )
        .unwrap();
        let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
        let q = sol.certificate.contraction_rate.unwrap();
        let r_min = sol.certificate.r_min.unwrap();
        let informative = sol.iterations.saturating_sub(2);
        let max_ratio = sol
            .step_ratios
            .iter()
            .take(informative)
            .fold(0.0f64, |m, &r| m.max(r));
        let x_norm = linalg::spectral_norm(&sol.x);
        let ok = max_ratio <= q + 0.05 && x_norm <= r_min + 1e-10 && sol.final_residual <= 1e-12;
        pass &= ok;
        detail.push_str(&format!(
            "{name}: ratio {max_ratio:.4} ≤ q+0.05 = {:.4}, ‖X‖ = {x_norm:.4e} ≤ r_min+1e-10, residual {:.2e} ≤ 1e-12; ",
            q + 0.05,
            sol.final_residual
        ));
    }
    criterion(3, "certified-contraction", pass, &detail);
}

#[test]
fn accept_04_contour_independence() {
    let s = fixtures::scenario_l1();
    let rule = QuadratureRule::default();
    let shallow =
        build_contour(&s, SheetIndex::all_minus(1), &[PathSpec::depth(0.5)], rule).unwrap();
    let deep = build_contour(&s, SheetIndex::all_minus(1), &[PathSpec::depth(0.75)], rule).unwrap();
    let a = solve_basic_equation(&s, &shallow, SolveOptions::default()).unwrap();
    let b = solve_basic_equation(&s, &deep, SolveOptions::default()).unwrap();
    let diff = linalg::spectral_norm(&(&a.x - &b.x));
    criterion(
        4,
        "contour-independence",
        diff <= 1e-9,
        &format!("‖X(depth 0.5) − X(depth 0.75)‖ = {diff:.3e} ≤ 1e-9"),
    );
}

#[test]
fn accept_05_factorization() {
    let mut worst = 0.0f64;
    let mut inv_ok = true;
    let mut inv_detail = String::new();
    for (s, geom) in [
        (fixtures::scenario_l1(), vec![PathSpec::depth(0.5)]),
        (
            fixtures::gap_3x3(),
            fixtures::default_geometry(&fixtures::gap_3x3(), 1.0),
        ),
    ] {
        let c = build_contour(
            &s,
            SheetIndex::all_minus(s.num_branches()),
            &geom,
            QuadratureRule::default(),
        )
        .unwrap();
        let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
        let spec = s.a1_spectrum();
        let d0 = sol.certificate.d0;
        let lo = spec.values.first().unwrap() - d0;
        let hi = spec.values.last().unwrap() + d0;
        for i in 0..10 {
            for j in 0..10 {
                let z = Complex64::new(
                    lo + (hi - lo) * i as f64 / 9.0,
                    -d0 + 2.0 * d0 * j as f64 / 9.0,
                );
                if sheetsolve_core::contour::distance_to_integration_set(&s, &c, z) < 0.3 * d0 {
                    continue;
                }
                let rep = eval_w1(&s, &c, &sol, z).unwrap();
                worst = worst.max(rep.residual);
                if let Some(inv) = rep.w1_inverse_norm {
                    if inv > rep.inverse_bound * (1.0 + 1e-9) {
                        inv_ok = false;
                    }
                }
            }
        }
        // the rim of the d0/2 vicinity, where the theorem pins the bound
        for &ev in spec.values.iter() {
            let z = Complex64::new(ev, d0 / 2.0);
            let rep = eval_w1(&s, &c, &sol, z).unwrap();
            worst = worst.max(rep.residual);
            let inv = rep.w1_inverse_norm.expect("on the rim");
            if inv > rep.inverse_bound * (1.0 + 1e-9) {
                inv_ok = false;
            }
            inv_detail = format!("rim ‖W₁⁻¹‖ = {inv:.4} ≤ bound {:.4}", rep.inverse_bound);
        }
    }
    criterion(
        5,
        "factorization",
        worst <= 1e-9 && inv_ok,
        &format!("max ‖M₁ − W₁(H₁−z)‖ = {worst:.3e} ≤ 1e-9; {inv_detail}"),
    );
}

#[test]
fn accept_06_adjoint_omega_suite() {
    let mut pass = true;
    let mut detail = String::new();
    for (name, s) in [
        ("L1", fixtures::scenario_l1()),
        ("two-branch", fixtures::two_branch_resonance()),
    ] {
        let geom = if s.num_branches() == 1 {
            vec![PathSpec::depth(0.5)]
        } else {
            fixtures::default_geometry(&s, 1.0)
        };
        let c = build_contour(
            &s,
            SheetIndex::all_minus(s.num_branches()),
            &geom,
            QuadratureRule::default(),
        )
        .unwrap();
        let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
        let cr = reflect_contour(&s, &c).unwrap();
        let solr = solve_basic_equation(&s, &cr, SolveOptions::default()).unwrap();

        let sa: Vec<Complex64> = linalg::complex_eigenvalues(&sol.h1).unwrap();
        let sb: Vec<Complex64> = linalg::complex_eigenvalues(&solr.h1)
            .unwrap()
            .into_iter()
            .map(|v| v.conj())
            .collect();
        let hausdorff = linalg::hausdorff(&sa, &sb);

        let om = compute_omega(&s, &c, &sol, &solr).unwrap();
        let om_back = compute_omega(&s, &cr, &solr, &sol).unwrap();
        let adj = linalg::spectral_norm(&(&om_back.omega - om.omega.adjoint()));

        let circles = auto_moment_circles(&s, &c, &sol).unwrap();
        let mom = moment_functionals(&s, &c, &sol, &circles, 256).unwrap();
        let inv = linalg::lu_inverse(&(linalg::identity(s.dim()) + &om.omega)).unwrap();
        let m0 = linalg::spectral_norm(&(&mom.p0 - &inv));
        let m1a = linalg::spectral_norm(&(&mom.p1 - &inv * solr.h1.adjoint()));
        let m1b = linalg::spectral_norm(&(&mom.p1 - &sol.h1 * &inv));

        let ok = hausdorff <= 1e-8
            && adj <= 1e-9
            && om.norm < om.bound
            && om.norm < 1.0
            && m0.max(m1a).max(m1b) <= 1e-8;
        pass &= ok;
        detail.push_str(&format!(
            "{name}: Hausdorff {hausdorff:.2e}, ‖Ω⁻ˡ−Ωˡ*‖ {adj:.2e}, ‖Ω‖ {:.3} < {:.3}, moments {:.2e}; ",
            om.norm,
            om.bound,
            m0.max(m1a).max(m1b)
        ));
    }
    criterion(6, "adjoint-omega-suite", pass, &detail);
}

#[test]
fn accept_07_oracle_agreement() {
    let s = fixtures::gap_3x3();
    let (c, sol) = default_solution(&s);
    let spectrum = sheet_spectrum(&s, &c, &sol).unwrap();
    let isolated: Vec<f64> = spectrum
        .iter()
        .filter(|e| e.class == EigenClass::RealIsolated)
        .map(|e| e.value.re)
        .collect();
    assert_eq!(
        isolated.len(),
        3,
        "gap scenario has three isolated eigenvalues"
    );

    let err_at = |n: usize| -> f64 {
        let h = discretize_full(&s, n).unwrap();
        let mut worst = 0.0f64;
        for &lam in &isolated {
            let found = h.eigenvalues_in(-0.7, 0.7, 1e-13);
            let best = found
                .iter()
                .map(|&x| (x - lam).abs())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
        worst
    };
    let e2048 = err_at(2048);

    // convergence order on dyadic levels above the solver floor
    let floor = 10.0 * sol.quadrature_error + 1e-11;
    let mut order_ok = true;
    let mut chain = String::new();
    let mut prev = err_at(16);
    for n in [32usize, 64, 128] {
        let e = err_at(n);
        chain.push_str(&format!("{prev:.2e}→"));
        if prev > floor && e > floor && e > prev / 4.0 {
            order_ok = false;
        }
        prev = e;
    }
    chain.push_str(&format!("{prev:.2e}"));

    // lifted eigenvectors at N = 2048
    let h = discretize_full(&s, 2048).unwrap();
    let mut lift_worst = 0.0f64;
    for e in spectrum
        .iter()
        .filter(|e| e.class == EigenClass::RealIsolated)
    {
        for j in 0..e.root_vectors.ncols() {
            let psi =
                sheetsolve_core::CVector::from_column_slice(e.root_vectors.column(j).as_slice());
            let (_, resid) = h.lift_eigenvector(e.value.re, &psi).unwrap();
            lift_worst = lift_worst.max(resid);
        }
    }
    criterion(
        7,
        "oracle-agreement",
        e2048 <= 1e-6 && order_ok && lift_worst <= 1e-6,
        &format!(
            "eigenvalue mismatch at N=2048: {e2048:.3e} ≤ 1e-6; dyadic errors {chain} (≥4x/doubling above floor {floor:.1e}); lift residual {lift_worst:.3e} ≤ 1e-6"
        ),
    );
}

#[test]
fn accept_08_embedded_eigenvalue() {
    let fx = fixtures::decoupled_embedded();
    let s = &fx.scenario;
    let rule = QuadratureRule::default();
    let mut pass = true;
    let mut detail = String::new();

    let c_minus = build_contour(
        s,
        SheetIndex::all_minus(1),
        &fixtures::default_geometry(s, 1.0),
        rule,
    )
    .unwrap();
    let sol_minus = solve_basic_equation(s, &c_minus, SolveOptions::default()).unwrap();
    let c_plus = reflect_contour(s, &c_minus).unwrap();
    let sol_plus = solve_basic_equation(s, &c_plus, SolveOptions::default()).unwrap();
    let om = compute_omega(s, &c_minus, &sol_minus, &sol_plus).unwrap();

    for (c, sol) in [(&c_minus, &sol_minus), (&c_plus, &sol_plus)] {
        let spec = sheet_spectrum(s, c, sol).unwrap();
        let embedded: Vec<_> = spec
            .iter()
            .filter(|e| e.class == EigenClass::RealEmbedded)
            .collect();
        if embedded.len() != 1 || (embedded[0].value - cplx(fx.lambda, 0.0)).norm() > 1e-12 {
            pass = false;
        }
        // K'(λ)ψ must vanish exactly for the decoupled channel
        let kp = s.branches[0]
            .eval_density(cplx(fx.lambda, 0.0), s.dim())
            .unwrap();
        let psi = embedded[0].root_vectors.column(0).into_owned();
        let annihilation = (&kp * &psi).norm();
        if annihilation != 0.0 {
            pass = false;
        }
        let rp = real_point_analysis(s, c, sol, &om.omega, None, 5).unwrap();
        let emb = rp
            .entries
            .iter()
            .find(|e| e.class == EigenClass::RealEmbedded)
            .unwrap();
        if emb.omega_im_max > 1e-9 || emb.omega_re_min < -1e-9 {
            pass = false;
        }
        detail.push_str(&format!(
            "sheet {}: λ = {:.6}, ‖K'(λ)ψ‖ = {annihilation:.1e}, Ω-form Im ≤ {:.1e}, Re ≥ {:.1e}; ",
            sol.sheet, embedded[0].value.re, emb.omega_im_max, emb.omega_re_min
        ));
    }
    criterion(8, "embedded-eigenvalue", pass, &detail);
}

#[test]
fn accept_09_projections() {
    let mut pass = true;
    let mut detail = String::new();
    for (name, s) in [
        ("zero-coupling", fixtures::zero_coupling()),
        ("decoupled", fixtures::decoupled_embedded().scenario),
        ("gap3x3", fixtures::gap_3x3()),
    ] {
        let c = if name == "zero-coupling" {
            physical_contour(&s, QuadratureRule::default()).unwrap()
        } else {
            build_contour(
                &s,
                SheetIndex::all_minus(s.num_branches()),
                &fixtures::default_geometry(&s, 1.0),
                QuadratureRule::default(),
            )
            .unwrap()
        };
        let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
        let r_min = sol.certificate.r_min.unwrap();
        let r = (2.5 * r_min).max(0.05);
        let proj = riesz_projections(&s, &sol, r, 256).unwrap();
        let ok_base = proj.sum_defect <= 1e-9 && proj.idempotency_defect <= 1e-10;
        let mut ok_rank = true;
        if proj.rank_condition {
            ok_rank = proj.q_ranks == proj.p_ranks && proj.max_deviation < 1.0;
        }
        pass &= ok_base && ok_rank;
        detail.push_str(&format!(
            "{name}: ΣQ−I {:.1e}, orth {:.1e}, ranks {:?} vs {:?} (condition {}), max‖Q−P‖ {:.3}; ",
            proj.sum_defect,
            proj.idempotency_defect,
            proj.q_ranks,
            proj.p_ranks,
            proj.rank_condition,
            proj.max_deviation
        ));
    }
    criterion(9, "projections", pass, &detail);
}

#[test]
fn accept_10_completeness() {
    let mut pass = true;
    let mut detail = String::new();
    let scenarios: Vec<(&str, SpectralScenario)> = vec![
        ("L1", fixtures::scenario_l1()),
        ("polybump", fixtures::polybump_scalar(0.02, 0.0)),
        ("decoupled", fixtures::decoupled_embedded().scenario),
        ("gap3x3", fixtures::gap_3x3()),
        ("two-branch", fixtures::two_branch_resonance()),
        ("zero-coupling", fixtures::zero_coupling()),
    ];
    for (name, s) in scenarios {
        let c = build_contour(
            &s,
            SheetIndex::all_minus(s.num_branches()),
            &fixtures::default_geometry(&s, 1.0),
            QuadratureRule::default(),
        )
        .unwrap();
        let sol = solve_basic_equation(&s, &c, SolveOptions::default()).unwrap();
        let spec = sheet_spectrum(&s, &c, &sol).unwrap();
        let (smin, smax) = completeness_ratio(&spec, s.dim());
        let ok = smin > 1e-8 * smax;
        pass &= ok;
        detail.push_str(&format!("{name}: σ_min/σ_max = {:.2e}; ", smin / smax));
    }
    criterion(10, "completeness", pass, &detail);
}
