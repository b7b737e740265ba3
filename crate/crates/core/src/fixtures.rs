//! Canonical scenarios used by tests, the verification matrix, and the CLI
//! examples. All numbers are chosen so the solvability condition
//! `𝒱₀(B,Γ) < d₀²/4` holds on the default contours.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::contour::PathSpec;
use crate::linalg::{cplx, CMatrix, CVector};
use crate::model::{
    ACBranch, AnalyticDensity, Atom, DensityTerm, Interval, ScalarProfile, SpectralScenario,
};

/// Scalar Lorentzian scenario: `A₁ = [0]`, one full-line branch with
/// density `(κ·w/π)/(μ²+w²)`, κ = 0.05, w = 1. Every quantity has a
/// residue-calculus closed form; the resonance on sheet `−` sits at
/// `i(−1+√(1−4κ))/2 ≈ −0.0527864i`.
pub fn scenario_l1() -> SpectralScenario {
    lorentz_scalar(0.05)
}

/// Scalar full-line Lorentz scenario with adjustable coupling.
pub fn lorentz_scalar(kappa: f64) -> SpectralScenario {
    SpectralScenario::new(
        CMatrix::from_element(1, 1, cplx(0.0, 0.0)),
        vec![],
        vec![ACBranch::new(
            Interval::full_line(),
            AnalyticDensity::new(vec![DensityTerm {
                profile: ScalarProfile::Lorentz {
                    c: kappa,
                    x0: 0.0,
                    w: 1.0,
                },
                matrix: CMatrix::from_element(1, 1, cplx(1.0, 0.0)),
            }]),
        )],
    )
}

/// Scalar PolyBump scenario on `(−1,1)` with `A₁ = [a1]`. With `a1` inside
/// the interval the eigenvalue is embedded and turns into a resonance on
/// the deformed sheets.
pub fn polybump_scalar(kappa: f64, a1: f64) -> SpectralScenario {
    SpectralScenario::new(
        CMatrix::from_element(1, 1, cplx(a1, 0.0)),
        vec![],
        vec![ACBranch::new(
            Interval::new(-1.0, 1.0),
            AnalyticDensity::new(vec![DensityTerm {
                profile: ScalarProfile::PolyBump {
                    c: kappa,
                    p: 1,
                    q: 1,
                },
                matrix: CMatrix::from_element(1, 1, cplx(1.0, 0.0)),
            }]),
        )],
    )
}

/// A scenario with an exactly decoupled channel: the first `A₁` eigenvector
/// is annihilated by every density matrix and atom weight, so its eigenvalue
/// stays an exact real embedded eigenvalue of every sheet solution.
pub struct DecoupledFixture {
    pub scenario: SpectralScenario,
    /// The exact embedded eigenvalue.
    pub lambda: f64,
    /// Index of the decoupled coordinate.
    pub channel: usize,
}

pub fn decoupled_embedded() -> DecoupledFixture {
    let a1 = CMatrix::from_diagonal(&CVector::from_vec(vec![cplx(0.2, 0.0), cplx(5.0, 0.0)]));
    let g = CMatrix::from_row_slice(
        2,
        2,
        &[
            cplx(0.0, 0.0),
            cplx(0.0, 0.0),
            cplx(0.0, 0.0),
            cplx(1.0, 0.0),
        ],
    );
    let atom_weight = CMatrix::from_row_slice(
        2,
        2,
        &[
            cplx(0.0, 0.0),
            cplx(0.0, 0.0),
            cplx(0.0, 0.0),
            cplx(0.005, 0.0),
        ],
    );
    let scenario = SpectralScenario::new(
        a1,
        vec![Atom {
            position: 3.0,
            weight: atom_weight,
        }],
        vec![ACBranch::new(
            Interval::new(-1.0, 1.0),
            AnalyticDensity::new(vec![DensityTerm {
                profile: ScalarProfile::PolyBump {
                    c: 0.01,
                    p: 1,
                    q: 1,
                },
                matrix: g,
            }]),
        )],
    );
    DecoupledFixture {
        scenario,
        lambda: 0.2,
        channel: 0,
    }
}

/// 3×3 gap scenario: two finite branches `(−2,−1)` and `(1,2)` plus one atom
/// at 4, with `σ(A₁)` inside the gap `(−1,1)`. All sheet solutions have three
/// real isolated eigenvalues, cross-checkable against the discretized
/// full-matrix oracle.
pub fn gap_3x3() -> SpectralScenario {
    let a1 = CMatrix::from_row_slice(
        3,
        3,
        &[
            cplx(0.10, 0.0),
            cplx(0.08, 0.0),
            cplx(0.0, 0.03),
            cplx(0.08, 0.0),
            cplx(-0.20, 0.0),
            cplx(0.05, 0.0),
            cplx(0.0, -0.03),
            cplx(0.05, 0.0),
            cplx(0.25, 0.0),
        ],
    );
    let g1 = CMatrix::from_row_slice(
        3,
        3,
        &[
            cplx(0.8, 0.0),
            cplx(0.2, 0.0),
            cplx(0.0, 0.0),
            cplx(0.2, 0.0),
            cplx(0.5, 0.0),
            cplx(0.1, 0.0),
            cplx(0.0, 0.0),
            cplx(0.1, 0.0),
            cplx(0.3, 0.0),
        ],
    );
    let g2 = CMatrix::from_row_slice(
        3,
        3,
        &[
            cplx(0.4, 0.0),
            cplx(0.1, 0.0),
            cplx(0.05, 0.0),
            cplx(0.1, 0.0),
            cplx(0.6, 0.0),
            cplx(0.2, 0.0),
            cplx(0.05, 0.0),
            cplx(0.2, 0.0),
            cplx(0.5, 0.0),
        ],
    );
    let u = 1.0 / 3.0f64.sqrt();
    let mut atom_weight = CMatrix::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            atom_weight[(i, j)] = cplx(0.03 * u * u, 0.0);
        }
    }
    SpectralScenario::new(
        a1,
        vec![Atom {
            position: 4.0,
            weight: atom_weight,
        }],
        vec![
            ACBranch::new(
                Interval::new(-2.0, -1.0),
                AnalyticDensity::new(vec![DensityTerm {
                    profile: ScalarProfile::PolyBump {
                        c: 0.12,
                        p: 1,
                        q: 1,
                    },
                    matrix: g1,
                }]),
            ),
            ACBranch::new(
                Interval::new(1.0, 2.0),
                AnalyticDensity::new(vec![DensityTerm {
                    profile: ScalarProfile::PolyBump {
                        c: 0.12,
                        p: 1,
                        q: 1,
                    },
                    matrix: g2,
                }]),
            ),
        ],
    )
}

/// Two-branch scenario with one embedded `A₁` eigenvalue per branch; both
/// turn into resonances, one per pocket, so cross-sheet coincidence
/// theorems have something to bite on. `m = 2` gives the full set of four
/// sheets.
pub fn two_branch_resonance() -> SpectralScenario {
    let a1 = CMatrix::from_diagonal(&CVector::from_vec(vec![cplx(-2.0, 0.0), cplx(2.0, 0.0)]));
    let g = CMatrix::from_row_slice(
        2,
        2,
        &[
            cplx(0.6, 0.0),
            cplx(0.25, 0.0),
            cplx(0.25, 0.0),
            cplx(0.6, 0.0),
        ],
    );
    let term = |c: f64| DensityTerm {
        profile: ScalarProfile::PolyBump { c, p: 1, q: 1 },
        matrix: g.clone(),
    };
    SpectralScenario::new(
        a1,
        vec![],
        vec![
            ACBranch::new(
                Interval::new(-3.0, -1.0),
                AnalyticDensity::new(vec![term(0.006)]),
            ),
            ACBranch::new(
                Interval::new(1.0, 3.0),
                AnalyticDensity::new(vec![term(0.006)]),
            ),
        ],
    )
}

/// Zero-coupling scenario: a branch with empty density and `σ(A₁)` outside
/// it. Every transfer evaluation is `A₁ − z` and the solver returns `X = 0`.
pub fn zero_coupling() -> SpectralScenario {
    SpectralScenario::new(
        CMatrix::from_diagonal(&CVector::from_vec(vec![cplx(1.0, 0.0), cplx(3.0, 0.0)])),
        vec![],
        vec![ACBranch::new(
            Interval::new(-0.5, 0.5),
            AnalyticDensity::default(),
        )],
    )
}

/// Deterministic random Hermitian matrix for property tests.
pub fn random_hermitian(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = cplx(rng.random_range(-1.0..1.0), 0.0);
        for j in (i + 1)..n {
            let v = cplx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    m
}

/// Default per-branch contour geometry: trapezoids on finite intervals and
/// horizontal lines/rays on infinite ones, at a depth that stays inside the
/// pole-free strip. `depth_scale` shrinks or deepens the whole family.
pub fn default_geometry(s: &SpectralScenario, depth_scale: f64) -> Vec<PathSpec> {
    s.branches
        .iter()
        .map(|b| {
            let strip = b.density.strip_halfwidth();
            let base = if b.interval.is_finite() {
                let len = b.interval.b - b.interval.a;
                let cap = if strip.is_finite() {
                    0.9 * strip
                } else {
                    f64::INFINITY
                };
                (0.2 * len).min(cap)
            } else if strip.is_finite() {
                0.5 * strip
            } else {
                0.5
            };
            PathSpec::depth(base * depth_scale)
        })
        .collect()
}

/// Complex point helper for tests and examples.
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
