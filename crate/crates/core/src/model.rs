//! Scenario data: the Hermitian entry `A₁`, the discrete atoms of the
//! operator measure, and analytic densities on the absolutely continuous
//! branches.
//!
//! The measure `K_B(dμ)` is represented directly: atoms carry the composite
//! weights `K_s` on the discrete part, and every branch carries a density
//! `K′_B(μ) = Σ_j profile_j(μ)·G_j` built from scalar profiles that continue
//! to the complex plane by their closed-form expressions. Poles of the
//! profiles are registered so contours can be validated against them.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{self, CMatrix};

/// Max elementwise deviation tolerated in the Hermiticity check of `A₁`.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Relative floor on eigenvalues in positive-semidefiniteness checks.
pub const PSD_TOL: f64 = 1e-12;

/// An open interval on the real line; `a = −∞` and `b = +∞` are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Self {
        Interval { a, b }
    }

    pub fn full_line() -> Self {
        Interval {
            a: f64::NEG_INFINITY,
            b: f64::INFINITY,
        }
    }

    pub fn left_infinite(&self) -> bool {
        self.a == f64::NEG_INFINITY
    }

    pub fn right_infinite(&self) -> bool {
        self.b == f64::INFINITY
    }

    pub fn is_finite(&self) -> bool {
        !self.left_infinite() && !self.right_infinite()
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.a && x < self.b
    }

    pub fn closure_contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    /// Distance from a real point to the closed interval.
    pub fn distance(&self, x: f64) -> f64 {
        if self.closure_contains(x) {
            0.0
        } else if x < self.a {
            self.a - x
        } else {
            x - self.b
        }
    }
}

/// Scalar building block of a density, analytic by closed form.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarProfile {
    /// `c·(μ−a)^p·(b−μ)^q` on a finite interval `(a,b)`; entire.
    PolyBump { c: f64, p: u32, q: u32 },
    /// `(c·w/π)/((μ−x0)² + w²)`; rational with poles `x0 ± i·w`.
    Lorentz { c: f64, x0: f64, w: f64 },
    /// `c·exp(−((μ−x0)/s)²)`; entire, but growing along horizontal rays.
    Gauss { c: f64, x0: f64, s: f64 },
}

impl ScalarProfile {
    /// Closed-form evaluation at a complex point; continuation is literal
    /// evaluation for this family.
    pub fn eval(&self, mu: Complex64, iv: Interval) -> Complex64 {
        match *self {
            ScalarProfile::PolyBump { c, p, q } => {
                let left = mu - Complex64::from(iv.a);
                let right = Complex64::from(iv.b) - mu;
                Complex64::from(c) * left.powi(p as i32) * right.powi(q as i32)
            }
            ScalarProfile::Lorentz { c, x0, w } => {
                let d = mu - Complex64::from(x0);
                Complex64::from(c * w / std::f64::consts::PI) / (d * d + Complex64::from(w * w))
            }
            ScalarProfile::Gauss { c, x0, s } => {
                let t = (mu - Complex64::from(x0)) / Complex64::from(s);
                Complex64::from(c) * (-t * t).exp()
            }
        }
    }

    /// Registered poles (Lorentz only).
    pub fn poles(&self) -> Vec<Complex64> {
        match *self {
            ScalarProfile::Lorentz { x0, w, .. } => {
                vec![Complex64::new(x0, w), Complex64::new(x0, -w)]
            }
            _ => Vec::new(),
        }
    }

    /// Half-width of the maximal pole-free horizontal strip around ℝ.
    pub fn strip_halfwidth(&self) -> f64 {
        match *self {
            ScalarProfile::Lorentz { w, .. } => w,
            _ => f64::INFINITY,
        }
    }

    /// Power-law decay exponent along horizontal rays, where one exists.
    pub fn tail_exponent(&self) -> Option<f64> {
        match self {
            ScalarProfile::Lorentz { .. } => Some(2.0),
            _ => None,
        }
    }

    fn parameters_valid(&self) -> bool {
        match *self {
            ScalarProfile::PolyBump { c, p, q } => c > 0.0 && p >= 1 && q >= 1,
            ScalarProfile::Lorentz { c, w, x0 } => c > 0.0 && w > 0.0 && x0.is_finite(),
            ScalarProfile::Gauss { c, s, x0 } => c > 0.0 && s > 0.0 && x0.is_finite(),
        }
    }
}

/// One `profile·G` term of a matrix-valued density.
#[derive(Debug, Clone)]
pub struct DensityTerm {
    pub profile: ScalarProfile,
    pub matrix: CMatrix,
}

/// Matrix-valued density `K′_B` on a single branch.
#[derive(Debug, Clone, Default)]
pub struct AnalyticDensity {
    pub terms: Vec<DensityTerm>,
}

impl AnalyticDensity {
    pub fn new(terms: Vec<DensityTerm>) -> Self {
        AnalyticDensity { terms }
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.terms.iter().flat_map(|t| t.profile.poles()).collect()
    }

    pub fn strip_halfwidth(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.profile.strip_halfwidth())
            .fold(f64::INFINITY, f64::min)
    }

    /// Decay exponent on an infinite interval, minimum over terms.
    pub fn tail_exponent(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.profile.tail_exponent().unwrap_or(0.0))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("evaluation point within {margin:.3e} of a registered pole at {pole}")]
    PoleHit { pole: Complex64, margin: f64 },
    #[error("evaluation point outside the declared pole-free strip |Im μ| < {strip:.6}")]
    OutsideStrip { strip: f64 },
}

/// One absolutely continuous branch `Δ_k⁰` with its density.
#[derive(Debug, Clone)]
pub struct ACBranch {
    pub interval: Interval,
    pub density: AnalyticDensity,
}

impl ACBranch {
    pub fn new(interval: Interval, density: AnalyticDensity) -> Self {
        ACBranch { interval, density }
    }

    /// Evaluates `K′_B` at a complex point by the closed forms.
    pub fn eval_density(&self, mu: Complex64, dim: usize) -> Result<CMatrix, DensityError> {
        let strip = self.density.strip_halfwidth();
        if mu.im.abs() >= strip {
            return Err(DensityError::OutsideStrip { strip });
        }
        for pole in self.density.poles() {
            if (mu - pole).norm() < 1e-12 {
                return Err(DensityError::PoleHit {
                    pole,
                    margin: 1e-12,
                });
            }
        }
        let mut out = CMatrix::zeros(dim, dim);
        for term in &self.density.terms {
            let f = term.profile.eval(mu, self.interval);
            out += term.matrix.map(|g| g * f);
        }
        Ok(out)
    }

    /// A magnitude scale for the density, used to normalize tolerances:
    /// the max of `‖K′_B‖` over a real sample of the branch.
    pub fn density_scale(&self, dim: usize) -> f64 {
        let (lo, hi) = self.sample_window();
        let mut scale = 0.0f64;
        for k in 0..=128 {
            let x = lo + (hi - lo) * k as f64 / 128.0;
            if let Ok(m) = self.eval_density(Complex64::from(x), dim) {
                scale = scale.max(linalg::spectral_norm(&m));
            }
        }
        scale
    }

    fn sample_window(&self) -> (f64, f64) {
        let lo = if self.interval.left_infinite() {
            -10.0
        } else {
            self.interval.a
        };
        let hi = if self.interval.right_infinite() {
            10.0
        } else {
            self.interval.b
        };
        (lo.min(hi - 1e-9), hi.max(lo + 1e-9))
    }
}

/// A discrete atom of the measure: position on `σ′(A₀)` and PSD weight.
#[derive(Debug, Clone)]
pub struct Atom {
    pub position: f64,
    pub weight: CMatrix,
}

/// The full operator scenario: `A₁`, atoms, and AC branches.
#[derive(Debug, Clone)]
pub struct SpectralScenario {
    pub a1: CMatrix,
    pub atoms: Vec<Atom>,
    pub branches: Vec<ACBranch>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("a1 is not Hermitian: max deviation {deviation:.3e}")]
    NonHermitian { deviation: f64 },
    #[error("atom {index} weight is not PSD: min eigenvalue {min_eig:.3e}")]
    NonPsdAtomWeight { index: usize, min_eig: f64 },
    #[error("atom {index} weight has wrong dimension")]
    AtomDimension { index: usize },
    #[error("branch {branch} term {term} matrix is not PSD: min eigenvalue {min_eig:.3e}")]
    NonPsdDensityMatrix {
        branch: usize,
        term: usize,
        min_eig: f64,
    },
    #[error("branch {branch} term {term} matrix has wrong dimension")]
    DensityDimension { branch: usize, term: usize },
    #[error("branch {branch} term {term} profile parameters invalid")]
    InvalidProfileParameters { branch: usize, term: usize },
    #[error("branch {branch} interval is empty or reversed")]
    EmptyInterval { branch: usize },
    #[error("branch intervals {first} and {second} overlap or are out of order")]
    OverlappingIntervals { first: usize, second: usize },
    #[error("only the first branch may extend to −∞ and only the last to +∞ (branch {branch})")]
    MisplacedInfiniteEnd { branch: usize },
    #[error("atom {atom} at μ={position} lies inside the closure of branch {branch}")]
    AtomInsideBranch {
        atom: usize,
        position: f64,
        branch: usize,
    },
    #[error("atoms {first} and {second} share the position μ={position}")]
    DuplicateAtomPosition {
        first: usize,
        second: usize,
        position: f64,
    },
    #[error("eigenvalue {eigenvalue} of a1 coincides with the atom at μ={position}")]
    EigenvalueAtAtom { eigenvalue: f64, position: f64 },
    #[error("branch {branch} term {term}: {reason}")]
    InadmissibleProfile {
        branch: usize,
        term: usize,
        reason: String,
    },
}

/// Outcome of `validate_scenario`: all violations plus derived metadata.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub errors: Vec<ModelError>,
    pub warnings: Vec<String>,
    pub a1_eigenvalues: Vec<f64>,
    pub poles: Vec<Complex64>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Ascending eigenvalues of `A₁` with orthonormal eigenvectors and
/// multiplicity clusters.
#[derive(Debug, Clone)]
pub struct A1Spectrum {
    /// Ascending eigenvalues, one entry per eigenvalue counting multiplicity.
    pub values: Vec<f64>,
    /// Orthonormal eigenvector columns matching `values`.
    pub vectors: CMatrix,
    /// Distinct eigenvalues with multiplicities, ascending.
    pub clusters: Vec<(f64, usize)>,
}

impl SpectralScenario {
    pub fn new(a1: CMatrix, atoms: Vec<Atom>, branches: Vec<ACBranch>) -> Self {
        SpectralScenario {
            a1,
            atoms,
            branches,
        }
    }

    /// Dimension `n` of the `A₁` channel.
    pub fn dim(&self) -> usize {
        self.a1.nrows()
    }

    pub fn num_branches(&self) -> usize {
        self.branches.len()
    }

    /// All registered density poles across branches.
    pub fn poles(&self) -> Vec<Complex64> {
        self.branches
            .iter()
            .flat_map(|b| b.density.poles())
            .collect()
    }

    /// Copy with every atom weight and density matrix scaled by `t ≥ 0`,
    /// i.e. the coupling strength `B` scaled by `√t`.
    pub fn scaled(&self, t: f64) -> SpectralScenario {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                position: a.position,
                weight: a.weight.map(|x| x * t),
            })
            .collect();
        let branches = self
            .branches
            .iter()
            .map(|b| ACBranch {
                interval: b.interval,
                density: AnalyticDensity::new(
                    b.density
                        .terms
                        .iter()
                        .map(|tm| DensityTerm {
                            profile: tm.profile.clone(),
                            matrix: tm.matrix.map(|x| x * t),
                        })
                        .collect(),
                ),
            })
            .collect();
        SpectralScenario {
            a1: self.a1.clone(),
            atoms,
            branches,
        }
    }

    /// Sum of spectral norms of the atom weights: the restriction of the
    /// variation to the discrete part of the measure.
    pub fn discrete_variation(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| linalg::spectral_norm(&a.weight))
            .sum()
    }

    /// Ascending spectrum of `A₁` with orthonormal eigenvectors.
    pub fn a1_spectrum(&self) -> A1Spectrum {
        let (values, vectors) = linalg::hermitian_eigen(&self.a1);
        let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-10 * scale;
        let mut clusters: Vec<(f64, usize)> = Vec::new();
        for &v in &values {
            match clusters.last_mut() {
                Some((c, m)) if (v - *c).abs() <= tol => {
                    *c = (*c * *m as f64 + v) / (*m as f64 + 1.0);
                    *m += 1;
                }
                _ => clusters.push((v, 1)),
            }
        }
        A1Spectrum {
            values,
            vectors,
            clusters,
        }
    }

    /// Full invariant check; returns every violation plus derived metadata.
    pub fn validate(&self) -> ValidationReport {
        let mut errors = Vec::new();
        let mut warnings = Vec::new();
        let n = self.dim();

        let deviation = linalg::hermiticity_defect(&self.a1);
        let a1_scale = linalg::spectral_norm(&self.a1).max(1.0);
        if deviation > HERMITICITY_TOL * a1_scale {
            errors.push(ModelError::NonHermitian { deviation });
        }

        for (i, atom) in self.atoms.iter().enumerate() {
            if atom.weight.nrows() != n || atom.weight.ncols() != n {
                errors.push(ModelError::AtomDimension { index: i });
                continue;
            }
            let norm = linalg::spectral_norm(&atom.weight);
            let (eigs, _) = linalg::hermitian_eigen(&atom.weight);
            let min_eig = eigs.first().copied().unwrap_or(0.0);
            if min_eig < -PSD_TOL * norm.max(1e-300) {
                errors.push(ModelError::NonPsdAtomWeight { index: i, min_eig });
            }
        }
        for (i, a) in self.atoms.iter().enumerate() {
            for (j, b) in self.atoms.iter().enumerate().skip(i + 1) {
                if (a.position - b.position).abs() < 1e-12 {
                    errors.push(ModelError::DuplicateAtomPosition {
                        first: i,
                        second: j,
                        position: a.position,
                    });
                }
            }
        }

        for (k, branch) in self.branches.iter().enumerate() {
            // negated comparisons so NaN endpoints fail validation too
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(branch.interval.a < branch.interval.b) {
                errors.push(ModelError::EmptyInterval { branch: k });
            }
            if (branch.interval.left_infinite() && k != 0)
                || (branch.interval.right_infinite() && k + 1 != self.branches.len())
            {
                errors.push(ModelError::MisplacedInfiniteEnd { branch: k });
            }
            if k + 1 < self.branches.len() {
                let next = &self.branches[k + 1];
                #[allow(clippy::neg_cmp_op_on_partial_ord)]
                if !(branch.interval.b <= next.interval.a) {
                    errors.push(ModelError::OverlappingIntervals {
                        first: k,
                        second: k + 1,
                    });
                }
            }
            for (t, term) in branch.density.terms.iter().enumerate() {
                if term.matrix.nrows() != n || term.matrix.ncols() != n {
                    errors.push(ModelError::DensityDimension { branch: k, term: t });
                    continue;
                }
                if !term.profile.parameters_valid() {
                    errors.push(ModelError::InvalidProfileParameters { branch: k, term: t });
                }
                let norm = linalg::spectral_norm(&term.matrix);
                let (eigs, _) = linalg::hermitian_eigen(&term.matrix);
                let min_eig = eigs.first().copied().unwrap_or(0.0);
                if min_eig < -PSD_TOL * norm.max(1e-300) {
                    errors.push(ModelError::NonPsdDensityMatrix {
                        branch: k,
                        term: t,
                        min_eig,
                    });
                }
                if branch.interval.is_finite() {
                    if !matches!(term.profile, ScalarProfile::PolyBump { .. }) {
                        errors.push(ModelError::InadmissibleProfile {
                            branch: k,
                            term: t,
                            reason: "profile does not vanish at the finite endpoints; \
                                     only PolyBump is admissible on a finite interval"
                                .into(),
                        });
                    }
                } else {
                    match term.profile {
                        ScalarProfile::Lorentz { .. } => {}
                        ScalarProfile::PolyBump { .. } => {
                            errors.push(ModelError::InadmissibleProfile {
                                branch: k,
                                term: t,
                                reason: "PolyBump diverges on an infinite interval".into(),
                            });
                        }
                        ScalarProfile::Gauss { .. } => {
                            errors.push(ModelError::InadmissibleProfile {
                                branch: k,
                                term: t,
                                reason: "Gauss modulus grows without bound along horizontal \
                                         rays; inadmissible on an infinite interval"
                                    .into(),
                            });
                        }
                    }
                }
            }
        }

        for (i, atom) in self.atoms.iter().enumerate() {
            for (k, branch) in self.branches.iter().enumerate() {
                if branch.interval.closure_contains(atom.position) {
                    errors.push(ModelError::AtomInsideBranch {
                        atom: i,
                        position: atom.position,
                        branch: k,
                    });
                }
            }
        }

        let spectrum = self.a1_spectrum();
        for &ev in &spectrum.values {
            for atom in &self.atoms {
                if (ev - atom.position).abs() < 1e-10 * a1_scale {
                    errors.push(ModelError::EigenvalueAtAtom {
                        eigenvalue: ev,
                        position: atom.position,
                    });
                }
            }
        }
        for (k, branch) in self.branches.iter().enumerate() {
            if !spectrum
                .values
                .iter()
                .any(|&ev| branch.interval.contains(ev))
            {
                warnings.push(format!("branch {k} meets no A1 eigenvalue"));
            }
        }

        ValidationReport {
            errors,
            warnings,
            a1_eigenvalues: spectrum.values,
            poles: self.poles(),
        }
    }
}
