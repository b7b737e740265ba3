//! Scenario file schema: JSON with complex entries as `[re, im]` pairs,
//! interval ends as numbers or `"inf"`/`"-inf"`, profiles tagged by `type`,
//! and optional per-sheet contour geometry plus quadrature parameters.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use sheetsolve_core::contour::{PathSpec, QuadratureRule};
use sheetsolve_core::model::{
    ACBranch, AnalyticDensity, Atom, DensityTerm, Interval, ScalarProfile, SpectralScenario,
};
use sheetsolve_core::CMatrix;

#[derive(Debug, Serialize, Deserialize)]
pub struct ScenarioFile {
    /// Hermitian matrix, row-major, complex pairs.
    pub a1: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub atoms: Vec<AtomDto>,
    #[serde(default)]
    pub branches: Vec<BranchDto>,
    /// Contour geometry keyed by sheet string (e.g. `"-"`, `"-+"`), vertices
    /// per branch as `[re, im]` pairs.
    #[serde(default)]
    pub contours: BTreeMap<String, ContourDto>,
    #[serde(default)]
    pub rule: Option<RuleDto>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AtomDto {
    pub mu: f64,
    pub weight: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BranchDto {
    pub interval: [Bound; 2],
    pub terms: Vec<TermDto>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Number(f64),
    Named(String),
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TermDto {
    pub profile: ProfileDto,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProfileDto {
    PolyBump { c: f64, p: u32, q: u32 },
    Lorentz { c: f64, x0: f64, w: f64 },
    Gauss { c: f64, x0: f64, s: f64 },
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ContourDto {
    pub paths: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RuleDto {
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub panels: Option<usize>,
    #[serde(default)]
    pub target: Option<f64>,
    #[serde(default)]
    pub pole_margin: Option<f64>,
}

#[derive(Debug)]
pub struct LoadedScenario {
    pub scenario: SpectralScenario,
    pub rule: QuadratureRule,
    /// Explicit contour geometry per sheet string.
    pub contours: BTreeMap<String, Vec<PathSpec>>,
}

fn matrix_from_pairs(rows: &[Vec<[f64; 2]>], what: &str) -> Result<CMatrix, String> {
    let n = rows.len();
    if n == 0 {
        return Err(format!("{what}: empty matrix"));
    }
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(format!(
                "{what}: row {i} has {} entries, expected {n}",
                row.len()
            ));
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

fn bound_value(b: &Bound, side: &str) -> Result<f64, String> {
    match b {
        Bound::Number(x) => Ok(*x),
        Bound::Named(s) => match s.as_str() {
            "inf" | "+inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            other => Err(format!("interval {side} end: unknown sentinel {other:?}")),
        },
    }
}

impl ScenarioFile {
    pub fn into_loaded(self) -> Result<LoadedScenario, String> {
        let a1 = matrix_from_pairs(&self.a1, "a1")?;
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for (i, atom) in self.atoms.iter().enumerate() {
            atoms.push(Atom {
                position: atom.mu,
                weight: matrix_from_pairs(&atom.weight, &format!("atom {i} weight"))?,
            });
        }
        let mut branches = Vec::with_capacity(self.branches.len());
        for (k, branch) in self.branches.iter().enumerate() {
            let a = bound_value(&branch.interval[0], "left")?;
            let b = bound_value(&branch.interval[1], "right")?;
            let mut terms = Vec::with_capacity(branch.terms.len());
            for (t, term) in branch.terms.iter().enumerate() {
                let profile = match term.profile {
                    ProfileDto::PolyBump { c, p, q } => ScalarProfile::PolyBump { c, p, q },
                    ProfileDto::Lorentz { c, x0, w } => ScalarProfile::Lorentz { c, x0, w },
                    ProfileDto::Gauss { c, x0, s } => ScalarProfile::Gauss { c, x0, s },
                };
                terms.push(DensityTerm {
                    profile,
                    matrix: matrix_from_pairs(&term.matrix, &format!("branch {k} term {t}"))?,
                });
            }
            branches.push(ACBranch::new(
                Interval::new(a, b),
                AnalyticDensity::new(terms),
            ));
        }

        let mut rule = QuadratureRule::default();
        if let Some(r) = &self.rule {
            if let Some(v) = r.order {
                rule.order = v;
            }
            if let Some(v) = r.panels {
                rule.panels = v;
            }
            if let Some(v) = r.target {
                rule.target = v;
            }
            if let Some(v) = r.pole_margin {
                rule.pole_margin = v;
            }
        }

        let branch_count = branches.len();
        let mut contours = BTreeMap::new();
        for (sheet, dto) in &self.contours {
            if dto.paths.len() != branch_count {
                return Err(format!(
                    "contour {sheet:?} has {} paths, scenario has {branch_count} branches",
                    dto.paths.len()
                ));
            }
            let specs = dto
                .paths
                .iter()
                .map(|path| {
                    PathSpec::Vertices(
                        path.iter()
                            .map(|&[re, im]| Complex64::new(re, im))
                            .collect(),
                    )
                })
                .collect();
            contours.insert(sheet.clone(), specs);
        }

        Ok(LoadedScenario {
            scenario: SpectralScenario::new(a1, atoms, branches),
            rule,
            contours,
        })
    }
}

pub fn load(path: &std::path::Path) -> Result<LoadedScenario, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let file: ScenarioFile =
        serde_json::from_str(&text).map_err(|e| format!("invalid scenario JSON: {e}"))?;
    file.into_loaded()
}
