//! Integration contours `σ′(A₀) ∪ Γ_l`: sheet multi-indices, endpoint-anchored
//! deformed paths with horizontal-ray legs on infinite intervals, composite
//! quadrature nodes, the modified variation `𝒱₀(B,Γ_l)`, the separation
//! distance `d₀(Γ)`, and membership in the pocket `D(Γ_l)`.
//!
//! Paths are polylines. A branch whose interval reaches `∓∞` carries a
//! horizontal ray at constant imaginary part starting at the outermost
//! vertex; quadrature truncates the ray at an abscissa chosen so the
//! analytic tail bound of the density stays below the rule target, while
//! distance and winding computations treat the ray as infinite.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{self, CMatrix};
use crate::model::{DensityError, ModelError, SpectralScenario};
use crate::quad::{self, QuadNode};

/// Composite Gauss–Legendre parameters plus accuracy targets.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureRule {
    /// Gauss–Legendre order per panel.
    pub order: usize,
    /// Panels per polyline segment (and per dyadic ray macro-panel).
    pub panels: usize,
    /// Absolute accuracy target per integral entry; also the tail budget.
    pub target: f64,
    /// Minimal allowed distance between a path and a density pole.
    pub pole_margin: f64,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule {
            order: 16,
            panels: 8,
            target: 1e-10,
            pole_margin: 1e-6,
        }
    }
}

/// Sheet multi-index `l = (l₁,…,l_m)` with entries ±1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SheetIndex(Vec<i8>);

impl SheetIndex {
    pub fn new(signs: Vec<i8>) -> Result<Self, ContourError> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(ContourError::BadSheetSign);
        }
        Ok(SheetIndex(signs))
    }

    pub fn all_minus(m: usize) -> Self {
        SheetIndex(vec![-1; m])
    }

    pub fn all_plus(m: usize) -> Self {
        SheetIndex(vec![1; m])
    }

    /// All `2^m` sheet indices in lexicographic order, `-` before `+`.
    pub fn enumerate(m: usize) -> Vec<SheetIndex> {
        let mut out = Vec::with_capacity(1 << m);
        for mask in 0..(1usize << m) {
            let signs = (0..m)
                .map(|k| {
                    if mask & (1 << (m - 1 - k)) == 0 {
                        -1
                    } else {
                        1
                    }
                })
                .collect();
            out.push(SheetIndex(signs));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sign(&self, branch: usize) -> i8 {
        self.0[branch]
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    /// The opposite sheet `−l`.
    pub fn flipped(&self) -> SheetIndex {
        SheetIndex(self.0.iter().map(|s| -s).collect())
    }

    /// Parses strings like `"-+"`; accepts ASCII `-`/`+` and U+2212.
    pub fn parse(s: &str) -> Result<Self, ContourError> {
        let mut signs = Vec::new();
        for ch in s.chars() {
            match ch {
                '+' => signs.push(1),
                '-' | '\u{2212}' => signs.push(-1),
                _ => return Err(ContourError::BadSheetSign),
            }
        }
        SheetIndex::new(signs)
    }
}

impl fmt::Display for SheetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            write!(f, "{}", if s > 0 { '+' } else { '-' })?;
        }
        Ok(())
    }
}

/// Which sheet a contour integrates for: the physical sheet is realized as
/// the degenerate contour whose paths equal the real intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sheet {
    Physical,
    Unphysical(SheetIndex),
}

impl fmt::Display for Sheet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sheet::Physical => write!(f, "physical"),
            Sheet::Unphysical(idx) => write!(f, "{idx}"),
        }
    }
}

/// Per-branch path geometry request.
#[derive(Debug, Clone)]
pub enum PathSpec {
    /// Explicit polyline. For a finite interval this is the full vertex list
    /// including both endpoints; on an infinite side the outermost vertex is
    /// the start of the horizontal ray.
    Vertices(Vec<Complex64>),
    /// Endpoint-anchored trapezoid at the given depth (finite interval) or a
    /// horizontal line/ray (infinite ends); the side comes from the sheet.
    Depth { depth: f64, shoulder: f64 },
}

impl PathSpec {
    pub fn depth(depth: f64) -> Self {
        PathSpec::Depth {
            depth,
            shoulder: 0.25,
        }
    }
}

/// One branch path: polyline vertices (anchored at finite endpoints) plus
/// horizontal-ray flags for infinite interval ends.
#[derive(Debug, Clone)]
pub struct BranchPath {
    pub vertices: Vec<Complex64>,
    pub left_ray: bool,
    pub right_ray: bool,
    /// Ray truncation abscissa: quadrature covers `|Re μ| ≤ truncation`.
    pub truncation: f64,
}

impl BranchPath {
    /// Polyline including ray truncation endpoints, left to right.
    pub fn truncated_polyline(&self) -> Vec<Complex64> {
        let mut pts = Vec::with_capacity(self.vertices.len() + 2);
        if self.left_ray {
            let first = self.vertices[0];
            pts.push(Complex64::new(-self.truncation, first.im));
        }
        pts.extend_from_slice(&self.vertices);
        if self.right_ray {
            let last = *self.vertices.last().unwrap();
            pts.push(Complex64::new(self.truncation, last.im));
        }
        pts
    }

    /// Exact distance from a point to the path, rays treated as infinite.
    pub fn distance(&self, z: Complex64) -> f64 {
        let mut d = f64::INFINITY;
        for pair in self.vertices.windows(2) {
            d = d.min(point_to_segment(z, pair[0], pair[1]));
        }
        if self.vertices.len() == 1 && !self.left_ray && !self.right_ray {
            d = d.min((z - self.vertices[0]).norm());
        }
        if self.left_ray {
            d = d.min(point_to_ray(z, self.vertices[0], -1.0));
        }
        if self.right_ray {
            d = d.min(point_to_ray(z, *self.vertices.last().unwrap(), 1.0));
        }
        d
    }
}

/// Distance from `z` to the closed segment `[a, b]`.
pub fn point_to_segment(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = ((z - a).re * ab.re + (z - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

/// Distance from `z` to the horizontal ray from `start` toward `dir·∞`.
fn point_to_ray(z: Complex64, start: Complex64, dir: f64) -> f64 {
    let dx = (z.re - start.re) * dir;
    if dx <= 0.0 {
        (z - start).norm()
    } else {
        (z.im - start.im).abs()
    }
}

/// A quadrature node enriched with the density value of its branch.
#[derive(Debug, Clone)]
pub struct ContourNode {
    pub mu: Complex64,
    pub weight: Complex64,
    pub branch: usize,
    /// `K′_B(μ)` of the owning branch, evaluated at the node.
    pub kprime: CMatrix,
    pub kprime_norm: f64,
}

/// The integration set `σ′(A₀) ∪ Γ_l` with its composite quadrature.
#[derive(Debug, Clone)]
pub struct Contour {
    pub sheet: Sheet,
    pub paths: Vec<BranchPath>,
    pub rule: QuadratureRule,
    dim: usize,
    nodes: Vec<ContourNode>,
    nodes_coarse: Vec<ContourNode>,
    /// Analytic bound on the variation mass beyond the ray truncations.
    tail_bound: f64,
    /// Smallest ray truncation abscissa, if any ray is present.
    min_truncation: Option<f64>,
    /// Per branch, the smallest distance from the path to a registered pole.
    pub pole_margins: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum ContourError {
    #[error("scenario is invalid: {0:?}")]
    InvalidScenario(Vec<ModelError>),
    #[error("sheet index entries must be +1 or -1")]
    BadSheetSign,
    #[error("sheet index length {got} does not match branch count {expected}")]
    SheetLength { expected: usize, got: usize },
    #[error("geometry count {got} does not match branch count {expected}")]
    GeometryCount { expected: usize, got: usize },
    #[error("branch {branch}: path needs at least one vertex")]
    EmptyPath { branch: usize },
    #[error("branch {branch}: {side} endpoint not anchored at the interval end")]
    UnanchoredEndpoint { branch: usize, side: &'static str },
    #[error("branch {branch}: vertex {vertex} lies on the wrong side for l_k={sign}")]
    WrongSide {
        branch: usize,
        vertex: usize,
        sign: i8,
    },
    #[error("branch {branch}: vertex {vertex} outside the pole-free strip (|Im| < {strip})")]
    OutsideStrip {
        branch: usize,
        vertex: usize,
        strip: f64,
    },
    #[error("branch {branch}: path passes within {distance:.3e} of a density pole (margin {margin:.3e})")]
    PoleCollision {
        branch: usize,
        distance: f64,
        margin: f64,
    },
    #[error("branch {branch}: {reason}")]
    RayGeometry { branch: usize, reason: String },
    #[error("branch {branch}: ray truncation cannot meet the tail budget")]
    TruncationFailure { branch: usize },
    #[error("density evaluation failed on the contour: {0}")]
    Density(#[from] DensityError),
    #[error("point lies on or within 1e-12 of the region boundary")]
    BoundaryProximity,
}

/// Pocket-membership result for a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindingReport {
    pub inside: bool,
    /// Branch whose pocket contains the point, when inside.
    pub branch: Option<usize>,
    pub winding: i32,
}

/// Modified variation `𝒱₀(B,Γ_l)` split into its parts.
#[derive(Debug, Clone, Copy)]
pub struct Variation {
    /// `discrete + contour_sum + tail`.
    pub total: f64,
    pub discrete: f64,
    pub contour_sum: f64,
    pub tail: f64,
    pub quadrature_error: f64,
}

/// Separation `d₀(Γ) = dist{σ(A₁), σ′(A₀) ∪ Γ}`.
#[derive(Debug, Clone, Copy)]
pub struct D0Report {
    pub value: f64,
    /// Set when an eigenvalue of `A₁` lies on the integration set.
    pub on_set: bool,
}

/// Builds a deformed contour for the given sheet, validating every path
/// invariant. Returns the contour with quadrature nodes and density values
/// attached.
pub fn build_contour(
    s: &SpectralScenario,
    sheet: SheetIndex,
    geometry: &[PathSpec],
    rule: QuadratureRule,
) -> Result<Contour, ContourError> {
    let report = s.validate();
    if !report.is_valid() {
        return Err(ContourError::InvalidScenario(report.errors));
    }
    if sheet.len() != s.num_branches() {
        return Err(ContourError::SheetLength {
            expected: s.num_branches(),
            got: sheet.len(),
        });
    }
    if geometry.len() != s.num_branches() {
        return Err(ContourError::GeometryCount {
            expected: s.num_branches(),
            got: geometry.len(),
        });
    }
    let mut paths = Vec::with_capacity(s.num_branches());
    for (k, branch) in s.branches.iter().enumerate() {
        let sign = sheet.sign(k);
        let vertices = match &geometry[k] {
            PathSpec::Vertices(v) => v.clone(),
            PathSpec::Depth { depth, shoulder } => {
                synth_depth_path(branch.interval, sign, *depth, *shoulder)
            }
        };
        let path = assemble_path(branch.interval, vertices)?;
        validate_path(s, k, sign, &path, &rule, false)?;
        paths.push(path);
    }
    finish_contour(s, Sheet::Unphysical(sheet), paths, rule)
}

/// The degenerate contour whose paths equal the real intervals; evaluating
/// the transfer function on it yields the physical-sheet values.
pub fn physical_contour(
    s: &SpectralScenario,
    rule: QuadratureRule,
) -> Result<Contour, ContourError> {
    let report = s.validate();
    if !report.is_valid() {
        return Err(ContourError::InvalidScenario(report.errors));
    }
    let mut paths = Vec::with_capacity(s.num_branches());
    for (k, branch) in s.branches.iter().enumerate() {
        let iv = branch.interval;
        let vertices = match (iv.left_infinite(), iv.right_infinite()) {
            (false, false) => vec![Complex64::from(iv.a), Complex64::from(iv.b)],
            (true, false) => vec![Complex64::from(iv.b)],
            (false, true) => vec![Complex64::from(iv.a)],
            (true, true) => vec![Complex64::from(0.0)],
        };
        let path = assemble_path(iv, vertices)?;
        validate_path(s, k, 0, &path, &rule, true)?;
        paths.push(path);
    }
    finish_contour(s, Sheet::Physical, paths, rule)
}

fn synth_depth_path(
    iv: crate::model::Interval,
    sign: i8,
    depth: f64,
    shoulder: f64,
) -> Vec<Complex64> {
    let h = sign as f64 * depth;
    match (iv.left_infinite(), iv.right_infinite()) {
        (false, false) => {
            let len = iv.b - iv.a;
            let sh = shoulder.clamp(0.05, 0.45) * len;
            vec![
                Complex64::from(iv.a),
                Complex64::new(iv.a + sh, h),
                Complex64::new(iv.b - sh, h),
                Complex64::from(iv.b),
            ]
        }
        (true, true) => vec![Complex64::new(0.0, h)],
        (true, false) => {
            let w = (4.0 * depth).max(1.0);
            vec![Complex64::new(iv.b - w, h), Complex64::from(iv.b)]
        }
        (false, true) => {
            let w = (4.0 * depth).max(1.0);
            vec![Complex64::from(iv.a), Complex64::new(iv.a + w, h)]
        }
    }
}

fn assemble_path(
    iv: crate::model::Interval,
    vertices: Vec<Complex64>,
) -> Result<BranchPath, ContourError> {
    Ok(BranchPath {
        vertices,
        left_ray: iv.left_infinite(),
        right_ray: iv.right_infinite(),
        truncation: 0.0,
    })
}

fn validate_path(
    s: &SpectralScenario,
    branch: usize,
    sign: i8,
    path: &BranchPath,
    rule: &QuadratureRule,
    physical: bool,
) -> Result<(), ContourError> {
    let iv = s.branches[branch].interval;
    let strip = s.branches[branch].density.strip_halfwidth();
    let v = &path.vertices;
    if v.is_empty() {
        return Err(ContourError::EmptyPath { branch });
    }
    let anchor_tol = 1e-12 * (1.0 + iv.a.abs().min(1e12) + iv.b.abs().min(1e12));

    // endpoint anchoring on finite sides
    if !path.left_ray {
        let first = v[0];
        if (first.re - iv.a).abs() > anchor_tol || first.im.abs() > anchor_tol {
            return Err(ContourError::UnanchoredEndpoint {
                branch,
                side: "left",
            });
        }
    }
    if !path.right_ray {
        let last = *v.last().unwrap();
        if (last.re - iv.b).abs() > anchor_tol || last.im.abs() > anchor_tol {
            return Err(ContourError::UnanchoredEndpoint {
                branch,
                side: "right",
            });
        }
    }

    // side and strip membership for every non-anchored vertex
    for (i, vv) in v.iter().enumerate() {
        let anchored = (!path.left_ray && i == 0) || (!path.right_ray && i + 1 == v.len());
        if anchored {
            continue;
        }
        if !physical && (vv.im == 0.0 || (vv.im > 0.0) != (sign > 0)) {
            return Err(ContourError::WrongSide {
                branch,
                vertex: i,
                sign,
            });
        }
        if vv.im.abs() >= strip {
            return Err(ContourError::OutsideStrip {
                branch,
                vertex: i,
                strip,
            });
        }
    }

    // ray geometry per the horizontal-ray theorem shape
    if path.left_ray {
        let start = v[0];
        if !physical && ((start.im > 0.0) != (sign > 0) || start.im == 0.0) {
            return Err(ContourError::WrongSide {
                branch,
                vertex: 0,
                sign,
            });
        }
        if v.iter().skip(1).any(|p| p.re <= start.re) {
            return Err(ContourError::RayGeometry {
                branch,
                reason: "vertices must lie strictly right of the left ray start".into(),
            });
        }
    }
    if path.right_ray {
        let start = *v.last().unwrap();
        if !physical && ((start.im > 0.0) != (sign > 0) || start.im == 0.0) {
            return Err(ContourError::WrongSide {
                branch,
                vertex: v.len() - 1,
                sign,
            });
        }
        if v.iter().take(v.len() - 1).any(|p| p.re >= start.re) {
            return Err(ContourError::RayGeometry {
                branch,
                reason: "vertices must lie strictly left of the right ray start".into(),
            });
        }
    }

    // pole safety margin against this branch's registered poles
    let poles = s.branches[branch].density.poles();
    if !poles.is_empty() {
        let mut min_d = f64::INFINITY;
        for pole in &poles {
            min_d = min_d.min(path.distance(*pole));
        }
        if min_d < rule.pole_margin {
            return Err(ContourError::PoleCollision {
                branch,
                distance: min_d,
                margin: rule.pole_margin,
            });
        }
    }
    Ok(())
}

fn finish_contour(
    s: &SpectralScenario,
    sheet: Sheet,
    mut paths: Vec<BranchPath>,
    rule: QuadratureRule,
) -> Result<Contour, ContourError> {
    let dim = s.dim();
    let mut tail_bound = 0.0;
    let mut min_truncation: Option<f64> = None;
    for (k, path) in paths.iter_mut().enumerate() {
        if path.left_ray || path.right_ray {
            let height = ray_height(path);
            let (t, tail) = choose_truncation(s, k, path, height, rule.target)
                .ok_or(ContourError::TruncationFailure { branch: k })?;
            path.truncation = t;
            tail_bound += tail;
            min_truncation = Some(min_truncation.map_or(t, |m: f64| m.min(t)));
        }
    }

    let nodes = generate_nodes(s, &paths, rule.order, rule.panels)?;
    let coarse_panels = (rule.panels / 2).max(1);
    let nodes_coarse = generate_nodes(s, &paths, rule.order, coarse_panels)?;

    let mut pole_margins = Vec::with_capacity(paths.len());
    for (k, path) in paths.iter().enumerate() {
        let poles = s.branches[k].density.poles();
        let d = poles
            .iter()
            .map(|p| path.distance(*p))
            .fold(f64::INFINITY, f64::min);
        pole_margins.push(d);
    }

    Ok(Contour {
        sheet,
        paths,
        rule,
        dim,
        nodes,
        nodes_coarse,
        tail_bound,
        min_truncation,
        pole_margins,
    })
}

fn ray_height(path: &BranchPath) -> f64 {
    let mut h = 0.0f64;
    if path.left_ray {
        h = h.max(path.vertices[0].im.abs());
    }
    if path.right_ray {
        h = h.max(path.vertices.last().unwrap().im.abs());
    }
    h
}

/// Analytic bound on `∫ ‖K′_B‖ |dμ|` over both ray tails beyond `|Re μ| = t`.
fn ray_tail_bound(s: &SpectralScenario, branch: usize, height: f64, t: f64) -> Option<f64> {
    let mut total = 0.0;
    for term in &s.branches[branch].density.terms {
        if let crate::model::ScalarProfile::Lorentz { c, x0, w } = term.profile {
            let reach = t - x0.abs();
            let gap2 = (w * w - height * height).max(0.0);
            if reach <= 2.0 * gap2.sqrt() || reach <= 1.0 {
                return None;
            }
            let beta = 1.0 - gap2 / (reach * reach);
            let norm = linalg::spectral_norm(&term.matrix);
            total += 2.0 * c * w * norm / (std::f64::consts::PI * beta * reach);
        }
    }
    Some(total)
}

fn choose_truncation(
    s: &SpectralScenario,
    branch: usize,
    path: &BranchPath,
    height: f64,
    target: f64,
) -> Option<(f64, f64)> {
    let vert_reach = path
        .vertices
        .iter()
        .map(|v| v.re.abs())
        .fold(0.0f64, f64::max);
    let pole_reach = s.branches[branch]
        .density
        .poles()
        .iter()
        .map(|p| p.re.abs() + 2.0 * p.im.abs())
        .fold(0.0f64, f64::max);
    let mut t = (vert_reach + pole_reach + 2.0).max(4.0);
    for _ in 0..600 {
        if let Some(tail) = ray_tail_bound(s, branch, height, t) {
            if tail <= 0.5 * target {
                return Some((t, tail));
            }
        }
        t *= 2.0;
        if !t.is_finite() {
            return None;
        }
    }
    None
}

fn generate_nodes(
    s: &SpectralScenario,
    paths: &[BranchPath],
    order: usize,
    panels: usize,
) -> Result<Vec<ContourNode>, ContourError> {
    let dim = s.dim();
    let mut raw: Vec<QuadNode> = Vec::new();
    for (k, path) in paths.iter().enumerate() {
        if path.left_ray {
            let start = path.vertices[0];
            let extent = path.truncation + start.re;
            let edges = quad::dyadic_edges(extent, 1.0);
            for pair in edges.windows(2).rev() {
                let a = start - Complex64::from(pair[1]);
                let b = start - Complex64::from(pair[0]);
                quad::segment_nodes(a, b, order, panels, k, &mut raw);
            }
        }
        for pair in path.vertices.windows(2) {
            if (pair[1] - pair[0]).norm() > 0.0 {
                quad::segment_nodes(pair[0], pair[1], order, panels, k, &mut raw);
            }
        }
        if path.right_ray {
            let start = *path.vertices.last().unwrap();
            let extent = path.truncation - start.re;
            let edges = quad::dyadic_edges(extent, 1.0);
            for pair in edges.windows(2) {
                let a = start + Complex64::from(pair[0]);
                let b = start + Complex64::from(pair[1]);
                quad::segment_nodes(a, b, order, panels, k, &mut raw);
            }
        }
    }
    let mut nodes = Vec::with_capacity(raw.len());
    for qn in raw {
        let kprime = s.branches[qn.branch].eval_density(qn.mu, dim)?;
        let kprime_norm = linalg::spectral_norm(&kprime);
        nodes.push(ContourNode {
            mu: qn.mu,
            weight: qn.weight,
            branch: qn.branch,
            kprime,
            kprime_norm,
        });
    }
    Ok(nodes)
}

impl Contour {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[ContourNode] {
        &self.nodes
    }

    pub fn nodes_coarse(&self) -> &[ContourNode] {
        &self.nodes_coarse
    }

    pub fn is_physical(&self) -> bool {
        matches!(self.sheet, Sheet::Physical)
    }

    pub fn sheet_index(&self) -> Option<&SheetIndex> {
        match &self.sheet {
            Sheet::Physical => None,
            Sheet::Unphysical(idx) => Some(idx),
        }
    }

    /// Variation mass beyond the ray truncations.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Bound on the tail of a resolvent-type integral `∫ K′(μ)/(z−μ) dμ`
    /// given the distance proxy `|Re z|`.
    pub fn tail_factor(&self, re_reach: f64) -> f64 {
        match self.min_truncation {
            None => 0.0,
            Some(t) => self.tail_bound / (t - re_reach).max(1.0),
        }
    }

    /// Tail bound for integrals with two resolvent-type factors.
    pub fn tail_factor2(&self, re_a: f64, re_b: f64) -> f64 {
        match self.min_truncation {
            None => 0.0,
            Some(t) => self.tail_bound / ((t - re_a).max(1.0) * (t - re_b).max(1.0)),
        }
    }

    /// Exact distance from a point to the union of the branch paths.
    pub fn distance_to_paths(&self, z: Complex64) -> f64 {
        self.paths
            .iter()
            .map(|p| p.distance(z))
            .fold(f64::INFINITY, f64::min)
    }
}

/// List of quadrature nodes and complex weights along `Γ_l`, traversing
/// each branch path from left endpoint to right endpoint.
pub fn quadrature_nodes(c: &Contour) -> Vec<(Complex64, Complex64)> {
    c.nodes().iter().map(|n| (n.mu, n.weight)).collect()
}

/// The modified variation `𝒱₀(B,Γ_l)`: atom mass plus `∫‖K′_B‖|dμ|` plus
/// the analytic tail bound, with a quadrature error estimate attached.
pub fn contour_variation(s: &SpectralScenario, c: &Contour) -> Variation {
    let discrete = s.discrete_variation();
    let fine: f64 = c
        .nodes()
        .iter()
        .map(|n| n.weight.norm() * n.kprime_norm)
        .sum();
    let coarse: f64 = c
        .nodes_coarse()
        .iter()
        .map(|n| n.weight.norm() * n.kprime_norm)
        .sum();
    Variation {
        total: discrete + fine + c.tail_bound(),
        discrete,
        contour_sum: fine,
        tail: c.tail_bound(),
        quadrature_error: (fine - coarse).abs() + c.tail_bound(),
    }
}

/// Distance from a complex point to the full integration set (atoms plus
/// paths, rays infinite).
pub fn distance_to_integration_set(s: &SpectralScenario, c: &Contour, z: Complex64) -> f64 {
    let mut d = c.distance_to_paths(z);
    for atom in &s.atoms {
        d = d.min((z - Complex64::from(atom.position)).norm());
    }
    d
}

/// `d₀(Γ) = dist{σ(A₁), σ′(A₀) ∪ Γ}`, exact over segments and rays.
pub fn separation_d0(s: &SpectralScenario, c: &Contour) -> D0Report {
    let spectrum = s.a1_spectrum();
    let mut d = f64::INFINITY;
    for &ev in &spectrum.values {
        d = d.min(distance_to_integration_set(s, c, Complex64::from(ev)));
    }
    if d < 1e-12 {
        D0Report {
            value: 0.0,
            on_set: true,
        }
    } else {
        D0Report {
            value: d,
            on_set: false,
        }
    }
}

/// Membership of `z` in the pocket `D(Γ_l)` between the branch intervals and
/// the deformed paths, computed as a winding number per branch.
pub fn region_winding(c: &Contour, z: Complex64) -> Result<WindingReport, ContourError> {
    if c.is_physical() {
        let d = c.distance_to_paths(z);
        if d < 1e-12 {
            return Err(ContourError::BoundaryProximity);
        }
        return Ok(WindingReport {
            inside: false,
            branch: None,
            winding: 0,
        });
    }
    for (k, path) in c.paths.iter().enumerate() {
        let polyline = path.truncated_polyline();
        let left_anchor = polyline[0].re;
        let right_anchor = polyline.last().unwrap().re;
        let mut polygon = vec![Complex64::from(left_anchor), Complex64::from(right_anchor)];
        polygon.extend(polyline.iter().rev());

        let mut near = f64::INFINITY;
        let n = polygon.len();
        for i in 0..n {
            let a = polygon[i];
            let b = polygon[(i + 1) % n];
            near = near.min(point_to_segment(z, a, b));
        }
        if near < 1e-12 {
            return Err(ContourError::BoundaryProximity);
        }

        let wn = winding_number(&polygon, z);
        if wn != 0 {
            return Ok(WindingReport {
                inside: wn.abs() == 1,
                branch: Some(k),
                winding: wn,
            });
        }
    }
    Ok(WindingReport {
        inside: false,
        branch: None,
        winding: 0,
    })
}

fn winding_number(polygon: &[Complex64], z: Complex64) -> i32 {
    let is_left = |a: Complex64, b: Complex64, p: Complex64| -> f64 {
        (b.re - a.re) * (p.im - a.im) - (p.re - a.re) * (b.im - a.im)
    };
    let mut wn = 0i32;
    let n = polygon.len();
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        if a.im <= z.im {
            if b.im > z.im && is_left(a, b, z) > 0.0 {
                wn += 1;
            }
        } else if b.im <= z.im && is_left(a, b, z) < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// The contour for the opposite sheet `−l`: every path replaced by its
/// complex conjugate. Densities are re-evaluated at the reflected nodes.
pub fn reflect_contour(s: &SpectralScenario, c: &Contour) -> Result<Contour, ContourError> {
    match &c.sheet {
        Sheet::Physical => physical_contour(s, c.rule),
        Sheet::Unphysical(idx) => {
            let specs: Vec<PathSpec> = c
                .paths
                .iter()
                .map(|p| PathSpec::Vertices(p.vertices.iter().map(|v| v.conj()).collect()))
                .collect();
            build_contour(s, idx.flipped(), &specs, c.rule)
        }
    }
}
