//! The interpolation operator `ℑ_m` and interpolation error norms.

use std::sync::Arc;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Element, Point2};
use crate::layer_potential::{BoundaryData, EvalMode, NystromOperator, OperatorCache};
use crate::linalg::{solve_dense, symmetric_eigenvalues, DenseLu};
use crate::mesh::Mesh;
use crate::poisson_space::{
    edge_basis, interior_functions, legendre, monomial_center, param_at_fraction, scaled_monomials, type2_nodes,
    EdgeTrace, EdgeVariant, LocalFunction, PiecewiseTrace, TraceShape,
};
use crate::quadrature::{gauss_legendre, interior_rule, InteriorRule};

/// Points used for edge moment right-hand sides.
pub const EDGE_GAUSS_POINTS: usize = 32;

/// Function to be interpolated.
pub trait Target: Sync {
    fn value(&self, x: Point2) -> f64;

    fn gradient(&self, _x: Point2) -> Option<Point2> {
        None
    }
}

impl<F: Fn(Point2) -> f64 + Sync> Target for F {
    fn value(&self, x: Point2) -> f64 {
        self(x)
    }
}

/// A target with an analytic gradient.
pub struct WithGradient<F, G>(pub F, pub G);

impl<F, G> Target for WithGradient<F, G>
where
    F: Fn(Point2) -> f64 + Sync,
    G: Fn(Point2) -> Point2 + Sync,
{
    fn value(&self, x: Point2) -> f64 {
        (self.0)(x)
    }

    fn gradient(&self, x: Point2) -> Option<Point2> {
        Some((self.1)(x))
    }
}

/// Coefficients of `g̃ = g(z) λ_z + g(z′) λ_z′ + Σ c_j b_j` on one edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeCoefficients {
    pub start: f64,
    pub end: f64,
    /// `c_2, ..., c_m`.
    pub bubbles: Vec<f64>,
}

impl EdgeCoefficients {
    pub fn degree(&self) -> usize {
        self.bubbles.len() + 1
    }

    /// `g̃` at arc-length fraction `sigma`.
    pub fn value(&self, sigma: f64) -> f64 {
        let u = 1.0 - 2.0 * sigma;
        let mut v = self.start * (1.0 - sigma) + self.end * sigma;
        for (k, c) in self.bubbles.iter().enumerate() {
            v += c * crate::poisson_space::integrated_legendre(k + 2, u).0;
        }
        v
    }

    /// Coefficients for the reversed edge: endpoints swap and `c_j` picks up `(-1)^j`.
    pub fn reversed(&self) -> Self {
        Self {
            start: self.end,
            end: self.start,
            bubbles: self.bubbles.iter().enumerate().map(|(k, c)| if k % 2 == 0 { *c } else { -c }).collect(),
        }
    }
}

/// Solves the moment conditions `∫_e (g̃ - g) L_i ds = 0`, `i ≤ m - 2`, given
/// `g` as a function of the arc-length fraction. Only the main and second
/// lower diagonals of the system are nonzero, so it is solved by forward
/// substitution.
pub fn edge_coefficients(g: impl Fn(f64) -> f64, m: usize) -> EdgeCoefficients {
    let (g0, g1) = (g(0.0), g(1.0));
    let mut bubbles = vec![0.0; m.saturating_sub(1)];
    if m >= 2 {
        let (gx, gw) = gauss_legendre(EDGE_GAUSS_POINTS);
        // u = 1 - 2σ; moments in du
        let resid: Vec<f64> = gx
            .iter()
            .map(|u| {
                let sigma = 0.5 * (1.0 - u);
                g(sigma) - g0 * (1.0 - sigma) - g1 * sigma
            })
            .collect();
        for i in 0..=m - 2 {
            let rhs: f64 = resid.iter().zip(gx.iter()).zip(gw.iter()).map(|((r, u), w)| w * r * legendre(i, *u)).sum();
            let norm = 2.0 / (2 * i + 1) as f64;
            let j = i + 2;
            let diag = -norm / (2 * j - 1) as f64;
            let mut r = rhs;
            if i >= 2 {
                r -= norm / (2 * i - 1) as f64 * bubbles[i - 2];
            }
            bubbles[j - 2] = r / diag;
        }
    }
    EdgeCoefficients { start: g0, end: g1, bubbles }
}

/// Edge interpolant of `g` on edge `edge` of `el`.
pub fn interpolate_edge(g: &dyn BoundaryData, el: &Element, edge: usize, m: usize) -> EdgeCoefficients {
    let e = el.edge(edge);
    edge_coefficients(
        |sigma| {
            let t = param_at_fraction(e, sigma);
            g.value(edge, t, e.point(t))
        },
        m,
    )
}

fn coefficient_traces(edge: usize, c: &EdgeCoefficients) -> Vec<(f64, EdgeTrace)> {
    let mut out = vec![
        (c.start, EdgeTrace { edge, shape: TraceShape::VertexHat { at_start: true } }),
        (c.end, EdgeTrace { edge, shape: TraceShape::VertexHat { at_start: false } }),
    ];
    for (k, cj) in c.bubbles.iter().enumerate() {
        out.push((*cj, EdgeTrace { edge, shape: TraceShape::Bubble { order: k + 2 } }));
    }
    out
}

/// Edge data of `ℑ^∂K v` on one edge: moment coefficients, or nodal values
/// for a curved Type 2 edge.
#[derive(Clone, Debug)]
pub enum EdgeInterpolant {
    Moments(EdgeCoefficients),
    Nodal(Vec<(f64, EdgeTrace)>),
}

fn boundary_trace(
    el: &Element,
    m: usize,
    variant: EdgeVariant,
    edge_value: &dyn Fn(usize, f64) -> f64,
) -> Result<(PiecewiseTrace, Vec<EdgeInterpolant>)> {
    let mut trace = PiecewiseTrace::zero(el);
    let mut parts = Vec::with_capacity(el.num_edges());
    for edge in 0..el.num_edges() {
        let e = el.edge(edge);
        if !e.is_straight() && variant == EdgeVariant::Type2 {
            let basis = edge_basis(el, edge, m, variant)?;
            let nodes = type2_nodes(e, m);
            let d = nodes.len();
            let mut order = vec![0, d - 1];
            order.extend(1..d - 1);
            let terms: Vec<(f64, EdgeTrace)> = order.iter().zip(basis).map(|(&k, tr)| (edge_value(edge, nodes[k].0), tr)).collect();
            for (c, tr) in &terms {
                trace.push(*c, tr.clone());
            }
            parts.push(EdgeInterpolant::Nodal(terms));
        } else {
            let c = edge_coefficients(|sigma| edge_value(edge, param_at_fraction(e, sigma)), m);
            for (cj, tr) in coefficient_traces(edge, &c) {
                trace.push(cj, tr);
            }
            parts.push(EdgeInterpolant::Moments(c));
        }
    }
    Ok((trace, parts))
}

/// Local interpolant together with its pieces and diagnostics.
#[derive(Clone, Debug)]
pub struct LocalInterpolant {
    pub function: LocalFunction,
    /// `ℑ^∂K v`, harmonic with the edge-interpolated trace.
    pub boundary: LocalFunction,
    pub edges: Vec<EdgeInterpolant>,
    /// Interior coefficients `c_β` and their multi-indices.
    pub interior: Vec<((u32, u32), f64)>,
    /// `∫_K φ_β p_β′`, rows `β′`, columns `β`.
    pub gram: Option<Mat<f64>>,
}

impl LocalInterpolant {
    /// Eigenvalues of the symmetric part of the interior system, ascending.
    pub fn gram_eigenvalues(&self) -> Result<Vec<f64>> {
        match &self.gram {
            Some(g) => symmetric_eigenvalues(g),
            None => Ok(Vec::new()),
        }
    }

    /// Largest relative asymmetry `|G - Gᵀ| / |G|` of the interior system.
    pub fn gram_asymmetry(&self) -> f64 {
        let Some(g) = &self.gram else { return 0.0 };
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                num = num.max((g[(i, j)] - g[(j, i)]).abs());
                den = den.max(g[(i, j)].abs());
            }
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }
}

fn complete_interior(
    op: &Arc<NystromOperator>,
    v: &dyn Target,
    m: usize,
    boundary: LocalFunction,
    edges: Vec<EdgeInterpolant>,
    rule: &InteriorRule,
) -> Result<LocalInterpolant> {
    if m < 2 {
        return Ok(LocalInterpolant { function: boundary.clone(), boundary, edges, interior: Vec::new(), gram: None });
    }
    let el = op.element();
    let center = monomial_center(el)?;
    let scale = el.diameter();
    let phis = interior_functions(op, m, center, scale)?;
    let mons = scaled_monomials(center, scale, m - 2);
    let k = phis.len();
    let resid: Vec<f64> = rule
        .nodes
        .iter()
        .map(|(x, _)| Ok(v.value(*x) - boundary.evaluate(*x, false, EvalMode::Refined)?.0))
        .collect::<Result<_>>()?;
    let phi_vals: Vec<Vec<f64>> = phis
        .iter()
        .map(|(_, f)| rule.nodes.iter().map(|(x, _)| f.value(*x)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mon_vals: Vec<Vec<f64>> = mons.iter().map(|(_, p)| rule.nodes.iter().map(|(x, _)| p.eval(*x)).collect()).collect();
    let w: Vec<f64> = rule.nodes.iter().map(|(_, w)| *w).collect();
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(&w).map(|((x, y), w)| x * y * w).sum() };
    let gram = Mat::from_fn(k, k, |i, j| dot(&mon_vals[i], &phi_vals[j]));
    let rhs: Vec<f64> = mon_vals.iter().map(|p| dot(p, &resid)).collect();
    let c = DenseLu::factor(&gram)
        .map_err(|_| Error::Singular("interior interpolation system".into()))?
        .solve(&rhs);
    let mut terms: Vec<(f64, &LocalFunction)> = vec![(1.0, &boundary)];
    terms.extend(c.iter().zip(&phis).map(|(ci, (_, f))| (*ci, f)));
    let function = LocalFunction::linear_combination(&terms)?;
    let interior = phis.iter().zip(&c).map(|((b, _), ci)| (*b, *ci)).collect();
    Ok(LocalInterpolant { function, boundary, edges, interior, gram: Some(gram) })
}

/// `ℑ_m v` on one element with Type 1 curved edges.
pub fn interpolate_local(v: &dyn Target, el: &Element, m: usize, n: usize, p: u32) -> Result<LocalInterpolant> {
    let op = NystromOperator::new(el.clone(), n, p)?;
    interpolate_with(&op, v, m, EdgeVariant::Type1)
}

/// `ℑ_m v` on the element of `op`.
pub fn interpolate_with(op: &Arc<NystromOperator>, v: &dyn Target, m: usize, variant: EdgeVariant) -> Result<LocalInterpolant> {
    if m < 1 {
        return Err(Error::InvalidArgument("polynomial degree m must be at least 1".into()));
    }
    let el = op.element();
    let edge_value = |edge: usize, t: f64| v.value(el.edge(edge).point(t));
    let (trace, edges) = boundary_trace(el, m, variant, &edge_value)?;
    let boundary = LocalFunction::harmonic(op.solve(Arc::new(trace))?, m);
    let rule = interior_rule(el)?;
    complete_interior(op, v, m, boundary, edges, &rule)
}

/// Interpolant in `V_{m,g,D}(K)`: the trace equals `g` on marked edges and
/// interpolates `v` on the others, with vertex values on marked edges taken
/// from `g`. Marked edges may be curved; unmarked ones must be straight.
pub fn interpolate_dirichlet(
    op: &Arc<NystromOperator>,
    marked: &[bool],
    g: Arc<dyn BoundaryData>,
    v: &dyn Target,
    m: usize,
) -> Result<LocalInterpolant> {
    let el = op.element();
    let nv = el.num_edges();
    if marked.len() != nv {
        return Err(Error::InvalidArgument(format!("{} edge markers for {} edges", marked.len(), nv)));
    }
    if !marked.iter().any(|b| *b) {
        return Err(Error::NoDirichletEdges);
    }
    if m < 1 {
        return Err(Error::InvalidArgument("polynomial degree m must be at least 1".into()));
    }
    for (i, e) in el.edges().iter().enumerate() {
        if !marked[i] && !e.is_straight() {
            return Err(Error::EdgeGeometry(format!("curved edge {i} is not a Dirichlet edge")));
        }
    }
    // vertex i starts edge i and ends edge i - 1
    let vertex_value = |i: usize| -> Option<f64> {
        if marked[i] {
            Some(g.value(i, 0.0, el.vertex(i)))
        } else if marked[(i + nv - 1) % nv] {
            Some(g.value((i + nv - 1) % nv, 1.0, el.vertex(i)))
        } else {
            None
        }
    };
    let mut trace = PiecewiseTrace::zero(el);
    let mut edges = Vec::with_capacity(nv);
    let mut data: Vec<(usize, Arc<dyn BoundaryData>)> = Vec::new();
    for edge in 0..nv {
        if marked[edge] {
            data.push((edge, g.clone()));
            edges.push(EdgeInterpolant::Moments(EdgeCoefficients { start: f64::NAN, end: f64::NAN, bubbles: Vec::new() }));
            continue;
        }
        let e = el.edge(edge);
        let s0 = vertex_value(edge);
        let s1 = vertex_value((edge + 1) % nv);
        let c = edge_coefficients(
            |sigma| {
                if sigma == 0.0 {
                    if let Some(s) = s0 {
                        return s;
                    }
                }
                if sigma == 1.0 {
                    if let Some(s) = s1 {
                        return s;
                    }
                }
                v.value(e.point(param_at_fraction(e, sigma)))
            },
            m,
        );
        for (cj, tr) in coefficient_traces(edge, &c) {
            trace.push(cj, tr);
        }
        edges.push(EdgeInterpolant::Moments(c));
    }
    let combined = DirichletTrace { polynomial: trace, exact: data };
    let boundary = LocalFunction::harmonic(op.solve(Arc::new(combined))?, m);
    let rule = interior_rule(el)?;
    complete_interior(op, v, m, boundary, edges, &rule)
}

struct DirichletTrace {
    polynomial: PiecewiseTrace,
    exact: Vec<(usize, Arc<dyn BoundaryData>)>,
}

impl BoundaryData for DirichletTrace {
    fn value(&self, edge: usize, t: f64, x: Point2) -> f64 {
        match self.exact.iter().find(|(e, _)| *e == edge) {
            Some((_, g)) => g.value(edge, t, x),
            None => self.polynomial.value(edge, t, x),
        }
    }
}

/// Interpolant on every cell of a mesh.
#[derive(Clone, Debug)]
pub struct Interpolant {
    pub m: usize,
    pub n: usize,
    pub p: u32,
    pub variant: EdgeVariant,
    pub cells: Vec<LocalFunction>,
    /// Bubble coefficients per global edge, oriented from the lower vertex id.
    pub edge_coefficients: Vec<Vec<f64>>,
}

impl Interpolant {
    pub fn cell(&self, i: usize) -> &LocalFunction {
        &self.cells[i]
    }
}

/// `ℑ_m v` on every cell; congruent cells share one factorization.
pub fn interpolate_mesh(mesh: &Mesh, v: &dyn Target, m: usize, cache: &OperatorCache) -> Result<Interpolant> {
    let locals: Vec<LocalInterpolant> = mesh
        .cells()
        .par_iter()
        .map(|cell| {
            let op = cache.operator(&cell.element)?;
            interpolate_with(&op, v, m, EdgeVariant::Type1)
        })
        .collect::<Result<_>>()?;
    let mut edge_coefficients = vec![Vec::new(); mesh.num_edges()];
    for (ci, loc) in locals.iter().enumerate() {
        let cell = &mesh.cells()[ci];
        for (side, part) in loc.edges.iter().enumerate() {
            if let EdgeInterpolant::Moments(c) = part {
                let (ge, forward) = cell.edges[side];
                let c = if forward { c.clone() } else { c.reversed() };
                if edge_coefficients[ge].is_empty() {
                    edge_coefficients[ge] = c.bubbles;
                }
            }
        }
    }
    Ok(Interpolant {
        m,
        n: cache.n(),
        p: cache.p(),
        variant: EdgeVariant::Type1,
        cells: locals.into_iter().map(|l| l.function).collect(),
        edge_coefficients,
    })
}

/// Squared errors and target norms on one cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub l2_sq: f64,
    pub h1_sq: f64,
    pub v_l2_sq: f64,
    pub v_h1_sq: f64,
}

impl std::ops::Add for CellError {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            l2_sq: self.l2_sq + o.l2_sq,
            h1_sq: self.h1_sq + o.h1_sq,
            v_l2_sq: self.v_l2_sq + o.v_l2_sq,
            v_h1_sq: self.v_h1_sq + o.v_h1_sq,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub l2_abs: f64,
    pub l2_rel: f64,
    /// `None` when the target has no gradient.
    pub h1_abs: Option<f64>,
    pub h1_rel: Option<f64>,
    pub cells: Vec<CellError>,
    pub dofs: usize,
    pub h_max: f64,
}

impl ErrorReport {
    pub fn from_cells(cells: Vec<CellError>, dofs: usize, h_max: f64, with_h1: bool) -> Self {
        let t = cells.iter().fold(CellError::default(), |a, b| a + *b);
        let rel = |a: f64, b: f64| if b > 0.0 { a / b } else { a };
        let (h1_abs, h1_rel) = if with_h1 {
            (Some(t.h1_sq.sqrt()), Some(rel(t.h1_sq.sqrt(), t.v_h1_sq.sqrt())))
        } else {
            (None, None)
        };
        Self { l2_abs: t.l2_sq.sqrt(), l2_rel: rel(t.l2_sq.sqrt(), t.v_l2_sq.sqrt()), h1_abs, h1_rel, cells, dofs, h_max }
    }
}

/// L2 and H1-seminorm errors of `f` against `v` on one cell, by the cell's
/// interior rule.
pub fn cell_error(v: &dyn Target, f: &LocalFunction, rule: &InteriorRule) -> Result<CellError> {
    let mut out = CellError::default();
    for (x, w) in &rule.nodes {
        let vg = v.gradient(*x);
        let (fv, fg) = f.evaluate(*x, vg.is_some(), EvalMode::Refined)?;
        let vv = v.value(*x);
        out.l2_sq += w * (vv - fv).powi(2);
        out.v_l2_sq += w * vv * vv;
        if let (Some(vg), Some(fg)) = (vg, fg) {
            out.h1_sq += w * (vg - fg).norm_squared();
            out.v_h1_sq += w * vg.norm_squared();
        }
    }
    Ok(out)
}

/// Error of a mesh interpolant.
pub fn error_norms(v: &dyn Target, interp: &Interpolant, mesh: &Mesh) -> Result<ErrorReport> {
    let cells: Vec<CellError> = mesh
        .cells()
        .par_iter()
        .zip(interp.cells.par_iter())
        .map(|(cell, f)| cell_error(v, f, &interior_rule(&cell.element)?))
        .collect::<Result<_>>()?;
    let with_h1 = v.gradient(mesh.cells()[0].element.centroid()).is_some();
    let dofs = crate::mesh::dof_map(mesh, interp.m)?.dim;
    Ok(ErrorReport::from_cells(cells, dofs, mesh.h_max(), with_h1))
}

/// Error of a single-element function.
pub fn element_error(v: &dyn Target, f: &LocalFunction, el: &Element) -> Result<ErrorReport> {
    let c = cell_error(v, f, &interior_rule(el)?)?;
    Ok(ErrorReport::from_cells(vec![c], 0, el.diameter(), v.gradient(el.centroid()).is_some()))
}

/// Coefficients of `g` in the hierarchical edge basis by the tangential
/// derivative formula `c_j = (2j-1)/2 ∫ g′ L_{j-1} ds` (arc-length fraction
/// `σ`, derivative in `σ`).
pub fn derivative_coefficients(dg: impl Fn(f64) -> f64, m: usize) -> Vec<f64> {
    let (gx, gw) = gauss_legendre(EDGE_GAUSS_POINTS);
    (2..=m)
        .map(|j| {
            // d/ds b_j = (2/|e|) L_{j-1}(u) with u decreasing in s; in σ,
            // c_j = -(2j-1)/4 ∫_{-1}^{1} g_σ(σ(u)) L_{j-1}(u) du
            let s: f64 = gx.iter().zip(gw.iter()).map(|(u, w)| w * dg(0.5 * (1.0 - u)) * legendre(j - 1, *u)).sum();
            -((2 * j - 1) as f64) / 4.0 * s
        })
        .collect()
}

/// Solves a small dense system; re-exported for the interior system checks.
pub fn solve_small(a: &Mat<f64>, b: &[f64]) -> Result<Vec<f64>> {
    solve_dense(a, b)
}
