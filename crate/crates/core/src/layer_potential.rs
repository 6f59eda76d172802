//! Double-layer potentials on curvilinear polygons.
//!
//! A harmonic function `w` with boundary trace `g` is represented as
//! `w(x) = -∫ F(x, y) φ(y) ds(y)` with `F(x, y) = -(x - y)·n(y) / (2π|x - y|²)`.
//! The density `φ` solves a second-kind equation which is discretized by a
//! Nyström method on the graded boundary rule. Each row subtracts the density
//! at the nearest vertex, which keeps the integrand bounded near corners.
//!
//! Points close to the boundary are evaluated with a locally refined rule: the
//! density is carried to a finer graded grid on the nearby edges through the
//! Nyström interpolation formula, so the trapezoid sums stay accurate down to
//! a small multiple of the node spacing.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::{Arc, Mutex};

use faer::Mat;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{EdgeKind, Element, Location, Point2};
use crate::linalg::{mat_vec, DenseLu};
use crate::quadrature::{kress_edge_nodes, kress_rule, sigmoid_inverse, sigmoid_max_derivative, sigmoid_unchecked, KressNode, KressRule};

/// Systems whose condition estimate exceeds this are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Relative residual `‖Aφ + g‖∞ / ‖g‖∞` accepted after the solve.
pub const RESIDUAL_LIMIT: f64 = 1e-10;

/// Evaluation points closer than this many local node spacings are flagged.
pub const NEAR_BOUNDARY_SPACINGS: f64 = 2.0;

/// Required ratio between distance to an edge and the local node spacing.
pub const REFINEMENT_RATIO: f64 = 4.0;

/// Largest refinement factor of the near-boundary rule.
pub const MAX_REFINEMENT: usize = 64;

/// Dirichlet data given per boundary point as `(edge, parameter, point)`.
pub trait BoundaryData: Send + Sync {
    fn value(&self, edge: usize, t: f64, x: Point2) -> f64;
}

impl<F> BoundaryData for F
where
    F: Fn(usize, f64, Point2) -> f64 + Send + Sync,
{
    fn value(&self, edge: usize, t: f64, x: Point2) -> f64 {
        self(edge, t, x)
    }
}

/// Trace of a function defined on the plane.
pub struct PointData<F>(pub F);

impl<F> BoundaryData for PointData<F>
where
    F: Fn(Point2) -> f64 + Send + Sync,
{
    fn value(&self, _edge: usize, _t: f64, x: Point2) -> f64 {
        (self.0)(x)
    }
}

pub fn point_data<F>(f: F) -> Arc<dyn BoundaryData>
where
    F: Fn(Point2) -> f64 + Send + Sync + 'static,
{
    Arc::new(PointData(f))
}

/// Linear combination of boundary data.
#[derive(Clone)]
pub struct CombinedData(pub Vec<(f64, Arc<dyn BoundaryData>)>);

impl BoundaryData for CombinedData {
    fn value(&self, edge: usize, t: f64, x: Point2) -> f64 {
        self.0.iter().map(|(c, d)| c * d.value(edge, t, x)).sum()
    }
}

/// Largest jump of the data across vertices.
pub fn vertex_jump(el: &Element, g: &dyn BoundaryData) -> f64 {
    let n = el.num_edges();
    (0..n)
        .map(|i| {
            let prev = (i + n - 1) % n;
            let v = el.vertex(i);
            (g.value(prev, 1.0, v) - g.value(i, 0.0, v)).abs()
        })
        .fold(0.0, f64::max)
}

pub fn double_layer_kernel(x: Point2, y: Point2, n_y: Point2) -> f64 {
    let r = x - y;
    -r.dot(n_y) / (2.0 * PI * r.norm_squared())
}

/// Gradient of [`double_layer_kernel`] with respect to `x`.
pub fn kernel_gradient(x: Point2, y: Point2, n_y: Point2) -> Point2 {
    let r = x - y;
    let r2 = r.norm_squared();
    (n_y * (-r2) + r * (2.0 * r.dot(n_y))) / (2.0 * PI * r2 * r2)
}

/// Kernel between two nodes of a rule, with the coincident and same-edge
/// limits filled in.
pub fn node_kernel(rule: &KressRule, i: usize, j: usize) -> Result<f64> {
    let a = rule.node(i);
    let b = rule.node(j);
    if i == j {
        if a.is_vertex {
            return Err(Error::KernelAtVertex(i));
        }
        return Ok(a.curvature / (4.0 * PI));
    }
    let edges = rule.num_edges();
    if shares_straight_edge(rule, edges, a, b) {
        return Ok(0.0);
    }
    Ok(double_layer_kernel(a.point, b.point, b.normal))
}

fn shares_straight_edge(rule: &KressRule, edges: usize, a: &KressNode, b: &KressNode) -> bool {
    let on = |q: &KressNode, e: usize| q.edge == e || (q.is_vertex && (q.edge + edges - 1) % edges == e);
    (on(a, b.edge) && rule.edge_is_straight(b.edge)) || (on(b, a.edge) && rule.edge_is_straight(a.edge))
}

/// Vertex node nearest to node `i` along the boundary. At the exact midpoint
/// of an edge the start vertex wins.
pub fn nearest_vertex(rule: &KressRule, i: usize) -> usize {
    let q = rule.node(i);
    if q.is_vertex {
        return i;
    }
    nearest_vertex_of(rule, q.edge, q.arc)
}

fn nearest_vertex_of(rule: &KressRule, edge: usize, arc: f64) -> usize {
    if arc <= 0.5 * rule.edge_length(edge) {
        rule.vertex_node(edge)
    } else {
        rule.vertex_node(edge + 1)
    }
}

/// Σ_j F(x, x_j) ω_j; tends to 1 for interior `x`.
pub fn gauss_sum(rule: &KressRule, x: Point2) -> f64 {
    rule.nodes()
        .iter()
        .filter(|q| q.weight > 0.0)
        .map(|q| double_layer_kernel(x, q.point, q.normal) * q.weight)
        .sum()
}

/// Dense matrix of the corner-subtracted Nyström system (without its data).
pub fn assemble_matrix(rule: &KressRule) -> Mat<f64> {
    let m = rule.len();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; m];
            let mut s = 0.0;
            for j in 0..m {
                let w = rule.node(j).weight;
                if w == 0.0 {
                    continue;
                }
                let f = node_kernel(rule, i, j).unwrap_or(0.0) * w;
                row[j] += f;
                s += f;
            }
            let k = nearest_vertex(rule, i);
            row[i] += 0.5;
            row[k] += 0.5 - s;
            row
        })
        .collect();
    Mat::from_fn(m, m, |i, j| rows[i][j])
}

/// Writes a dense matrix, one row per line.
pub fn write_matrix(mut w: impl Write, a: &Mat<f64>) -> std::io::Result<()> {
    for i in 0..a.nrows() {
        let line: Vec<String> = (0..a.ncols()).map(|j| format!("{:.17e}", a[(i, j)])).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Maps base densities to the interior nodes of one edge of a refined rule.
struct Upsampler {
    matrix: Mat<f64>,
    /// Base node that coincides with each fine node, if any.
    coincident: Vec<Option<usize>>,
}

/// Matrix, factorization and refinement operators shared by all elements of
/// one shape (up to translation and scaling).
pub struct NystromSystem {
    matrix: Mat<f64>,
    lu: DenseLu,
    condition: f64,
    upsamplers: Mutex<HashMap<(usize, usize), Arc<Upsampler>>>,
}

impl NystromSystem {
    pub fn build(rule: &KressRule) -> Result<Self> {
        let matrix = assemble_matrix(rule);
        let lu = DenseLu::factor(&matrix)?;
        let condition = lu.condition_estimate();
        if !(condition <= CONDITION_LIMIT) {
            return Err(Error::IllConditioned(condition));
        }
        Ok(Self { matrix, lu, condition, upsamplers: Mutex::new(HashMap::new()) })
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }
}

impl fmt::Debug for NystromSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NystromSystem").field("dim", &self.matrix.nrows()).field("condition", &self.condition).finish()
    }
}

/// Discretized double-layer operator on one element.
pub struct NystromOperator {
    element: Element,
    rule: KressRule,
    system: Arc<NystromSystem>,
    edge_spacing: Vec<f64>,
    max_eta_prime: f64,
    fine_nodes: Mutex<HashMap<(usize, usize), Arc<Vec<KressNode>>>>,
}

impl fmt::Debug for NystromOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NystromOperator")
            .field("element", &self.element.label())
            .field("n", &self.rule.n())
            .field("p", &self.rule.p())
            .finish()
    }
}

impl NystromOperator {
    pub fn new(element: Element, n: usize, p: u32) -> Result<Arc<Self>> {
        let rule = kress_rule(&element, n, p)?;
        let system = Arc::new(NystromSystem::build(&rule)?);
        Ok(Arc::new(Self::assemble(element, rule, system)))
    }

    fn with_system(element: Element, n: usize, p: u32, system: Arc<NystromSystem>) -> Result<Arc<Self>> {
        let rule = kress_rule(&element, n, p)?;
        Ok(Arc::new(Self::assemble(element, rule, system)))
    }

    fn assemble(element: Element, rule: KressRule, system: Arc<NystromSystem>) -> Self {
        let max_eta_prime = sigmoid_max_derivative(rule.p());
        let edge_spacing = element
            .edges()
            .iter()
            .map(|e| {
                let speed = if e.is_straight() {
                    e.length()
                } else {
                    (0..=128).map(|k| e.speed(k as f64 / 128.0)).fold(0.0, f64::max)
                };
                max_eta_prime * speed / rule.n() as f64
            })
            .collect();
        Self { element, rule, system, edge_spacing, max_eta_prime, fine_nodes: Mutex::new(HashMap::new()) }
    }

    pub fn element(&self) -> &Element {
        &self.element
    }

    pub fn rule(&self) -> &KressRule {
        &self.rule
    }

    pub fn system(&self) -> &Arc<NystromSystem> {
        &self.system
    }

    pub fn condition_estimate(&self) -> f64 {
        self.system.condition
    }

    pub fn dump_matrix(&self, w: impl Write) -> std::io::Result<()> {
        write_matrix(w, &self.system.matrix)
    }

    /// Solves the Dirichlet problem with data `g`.
    pub fn solve(self: &Arc<Self>, g: Arc<dyn BoundaryData>) -> Result<HarmonicSolution> {
        let rhs: Vec<f64> = self.rule.nodes().iter().map(|q| g.value(q.edge, q.t, q.point)).collect();
        self.solve_nodal(g, rhs)
    }

    fn solve_nodal(self: &Arc<Self>, g: Arc<dyn BoundaryData>, g_nodes: Vec<f64>) -> Result<HarmonicSolution> {
        let neg: Vec<f64> = g_nodes.iter().map(|v| -v).collect();
        let mut phi = self.system.lu.solve(&neg);
        let gmax = g_nodes.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let resid = |phi: &[f64]| -> f64 {
            mat_vec(&self.system.matrix, phi).iter().zip(&g_nodes).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max)
        };
        let mut r = resid(&phi);
        let limit = RESIDUAL_LIMIT * gmax;
        if r > limit {
            let corr: Vec<f64> = mat_vec(&self.system.matrix, &phi).iter().zip(&g_nodes).map(|(a, b)| -(a + b)).collect();
            let d = self.system.lu.solve(&corr);
            for (p, di) in phi.iter_mut().zip(d) {
                *p += di;
            }
            r = resid(&phi);
            if r > limit {
                return Err(Error::Residual { residual: r / gmax, limit: RESIDUAL_LIMIT });
            }
        }
        Ok(HarmonicSolution {
            operator: self.clone(),
            phi,
            g_nodes,
            data: g,
            residual: if gmax > 0.0 { r / gmax } else { r },
            fine: Mutex::new(HashMap::new()),
        })
    }

    fn fine_nodes(&self, edge: usize, r: usize) -> Arc<Vec<KressNode>> {
        let mut cache = self.fine_nodes.lock().unwrap();
        cache
            .entry((edge, r))
            .or_insert_with(|| {
                let mut nodes = kress_edge_nodes(self.element.edge(edge), edge, self.rule.n() * r, self.rule.p());
                nodes.remove(0);
                Arc::new(nodes)
            })
            .clone()
    }

    fn upsampler(&self, edge: usize, r: usize) -> Arc<Upsampler> {
        if let Some(u) = self.system.upsamplers.lock().unwrap().get(&(edge, r)) {
            return u.clone();
        }
        let fine = self.fine_nodes(edge, r);
        let m = self.rule.len();
        let edges = self.rule.num_edges();
        let base = edge * self.rule.n();
        let straight = self.rule.edge_is_straight(edge);
        let rows: Vec<(Vec<f64>, Option<usize>)> = fine
            .par_iter()
            .map(|y| {
                let mut row = vec![0.0; m];
                if y.k % r == 0 {
                    let j = base + y.k / r;
                    row[j] = 1.0;
                    return (row, Some(j));
                }
                let mut s = 0.0;
                for (j, q) in self.rule.nodes().iter().enumerate() {
                    if q.weight == 0.0 {
                        continue;
                    }
                    let same = q.edge == edge || (q.is_vertex && q.edge == (edge + 1) % edges);
                    if same && straight {
                        continue;
                    }
                    let f = double_layer_kernel(y.point, q.point, q.normal) * q.weight;
                    row[j] -= 2.0 * f;
                    s += f;
                }
                row[nearest_vertex_of(&self.rule, edge, y.arc)] += 2.0 * s - 1.0;
                (row, None)
            })
            .collect();
        let up = Arc::new(Upsampler {
            matrix: Mat::from_fn(rows.len(), m, |i, j| rows[i].0[j]),
            coincident: rows.iter().map(|r| r.1).collect(),
        });
        self.system.upsamplers.lock().unwrap().insert((edge, r), up.clone());
        up
    }

    /// Refinement factor needed on `edge` for a point at distance `d` whose
    /// closest edge parameter is `t`.
    fn refinement(&self, edge: usize, t: f64, d: f64) -> (usize, f64) {
        if d >= REFINEMENT_RATIO * self.edge_spacing[edge] {
            return (1, self.edge_spacing[edge]);
        }
        let e = self.element.edge(edge);
        let n = self.rule.n() as f64;
        let p = self.rule.p();
        let speed = e.speed(t);
        let dt = 4.0 * d / speed;
        let spacing = [t, (t - dt).max(0.0), (t + dt).min(1.0)]
            .iter()
            .map(|&ti| {
                let tau = sigmoid_inverse(ti, p);
                sigmoid_unchecked(tau, p).1 * e.speed(ti) / n
            })
            .fold(0.0, f64::max);
        let need = spacing * REFINEMENT_RATIO / d;
        if need <= 1.0 {
            return (1, spacing);
        }
        let mut r = 1;
        while (r as f64) < need && r < MAX_REFINEMENT {
            r *= 2;
        }
        (r, spacing)
    }

    pub fn max_sigmoid_derivative(&self) -> f64 {
        self.max_eta_prime
    }
}

/// How interior points are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EvalMode {
    /// `-Σ F(x, x_j) φ_j ω_j` on the base rule.
    Plain,
    /// `-Σ F(x, x_j) (φ_j - φ_z) ω_j - φ_z` on the base rule, with `z` the
    /// vertex nearest to `x`. Uses `∫ F(x, y) ds(y) = 1` inside the element,
    /// which removes the density's corner singularity from the sum.
    Subtracted,
    /// As `Subtracted`, with a locally refined rule on edges close to `x`.
    #[default]
    Refined,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: Option<Point2>,
    pub distance: f64,
    /// Closer than [`NEAR_BOUNDARY_SPACINGS`] local base spacings.
    pub near_boundary: bool,
    /// Number of edges summed on a refined rule.
    pub refined_edges: usize,
    /// Some edge needed more than [`MAX_REFINEMENT`].
    pub saturated: bool,
}

/// Solved density together with its operator and data.
pub struct HarmonicSolution {
    operator: Arc<NystromOperator>,
    phi: Vec<f64>,
    g_nodes: Vec<f64>,
    data: Arc<dyn BoundaryData>,
    residual: f64,
    fine: Mutex<HashMap<(usize, usize), Arc<Vec<f64>>>>,
}

impl fmt::Debug for HarmonicSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HarmonicSolution")
            .field("element", &self.operator.element.label())
            .field("nodes", &self.phi.len())
            .field("residual", &self.residual)
            .finish()
    }
}

impl HarmonicSolution {
    pub fn operator(&self) -> &Arc<NystromOperator> {
        &self.operator
    }

    pub fn element(&self) -> &Element {
        &self.operator.element
    }

    pub fn rule(&self) -> &KressRule {
        &self.operator.rule
    }

    /// Density at every node, vertex nodes included.
    pub fn density(&self) -> &[f64] {
        &self.phi
    }

    pub fn data_at_nodes(&self) -> &[f64] {
        &self.g_nodes
    }

    pub fn data(&self) -> &Arc<dyn BoundaryData> {
        &self.data
    }

    /// Relative residual of the solved system.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn label(&self) -> &str {
        self.operator.element.label()
    }

    /// Boundary value at the boundary point `(edge, t)`.
    pub fn boundary_value(&self, edge: usize, t: f64) -> f64 {
        let e = self.operator.element.edge(edge);
        self.data.value(edge, t, e.point(t))
    }

    pub fn eval(&self, x: Point2) -> Result<f64> {
        Ok(self.evaluate(x, EvalMode::Refined, false)?.value)
    }

    pub fn eval_gradient(&self, x: Point2) -> Result<Point2> {
        Ok(self.evaluate(x, EvalMode::Refined, true)?.gradient.unwrap_or_default())
    }

    pub fn evaluate(&self, x: Point2, mode: EvalMode, want_gradient: bool) -> Result<Evaluation> {
        let op = &*self.operator;
        let el = &op.element;
        let dists = el.edge_distances(x);
        match el.locate_with(x, &dists) {
            Location::Inside => {}
            _ => return Err(Error::NotInterior { x: x.x, y: x.y }),
        }
        let rule = &op.rule;
        let n = rule.n();
        let shift = if mode == EvalMode::Plain {
            0.0
        } else {
            let z = (0..el.num_edges())
                .min_by(|&a, &b| el.vertex(a).distance(x).total_cmp(&el.vertex(b).distance(x)))
                .unwrap_or(0);
            self.phi[rule.vertex_node(z)]
        };
        let mut value = 0.0;
        let mut grad = Point2::default();
        let mut distance = f64::INFINITY;
        let mut near = false;
        let mut refined_edges = 0;
        let mut saturated = false;
        for (edge, &(t, d)) in dists.iter().enumerate() {
            distance = distance.min(d);
            let (r, spacing) = op.refinement(edge, t, d);
            if d < NEAR_BOUNDARY_SPACINGS * spacing {
                near = true;
            }
            if r == MAX_REFINEMENT && spacing * REFINEMENT_RATIO / d > MAX_REFINEMENT as f64 {
                saturated = true;
            }
            if r == 1 || mode != EvalMode::Refined {
                let range = edge * n + 1..edge * n + n;
                let (v, g) = edge_sum(x, &rule.nodes()[range.clone()], &self.phi[range], shift, want_gradient);
                value += v;
                grad += g;
            } else {
                refined_edges += 1;
                let nodes = op.fine_nodes(edge, r);
                let dens = self.fine_density(edge, r);
                let (v, g) = edge_sum(x, &nodes, &dens, shift, want_gradient);
                value += v;
                grad += g;
            }
        }
        Ok(Evaluation {
            value: -value - shift,
            gradient: want_gradient.then_some(-grad),
            distance,
            near_boundary: near,
            refined_edges,
            saturated,
        })
    }

    fn fine_density(&self, edge: usize, r: usize) -> Arc<Vec<f64>> {
        if let Some(d) = self.fine.lock().unwrap().get(&(edge, r)) {
            return d.clone();
        }
        let up = self.operator.upsampler(edge, r);
        let nodes = self.operator.fine_nodes(edge, r);
        let mut dens = mat_vec(&up.matrix, &self.phi);
        for ((d, q), c) in dens.iter_mut().zip(nodes.iter()).zip(&up.coincident) {
            if c.is_none() {
                *d -= 2.0 * self.data.value(q.edge, q.t, q.point);
            }
        }
        let dens = Arc::new(dens);
        self.fine.lock().unwrap().insert((edge, r), dens.clone());
        dens
    }

    /// Σ cᵢ wᵢ for solutions sharing one operator.
    pub fn linear_combination(terms: &[(f64, &HarmonicSolution)]) -> Result<HarmonicSolution> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::InvalidArgument("empty linear combination".into()));
        };
        let m = first.phi.len();
        let mut phi = vec![0.0; m];
        let mut g_nodes = vec![0.0; m];
        let mut residual = 0.0;
        for (c, s) in terms {
            if !Arc::ptr_eq(&s.operator, &first.operator) {
                return Err(Error::OperatorMismatch);
            }
            for i in 0..m {
                phi[i] += c * s.phi[i];
                g_nodes[i] += c * s.g_nodes[i];
            }
            residual += c.abs() * s.residual;
        }
        Ok(HarmonicSolution {
            operator: first.operator.clone(),
            phi,
            g_nodes,
            data: Arc::new(CombinedData(terms.iter().map(|(c, s)| (*c, s.data.clone())).collect())),
            residual,
            fine: Mutex::new(HashMap::new()),
        })
    }

    /// Least-squares exponent `s` in `|φ(y) − φ(z)| ≈ C |y − z|^s` over the
    /// nodes nearest to vertex `vertex` on its outgoing edge.
    pub fn corner_exponent(&self, vertex: usize) -> Option<f64> {
        let rule = &self.operator.rule;
        let n = rule.n();
        let z = rule.vertex_node(vertex);
        let pts: Vec<(f64, f64)> = (1..=n / 4)
            .filter_map(|k| {
                let q = rule.node(z + k);
                let diff = (self.phi[z + k] - self.phi[z]).abs();
                (diff > 0.0 && q.arc > 0.0).then(|| (q.arc.ln(), diff.ln()))
            })
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }
}

fn edge_sum(x: Point2, nodes: &[KressNode], dens: &[f64], shift: f64, want_gradient: bool) -> (f64, Point2) {
    let mut v = 0.0;
    let mut g = Point2::default();
    for (q, d) in nodes.iter().zip(dens) {
        let w = q.weight * (d - shift);
        v += double_layer_kernel(x, q.point, q.normal) * w;
        if want_gradient {
            g += kernel_gradient(x, q.point, q.normal) * w;
        }
    }
    (v, g)
}

/// One-shot Dirichlet solve.
pub fn solve_dirichlet(el: &Element, g: Arc<dyn BoundaryData>, n: usize, p: u32) -> Result<HarmonicSolution> {
    NystromOperator::new(el.clone(), n, p)?.solve(g)
}

/// Shares factored systems between elements that agree up to translation and
/// scaling.
pub struct OperatorCache {
    n: usize,
    p: u32,
    systems: Mutex<HashMap<Vec<i64>, Arc<NystromSystem>>>,
}

impl OperatorCache {
    pub fn new(n: usize, p: u32) -> Self {
        Self { n, p, systems: Mutex::new(HashMap::new()) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Number of distinct factored systems held.
    pub fn len(&self) -> usize {
        self.systems.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn operator(&self, el: &Element) -> Result<Arc<NystromOperator>> {
        let Some(key) = shape_key(el) else {
            return NystromOperator::new(el.clone(), self.n, self.p);
        };
        if let Some(sys) = self.systems.lock().unwrap().get(&key).cloned() {
            return NystromOperator::with_system(el.clone(), self.n, self.p, sys);
        }
        let rule = kress_rule(el, self.n, self.p)?;
        let sys = Arc::new(NystromSystem::build(&rule)?);
        self.systems.lock().unwrap().insert(key, sys.clone());
        Ok(Arc::new(NystromOperator::assemble(el.clone(), rule, sys)))
    }
}

fn shape_key(el: &Element) -> Option<Vec<i64>> {
    let o = el.vertex(0);
    let s = 1.0 / el.edge(0).length();
    let q = |v: f64| (v * 1e9).round() as i64;
    let mut key = vec![el.num_edges() as i64];
    for v in el.vertices() {
        let w = (*v - o) * s;
        key.push(q(w.x));
        key.push(q(w.y));
    }
    for e in el.edges() {
        match e.kind() {
            EdgeKind::Straight => key.push(0),
            EdgeKind::Arc { center, sweep } => {
                let c = (*center - o) * s;
                key.extend([1, q(c.x), q(c.y), q(*sweep)]);
            }
            EdgeKind::Sine { amplitude, periods } => key.extend([2, q(amplitude * s), q(*periods)]),
            EdgeKind::Parametric(_) => return None,
        }
    }
    Some(key)
}
