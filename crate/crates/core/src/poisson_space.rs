//! Local Poisson spaces `V_m(K)`.
//!
//! A member of `V_m(K)` has a Laplacian in `P_{m-2}(K)` and a trace that is a
//! polynomial of degree `m` on every edge. It is stored as a polynomial
//! particular part plus a harmonic correction given by a double-layer
//! potential.

use std::io::Write;
use std::sync::Arc;

use faer::Mat;

use crate::error::{Error, Result};
use crate::geometry::{EdgeGeometry, Element, Location, Point2};
use crate::layer_potential::{BoundaryData, EvalMode, HarmonicSolution, NystromOperator};
use crate::linalg::{condition_number, singular_values, solve_dense};
use crate::poly::{particular_solution, Poly2};
use crate::quadrature::{gauss_legendre, interior_rule, legendre_with_derivative, star_center, InteriorRule};

/// Legendre polynomial `L_j(t)`.
pub fn legendre(j: usize, t: f64) -> f64 {
    legendre_with_derivative(j, t).0
}

/// Integrated Legendre polynomial `(L_j - L_{j-2}) / (2j - 1)` and its
/// derivative `L_{j-1}`.
pub fn integrated_legendre(j: usize, t: f64) -> (f64, f64) {
    assert!(j >= 2, "integrated Legendre polynomials start at degree 2");
    let v = (legendre(j, t) - legendre(j - 2, t)) / (2 * j - 1) as f64;
    (v, legendre(j - 1, t))
}

/// `C(m, 2) + N m`, the dimension of `V_m(K)` on a polygon with `N` vertices.
pub fn local_dimension(vertices: usize, m: usize) -> usize {
    m * m.saturating_sub(1) / 2 + vertices * m
}

/// Dimension of `P_m(R²)`.
pub fn polynomial_dimension(m: usize) -> usize {
    (m + 1) * (m + 2) / 2
}

/// Trace spaces on curved edges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EdgeVariant {
    /// Polynomials of degree `m` in arc length.
    #[default]
    Type1,
    /// Restrictions of bivariate polynomials of degree `m`.
    Type2,
}

/// Fraction of the edge length covered from the start to parameter `t`.
pub fn arc_fraction(e: &EdgeGeometry, t: f64) -> f64 {
    if e.is_straight() || matches!(e.kind(), crate::geometry::EdgeKind::Arc { .. }) {
        t
    } else {
        e.arc_length_at(t) / e.length()
    }
}

/// Parameter at a given arc-length fraction.
pub fn param_at_fraction(e: &EdgeGeometry, sigma: f64) -> f64 {
    if e.is_straight() || matches!(e.kind(), crate::geometry::EdgeKind::Arc { .. }) {
        sigma
    } else {
        e.param_at_arc_length(sigma * e.length())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TraceShape {
    /// `λ_z` (at the start) or `λ_z′` (at the end), affine in arc length.
    VertexHat { at_start: bool },
    /// `L̂_j(λ_z - λ_z′)`.
    Bubble { order: usize },
    /// Restriction of a bivariate polynomial.
    CartPoly(Poly2),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeTrace {
    pub edge: usize,
    pub shape: TraceShape,
}

impl EdgeTrace {
    /// Value at parameter `t` of edge `e` (the edge this trace lives on).
    pub fn value(&self, e: &EdgeGeometry, t: f64) -> f64 {
        match &self.shape {
            TraceShape::VertexHat { at_start } => {
                let s = arc_fraction(e, t);
                if *at_start {
                    1.0 - s
                } else {
                    s
                }
            }
            TraceShape::Bubble { order } => integrated_legendre(*order, 1.0 - 2.0 * arc_fraction(e, t)).0,
            TraceShape::CartPoly(p) => p.eval(e.point(t)),
        }
    }
}

/// Edge traces in the order start hat, end hat, bubbles.
pub fn edge_basis(el: &Element, edge: usize, m: usize, variant: EdgeVariant) -> Result<Vec<EdgeTrace>> {
    if m < 1 {
        return Err(Error::InvalidArgument("polynomial degree m must be at least 1".into()));
    }
    let e = el.edge(edge);
    if e.is_straight() || variant == EdgeVariant::Type1 {
        let mut out = vec![
            EdgeTrace { edge, shape: TraceShape::VertexHat { at_start: true } },
            EdgeTrace { edge, shape: TraceShape::VertexHat { at_start: false } },
        ];
        out.extend((2..=m).map(|order| EdgeTrace { edge, shape: TraceShape::Bubble { order } }));
        return Ok(out);
    }
    let polys = nodal_polynomials(e, m)?;
    let d = polys.len();
    let mut order: Vec<usize> = vec![0, d - 1];
    order.extend(1..d - 1);
    Ok(order.into_iter().map(|k| EdgeTrace { edge, shape: TraceShape::CartPoly(polys[k].clone()) }).collect())
}

/// Nodal points of the Type 2 basis on a curved edge: `(t, point)` at
/// equispaced arc-length fractions.
pub fn type2_nodes(e: &EdgeGeometry, m: usize) -> Vec<(f64, Point2)> {
    let d = polynomial_dimension(m);
    (0..d)
        .map(|i| {
            let t = param_at_fraction(e, i as f64 / (d - 1) as f64);
            (t, e.point(t))
        })
        .collect()
}

fn nodal_polynomials(e: &EdgeGeometry, m: usize) -> Result<Vec<Poly2>> {
    let nodes = type2_nodes(e, m);
    let d = nodes.len();
    let mid = (e.start() + e.end()) * 0.5;
    let ell = e.length();
    let alphas: Vec<(u32, u32)> = (0..=m as u32).flat_map(|k| (0..=k).map(move |a| (a, k - a))).collect();
    let v = Mat::from_fn(d, d, |i, j| {
        let q = (nodes[i].1 - mid) / ell;
        q.x.powi(alphas[j].0 as i32) * q.y.powi(alphas[j].1 as i32)
    });
    let sv = singular_values(&v)?;
    if !(sv[d - 1] > 1e-12 * sv[0]) {
        return Err(Error::Singular(format!("Type 2 nodal matrix on a curved edge (degree {m}) has no full rank")));
    }
    (0..d)
        .map(|k| {
            let mut rhs = vec![0.0; d];
            rhs[k] = 1.0;
            let c = solve_dense(&v, &rhs)?;
            Ok(Poly2::from_terms(
                mid,
                alphas.iter().zip(c).map(|(a, ci)| (*a, ci / ell.powi((a.0 + a.1) as i32))),
            ))
        })
        .collect()
}

/// Boundary data assembled edge by edge from weighted traces.
#[derive(Clone, Debug)]
pub struct PiecewiseTrace {
    element: Element,
    pieces: Vec<Vec<(f64, EdgeTrace)>>,
}

impl PiecewiseTrace {
    pub fn zero(element: &Element) -> Self {
        Self { element: element.clone(), pieces: vec![Vec::new(); element.num_edges()] }
    }

    pub fn push(&mut self, coef: f64, trace: EdgeTrace) {
        self.pieces[trace.edge].push((coef, trace));
    }
}

impl BoundaryData for PiecewiseTrace {
    fn value(&self, edge: usize, t: f64, _x: Point2) -> f64 {
        let e = self.element.edge(edge);
        self.pieces[edge].iter().map(|(c, tr)| c * tr.value(e, t)).sum()
    }
}

/// A member of a local space: `poly + harmonic`.
#[derive(Clone, Debug)]
pub struct LocalFunction {
    poly: Poly2,
    harmonic: Option<Arc<HarmonicSolution>>,
    m: usize,
}

impl LocalFunction {
    pub fn new(poly: Poly2, harmonic: Option<Arc<HarmonicSolution>>, m: usize) -> Self {
        Self { poly, harmonic, m }
    }

    pub fn harmonic(sol: HarmonicSolution, m: usize) -> Self {
        Self { poly: Poly2::zero(Point2::default()), harmonic: Some(Arc::new(sol)), m }
    }

    pub fn poly_part(&self) -> &Poly2 {
        &self.poly
    }

    pub fn harmonic_part(&self) -> Option<&HarmonicSolution> {
        self.harmonic.as_deref()
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn label(&self) -> &str {
        self.harmonic.as_ref().map(|h| h.label()).unwrap_or("")
    }

    pub fn element(&self) -> Option<&Element> {
        self.harmonic.as_ref().map(|h| h.element())
    }

    pub fn value(&self, x: Point2) -> Result<f64> {
        Ok(self.evaluate(x, false, EvalMode::Refined)?.0)
    }

    pub fn gradient(&self, x: Point2) -> Result<Point2> {
        Ok(self.evaluate(x, true, EvalMode::Refined)?.1.unwrap_or_default())
    }

    /// Value, and gradient if asked. Boundary points give the trace value;
    /// gradients need interior points.
    pub fn evaluate(&self, x: Point2, want_gradient: bool, mode: EvalMode) -> Result<(f64, Option<Point2>)> {
        let pv = self.poly.eval(x);
        let Some(h) = &self.harmonic else {
            return Ok((pv, want_gradient.then(|| self.poly.gradient(x))));
        };
        let el = h.element();
        match el.locate(x) {
            Location::Boundary { edge, t } => {
                if want_gradient {
                    return Err(Error::NotInterior { x: x.x, y: x.y });
                }
                Ok((pv + h.boundary_value(edge, t), None))
            }
            Location::Outside => Err(Error::NotInterior { x: x.x, y: x.y }),
            Location::Inside => {
                let ev = h.evaluate(x, mode, want_gradient)?;
                Ok((pv + ev.value, ev.gradient.map(|g| g + self.poly.gradient(x))))
            }
        }
    }

    /// Trace value at the boundary point `(edge, t)`.
    pub fn boundary_value(&self, edge: usize, t: f64) -> Result<f64> {
        let h = self.harmonic.as_ref().ok_or_else(|| Error::InvalidArgument("function has no element".into()))?;
        let x = h.element().edge(edge).point(t);
        Ok(self.poly.eval(x) + h.boundary_value(edge, t))
    }

    /// Σ cᵢ fᵢ for functions on the same operator.
    pub fn linear_combination(terms: &[(f64, &LocalFunction)]) -> Result<LocalFunction> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::InvalidArgument("empty linear combination".into()));
        };
        let center = terms.iter().find(|(_, f)| !f.poly.is_zero()).map(|(_, f)| f.poly.center()).unwrap_or(first.poly.center());
        let mut poly = Poly2::zero(center);
        let mut harm: Vec<(f64, &HarmonicSolution)> = Vec::new();
        let mut m = 0;
        for (c, f) in terms {
            if !f.poly.is_zero() {
                let p = if f.poly.center() == center { f.poly.clone() } else { f.poly.recenter(center) };
                poly = &poly + &p.scale(*c);
            }
            if let Some(h) = &f.harmonic {
                harm.push((*c, h));
            }
            m = m.max(f.m);
        }
        let harmonic = if harm.is_empty() { None } else { Some(Arc::new(HarmonicSolution::linear_combination(&harm)?)) };
        Ok(LocalFunction { poly, harmonic, m })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisTag {
    Vertex(usize),
    Edge { edge: usize, index: usize },
    Interior { beta: (u32, u32) },
}

#[derive(Clone, Debug)]
pub struct BasisFunction {
    pub tag: BasisTag,
    pub function: LocalFunction,
}

/// Scaled monomials `((x - z) / h)^β` for `|β| ≤ degree`.
pub fn scaled_monomials(center: Point2, scale: f64, degree: usize) -> Vec<((u32, u32), Poly2)> {
    (0..=degree as u32)
        .flat_map(|k| (0..=k).rev().map(move |a| (a, k - a)))
        .map(|b| (b, Poly2::monomial(center, b, scale.powi(-((b.0 + b.1) as i32)))))
        .collect()
}

/// Basis catalog of `V_m(K)` for one element.
#[derive(Debug)]
pub struct LocalSpace {
    operator: Arc<NystromOperator>,
    m: usize,
    variant: EdgeVariant,
    center: Point2,
    scale: f64,
    edge_traces: Vec<Vec<EdgeTrace>>,
    basis: Vec<BasisFunction>,
    rule: InteriorRule,
}

/// Point about which interior monomials are expanded: the vertex centroid if
/// it lies inside, otherwise a star center.
pub fn monomial_center(el: &Element) -> Result<Point2> {
    let c = el.vertex_centroid();
    if el.contains(c) {
        Ok(c)
    } else {
        star_center(el)
    }
}

/// Interior functions `φ_β = q_β + w_β` with `Δq_β = p_β` and `w_β = -q_β`
/// on the boundary.
pub fn interior_functions(op: &Arc<NystromOperator>, m: usize, center: Point2, scale: f64) -> Result<Vec<((u32, u32), LocalFunction)>> {
    if m < 2 {
        return Ok(Vec::new());
    }
    scaled_monomials(center, scale, m - 2)
        .into_iter()
        .map(|(beta, p)| {
            let q = particular_solution(&p);
            let qc = q.clone();
            let sol = op.solve(Arc::new(crate::layer_potential::PointData(move |x: Point2| -qc.eval(x))))?;
            Ok((beta, LocalFunction { poly: q, harmonic: Some(Arc::new(sol)), m }))
        })
        .collect()
}

impl LocalSpace {
    pub fn new(op: Arc<NystromOperator>, m: usize, variant: EdgeVariant) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidArgument("polynomial degree m must be at least 1".into()));
        }
        let el = op.element().clone();
        let nv = el.num_edges();
        let edge_traces = (0..nv).map(|e| edge_basis(&el, e, m, variant)).collect::<Result<Vec<_>>>()?;
        let center = monomial_center(&el)?;
        let scale = el.diameter();
        let rule = interior_rule(&el)?;
        let mut basis = Vec::new();
        for v in 0..nv {
            let mut tr = PiecewiseTrace::zero(&el);
            tr.push(1.0, edge_traces[v][0].clone());
            tr.push(1.0, edge_traces[(v + nv - 1) % nv][1].clone());
            let sol = op.solve(Arc::new(tr))?;
            basis.push(BasisFunction { tag: BasisTag::Vertex(v), function: LocalFunction::harmonic(sol, m) });
        }
        for (e, traces) in edge_traces.iter().enumerate() {
            for (index, t) in traces.iter().enumerate().skip(2) {
                let mut tr = PiecewiseTrace::zero(&el);
                tr.push(1.0, t.clone());
                let sol = op.solve(Arc::new(tr))?;
                basis.push(BasisFunction { tag: BasisTag::Edge { edge: e, index: index - 2 }, function: LocalFunction::harmonic(sol, m) });
            }
        }
        for (beta, f) in interior_functions(&op, m, center, scale)? {
            basis.push(BasisFunction { tag: BasisTag::Interior { beta }, function: f });
        }
        Ok(Self { operator: op, m, variant, center, scale, edge_traces, basis, rule })
    }

    pub fn operator(&self) -> &Arc<NystromOperator> {
        &self.operator
    }

    pub fn element(&self) -> &Element {
        self.operator.element()
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn variant(&self) -> EdgeVariant {
        self.variant
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisFunction] {
        &self.basis
    }

    pub fn edge_traces(&self, edge: usize) -> &[EdgeTrace] {
        &self.edge_traces[edge]
    }

    pub fn monomial_center(&self) -> Point2 {
        self.center
    }

    pub fn monomial_scale(&self) -> f64 {
        self.scale
    }

    pub fn interior_rule(&self) -> &InteriorRule {
        &self.rule
    }

    /// Degrees of freedom of `f`: vertex values, edge moments against
    /// Legendre polynomials (nodal values on Type 2 curved edges) and
    /// interior moments against scaled monomials.
    pub fn dofs(&self, f: &LocalFunction) -> Result<Vec<f64>> {
        let el = self.element();
        let mut out = Vec::with_capacity(self.dim());
        for v in 0..el.num_edges() {
            out.push(f.boundary_value(v, 0.0)?);
        }
        for (e, traces) in self.edge_traces.iter().enumerate() {
            let edge = el.edge(e);
            let curved_type2 = !edge.is_straight() && self.variant == EdgeVariant::Type2;
            if curved_type2 {
                let nodes = type2_nodes(edge, self.m);
                for (t, _) in &nodes[1..nodes.len() - 1] {
                    out.push(f.boundary_value(e, *t)?);
                }
            } else {
                for i in 0..traces.len() - 2 {
                    out.push(edge_moment(edge, |t| f.boundary_value(e, t), i)?);
                }
            }
        }
        if self.m >= 2 {
            let mons = scaled_monomials(self.center, self.scale, self.m - 2);
            let vals: Vec<f64> = self.rule.nodes.iter().map(|(x, _)| f.value(*x)).collect::<Result<_>>()?;
            for (_, p) in mons {
                out.push(self.rule.nodes.iter().zip(&vals).map(|((x, w), v)| w * v * p.eval(*x)).sum());
            }
        }
        Ok(out)
    }

    /// Matrix whose column `j` holds the degrees of freedom of basis function `j`.
    pub fn dof_matrix(&self) -> Result<Mat<f64>> {
        let cols: Vec<Vec<f64>> = self.basis.iter().map(|b| self.dofs(&b.function)).collect::<Result<_>>()?;
        let d = self.dim();
        Ok(Mat::from_fn(d, d, |i, j| cols[j][i]))
    }

    /// 2-norm condition number of the degree-of-freedom matrix.
    pub fn unisolvence_condition(&self) -> Result<f64> {
        condition_number(&self.dof_matrix()?)
    }
}

/// Builds the basis of `V_m(K)` with `n` nodes per edge and grading `p`.
pub fn local_basis(el: &Element, m: usize, n: usize, p: u32) -> Result<LocalSpace> {
    LocalSpace::new(NystromOperator::new(el.clone(), n, p)?, m, EdgeVariant::Type1)
}

/// Value and optional gradient of a local function.
pub fn eval_local(f: &LocalFunction, x: Point2, want_gradient: bool) -> Result<(f64, Option<Point2>)> {
    f.evaluate(x, want_gradient, EvalMode::Refined)
}

/// `∫_e f L_i(1 - 2σ) ds` by 32-point Gauss in arc length, with `f` given
/// as a function of the edge parameter.
pub fn edge_moment(e: &EdgeGeometry, f: impl Fn(f64) -> Result<f64>, i: usize) -> Result<f64> {
    let (gx, gw) = gauss_legendre(32);
    let mut s = 0.0;
    for (u, w) in gx.iter().zip(gw.iter()) {
        let sigma = 0.5 * (1.0 - u);
        s += w * f(param_at_fraction(e, sigma))? * legendre(i, *u);
    }
    Ok(0.5 * e.length() * s)
}

/// Samples `f` on an `nx × ny` lattice over the bounding box of its element,
/// keeping interior points only.
pub fn sample_grid(f: &LocalFunction, nx: usize, ny: usize) -> Result<Vec<(f64, f64, f64)>> {
    let el = f.element().ok_or_else(|| Error::InvalidArgument("function has no element".into()))?;
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for e in el.edges() {
        for k in 0..=32 {
            let p = e.point(k as f64 / 32.0);
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
    }
    let mut out = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let x = Point2::new(
                lo.x + (hi.x - lo.x) * (i as f64 + 0.5) / nx as f64,
                lo.y + (hi.y - lo.y) * (j as f64 + 0.5) / ny as f64,
            );
            if el.contains(x) {
                out.push((x.x, x.y, f.value(x)?));
            }
        }
    }
    Ok(out)
}

pub fn write_grid_csv(mut w: impl Write, samples: &[(f64, f64, f64)]) -> std::io::Result<()> {
    writeln!(w, "x,y,value")?;
    for (x, y, v) in samples {
        writeln!(w, "{x:.12e},{y:.12e},{v:.12e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{polygon_from_vertices, EdgeKind};

    fn unit_square() -> Element {
        polygon_from_vertices(&[(0.0, 0.0).into(), (1.0, 0.0).into(), (1.0, 1.0).into(), (0.0, 1.0).into()]).unwrap()
    }

    #[test]
    fn integrated_legendre_values() {
        for k in 0..=20 {
            let t = -1.0 + k as f64 / 10.0;
            assert!((integrated_legendre(2, t).0 - (t * t - 1.0) / 2.0).abs() < 1e-14);
        }
        for j in 2..=10 {
            assert!(integrated_legendre(j, 1.0).0.abs() < 1e-14);
            assert!(integrated_legendre(j, -1.0).0.abs() < 1e-14);
        }
        let h = 1e-6;
        for j in 2..=8 {
            for k in 1..10 {
                let t = -0.9 + 0.2 * k as f64 - 0.1;
                let fd = (integrated_legendre(j, t + h).0 - integrated_legendre(j, t - h).0) / (2.0 * h);
                assert!((fd - integrated_legendre(j, t).1).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn bubble_derivatives_are_orthogonal() {
        // on an edge of length 2.5, ds = (|e|/2) du and d/ds = -(2/|e|) d/du
        let len = 2.5;
        let (gx, gw) = gauss_legendre(20);
        for i in 2..=6 {
            for j in 2..=6 {
                let s: f64 = gx
                    .iter()
                    .zip(gw.iter())
                    .map(|(u, w)| w * integrated_legendre(i, *u).1 * integrated_legendre(j, *u).1 * (2.0 / len) * (2.0 / len) * (len / 2.0))
                    .sum();
                let expected = if i == j { 4.0 / ((2 * j - 1) as f64 * len) } else { 0.0 };
                assert!((s - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn straight_edge_basis_size() {
        let el = unit_square();
        assert_eq!(edge_basis(&el, 0, 3, EdgeVariant::Type1).unwrap().len(), 4);
        assert_eq!(local_dimension(4, 3), 15);
    }

    #[test]
    fn type2_arc_contains_cos_and_sin() {
        use std::f64::consts::FRAC_PI_2;
        let el = Element::new(
            vec![(0.0, 0.0).into(), (1.0, 0.0).into(), (0.0, 1.0).into()],
            vec![EdgeKind::Straight, EdgeKind::Arc { center: Point2::default(), sweep: FRAC_PI_2 }, EdgeKind::Straight],
            "",
        )
        .unwrap();
        let traces = edge_basis(&el, 1, 1, EdgeVariant::Type2).unwrap();
        assert_eq!(traces.len(), 3);
        let e = el.edge(1);
        // cos θ and sin θ are reproduced by the nodal interpolant
        let nodes = type2_nodes(e, 1);
        for target in [|p: Point2| p.x, |p: Point2| p.y, |_p: Point2| 1.0] {
            let coef = [nodes[0].1, nodes[2].1, nodes[1].1].map(target);
            for k in 0..=10 {
                let t = k as f64 / 10.0;
                let v: f64 = traces.iter().zip(coef).map(|(tr, c)| c * tr.value(e, t)).sum();
                assert!((v - target(e.point(t))).abs() < 1e-12);
            }
        }
        let t1 = edge_basis(&el, 1, 1, EdgeVariant::Type1).unwrap();
        assert_eq!(t1.len(), 2);
        assert!((t1[1].value(e, 0.3) - 0.3).abs() < 1e-15);
        // x² + y² is constant on the arc, so degree 2 is degenerate
        assert!(edge_basis(&el, 1, 2, EdgeVariant::Type2).is_err());
    }

    #[test]
    fn vertex_hats_on_square_are_bilinear() {
        let sp = local_basis(&unit_square(), 1, 64, 6).unwrap();
        assert_eq!(sp.dim(), 4);
        let x = Point2::new(0.5, 0.5);
        let mut total = 0.0;
        for b in sp.basis() {
            let v = b.function.value(x).unwrap();
            assert!((v - 0.25).abs() < 1e-9, "{v}");
            total += v;
        }
        assert!((total - 1.0).abs() < 1e-9);
        let y = Point2::new(0.2, 0.7);
        let hat0 = sp.basis()[0].function.value(y).unwrap();
        assert!((hat0 - 0.8 * 0.3).abs() < 1e-9);
    }

    #[test]
    fn interior_bubble_matches_series() {
        let sp = local_basis(&unit_square(), 2, 48, 6).unwrap();
        let b = sp.basis().iter().find(|b| matches!(b.tag, BasisTag::Interior { .. })).unwrap();
        // Δu = 1/h^0 = 1 on the unit square with zero trace (scale does not
        // matter for β = 0): u(1/2, 1/2) = -Σ 16 sin²… series
        let mut series = 0.0;
        for i in (1..400).step_by(2) {
            for j in (1..400).step_by(2) {
                let (fi, fj) = (i as f64, j as f64);
                let coef = 16.0 / (std::f64::consts::PI.powi(2) * fi * fj);
                let lam = std::f64::consts::PI.powi(2) * (fi * fi + fj * fj);
                let sign = if ((i - 1) / 2 + (j - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                series -= coef / lam * sign;
            }
        }
        let v = b.function.value(Point2::new(0.5, 0.5)).unwrap();
        assert!((v - series).abs() < 1e-8, "{v} vs {series}");
    }
}
