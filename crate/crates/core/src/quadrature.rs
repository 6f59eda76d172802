//! Boundary and interior quadrature.
//!
//! Boundary rules are trapezoid rules after a sigmoidal change of variable
//! that flattens the integrand at both ends of every edge, so nodes cluster at
//! corners. Interior rules fan the element into triangles (or curved sectors)
//! from a star center.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::geometry::{chebyshev_center, EdgeGeometry, Element, Point2};

pub const DEFAULT_GRADING: u32 = 6;

/// Order of the tensor Gauss rule on curved fan sectors.
pub const SECTOR_GAUSS_ORDER: usize = 16;

/// Sigmoidal map `η(τ)` on `[0, 1]` and its derivative.
pub fn sigmoid(tau: f64, p: u32) -> Result<(f64, f64)> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("grading order p = {p} must be at least 2")));
    }
    Ok(sigmoid_unchecked(tau, p))
}

pub(crate) fn sigmoid_unchecked(tau: f64, p: u32) -> (f64, f64) {
    let pf = p as f64;
    let s = 2.0 * tau - 1.0;
    let a = 0.5 - 1.0 / pf;
    let c = a * s * s * s + s / pf + 0.5;
    let dc = 6.0 * a * s * s + 2.0 / pf;
    let cp = c.powi(p as i32);
    let dp = (1.0 - c).powi(p as i32);
    let den = cp + dp;
    let eta = cp / den;
    let deta = pf * (c * (1.0 - c)).powi(p as i32 - 1) / (den * den) * dc;
    (eta, deta)
}

/// Inverse of the sigmoid by bisection.
pub(crate) fn sigmoid_inverse(eta: f64, p: u32) -> f64 {
    if eta <= 0.0 {
        return 0.0;
    }
    if eta >= 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if sigmoid_unchecked(mid, p).0 < eta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest value of `η′` on `[0, 1]`.
pub(crate) fn sigmoid_max_derivative(p: u32) -> f64 {
    (0..=2000).map(|i| sigmoid_unchecked(i as f64 / 2000.0, p).1).fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KressNode {
    pub point: Point2,
    pub weight: f64,
    pub edge: usize,
    /// Index `k` of the node within its edge; `0` is the start vertex.
    pub k: usize,
    /// Edge parameter `η(k/n)`.
    pub t: f64,
    pub normal: Point2,
    pub curvature: f64,
    /// Arc length from the start of the edge.
    pub arc: f64,
    pub is_vertex: bool,
}

#[derive(Clone, Debug)]
pub struct KressRule {
    p: u32,
    n: usize,
    nodes: Vec<KressNode>,
    edge_lengths: Vec<f64>,
    edge_straight: Vec<bool>,
}

impl KressRule {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_lengths.len()
    }

    pub fn nodes(&self) -> &[KressNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &KressNode {
        &self.nodes[i]
    }

    /// Global index of the node at the start vertex of `edge`.
    pub fn vertex_node(&self, edge: usize) -> usize {
        (edge % self.num_edges()) * self.n
    }

    pub fn edge_length(&self, edge: usize) -> f64 {
        self.edge_lengths[edge]
    }

    pub fn edge_is_straight(&self, edge: usize) -> bool {
        self.edge_straight[edge]
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|q| q.weight)
    }
}

/// Nodes `k = 0..levels` of the graded rule with `levels` subdivisions on one edge.
pub fn kress_edge_nodes(edge: &EdgeGeometry, edge_index: usize, levels: usize, p: u32) -> Vec<KressNode> {
    let mut out = Vec::with_capacity(levels);
    for k in 0..levels {
        let tau = k as f64 / levels as f64;
        let (t, dt) = sigmoid_unchecked(tau, p);
        let is_vertex = k == 0;
        out.push(KressNode {
            point: if is_vertex { edge.start() } else { edge.point(t) },
            weight: if is_vertex { 0.0 } else { dt * edge.speed(t) / levels as f64 },
            edge: edge_index,
            k,
            t,
            normal: edge.normal(t),
            curvature: edge.curvature(t),
            arc: edge.arc_length_at(t),
            is_vertex,
        });
    }
    out
}

/// Graded trapezoid rule with `n` subdivisions per edge and grading order `p`.
pub fn kress_rule(el: &Element, n: usize, p: u32) -> Result<KressRule> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("grading order p = {p} must be at least 2")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n = {n} must be at least 2")));
    }
    let mut nodes = Vec::with_capacity(n * el.num_edges());
    for (i, e) in el.edges().iter().enumerate() {
        if !(e.length() > 0.0) {
            return Err(Error::DegenerateEdge(i));
        }
        nodes.extend(kress_edge_nodes(e, i, n, p));
    }
    Ok(KressRule {
        p,
        n,
        nodes,
        edge_lengths: el.edges().iter().map(|e| e.length()).collect(),
        edge_straight: el.edges().iter().map(|e| e.is_straight()).collect(),
    })
}

type GaussPair = (Arc<[f64]>, Arc<[f64]>);

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> GaussPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, GaussPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return r.clone();
    }
    let r = compute_gauss_legendre(n);
    cache.lock().unwrap().insert(n, r.clone());
    r
}

fn compute_gauss_legendre(n: usize) -> GaussPair {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (pn, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = pn / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x.into(), w.into())
}

/// `(L_n(t), L_n′(t))` by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, t);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = if (t * t - 1.0).abs() < 1e-14 {
        let s = if t > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * (n * (n + 1)) as f64 / 2.0
    } else {
        n as f64 * (t * p1 - p0) / (t * t - 1.0)
    };
    (p1, d)
}

/// Seven-point degree-5 rule on the reference triangle: barycentric coordinates and weights summing to 1.
pub fn triangle_rule_7() -> [([f64; 3], f64); 7] {
    let s15 = 15f64.sqrt();
    let a1 = (6.0 - s15) / 21.0;
    let a2 = (6.0 + s15) / 21.0;
    let w1 = (155.0 - s15) / 1200.0;
    let w2 = (155.0 + s15) / 1200.0;
    let b1 = 1.0 - 2.0 * a1;
    let b2 = 1.0 - 2.0 * a2;
    let third = 1.0 / 3.0;
    [
        ([third, third, third], 9.0 / 40.0),
        ([a1, a1, b1], w1),
        ([a1, b1, a1], w1),
        ([b1, a1, a1], w1),
        ([a2, a2, b2], w2),
        ([a2, b2, a2], w2),
        ([b2, a2, a2], w2),
    ]
}

#[derive(Clone, Debug)]
pub struct InteriorRule {
    pub nodes: Vec<(Point2, f64)>,
    pub label: String,
    pub center: Point2,
}

impl InteriorRule {
    pub fn integrate(&self, f: impl Fn(Point2) -> f64) -> f64 {
        self.nodes.iter().map(|(x, w)| w * f(*x)).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|(_, w)| w).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Smallest value of `cross(x(t) − c, x′(t)) / |x′(t)|` over the boundary,
/// scaled by the diameter. Positive exactly when every ray from `c` meets the
/// boundary once.
fn star_margin(el: &Element, c: Point2) -> f64 {
    let mut m = f64::INFINITY;
    for e in el.edges() {
        if e.is_straight() {
            let d = e.end() - e.start();
            m = m.min((e.start() - c).cross(d) / d.norm());
        } else {
            for k in 0..=256 {
                let t = k as f64 / 256.0;
                let d = e.derivative(t);
                m = m.min((e.point(t) - c).cross(d) / d.norm());
            }
        }
    }
    m / el.diameter()
}

/// A point with respect to which the element is star-shaped: the centroid if
/// possible, otherwise the center of the largest disc in the kernel, otherwise
/// the best point of a grid search.
pub fn star_center(el: &Element) -> Result<Point2> {
    const MIN_MARGIN: f64 = 1e-6;
    let c = el.centroid();
    if star_margin(el, c) > MIN_MARGIN {
        return Ok(c);
    }
    if let Some((r, z)) = chebyshev_center(el) {
        if r > 0.0 && star_margin(el, z) > MIN_MARGIN {
            return Ok(z);
        }
    }
    let (mut lo, mut hi) = (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for e in el.edges() {
        for k in 0..=64 {
            let p = e.point(k as f64 / 64.0);
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
    }
    let steps = 40;
    let mut best = (f64::NEG_INFINITY, c);
    for i in 1..steps {
        for j in 1..steps {
            let z = Point2::new(
                lo.x + (hi.x - lo.x) * i as f64 / steps as f64,
                lo.y + (hi.y - lo.y) * j as f64 / steps as f64,
            );
            let m = star_margin(el, z);
            if m > best.0 {
                best = (m, z);
            }
        }
    }
    if best.0 > MIN_MARGIN {
        Ok(best.1)
    } else {
        Err(Error::NotStarShaped)
    }
}

/// Interior rule: 7-point rules on fan triangles for straight edges and
/// tensor Gauss rules on curved fan sectors, all from a common star center.
pub fn interior_rule(el: &Element) -> Result<InteriorRule> {
    interior_rule_with_center(el, star_center(el)?)
}

pub fn interior_rule_with_center(el: &Element, c: Point2) -> Result<InteriorRule> {
    let tri = triangle_rule_7();
    let mut nodes = Vec::new();
    for e in el.edges() {
        if e.is_straight() {
            let (a, b) = (e.start(), e.end());
            let area = 0.5 * (a - c).cross(b - c);
            if area <= 0.0 {
                if area == 0.0 {
                    continue;
                }
                return Err(Error::NotStarShaped);
            }
            for (l, w) in tri.iter() {
                nodes.push((c * l[0] + a * l[1] + b * l[2], w * area));
            }
        } else {
            let (gx, gw) = gauss_legendre(SECTOR_GAUSS_ORDER);
            for (ti, wt) in gx.iter().zip(gw.iter()) {
                let t = 0.5 * (ti + 1.0);
                let x = e.point(t);
                let jac = (x - c).cross(e.derivative(t));
                if jac <= 0.0 {
                    return Err(Error::NotStarShaped);
                }
                for (si, ws) in gx.iter().zip(gw.iter()) {
                    let s = 0.5 * (si + 1.0);
                    nodes.push((c + (x - c) * s, 0.25 * wt * ws * s * jac));
                }
            }
        }
    }
    Ok(InteriorRule { nodes, label: el.label().to_string(), center: c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{polygon_from_vertices, EdgeKind};

    fn pts(v: &[(f64, f64)]) -> Vec<Point2> {
        v.iter().map(|&q| q.into()).collect()
    }

    #[test]
    fn sigmoid_endpoints_and_midpoint() {
        for p in 2..=10 {
            let (e, _) = sigmoid(0.5, p).unwrap();
            assert!((e - 0.5).abs() < 1e-15);
        }
        assert_eq!(sigmoid(0.0, 6).unwrap(), (0.0, 0.0));
        assert_eq!(sigmoid(1.0, 6).unwrap(), (1.0, 0.0));
        assert!(sigmoid(0.3, 1).is_err());
        assert!((sigmoid(0.5, 6).unwrap().1 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sigmoid_derivative_matches_differences() {
        let h = 1e-6;
        for i in 1..100 {
            let tau = i as f64 / 100.0;
            let fd = (sigmoid(tau + h, 6).unwrap().0 - sigmoid(tau - h, 6).unwrap().0) / (2.0 * h);
            assert!((fd - sigmoid(tau, 6).unwrap().1).abs() < 1e-8);
        }
    }

    #[test]
    fn sigmoid_inverse_roundtrip() {
        for i in 1..20 {
            let tau = i as f64 / 20.0;
            let eta = sigmoid_unchecked(tau, 6).0;
            assert!((sigmoid_inverse(eta, 6) - tau).abs() < 1e-12);
        }
    }

    #[test]
    fn square_rule_count_and_lengths() {
        let sq = polygon_from_vertices(&pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])).unwrap();
        let r = kress_rule(&sq, 16, 6).unwrap();
        assert_eq!(r.len(), 64);
        let r = kress_rule(&sq, 64, 6).unwrap();
        for e in 0..4 {
            let s: f64 = r.nodes().iter().filter(|q| q.edge == e).map(|q| q.weight).sum();
            assert!((s - 1.0).abs() < 1e-8);
        }
        for q in r.nodes() {
            assert_eq!(q.is_vertex, q.weight == 0.0);
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre(32);
        let s: f64 = x.iter().zip(w.iter()).map(|(x, w)| w * x.powi(62)).sum();
        assert!((s - 2.0 / 63.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(w.iter()).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_rule_degree_five() {
        let tri = polygon_from_vertices(&pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])).unwrap();
        let rule = interior_rule_with_center(&tri, tri.centroid()).unwrap();
        assert!((rule.integrate(|p| p.x.powi(5)) - 1.0 / 42.0).abs() < 1e-14);
        assert!((rule.total_weight() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lhex_second_moment() {
        let el = polygon_from_vertices(&pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (0.0, -1.0)]))
            .unwrap();
        let rule = interior_rule(&el).unwrap();
        // three unit squares, each contributing 2/3
        assert!((rule.integrate(|p| p.norm_squared()) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn curved_sector_area() {
        let el = Element::new(
            pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]),
            vec![EdgeKind::Straight, EdgeKind::Arc { center: Point2::default(), sweep: std::f64::consts::FRAC_PI_2 }, EdgeKind::Straight],
            "",
        )
        .unwrap();
        let rule = interior_rule(&el).unwrap();
        assert!((rule.total_weight() - std::f64::consts::FRAC_PI_4).abs() < 1e-13);
        for (x, _) in &rule.nodes {
            assert!(el.contains(*x));
        }
    }
}
