//! Curvilinear polygonal elements.
//!
//! An [`Element`] is a counter-clockwise ring of vertices joined by edges that
//! are straight, circular arcs, sine-perturbed chords or arbitrary parametric
//! curves. Every edge is parametrized over `t ∈ [0, 1]` with explicit first and
//! second derivatives, which is what the boundary quadrature needs.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Points closer than `BOUNDARY_TOLERANCE * h_K` to the boundary count as on it.
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;

const ANGLE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn distance(self, o: Self) -> f64 {
        (self - o).norm()
    }

    /// Counter-clockwise rotation by a right angle.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Self {
        self / self.norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, o: Self, s: f64) -> Self {
        self + (o - self) * s
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl From<(f64, f64)> for Point2 {
    fn from(a: (f64, f64)) -> Self {
        Self::new(a.0, a.1)
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, p: Point2) -> Point2 {
        p * self
    }
}

impl Div<f64> for Point2 {
    type Output = Self;
    fn div(self, s: f64) -> Self {
        Self::new(self.x / s, self.y / s)
    }
}

impl Neg for Point2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A user-supplied regular curve over `t ∈ [0, 1]`.
pub trait Curve: Send + Sync + fmt::Debug {
    fn point(&self, t: f64) -> Point2;
    fn derivative(&self, t: f64) -> Point2;
    fn second_derivative(&self, t: f64) -> Point2;
}

#[derive(Clone, Debug)]
pub enum EdgeKind {
    Straight,
    /// Circular arc about `center`; `sweep` is the signed angle (positive is counter-clockwise).
    Arc { center: Point2, sweep: f64 },
    /// Chord displaced by `amplitude * sin(2π periods t)` along its left normal.
    Sine { amplitude: f64, periods: f64 },
    Parametric(Arc<dyn Curve>),
}

impl EdgeKind {
    pub fn is_straight(&self) -> bool {
        matches!(self, EdgeKind::Straight)
    }
}

/// JSON form of an edge kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EdgeSpec {
    Straight,
    Arc { center: Point2, sweep: f64 },
    Sine { amplitude: f64, periods: f64 },
}

impl From<EdgeSpec> for EdgeKind {
    fn from(s: EdgeSpec) -> Self {
        match s {
            EdgeSpec::Straight => EdgeKind::Straight,
            EdgeSpec::Arc { center, sweep } => EdgeKind::Arc { center, sweep },
            EdgeSpec::Sine { amplitude, periods } => EdgeKind::Sine { amplitude, periods },
        }
    }
}

impl EdgeKind {
    /// JSON form, or `None` for user curves.
    pub fn spec(&self) -> Option<EdgeSpec> {
        match self {
            EdgeKind::Straight => Some(EdgeSpec::Straight),
            EdgeKind::Arc { center, sweep } => Some(EdgeSpec::Arc { center: *center, sweep: *sweep }),
            EdgeKind::Sine { amplitude, periods } => Some(EdgeSpec::Sine {
                amplitude: *amplitude,
                periods: *periods,
            }),
            EdgeKind::Parametric(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EdgeGeometry {
    start: Point2,
    end: Point2,
    kind: EdgeKind,
    length: f64,
    // cached for arcs: radius and start angle
    radius: f64,
    theta0: f64,
}

impl EdgeGeometry {
    pub fn straight(start: Point2, end: Point2) -> Result<Self> {
        Self::new(start, end, EdgeKind::Straight)
    }

    pub fn new(start: Point2, end: Point2, kind: EdgeKind) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::EdgeGeometry("non-finite endpoint".into()));
        }
        let mut e = Self { start, end, kind, length: 0.0, radius: 0.0, theta0: 0.0 };
        let chord = start.distance(end);
        let scale = start.norm().max(end.norm()).max(chord).max(1e-300);
        match &e.kind {
            EdgeKind::Straight => {}
            EdgeKind::Arc { center, sweep } => {
                let r0 = start.distance(*center);
                let r1 = end.distance(*center);
                if !(sweep.is_finite() && *sweep != 0.0 && sweep.abs() < 2.0 * PI) {
                    return Err(Error::EdgeGeometry(format!("arc sweep {sweep} out of range")));
                }
                if r0 <= 0.0 || (r0 - r1).abs() > 1e-9 * scale {
                    return Err(Error::EdgeGeometry("arc endpoints are not equidistant from the center".into()));
                }
                e.radius = r0;
                e.theta0 = (start.y - center.y).atan2(start.x - center.x);
            }
            EdgeKind::Sine { amplitude, periods } => {
                if !amplitude.is_finite() || !periods.is_finite() || (2.0 * periods).fract() != 0.0 {
                    return Err(Error::EdgeGeometry("sine edge needs a whole number of half periods".into()));
                }
            }
            EdgeKind::Parametric(_) => {}
        }
        if chord == 0.0 && e.kind.is_straight() {
            return Err(Error::EdgeGeometry("zero-length edge".into()));
        }
        if !e.kind.is_straight() {
            if e.point(0.0).distance(start) > 1e-9 * scale || e.point(1.0).distance(end) > 1e-9 * scale {
                return Err(Error::EdgeGeometry("curve endpoints do not match the vertices".into()));
            }
            let speeds: Vec<f64> = (0..=64).map(|i| e.derivative(i as f64 / 64.0).norm()).collect();
            let smax = speeds.iter().cloned().fold(0.0, f64::max);
            let smin = speeds.iter().cloned().fold(f64::INFINITY, f64::min);
            if !(smin > 1e-8 * smax) {
                return Err(Error::EdgeGeometry("parametrization is not regular".into()));
            }
        }
        e.length = match &e.kind {
            EdgeKind::Straight => chord,
            EdgeKind::Arc { sweep, .. } => e.radius * sweep.abs(),
            _ => e.arc_length_between(0.0, 1.0),
        };
        if !(e.length > 0.0) {
            return Err(Error::EdgeGeometry("zero-length edge".into()));
        }
        Ok(e)
    }

    pub fn start(&self) -> Point2 {
        self.start
    }

    pub fn end(&self) -> Point2 {
        self.end
    }

    pub fn kind(&self) -> &EdgeKind {
        &self.kind
    }

    pub fn is_straight(&self) -> bool {
        self.kind.is_straight()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn point(&self, t: f64) -> Point2 {
        match &self.kind {
            EdgeKind::Straight => self.start.lerp(self.end, t),
            EdgeKind::Arc { center, sweep } => {
                let th = self.theta0 + sweep * t;
                *center + Point2::new(th.cos(), th.sin()) * self.radius
            }
            EdgeKind::Sine { amplitude, periods } => {
                let d = self.end - self.start;
                let nrm = d.perp().normalized();
                self.start + d * t + nrm * (amplitude * (2.0 * PI * periods * t).sin())
            }
            EdgeKind::Parametric(c) => c.point(t),
        }
    }

    pub fn derivative(&self, t: f64) -> Point2 {
        match &self.kind {
            EdgeKind::Straight => self.end - self.start,
            EdgeKind::Arc { sweep, .. } => {
                let th = self.theta0 + sweep * t;
                Point2::new(-th.sin(), th.cos()) * (self.radius * sweep)
            }
            EdgeKind::Sine { amplitude, periods } => {
                let d = self.end - self.start;
                let nrm = d.perp().normalized();
                let w = 2.0 * PI * periods;
                d + nrm * (amplitude * w * (w * t).cos())
            }
            EdgeKind::Parametric(c) => c.derivative(t),
        }
    }

    pub fn second_derivative(&self, t: f64) -> Point2 {
        match &self.kind {
            EdgeKind::Straight => Point2::default(),
            EdgeKind::Arc { sweep, .. } => {
                let th = self.theta0 + sweep * t;
                Point2::new(th.cos(), th.sin()) * (-self.radius * sweep * sweep)
            }
            EdgeKind::Sine { amplitude, periods } => {
                let d = self.end - self.start;
                let nrm = d.perp().normalized();
                let w = 2.0 * PI * periods;
                nrm * (-amplitude * w * w * (w * t).sin())
            }
            EdgeKind::Parametric(c) => c.second_derivative(t),
        }
    }

    pub fn speed(&self, t: f64) -> f64 {
        match &self.kind {
            EdgeKind::Straight => self.length,
            EdgeKind::Arc { .. } => self.length,
            _ => self.derivative(t).norm(),
        }
    }

    /// Outward unit normal for a counter-clockwise boundary.
    pub fn normal(&self, t: f64) -> Point2 {
        let d = self.derivative(t);
        Point2::new(d.y, -d.x) / d.norm()
    }

    /// Signed curvature; positive where the boundary is locally convex.
    pub fn curvature(&self, t: f64) -> f64 {
        match &self.kind {
            EdgeKind::Straight => 0.0,
            EdgeKind::Arc { sweep, .. } => sweep.signum() / self.radius,
            _ => {
                let d1 = self.derivative(t);
                let d2 = self.second_derivative(t);
                d1.cross(d2) / d1.norm().powi(3)
            }
        }
    }

    fn arc_length_between(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        let (gx, gw) = gauss_legendre(16);
        let panels = ((b - a).abs() * 32.0).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        let mut s = 0.0;
        for k in 0..panels {
            let lo = a + h * k as f64;
            for (x, w) in gx.iter().zip(gw.iter()) {
                s += w * self.speed(lo + 0.5 * h * (x + 1.0));
            }
        }
        s * 0.5 * h
    }

    /// Arc length from the start of the edge to parameter `t`.
    pub fn arc_length_at(&self, t: f64) -> f64 {
        match &self.kind {
            EdgeKind::Straight | EdgeKind::Arc { .. } => self.length * t,
            _ => {
                if t <= 0.0 {
                    0.0
                } else if t >= 1.0 {
                    self.length
                } else {
                    self.arc_length_between(0.0, t)
                }
            }
        }
    }

    /// Inverse of [`arc_length_at`](Self::arc_length_at).
    pub fn param_at_arc_length(&self, s: f64) -> f64 {
        let frac = (s / self.length).clamp(0.0, 1.0);
        match &self.kind {
            EdgeKind::Straight | EdgeKind::Arc { .. } => frac,
            _ => {
                if frac == 0.0 || frac == 1.0 {
                    return frac;
                }
                let (mut lo, mut hi) = (0.0, 1.0);
                let mut t = frac;
                for _ in 0..60 {
                    let f = self.arc_length_at(t) - s;
                    if f.abs() <= 1e-15 * self.length {
                        break;
                    }
                    if f > 0.0 {
                        hi = t;
                    } else {
                        lo = t;
                    }
                    let next = t - f / self.speed(t);
                    t = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
                }
                t
            }
        }
    }

    /// Closest point on the edge: `(t, distance)`.
    pub fn closest(&self, x: Point2) -> (f64, f64) {
        match &self.kind {
            EdgeKind::Straight => {
                let d = self.end - self.start;
                let t = ((x - self.start).dot(d) / d.norm_squared()).clamp(0.0, 1.0);
                (t, x.distance(self.point(t)))
            }
            EdgeKind::Arc { center, sweep } => {
                let th = (x.y - center.y).atan2(x.x - center.x);
                let mut delta = (th - self.theta0) * sweep.signum();
                delta = delta.rem_euclid(2.0 * PI);
                let t = delta / sweep.abs();
                let mut best = (0.0, x.distance(self.start));
                let de = x.distance(self.end);
                if de < best.1 {
                    best = (1.0, de);
                }
                if t <= 1.0 {
                    let di = x.distance(self.point(t));
                    if di < best.1 {
                        best = (t, di);
                    }
                }
                best
            }
            _ => {
                const SAMPLES: usize = 128;
                let mut bi = 0;
                let mut bd = f64::INFINITY;
                for i in 0..=SAMPLES {
                    let d = x.distance(self.point(i as f64 / SAMPLES as f64));
                    if d < bd {
                        bd = d;
                        bi = i;
                    }
                }
                let mut lo = (bi.saturating_sub(1)) as f64 / SAMPLES as f64;
                let mut hi = ((bi + 1).min(SAMPLES)) as f64 / SAMPLES as f64;
                for _ in 0..80 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if x.distance(self.point(m1)) <= x.distance(self.point(m2)) {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                let t = 0.5 * (lo + hi);
                let d = x.distance(self.point(t));
                if d < bd {
                    (t, d)
                } else {
                    (bi as f64 / SAMPLES as f64, bd)
                }
            }
        }
    }
}

/// JSON form of an element.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementSpec {
    pub vertices: Vec<Point2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<EdgeSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Element {
    vertices: Vec<Point2>,
    edges: Vec<EdgeGeometry>,
    offsets: Vec<f64>,
    perimeter: f64,
    diameter: f64,
    label: String,
}

/// Where a point sits relative to an element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Location {
    Inside,
    Boundary { edge: usize, t: f64 },
    Outside,
}

impl Element {
    /// Builds an element from a vertex ring and one edge kind per edge.
    ///
    /// The ring must already be counter-clockwise.
    pub fn new(vertices: Vec<Point2>, kinds: Vec<EdgeKind>, label: impl Into<String>) -> Result<Self> {
        let n = vertices.len();
        if n < 2 || (n < 3 && kinds.iter().all(|k| k.is_straight())) {
            return Err(Error::TooFewVertices(n));
        }
        if kinds.len() != n {
            return Err(Error::InvalidArgument(format!("{} vertices but {} edge kinds", n, kinds.len())));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("vertex {i} is not finite")));
            }
            if *v == vertices[(i + 1) % n] {
                return Err(Error::RepeatedVertex((i + 1) % n));
            }
        }
        let mut edges = Vec::with_capacity(n);
        for (i, kind) in kinds.into_iter().enumerate() {
            let e = EdgeGeometry::new(vertices[i], vertices[(i + 1) % n], kind).map_err(|err| match err {
                Error::EdgeGeometry(msg) if msg == "zero-length edge" => Error::DegenerateEdge(i),
                other => other,
            })?;
            edges.push(e);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        for e in &edges {
            offsets.push(acc);
            acc += e.length();
        }
        offsets.push(acc);
        let mut el = Self { vertices, edges, offsets, perimeter: acc, diameter: 0.0, label: label.into() };
        el.diameter = el.compute_diameter();
        for i in 0..n {
            el.interior_angle(i)?;
        }
        let area = el.signed_area();
        if !(area > 0.0) {
            return Err(Error::Orientation(area));
        }
        if el.is_straight() {
            check_simple(&el.vertices)?;
        }
        Ok(el)
    }

    pub fn from_spec(spec: &ElementSpec) -> Result<Self> {
        let label = spec.label.clone().unwrap_or_default();
        match &spec.edges {
            None => Ok(polygon_from_vertices(&spec.vertices)?.with_label(label)),
            Some(edges) => Self::new(
                spec.vertices.clone(),
                edges.iter().cloned().map(EdgeKind::from).collect(),
                label,
            ),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_spec(&serde_json::from_str(s)?)
    }

    /// JSON form, or `None` if some edge is a user curve.
    pub fn spec(&self) -> Option<ElementSpec> {
        let edges: Option<Vec<EdgeSpec>> = self.edges.iter().map(|e| e.kind().spec()).collect();
        Some(ElementSpec {
            vertices: self.vertices.clone(),
            edges: Some(edges?),
            label: if self.label.is_empty() { None } else { Some(self.label.clone()) },
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Point2 {
        self.vertices[i % self.vertices.len()]
    }

    pub fn edges(&self) -> &[EdgeGeometry] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &EdgeGeometry {
        &self.edges[i]
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_straight(&self) -> bool {
        self.edges.iter().all(|e| e.is_straight())
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    /// Arc length along the boundary from vertex 0 to the point `(edge, t)`.
    pub fn boundary_position(&self, edge: usize, t: f64) -> f64 {
        self.offsets[edge] + self.edges[edge].arc_length_at(t)
    }

    /// Diameter `h_K` (sampled along curved edges).
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    fn compute_diameter(&self) -> f64 {
        let pts = self.boundary_samples(64);
        let mut d: f64 = 0.0;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                d = d.max(a.distance(*b));
            }
        }
        d
    }

    fn boundary_samples(&self, per_curved_edge: usize) -> Vec<Point2> {
        let mut pts = Vec::new();
        for e in &self.edges {
            if e.is_straight() {
                pts.push(e.start());
            } else {
                for k in 0..per_curved_edge {
                    pts.push(e.point(k as f64 / per_curved_edge as f64));
                }
            }
        }
        pts
    }

    /// Applies `f(point, tangent)` at Gauss points along every edge and sums the
    /// results weighted in the parameter.
    fn boundary_integral(&self, f: impl Fn(Point2, Point2) -> f64) -> f64 {
        let (gx, gw) = gauss_legendre(16);
        let mut s = 0.0;
        for e in &self.edges {
            let panels = if e.is_straight() { 1 } else { 32 };
            let h = 1.0 / panels as f64;
            for k in 0..panels {
                for (x, w) in gx.iter().zip(gw.iter()) {
                    let t = h * (k as f64 + 0.5 * (x + 1.0));
                    s += 0.5 * h * w * f(e.point(t), e.derivative(t));
                }
            }
        }
        s
    }

    pub fn signed_area(&self) -> f64 {
        if self.is_straight() {
            let n = self.vertices.len();
            (0..n).map(|i| self.vertices[i].cross(self.vertices[(i + 1) % n])).sum::<f64>() * 0.5
        } else {
            self.boundary_integral(|p, d| 0.5 * p.cross(d))
        }
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point2 {
        let a = self.signed_area();
        if self.is_straight() {
            let n = self.vertices.len();
            let mut c = Point2::default();
            for i in 0..n {
                let p = self.vertices[i];
                let q = self.vertices[(i + 1) % n];
                c += (p + q) * p.cross(q);
            }
            c / (6.0 * a)
        } else {
            let cx = self.boundary_integral(|p, d| p.x * p.x * d.y) / (2.0 * a);
            let cy = -self.boundary_integral(|p, d| p.y * p.y * d.x) / (2.0 * a);
            Point2::new(cx, cy)
        }
    }

    pub fn vertex_centroid(&self) -> Point2 {
        let mut c = Point2::default();
        for v in &self.vertices {
            c += *v;
        }
        c / self.vertices.len() as f64
    }

    /// Interior angle at vertex `i` in units of π, from one-sided tangents.
    pub fn interior_angle(&self, i: usize) -> Result<f64> {
        let n = self.edges.len();
        if i >= n {
            return Err(Error::InvalidArgument(format!("vertex index {i} out of range")));
        }
        let t_in = self.edges[(i + n - 1) % n].derivative(1.0);
        let t_out = self.edges[i].derivative(0.0);
        let turn = t_in.cross(t_out).atan2(t_in.dot(t_out));
        let alpha = 1.0 - turn / PI;
        if alpha <= ANGLE_EPS || alpha >= 2.0 - ANGLE_EPS {
            return Err(Error::ZeroAngle(i));
        }
        Ok(alpha)
    }

    /// Closest boundary point: `(edge, t, distance)`.
    pub fn closest_boundary_point(&self, x: Point2) -> (usize, f64, f64) {
        let mut best = (0, 0.0, f64::INFINITY);
        for (i, e) in self.edges.iter().enumerate() {
            let (t, d) = e.closest(x);
            if d < best.2 {
                best = (i, t, d);
            }
        }
        best
    }

    pub fn boundary_tolerance(&self) -> f64 {
        BOUNDARY_TOLERANCE * self.diameter
    }

    /// Closest point `(t, distance)` on every edge.
    pub fn edge_distances(&self, x: Point2) -> Vec<(f64, f64)> {
        self.edges.iter().map(|e| e.closest(x)).collect()
    }

    pub fn locate(&self, x: Point2) -> Location {
        self.locate_with(x, &self.edge_distances(x))
    }

    /// [`locate`](Self::locate) reusing precomputed [`edge_distances`](Self::edge_distances).
    pub fn locate_with(&self, x: Point2, distances: &[(f64, f64)]) -> Location {
        let (edge, t, d) = distances
            .iter()
            .enumerate()
            .fold((0, 0.0, f64::INFINITY), |b, (i, &(t, d))| if d < b.2 { (i, t, d) } else { b });
        if d <= self.boundary_tolerance() {
            return Location::Boundary { edge, t };
        }
        let inside = if t > 1e-9 && t < 1.0 - 1e-9 {
            (x - self.edges[edge].point(t)).dot(self.edges[edge].normal(t)) < 0.0
        } else {
            self.winding_inside(x)
        };
        if inside {
            Location::Inside
        } else {
            Location::Outside
        }
    }

    /// True for points strictly inside.
    pub fn contains(&self, x: Point2) -> bool {
        self.locate(x) == Location::Inside
    }

    fn winding_inside(&self, x: Point2) -> bool {
        let mut pts = Vec::new();
        for e in &self.edges {
            if e.is_straight() {
                pts.push(e.start());
            } else {
                for k in 0..512 {
                    pts.push(e.point(k as f64 / 512.0));
                }
            }
        }
        let n = pts.len();
        let mut inside = false;
        for i in 0..n {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            if (a.y > x.y) != (b.y > x.y) {
                let xc = a.x + (x.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if x.x < xc {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Whether the closed segment from `c` to `p` stays in the closed element,
    /// checked by dense sampling.
    pub fn segment_visible(&self, c: Point2, p: Point2, samples: usize) -> bool {
        (1..samples).all(|k| {
            let q = c.lerp(p, k as f64 / samples as f64);
            !matches!(self.locate(q), Location::Outside)
        })
    }

    /// Translated copy.
    pub fn translated(&self, shift: Point2) -> Result<Self> {
        let kinds = self
            .edges
            .iter()
            .map(|e| match e.kind() {
                EdgeKind::Arc { center, sweep } => Ok(EdgeKind::Arc { center: *center + shift, sweep: *sweep }),
                EdgeKind::Parametric(_) => Err(Error::InvalidArgument("cannot translate a user curve".into())),
                k => Ok(k.clone()),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.vertices.iter().map(|v| *v + shift).collect(), kinds, self.label.clone())
    }
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    let on = |p: Point2, q: Point2, r: Point2, o: f64| {
        o == 0.0 && r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

fn check_simple(v: &[Point2]) -> Result<()> {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Err(Error::SelfIntersecting(i, j));
            }
        }
    }
    Ok(())
}

/// Straight-edged element from a simple vertex ring. Clockwise input is
/// reversed, keeping the first vertex first.
pub fn polygon_from_vertices(points: &[Point2]) -> Result<Element> {
    let n = points.len();
    if n < 3 {
        return Err(Error::TooFewVertices(n));
    }
    for i in 0..n {
        if points[i] == points[(i + 1) % n] {
            return Err(Error::RepeatedVertex((i + 1) % n));
        }
    }
    check_simple(points)?;
    let area: f64 = (0..n).map(|i| points[i].cross(points[(i + 1) % n])).sum::<f64>() * 0.5;
    let mut ring = points.to_vec();
    if area < 0.0 {
        ring[1..].reverse();
    }
    Element::new(ring, vec![EdgeKind::Straight; n], "")
}

/// Interior angle at `vertex_index` in units of π.
pub fn interior_angle(el: &Element, vertex_index: usize) -> Result<f64> {
    el.interior_angle(vertex_index)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShapeReport {
    pub h_k: f64,
    pub h_e_min: f64,
    /// Radius of the largest disc in the kernel; `None` for curved elements.
    pub rho_k: Option<f64>,
    pub z_k: Option<Point2>,
    pub sigma: Option<f64>,
    pub c: f64,
    /// `Some(false)` when the kernel is empty.
    pub star_shaped: Option<bool>,
}

/// Largest inscribed disc of the kernel of a straight polygon: `(radius, center)`.
/// A non-positive radius means the kernel has no interior.
pub fn chebyshev_center(el: &Element) -> Option<(f64, Point2)> {
    if !el.is_straight() {
        return None;
    }
    // half-planes nu . z - r >= nu . v, deduplicated by supporting line
    let mut planes: Vec<(Point2, f64)> = Vec::new();
    for e in el.edges() {
        let nu = (e.end() - e.start()).perp().normalized();
        let c = nu.dot(e.start());
        let dup = planes.iter().any(|(m, d)| (m.x - nu.x).abs() < 1e-12 && (m.y - nu.y).abs() < 1e-12 && (d - c).abs() < 1e-12 * el.diameter());
        if !dup {
            planes.push((nu, c));
        }
    }
    let k = planes.len();
    let mut best_r = f64::NEG_INFINITY;
    let mut hits: Vec<Point2> = Vec::new();
    let tol = 1e-12 * el.diameter();
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                let rows = [planes[a], planes[b], planes[c]];
                // solve [nu.x nu.y -1] [z.x z.y r]^T = d
                let m = [
                    [rows[0].0.x, rows[0].0.y, -1.0],
                    [rows[1].0.x, rows[1].0.y, -1.0],
                    [rows[2].0.x, rows[2].0.y, -1.0],
                ];
                let rhs = [rows[0].1, rows[1].1, rows[2].1];
                let Some(sol) = solve3(m, rhs) else { continue };
                let z = Point2::new(sol[0], sol[1]);
                let r = sol[2];
                if planes.iter().all(|(nu, d)| nu.dot(z) - r >= d - tol) {
                    if r > best_r + tol {
                        best_r = r;
                        hits.clear();
                        hits.push(z);
                    } else if (r - best_r).abs() <= tol {
                        hits.push(z);
                    }
                }
            }
        }
    }
    if hits.is_empty() {
        return Some((0.0, el.centroid()));
    }
    let mut z = Point2::default();
    for h in &hits {
        z += *h;
    }
    Some((best_r, z / hits.len() as f64))
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(m);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][col] = b[row];
        }
        *o = det(mc) / d;
    }
    Some(out)
}

pub fn shape_report(el: &Element) -> ShapeReport {
    let h_k = el.diameter();
    let h_e_min = el.edges().iter().map(|e| e.length()).fold(f64::INFINITY, f64::min);
    let (rho_k, z_k, star) = match chebyshev_center(el) {
        Some((r, z)) if r > 0.0 => (Some(r), Some(z), Some(true)),
        Some(_) => (None, None, Some(false)),
        None => (None, None, None),
    };
    ShapeReport {
        h_k,
        h_e_min,
        rho_k,
        z_k,
        sigma: rho_k.map(|r| h_k / r),
        c: h_k / h_e_min,
        star_shaped: star,
    }
}

/// Shortest arc-length distance along the boundary between two boundary points.
pub fn boundary_distance(el: &Element, a: Point2, b: Point2) -> Result<f64> {
    let sa = locate_on_boundary(el, a)?;
    let sb = locate_on_boundary(el, b)?;
    let d = (sa - sb).abs();
    Ok(d.min(el.perimeter() - d))
}

fn locate_on_boundary(el: &Element, x: Point2) -> Result<f64> {
    let (edge, t, d) = el.closest_boundary_point(x);
    if d > el.boundary_tolerance() {
        return Err(Error::NotOnBoundary { x: x.x, y: x.y });
    }
    Ok(el.boundary_position(edge, t))
}
