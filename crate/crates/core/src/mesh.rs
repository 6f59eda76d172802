//! Conforming polygonal meshes, global DOF numbering and the mesh families
//! used by the experiments.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{EdgeKind, EdgeSpec, Element, Point2};

#[derive(Clone, Debug)]
pub struct Cell {
    pub element: Element,
    pub vertices: Vec<usize>,
    /// Global edge of each side, and whether the side runs from the lower to
    /// the higher vertex id.
    pub edges: Vec<(usize, bool)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeshEdge {
    /// Lower id first.
    pub vertices: (usize, usize),
    /// `(cell, side)` incidences.
    pub cells: Vec<(usize, usize)>,
}

impl MeshEdge {
    pub fn is_boundary(&self) -> bool {
        self.cells.len() == 1
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    label: String,
    vertices: Vec<Point2>,
    cells: Vec<Cell>,
    edges: Vec<MeshEdge>,
}

/// Cell description used by [`Mesh::new`] and the JSON format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellSpec {
    pub vertices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<EdgeSpec>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshSpec {
    #[serde(default)]
    pub label: String,
    pub vertices: Vec<Point2>,
    pub cells: Vec<CellSpec>,
}

impl Mesh {
    pub fn new(label: impl Into<String>, vertices: Vec<Point2>, cells: Vec<(Vec<usize>, Vec<EdgeKind>)>) -> Result<Self> {
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<MeshEdge> = Vec::new();
        let mut out_cells = Vec::with_capacity(cells.len());
        for (ci, (ids, kinds)) in cells.into_iter().enumerate() {
            if let Some(&bad) = ids.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::NonConforming(format!("cell {ci} refers to missing vertex {bad}")));
            }
            let pts: Vec<Point2> = ids.iter().map(|&i| vertices[i]).collect();
            let element = Element::new(pts, kinds, format!("cell {ci}"))?;
            let k = ids.len();
            let mut cell_edges = Vec::with_capacity(k);
            for side in 0..k {
                let (a, b) = (ids[side], ids[(side + 1) % k]);
                let key = (a.min(b), a.max(b));
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(MeshEdge { vertices: key, cells: Vec::new() });
                    edges.len() - 1
                });
                edges[id].cells.push((ci, side));
                cell_edges.push((id, a < b));
            }
            out_cells.push(Cell { element, vertices: ids, edges: cell_edges });
        }
        let mesh = Self { label: label.into(), vertices, cells: out_cells, edges };
        mesh.check_conforming()?;
        Ok(mesh)
    }

    pub fn from_spec(spec: &MeshSpec) -> Result<Self> {
        let cells = spec
            .cells
            .iter()
            .map(|c| {
                let kinds = match &c.edges {
                    Some(e) => e.iter().cloned().map(EdgeKind::from).collect(),
                    None => vec![EdgeKind::Straight; c.vertices.len()],
                };
                (c.vertices.clone(), kinds)
            })
            .collect();
        Self::new(spec.label.clone(), spec.vertices.clone(), cells)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_spec(&serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// JSON description; `None` if some edge is parametric.
    pub fn spec(&self) -> Option<MeshSpec> {
        let cells = self
            .cells
            .iter()
            .map(|c| {
                let edges = if c.element.is_straight() {
                    None
                } else {
                    Some(c.element.edges().iter().map(|e| e.kind().spec()).collect::<Option<Vec<_>>>()?)
                };
                Some(CellSpec { vertices: c.vertices.clone(), edges })
            })
            .collect::<Option<Vec<_>>>()?;
        Some(MeshSpec { label: self.label.clone(), vertices: self.vertices.clone(), cells })
    }

    fn check_conforming(&self) -> Result<()> {
        for (i, e) in self.edges.iter().enumerate() {
            match e.cells.as_slice() {
                [_] => {}
                [(c0, s0), (c1, s1)] => {
                    let d0 = self.cells[*c0].edges[*s0].1;
                    let d1 = self.cells[*c1].edges[*s1].1;
                    if d0 == d1 {
                        return Err(Error::NonConforming(format!("edge {i} has the same orientation in both cells")));
                    }
                }
                more => return Err(Error::NonConforming(format!("edge {i} is shared by {} cells", more.len()))),
            }
        }
        // hanging vertices must be vertices of every cell whose edge they lie on
        let h = self.h_max().max(1.0);
        for (i, e) in self.edges.iter().enumerate() {
            let (c, s) = e.cells[0];
            let geom = self.cells[c].element.edge(s);
            if !geom.is_straight() {
                continue;
            }
            let (a, b) = (geom.start(), geom.end());
            let (lo, hi) = (Point2::new(a.x.min(b.x), a.y.min(b.y)), Point2::new(a.x.max(b.x), a.y.max(b.y)));
            for (vi, v) in self.vertices.iter().enumerate() {
                if vi == e.vertices.0 || vi == e.vertices.1 {
                    continue;
                }
                let tol = 1e-12 * h;
                if v.x < lo.x - tol || v.x > hi.x + tol || v.y < lo.y - tol || v.y > hi.y + tol {
                    continue;
                }
                let d = b - a;
                let t = (*v - a).dot(d) / d.norm_squared();
                if t > 1e-12 && t < 1.0 - 1e-12 && (a + d * t).distance(*v) < tol {
                    return Err(Error::NonConforming(format!("vertex {vi} lies inside edge {i}")));
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// `V - E + F`; 1 for a simply connected mesh.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.cells.len() as i64
    }

    pub fn h_max(&self) -> f64 {
        self.cells.iter().map(|c| c.element.diameter()).fold(0.0, f64::max)
    }

    pub fn area(&self) -> f64 {
        self.cells.iter().map(|c| c.element.area()).sum()
    }

    /// Splits every cell into quadrilaterals by joining edge midpoints to the
    /// vertex centroid. Needs straight edges.
    pub fn refine_uniform(&self) -> Result<Mesh> {
        if self.cells.iter().any(|c| !c.element.is_straight()) {
            return Err(Error::InvalidArgument("uniform refinement needs straight edges".into()));
        }
        let mut vertices = self.vertices.clone();
        let mut mid = vec![0usize; self.edges.len()];
        for (i, e) in self.edges.iter().enumerate() {
            vertices.push((self.vertices[e.vertices.0] + self.vertices[e.vertices.1]) * 0.5);
            mid[i] = vertices.len() - 1;
        }
        let mut cells = Vec::new();
        for c in &self.cells {
            vertices.push(c.element.vertex_centroid());
            let center = vertices.len() - 1;
            let k = c.vertices.len();
            for i in 0..k {
                let prev = mid[c.edges[(i + k - 1) % k].0];
                let next = mid[c.edges[i].0];
                cells.push((vec![c.vertices[i], next, center, prev], vec![EdgeKind::Straight; 4]));
            }
        }
        Mesh::new(self.label.clone(), vertices, cells)
    }
}

fn grid_mesh(label: String, h: f64, squares: impl Iterator<Item = (i64, i64)>, extra: Option<Vec<(i64, i64)>>) -> Result<Mesh> {
    let mut ids: HashMap<(i64, i64), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut id = |p: (i64, i64), vertices: &mut Vec<Point2>| {
        *ids.entry(p).or_insert_with(|| {
            vertices.push(Point2::new(p.0 as f64 * h, p.1 as f64 * h));
            vertices.len() - 1
        })
    };
    let mut cells = Vec::new();
    if let Some(ring) = extra {
        let vs: Vec<usize> = ring.iter().map(|p| id(*p, &mut vertices)).collect();
        let k = vs.len();
        cells.push((vs, vec![EdgeKind::Straight; k]));
    }
    for (i, j) in squares {
        let vs = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)].map(|p| id(p, &mut vertices)).to_vec();
        cells.push((vs, vec![EdgeKind::Straight; 4]));
    }
    Mesh::new(label, vertices, cells)
}

/// Uniform square mesh of the unit square with `4·2^level` cells per side.
pub fn square_mesh_family(level: u32) -> Result<Mesh> {
    let k = 4i64 << level;
    grid_mesh(format!("square level {level}"), 1.0 / k as f64, (0..k).flat_map(move |j| (0..k).map(move |i| (i, j))), None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LshapeVariant {
    /// One L-shaped cell `(-1/3,1/3)² \ [0,1/3]²` surrounded by `24n²` squares.
    WithLElement,
    /// Congruent squares with a vertex count closest to the first family.
    AllSquares,
}

/// Vertex count of the first L-shape family, `(2n+1)(12n+1)+1`.
pub fn lshape_vertex_count(n: usize) -> usize {
    (2 * n + 1) * (12 * n + 1) + 1
}

/// `k ≥ 1` whose square mesh with side `1/k` has `(k+1)(3k+1)` vertices
/// closest to the first family at `n` (the smaller `k` on ties).
pub fn lshape_squares_for(n: usize) -> usize {
    let target = lshape_vertex_count(n) as i64;
    (1..=(4 * n + 4))
        .min_by_key(|&k| (((k + 1) * (3 * k + 1)) as i64 - target).abs())
        .unwrap_or(1)
}

/// Meshes of `(-1,1)² \ [0,1]²`.
pub fn lshape_family(n: usize, variant: LshapeVariant) -> Result<Mesh> {
    if n < 1 {
        return Err(Error::InvalidArgument("L-shape family index starts at 1".into()));
    }
    match variant {
        LshapeVariant::WithLElement => {
            let m = 3 * n as i64;
            let c = n as i64;
            let in_l = move |i: i64, j: i64| i >= -c && i < c && j >= -c && j < c;
            let squares = (-m..m)
                .flat_map(move |j| (-m..m).map(move |i| (i, j)))
                .filter(move |&(i, j)| !(i >= 0 && j >= 0) && !in_l(i, j));
            // the reentrant sides lie on the domain boundary and are single edges
            let mut ring = vec![(0, 0), (0, c)];
            ring.extend((1..=c).map(|i| (-i, c)));
            ring.extend((1..=2 * c).map(|j| (-c, c - j)));
            ring.extend((1..=2 * c).map(|i| (-c + i, -c)));
            ring.extend((1..=c).map(|j| (c, -c + j)));
            grid_mesh(format!("L-shape with L-cell n={n}"), 1.0 / m as f64, squares, Some(ring))
        }
        LshapeVariant::AllSquares => {
            let k = lshape_squares_for(n) as i64;
            let squares = (-k..k).flat_map(move |j| (-k..k).map(move |i| (i, j))).filter(|&(i, j)| !(i >= 0 && j >= 0));
            grid_mesh(format!("L-shape squares k={k}"), 1.0 / k as f64, squares, None)
        }
    }
}

/// `K_h = {0 ≤ x ≤ h, (h/4) sin(2πx/h) ≤ y ≤ h}`: a sinusoidal bottom edge
/// and three straight edges.
pub fn curved_element(h: f64) -> Result<Element> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("element size must be positive, got {h}")));
    }
    Element::new(
        vec![Point2::new(0.0, 0.0), Point2::new(h, 0.0), Point2::new(h, h), Point2::new(0.0, h)],
        vec![EdgeKind::Sine { amplitude: h / 4.0, periods: 1.0 }, EdgeKind::Straight, EdgeKind::Straight, EdgeKind::Straight],
        format!("K_h h={h}"),
    )
}

/// Global numbering: vertices, then `m - 1` moments per edge, then
/// `C(m,2)` interior moments per cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DofMap {
    pub m: usize,
    pub num_vertices: usize,
    pub num_edges: usize,
    pub num_cells: usize,
    pub dim: usize,
}

impl DofMap {
    pub fn vertex_dof(&self, v: usize) -> usize {
        v
    }

    /// DOF of moment `k` (`k < m - 1`) on global edge `e`.
    pub fn edge_dof(&self, e: usize, k: usize) -> usize {
        self.num_vertices + e * (self.m - 1) + k
    }

    pub fn interior_dof(&self, cell: usize, k: usize) -> usize {
        let per = self.m * (self.m - 1) / 2;
        self.num_vertices + self.num_edges * (self.m - 1) + cell * per + k
    }

    /// Local-to-global map of one cell in the local basis order (vertices,
    /// edge bubbles side by side, interior), with the sign `(-1)^j` of a
    /// bubble of order `j` on a side running against the global orientation.
    pub fn cell_dofs(&self, mesh: &Mesh, cell: usize) -> Vec<(usize, f64)> {
        let c = &mesh.cells()[cell];
        let mut out: Vec<(usize, f64)> = c.vertices.iter().map(|&v| (self.vertex_dof(v), 1.0)).collect();
        for &(e, forward) in &c.edges {
            for k in 0..self.m.saturating_sub(1) {
                let j = k + 2;
                let s = if forward || j % 2 == 0 { 1.0 } else { -1.0 };
                out.push((self.edge_dof(e, k), s));
            }
        }
        for k in 0..self.m * self.m.saturating_sub(1) / 2 {
            out.push((self.interior_dof(cell, k), 1.0));
        }
        out
    }
}

pub fn dof_map(mesh: &Mesh, m: usize) -> Result<DofMap> {
    if m < 1 {
        return Err(Error::InvalidArgument("polynomial degree m must be at least 1".into()));
    }
    mesh.check_conforming()?;
    let (v, e, c) = (mesh.num_vertices(), mesh.num_edges(), mesh.num_cells());
    Ok(DofMap { m, num_vertices: v, num_edges: e, num_cells: c, dim: c * m * (m - 1) / 2 + e * (m - 1) + v })
}
