use std::sync::Arc;

use nyfem::geometry::{polygon_from_vertices, Element, Point2};
use nyfem::interpolation::{edge_coefficients, interpolate_with, EdgeInterpolant};
use nyfem::layer_potential::NystromOperator;
use nyfem::linalg::symmetric_eigenvalues;
use nyfem::poisson_space::{integrated_legendre, legendre, local_basis, BasisTag, EdgeVariant, LocalFunction, LocalSpace};
use nyfem::quadrature::{gauss_legendre, star_center, triangle_rule_7};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn poly(v: &[(f64, f64)]) -> Element {
    let p: Vec<Point2> = v.iter().map(|&q| q.into()).collect();
    polygon_from_vertices(&p).unwrap()
}

fn square() -> Element {
    poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
}

fn l_hexagon() -> Element {
    poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (0.0, -1.0)])
}

fn octagon() -> Element {
    poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (-1.0, 1.0), (-1.0, 0.0), (-1.0, -1.0), (0.0, -1.0)])
}

fn pentagon() -> Element {
    poly(&[(0.0, 0.0), (1.0, -0.1), (1.3, 0.7), (0.5, 1.2), (-0.2, 0.6)])
}

#[test]
fn catalog_dimensions() {
    assert_eq!(local_basis(&octagon(), 1, 32, 6).unwrap().dim(), 8);
    assert_eq!(local_basis(&square(), 3, 32, 6).unwrap().dim(), 15);
    assert_eq!(local_basis(&l_hexagon(), 2, 32, 6).unwrap().dim(), 13);
}

#[test]
fn edge_bubbles_vanish_at_vertices() {
    let sp = local_basis(&pentagon(), 4, 32, 6).unwrap();
    let el = sp.element();
    for b in sp.basis().iter().filter(|b| matches!(b.tag, BasisTag::Edge { .. })) {
        for e in 0..el.num_edges() {
            assert!(b.function.boundary_value(e, 0.0).unwrap().abs() < 1e-12);
            assert!(b.function.boundary_value(e, 1.0).unwrap().abs() < 1e-12);
        }
    }
}

#[test]
fn degrees_of_freedom_are_unisolvent() {
    for el in [square(), l_hexagon()] {
        for m in 1..=3 {
            let sp = local_basis(&el, m, 32, 6).unwrap();
            let c = sp.unisolvence_condition().unwrap();
            eprintln!("{} m={m}: condition {c:.3e}", el.label());
            assert!(c.is_finite() && c < 1e8, "{} m={m}: {c:e}", el.label());
        }
    }
}

#[test]
fn triangle_hats_are_barycentric() {
    let el = poly(&[(0.0, 0.0), (1.0, 0.2), (0.3, 0.9)]);
    let sp = local_basis(&el, 1, 64, 6).unwrap();
    let v = el.vertices();
    let area2 = (v[1] - v[0]).cross(v[2] - v[0]);
    let x = Point2::new(0.4, 0.35);
    for (i, b) in sp.basis().iter().enumerate() {
        let (p, q) = (v[(i + 1) % 3], v[(i + 2) % 3]);
        let lambda = (q - p).cross(x - p) / area2;
        assert!((b.function.value(x).unwrap() - lambda).abs() < 1e-9);
    }
}

fn projection_error(sp: &LocalSpace, f: &LocalFunction, pts: &[Point2]) -> f64 {
    let target = |x: Point2| f.value(x).unwrap();
    let li = interpolate_with(sp.operator(), &target, sp.degree(), sp.variant()).unwrap();
    pts.iter().map(|x| (li.function.value(*x).unwrap() - target(*x)).abs()).fold(0.0, f64::max)
}

#[test]
fn interpolation_reproduces_the_catalog() {
    let pts = [Point2::new(0.5, 0.3), Point2::new(0.8, 0.6), Point2::new(0.3, 0.7)];
    for (el, m) in [(square(), 2), (pentagon(), 3)] {
        let sp = local_basis(&el, m, 48, 6).unwrap();
        for b in sp.basis() {
            let e = projection_error(&sp, &b.function, &pts);
            assert!(e < 1e-7, "{} m={m} {:?}: {e:e}", el.label(), b.tag);
        }
    }
}

/// Fan of triangles from the star center, each split into `k²` pieces with
/// the 7-point rule on every piece.
fn fine_rule(el: &Element, k: usize) -> Vec<(Point2, f64)> {
    let c = star_center(el).unwrap();
    let tri = triangle_rule_7();
    let mut out = Vec::new();
    for e in el.edges() {
        let (a, b) = (e.start() - c, e.end() - c);
        let at = |i: usize, j: usize| c + a * (i as f64 / k as f64) + b * (j as f64 / k as f64);
        let mut push = |p: Point2, q: Point2, r: Point2| {
            let area = 0.5 * (q - p).cross(r - p);
            for (l, w) in &tri {
                out.push((p * l[0] + q * l[1] + r * l[2], w * area));
            }
        };
        for i in 0..k {
            for j in 0..k - i {
                push(at(i, j), at(i + 1, j), at(i, j + 1));
                if i + j + 1 < k {
                    push(at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
                }
            }
        }
    }
    out
}

#[test]
fn gram_matches_gradient_form_and_is_negative_definite() {
    let el = pentagon();
    let sp = local_basis(&el, 4, 128, 6).unwrap();
    let interior: Vec<_> = sp.basis().iter().filter_map(|b| if let BasisTag::Interior { beta } = b.tag { Some((beta, &b.function)) } else { None }).collect();
    let nodes = fine_rule(&el, 24);
    let k = interior.len();
    let grads: Vec<Vec<Point2>> = interior.iter().map(|(_, f)| nodes.iter().map(|(x, _)| f.gradient(*x).unwrap()).collect()).collect();
    let vals: Vec<Vec<f64>> = interior.iter().map(|(_, f)| nodes.iter().map(|(x, _)| f.value(*x).unwrap()).collect()).collect();
    let (z, h) = (sp.monomial_center(), sp.monomial_scale());
    let p = |beta: (u32, u32), x: Point2| ((x.x - z.x) / h).powi(beta.0 as i32) * ((x.y - z.y) / h).powi(beta.1 as i32);
    let mut gram = faer::Mat::<f64>::zeros(k, k);
    let (mut diff, mut size): (f64, f64) = (0.0, 0.0);
    for i in 0..k {
        for j in 0..k {
            let g: f64 = nodes.iter().enumerate().map(|(q, (x, w))| w * p(interior[i].0, *x) * vals[j][q]).sum();
            let s: f64 = nodes.iter().enumerate().map(|(q, (_, w))| -w * grads[i][q].dot(grads[j][q])).sum();
            diff = diff.max((g - s).abs());
            size = size.max(g.abs());
            gram[(i, j)] = g;
        }
    }
    assert!(diff <= 1e-6 * size, "{diff:e} vs {size:e}");
    let ev = symmetric_eigenvalues(&gram).unwrap();
    assert!(ev.iter().all(|e| *e < 0.0), "{ev:?}");
}

fn smooth(x: Point2) -> f64 {
    (1.3 * x.x).sin() * (0.7 * x.y).cosh() + x.x * x.y * x.y
}

#[test]
fn edge_moments_are_reproduced() {
    let el = pentagon();
    let op = NystromOperator::new(el.clone(), 32, 6).unwrap();
    let (gx, gw) = gauss_legendre(64);
    let sup = (0..=100).map(|k| smooth(el.edge(0).point(k as f64 / 100.0)).abs()).fold(0.0, f64::max);
    for m in 2..=4 {
        let li = interpolate_with(&op, &smooth, m, EdgeVariant::Type1).unwrap();
        for e in 0..el.num_edges() {
            let len = el.edge(e).length();
            for i in 0..=m - 2 {
                let mut s = 0.0;
                for (u, w) in gx.iter().zip(gw.iter()) {
                    let sigma = 0.5 * (1.0 - u);
                    let d = li.function.boundary_value(e, sigma).unwrap() - smooth(el.edge(e).point(sigma));
                    s += 0.5 * len * w * d * legendre(i, *u);
                }
                assert!(s.abs() <= 1e-9 * sup.max(1.0) * len, "m={m} e={e} i={i}: {s:e}");
            }
        }
    }
}

#[test]
fn parts_assemble_to_the_interpolant() {
    let el = pentagon();
    let op = NystromOperator::new(el.clone(), 48, 6).unwrap();
    let m = 3;
    let sp = LocalSpace::new(Arc::clone(&op), m, EdgeVariant::Type1).unwrap();
    let li = interpolate_with(&op, &smooth, m, EdgeVariant::Type1).unwrap();
    let mut terms: Vec<(f64, &LocalFunction)> = Vec::new();
    for b in sp.basis() {
        let c = match b.tag {
            BasisTag::Vertex(v) => smooth(el.vertex(v)),
            BasisTag::Edge { edge, index } => match &li.edges[edge] {
                EdgeInterpolant::Moments(c) => c.bubbles[index],
                EdgeInterpolant::Nodal(_) => unreachable!(),
            },
            BasisTag::Interior { beta } => li.interior.iter().find(|(b, _)| *b == beta).unwrap().1,
        };
        terms.push((c, &b.function));
    }
    let vertex: Vec<_> = terms.iter().zip(sp.basis()).filter(|(_, b)| matches!(b.tag, BasisTag::Vertex(_))).map(|(t, _)| *t).collect();
    let edge: Vec<_> = terms.iter().zip(sp.basis()).filter(|(_, b)| matches!(b.tag, BasisTag::Edge { .. })).map(|(t, _)| *t).collect();
    let inner: Vec<_> = terms.iter().zip(sp.basis()).filter(|(_, b)| matches!(b.tag, BasisTag::Interior { .. })).map(|(t, _)| *t).collect();
    let parts: Vec<LocalFunction> = [vertex, edge, inner].iter().map(|t| LocalFunction::linear_combination(t).unwrap()).collect();
    for x in [Point2::new(0.5, 0.3), Point2::new(0.9, 0.7), Point2::new(0.1, 0.5)] {
        let sum: f64 = parts.iter().map(|f| f.value(x).unwrap()).sum();
        let joint = li.function.value(x).unwrap();
        assert!((sum - joint).abs() < 1e-9, "{x}: {sum} vs {joint}");
    }
}

/// `|f|²_{H¹(e)}` on the unit edge by 64-point Gauss and central differences.
fn h1_seminorm_sq(f: impl Fn(f64) -> f64) -> f64 {
    let (gx, gw) = gauss_legendre(64);
    let h = 1e-6;
    gx.iter().zip(gw.iter()).map(|(u, w)| {
        let s = 0.5 * (u + 1.0);
        let d = (f(s + h) - f(s - h)) / (2.0 * h);
        0.5 * w * d * d
    }).sum()
}

#[test]
fn edge_trace_is_the_h1_best_approximation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let gs: [fn(f64) -> f64; 3] = [|s| (3.0 * s).sin(), |s| (s + 0.2).sqrt(), |s| (2.0 * s).exp() * s];
    for g in gs {
        for m in 1..=4 {
            let c = edge_coefficients(g, m);
            let best = h1_seminorm_sq(|s| g(s) - c.value(s));
            for _ in 0..50 {
                // competitors share the endpoint values
                let d: Vec<f64> = (2..=m).map(|_| rng.random_range(-0.5..0.5)).collect();
                let other = h1_seminorm_sq(|s| {
                    let u = 1.0 - 2.0 * s;
                    g(s) - c.value(s) - d.iter().enumerate().map(|(k, dk)| dk * integrated_legendre(k + 2, u).0).sum::<f64>()
                });
                assert!(best <= other + 1e-12, "m={m}: {best:e} > {other:e}");
            }
        }
    }
}
