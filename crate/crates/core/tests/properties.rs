use std::f64::consts::PI;

use nyfem::geometry::{boundary_distance, interior_angle, polygon_from_vertices, EdgeKind, Element, Point2};
use nyfem::layer_potential::{assemble_matrix, double_layer_kernel, gauss_sum, kernel_gradient, point_data, solve_dirichlet};
use nyfem::linalg::mat_vec;
use nyfem::poisson_space::{integrated_legendre, local_dimension, polynomial_dimension};
use nyfem::poly::{particular_solution, Poly2};
use nyfem::quadrature::{interior_rule, kress_rule, sigmoid, star_center};
use num_rational::Rational64 as Q;
use proptest::prelude::*;

/// Star-shaped polygon about the origin from angle gaps and radii.
fn star_polygon(gaps: &[f64], radii: &[f64]) -> Vec<Point2> {
    let total: f64 = gaps.iter().sum();
    let mut a: f64 = 0.0;
    gaps.iter()
        .zip(radii)
        .map(|(g, r)| {
            let p = Point2::new(r * a.cos(), r * a.sin());
            a += 2.0 * PI * g / total;
            p
        })
        .collect()
}

fn polygon_strategy() -> impl Strategy<Value = Vec<Point2>> {
    (3usize..=8).prop_flat_map(|n| {
        (prop::collection::vec(0.5f64..1.5, n), prop::collection::vec(0.5f64..1.0, n)).prop_map(|(g, r)| star_polygon(&g, &r))
    })
}

fn convex_strategy() -> impl Strategy<Value = Vec<Point2>> {
    (3usize..=7).prop_flat_map(|n| prop::collection::vec(0.5f64..1.5, n).prop_map(move |g| star_polygon(&g, &vec![1.0; n])))
}

fn l_hexagon() -> Element {
    let v: Vec<Point2> = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (0.0, -1.0)].iter().map(|&p| p.into()).collect();
    polygon_from_vertices(&v).unwrap()
}

fn sector() -> Element {
    Element::new(
        vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, -1.0)],
        vec![EdgeKind::Straight, EdgeKind::Arc { center: Point2::new(0.0, 0.0), sweep: 1.5 * PI }, EdgeKind::Straight],
        "sector",
    )
    .unwrap()
}

/// `∫_K x^a y^b` by the divergence theorem, `∮ x^{a+1} y^b / (a+1) dy`,
/// with a 5-point Gauss rule per straight edge.
fn green_monomial(v: &[Point2], a: i32, b: i32) -> f64 {
    const X: [f64; 5] = [0.0, -0.5384693101056831, 0.5384693101056831, -0.906179845938664, 0.906179845938664];
    const W: [f64; 5] = [0.5688888888888889, 0.47862867049936647, 0.47862867049936647, 0.23692688505618908, 0.23692688505618908];
    let mut s = 0.0;
    for i in 0..v.len() {
        let (p, q) = (v[i], v[(i + 1) % v.len()]);
        for (x, w) in X.iter().zip(W) {
            let r = p.lerp(q, 0.5 * (x + 1.0));
            s += 0.5 * w * r.x.powi(a + 1) * r.y.powi(b) / (a + 1) as f64 * (q.y - p.y);
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constructed_elements_are_counter_clockwise(v in polygon_strategy()) {
        let mut rev = v.clone();
        rev.reverse();
        for pts in [v, rev] {
            let el = polygon_from_vertices(&pts).unwrap();
            prop_assert!(el.signed_area() > 0.0);
        }
    }

    #[test]
    fn interior_angles_sum_to_polygon_total(v in polygon_strategy()) {
        let el = polygon_from_vertices(&v).unwrap();
        let n = el.num_edges();
        // angles are returned as multiples of π
        let s: f64 = (0..n).map(|i| PI * interior_angle(&el, i).unwrap()).sum();
        prop_assert!((s - (n as f64 - 2.0) * PI).abs() < 1e-12);
    }

    #[test]
    fn vertices_are_visible_from_star_center(v in polygon_strategy()) {
        let el = polygon_from_vertices(&v).unwrap();
        let z = star_center(&el).unwrap();
        for p in el.vertices() {
            prop_assert!(el.segment_visible(z, *p, 400));
        }
    }

    #[test]
    fn boundary_distance_is_a_metric(v in polygon_strategy(), s in prop::collection::vec((0usize..8, 0.0f64..1.0), 3)) {
        let el = polygon_from_vertices(&v).unwrap();
        let pts: Vec<Point2> = s.iter().map(|&(e, t)| el.edge(e % el.num_edges()).point(t)).collect();
        let d = |a: usize, b: usize| boundary_distance(&el, pts[a], pts[b]).unwrap();
        prop_assert!((d(0, 1) - d(1, 0)).abs() < 1e-12);
        prop_assert!(d(0, 0).abs() < 1e-12);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-12);
    }

    #[test]
    fn sigmoid_is_symmetric(tau in 0.0f64..1.0, p in 2u32..=10) {
        let a = sigmoid(tau, p).unwrap().0;
        let b = sigmoid(1.0 - tau, p).unwrap().0;
        prop_assert!((a + b - 1.0).abs() < 1e-14);
    }

    #[test]
    fn straight_edge_nodes_are_convex_combinations(v in polygon_strategy(), n in 2usize..40, p in 2u32..=8) {
        let el = polygon_from_vertices(&v).unwrap();
        let rule = kress_rule(&el, n, p).unwrap();
        for q in rule.nodes() {
            let (z, z1) = (el.edge(q.edge).start(), el.edge(q.edge).end());
            let tau = q.k as f64 / n as f64;
            let x = z * sigmoid(1.0 - tau, p).unwrap().0 + z1 * sigmoid(tau, p).unwrap().0;
            prop_assert!((q.point - x).norm() < 1e-14 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn interior_rule_is_exact_to_degree_five(v in convex_strategy(), a in 0i32..=5, b in 0i32..=5) {
        prop_assume!(a + b <= 5);
        let el = polygon_from_vertices(&v).unwrap();
        let rule = interior_rule(&el).unwrap();
        let got = rule.integrate(|x| x.x.powi(a) * x.y.powi(b));
        prop_assert!((got - green_monomial(el.vertices(), a, b)).abs() < 1e-13);
    }

    #[test]
    fn kernel_gradient_matches_differences(
        x in (-2.0f64..2.0, -2.0f64..2.0),
        y in (-2.0f64..2.0, -2.0f64..2.0),
        ang in 0.0f64..(2.0 * PI),
    ) {
        let (x, y) = (Point2::new(x.0, x.1), Point2::new(y.0, y.1));
        prop_assume!((x - y).norm() > 0.2);
        let n = Point2::new(ang.cos(), ang.sin());
        let g = kernel_gradient(x, y, n);
        let h = 1e-5;
        let dx = Point2::new(h, 0.0);
        let dy = Point2::new(0.0, h);
        let fx = (double_layer_kernel(x + dx, y, n) - double_layer_kernel(x - dx, y, n)) / (2.0 * h);
        let fy = (double_layer_kernel(x + dy, y, n) - double_layer_kernel(x - dy, y, n)) / (2.0 * h);
        prop_assert!((g.x - fx).abs() <= 1e-6 && (g.y - fy).abs() <= 1e-6);
    }

    #[test]
    fn lift_is_exact(coefs in prop::collection::vec((0u32..=6, 0u32..=6, -20i64..=20), 1..6)) {
        let z = Point2::default();
        let p = Poly2::from_terms(z, coefs.iter().filter(|c| c.0 + c.1 <= 6).map(|c| ((c.0, c.1), Q::from_integer(c.2))));
        prop_assert_eq!(particular_solution(&p).laplacian(), p);
    }

    #[test]
    fn lift_is_linear(
        a in prop::collection::vec((0u32..=5, 0u32..=5, -9i64..=9), 1..5),
        b in prop::collection::vec((0u32..=5, 0u32..=5, -9i64..=9), 1..5),
    ) {
        let z = Point2::default();
        let mk = |c: &[(u32, u32, i64)]| Poly2::from_terms(z, c.iter().map(|c| ((c.0, c.1), Q::from_integer(c.2))));
        let (p1, p2) = (mk(&a), mk(&b));
        prop_assert_eq!(particular_solution(&(&p1 + &p2)), &particular_solution(&p1) + &particular_solution(&p2));
    }

    #[test]
    fn constant_density_residual(v in polygon_strategy(), n in 4usize..24, p in 2u32..=8, c in -5.0f64..5.0) {
        let el = polygon_from_vertices(&v).unwrap();
        let a = assemble_matrix(&kress_rule(&el, n, p).unwrap());
        let phi = vec![-c; a.nrows()];
        for r in mat_vec(&a, &phi) {
            prop_assert!((r + c).abs() <= 1e-13 * (1.0 + c.abs()));
        }
    }
}

#[test]
fn sigmoid_is_monotone() {
    // Near τ = 1 the values round to 1.0, so the upper half is checked
    // through 1 - η(τ) = η(1 - τ).
    for p in 2..=10 {
        let lower: Vec<f64> = (0..=500).map(|i| sigmoid(i as f64 / 1000.0, p).unwrap().0).collect();
        let upper: Vec<f64> = (500..=1000).map(|i| sigmoid(1.0 - i as f64 / 1000.0, p).unwrap().0).collect();
        assert!(lower.windows(2).all(|w| w[0] < w[1]), "p = {p}");
        assert!(upper.windows(2).all(|w| w[0] > w[1]), "p = {p}");
    }
}

#[test]
fn constant_data_gives_constant_density() {
    for el in [l_hexagon(), sector()] {
        for c in [1.0, -2.5] {
            let sol = solve_dirichlet(&el, point_data(move |_| c), 32, 6).unwrap();
            assert!(sol.density().iter().all(|d| (d + c).abs() < 1e-12));
        }
    }
}

#[test]
fn gauss_integral_is_one_inside() {
    let square = polygon_from_vertices(&[(0.0, 0.0).into(), (1.0, 0.0).into(), (1.0, 1.0).into(), (0.0, 1.0).into()]).unwrap();
    for el in [square, l_hexagon(), sector()] {
        let rule = kress_rule(&el, 64, 6).unwrap();
        // the L-hexagon has inradius 0.5 < 0.2 h, so it uses its deepest points
        let depth = (0.2 * el.diameter()).min(0.45);
        let mut checked = 0;
        for i in -20..=20 {
            for j in -20..=20 {
                let x = Point2::new(i as f64 / 20.0, j as f64 / 20.0);
                if !el.contains(x) || el.closest_boundary_point(x).2 < depth {
                    continue;
                }
                checked += 1;
                let s = gauss_sum(&rule, x);
                assert!((s - 1.0).abs() <= 1e-8, "{} at {x}: {s}", el.label());
            }
        }
        assert!(checked > 0, "{}", el.label());
    }
}

#[test]
fn integrated_legendre_vanishes_at_endpoints() {
    for j in 2..=12 {
        assert!(integrated_legendre(j, -1.0).0.abs() < 1e-12);
        assert!(integrated_legendre(j, 1.0).0.abs() < 1e-12);
    }
}

#[test]
fn bubble_derivatives_are_orthogonal_in_arc_length() {
    // b_j(s) = L̂_j(1 - 2s/|e|), so b_j′ = -(2/|e|) L_{j-1}
    let (x, w) = nyfem::quadrature::gauss_legendre(40);
    for len in [0.3, 1.0, 2.5] {
        for i in 2..=10 {
            for j in 2..=10 {
                let mut s = 0.0;
                for (u, wk) in x.iter().zip(w.iter()) {
                    let di = -2.0 / len * integrated_legendre(i, *u).1;
                    let dj = -2.0 / len * integrated_legendre(j, *u).1;
                    s += 0.5 * len * wk * di * dj;
                }
                let expect = if i == j { 4.0 / ((2 * j - 1) as f64 * len) } else { 0.0 };
                assert!((s - expect).abs() < 1e-12, "i={i} j={j} |e|={len}");
            }
        }
    }
}

#[test]
fn dimension_formulas() {
    for n in 3..=8 {
        for m in 1..=4 {
            assert_eq!(local_dimension(n, m), m * (m - 1) / 2 + n * m);
            assert_eq!(local_dimension(n, m) as i64 - polynomial_dimension(m) as i64, ((n - 2) * m) as i64 - 1);
        }
    }
}
