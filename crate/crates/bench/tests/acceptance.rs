//! One PASS/FAIL line per acceptance criterion, at default settings.
//!
//! Run with `cargo test -p nyfem-bench --test acceptance -- --nocapture`.

use nyfem::geometry::{polygon_from_vertices, Element, Point2};
use nyfem::interpolation::interpolate_with;
use nyfem::layer_potential::{assemble_matrix, double_layer_kernel, gauss_sum, kernel_gradient};
use nyfem::linalg::mat_vec;
use nyfem::mesh::{dof_map, lshape_family, square_mesh_family, LshapeVariant};
use nyfem::poisson_space::{integrated_legendre, local_basis, local_dimension};
use nyfem::poly::{particular_solution, Poly2};
use nyfem::quadrature::{gauss_legendre, kress_rule};
use nyfem_bench::{circular_l, degenerate_octagon, l_hexagon, run, Config, Experiment, Report};
use num_rational::Rational64 as Q;

struct Line {
    criterion: &'static str,
    pass: bool,
    detail: String,
}

fn from_report(criterion: &'static str, r: &Report) -> Line {
    let detail = r.checks.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect::<Vec<_>>().join("; ");
    Line { criterion, pass: r.pass && !r.checks.is_empty(), detail: format!("{detail}; {:.1} s", r.wall_time_s) }
}

fn experiment(criterion: &'static str, e: Experiment) -> Line {
    match run(e, &Config::default()) {
        Ok(r) => from_report(criterion, &r),
        Err(err) => Line { criterion, pass: false, detail: format!("error: {err:#}") },
    }
}

fn square() -> Element {
    polygon_from_vertices(&[(0.0, 0.0).into(), (1.0, 0.0).into(), (1.0, 1.0).into(), (0.0, 1.0).into()]).unwrap()
}

fn constant_density() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for el in [square(), l_hexagon(), degenerate_octagon(), circular_l()] {
        for (n, p) in [(8, 2), (16, 6), (33, 9)] {
            let a = assemble_matrix(&kress_rule(&el, n, p).unwrap());
            for c in [1.0, -3.5] {
                for r in mat_vec(&a, &vec![-c; a.nrows()]) {
                    worst = worst.max((r + c).abs() / c.abs());
                }
            }
        }
    }
    (worst < 1e-13, format!("constant density {worst:.1e}"))
}

fn gauss_integral() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for el in [square(), l_hexagon(), circular_l()] {
        let rule = kress_rule(&el, 64, 6).unwrap();
        let depth = (0.2 * el.diameter()).min(0.45);
        for i in -20..=20 {
            for j in -20..=20 {
                let x = Point2::new(i as f64 / 20.0, j as f64 / 20.0);
                if el.contains(x) && el.closest_boundary_point(x).2 >= depth {
                    worst = worst.max((gauss_sum(&rule, x) - 1.0).abs());
                }
            }
        }
    }
    (worst <= 1e-8, format!("Gauss integral {worst:.1e}"))
}

fn lift() -> (bool, String) {
    let z = Point2::default();
    let mut ok = true;
    for d in 0..=6u32 {
        for a in 0..=d {
            let p = Poly2::monomial(z, (a, d - a), Q::from_integer(1));
            ok &= particular_solution(&p).laplacian() == p;
        }
    }
    (ok, format!("lift exact to degree 6: {ok}"))
}

fn legendre() -> (bool, String) {
    let mut worst: f64 = 0.0;
    let (x, w) = gauss_legendre(40);
    for len in [0.5, 2.0] {
        for i in 2..=10 {
            worst = worst.max(integrated_legendre(i, -1.0).0.abs()).max(integrated_legendre(i, 1.0).0.abs());
            for j in 2..=10 {
                let s: f64 = x.iter().zip(w.iter()).map(|(u, wk)| 0.5 * len * wk * (2.0 / len).powi(2) * integrated_legendre(i, *u).1 * integrated_legendre(j, *u).1).sum();
                let e = if i == j { 4.0 / ((2 * j - 1) as f64 * len) } else { 0.0 };
                worst = worst.max((s - e).abs());
            }
        }
    }
    (worst < 1e-12, format!("Legendre {worst:.1e}"))
}

fn dimensions() -> (bool, String) {
    let mut ok = local_basis(&degenerate_octagon(), 1, 16, 6).unwrap().dim() == local_dimension(8, 1);
    ok &= local_basis(&square(), 3, 16, 6).unwrap().dim() == 15;
    for mesh in [square_mesh_family(1).unwrap(), lshape_family(2, LshapeVariant::WithLElement).unwrap()] {
        for m in 1..=3 {
            let expect = mesh.num_vertices() + mesh.num_edges() * (m - 1) + mesh.num_cells() * m * (m - 1) / 2;
            ok &= dof_map(&mesh, m).unwrap().dim == expect;
        }
    }
    (ok, format!("dimensions {ok}"))
}

fn projection_and_gram() -> Vec<(bool, String)> {
    let el = polygon_from_vertices(&[(0.0, 0.0).into(), (1.0, -0.1).into(), (1.3, 0.7).into(), (0.5, 1.2).into(), (-0.2, 0.6).into()]).unwrap();
    let sp = local_basis(&el, 3, 48, 6).unwrap();
    let pts = [Point2::new(0.5, 0.3), Point2::new(0.9, 0.7)];
    let mut worst: f64 = 0.0;
    let mut max_eig = f64::NEG_INFINITY;
    for b in sp.basis() {
        let target = |x: Point2| b.function.value(x).unwrap();
        let li = interpolate_with(sp.operator(), &target, 3, sp.variant()).unwrap();
        for x in pts {
            worst = worst.max((li.function.value(x).unwrap() - target(x)).abs());
        }
        max_eig = li.gram_eigenvalues().unwrap().into_iter().fold(max_eig, f64::max);
    }
    vec![(worst < 1e-7, format!("projection {worst:.1e}")), (max_eig < 0.0, format!("largest Gram eigenvalue {max_eig:.2e}"))]
}

fn kernel_gradient_fd() -> (bool, String) {
    let mut worst: f64 = 0.0;
    let y = Point2::new(0.2, -0.1);
    for k in 0..40 {
        let a = 0.37 * k as f64;
        let x = y + Point2::new(a.cos(), a.sin()) * (0.3 + 0.05 * k as f64);
        let n = Point2::new((1.3 * a).cos(), (1.3 * a).sin());
        let g = kernel_gradient(x, y, n);
        let h = 1e-5;
        let fx = (double_layer_kernel(x + Point2::new(h, 0.0), y, n) - double_layer_kernel(x - Point2::new(h, 0.0), y, n)) / (2.0 * h);
        let fy = (double_layer_kernel(x + Point2::new(0.0, h), y, n) - double_layer_kernel(x - Point2::new(0.0, h), y, n)) / (2.0 * h);
        worst = worst.max((g.x - fx).abs()).max((g.y - fy).abs());
    }
    (worst <= 1e-6, format!("kernel gradient {worst:.1e}"))
}

fn property_suites() -> Line {
    let mut parts = vec![constant_density(), gauss_integral(), lift(), legendre(), dimensions()];
    parts.extend(projection_and_gram());
    parts.push(kernel_gradient_fd());
    Line {
        criterion: "6 property suites",
        pass: parts.iter().all(|p| p.0),
        detail: parts.iter().map(|p| format!("{}{}", if p.0 { "" } else { "FAILED " }, p.1)).collect::<Vec<_>>().join("; "),
    }
}

#[test]
fn acceptance() {
    let lines = vec![
        experiment("1 L-hexagon Nystrom", Experiment::NystromL),
        experiment("2 circular L Nystrom", Experiment::NystromSector),
        experiment("3 square-mesh orders", Experiment::InterpSquare),
        experiment("4 L-shape families", Experiment::InterpLshape),
        experiment("5 curved Dirichlet cell", Experiment::CurvedDirichlet),
        property_suites(),
    ];
    for l in &lines {
        println!("{} {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.criterion, l.detail);
    }
    let failed: Vec<_> = lines.iter().filter(|l| !l.pass).map(|l| l.criterion).collect();
    assert!(failed.is_empty(), "failed: {failed:?}");
}
