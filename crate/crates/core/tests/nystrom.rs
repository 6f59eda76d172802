use nyfem::geometry::{polygon_from_vertices, Element, Point2};
use nyfem::layer_potential::{point_data, solve_dirichlet, EvalMode};

fn l_hexagon() -> Element {
    let v: Vec<Point2> = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (0.0, -1.0)].iter().map(|&p| p.into()).collect();
    polygon_from_vertices(&v).unwrap()
}

fn log_potential(x: Point2) -> f64 {
    (x - Point2::new(10.0, 0.0)).norm().ln()
}

#[test]
fn center_error_decays_with_order_above_four() {
    let el = l_hexagon();
    let x = Point2::new(0.5, 0.5);
    let errs: Vec<f64> = [16, 32, 64, 128, 256]
        .iter()
        .map(|&n| {
            let sol = solve_dirichlet(&el, point_data(log_potential), n, 6).unwrap();
            let v = sol.evaluate(x, EvalMode::Subtracted, false).unwrap().value;
            ((v - log_potential(x)) / log_potential(x)).abs()
        })
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] <= w[0], "{errs:?}");
        if w[1] > 0.0 {
            assert!((w[0] / w[1]).log2() > 4.0, "{errs:?}");
        }
    }
    assert!(errs[2] <= 1e-11);
}

#[test]
fn harmonic_cubic_converges_fast_at_centroid() {
    let el = polygon_from_vertices(&[(0.0, 0.0).into(), (1.0, 0.0).into(), (1.2, 0.9).into(), (0.1, 1.1).into()]).unwrap();
    let w = |x: Point2| x.x.powi(3) - 3.0 * x.x * x.y * x.y + 0.5 * x.x * x.y - x.y;
    let c = el.centroid();
    let err = |n: usize| {
        let sol = solve_dirichlet(&el, point_data(w), n, 6).unwrap();
        (sol.eval(c).unwrap() - w(c)).abs()
    };
    let (e32, e128) = (err(32), err(128));
    assert!(e128 <= 1e-15 || e32 / e128 > 4f64.powi(5), "{e32:e} {e128:e}");
}

#[test]
fn refined_matches_subtracted_away_from_the_boundary() {
    let el = l_hexagon();
    let sol = solve_dirichlet(&el, point_data(log_potential), 64, 6).unwrap();
    let x = Point2::new(-0.4, 0.3);
    let plain = sol.evaluate(x, EvalMode::Plain, true).unwrap();
    let sub = sol.evaluate(x, EvalMode::Subtracted, true).unwrap();
    let refined = sol.evaluate(x, EvalMode::Refined, true).unwrap();
    assert!(!refined.near_boundary && refined.refined_edges == 0);
    assert_eq!(sub.value, refined.value);
    let w = log_potential(x);
    assert!((refined.value - w).abs() < 1e-10);
    assert!((plain.value - w).abs() < 1e-8);
    let g = (x - Point2::new(10.0, 0.0)) / (x - Point2::new(10.0, 0.0)).norm_squared();
    assert!((refined.gradient.unwrap() - g).norm() < 1e-8);
}

#[test]
fn refined_mode_is_accurate_near_the_boundary() {
    let el = l_hexagon();
    let sol = solve_dirichlet(&el, point_data(log_potential), 64, 6).unwrap();
    for x in [Point2::new(0.5, 0.99), Point2::new(-0.99, 0.2), Point2::new(0.3, 0.01), Point2::new(0.999, 0.001)] {
        let sub = sol.evaluate(x, EvalMode::Subtracted, false).unwrap();
        let refined = sol.evaluate(x, EvalMode::Refined, false).unwrap();
        assert!(refined.near_boundary);
        let w = log_potential(x);
        assert!((refined.value - w).abs() < 1e-8, "{x}: {:e}", refined.value - w);
        assert!((refined.value - w).abs() <= (sub.value - w).abs(), "{x}");
    }
    let deep = sol.evaluate(Point2::new(0.0, 0.999), EvalMode::Refined, false).unwrap();
    assert!(deep.saturated);
}
