//! Bivariate polynomials in translated monomials `(x - z)^β` and the
//! polynomial lift that inverts the Laplacian.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::geometry::Point2;

/// Field used for polynomial coefficients.
pub trait Coefficient:
    Clone
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;

    fn one() -> Self {
        Self::from_i64(1)
    }

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

impl Coefficient for num_rational::Rational64 {
    fn zero() -> Self {
        num_rational::Rational64::from_integer(0)
    }

    fn from_i64(v: i64) -> Self {
        num_rational::Rational64::from_integer(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly2<T = f64> {
    terms: BTreeMap<(u32, u32), T>,
    center: Point2,
}

impl<T: Coefficient> Poly2<T> {
    pub fn zero(center: Point2) -> Self {
        Self { terms: BTreeMap::new(), center }
    }

    pub fn constant(center: Point2, c: T) -> Self {
        Self::monomial(center, (0, 0), c)
    }

    pub fn monomial(center: Point2, beta: (u32, u32), c: T) -> Self {
        let mut p = Self::zero(center);
        p.add_term(beta, c);
        p
    }

    pub fn from_terms(center: Point2, terms: impl IntoIterator<Item = ((u32, u32), T)>) -> Self {
        let mut p = Self::zero(center);
        for (b, c) in terms {
            p.add_term(b, c);
        }
        p
    }

    pub fn center(&self) -> Point2 {
        self.center
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &T)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, beta: (u32, u32)) -> T {
        self.terms.get(&beta).cloned().unwrap_or_else(T::zero)
    }

    pub fn add_term(&mut self, beta: (u32, u32), c: T) {
        let v = self.coefficient(beta) + c;
        if v.is_zero() {
            self.terms.remove(&beta);
        } else {
            self.terms.insert(beta, v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(a, b)| a + b).max()
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_terms(self.center, self.terms.iter().map(|(b, c)| (*b, c.clone() * s.clone())))
    }

    pub fn homogeneous_part(&self, degree: u32) -> Self {
        Self::from_terms(self.center, self.terms.iter().filter(|(b, _)| b.0 + b.1 == degree).map(|(b, c)| (*b, c.clone())))
    }

    pub fn derivative_x(&self) -> Self {
        Self::from_terms(
            self.center,
            self.terms.iter().filter(|(b, _)| b.0 > 0).map(|(b, c)| ((b.0 - 1, b.1), c.clone() * T::from_i64(b.0 as i64))),
        )
    }

    pub fn derivative_y(&self) -> Self {
        Self::from_terms(
            self.center,
            self.terms.iter().filter(|(b, _)| b.1 > 0).map(|(b, c)| ((b.0, b.1 - 1), c.clone() * T::from_i64(b.1 as i64))),
        )
    }

    pub fn laplacian(&self) -> Self {
        &self.derivative_x().derivative_x() + &self.derivative_y().derivative_y()
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.center, T::one());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    fn check_center(&self, o: &Self) {
        assert!(self.center == o.center, "polynomials about different centers");
    }
}

impl Poly2<f64> {
    pub fn eval(&self, x: Point2) -> f64 {
        let d = x - self.center;
        self.terms.iter().map(|((a, b), c)| c * d.x.powi(*a as i32) * d.y.powi(*b as i32)).sum()
    }

    pub fn gradient(&self, x: Point2) -> Point2 {
        let d = x - self.center;
        let mut g = Point2::default();
        for ((a, b), c) in &self.terms {
            if *a > 0 {
                g.x += c * *a as f64 * d.x.powi(*a as i32 - 1) * d.y.powi(*b as i32);
            }
            if *b > 0 {
                g.y += c * *b as f64 * d.x.powi(*a as i32) * d.y.powi(*b as i32 - 1);
            }
        }
        g
    }

    /// Same polynomial expanded about another center.
    pub fn recenter(&self, center: Point2) -> Self {
        let s = center - self.center;
        let mut out = Self::zero(center);
        for ((a, b), c) in &self.terms {
            // (x - z)^a = ((x - z') + s)^a
            for i in 0..=*a {
                for j in 0..=*b {
                    let k = binomial(*a, i) * binomial(*b, j) * s.x.powi((a - i) as i32) * s.y.powi((b - j) as i32);
                    out.add_term((i, j), c * k);
                }
            }
        }
        out
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl<T: Coefficient> Add for &Poly2<T> {
    type Output = Poly2<T>;
    fn add(self, o: &Poly2<T>) -> Poly2<T> {
        self.check_center(o);
        let mut out = self.clone();
        for (b, c) in &o.terms {
            out.add_term(*b, c.clone());
        }
        out
    }
}

impl<T: Coefficient> Sub for &Poly2<T> {
    type Output = Poly2<T>;
    fn sub(self, o: &Poly2<T>) -> Poly2<T> {
        self.check_center(o);
        let mut out = self.clone();
        for (b, c) in &o.terms {
            out.add_term(*b, -c.clone());
        }
        out
    }
}

impl<T: Coefficient> Mul for &Poly2<T> {
    type Output = Poly2<T>;
    fn mul(self, o: &Poly2<T>) -> Poly2<T> {
        self.check_center(o);
        let mut out = Poly2::zero(self.center);
        for (b1, c1) in &self.terms {
            for (b2, c2) in &o.terms {
                out.add_term((b1.0 + b2.0, b1.1 + b2.1), c1.clone() * c2.clone());
            }
        }
        out
    }
}

/// Polynomial `q` with `Δq = p`, built part by part from the homogeneous
/// components of `p` about its center:
/// `q = Σ_k (-1)^k (j-k)! / ((j+1)! (k+1)!) (|x|²/4)^(k+1) Δ^k p_j`.
pub fn particular_solution<T: Coefficient>(p: &Poly2<T>) -> Poly2<T> {
    let z = p.center();
    let Some(deg) = p.degree() else {
        return Poly2::zero(z);
    };
    let quarter_r2 = Poly2::from_terms(z, [((2, 0), T::one() / T::from_i64(4)), ((0, 2), T::one() / T::from_i64(4))]);
    let mut q = Poly2::zero(z);
    for j in 0..=deg {
        let pj = p.homogeneous_part(j);
        if pj.is_zero() {
            continue;
        }
        let mut lap = pj;
        let mut r_pow = quarter_r2.clone();
        for k in 0..=j / 2 {
            // (j-k)! / (j+1)! = 1 / ((j-k+1) ... (j+1))
            let mut denom = T::one();
            for i in (j - k + 1)..=(j + 1) {
                denom = denom * T::from_i64(i as i64);
            }
            for i in 1..=(k + 1) {
                denom = denom * T::from_i64(i as i64);
            }
            let mut coef = T::one() / denom;
            if k % 2 == 1 {
                coef = -coef;
            }
            q = &q + &(&r_pow * &lap).scale(coef);
            lap = lap.laplacian();
            if lap.is_zero() {
                break;
            }
            r_pow = &r_pow * &quarter_r2;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64 as Q;

    fn origin() -> Point2 {
        Point2::default()
    }

    #[test]
    fn lift_of_one() {
        let q = particular_solution(&Poly2::constant(origin(), Q::from_integer(1)));
        assert_eq!(q, Poly2::from_terms(origin(), [((2, 0), Q::new(1, 4)), ((0, 2), Q::new(1, 4))]));
    }

    #[test]
    fn lift_of_x() {
        let q = particular_solution(&Poly2::monomial(origin(), (1, 0), Q::from_integer(1)));
        assert_eq!(q, Poly2::from_terms(origin(), [((3, 0), Q::new(1, 8)), ((1, 2), Q::new(1, 8))]));
    }

    #[test]
    fn lift_of_xy() {
        let q = particular_solution(&Poly2::monomial(origin(), (1, 1), Q::from_integer(1)));
        assert_eq!(q, Poly2::from_terms(origin(), [((3, 1), Q::new(1, 12)), ((1, 3), Q::new(1, 12))]));
    }

    #[test]
    fn exact_laplacian_up_to_degree_eight() {
        for d in 0..=8u32 {
            for a in 0..=d {
                let p = Poly2::monomial(origin(), (a, d - a), Q::from_integer(1));
                assert_eq!(particular_solution(&p).laplacian(), p, "x^{a} y^{}", d - a);
            }
        }
    }

    #[test]
    fn float_lift_with_center() {
        let z = Point2::new(0.3, -0.2);
        let p = Poly2::from_terms(z, [((0, 0), 1.5), ((2, 1), -0.5), ((0, 3), 2.0)]);
        let q = particular_solution(&p);
        let diff = &q.laplacian() - &p;
        assert!(diff.terms().all(|(_, c)| c.abs() < 1e-14));
    }

    #[test]
    fn recenter_preserves_values() {
        let p = Poly2::from_terms(Point2::new(1.0, 2.0), [((2, 1), 0.7), ((0, 1), -1.0), ((0, 0), 3.0)]);
        let q = p.recenter(Point2::new(-0.5, 0.25));
        for x in [Point2::new(0.0, 0.0), Point2::new(1.3, -0.7)] {
            assert!((p.eval(x) - q.eval(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_derivatives() {
        let p = Poly2::from_terms(Point2::new(0.1, 0.2), [((3, 1), 1.0), ((1, 2), -2.0)]);
        let x = Point2::new(0.7, -0.4);
        let g = p.gradient(x);
        assert!((g.x - p.derivative_x().eval(x)).abs() < 1e-14);
        assert!((g.y - p.derivative_y().eval(x)).abs() < 1e-14);
    }
}
