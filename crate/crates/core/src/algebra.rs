//! Sparse polynomials in `(x, y, z)` and Lie-derivative calculus.
//!
//! Every classification formula in the crate is a short chain of Lie
//! derivatives of the switching function `f(x, y, z) = z` along the two
//! vector fields, so all of them are polynomials again when the fields are.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::Scalar;

/// Default cap on total degree accepted for inputs and produced by derivatives.
pub const DEFAULT_MAX_DEGREE: u32 = 8;

/// Exponent triple `(i, j, k)` of the monomial `x^i y^j z^k`.
pub type Exponent = [u32; 3];

/// A point of R³.
pub type Point3<T> = [T; 3];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("polynomial degree {degree} exceeds the cap {cap}")]
    DegreeCap { degree: u32, cap: u32 },
}

/// Coordinate variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::X, Var::Y, Var::Z];

    fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
            Var::Z => 2,
        }
    }
}

/// Multivariate polynomial over `T` with no stored zero coefficients.
#[derive(Clone, PartialEq)]
pub struct Poly3<T> {
    terms: BTreeMap<Exponent, T>,
}

impl<T: Scalar> Default for Poly3<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Scalar> Poly3<T> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: T) -> Self {
        Self::monomial([0, 0, 0], c)
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0; 3];
        e[v.index()] = 1;
        Self::monomial(e, T::one())
    }

    pub fn x() -> Self {
        Self::var(Var::X)
    }

    pub fn y() -> Self {
        Self::var(Var::Y)
    }

    pub fn z() -> Self {
        Self::var(Var::Z)
    }

    pub fn monomial(exp: Exponent, c: T) -> Self {
        let mut terms = BTreeMap::new();
        if c != T::zero() {
            terms.insert(exp, c);
        }
        Self { terms }
    }

    /// Collects `(exponent, coefficient)` pairs, summing repeated exponents.
    pub fn from_terms<I: IntoIterator<Item = (Exponent, T)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Like [`Poly3::from_terms`] but rejects results above `cap`.
    pub fn from_terms_capped<I: IntoIterator<Item = (Exponent, T)>>(
        terms: I,
        cap: u32,
    ) -> Result<Self, AlgebraError> {
        let p = Self::from_terms(terms);
        p.check_degree(cap)?;
        Ok(p)
    }

    fn add_term(&mut self, e: Exponent, c: T) {
        if c == T::zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(T::zero);
        *entry = *entry + c;
        if *entry == T::zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &T)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: Exponent) -> T {
        self.terms.get(&e).copied().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e[0] + e[1] + e[2])
            .max()
            .unwrap_or(0)
    }

    pub fn check_degree(&self, cap: u32) -> Result<(), AlgebraError> {
        let degree = self.degree();
        if degree > cap {
            Err(AlgebraError::DegreeCap { degree, cap })
        } else {
            Ok(())
        }
    }

    pub fn max_abs_coefficient(&self) -> T {
        self.terms
            .values()
            .fold(T::zero(), |m, c| if c.abs() > m { c.abs() } else { m })
    }

    pub fn all_finite(&self) -> bool {
        self.terms.values().all(|c| c.is_finite())
    }

    /// Horner evaluation, nested in `x`, then `y`, then `z`.
    pub fn eval(&self, p: Point3<T>) -> T {
        // Terms are sorted lexicographically by (i, j, k); fold from the top.
        let mut acc_x = T::zero();
        let mut cur_i: Option<u32> = None;
        let mut acc_y = T::zero();
        let mut cur_j = 0u32;
        let mut acc_z = T::zero();
        let mut cur_k = 0u32;

        // Collapses the z-chain into the y-accumulator.
        fn flush_z<T: Scalar>(acc_y: &mut T, acc_z: &mut T, cur_k: &mut u32, z: T) {
            *acc_y = *acc_y + *acc_z * z.powi(*cur_k as i32);
            *acc_z = T::zero();
            *cur_k = 0;
        }

        for (e, &c) in self.terms.iter().rev() {
            let [i, j, k] = *e;
            if cur_i != Some(i) {
                if let Some(ci) = cur_i {
                    flush_z(&mut acc_y, &mut acc_z, &mut cur_k, p[2]);
                    acc_y = acc_y * p[1].powi(cur_j as i32);
                    acc_x = (acc_x + acc_y) * p[0].powi((ci - i) as i32);
                    acc_y = T::zero();
                } else {
                    acc_x = T::zero();
                }
                cur_i = Some(i);
                cur_j = j;
                cur_k = k;
                acc_z = c;
                continue;
            }
            if j != cur_j {
                flush_z(&mut acc_y, &mut acc_z, &mut cur_k, p[2]);
                acc_y = acc_y * p[1].powi((cur_j - j) as i32);
                cur_j = j;
                cur_k = k;
                acc_z = c;
                continue;
            }
            acc_z = acc_z * p[2].powi((cur_k - k) as i32) + c;
            cur_k = k;
        }
        match cur_i {
            None => T::zero(),
            Some(i) => {
                flush_z(&mut acc_y, &mut acc_z, &mut cur_k, p[2]);
                acc_y = acc_y * p[1].powi(cur_j as i32);
                acc_x = acc_x + acc_y;
                acc_x * p[0].powi(i as i32)
            }
        }
    }

    /// Evaluation on Σ, i.e. at `(x, y, 0)`.
    pub fn eval_sigma(&self, x: T, y: T) -> T {
        self.eval([x, y, T::zero()])
    }

    /// Formal partial derivative.
    pub fn partial(&self, v: Var) -> Self {
        let idx = v.index();
        let mut out = Self::zero();
        for (e, &c) in &self.terms {
            if e[idx] == 0 {
                continue;
            }
            let mut ne = *e;
            ne[idx] -= 1;
            let factor = T::from_u32(e[idx]).expect("exponent fits scalar");
            out.add_term(ne, c * factor);
        }
        out
    }

    /// Substitutes `z = 0`, leaving a polynomial in `(x, y)` only.
    pub fn restrict_to_sigma(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(e, _)| e[2] == 0)
                .map(|(e, c)| (*e, *c)),
        )
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (*e, *c * s)))
    }

    /// Converts coefficients to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Poly3<U> {
        Poly3::from_terms(
            self.terms
                .iter()
                .map(|(e, c)| (*e, U::lit(c.as_f64()))),
        )
    }
}

impl<T: fmt::Debug> fmt::Debug for Poly3<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

impl<T: fmt::Display> fmt::Display for Poly3<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (name, p) in ["x", "y", "z"].iter().zip(e.iter()) {
                match p {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    _ => write!(f, "*{name}^{p}")?,
                }
            }
        }
        Ok(())
    }
}

impl<'a, T: Scalar> Add<&'a Poly3<T>> for &'a Poly3<T> {
    type Output = Poly3<T>;

    fn add(self, rhs: &'a Poly3<T>) -> Poly3<T> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, *c);
        }
        out
    }
}

impl<'a, T: Scalar> Sub<&'a Poly3<T>> for &'a Poly3<T> {
    type Output = Poly3<T>;

    fn sub(self, rhs: &'a Poly3<T>) -> Poly3<T> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -*c);
        }
        out
    }
}

impl<'a, T: Scalar> Mul<&'a Poly3<T>> for &'a Poly3<T> {
    type Output = Poly3<T>;

    fn mul(self, rhs: &'a Poly3<T>) -> Poly3<T> {
        let mut out = Poly3::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], *ca * *cb);
            }
        }
        out
    }
}

impl<T: Scalar> Neg for &Poly3<T> {
    type Output = Poly3<T>;

    fn neg(self) -> Poly3<T> {
        self.scale(-T::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<T: Scalar> $tr<Poly3<T>> for Poly3<T> {
            type Output = Poly3<T>;

            fn $m(self, rhs: Poly3<T>) -> Poly3<T> {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<T: Scalar> Neg for Poly3<T> {
    type Output = Poly3<T>;

    fn neg(self) -> Poly3<T> {
        -&self
    }
}

/// Polynomial vector field on R³.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3<T> {
    pub cx: Poly3<T>,
    pub cy: Poly3<T>,
    pub cz: Poly3<T>,
}

impl<T: Scalar> VectorField3<T> {
    pub fn new(cx: Poly3<T>, cy: Poly3<T>, cz: Poly3<T>) -> Self {
        Self { cx, cy, cz }
    }

    /// Constant field `(a, b, c)`.
    pub fn constant(a: T, b: T, c: T) -> Self {
        Self::new(Poly3::constant(a), Poly3::constant(b), Poly3::constant(c))
    }

    pub fn components(&self) -> [&Poly3<T>; 3] {
        [&self.cx, &self.cy, &self.cz]
    }

    pub fn eval(&self, p: Point3<T>) -> Point3<T> {
        [self.cx.eval(p), self.cy.eval(p), self.cz.eval(p)]
    }

    pub fn degree(&self) -> u32 {
        self.components().iter().map(|c| c.degree()).max().unwrap_or(0)
    }

    pub fn max_abs_coefficient(&self) -> T {
        self.components()
            .iter()
            .map(|c| c.max_abs_coefficient())
            .fold(T::zero(), T::max)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.cx.scale(s), self.cy.scale(s), self.cz.scale(s))
    }

    pub fn cast<U: Scalar>(&self) -> VectorField3<U> {
        VectorField3::new(self.cx.cast(), self.cy.cast(), self.cz.cast())
    }
}

/// `X·∇g` under the default degree cap.
pub fn lie_derivative<T: Scalar>(
    field: &VectorField3<T>,
    g: &Poly3<T>,
) -> Result<Poly3<T>, AlgebraError> {
    lie_derivative_with_cap(field, g, DEFAULT_MAX_DEGREE)
}

pub fn lie_derivative_with_cap<T: Scalar>(
    field: &VectorField3<T>,
    g: &Poly3<T>,
    cap: u32,
) -> Result<Poly3<T>, AlgebraError> {
    let mut out = Poly3::zero();
    for (v, comp) in Var::ALL.iter().zip(field.components()) {
        let d = g.partial(*v);
        if d.is_zero() || comp.is_zero() {
            continue;
        }
        out = &out + &(comp * &d);
    }
    out.check_degree(cap)?;
    Ok(out)
}

/// `(∂x g, ∂y g)` restricted to the chart `z = 0`.
pub fn gradient_on_sigma<T: Scalar>(g: &Poly3<T>) -> (Poly3<T>, Poly3<T>) {
    (
        g.partial(Var::X).restrict_to_sigma(),
        g.partial(Var::Y).restrict_to_sigma(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(terms: &[([u32; 3], f64)]) -> Poly3<f64> {
        Poly3::from_terms(terms.iter().copied())
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Poly3::<f64>::z().eval([1.0, 2.0, 3.0]), 3.0);
        let q = p(&[([1, 1, 0], 1.0), ([0, 0, 2], -1.0)]);
        assert_eq!(q.eval([2.0, 3.0, 1.0]), 5.0);
        assert_eq!(Poly3::<f64>::zero().eval([4.0, -1.0, 9.0]), 0.0);
    }

    #[test]
    fn eval_mixed_monomials() {
        let q = p(&[
            ([2, 1, 0], 3.0),
            ([2, 0, 1], -2.0),
            ([0, 3, 1], 0.5),
            ([0, 0, 0], 7.0),
            ([1, 0, 0], 1.5),
        ]);
        let (x, y, z): (f64, f64, f64) = (1.3, -0.7, 2.1);
        let direct = 3.0 * x * x * y - 2.0 * x * x * z + 0.5 * y.powi(3) * z + 7.0 + 1.5 * x;
        assert!((q.eval([x, y, z]) - direct).abs() < 1e-12);
    }

    #[test]
    fn partial_examples() {
        assert_eq!(Poly3::<f64>::z().partial(Var::Z), Poly3::constant(1.0));
        let xy2 = p(&[([1, 2, 0], 1.0)]);
        assert_eq!(xy2.partial(Var::Y), p(&[([1, 1, 0], 2.0)]));
        assert!(Poly3::constant(4.0).partial(Var::X).is_zero());
    }

    #[test]
    fn lie_derivative_examples() {
        // X = (α, 1, δy) with α = δ = -1.
        let x_field = VectorField3::new(
            Poly3::constant(-1.0),
            Poly3::constant(1.0),
            Poly3::y().scale(-1.0),
        );
        let xf = lie_derivative(&x_field, &Poly3::z()).unwrap();
        assert_eq!(xf, Poly3::y().scale(-1.0));
        let x2f = lie_derivative(&x_field, &xf).unwrap();
        assert_eq!(x2f, Poly3::constant(-1.0));

        let ex = VectorField3::constant(1.0, 0.0, 0.0);
        let g = p(&[([2, 0, 0], 1.0)]);
        assert_eq!(lie_derivative(&ex, &g).unwrap(), p(&[([1, 0, 0], 2.0)]));
    }

    #[test]
    fn lie_derivative_degree_cap() {
        let field = VectorField3::new(p(&[([0, 5, 0], 1.0)]), Poly3::zero(), Poly3::zero());
        let g = p(&[([5, 0, 0], 1.0)]);
        let err = lie_derivative(&field, &g).unwrap_err();
        assert_eq!(err, AlgebraError::DegreeCap { degree: 9, cap: 8 });
        assert!(lie_derivative_with_cap(&field, &g, 9).is_ok());
    }

    #[test]
    fn gradient_on_sigma_examples() {
        let g = Poly3::y().scale(-1.0);
        assert_eq!(
            gradient_on_sigma(&g),
            (Poly3::zero(), Poly3::constant(-1.0))
        );
        let g = p(&[([1, 0, 0], 1.0), ([0, 0, 2], 1.0)]);
        assert_eq!(gradient_on_sigma(&g), (Poly3::constant(1.0), Poly3::zero()));
        let g = p(&[([1, 1, 0], 1.0)]);
        assert_eq!(gradient_on_sigma(&g), (Poly3::y(), Poly3::x()));
    }

    #[test]
    fn no_zero_coefficients_stored() {
        let a = p(&[([1, 0, 0], 1.0), ([0, 1, 0], 2.0)]);
        let d = &a - &a;
        assert!(d.is_zero());
        let q = p(&[([1, 0, 0], 0.0)]);
        assert_eq!(q.len(), 0);
    }

    #[test]
    fn generic_over_f32() {
        let q: Poly3<f32> = Poly3::from_terms([([1, 1, 0], 1.0f32), ([0, 0, 2], -1.0)]);
        assert_eq!(q.eval([2.0, 3.0, 1.0]), 5.0f32);
    }

    fn small_poly(max_deg: u32) -> impl Strategy<Value = Poly3<f64>> {
        prop::collection::vec(((0..=max_deg), (0..=max_deg), (0..=max_deg), -2.0..2.0f64), 0..6)
            .prop_map(move |ts| {
                Poly3::from_terms(
                    ts.into_iter()
                        .filter(|(i, j, k, _)| i + j + k <= max_deg)
                        .map(|(i, j, k, c)| ([i, j, k], c)),
                )
            })
    }

    fn small_field() -> impl Strategy<Value = VectorField3<f64>> {
        (small_poly(2), small_poly(2), small_poly(2)).prop_map(|(a, b, c)| VectorField3::new(a, b, c))
    }

    fn pt() -> impl Strategy<Value = [f64; 3]> {
        [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64]
    }

    proptest! {
        #[test]
        fn leibniz_rule(x in small_field(), g in small_poly(2), h in small_poly(2), q in pt()) {
            let lhs = lie_derivative(&x, &(&g * &h)).unwrap();
            let rhs = &(&g * &lie_derivative(&x, &h).unwrap()) + &(&h * &lie_derivative(&x, &g).unwrap());
            let scale = 1.0 + lhs.max_abs_coefficient() + rhs.max_abs_coefficient();
            prop_assert!((lhs.eval(q) - rhs.eval(q)).abs() <= 1e-12 * scale * 10.0);
        }

        #[test]
        fn linearity(x in small_field(), y in small_field(), g in small_poly(3), h in small_poly(3), a in -2.0..2.0f64, q in pt()) {
            let sum_field = VectorField3::new(&x.cx + &y.cx, &x.cy + &y.cy, &x.cz + &y.cz);
            let l1 = lie_derivative(&sum_field, &g).unwrap();
            let r1 = &lie_derivative(&x, &g).unwrap() + &lie_derivative(&y, &g).unwrap();
            prop_assert!((l1.eval(q) - r1.eval(q)).abs() < 1e-10);
            let l2 = lie_derivative(&x, &(&g + &h.scale(a))).unwrap();
            let r2 = &lie_derivative(&x, &g).unwrap() + &lie_derivative(&x, &h).unwrap().scale(a);
            prop_assert!((l2.eval(q) - r2.eval(q)).abs() < 1e-10);
        }

        #[test]
        fn horner_matches_naive_sum(g in small_poly(5), q in pt()) {
            let naive: f64 = g
                .terms()
                .map(|(e, c)| c * q[0].powi(e[0] as i32) * q[1].powi(e[1] as i32) * q[2].powi(e[2] as i32))
                .sum();
            prop_assert!((g.eval(q) - naive).abs() < 1e-12 * (1.0 + naive.abs()) * 10.0);
        }

        #[test]
        fn partial_matches_central_difference(g in small_poly(4), q in pt()) {
            let h = 1e-5;
            for (i, v) in Var::ALL.iter().enumerate() {
                let mut plus = q;
                let mut minus = q;
                plus[i] += h;
                minus[i] -= h;
                let fd = (g.eval(plus) - g.eval(minus)) / (2.0 * h);
                let exact = g.partial(*v).eval(q);
                let scale = 1.0 + g.max_abs_coefficient();
                prop_assert!((fd - exact).abs() <= 1e-8 * scale.max(exact.abs()) * 10.0,
                    "fd {} exact {}", fd, exact);
            }
        }
    }
}
