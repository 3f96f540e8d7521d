//! Truncated Taylor polynomials in four variables.
//!
//! A [`Jet`] of order `N` stores the Taylor coefficients `c_α` of a function
//! about an expansion point, for every exponent tuple `α = (α₁, α₂, α₃, α₄)`
//! with `|α| ≤ N`. Coefficients are stored densely in graded lexicographic
//! order, so a jet of lower order is always a prefix of a jet of higher
//! order. Partial derivatives at the expansion point are `α! · c_α`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use thiserror::Error;

/// Number of chart variables.
pub const VARS: usize = 4;

/// Largest supported truncation order.
pub const MAX_ORDER: usize = 8;

/// Exponent tuple of a monomial.
pub type Exponent = [u8; VARS];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("jet order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("jet order {0} exceeds the supported maximum {MAX_ORDER}")]
    OrderTooLarge(usize),
    #[error("cannot differentiate an order-0 jet")]
    ZeroOrder,
    #[error("direction {0} out of range 1..=4")]
    BadDirection(usize),
    #[error("{func} undefined at constant term {value}")]
    Domain { func: &'static str, value: f64 },
}

struct Tables {
    monomials: Vec<Exponent>,
    degree: Vec<u8>,
    /// `lookup[e1][e2][e3][e4]` packed; `u16::MAX` for |e| > MAX_ORDER.
    lookup: Vec<u16>,
    /// Index of the product monomial for every pair with degree sum ≤ MAX_ORDER.
    product: Vec<u16>,
    /// Monomial index reached by removing one power of each variable.
    lower: Vec<[u16; VARS]>,
}

const SIDE: usize = MAX_ORDER + 1;

fn packed(e: &Exponent) -> usize {
    ((e[0] as usize * SIDE + e[1] as usize) * SIDE + e[2] as usize) * SIDE + e[3] as usize
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut monomials = Vec::new();
        for d in 0..=MAX_ORDER as u8 {
            for a in (0..=d).rev() {
                for b in (0..=d - a).rev() {
                    for c in (0..=d - a - b).rev() {
                        monomials.push([a, b, c, d - a - b - c]);
                    }
                }
            }
        }
        let degree: Vec<u8> = monomials.iter().map(|e| e.iter().sum()).collect();
        let mut lookup = vec![u16::MAX; SIDE.pow(4)];
        for (i, e) in monomials.iter().enumerate() {
            lookup[packed(e)] = i as u16;
        }
        let n = monomials.len();
        let mut product = vec![u16::MAX; n * n];
        for i in 0..n {
            for j in 0..n {
                if degree[i] as usize + degree[j] as usize <= MAX_ORDER {
                    let e: Exponent = std::array::from_fn(|v| monomials[i][v] + monomials[j][v]);
                    product[i * n + j] = lookup[packed(&e)];
                }
            }
        }
        let lower = monomials
            .iter()
            .map(|e| {
                std::array::from_fn(|v| {
                    if e[v] == 0 {
                        u16::MAX
                    } else {
                        let mut f = *e;
                        f[v] -= 1;
                        lookup[packed(&f)]
                    }
                })
            })
            .collect();
        Tables { monomials, degree, lookup, product, lower }
    })
}

/// Number of coefficients of a jet of the given order: C(order + 4, 4).
pub fn coefficient_count(order: usize) -> usize {
    (order + 1) * (order + 2) * (order + 3) * (order + 4) / 24
}

/// Dense index of a monomial, or `None` if its degree exceeds [`MAX_ORDER`].
pub fn monomial_index(e: &Exponent) -> Option<usize> {
    if e.iter().any(|&x| x as usize > MAX_ORDER) {
        return None;
    }
    match tables().lookup[packed(e)] {
        u16::MAX => None,
        i => Some(i as usize),
    }
}

/// Exponent tuple stored at a dense index.
pub fn monomial(index: usize) -> Exponent {
    tables().monomials[index]
}

fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

/// Truncated multivariate Taylor polynomial.
#[derive(Clone, PartialEq)]
pub struct Jet {
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(order {}, ", self.order)?;
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c != 0.0 {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "{c:e}·{:?}", monomial(i))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

/// Elementary functions available through [`Jet::elementary`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Recip,
    Pow(f64),
}

/// Ring operations available through [`Jet::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl Jet {
    pub fn zero(order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        Self { order, coeffs: vec![0.0; coefficient_count(order)] }
    }

    pub fn constant(value: f64, order: usize) -> Self {
        let mut j = Self::zero(order);
        j.coeffs[0] = value;
        j
    }

    /// The coordinate function `x_var` expanded about `value` (var in 0..4).
    pub fn variable(var: usize, value: f64, order: usize) -> Self {
        let mut j = Self::constant(value, order);
        if order >= 1 {
            let mut e = [0u8; VARS];
            e[var] = 1;
            j.coeffs[monomial_index(&e).unwrap()] = 1.0;
        }
        j
    }

    /// Builds a jet from dense coefficients; the length fixes the order.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self, JetError> {
        let order = (0..=MAX_ORDER)
            .find(|&n| coefficient_count(n) == coeffs.len())
            .ok_or(JetError::OrderTooLarge(coeffs.len()))?;
        Ok(Self { order, coeffs })
    }

    /// Builds a jet from sparse `(exponent, coefficient)` pairs; terms above
    /// `order` are dropped.
    pub fn from_terms(order: usize, terms: &[(Exponent, f64)]) -> Result<Self, JetError> {
        if order > MAX_ORDER {
            return Err(JetError::OrderTooLarge(order));
        }
        let mut j = Self::zero(order);
        for (e, c) in terms {
            if e.iter().map(|&x| x as usize).sum::<usize>() <= order {
                j.coeffs[monomial_index(e).unwrap()] += c;
            }
        }
        Ok(j)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Value at the expansion point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, e: &Exponent) -> f64 {
        monomial_index(e).filter(|&i| i < self.coeffs.len()).map_or(0.0, |i| self.coeffs[i])
    }

    /// Partial derivative `∂^α f` at the expansion point.
    pub fn derivative_at(&self, alpha: &Exponent) -> f64 {
        self.coeff(alpha) * alpha.iter().map(|&a| factorial(a)).product::<f64>()
    }

    /// Drops all terms above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order, "cannot raise jet order by truncation");
        Self { order, coeffs: self.coeffs[..coefficient_count(order)].to_vec() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Checked ring operation; both operands must share the same order.
    pub fn arith(a: &Jet, b: &Jet, op: ArithOp) -> Result<Jet, JetError> {
        if a.order != b.order {
            return Err(JetError::OrderMismatch(a.order, b.order));
        }
        Ok(match op {
            ArithOp::Add => a + b,
            ArithOp::Sub => a - b,
            ArithOp::Mul => a * b,
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { order: self.order, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_scalar(&self, s: f64) -> Self {
        let mut r = self.clone();
        r.coeffs[0] += s;
        r
    }

    pub fn add_assign(&mut self, other: &Jet) {
        let n = self.coeffs.len();
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs[..n]) {
            *c += o;
        }
    }

    /// `self += s · other`, reading `other` only up to `self`'s order.
    pub fn axpy(&mut self, s: f64, other: &Jet) {
        let n = self.coeffs.len();
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs[..n]) {
            *c += s * o;
        }
    }

    /// `self += s · a · b`, truncated at `self`'s order. The operands may have
    /// any order at least as large as `self`'s.
    pub fn fma(&mut self, s: f64, a: &Jet, b: &Jet) {
        debug_assert!(a.order >= self.order && b.order >= self.order);
        let t = tables();
        let n = t.monomials.len();
        let order = self.order;
        if order == 0 {
            self.coeffs[0] += s * a.coeffs[0] * b.coeffs[0];
            return;
        }
        let out = &mut self.coeffs;
        for i in 0..coefficient_count(order) {
            let ai = a.coeffs[i];
            if ai == 0.0 {
                continue;
            }
            let sa = s * ai;
            let row = &t.product[i * n..];
            let jmax = coefficient_count(order - t.degree[i] as usize);
            for (j, bj) in b.coeffs[..jmax].iter().enumerate() {
                out[row[j] as usize] += sa * bj;
            }
        }
    }

    /// Formal partial derivative along `direction` (1-based, 1..=4).
    pub fn partial(&self, direction: usize) -> Result<Jet, JetError> {
        if !(1..=VARS).contains(&direction) {
            return Err(JetError::BadDirection(direction));
        }
        if self.order == 0 {
            return Err(JetError::ZeroOrder);
        }
        Ok(self.partial0(direction - 1))
    }

    /// Zero-based partial derivative used internally; panics on order 0.
    pub(crate) fn partial0(&self, var: usize) -> Jet {
        assert!(self.order >= 1, "partial of an order-0 jet");
        let t = tables();
        let mut r = Jet::zero(self.order - 1);
        let n = r.coeffs.len();
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            let lo = t.lower[i][var];
            if lo != u16::MAX && (lo as usize) < n {
                r.coeffs[lo as usize] += c * t.monomials[i][var] as f64;
            }
        }
        r
    }

    /// Taylor expansion of `f ∘ self` by univariate composition about the
    /// constant term.
    pub fn elementary(&self, f: Elementary) -> Result<Jet, JetError> {
        let a0 = self.value();
        let n = self.order;
        let mut d = vec![0.0; n + 1];
        match f {
            Elementary::Exp => {
                let e = a0.exp();
                for (k, dk) in d.iter_mut().enumerate() {
                    *dk = e / factorial(k as u8);
                }
            }
            Elementary::Sin | Elementary::Cos => {
                let (s, c) = a0.sin_cos();
                let cycle = if f == Elementary::Sin { [s, c, -s, -c] } else { [c, -s, -c, s] };
                for (k, dk) in d.iter_mut().enumerate() {
                    *dk = cycle[k % 4] / factorial(k as u8);
                }
            }
            Elementary::Sqrt => return self.powf("sqrt", 0.5),
            Elementary::Recip => return self.powf("recip", -1.0),
            Elementary::Pow(p) => return self.powf("pow", p),
        }
        Ok(self.compose(&d))
    }

    pub fn sin(&self) -> Jet {
        self.elementary(Elementary::Sin).expect("sin is entire")
    }

    pub fn cos(&self) -> Jet {
        self.elementary(Elementary::Cos).expect("cos is entire")
    }

    pub fn exp(&self) -> Jet {
        self.elementary(Elementary::Exp).expect("exp is entire")
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        self.elementary(Elementary::Sqrt)
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        self.elementary(Elementary::Recip)
    }

    pub fn powf(&self, func: &'static str, p: f64) -> Result<Jet, JetError> {
        let a0 = self.value();
        let integer = p.fract() == 0.0;
        let bad = !a0.is_finite()
            || if func == "sqrt" || !integer {
                a0 <= 0.0
            } else {
                a0 == 0.0 && p < 0.0
            };
        if bad {
            return Err(JetError::Domain { func, value: a0 });
        }
        let n = self.order;
        let mut d = vec![0.0; n + 1];
        // generalized binomial series: c_k = C(p, k) a0^(p - k)
        let mut binom = 1.0;
        for (k, dk) in d.iter_mut().enumerate() {
            if k > 0 {
                binom *= (p - (k as f64 - 1.0)) / k as f64;
            }
            *dk = binom * a0.powf(p - k as f64);
        }
        Ok(self.compose(&d))
    }

    /// Evaluates `Σ d[k] (self − a0)^k` by Horner's rule.
    fn compose(&self, d: &[f64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut r = Jet::constant(d[self.order], self.order);
        for k in (0..self.order).rev() {
            r = &r * &h;
            r.coeffs[0] += d[k];
        }
        r
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        assert_eq!(self.order, rhs.order, "jet order mismatch");
        Jet {
            order: self.order,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        assert_eq!(self.order, rhs.order, "jet order mismatch");
        Jet {
            order: self.order,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        assert_eq!(self.order, rhs.order, "jet order mismatch");
        let mut r = Jet::zero(self.order);
        r.fma(1.0, self, rhs);
        r
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn x(var: usize, order: usize) -> Jet {
        Jet::variable(var, 0.0, order)
    }

    #[test]
    fn table_sizes() {
        assert_eq!(coefficient_count(6), 210);
        assert_eq!(coefficient_count(8), 495);
        assert_eq!(tables().monomials.len(), 495);
        // graded: the order-n prefix holds exactly the monomials of degree ≤ n
        for n in 0..=MAX_ORDER {
            let k = coefficient_count(n);
            assert!(tables().degree[..k].iter().all(|&d| d as usize <= n));
        }
    }

    #[test]
    fn difference_of_squares() {
        let one = Jet::constant(1.0, 2);
        let p = &(&one + &x(0, 2)) * &(&one - &x(0, 2));
        let expected = Jet::from_terms(2, &[([0, 0, 0, 0], 1.0), ([2, 0, 0, 0], -1.0)]).unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn multiplicative_identity() {
        let a = Jet::from_terms(3, &[([0, 0, 0, 0], 0.3), ([1, 1, 0, 0], 2.0), ([0, 0, 1, 2], -1.5)])
            .unwrap();
        assert_eq!(&a * &Jet::constant(1.0, 3), a);
    }

    #[test]
    fn sin_cos_product() {
        let s = x(0, 5).sin();
        let c = x(0, 5).cos();
        let p = &s * &c;
        // ½ sin 2x = x − (2/3)x³ + (2/15)x⁵
        let expected =
            Jet::from_terms(5, &[([1, 0, 0, 0], 1.0), ([3, 0, 0, 0], -2.0 / 3.0), ([5, 0, 0, 0], 2.0 / 15.0)])
                .unwrap();
        for (a, b) in p.coeffs().iter().zip(expected.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn geometric_series() {
        let r = x(0, 3).add_scalar(1.0).recip().unwrap();
        let expected = Jet::from_terms(
            3,
            &[([0, 0, 0, 0], 1.0), ([1, 0, 0, 0], -1.0), ([2, 0, 0, 0], 1.0), ([3, 0, 0, 0], -1.0)],
        )
        .unwrap();
        assert_eq!(r, expected);
    }

    #[test]
    fn sqrt_of_constant() {
        let r = Jet::constant(4.0, 4).sqrt().unwrap();
        assert_eq!(r, Jet::constant(2.0, 4));
    }

    #[test]
    fn exp_of_sum_matches_multinomial() {
        let e = (&x(0, 2) + &x(1, 2)).exp();
        // 1 + x + y + ½x² + xy + ½y²
        let expected = [
            ([0, 0, 0, 0], 1.0),
            ([1, 0, 0, 0], 1.0),
            ([0, 1, 0, 0], 1.0),
            ([2, 0, 0, 0], 0.5),
            ([1, 1, 0, 0], 1.0),
            ([0, 2, 0, 0], 0.5),
        ];
        for (e_, c) in expected {
            assert!((e.coeff(&e_) - c).abs() < 1e-15, "{e_:?}");
        }
        assert_eq!(e.coeffs().iter().filter(|c| **c != 0.0).count(), 6);
    }

    #[test]
    fn domain_errors() {
        let neg = Jet::constant(-1.0, 2);
        assert!(matches!(neg.sqrt(), Err(JetError::Domain { func: "sqrt", .. })));
        assert!(matches!(neg.powf("pow", 1.5), Err(JetError::Domain { .. })));
        assert!(Jet::constant(0.0, 2).recip().is_err());
        assert!(neg.powf("pow", 3.0).is_ok());
    }

    #[test]
    fn partials() {
        let f = &(&x(0, 3) * &x(0, 3)) * &x(1, 3);
        let d = f.partial(1).unwrap();
        assert_eq!(d, Jet::from_terms(2, &[([1, 1, 0, 0], 2.0)]).unwrap());
        assert!(Jet::constant(3.0, 2).partial(2).unwrap().is_zero());
        assert_eq!(Jet::constant(1.0, 0).partial(1), Err(JetError::ZeroOrder));
        assert_eq!(f.partial(5), Err(JetError::BadDirection(5)));
    }

    #[test]
    fn order_mismatch_rejected() {
        let r = Jet::arith(&Jet::zero(2), &Jet::zero(3), ArithOp::Mul);
        assert_eq!(r, Err(JetError::OrderMismatch(2, 3)));
    }

    #[test]
    fn derivative_at_uses_factorials() {
        // f = x³y² → ∂x³∂y² f = 3!·2! = 12
        let f = Jet::from_terms(5, &[([3, 2, 0, 0], 1.0)]).unwrap();
        assert_eq!(f.derivative_at(&[3, 2, 0, 0]), 12.0);
    }

    fn arb_jet(order: usize) -> impl Strategy<Value = Jet> {
        proptest::collection::vec(-1.0f64..1.0, coefficient_count(order))
            .prop_map(|c| Jet::from_coeffs(c).unwrap())
    }

    proptest! {
        #[test]
        fn product_rule(a in arb_jet(4), b in arb_jet(4), var in 1usize..=4) {
            let lhs = (&a * &b).partial(var).unwrap();
            let rhs = &(&a.partial(var).unwrap() * &b.truncate(3)) + &(&a.truncate(3) * &b.partial(var).unwrap());
            for (l, r) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                prop_assert!((l - r).abs() < 1e-12);
            }
        }

        #[test]
        fn general_leibniz(a in arb_jet(4), b in arb_jet(4)) {
            // ∂^α(ab) = Σ_{β≤α} C(α,β) ∂^β a ∂^{α−β} b
            let p = &a * &b;
            for i in 0..coefficient_count(4) {
                let alpha = monomial(i);
                let mut sum = 0.0;
                for j in 0..coefficient_count(4) {
                    let beta = monomial(j);
                    if (0..VARS).any(|v| beta[v] > alpha[v]) {
                        continue;
                    }
                    let rest: Exponent = std::array::from_fn(|v| alpha[v] - beta[v]);
                    let binom: f64 = (0..VARS)
                        .map(|v| factorial(alpha[v]) / (factorial(beta[v]) * factorial(rest[v])))
                        .product();
                    sum += binom * a.derivative_at(&beta) * b.derivative_at(&rest);
                }
                prop_assert!((p.derivative_at(&alpha) - sum).abs() < 1e-10 * (1.0 + sum.abs()));
            }
        }
    }
}
