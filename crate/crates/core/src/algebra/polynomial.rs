use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::ToPrimitive;

use super::monomial::ExponentVector;
use crate::error::{Error, Result};
use crate::scalar::{pow_coeff, to_real, Coefficient, Rational, Real};

/// Sparse multivariate polynomial in `x1..xn`.
///
/// Invariants: no stored zero coefficients and every exponent vector has
/// length `n`.
#[derive(Clone, PartialEq)]
pub struct Polynomial<K: Coefficient = Rational> {
    n: usize,
    terms: BTreeMap<ExponentVector, K>,
}

impl<K: Coefficient> Polynomial<K> {
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1, "polynomials need at least one variable");
        Self { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: K) -> Self {
        Self::monomial(ExponentVector::zero(n), c)
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, K::one())
    }

    pub fn monomial(e: ExponentVector, c: K) -> Self {
        let mut p = Self::zero(e.dim());
        p.add_term(e, c);
        p
    }

    /// The variable `x_{i+1}` (0-based `i`).
    pub fn var(n: usize, i: usize) -> Self {
        Self::monomial(ExponentVector::unit(n, i), K::one())
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, merging
    /// duplicates and dropping zeros.
    pub fn from_terms<I>(n: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (ExponentVector, K)>,
    {
        let mut p = Self::zero(n);
        for (e, c) in terms {
            assert_eq!(e.dim(), n, "exponent vector dimension");
            p.add_term(e, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.n
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

    /// Terms in descending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&ExponentVector, &K)> {
        self.terms.iter().rev()
    }

    pub fn coeff(&self, e: &ExponentVector) -> K {
        self.terms.get(e).cloned().unwrap_or_else(K::zero)
    }

    /// Adds `c * x^e` in place.
    pub fn add_term(&mut self, e: ExponentVector, c: K) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    /// Highest total degree of a term; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|e| e.degree())
    }

    /// Lowest total degree of a term; `None` for the zero polynomial.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.degree()).min()
    }

    pub fn leading(&self) -> Option<(&ExponentVector, &K)> {
        self.terms.iter().next_back()
    }

    pub fn constant_term(&self) -> K {
        self.coeff(&ExponentVector::zero(self.n))
    }

    pub fn scale(&self, c: &K) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        Self { n: self.n, terms: self.terms.iter().map(|(e, v)| (e.clone(), v.clone() * c.clone())).collect() }
    }

    pub fn mul_monomial(&self, e: &ExponentVector, c: &K) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        Self { n: self.n, terms: self.terms.iter().map(|(m, v)| (m.mul(e), v.clone() * c.clone())).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.n);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Partial derivative with respect to `x_{i+1}` (0-based `i`).
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            let k = e.exps()[i];
            if k == 0 {
                continue;
            }
            let mut factor = K::zero();
            for _ in 0..k {
                factor = factor + K::one();
            }
            out.add_term(e.lower(i).expect("positive exponent"), c.clone() * factor);
        }
        out
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.n).map(|i| self.derivative(i)).collect()
    }

    /// Drops every term of total degree greater than `k`.
    pub fn truncate(&self, k: u32) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().filter(|(e, _)| e.degree() <= k).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    /// The substitution `x -> delta * x`.
    pub fn dilate(&self, delta: &K) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.clone() * pow_coeff(delta, e.degree()));
        }
        out
    }

    /// Exact evaluation at a point.
    pub fn eval(&self, x: &[K]) -> Result<K> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let mut acc = K::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e.exps()) {
                t = t * pow_coeff(xi, k);
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// Maps coefficients into another ring.
    pub fn map_coeffs<L: Coefficient>(&self, f: impl Fn(&K) -> L) -> Polynomial<L> {
        Polynomial::from_terms(self.n, self.terms.iter().map(|(e, c)| (e.clone(), f(c))))
    }
}

impl<K: Coefficient + ToPrimitive> Polynomial<K> {
    /// Floating-point copy suitable for repeated numerical evaluation.
    pub fn to_real<T: Real>(&self) -> RealPolynomial<T> {
        RealPolynomial::new(self.n, self.terms.iter().map(|(e, c)| (e.exps().to_vec(), to_real::<T, K>(c))).collect())
    }
}

impl<'a, K: Coefficient> Add<&'a Polynomial<K>> for &'a Polynomial<K> {
    type Output = Polynomial<K>;
    fn add(self, rhs: &'a Polynomial<K>) -> Polynomial<K> {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<'a, K: Coefficient> Sub<&'a Polynomial<K>> for &'a Polynomial<K> {
    type Output = Polynomial<K>;
    fn sub(self, rhs: &'a Polynomial<K>) -> Polynomial<K> {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<'a, K: Coefficient> Mul<&'a Polynomial<K>> for &'a Polynomial<K> {
    type Output = Polynomial<K>;
    fn mul(self, rhs: &'a Polynomial<K>) -> Polynomial<K> {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = Polynomial::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea.mul(eb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<K: Coefficient> Neg for &Polynomial<K> {
    type Output = Polynomial<K>;
    fn neg(self) -> Polynomial<K> {
        Polynomial { n: self.n, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect() }
    }
}

impl<K: Coefficient> Add for Polynomial<K> {
    type Output = Polynomial<K>;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl<K: Coefficient> Sub for Polynomial<K> {
    type Output = Polynomial<K>;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl<K: Coefficient> Mul for Polynomial<K> {
    type Output = Polynomial<K>;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<K: Coefficient + fmt::Display> fmt::Display for Polynomial<K> {
    /// Terms in descending graded-lex order, e.g. `x1^3 - 3/2*x1*x2 + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (e, c)) in self.terms().enumerate() {
            let text = c.to_string();
            let (negative, magnitude) = match text.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, text),
            };
            match (idx, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let unit = magnitude == "1";
            if e.is_constant() {
                f.write_str(&magnitude)?;
            } else if unit {
                write!(f, "{e}")?;
            } else {
                write!(f, "{magnitude}*{e}")?;
            }
        }
        Ok(())
    }
}

impl<K: Coefficient + fmt::Display> fmt::Debug for Polynomial<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[n={}]({})", self.n, self)
    }
}

/// Floating-point polynomial with pointwise value, gradient and Hessian.
#[derive(Clone, Debug)]
pub struct RealPolynomial<T> {
    n: usize,
    terms: Vec<(Vec<u32>, T)>,
}

impl<T: Real> RealPolynomial<T> {
    pub fn new(n: usize, terms: Vec<(Vec<u32>, T)>) -> Self {
        Self { n, terms }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(Vec<u32>, T)] {
        &self.terms
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: T) -> Self {
        Self { n: self.n, terms: self.terms.iter().map(|(e, v)| (e.clone(), *v * c)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(_, c)| c.is_zero())
    }

    pub fn value(&self, x: &[T]) -> T {
        let mut acc = T::zero();
        for (e, c) in &self.terms {
            let mut t = *c;
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t = t * xi.powi(k as i32);
                }
            }
            acc = acc + t;
        }
        acc
    }

    pub fn gradient(&self, x: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|g| *g = T::zero());
        for (e, c) in &self.terms {
            for j in 0..self.n {
                if e[j] == 0 {
                    continue;
                }
                let mut t = *c * T::from_u32(e[j]).unwrap();
                for (i, (xi, &k)) in x.iter().zip(e).enumerate() {
                    let p = if i == j { k - 1 } else { k };
                    if p > 0 {
                        t = t * xi.powi(p as i32);
                    }
                }
                out[j] = out[j] + t;
            }
        }
    }

    /// Row-major `n x n` Hessian.
    pub fn hessian(&self, x: &[T], out: &mut [T]) {
        let n = self.n;
        out.iter_mut().for_each(|g| *g = T::zero());
        for (e, c) in &self.terms {
            for a in 0..n {
                for b in a..n {
                    let factor = if a == b {
                        if e[a] < 2 {
                            continue;
                        }
                        e[a] * (e[a] - 1)
                    } else {
                        if e[a] == 0 || e[b] == 0 {
                            continue;
                        }
                        e[a] * e[b]
                    };
                    let mut t = *c * T::from_u32(factor).unwrap();
                    for (i, (xi, &k)) in x.iter().zip(e).enumerate() {
                        let drop = (i == a) as u32 + (i == b) as u32;
                        let p = k - drop;
                        if p > 0 {
                            t = t * xi.powi(p as i32);
                        }
                    }
                    out[a * n + b] = out[a * n + b] + t;
                    if a != b {
                        out[b * n + a] = out[b * n + a] + t;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn x(n: usize, i: usize) -> Polynomial {
        Polynomial::var(n, i)
    }

    #[test]
    fn arithmetic_and_cancellation() {
        let p = &x(2, 0) * &x(2, 1);
        let q = &p.scale(&rat(2)) - &p;
        assert_eq!(q, p);
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn derivative_power_rule() {
        let f = &x(2, 0).pow(3) + &x(2, 1).pow(3);
        let g = f.gradient();
        assert_eq!(g[0], x(2, 0).pow(2).scale(&rat(3)));
        assert_eq!(g[1], x(2, 1).pow(2).scale(&rat(3)));
    }

    #[test]
    fn display_order_and_signs() {
        let f = &(&x(2, 0).pow(3) - &(&x(2, 0) * &x(2, 1)).scale(&rat(2))) + &Polynomial::constant(2, rat(-1));
        assert_eq!(f.to_string(), "x1^3 - 2*x1*x2 - 1");
        assert_eq!(Polynomial::<Rational>::zero(3).to_string(), "0");
    }

    #[test]
    fn real_derivatives_match_exact() {
        let f = &(&x(2, 0).pow(3) + &(&x(2, 0) * &x(2, 1).pow(2))) + &x(2, 1);
        let r: RealPolynomial<f64> = f.to_real();
        let p = [0.7, -1.3];
        let mut g = [0.0; 2];
        r.gradient(&p, &mut g);
        assert!((g[0] - (3.0 * 0.49 + 1.69)).abs() < 1e-12);
        assert!((g[1] - (2.0 * 0.7 * -1.3 + 1.0)).abs() < 1e-12);
        let mut h = [0.0; 4];
        r.hessian(&p, &mut h);
        assert!((h[0] - 6.0 * 0.7).abs() < 1e-12);
        assert!((h[1] - 2.0 * -1.3).abs() < 1e-12);
        assert_eq!(h[1], h[2]);
        assert!((h[3] - 2.0 * 0.7).abs() < 1e-12);
    }
}
