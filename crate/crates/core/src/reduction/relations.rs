use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::algebra::echelon::{Echelon, SparseRow};
use crate::algebra::{box_monomials, monomials_up_to, ExponentVector, Polynomial, VersalDeformation};
use crate::error::{Error, Result};
use crate::scalar::{rat, Rational};

/// The volume form `g(x) dx1 ^ ... ^ dxn` near a Fermat germ `sum x_i^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeFormGerm {
    degree: u32,
    coeff: Polynomial,
}

impl VolumeFormGerm {
    pub fn new(fermat_degree: u32, coeff: Polynomial) -> Result<Self> {
        if fermat_degree < 2 {
            return Err(Error::InvalidArgument("Fermat degree must be >= 2".into()));
        }
        Ok(Self { degree: fermat_degree, coeff })
    }

    /// The form `x^e dx`.
    pub fn monomial(fermat_degree: u32, e: ExponentVector) -> Result<Self> {
        Self::new(fermat_degree, Polynomial::monomial(e, Rational::one()))
    }

    pub fn fermat_degree(&self) -> u32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.coeff.dim()
    }

    pub fn coeff(&self) -> &Polynomial {
        &self.coeff
    }
}

/// Slot `(i, k)` of an `(n-2)`-form: the form `x^beta` times the wedge of all
/// `dx_j` with `j != i, k`. Indices are 1-based with `i < k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationGenerator {
    pub i: usize,
    pub k: usize,
    pub beta: ExponentVector,
}

impl RelationGenerator {
    pub fn new(i: usize, k: usize, beta: ExponentVector) -> Result<Self> {
        let n = beta.dim();
        if !(1 <= i && i < k && k <= n) {
            return Err(Error::InvalidArgument(format!("need 1 <= i < k <= {n}, got i={i}, k={k}")));
        }
        if beta.exps()[i - 1] + beta.exps()[k - 1] == 0 {
            return Err(Error::InvalidArgument(format!(
                "slot ({i},{k}) of x^{beta} is closed under d; the relation vanishes"
            )));
        }
        Ok(Self { i, k, beta })
    }
}

/// `df ^ d(x^beta in slot (i,k))` for `f = sum x_j^N`, divided by `N` and
/// up to sign: `beta_k x_i^(N-1) x^(beta-e_k) - beta_i x_k^(N-1) x^(beta-e_i)`.
pub fn relation_polynomial(g: &RelationGenerator, fermat_degree: u32, n: usize) -> Result<VolumeFormGerm> {
    if g.beta.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: g.beta.dim() });
    }
    let (i, k) = (g.i - 1, g.k - 1);
    let mut p = Polynomial::zero(n);
    if let Some(m) = g.beta.lower(k) {
        p.add_term(m.raise(i, fermat_degree - 1), rat(g.beta.exps()[k] as i64));
    }
    if let Some(m) = g.beta.lower(i) {
        p.add_term(m.raise(k, fermat_degree - 1), rat(-(g.beta.exps()[i] as i64)));
    }
    VolumeFormGerm::new(fermat_degree, p)
}

/// Every relation generator whose polynomial has total degree `<= maxdeg`.
pub fn relation_generators(fermat_degree: u32, n: usize, maxdeg: u32) -> Vec<RelationGenerator> {
    let Some(budget) = (maxdeg + 2).checked_sub(fermat_degree) else {
        return Vec::new();
    };
    let betas = monomials_up_to(n, budget);
    let mut out = Vec::new();
    for i in 1..=n {
        for k in i + 1..=n {
            for beta in &betas {
                if let Ok(g) = RelationGenerator::new(i, k, beta.clone()) {
                    out.push(g);
                }
            }
        }
    }
    out
}

/// Coordinates of a form's class over the box `[0, N-2]^n`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CohomologyClass {
    coords: BTreeMap<ExponentVector, Rational>,
}

impl CohomologyClass {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coord(&self, e: &ExponentVector) -> Rational {
        self.coords.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    /// Nonzero coordinates in descending term order.
    pub fn coords(&self) -> impl Iterator<Item = (&ExponentVector, &Rational)> {
        self.coords.iter().rev()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { coords: self.coords.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    /// The class as the polynomial `sum c_e x^e`.
    pub fn to_polynomial(&self, n: usize) -> Polynomial {
        Polynomial::from_terms(n, self.coords.iter().map(|(e, c)| (e.clone(), c.clone())))
    }

    /// Coordinate vector over an explicit basis.
    pub fn vector(&self, basis: &[ExponentVector]) -> Vec<Rational> {
        basis.iter().map(|e| self.coord(e)).collect()
    }
}

#[derive(Serialize)]
struct CoordEntry {
    monomial: String,
    value: String,
}

impl Serialize for CohomologyClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<CoordEntry> =
            self.coords().map(|(e, c)| CoordEntry { monomial: e.to_string(), value: c.to_string() }).collect();
        entries.serialize(s)
    }
}

/// Result of a reduction: the class and the number of elimination steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub class: CohomologyClass,
    pub steps: usize,
}

/// Row-reduced span of the zero-integral relations of degree `<= maxdeg`
/// on the level `sum x_j^N = level`.
///
/// The span consists of the forms `df ^ d(eta)` together with the level
/// relations `(f - level) x^alpha dx`, which make the multiplier `f` act as
/// the constant `level` on the fiber. In dimension one there are no
/// `(n-2)`-forms; there the single relation `x^(N-1)` (the derivative of
/// `f`) removes the class that does not vanish.
#[derive(Clone, Debug)]
pub struct RelationSpan {
    n: usize,
    degree: u32,
    maxdeg: u32,
    level: Rational,
    columns: Vec<ExponentVector>,
    index: HashMap<ExponentVector, usize>,
    echelon: Echelon<Rational>,
}

impl RelationSpan {
    /// Span on the level `f = 1`, the fiber of `F = f + l_mu` at `l_mu = -1`.
    pub fn new(fermat_degree: u32, n: usize, maxdeg: u32) -> Result<Self> {
        Self::with_level(fermat_degree, n, maxdeg, Rational::one())
    }

    /// Span on the zero set of `f + l_mu`, i.e. the level `-l_mu`.
    pub fn for_constant_parameter(fermat_degree: u32, n: usize, maxdeg: u32, lambda_mu: &Rational) -> Result<Self> {
        if lambda_mu.is_zero() {
            return Err(Error::ZeroConstantParameter);
        }
        Self::with_level(fermat_degree, n, maxdeg, -lambda_mu.clone())
    }

    pub fn with_level(fermat_degree: u32, n: usize, maxdeg: u32, level: Rational) -> Result<Self> {
        if fermat_degree < 2 {
            return Err(Error::InvalidArgument("Fermat degree must be >= 2".into()));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if maxdeg < fermat_degree - 1 {
            return Err(Error::InvalidArgument(format!(
                "maxdeg {maxdeg} must be at least N - 1 = {}",
                fermat_degree - 1
            )));
        }
        let columns = monomials_up_to(n, maxdeg);
        let index = columns.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let mut span = Self { n, degree: fermat_degree, maxdeg, level, columns, index, echelon: Echelon::new() };

        if n == 1 {
            let p = Polynomial::monomial(ExponentVector::new(vec![fermat_degree - 1]), Rational::one());
            span.insert(&p);
        }
        for g in relation_generators(fermat_degree, n, maxdeg) {
            let r = relation_polynomial(&g, fermat_degree, n)?;
            span.insert(r.coeff());
        }
        let f_minus_level = span.level_polynomial();
        if let Some(budget) = maxdeg.checked_sub(fermat_degree) {
            for alpha in monomials_up_to(n, budget) {
                span.insert(&f_minus_level.mul_monomial(&alpha, &Rational::one()));
            }
        }
        Ok(span)
    }

    /// `sum x_j^N - level`.
    fn level_polynomial(&self) -> Polynomial {
        let mut p = Polynomial::constant(self.n, -self.level.clone());
        for j in 0..self.n {
            p.add_term(ExponentVector::zero(self.n).raise(j, self.degree), Rational::one());
        }
        p
    }

    fn row(&self, p: &Polynomial) -> SparseRow<Rational> {
        p.terms().map(|(e, c)| (self.index[e], c.clone())).collect()
    }

    fn insert(&mut self, p: &Polynomial) {
        let row = self.row(p);
        self.echelon.insert(row);
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn fermat_degree(&self) -> u32 {
        self.degree
    }

    pub fn maxdeg(&self) -> u32 {
        self.maxdeg
    }

    pub fn level(&self) -> &Rational {
        &self.level
    }

    /// Dimension of the span.
    pub fn rank(&self) -> usize {
        self.echelon.rank()
    }

    /// Monomials of degree `<= maxdeg` that lead no relation.
    pub fn standard_monomials(&self) -> Vec<ExponentVector> {
        self.columns.iter().enumerate().filter(|(i, _)| !self.echelon.is_pivot(*i)).map(|(_, e)| e.clone()).collect()
    }

    /// Dimension of the truncated quotient (polynomials of degree `<= maxdeg`
    /// modulo the span).
    pub fn quotient_dimension(&self) -> usize {
        self.columns.len() - self.rank()
    }

    /// The cohomology basis `[0, N-2]^n`, descending term order.
    pub fn basis(&self) -> Vec<ExponentVector> {
        box_monomials(self.n, self.degree - 2)
    }

    pub fn mu(&self) -> usize {
        (self.degree as usize - 1).pow(self.n as u32)
    }

    fn check(&self, p: &Polynomial) -> Result<()> {
        if p.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: p.dim() });
        }
        match p.total_degree() {
            Some(d) if d > self.maxdeg => Err(Error::DegreeOverflow { degree: d, maxdeg: self.maxdeg }),
            _ => Ok(()),
        }
    }

    /// Whether `p dx` lies in the span.
    pub fn contains(&self, p: &Polynomial) -> Result<bool> {
        self.check(p)?;
        let mut row = self.row(p);
        self.echelon.normal_form(&mut row);
        Ok(row.is_empty())
    }

    /// Normal form of a coefficient polynomial modulo the span.
    pub fn normal_form(&self, p: &Polynomial) -> Result<(Polynomial, usize)> {
        self.check(p)?;
        let mut row = self.row(p);
        let steps = self.echelon.normal_form(&mut row);
        let nf = Polynomial::from_terms(self.n, row.into_iter().map(|(i, c)| (self.columns[i].clone(), c)));
        Ok((nf, steps))
    }

    /// Class of `g` over the box basis, with the number of elimination steps.
    pub fn reduce(&self, g: &VolumeFormGerm) -> Result<Reduction> {
        if g.fermat_degree() != self.degree {
            return Err(Error::InvalidArgument(format!(
                "form belongs to N = {} but the span was built for N = {}",
                g.fermat_degree(),
                self.degree
            )));
        }
        let (nf, steps) = self.normal_form(g.coeff())?;
        let bound = self.degree - 2;
        if let Some((e, _)) = nf.terms().find(|(e, _)| !e.in_box(bound)) {
            return Err(Error::Numerical(format!(
                "normal form keeps {e} outside the box; increase maxdeg beyond {}",
                self.maxdeg
            )));
        }
        let coords = nf.terms().map(|(e, c)| (e.clone(), c.clone())).collect();
        Ok(Reduction { class: CohomologyClass { coords }, steps })
    }

    pub fn reduce_to_basis(&self, g: &VolumeFormGerm) -> Result<CohomologyClass> {
        Ok(self.reduce(g)?.class)
    }
}

/// `relation_span` with the level of `F = f - 1`.
pub fn relation_span(fermat_degree: u32, n: usize, maxdeg: u32) -> Result<RelationSpan> {
    RelationSpan::new(fermat_degree, n, maxdeg)
}

/// Default truncation degree `2 n (N - 1)`.
pub fn default_maxdeg(fermat_degree: u32, n: usize) -> u32 {
    2 * n as u32 * (fermat_degree - 1)
}

/// `c * ((f + sum_{i<mu} l_i e_i) / l_mu)^k`, expanded exactly. On the zero
/// set of `F(., l)` the multiplier equals `(-1)^k`.
pub fn multiply_by_deformation_power(
    c: &VolumeFormGerm,
    deformation: &VersalDeformation,
    lambda: &[Rational],
    k: u32,
) -> Result<VolumeFormGerm> {
    let mu = deformation.num_params();
    if lambda.len() != mu {
        return Err(Error::DimensionMismatch { expected: mu, got: lambda.len() });
    }
    if c.dim() != deformation.dim() {
        return Err(Error::DimensionMismatch { expected: deformation.dim(), got: c.dim() });
    }
    let lambda_mu = &lambda[mu - 1];
    if lambda_mu.is_zero() {
        return Err(Error::ZeroConstantParameter);
    }
    if k == 0 {
        return Ok(c.clone());
    }
    let mut head = lambda.to_vec();
    head[mu - 1] = Rational::zero();
    let inv = Rational::one() / lambda_mu;
    let multiplier = deformation.polynomial_at(&head)?.scale(&inv);
    let p = c.coeff() * &multiplier.pow(k);
    VolumeFormGerm::new(c.fermat_degree(), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_polynomial, SingularityGerm};
    use crate::scalar::ratio;

    fn ev(v: &[u32]) -> ExponentVector {
        ExponentVector::new(v.to_vec())
    }

    fn poly(s: &str, n: usize) -> Polynomial {
        parse_polynomial(s, n).unwrap()
    }

    fn form(s: &str, n: usize, big_n: u32) -> VolumeFormGerm {
        VolumeFormGerm::new(big_n, poly(s, n)).unwrap()
    }

    #[test]
    fn generator_examples() {
        let g = RelationGenerator::new(1, 2, ev(&[3, 1])).unwrap();
        assert_eq!(relation_polynomial(&g, 3, 2).unwrap().coeff(), &poly("x1^5 - 3*x1^2*x2^3", 2));
        let g = RelationGenerator::new(1, 2, ev(&[0, 1])).unwrap();
        assert_eq!(relation_polynomial(&g, 3, 2).unwrap().coeff(), &poly("x1^2", 2));
        let g = RelationGenerator::new(2, 3, ev(&[0, 1, 1])).unwrap();
        assert_eq!(relation_polynomial(&g, 3, 3).unwrap().coeff(), &poly("x2^3 - x3^3", 3));
        let g = RelationGenerator::new(1, 2, ev(&[1, 0])).unwrap();
        assert_eq!(relation_polynomial(&g, 3, 2).unwrap().coeff(), &poly("-x2^2", 2));
    }

    #[test]
    fn generator_validation() {
        assert!(RelationGenerator::new(2, 1, ev(&[1, 1])).is_err());
        assert!(RelationGenerator::new(1, 3, ev(&[1, 1])).is_err());
        assert!(RelationGenerator::new(1, 2, ev(&[0, 0, 4])).is_err());
        let g = RelationGenerator::new(1, 2, ev(&[1, 1])).unwrap();
        assert!(matches!(relation_polynomial(&g, 3, 3), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn span_examples() {
        let s = relation_span(3, 2, 2).unwrap();
        assert!(s.contains(&poly("x1^2", 2)).unwrap());
        assert!(s.contains(&poly("x2^2", 2)).unwrap());
        assert!(!s.contains(&poly("x1*x2", 2)).unwrap());

        let s = relation_span(3, 2, 4).unwrap();
        assert!(s.quotient_dimension() >= 4);

        let s = relation_span(2, 1, 2).unwrap();
        assert!(s.contains(&poly("x1", 1)).unwrap());
        assert_eq!(s.standard_monomials(), vec![ev(&[0])]);
    }

    #[test]
    fn standard_monomials_are_the_box() {
        for (n, big_n) in [(1, 2), (1, 3), (1, 4), (2, 2), (2, 3), (2, 4), (3, 2), (3, 3)] {
            let s = relation_span(big_n, n, default_maxdeg(big_n, n).max(big_n - 1)).unwrap();
            assert_eq!(s.standard_monomials(), s.basis(), "n={n}, N={big_n}");
            assert_eq!(s.quotient_dimension(), s.mu());
        }
    }

    #[test]
    fn reduction_examples() {
        let s = relation_span(3, 2, 6).unwrap();
        let c = s.reduce_to_basis(&form("x1*x2", 2, 3)).unwrap();
        assert_eq!(c.coords().collect::<Vec<_>>(), vec![(&ev(&[1, 1]), &rat(1))]);
        assert!(s.reduce_to_basis(&form("x1^2", 2, 3)).unwrap().is_zero());
        let a = s.reduce_to_basis(&form("x1^5", 2, 3)).unwrap();
        let b = s.reduce_to_basis(&form("3*x1^2*x2^3", 2, 3)).unwrap();
        assert_eq!(a, b);
        assert!(matches!(s.reduce_to_basis(&form("x1^7", 2, 3)), Err(Error::DegreeOverflow { degree: 7, maxdeg: 6 })));
    }

    #[test]
    fn level_shifts_the_class_of_f() {
        // f x^0 dx is `level` times dx
        let s = RelationSpan::with_level(3, 2, 6, ratio(5, 2)).unwrap();
        let c = s.reduce_to_basis(&form("x1^3 + x2^3", 2, 3)).unwrap();
        assert_eq!(c.coord(&ev(&[0, 0])), ratio(5, 2));
    }

    #[test]
    fn operation_one_examples() {
        let f = VersalDeformation::new(SingularityGerm::fermat(2, 3).unwrap()).unwrap();
        let one = form("1", 2, 3);
        let lambda = [rat(0), rat(0), rat(0), rat(1)];
        assert_eq!(multiply_by_deformation_power(&one, &f, &lambda, 0).unwrap(), one);
        let m1 = multiply_by_deformation_power(&one, &f, &lambda, 1).unwrap();
        assert_eq!(m1.coeff(), &poly("x1^3 + x2^3", 2));
        let m2 = multiply_by_deformation_power(&one, &f, &lambda, 2).unwrap();
        let s = RelationSpan::for_constant_parameter(3, 2, 8, &rat(1)).unwrap();
        assert_eq!(s.reduce_to_basis(&m2).unwrap(), s.reduce_to_basis(&one).unwrap());
        assert_eq!(s.reduce_to_basis(&m1).unwrap(), s.reduce_to_basis(&one).unwrap().scale(&rat(-1)));
        assert!(matches!(
            multiply_by_deformation_power(&one, &f, &[rat(0), rat(0), rat(0), rat(0)], 1),
            Err(Error::ZeroConstantParameter)
        ));
    }
}
