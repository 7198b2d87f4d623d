//! Local algebras of isolated singularities via truncated Macaulay matrices.
//!
//! Row reduction happens in `A / m^(D+1)` with a local (degree-ascending)
//! term order, so the result is the algebra of the germ at the origin and
//! not of the global polynomial quotient.

use std::collections::HashMap;

use num_traits::{One, Zero};

use super::echelon::{Echelon, SparseRow};
use super::monomial::{monomials_up_to, ExponentVector};
use super::polynomial::Polynomial;
use crate::error::{Error, Result};
use crate::scalar::Rational;

/// Germ of a polynomial with a critical point at the origin, `f(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularityGerm {
    poly: Polynomial,
}

impl SingularityGerm {
    pub fn new(poly: Polynomial) -> Result<Self> {
        if !poly.constant_term().is_zero() {
            return Err(Error::NotAGerm("nonzero constant term".into()));
        }
        if let Some((e, _)) = poly.terms().find(|(e, _)| e.degree() == 1) {
            return Err(Error::NotAGerm(format!("linear term {e}: origin is not critical")));
        }
        if poly.is_zero() {
            return Err(Error::NotAGerm("zero polynomial".into()));
        }
        Ok(Self { poly })
    }

    /// The Fermat germ `x1^N + ... + xn^N`.
    pub fn fermat(n: usize, degree: u32) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidArgument("Fermat degree must be >= 2".into()));
        }
        let terms = (0..n).map(|i| {
            let mut e = vec![0; n];
            e[i] = degree;
            (ExponentVector::new(e), Rational::one())
        });
        Self::new(Polynomial::from_terms(n, terms))
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    /// `Some(N)` when the germ is `sum_i c_i x_i^N` with every `c_i != 0`.
    pub fn fermat_degree(&self) -> Option<u32> {
        let n = self.dim();
        if self.poly.len() != n {
            return None;
        }
        let mut degree = None;
        let mut seen = vec![false; n];
        for (e, _) in self.poly.terms() {
            let nz: Vec<usize> = (0..n).filter(|&i| e.exps()[i] > 0).collect();
            if nz.len() != 1 || seen[nz[0]] {
                return None;
            }
            seen[nz[0]] = true;
            let d = e.exps()[nz[0]];
            if *degree.get_or_insert(d) != d {
                return None;
            }
        }
        degree
    }

    /// Default Macaulay truncation: twice the total degree.
    pub fn default_degree_bound(&self) -> u32 {
        2 * self.poly.total_degree().unwrap_or(1).max(1)
    }
}

/// `[df/dx1, ..., df/dxn]`.
pub fn jacobian_generators(f: &SingularityGerm) -> Vec<Polynomial> {
    f.poly().gradient()
}

/// Monomial basis of `Q_f`, ordered by descending total degree (ties in
/// lexicographic order) with the constant monomial last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalAlgebra {
    basis: Vec<ExponentVector>,
    degree_bound: u32,
}

impl LocalAlgebra {
    pub fn basis(&self) -> &[ExponentVector] {
        &self.basis
    }

    pub fn mu(&self) -> usize {
        self.basis.len()
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    pub fn dim(&self) -> usize {
        self.basis[0].dim()
    }

    /// Basis as monomial strings, e.g. `["x1*x2", "x1", "x2", "1"]`.
    pub fn rendered(&self) -> Vec<String> {
        self.basis.iter().map(|e| e.to_string()).collect()
    }
}

/// Standard monomials of degree `<= bound - 1` of the Macaulay matrix
/// truncated at total degree `bound`.
fn standard_monomials(f: &SingularityGerm, bound: u32) -> Vec<ExponentVector> {
    let n = f.dim();
    let mut columns = monomials_up_to(n, bound);
    columns.reverse(); // ascending degree; ties keep x1 first
    {
        // within a degree, descending lex: x1^2 before x1*x2 before x2^2
        let mut start = 0;
        while start < columns.len() {
            let d = columns[start].degree();
            let end = columns[start..].iter().position(|e| e.degree() != d).map_or(columns.len(), |p| start + p);
            columns[start..end].sort_by(|a, b| b.exps().cmp(a.exps()));
            start = end;
        }
    }
    let index: HashMap<&ExponentVector, usize> = columns.iter().enumerate().map(|(i, e)| (e, i)).collect();

    let mut echelon: Echelon<Rational> = Echelon::new();
    for g in jacobian_generators(f) {
        let Some(order) = g.order() else { continue };
        if order > bound {
            continue;
        }
        for shift in monomials_up_to(n, bound - order) {
            let row: SparseRow<Rational> = g
                .terms()
                .filter_map(|(e, c)| {
                    let m = e.mul(&shift);
                    (m.degree() <= bound).then(|| (index[&m], c.clone()))
                })
                .collect();
            echelon.insert(row);
        }
    }

    let mut basis: Vec<ExponentVector> = columns
        .iter()
        .enumerate()
        .filter(|(i, e)| !echelon.is_pivot(*i) && e.degree() < bound)
        .map(|(_, e)| e.clone())
        .collect();
    basis.sort_by(|a, b| b.cmp(a));
    basis
}

const MAX_COLUMNS: usize = 20_000;

fn column_count(n: usize, d: u32) -> usize {
    // C(d + n, n)
    let mut c: u128 = 1;
    for i in 1..=n as u128 {
        c = c * (d as u128 + i) / i;
    }
    c.min(usize::MAX as u128) as usize
}

/// Local algebra `Q_f` by the Macaulay-matrix method at the given degree bound.
///
/// The basis must be stable: the same computation at `degree_bound + 1`
/// has to return the same monomials.
pub fn local_algebra(f: &SingularityGerm, degree_bound: u32) -> Result<LocalAlgebra> {
    if degree_bound < 1 {
        return Err(Error::InvalidArgument("degree bound must be >= 1".into()));
    }
    let n = f.dim();
    let first = standard_monomials(f, degree_bound);
    let second = standard_monomials(f, degree_bound + 1);
    if first == second && !first.is_empty() {
        return Ok(LocalAlgebra { basis: first, degree_bound });
    }
    // Probe larger bounds to tell "bound too small" from "not isolated".
    let cap = (3 * degree_bound + 4).max(12);
    let mut prev = second;
    for d in degree_bound + 2..=cap {
        if column_count(n, d) > MAX_COLUMNS {
            return Err(Error::NonIsolated { cap: d - 1 });
        }
        let next = standard_monomials(f, d);
        if next == prev {
            return Err(Error::UnstableBasis { bound: degree_bound, suggested: d - 1 });
        }
        prev = next;
    }
    Err(Error::NonIsolated { cap })
}

/// Milnor number `mu = dim Q_f`.
///
/// Fermat germs use the closed form `(N - 1)^n`, cross-checked against the
/// Macaulay computation.
pub fn milnor_number(f: &SingularityGerm) -> Result<usize> {
    let computed = local_algebra(f, f.default_degree_bound())?.mu();
    if let Some(degree) = f.fermat_degree() {
        let closed = (degree as usize - 1).pow(f.dim() as u32);
        if closed != computed {
            return Err(Error::Numerical(format!(
                "Macaulay Milnor number {computed} disagrees with closed form {closed}"
            )));
        }
        return Ok(closed);
    }
    Ok(computed)
}
