use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Exponent multi-index `(i_1, ..., i_n)` of the monomial `x1^i_1 * ... * xn^i_n`.
///
/// `Ord` is the graded lexicographic order with `x1 > x2 > ... > xn`:
/// larger total degree compares greater, ties are broken by the first
/// differing exponent.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentVector(Vec<u32>);

impl ExponentVector {
    pub fn new(exps: Vec<u32>) -> Self {
        assert!(!exps.is_empty(), "exponent vectors need dimension >= 1");
        ExponentVector(exps)
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![0; n])
    }

    /// The exponent vector of the single variable `x_{i+1}` (0-based `i`).
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self::new(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when `other` divides `self`.
    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        self.0.iter().zip(&other.0).map(|(a, b)| a.checked_sub(*b)).collect::<Option<Vec<_>>>().map(Self)
    }

    /// Lowers exponent `i` by one; `None` when it is already zero.
    pub fn lower(&self, i: usize) -> Option<Self> {
        let mut e = self.0.clone();
        e[i] = e[i].checked_sub(1)?;
        Some(Self(e))
    }

    pub fn raise(&self, i: usize, by: u32) -> Self {
        let mut e = self.0.clone();
        e[i] += by;
        Self(e)
    }

    /// Whether every exponent lies in `[0, bound]`.
    pub fn in_box(&self, bound: u32) -> bool {
        self.0.iter().all(|&e| e <= bound)
    }

    /// `x1*x2^3` style rendering; the constant monomial renders as `1`.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl Ord for ExponentVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ExponentVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            write!(f, "x{}", i + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// All exponent vectors in `n` variables of total degree exactly `d`,
/// in descending graded-lex order.
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<ExponentVector> {
    fn rec(n: usize, i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<ExponentVector>) {
        if i == n - 1 {
            cur[i] = left;
            out.push(ExponentVector(cur.clone()));
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e;
            rec(n, i + 1, left - e, cur, out);
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    rec(n, 0, d, &mut cur, &mut out);
    out
}

/// All exponent vectors of total degree `<= d`, in descending graded-lex order.
pub fn monomials_up_to(n: usize, d: u32) -> Vec<ExponentVector> {
    (0..=d).rev().flat_map(|k| monomials_of_degree(n, k)).collect()
}

/// The box `[0, bound]^n`, in descending graded-lex order.
pub fn box_monomials(n: usize, bound: u32) -> Vec<ExponentVector> {
    let mut all: Vec<ExponentVector> =
        monomials_up_to(n, bound * n as u32).into_iter().filter(|e| e.in_box(bound)).collect();
    all.sort_by(|a, b| b.cmp(a));
    all
}
