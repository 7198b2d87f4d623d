use num_traits::Zero;
use serde::Serialize;

use super::relations::{RelationSpan, VolumeFormGerm};
use crate::algebra::echelon::{Echelon, SparseRow};
use crate::algebra::{monomials_up_to, ExponentVector};
use crate::error::{Error, Result};
use crate::scalar::Rational;

/// Rank of `g -> class(g x^e dx)` over monomials `g`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurjectivityCertificate {
    #[serde(rename = "N")]
    pub fermat_degree: u32,
    pub n: usize,
    pub maxdeg: u32,
    pub e: Vec<u32>,
    pub rank: usize,
    pub mu: usize,
    pub full_rank: bool,
    pub witnesses: Vec<String>,
}

/// Certifies that multiplying by the basis monomial `x^e` reaches every
/// class of the Fermat vanishing cohomology.
///
/// Candidates `g` range over monomials with `deg g + |e| <= maxdeg`; the box
/// monomials are tried first (ascending), then the rest. A candidate is a
/// witness when its class raises the rank.
pub fn surjectivity_certificate(
    e: &ExponentVector,
    fermat_degree: u32,
    n: usize,
    maxdeg: u32,
) -> Result<SurjectivityCertificate> {
    let span = RelationSpan::new(fermat_degree, n, maxdeg)?;
    certificate_over(&span, e)
}

/// As [`surjectivity_certificate`] with a prebuilt span.
pub fn certificate_over(span: &RelationSpan, e: &ExponentVector) -> Result<SurjectivityCertificate> {
    let n = span.dim();
    let big_n = span.fermat_degree();
    if e.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: e.dim() });
    }
    if !e.in_box(big_n - 2) {
        return Err(Error::InvalidArgument(format!("{e} is not a basis monomial of the box [0, {}]^{n}", big_n - 2)));
    }
    let basis = span.basis();
    let mu = basis.len();
    let budget = span.maxdeg().saturating_sub(e.degree());

    let mut candidates: Vec<ExponentVector> = basis.iter().rev().filter(|g| g.degree() <= budget).cloned().collect();
    let mut rest: Vec<ExponentVector> =
        monomials_up_to(n, budget).into_iter().filter(|g| !g.in_box(big_n - 2)).collect();
    rest.reverse();
    candidates.extend(rest);

    let mut echelon: Echelon<Rational> = Echelon::new();
    let mut witnesses = Vec::new();
    for g in candidates {
        if echelon.rank() == mu {
            break;
        }
        let form = VolumeFormGerm::monomial(big_n, g.mul(e))?;
        let class = span.reduce_to_basis(&form)?;
        let row: SparseRow<Rational> =
            class.vector(&basis).into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect();
        if echelon.insert(row) {
            witnesses.push(g.to_string());
        }
    }
    let rank = echelon.rank();
    Ok(SurjectivityCertificate {
        fermat_degree: big_n,
        n,
        maxdeg: span.maxdeg(),
        e: e.exps().to_vec(),
        rank,
        mu,
        full_rank: rank == mu,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::box_monomials;

    #[test]
    fn constant_monomial_uses_the_basis_itself() {
        for (n, big_n) in [(1, 3), (2, 3), (2, 4), (3, 3)] {
            let c = surjectivity_certificate(&ExponentVector::zero(n), big_n, n, 2 * n as u32 * (big_n - 1)).unwrap();
            assert!(c.full_rank);
            let mut expected: Vec<String> = box_monomials(n, big_n - 2).iter().map(|e| e.to_string()).collect();
            expected.reverse();
            assert_eq!(c.witnesses, expected);
        }
    }

    #[test]
    fn top_monomial_is_full_rank() {
        let c = surjectivity_certificate(&ExponentVector::new(vec![1, 1]), 3, 2, 8).unwrap();
        assert_eq!((c.rank, c.mu, c.full_rank), (4, 4, true));
        let c = surjectivity_certificate(&ExponentVector::new(vec![2, 2]), 4, 2, 12).unwrap();
        assert_eq!((c.rank, c.mu, c.full_rank), (9, 9, true));
    }

    #[test]
    fn rejects_monomials_outside_the_box() {
        assert!(surjectivity_certificate(&ExponentVector::new(vec![2, 0]), 3, 2, 8).is_err());
    }

    #[test]
    fn json_shape() {
        let c = surjectivity_certificate(&ExponentVector::zero(2), 3, 2, 8).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        for key in ["N", "n", "maxdeg", "e", "rank", "mu", "full_rank", "witnesses"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
