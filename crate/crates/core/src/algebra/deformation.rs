use num_traits::{One, Zero};

use super::local::{local_algebra, milnor_number, LocalAlgebra, SingularityGerm};
use super::polynomial::{Polynomial, RealPolynomial};
use crate::error::{Error, Result};
use crate::scalar::{to_real, Rational, Real};

/// The miniversal deformation `F(x, l) = f(x) + sum_i l_i e_i(x)`, where
/// `e_1..e_mu` is the monomial basis of the local algebra and `e_mu = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct VersalDeformation {
    germ: SingularityGerm,
    algebra: LocalAlgebra,
}

impl VersalDeformation {
    /// Deformation over the local algebra computed at the default degree bound.
    pub fn new(germ: SingularityGerm) -> Result<Self> {
        let bound = germ.default_degree_bound();
        Self::with_degree_bound(germ, bound)
    }

    pub fn with_degree_bound(germ: SingularityGerm, degree_bound: u32) -> Result<Self> {
        let algebra = local_algebra(&germ, degree_bound)?;
        debug_assert!(algebra.basis().last().is_some_and(|e| e.is_constant()));
        Ok(Self { germ, algebra })
    }

    pub fn germ(&self) -> &SingularityGerm {
        &self.germ
    }

    pub fn algebra(&self) -> &LocalAlgebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.germ.dim()
    }

    /// Number of parameters, equal to the Milnor number.
    pub fn num_params(&self) -> usize {
        self.algebra.mu()
    }

    fn check_params(&self, got: usize) -> Result<()> {
        if got != self.num_params() {
            return Err(Error::DimensionMismatch { expected: self.num_params(), got });
        }
        Ok(())
    }

    /// `F(., l)` as an exact polynomial.
    pub fn polynomial_at(&self, lambda: &[Rational]) -> Result<Polynomial> {
        self.check_params(lambda.len())?;
        let mut p = self.germ.poly().clone();
        for (e, l) in self.algebra.basis().iter().zip(lambda) {
            p.add_term(e.clone(), l.clone());
        }
        Ok(p)
    }

    /// `F(., l)` as a floating-point polynomial.
    pub fn at<T: Real>(&self, lambda: &[T]) -> Result<RealPolynomial<T>> {
        self.check_params(lambda.len())?;
        let mut terms: Vec<(Vec<u32>, T)> =
            self.germ.poly().terms().map(|(e, c)| (e.exps().to_vec(), to_real::<T, Rational>(c))).collect();
        for (e, &l) in self.algebra.basis().iter().zip(lambda) {
            match terms.iter_mut().find(|(m, _)| m.as_slice() == e.exps()) {
                Some((_, c)) => *c = *c + l,
                None => terms.push((e.exps().to_vec(), l)),
            }
        }
        Ok(RealPolynomial::new(self.dim(), terms))
    }

    /// The basis function `e_i` (0-based `i`) as a floating-point polynomial.
    pub fn basis_function<T: Real>(&self, i: usize) -> Result<RealPolynomial<T>> {
        let e = self.algebra.basis().get(i).ok_or_else(|| {
            Error::InvalidArgument(format!("parameter index {} out of range 1..={}", i + 1, self.num_params()))
        })?;
        Ok(RealPolynomial::new(self.dim(), vec![(e.exps().to_vec(), T::one())]))
    }

    /// Floating-point value of `F(x, l)`.
    pub fn evaluate<T: Real>(&self, x: &[T], lambda: &[T]) -> Result<T> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self.at(lambda)?.value(x))
    }

    /// Exact value of `F(x, l)` for rational inputs.
    pub fn evaluate_exact(&self, x: &[Rational], lambda: &[Rational]) -> Result<Rational> {
        self.polynomial_at(lambda)?.eval(x)
    }

    /// Human-readable form, e.g. `F = x1^3 + x2^3 + l1*x1*x2 + l2*x1 + l3*x2 + l4`.
    pub fn render(&self) -> String {
        let mut s = format!("F = {}", self.germ.poly());
        for (i, e) in self.algebra.basis().iter().enumerate() {
            if e.is_constant() {
                s.push_str(&format!(" + l{}", i + 1));
            } else {
                s.push_str(&format!(" + l{}*{}", i + 1, e));
            }
        }
        s
    }
}

/// Drops all terms of total degree greater than `k`.
pub fn truncate_jet(f: &Polynomial, k: u32) -> Polynomial {
    f.truncate(k)
}

/// Realizes a germ inside a deformation of the Fermat germ of degree `degree`:
/// `P(x) = f_{N+1}(delta x) + sum_j (1 + eps_j) x_j^N`, with `f_{N+1}` the
/// Taylor polynomial of degree `N + 1`.
pub fn embed_singularity(f: &SingularityGerm, degree: u32, delta: &Rational, eps: &[Rational]) -> Result<Polynomial> {
    let n = f.dim();
    if eps.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: eps.len() });
    }
    if delta.is_zero() {
        return Err(Error::InvalidArgument("delta must be nonzero".into()));
    }
    let mu = milnor_number(f)? as u32;
    if degree < mu + 2 {
        return Err(Error::EmbeddingDegreeTooSmall { n_deg: degree, required: mu + 2 });
    }
    let mut p = truncate_jet(f.poly(), degree + 1).dilate(delta);
    for (j, e) in eps.iter().enumerate() {
        let mut exps = vec![0; n];
        exps[j] = degree;
        p.add_term(super::ExponentVector::new(exps), Rational::one() + e.clone());
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_polynomial;
    use crate::scalar::{rat, ratio};

    fn germ(s: &str, n: usize) -> SingularityGerm {
        SingularityGerm::new(parse_polynomial(s, n).unwrap()).unwrap()
    }

    #[test]
    fn renders_deformations_with_named_parameters() {
        let morse = VersalDeformation::new(germ("x1^2 + x2^2 + x3^2", 3)).unwrap();
        assert_eq!(morse.render(), "F = x1^2 + x2^2 + x3^2 + l1");
        let fermat = VersalDeformation::new(germ("x1^3 + x2^3", 2)).unwrap();
        assert_eq!(fermat.render(), "F = x1^3 + x2^3 + l1*x1*x2 + l2*x1 + l3*x2 + l4");
        let cusp = VersalDeformation::new(germ("x1^3 + x2^2", 2)).unwrap();
        assert_eq!(cusp.render(), "F = x1^3 + x2^2 + l1*x1 + l2");
    }

    #[test]
    fn evaluation_examples() {
        let f = VersalDeformation::new(germ("x1^3 + x2^3", 2)).unwrap();
        assert_eq!(f.evaluate(&[0.0, 0.0], &[0.0, 0.0, 0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(f.evaluate(&[1.0, 1.0], &[0.0; 4]).unwrap(), 2.0);
        assert_eq!(f.evaluate(&[1.0, 2.0], &[1.0, 0.0, 0.0, 0.0]).unwrap(), 11.0);
        assert_eq!(f.evaluate_exact(&[ratio(1, 2), rat(1)], &[rat(0), rat(0), rat(0), ratio(-9, 8)]).unwrap(), rat(0));
        assert!(matches!(f.evaluate(&[1.0], &[0.0; 4]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(f.evaluate(&[1.0, 1.0], &[0.0; 3]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn jets() {
        let p = parse_polynomial("x1^3 + x1^5", 1).unwrap();
        assert_eq!(truncate_jet(&p, 3), parse_polynomial("x1^3", 1).unwrap());
        let q = parse_polynomial("x1^3 + x2^3", 2).unwrap();
        assert_eq!(truncate_jet(&q, 5), q);
        let r = parse_polynomial("x1^2 + x1^4 + x1^6", 1).unwrap();
        assert_eq!(truncate_jet(&r, 4), parse_polynomial("x1^2 + x1^4", 1).unwrap());
    }

    #[test]
    fn embedding_examples() {
        let zero2 = [rat(0), rat(0)];
        let p = embed_singularity(&germ("x1^2 + x2^2", 2), 3, &rat(1), &zero2).unwrap();
        assert_eq!(p, parse_polynomial("x1^2 + x2^2 + x1^3 + x2^3", 2).unwrap());
        assert_eq!(milnor_number(&SingularityGerm::new(p).unwrap()).unwrap(), 1);

        let q = embed_singularity(&germ("x1^3", 1), 4, &rat(1), &[rat(0)]).unwrap();
        assert_eq!(q, parse_polynomial("x1^3 + x1^4", 1).unwrap());
        assert_eq!(milnor_number(&SingularityGerm::new(q).unwrap()).unwrap(), 2);

        let d = embed_singularity(&germ("x1^2 + x2^2", 2), 3, &ratio(1, 2), &[ratio(1, 3), rat(0)]).unwrap();
        assert_eq!(d, parse_polynomial("1/4*x1^2 + 1/4*x2^2 + 4/3*x1^3 + x2^3", 2).unwrap());
    }

    #[test]
    fn embedding_errors() {
        let f = germ("x1^3 + x2^3", 2);
        assert!(matches!(
            embed_singularity(&f, 5, &rat(1), &[rat(0), rat(0)]),
            Err(Error::EmbeddingDegreeTooSmall { n_deg: 5, required: 6 })
        ));
        assert!(matches!(embed_singularity(&f, 6, &rat(0), &[rat(0), rat(0)]), Err(Error::InvalidArgument(_))));
    }
}
