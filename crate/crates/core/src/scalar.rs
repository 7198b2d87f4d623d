//! Scalar abstractions.
//!
//! Exact algebra runs over any [`Coefficient`] ring (in practice
//! [`Rational`]); the numerical geometry, quadrature and linear algebra run
//! over any [`Real`] (`f32` or `f64`).

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Exact rational numbers.
pub type Rational = BigRational;

/// Coefficients of sparse polynomials.
pub trait Coefficient: Clone + PartialEq + Debug + Num + Neg<Output = Self> + Send + Sync {}

impl<T> Coefficient for T where T: Clone + PartialEq + Debug + Num + Neg<Output = T> + Send + Sync {}

/// Floating point scalar used by the numerical modules.
pub trait Real:
    Float + FloatConst + FromPrimitive + Default + Debug + Display + Send + Sync + std::iter::Sum + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Conversion of an exact coefficient to a float.
pub fn to_real<T: Real, K: ToPrimitive>(c: &K) -> T {
    T::from_f64(c.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(T::nan)
}

/// Integer as an exact rational.
pub fn rat(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `num/den` as an exact rational.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact rational value of a finite `f64` (every finite double is a dyadic rational).
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

/// `c^k` by repeated squaring.
pub fn pow_coeff<K: Coefficient>(c: &K, mut k: u32) -> K {
    let mut base = c.clone();
    let mut acc = K::one();
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base.clone();
        }
        base = base.clone() * base;
        k >>= 1;
    }
    acc
}

/// Deterministic pairwise summation of a slice.
///
/// The reduction tree depends only on the slice length, so results are
/// bit-reproducible regardless of how the slice was produced.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        let mut acc = T::zero();
        for &v in values {
            acc = acc + v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Parallel map followed by a fixed-shape pairwise reduction.
///
/// Items are split into chunks of a fixed size; each chunk is summed
/// pairwise and the chunk sums are then summed pairwise in index order.
pub fn par_pairwise_sum<T, I, F>(items: &[I], f: F) -> T
where
    T: Real,
    I: Sync,
    F: Fn(&I) -> T + Sync,
{
    use rayon::prelude::*;
    const CHUNK: usize = 4096;
    let partial: Vec<T> = items
        .par_chunks(CHUNK)
        .map(|chunk| {
            let vals: Vec<T> = chunk.iter().map(&f).collect();
            pairwise_sum(&vals)
        })
        .collect();
    pairwise_sum(&partial)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
        assert_eq!(par_pairwise_sum(&v, |x| *x), 499_500.0);
    }

    #[test]
    fn pow_coeff_exact() {
        assert_eq!(pow_coeff(&ratio(2, 3), 3), ratio(8, 27));
        assert_eq!(pow_coeff(&rat(5), 0), rat(1));
    }

    #[test]
    fn dyadic_conversion() {
        assert_eq!(rational_from_f64(0.75).unwrap(), ratio(3, 4));
        assert!(rational_from_f64(f64::NAN).is_none());
    }
}
