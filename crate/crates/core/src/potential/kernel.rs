use crate::algebra::{monomials_up_to, ExponentVector, Polynomial};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Newton kernel `|x - y|^-(n-2)`, defined for `n >= 3`.
pub fn newton_kernel<T: Real>(x: &[T], y: &[T], n: usize) -> Result<T> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("the Newton kernel needs n >= 3, got {n}")));
    }
    if x.len() != n || y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len().min(y.len()) });
    }
    let r2: T = x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum();
    if r2 == T::zero() {
        return Err(Error::SingularKernel);
    }
    Ok(kernel_r2(r2, n))
}

/// `r^-(n-2)` from `r^2`, no checks.
#[inline]
pub(crate) fn kernel_r2<T: Real>(r2: T, n: usize) -> T {
    match n {
        3 => r2.sqrt().recip(),
        4 => r2.recip(),
        _ => r2.powf(-(T::from_usize_lossy(n) - T::lit(2.0)) / T::lit(2.0)),
    }
}

/// Multi-indices `|alpha| <= L` in ascending graded order (constant first).
pub fn moment_indices(n: usize, order: u32) -> Vec<ExponentVector> {
    let mut v = monomials_up_to(n, order);
    v.reverse();
    v
}

/// Taylor coefficients `T_alpha(y) = (1/alpha!) d^alpha_x K(x, y)|_{x=0}` for
/// `|alpha| <= L`, aligned with [`moment_indices`].
///
/// With `s = |y|^2 + u`, `u = |x|^2 - 2 x.y`, the kernel is
/// `s^-q = |y|^-2q sum_j binom(-q, j) (u / |y|^2)^j`, `q = (n-2)/2`; every
/// `u^j` has order `j`, so `j <= L` suffices.
pub fn multipole_coefficients<T: Real>(y: &[T], order: u32) -> Result<Vec<T>> {
    let n = y.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!("the Newton kernel needs n >= 3, got {n}")));
    }
    let y2: T = y.iter().map(|&v| v * v).sum();
    if y2 == T::zero() {
        return Err(Error::SingularKernel);
    }
    let q = (T::from_usize_lossy(n) - T::lit(2.0)) / T::lit(2.0);
    let mut u: Polynomial<T> = Polynomial::zero(n);
    for (i, &yi) in y.iter().enumerate() {
        u.add_term(ExponentVector::unit(n, i), T::lit(-2.0) * yi / y2);
        u.add_term(ExponentVector::unit(n, i).raise(i, 1), T::one() / y2);
    }
    let mut series: Polynomial<T> = Polynomial::constant(n, T::one());
    let mut power: Polynomial<T> = Polynomial::constant(n, T::one());
    let mut binom = T::one();
    for j in 1..=order {
        power = (&power * &u).truncate(order);
        let jt = T::from_u32(j).unwrap();
        binom = binom * (-q - (jt - T::one())) / jt;
        series = &series + &power.scale(&binom);
    }
    let lead = y2.powf(-q);
    Ok(moment_indices(n, order).iter().map(|a| series.coeff(a) * lead).collect())
}
