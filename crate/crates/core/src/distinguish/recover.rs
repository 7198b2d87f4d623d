use serde::Serialize;

use super::model::ForwardModel;
use super::svd::{least_squares, Matrix};
use crate::error::{Error, Result};
use crate::io::{ser_f64, ser_f64_vec};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryOptions {
    pub max_iterations: usize,
    /// Stop once an accepted step is shorter than this.
    pub step_tol: f64,
    /// `converged` requires the final residual norm to be at most this.
    pub residual_tol: f64,
    /// Step halvings before switching to Levenberg damping.
    pub max_halvings: usize,
    pub levenberg_tries: usize,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self { max_iterations: 50, step_tol: 1e-10, residual_tol: 1e-8, max_halvings: 8, levenberg_tries: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveryResult {
    #[serde(serialize_with = "ser_f64_vec")]
    pub lambda_hat: Vec<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual norm after every accepted step, starting from `lambda0`.
    #[serde(serialize_with = "ser_f64_vec")]
    pub history: Vec<f64>,
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

fn residual<T: Real, M: ForwardModel<T> + ?Sized>(model: &M, lambda: &[T], target: &[T]) -> Result<Vec<T>> {
    let v = model.evaluate(lambda)?;
    if v.len() != target.len() {
        return Err(Error::DimensionMismatch { expected: v.len(), got: target.len() });
    }
    Ok(v.iter().zip(target).map(|(&a, &b)| a - b).collect())
}

/// Levenberg step: least squares on `[J; sqrt(mu) I] d = [-r; 0]`.
fn levenberg_step<T: Real>(j: &Matrix<T>, r: &[T], mu: T) -> Result<Vec<T>> {
    let (m, p) = (j.rows(), j.cols());
    let mut a = Matrix::zeros(m + p, p);
    let mut b = vec![T::zero(); m + p];
    for i in 0..m {
        for k in 0..p {
            a[(i, k)] = j[(i, k)];
        }
        b[i] = -r[i];
    }
    for k in 0..p {
        a[(m + k, k)] = mu.sqrt();
    }
    least_squares(&a, &b, T::epsilon())
}

/// Damped Gauss-Newton fit of `model(lambda) = target` from `lambda0`.
///
/// Each iteration solves the linearized least-squares problem, halves the
/// step until the residual decreases, and falls back to Levenberg damping
/// after `max_halvings`. Trial points where the model fails (empty or
/// irregular domain) count as rejected. Residual norms of accepted steps
/// decrease strictly.
pub fn recover_parameters<T, M>(
    model: &M,
    target: &[T],
    lambda0: &[T],
    opts: &RecoveryOptions,
) -> Result<RecoveryResult>
where
    T: Real,
    M: ForwardModel<T> + ?Sized,
{
    if lambda0.len() != model.num_params() {
        return Err(Error::DimensionMismatch { expected: model.num_params(), got: lambda0.len() });
    }
    let mut lambda = lambda0.to_vec();
    let mut r = residual(model, &lambda, target)?;
    let mut rn = norm(&r);
    let mut history = vec![rn.to_f64().unwrap_or(f64::NAN)];
    let mut iterations = 0;
    let step_tol = T::lit(opts.step_tol);
    while iterations < opts.max_iterations && rn > T::zero() {
        let j = model.jacobian(&lambda)?;
        let neg: Vec<T> = r.iter().map(|&v| -v).collect();
        let step = least_squares(&j, &neg, T::epsilon() * T::lit(16.0))?;
        if norm(&step) < step_tol {
            break;
        }
        let try_step = |d: &[T]| -> Option<(Vec<T>, Vec<T>, T)> {
            let cand: Vec<T> = lambda.iter().zip(d).map(|(&a, &b)| a + b).collect();
            let rc = residual(model, &cand, target).ok()?;
            let nc = norm(&rc);
            (nc < rn).then_some((cand, rc, nc))
        };
        let mut accepted = None;
        let mut t = T::one();
        for _ in 0..=opts.max_halvings {
            let d: Vec<T> = step.iter().map(|&v| v * t).collect();
            if let Some(a) = try_step(&d) {
                accepted = Some((a, norm(&d)));
                break;
            }
            t = t * T::lit(0.5);
        }
        if accepted.is_none() {
            let jtj_scale = j.max_abs() * j.max_abs();
            let mut mu = jtj_scale * T::lit(1e-4);
            for _ in 0..opts.levenberg_tries {
                let d = levenberg_step(&j, &r, mu)?;
                if let Some(a) = try_step(&d) {
                    accepted = Some((a, norm(&d)));
                    break;
                }
                mu = mu * T::lit(10.0);
            }
        }
        let Some(((cand, rc, nc), step_len)) = accepted else {
            // No descent left: converged if the residual is already small.
            if rn.to_f64().unwrap_or(f64::INFINITY) <= opts.residual_tol {
                break;
            }
            return Err(Error::Divergence { residual: rn.to_f64().unwrap_or(f64::NAN) });
        };
        lambda = cand;
        r = rc;
        rn = nc;
        iterations += 1;
        history.push(rn.to_f64().unwrap_or(f64::NAN));
        if step_len < step_tol {
            break;
        }
    }
    let residual_norm = rn.to_f64().unwrap_or(f64::NAN);
    Ok(RecoveryResult {
        lambda_hat: lambda.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
        residual_norm,
        iterations,
        converged: residual_norm <= opts.residual_tol,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::super::model::BallMomentModel;
    use super::*;

    /// `(a, b) -> (a + b, a b, a^2)`; a smooth toy with a unique preimage near (1, 2).
    struct Toy;

    impl ForwardModel<f64> for Toy {
        fn num_params(&self) -> usize {
            2
        }
        fn num_outputs(&self) -> usize {
            3
        }
        fn evaluate(&self, l: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![l[0] + l[1], l[0] * l[1], l[0] * l[0]])
        }
        fn jacobian(&self, l: &[f64]) -> Result<Matrix<f64>> {
            Matrix::from_rows(&[vec![1.0, 1.0], vec![l[1], l[0]], vec![2.0 * l[0], 0.0]])
        }
    }

    #[test]
    fn toy_recovery_is_monotone() {
        let target = Toy.evaluate(&[1.0, 2.0]).unwrap();
        let r = recover_parameters(&Toy, &target, &[1.5, 1.2], &RecoveryOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.lambda_hat[0] - 1.0).abs() < 1e-10 && (r.lambda_hat[1] - 2.0).abs() < 1e-10);
        assert!(r.history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn fixed_point_takes_no_steps() {
        let m = BallMomentModel::new(3, 2);
        let target = m.evaluate(&[-1.0]).unwrap();
        let r = recover_parameters(&m, &target, &[-1.0], &RecoveryOptions::default()).unwrap();
        assert!(r.iterations <= 1);
        assert_eq!(r.residual_norm, 0.0);
    }

    #[test]
    fn morse_from_exact_moments() {
        let m = BallMomentModel::new(3, 2);
        let target = m.evaluate(&[-1.0]).unwrap();
        let r = recover_parameters(&m, &target, &[-1.2], &RecoveryOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.lambda_hat[0] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn unreachable_target_does_not_converge() {
        // A negative volume has no preimage.
        let m = BallMomentModel::new(3, 0);
        match recover_parameters(&m, &[-1.0], &[-1.0], &RecoveryOptions::default()) {
            Ok(r) => assert!(!r.converged),
            Err(e) => assert!(matches!(e, Error::Divergence { .. })),
        }
    }
}
