use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::model::ForwardModel;
use super::svd::singular_values;
use crate::error::{Error, Result};
use crate::io::{ser_f64, ser_f64_rows, ser_f64_vec};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationOptions {
    /// Radius of the parameter ball the pairs are drawn from.
    pub radius: f64,
    pub num_pairs: usize,
    pub seed: u64,
    /// Accepted slack between the observed and the predicted separation.
    pub factor: f64,
    /// Redraws per pair when a sample is not admissible.
    pub max_retries: usize,
}

impl Default for SeparationOptions {
    fn default() -> Self {
        Self { radius: 0.02, num_pairs: 10, seed: 0, factor: 2.0, max_retries: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairSeparation {
    #[serde(serialize_with = "ser_f64_vec")]
    pub l1: Vec<f64>,
    #[serde(serialize_with = "ser_f64_vec")]
    pub l2: Vec<f64>,
    /// `max_y |I_l1(y) - I_l2(y)| / |l1 - l2|`.
    #[serde(serialize_with = "ser_f64")]
    pub separation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationReport {
    #[serde(serialize_with = "ser_f64_vec")]
    pub lambda: Vec<f64>,
    pub mu: usize,
    #[serde(serialize_with = "ser_f64")]
    pub radius: f64,
    pub seed: u64,
    /// Observation points (or output ids) the sup is taken over.
    #[serde(serialize_with = "ser_f64_rows")]
    pub y_samples: Vec<Vec<f64>>,
    pub pairs: Vec<PairSeparation>,
    #[serde(serialize_with = "ser_f64")]
    pub min_separation: f64,
    /// `sigma_min(J) / sqrt(rows)`, a first-order lower bound for the sup norm.
    #[serde(serialize_with = "ser_f64")]
    pub predicted: f64,
    #[serde(serialize_with = "ser_f64")]
    pub factor: f64,
    /// `min_separation >= predicted / factor`.
    pub consistent: bool,
    pub all_positive: bool,
    pub redraws: usize,
}

fn distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}

/// `max_j |M(l1)_j - M(l2)_j| / |l1 - l2|`; `l1 = l2` is rejected.
pub fn normalized_separation<T, M>(model: &M, l1: &[T], l2: &[T]) -> Result<T>
where
    T: Real,
    M: ForwardModel<T> + ?Sized,
{
    let d = distance(l1, l2);
    if !(d > T::zero()) {
        return Err(Error::InvalidArgument("separation needs two distinct parameters".into()));
    }
    let a = model.evaluate(l1)?;
    let b = model.evaluate(l2)?;
    Ok(a.iter().zip(&b).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs())) / d)
}

/// Uniform point in the ball of the given radius around `center`.
fn ball_point<T: Real>(rng: &mut ChaCha8Rng, center: &[T], radius: f64) -> Vec<T> {
    let k = center.len();
    loop {
        let g: Vec<f64> = (0..k).map(|_| StandardNormal.sample(rng)).collect();
        let len = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len < 1e-12 {
            continue;
        }
        let u: f64 = rng.random();
        let r = radius * u.powf(1.0 / k as f64);
        return center.iter().zip(&g).map(|(&c, &v)| c + T::lit(r * v / len)).collect();
    }
}

/// Draws `num_pairs` pairs in the `radius` ball around `lambda` and reports
/// their normalized separations. Pair `k` uses its own stream of the seeded
/// generator, so the report does not depend on evaluation order.
pub fn separation_experiment<T, M>(
    model: &M,
    lambda: &[T],
    y_samples: Vec<Vec<f64>>,
    opts: &SeparationOptions,
) -> Result<SeparationReport>
where
    T: Real,
    M: ForwardModel<T> + ?Sized,
{
    if lambda.len() != model.num_params() {
        return Err(Error::DimensionMismatch { expected: model.num_params(), got: lambda.len() });
    }
    if !(opts.radius > 0.0) {
        return Err(Error::InvalidArgument("separation radius must be positive".into()));
    }
    model.check_admissible(lambda)?;
    let j = model.jacobian(lambda)?;
    let s = singular_values(&j);
    let sigma_min = if s.len() < j.cols() { 0.0 } else { s.last().map_or(0.0, |v| v.to_f64().unwrap_or(0.0)) };
    let predicted = sigma_min / (j.rows().max(1) as f64).sqrt();

    let results: Vec<Result<(PairSeparation, usize)>> = (0..opts.num_pairs)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            let mut redraws = 0;
            loop {
                let l1 = ball_point(&mut rng, lambda, opts.radius);
                let l2 = ball_point(&mut rng, lambda, opts.radius);
                let ok = model.check_admissible(&l1).and_then(|_| model.check_admissible(&l2));
                let sep = ok.and_then(|_| normalized_separation(model, &l1, &l2));
                match sep {
                    Ok(v) => {
                        let f = |l: &[T]| l.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
                        return Ok((
                            PairSeparation { l1: f(&l1), l2: f(&l2), separation: v.to_f64().unwrap_or(f64::NAN) },
                            redraws,
                        ));
                    }
                    Err(e) if redraws < opts.max_retries && matches!(e.class(), crate::ErrorClass::Precondition) => {
                        redraws += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
        })
        .collect();
    let mut pairs = Vec::with_capacity(opts.num_pairs);
    let mut redraws = 0;
    for r in results {
        let (p, k) = r?;
        pairs.push(p);
        redraws += k;
    }
    let min_separation = pairs.iter().map(|p| p.separation).fold(f64::INFINITY, f64::min);
    let min_separation = if pairs.is_empty() { 0.0 } else { min_separation };
    Ok(SeparationReport {
        lambda: lambda.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
        mu: model.num_params(),
        radius: opts.radius,
        seed: opts.seed,
        y_samples,
        all_positive: !pairs.is_empty() && pairs.iter().all(|p| p.separation > 0.0),
        consistent: min_separation >= predicted / opts.factor,
        pairs,
        min_separation,
        predicted,
        factor: opts.factor,
        redraws,
    })
}
