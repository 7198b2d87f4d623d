use serde::Serialize;

use super::model::JacobianMatrix;
use super::svd::{singular_values, Matrix};
use crate::io::{ser_f64, ser_f64_vec};

/// Default threshold on `sigma_min / sigma_max` of the column-scaled Jacobian.
pub const DEFAULT_RANK_THRESHOLD: f64 = 1e-6;

/// Full-column-rank verdict on a Jacobian.
///
/// Columns are divided by their norms first; the singular values reported
/// are those of the scaled matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InjectivityCertificate {
    pub rank: usize,
    pub mu: usize,
    #[serde(serialize_with = "ser_f64")]
    pub sigma_min: f64,
    #[serde(serialize_with = "ser_f64")]
    pub sigma_max: f64,
    #[serde(serialize_with = "ser_f64")]
    pub threshold: f64,
    pub verdict: bool,
    #[serde(serialize_with = "ser_f64_vec")]
    pub singular_values: Vec<f64>,
}

pub fn injectivity_certificate(j: &JacobianMatrix, threshold: f64) -> InjectivityCertificate {
    certify_matrix(&j.matrix(), threshold)
}

pub fn certify_matrix(m: &Matrix<f64>, threshold: f64) -> InjectivityCertificate {
    let mu = m.cols();
    let scaled = m.scale_columns(&m.column_norms());
    let s = if m.rows() == 0 { vec![] } else { singular_values(&scaled) };
    let sigma_max = s.first().copied().unwrap_or(0.0);
    // A wide matrix has at most `rows` nonzero singular values.
    let sigma_min = if s.len() < mu { 0.0 } else { s.last().copied().unwrap_or(0.0) };
    let rank = if sigma_max > 0.0 { s.iter().filter(|&&v| v / sigma_max > threshold).count() } else { 0 };
    let verdict = mu > 0 && rank == mu;
    debug_assert_eq!(verdict, mu > 0 && sigma_max > 0.0 && sigma_min / sigma_max > threshold);
    InjectivityCertificate { rank, mu, sigma_min, sigma_max, threshold, verdict, singular_values: s }
}
