use serde::Serialize;

use super::mesh::LevelSetMesh;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Regular,
    Irregular,
}

/// Numerical check that `l` avoids the discriminant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityReport {
    /// Minimum `|grad F|` over facets inside the ball.
    #[serde(serialize_with = "crate::io::ser_f64")]
    pub min_grad: f64,
    pub clipped: bool,
    pub compact_components: usize,
    /// Facets where `|grad F| <= h |Hess F|`: the grid cannot resolve the
    /// surface there, typically near a critical point on the level set.
    pub unresolved_facets: usize,
    pub verdict: Verdict,
    pub reason: Option<String>,
}

impl RegularityReport {
    pub fn is_regular(&self) -> bool {
        self.verdict == Verdict::Regular
    }
}

/// Regular iff there is a compact component, the gradient exceeds `tol`
/// on every facet inside the ball, and the gradient dominates the Hessian
/// at grid scale. Clipped pieces outside the compact components only set
/// the `clipped` flag.
pub fn check_regularity<T: Real>(mesh: &LevelSetMesh<T>, tol: T) -> RegularityReport {
    let h = mesh.grid.spacing();
    let facets = mesh.components.iter().flat_map(|c| c.facets.iter()).chain(mesh.clipped_facets.iter());
    let mut min_grad = T::infinity();
    let mut unresolved = 0;
    for f in facets {
        min_grad = min_grad.min(f.grad_norm);
        if !(f.grad_norm > h * f.hess_norm) {
            unresolved += 1;
        }
    }
    let min_grad = if min_grad.is_finite() { min_grad.to_f64().unwrap_or(0.0) } else { 0.0 };
    let reason = if mesh.components.is_empty() {
        Some(if mesh.clipped() {
            "no compact component inside the ball (level set clipped)".to_string()
        } else {
            "empty level set".to_string()
        })
    } else if !(min_grad > tol.to_f64().unwrap_or(0.0)) {
        Some(format!("min |grad F| = {min_grad:e} is below the tolerance"))
    } else if unresolved > 0 {
        Some(format!("{unresolved} facets with |grad F| <= h |Hess F|"))
    } else {
        None
    };
    RegularityReport {
        min_grad,
        clipped: mesh.clipped(),
        compact_components: mesh.components.len(),
        unresolved_facets: unresolved,
        verdict: if reason.is_none() { Verdict::Regular } else { Verdict::Irregular },
        reason,
    }
}
