//! Exact polynomial algebra: sparse polynomials over the rationals, local
//! algebras of isolated singularities, miniversal deformations and the
//! embedding of a germ into a Fermat deformation.

mod deformation;
pub mod echelon;
mod local;
mod monomial;
mod parse;
mod polynomial;

pub use deformation::{embed_singularity, truncate_jet, VersalDeformation};
pub use local::{jacobian_generators, local_algebra, milnor_number, LocalAlgebra, SingularityGerm};
pub use monomial::{box_monomials, monomials_of_degree, monomials_up_to, ExponentVector};
pub use parse::parse_polynomial;
pub use polynomial::{Polynomial, RealPolynomial};

use crate::error::{Error, Result};

/// Resolves a germ specification: either a polynomial in `x1..xn` or a
/// preset (`fermat:N`, `morse`).
pub fn germ_from_spec(spec: &str, n: usize) -> Result<SingularityGerm> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("fermat:") {
        let degree: u32 =
            rest.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad Fermat degree in '{spec}'")))?;
        return SingularityGerm::fermat(n, degree);
    }
    if spec == "morse" {
        return SingularityGerm::fermat(n, 2);
    }
    SingularityGerm::new(parse_polynomial(spec, n)?)
}
