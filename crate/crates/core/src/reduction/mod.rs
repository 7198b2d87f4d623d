//! Volume forms near a Fermat germ modulo forms with zero integrals over
//! vanishing cycles.
//!
//! A form `g dx` is reduced by exact row elimination against the relations
//! `df ^ d(eta)` and `(f - c) x^alpha dx`; the normal form lives on the box
//! `[0, N-2]^n`, whose monomials index the vanishing cohomology.

mod certificate;
mod relations;

pub use certificate::{certificate_over, surjectivity_certificate, SurjectivityCertificate};
pub use relations::{
    default_maxdeg, multiply_by_deformation_power, relation_generators, relation_polynomial, relation_span,
    CohomologyClass, Reduction, RelationGenerator, RelationSpan, VolumeFormGerm,
};
