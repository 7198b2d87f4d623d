//! Vanishing cycles of polynomial deformations and the potentials of the
//! domains they bound.
//!
//! The numerical modules are generic over [`Real`] (`f32`, `f64`); the
//! algebra and the reduction calculus work over exact [`Rational`]s. The
//! aliases below fix the usual `f64` instantiation.

pub mod algebra;
pub mod distinguish;
pub mod error;
pub mod geometry;
pub mod io;
pub mod potential;
pub mod reduction;
pub mod scalar;

pub use error::{Error, ErrorClass, Result};
pub use scalar::{Rational, Real};

pub type Grid = geometry::GridSpec<f64>;
pub type Mesh = geometry::LevelSetMesh<f64>;
pub type RealPoly = algebra::RealPolynomial<f64>;
pub type Density = potential::Density<f64>;
pub type Sample = potential::DomainSample<f64>;
pub type Moments = potential::MomentVector<f64>;
pub type Setup = distinguish::ModelSetup<f64>;
