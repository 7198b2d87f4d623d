//! Local distinguishability of domains by their potentials: Jacobians of
//! moments and potential samples in the deformation parameters, rank
//! certificates, parameter recovery and separation experiments.

mod certificate;
mod model;
mod recover;
mod separation;
mod svd;

pub use certificate::{certify_matrix, injectivity_certificate, InjectivityCertificate, DEFAULT_RANK_THRESHOLD};
pub use model::{
    default_moment_order, moment_jacobian, potential_jacobian, unit_ball_moment, BallMomentModel, ForwardModel,
    JacobianMatrix, JacobianMethod, ModelSetup, MomentModel, PotentialModel,
};
pub use recover::{recover_parameters, RecoveryOptions, RecoveryResult};
pub use separation::{
    normalized_separation, separation_experiment, PairSeparation, SeparationOptions, SeparationReport,
};
pub use svd::{least_squares, singular_values, svd, Matrix, Svd};
