use thiserror::Error;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input or configuration.
    Usage,
    /// A mathematical precondition failed (irregular level set, empty
    /// domain, unstable basis, ...).
    Precondition,
    /// A numerical procedure failed to produce a trustworthy answer.
    Numerical,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("variable x{index} exceeds ambient dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a singularity germ: {0}")]
    NotAGerm(String),

    #[error("local algebra basis unstable at degree bound {bound}; retry with degree bound >= {suggested}")]
    UnstableBasis { bound: u32, suggested: u32 },

    #[error("singularity is not isolated (basis still growing at degree bound {cap})")]
    NonIsolated { cap: u32 },

    #[error("embedding degree {n_deg} too small: need at least mu + 2 = {required}")]
    EmbeddingDegreeTooSmall { n_deg: u32, required: u32 },

    #[error("form of degree {degree} exceeds the precomputed relation span (maxdeg {maxdeg})")]
    DegreeOverflow { degree: u32, maxdeg: u32 },

    #[error("the constant deformation parameter must be nonzero")]
    ZeroConstantParameter,

    #[error("empty domain: the level set has no compact component")]
    EmptyDomain,

    #[error("irregular level set: {0}")]
    Irregular(String),

    #[error("kernel is singular: evaluation point lies on the source point")]
    SingularKernel,

    #[error("evaluation point too close: |y| = {distance} but the expansion needs |y| > {required}")]
    TooClose { distance: f64, required: f64 },

    #[error("too few rows: {rows} rows for {cols} parameters")]
    TooFewRows { rows: usize, cols: usize },

    #[error("ray casting failed after {retries} perturbed rays")]
    RayCastingFailed { retries: usize },

    #[error("Gauss-Newton diverged: residual {residual} could not be reduced")]
    Divergence { residual: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Syntax { .. }
            | Error::VariableOutOfRange { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidArgument(_)
            | Error::TooFewRows { .. } => ErrorClass::Usage,
            Error::NotAGerm(_)
            | Error::UnstableBasis { .. }
            | Error::NonIsolated { .. }
            | Error::EmbeddingDegreeTooSmall { .. }
            | Error::DegreeOverflow { .. }
            | Error::ZeroConstantParameter
            | Error::EmptyDomain
            | Error::Irregular(_)
            | Error::SingularKernel
            | Error::TooClose { .. } => ErrorClass::Precondition,
            Error::RayCastingFailed { .. } | Error::Divergence { .. } | Error::Numerical(_) => ErrorClass::Numerical,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
