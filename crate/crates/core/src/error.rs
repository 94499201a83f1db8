use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid Stokes operator index {0}, expected 0..=3")]
    InvalidStokesIndex(usize),

    #[error("invalid rotation axis {0}, expected 1..=3")]
    InvalidAxis(usize),

    #[error("direction is not a unit vector (norm {0})")]
    NonUnitDirection(f64),

    #[error("manifold N={photons} exceeds the configured cap {cap} (raise it with STOKES_LAB_NMAX)")]
    ManifoldTooLarge { photons: usize, cap: usize },

    #[error("order {order} exceeds the tensor order cap {cap}")]
    OrderTooLarge { order: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm or trace {0})")]
    NotNormalized(f64),

    #[error("state is not physical: {0}")]
    NotPhysical(String),

    #[error("truncation tail mass {tail:e} exceeds the bound {bound:e}")]
    Truncation { tail: f64, bound: f64 },

    #[error("manifold N={0} appears more than once")]
    DuplicateManifold(usize),

    #[error("manifold N={0} is not populated")]
    MissingManifold(usize),

    #[error("moment components have an imaginary residue {0:e}; the tensor is not Hermitian")]
    ImaginaryResidue(f64),

    #[error("tensor is inconsistent: {0}")]
    InconsistentTensor(String),

    #[error("order {0} data is required but missing")]
    MissingOrder(usize),

    #[error(
        "design matrix is rank deficient: rank {rank} of {expected} (condition number {condition:e}); \
         unresolved components {deficient:?}"
    )]
    RankDeficient {
        rank: usize,
        expected: usize,
        condition: f64,
        /// Moment components `(k, l)` dominating the unresolved subspace.
        deficient: Vec<(usize, usize)>,
    },

    #[error("operator spectrum does not satisfy the recurrence preconditions: {0}")]
    Spectrum(String),

    #[error("{0} is undefined for this state")]
    Undefined(&'static str),

    #[error("linear inversion failed: {0}")]
    Inversion(String),
}
