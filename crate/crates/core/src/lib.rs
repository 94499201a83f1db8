//! Higher-order quantum polarization of two-mode light.
//!
//! `stokes-core` represents two-mode states manifold by manifold (fixed total
//! photon number `N`), builds the Stokes operators and SU(2) transformations
//! on each manifold, and computes the polarization characterization built on
//! them: polarization tensors, moment components, Stokes moment profiles,
//! degree of polarization and covariance matrices. On top of that sits a
//! photon-number-resolved polarization tomography layer that simulates ideal
//! Stokes measurements, inverts directional moments into moment components,
//! assembles tensors order by order and reconstructs the block-diagonal
//! polarization sector.
//!
//! The crate is `no_std` and only needs `alloc`. IO, serialization and the
//! command line live in the `stokes-lab` companion crate.
//!
//! Conventions used throughout:
//!
//! * The basis of manifold `N` is indexed `k = 0..=N` with `k` labelling
//!   `|N-k, k>` (horizontal count first), so `S3` is diagonal with
//!   descending eigenvalues `N - 2k`.
//! * Tensor indices run over `1..=3`; the leftmost index varies slowest.
//! * Moment components `M(k, l)` of order `r` multiply `n1^k n2^l n3^(r-k-l)`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod factorials;
pub mod fock;
pub mod linalg;
pub mod menagerie;
pub mod moments;
pub mod random;
pub mod tomography;

pub use error::{Error, Result};
pub use fock::{
    conjugate_stokes, rotation_matrix, stokes_in_direction, stokes_operator, su2_unitary,
    Direction, EulerAngles, ManifoldBasis, ManifoldOperator,
};
pub use linalg::CMatrix;
pub use menagerie::{Block, BlockDiagonalState, GeneralTwoModeState, ManifoldState};
pub use moments::{MomentComponents, PolarizationTensor, StokesProfile};

/// Absolute elementwise tolerance for derived matrix identities.
pub const IDENTITY_TOL: f64 = 1e-10;

/// Tolerance for unitarity, norms and probability sums.
pub const NORM_TOL: f64 = 1e-12;
