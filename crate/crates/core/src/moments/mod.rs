//! Polarization tensors, moment components, Stokes moment profiles and the
//! quantities derived from them.

mod characterization;
mod components;
mod tensor;

pub use characterization::{
    averaged_covariance, averaged_parameters, averaged_stokes_vector, block_diagonal_parameters,
    casimir_mean, count_parameters, covariance_matrix, degree_of_polarization, independent_components,
    manifold_covariance, manifold_degree_of_polarization, manifold_parameters, stokes_vector,
    uncertainty_bounds, variance_sum, ParameterCounts,
};
pub use components::{
    averaged_components, averaged_profile, casimir_rhs, direct_profile, laplacian_map, moment_components,
    ordered_product, profile_eval, MomentComponents, StokesProfile,
};
pub use tensor::{
    assemble_tensor, assemble_tensor_order2, assemble_tensor_order3, averaged_tensor, levi_civita,
    multi_direction_expectation, multi_index, tensor, tensor_descend, PolarizationTensor, MAX_TENSOR_ORDER,
};
