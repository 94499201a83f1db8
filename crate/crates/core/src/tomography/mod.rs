//! Photon-number-resolved polarization tomography: direction sets, simulated
//! measurements, moment inversion and density reconstruction.

pub mod directions;
pub mod inversion;
pub mod measurement;
pub mod non_resolved;
pub mod pipeline;
pub mod reconstruction;

pub use directions::{
    choose_directions, constraint_basis, design_matrix, design_singular_values, generic_directions,
    icosahedral_directions, reduced_design, stokes_axes, symmetric_third_order_directions,
    third_order_fallback_directions, working_directions, DirectionRationale, DirectionSet, RANK_TOL,
};
pub use inversion::{
    closed_form_second_order, closed_form_second_order_with_casimir, solve_moment_components, MomentSolution,
};
pub use measurement::{
    distribution_moment, eigenvalue, estimate_moments, joint_distribution, outcome_distribution,
    simulate_measurement, simulate_shot_range, EmpiricalMoments, Estimate, JointOutcome, ManifoldMoments,
    MeasurementRecord, MeasurementSetting,
};
pub use non_resolved::{
    averaged_data, manifold_probabilities, non_resolved_pipeline, split_first_moments, split_second_moments,
    AveragedData, NonResolvedResult,
};
pub use pipeline::{
    reconstruct_manifold, run_tomography, DirectionalMoments, ManifoldDiagnostics, ManifoldReconstruction,
    ReconstructionResult, ShotMode, ThirdOrderChoice, TomographyConfig,
};
pub use reconstruction::{assemble_all_tensors, reconstruct_density, DensityReconstruction};
