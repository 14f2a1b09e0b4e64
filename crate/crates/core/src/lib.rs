//! Numerical laboratory for the embedding of classical mechanics into
//! quantum state space.
//!
//! The crate builds around a few tightly coupled pieces:
//!
//! - [`grid`]: periodic spatial grids, wavefunction samples, spectral calculus;
//! - [`kernel`]: the Gaussian-kernel Hilbert metric, exact distributional
//!   calculus on delta functions, and the smoothing map that intertwines the
//!   two representations;
//! - [`coherent`]: the phase-space manifold of minimum-uncertainty packets,
//!   its tangent frames, and the decomposition of the Schroedinger velocity;
//! - [`observables`]: operators as vector fields on the sphere of states,
//!   projective-space geometry, expectation/variance as projections;
//! - [`evolve`]: split-step propagation plus evolution-level checks
//!   (spreading law, Ehrenfest residuals, projection rates);
//! - [`classical`]: Newtonian reference dynamics, constrained-to-manifold
//!   evolution, and the action reduction on delta paths;
//! - [`multi`]: two-particle tensor states and per-particle components;
//! - [`born`]: transition probabilities and the normal-distribution link;
//! - [`io`]: the binary state format and CSV exports.

pub mod born;
pub mod classical;
pub mod coherent;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod multi;
pub mod observables;
pub mod potential;
mod spectral;

pub use born::{
    born_density, born_normal_equivalence, equivalence_sweep, isotropic_probability_law,
    separation_for_distance, sharp_state_limit, transition_probability,
};
pub use classical::{
    action_functional, classical_action, constrained_evolve, newton_integrate,
    ClassicalTrajectory, ConstrainedTrajectory,
};
pub use coherent::{
    decompose_velocity, omega, phase_space_speed, phase_space_speed_sq, sample_coherent,
    tangent_frame, tangent_frame_for_state, CoherentParams, TangentFrame, VelocityDecomposition,
};
pub use error::{Error, Result};
pub use evolve::{
    ehrenfest_residuals, projection_rate_check, propagate, state_velocity, validate_time_step,
    EvolveOptions, SplitStepPropagator, StepDiagnostics, Trajectory,
};
pub use grid::{l2_inner, l2_inner_spectral, sample_gaussian_packet, spectral_derivative};
pub use grid::{GridSpec, WaveFunction};
pub use kernel::{
    delta_h_inner, delta_path_projections, embed_point, h_inner_grid, rho_sigma, rho_sigma_apply,
    DistributionalElement, KernelSpace,
};
pub use multi::{
    constrained_two_body, per_particle_components, tensor_state, two_body_propagate,
    TwoBodyPotential, TwoBodyState, TwoBodyTrajectory,
};
pub use observables::{
    acceleration_decomposition, expectation_variance, fubini_study_distance, lie_bracket_check,
    projective_speed, projective_speed_fd, vector_field, LinearOperator,
};
pub use potential::{PotentialFamily, PotentialSpec, ScheduleForm, TimeDependence};
