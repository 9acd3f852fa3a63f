//! Periodic-grid spectral substrate: grids, transforms, calculus, projection,
//! dealiasing and Lᵖ norms.

pub mod calculus;
pub mod field;
pub mod grid;
pub mod norms;

pub use calculus::{
    curl, dealias, dealias_vector, derivative, divergence, gradient, is_resolved, laplacian,
    leray_project, Curl,
};
pub use field::{from_spectral, prolong, to_spectral, SpectralField, VectorField};
pub use grid::Grid;
pub use norms::{lp_norm, lp_norm_components, lp_norm_samples, lp_norm_vector, max_abs};
