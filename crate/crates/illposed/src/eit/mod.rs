//! Electrical impedance tomography on the unit disc.

pub mod crossing;
pub mod dataset;
pub mod fem;
pub mod green;
pub mod linear;
pub mod mesh;
pub mod models;
pub mod single;

pub use crossing::{crossing_index, cutoff_from_crossing};
pub use dataset::{
    homogeneous_dataset, simulate_dataset, trig_patterns, uniform_angles, ElectrodeDataset, Excitation,
};
pub use fem::{fem_assemble, fem_forward_many, fem_forward_solve, ConductivityField, CsrMatrix, ForwardSolution};
pub use green::{
    boundary_green_closed, boundary_green_series, boundary_harmonic, disc_eigenfunction, green_neumann_disc,
    green_sum_identity, signed_harmonic, DiscEigenbasis,
};
pub use linear::{
    crossing_lambda, find_extrema, linear_kernel_disc, linear_system, linearized_reconstruct, reconstruct_with, Extremum, LinearReconstruction,
    LinearSystem, Phi0Mode, Raster,
};
pub use mesh::DiscMesh;
pub use models::{Bump, BumpConductivity};
pub use single::{harmonic_part, single_recon_phi, single_recon_y, HarmonicPart, YReconstruction};

/// Default TSVD cutoff of the linearized reconstruction.
pub const DEFAULT_LAMBDA: f64 = 1e-6;
/// Default truncation of the single-excitation expansion.
pub const DEFAULT_L: u32 = 10;
pub const DEFAULT_M: usize = 2;
/// Radial and angular orders of the default disc quadrature (172 points).
pub const DEFAULT_QUADRATURE: (usize, usize) = (4, 43);
