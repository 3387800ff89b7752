//! Structured-grid Q1 finite elements for cell problems on `K_R`.

mod assembly;
mod element;
mod functionals;
mod grid;

pub use assembly::{assemble, assemble_with, FemSystem, DEFAULT_QUAD_POINTS};
pub use functionals::{
    corrected_energy_tensor, filtered_bilinear, filtered_coeff_average, filtered_flux_average, filtered_flux_tensor, weighted_mass,
};
pub use grid::{build_grid, Boundary, Grid};
