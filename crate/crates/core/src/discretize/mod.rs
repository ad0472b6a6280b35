//! Finite Hermitian operators from domains and potentials.

pub mod grid;
pub mod operator;
pub mod periodic;
pub mod phases;
pub mod radial;

pub use grid::{build_grid, Dir, Edge, Grid, GridSpec, Mask};
pub use operator::{
    assemble_electric, assemble_magnetic, dirichlet_laplacian, potential_values, HermitianOperator,
    OperatorMeta,
};
pub use periodic::{assemble_periodic_1d, PeriodicOperator};
pub use phases::{link_phases, LinkPhaseField};
pub use radial::{assemble_radial, assemble_radial_with, radial_lowest_extrapolated, Tridiagonal};
