//! Winding numbers, inequality checks, component labeling, the pigeonhole
//! search, gauge operations, the coupling profile and the Fourier-mode check.

pub mod components;
pub mod fourier;
pub mod gauge;
pub mod inequalities;
pub mod pigeonhole;
pub mod profile;
pub mod winding;

pub use components::{
    label_components, sample_laplacian, Component, ComponentLabeling, FluxVector,
};
pub use fourier::{complex_derivatives, fourier_mode_check, FourierCheck};
pub use gauge::{gauge_correction, gauge_invariance_check, GaugeCheck, GaugeCorrection};
pub use inequalities::{
    ab_annulus_check, annulus_lambda, annulus_radial_oracle, kato_check, kato_check_with,
    periodic_winding_check, poincare_check, twistor_residual, AbAnnulusResult, InequalityCheck,
    PeriodicCheck, PoincareDomain, PolarSamples, TwistorResidual,
};
pub use pigeonhole::{cube_collision, max_dist, pigeonhole_search, Collision, PigeonholeResult};
pub use profile::{
    compactness_profile, exceptional_epsilon, profile_row, CompactnessProfile, ProfileRow,
    ProfileSetup,
};
pub use winding::{dist_to_integers, winding_flux, winding_line};
