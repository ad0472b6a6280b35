//! Subharmonic potentials built from bump charges, the flux schedule, trial
//! functions, mollification and the extension to B(0, 2).

pub mod bump;
pub mod extend;
pub mod field;
pub mod schedule;
pub mod trial;

pub use bump::{bump, normalize_bump, BumpProfile};
pub use extend::{extend_to_psi, Chi1, Chi2, Chi2Params};
pub use field::{
    charge_eval, flux_f64, flux_from_f64, mollify, AnalyticTerm, Flux, PhaseQuadrature, PointEval,
    PotentialField, RadialCharge,
};
pub use schedule::{assemble_phi, dist_to_integers_exact, n_k, schedule_mu, Block, MuSchedule};
pub use trial::{trial_f, trial_free, TrialFunction};
