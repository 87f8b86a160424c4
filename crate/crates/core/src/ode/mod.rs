//! Radial linear systems `dy/dr = (A/r + B(r)) y + b(r)`: hypotheses,
//! integration in `ln r`, and decay-exponent estimation.

mod fit;
mod integrate;
mod prop1;
mod system;
mod trajectory;

pub use fit::{
    estimate_decay_exponent, fit_power_law, least_squares_slope, DecayClass, DecayEstimate,
    FitOptions, FitWindow, BOUNDED_BAND, DEFAULT_FLOOR, MIN_FIT_SAMPLES,
};
pub use integrate::{integrate, Tolerances, OVERFLOW_GUARD};
pub use prop1::{
    boundedness_of, growth_exponent, plant_eigenvalue, prop1_verify, prop1_verify_with,
    random_prop1_system, zero_eigenvalue_is_semisimple, Boundedness, MIN_DECAY_ORDER,
};
pub use system::{
    check_eigenvalue_condition, Coupling, CouplingFn, EigenCheck, EnvelopeCheck,
    LinearRadialSystem, Source, SourceFn, EIGEN_TOL,
};
pub use trajectory::{IntegrationStats, Selector, Trajectory};
