//! Klein-Gordon dynamics with a compactly supported magnetic potential in
//! two dimensions.

pub mod potential;
pub mod scattering;
pub mod solver;

pub use potential::{build_potential, MagneticPotential, PotentialParams};
pub use scattering::{
    cook_experiment, cook_wave_operator, local_decay_probe, local_decay_rate, magnetic_counterexample,
    scattering_rate, scattered_limit_experiment, CookIncrement, CookReport, CookResidual, LocalDecayRecord,
    MagneticCounterexampleReport, ScatteredLimitReport, ScatteredLimitSettings,
};
pub use solver::{magnetic_evolve, MagneticSolver, MagneticState, STEP_FACTOR};
