//! Exact constant-coefficient dynamics on a periodic lattice.

pub mod bessel;
pub mod dispersion;
pub mod dynamics;
pub mod fundamental;
pub mod norms;

pub use dispersion::{Dispersion, Propagator};
pub use dynamics::{adjoint_evolve, adjoint_evolve_with, check_window, energy, evolve, evolve_with};
pub use fundamental::{fundamental_solution_3d, near_cone_decay, near_cone_envelope, EnvelopeFit};
pub use norms::{h_norm, local_energy, local_h_norm, pair_sobolev_norm, weighted_sobolev_norm};
