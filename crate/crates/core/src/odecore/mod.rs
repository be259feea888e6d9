//! The coupled eigenfunction system and its adaptive integrator.

mod dopri;
mod params;
mod system;
mod trajectory;

pub use dopri::{integrate_system, IntegrateOptions, Integration, Termination};
pub use params::{
    coupling, energy_scale, inverse_energy_scale, EigenParams, PhiState, ToleranceSpec,
};
pub use system::{rhs, CoupledSystem, OdeSystem, OscillatorPair};
pub use trajectory::{
    bilinear_form, bilinear_of_states, integrate, sample, Trajectory, DEFAULT_RESOLUTION,
};
