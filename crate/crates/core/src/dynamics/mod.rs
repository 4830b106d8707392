//! Master-equation and Schrödinger integration, steady-state searches.

mod density;
mod evolve;
pub mod integrator;
mod lindblad;
mod steady;

pub use density::{DensityMatrix, HERMITICITY_TOL, POSITIVITY_TOL, TRACE_TOL};
pub use evolve::{
    evolve, fmt_sig, schrodinger_evolve, EvolveConfig, Observable, Series, SweepResult,
    TAIL_LEVELS,
};
pub use integrator::{Dopri5, OdeSystem, Stats};
pub use lindblad::{
    jump_operator, lindblad_rhs, Drive, Envelope, Hamiltonian, LindbladSystem, SchrodingerSystem,
};
pub use steady::{
    liouvillian, relax_for, steady_state_direct, steady_state_evolve, DirectSteadyState,
    SteadyConfig, SteadyState, MAX_DIRECT_DIM, NULL_SPACE_RTOL,
};
