//! Steady-state weak-force sensing with a dissipative quantum Rabi probe.
//!
//! The crate is organised bottom-up:
//!
//! * [`hilbert`]: truncated spin ⊗ oscillator operators, Rabi Hamiltonians,
//!   displacement and squeeze unitaries.
//! * [`dynamics`]: Lindblad and Schrödinger integration, steady states from
//!   time evolution and from the Liouvillian null space.
//! * [`analytics`]: closed-form steady-state moments of the effective bosonic
//!   model and its Gaussian decomposition.
//! * [`metrology`]: shot-noise sensitivities, quantum Fisher information
//!   (closed form, covariance form, fidelity oracle) and the SLD.
//! * [`protocol`]: squeezing-enhanced adiabatic sweep and its two-state
//!   (Demkov) reduction.
//!
//! [`presets`] holds the canned parameter sets used by the command-line tool.
//!
//! All quantities are SI internally; [`units`] is the only place lab units
//! (kHz, nm, yN) are converted.

// `!(x > 0.0)` is the NaN-rejecting form used throughout validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod metrology;
pub mod presets;
pub mod protocol;
pub mod units;

pub use error::{Error, Result};
pub use hilbert::{HilbertSpec, SystemParams};
pub use linalg::{ComplexMatrix, C64};
