//! Pseudospectral solver and diagnostics for coupled fourth-order
//! nonlinear Schrodinger systems on periodic boxes.

pub mod error;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod initial;
pub mod morawetz;
pub mod params;
pub mod propagator;
pub mod reduce;
pub mod scattering;

pub use error::{Error, Result};
pub use field::FieldState;
pub use grid::{Grid, GridSpec};
pub use initial::{make_initial, InitialKind, InitialParams};
pub use params::{Coupling, Kappa, SystemParams};
pub use propagator::{free_evolve, integrate, nonlinear_phase_step, strang_step, MultiplierTable, StepPlan, Stepper};
