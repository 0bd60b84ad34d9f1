//! Mode basis, interaction matrix elements and energy formulas.

mod constant;
mod elements;
mod formulas;
mod modes;

pub use constant::{constant_term_position, constant_term_spectral, EnergyBreakdown};
pub use elements::{axis_overlap, matrix_element, MatrixElementTable, DEFAULT_ORDER, DEFAULT_TOLERANCE};
pub use formulas::{
    fit_window_constant, gp_energy_window, lhy_coefficient, lhy_energy, periodic_ground_state, GpWindow,
    PeriodicGroundState, ShellTrace,
};
pub use modes::{axis_norm, lowest_modes, mode_function, half_prefactor_norm, ModeIndex};
