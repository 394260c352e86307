//! One driven qubit coupled to one vibrational mode.
//!
//! The simulation runs in the frame where the static spin–phonon coupling
//! has been removed by the displacement e^S, S = ½ε_c(a† − a)σ_z, and then
//! moved to the interaction picture of ½ω₀σ_z + ω_l a†a. The drive reads
//!
//! H(t) = ½Ω_R (σ₊ e^{−i(Δt + φ₀)} D_I(β, t) + h.c.),  β = ε_c + iη,
//!
//! where D_I carries the phonon phases e^{i(n−m)ω_l t}.

mod evolve;
mod fock;
mod integrator;
mod polaron;

pub use evolve::{
    evolve, evolve_sampled, evolve_with, fit_first_peak, DriveSpec, Evolution, EvolveOptions,
    PhaseConvention, QuantumState, RabiFit, TimeSeries, DEFAULT_N_MAX, TRUNCATION_ERROR, TRUNCATION_WARNING,
};
pub use fock::{
    beta, displacement_matrix, displacement_matrix_element, laguerre, rabi_frequency_analytic,
    DISPLACEMENT_BOUND,
};
pub use integrator::{Dop853, Dop853Options};
pub use polaron::{
    eq1_hamiltonian, ladder_residual_profile, polaron_spectrum_residual, polaron_transform_check,
    polaron_transform_residual, polaron_unitary, transformed_ladder_check, transformed_ladder_residual,
    POLARON_EDGE_LEVELS,
};
