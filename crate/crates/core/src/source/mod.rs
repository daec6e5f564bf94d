//! Write and read physics of the dual-mode source: Clebsch-Gordan weights,
//! the spin-wave qubit, the second-order write state, Larmor precession and
//! retrieval into anti-Stokes photons.

mod cg;
mod params;
mod phase;
mod scheme;
mod state;

pub use cg::{cg_int, clebsch_gordan};
pub use params::{
    larmor_rate, PerArm, PhaseModel, RetrievalWeighting, SourceParams, DEFAULT_CHI, DEFAULT_FIELD_GAUSS,
    DEFAULT_G_FACTOR, DEFAULT_RETRIEVAL_EFF, MU_B_OVER_HBAR,
};
pub use phase::{phase_ratio_constant, phi_of_tau, relative_phase};
pub use scheme::{spin_wave_weights, Component, LevelScheme, SpinWaveQubit};
pub use state::{
    anti_stokes_pol, arm_modes, build_atom_photon_state, evolve_larmor, noisy_branches, retrieval_map, retrieve,
    retrieve_with, stokes_pol, Residual, WriteBranch,
};
