//! Effective and exact driven Hamiltonians and their time evolution.

mod evolve;
mod experiments;
mod hamiltonians;

pub use evolve::{evolve, EvolutionResult, EvolveSettings, ModelKind, NORM_ABORT};
pub use experiments::{
    array_experiment, link_transfer_point, link_transfer_scan, plaquette_coupling_matrix,
    plaquette_experiment, tuned_plaquette_spacing, ArrayRun, ArrayShape, DrivenSetup, ExactModel,
    LinkPoint, LinkScan, PlaquetteFlux, PlaquetteParams, PlaquetteRun, DEFAULT_STEPS_PER_PERIOD,
    UNDEFINED_COUPLING,
};
pub use hamiltonians::{
    cosine_driven_hamiltonian, default_time_step, effective_hamiltonian, laser_driven_hamiltonian,
    CosineDrivenModel, DenseGenerator, EffectiveModel, Generator, LaserDrivenModel,
};
