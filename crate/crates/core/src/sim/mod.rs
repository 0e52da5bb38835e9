//! Statevector and density-matrix simulation.

pub mod density;
pub mod fidelity;
pub mod noise;
pub mod statevector;

pub use density::{
    run_density, run_density_with, DensityBranch, DensityMatrix, DensityOptions, DensityRun,
    DensitySimulator, DENSITY_QUBIT_CAP,
};
pub use fidelity::{fidelity, fidelity_with_pure, uhlmann};
pub use noise::{GateClass, NoiseModel};
pub use statevector::{
    run_statevector, run_statevector_from, BranchRecord, RunMode, StateVector,
    STATEVECTOR_QUBIT_CAP,
};
