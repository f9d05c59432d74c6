//! Simulator and spectral toolkit for one-dimensional discrete-time quantum
//! walks with coin-selective loss and tunable decoherence.
//!
//! The walk alternates a coin rotation with a coin-conditional shift, and a
//! non-unitary loss operator attenuates one coin component each step. The
//! resulting non-Hermitian skin effect shows up dynamically as a directional
//! drift of the walker, which this crate quantifies three independent ways:
//!
//! * closed-form velocity expressions ([`spectral::closed_form_velocities`]),
//! * numerical band analysis in momentum space — dominant-eigenvalue
//!   extremum plus derivative ([`spectral::coherent_drift_spectral`],
//!   [`spectral::incoherent_drift_spectral`]),
//! * real-space propagation with a linear fit of the center of mass
//!   ([`evolution::evolve`], [`evolution::estimate_drift`]).
//!
//! Decoherence enters through coin dephasing or amplitude damping
//! ([`channels`]), covering the full range from coherent quantum evolution to
//! classical Markov dynamics. The `skinwalk` binary exposes simulation,
//! drift analysis, parameter sweeps, crossover location, and figure dataset
//! generation on the command line.

pub mod channels;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod mat2;
pub mod output;
pub mod spectral;
pub mod state;
pub mod walk;

pub use channels::{
    amplitude_damping, compose_damping_loss, dephasing_channel, CompositeLossSet, DampingOrder,
    KrausChannel,
};
pub use error::{Result, WalkError};
pub use evolution::{classical_markov_evolve, estimate_drift, evolve, DriftEstimate, Trajectory};
pub use spectral::{
    closed_form_velocities, coherent_drift_spectral, crossover_gamma, incoherent_drift_spectral,
    quasienergy_bands, IncoherentRegime, VelocityReport,
};
pub use state::{DensityMatrix, PureState};
pub use walk::{build_coin, build_loss, step_density, step_pure, StepChannel, WalkParams};
